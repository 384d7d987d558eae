//! Run configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goursat::GoursatOptions;
use crate::grid::Grid2D;
use crate::io::read_tabulated;
use crate::superpotential::Superpotential;
use crate::verify::VerifyOptions;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "VEKUA_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "vekua-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub a1: f64,
    pub a2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            a1: 1.0,
            a2: 1.0,
            n1: 201,
            n2: 201,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperpotentialConfig {
    /// `zero`, `linear`, `quadratic` or `tabulated`.
    pub name: Option<String>,
    pub params: Vec<f64>,
    pub chi1_file: Option<PathBuf>,
    pub chi2_file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoursatConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GoursatConfig {
    fn default() -> Self {
        let d = GoursatOptions::<f64>::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub exact_floor: f64,
    pub families: Vec<String>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let d = VerifyOptions::<f64>::default();
        Self {
            ratio_min: d.ratio_band.0,
            ratio_max: d.ratio_band.1,
            exact_floor: d.exact_floor,
            families: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub superpotential: SuperpotentialConfig,
    pub goursat: GoursatConfig,
    pub verify: VerifyConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n1 % 2 == 0 || g.n2 % 2 == 0 || g.n1 < 3 || g.n2 < 3 {
            return Err(Error::Config(format!("grid sizes must be odd and at least 3, got {}x{}", g.n1, g.n2)));
        }
        if !(g.a1 > 0.0 && g.a2 > 0.0 && g.a1.is_finite() && g.a2.is_finite()) {
            return Err(Error::Config("grid half-widths must be positive".into()));
        }
        let v = &self.verify;
        let positive = [self.goursat.tol, v.ratio_min, v.ratio_max, v.exact_floor];
        if positive.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if v.ratio_min > v.ratio_max {
            return Err(Error::Config("ratio_min exceeds ratio_max".into()));
        }
        if self.goursat.max_iter == 0 {
            return Err(Error::Config("goursat.max_iter must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D<f64>> {
        let g = &self.grid;
        Grid2D::new(g.a1, g.n1, g.a2, g.n2)
    }

    /// The configured superpotential on `grid`.
    pub fn superpotential(&self, grid: Grid2D<f64>) -> Result<Superpotential<f64>> {
        let s = &self.superpotential;
        let tab = s.chi1_file.is_some() || s.chi2_file.is_some();
        let name = s.name.as_deref().unwrap_or(if tab { "tabulated" } else { "zero" });
        if name == "tabulated" {
            return match (&s.chi1_file, &s.chi2_file) {
                (Some(x), Some(y)) => read_tabulated(x, y, grid),
                _ => Err(Error::Config("a tabulated superpotential needs both chi1 and chi2 files".into())),
            };
        }
        if tab {
            return Err(Error::Config(format!("sample files given for catalog superpotential `{name}`")));
        }
        Superpotential::catalog(name, &s.params, grid)
    }

    pub fn goursat_options(&self) -> GoursatOptions<f64> {
        GoursatOptions {
            tol: self.goursat.tol,
            max_iter: self.goursat.max_iter,
        }
    }

    pub fn verify_options(&self) -> VerifyOptions<f64> {
        VerifyOptions {
            corrupt_u0: None,
            goursat: self.goursat_options(),
            ratio_band: (self.verify.ratio_min, self.verify.ratio_max),
            exact_floor: self.verify.exact_floor,
            families: self.verify.families.clone(),
        }
    }

    /// Flag, then `VEKUA_OUT_DIR`, then the config file, then the default.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c.grid.n1, 201);
        let sp = c.superpotential(Grid2D::square(1.0, 11).unwrap()).unwrap();
        assert!(sp.is_zero());
        assert_eq!(c.goursat_options(), GoursatOptions::default());
    }

    #[test]
    fn parses_sections() {
        let c = RunConfig::from_toml_str(
            r#"
            out_dir = "runs/a"
            [grid]
            a1 = 2.0
            n1 = 41
            n2 = 21
            [superpotential]
            name = "quadratic"
            params = [1.0, 0.5]
            [goursat]
            tol = 1e-10
            [verify]
            families = ["vekua"]
            "#,
        )
        .unwrap();
        let g = c.grid().unwrap();
        assert_eq!((g.nx(), g.ny()), (41, 21));
        assert_eq!(c.superpotential(g).unwrap().name(), "quadratic");
        assert_eq!(c.goursat_options().tol, 1e-10);
        assert_eq!(c.verify_options().families, vec!["vekua".to_string()]);
        assert_eq!(c.out_dir(Some(Path::new("flag"))), PathBuf::from("flag"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::from_toml_str("[grid]\nn1 = 40").is_err());
        assert!(RunConfig::from_toml_str("[goursat]\ntol = -1.0").is_err());
        assert!(RunConfig::from_toml_str("[grid]\nsize = 3").is_err());
        assert!(RunConfig::from_toml_str("grid = 3").is_err());
        let c = RunConfig::from_toml_str("[superpotential]\nname = \"tabulated\"").unwrap();
        assert!(c.superpotential(Grid2D::square(1.0, 5).unwrap()).is_err());
    }
}
