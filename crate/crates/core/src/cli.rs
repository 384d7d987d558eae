//! Command-line surface: `formal-powers`, `transmute`, `conjugate`, `expand`
//! and `verify`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::conjugate::{conjugate_from_w1, conjugate_from_w2};
use crate::error::{Error, Result};
use crate::expansion::{
    evaluate_series, fit_formal_polynomial, round_trip_bound, series_residual, taylor_coefficients, BasisKind,
    FitResult,
};
use crate::field::ComplexField;
use crate::formal_powers::{build_formal_powers, Unit};
use crate::grid::GridSpec;
use crate::io::{read_field_csv, write_field_csv, write_grid_json, write_json, write_kernel_csv, write_real_field_csv};
use crate::superpotential::Superpotential;
use crate::transmutation::{TransmuteKind, Transmutations};
use crate::verify::{run_verify, Report, Verdict};

/// Exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Pass = 0,
    VerificationFailure = 1,
    Usage = 2,
    NonConvergence = 3,
}

impl ExitCode {
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::NonConvergence { .. } => Self::NonConvergence,
            Error::DegeneratePair { .. }
            | Error::Compatibility { .. }
            | Error::Precondition { .. }
            | Error::CrossCheck { .. }
            | Error::RankDeficient { .. }
            | Error::NoiseTooLarge { .. } => Self::VerificationFailure,
            _ => Self::Usage,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "vekua", version, about = "Formal powers, SUSY operators and transmutations on a grid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate Z^(n)(a) and Z1^(n)(a) for a in {1, i}.
    FormalPowers {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
    },
    /// Apply a transmutation operator to a field.
    Transmute {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = OpArg::T0)]
        op: OpArg,
        /// Also write the Goursat kernels as `x,t,K` triangles.
        #[arg(long)]
        kernel_dump: bool,
    },
    /// Build the conjugate partner of a real field (read from the `re` column).
    Conjugate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// `2to0`: W1 in ker H2 gives W2; `0to2`: W2 in ker H0 gives W1.
        #[arg(long, value_enum)]
        direction: DirectionArg,
    },
    /// Fit a field by formal polynomials, or expand it in a Taylor series.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = BasisArg::KerH0)]
        basis: BasisArg,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Taylor coefficients at z0 of the complex input instead of a fit.
        #[arg(long)]
        taylor: bool,
    },
    /// Run the identity battery at N and 2N - 1.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Add a constant to U0 (the report must then fail).
        #[arg(long, num_args = 0..=1, default_missing_value = "1.0", allow_negative_numbers = true)]
        corrupt_u0: Option<f64>,
        /// Comma-separated identity families to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OpArg {
    #[value(name = "T0")]
    T0,
    #[value(name = "T1")]
    T1,
    #[value(name = "T1d")]
    T1d,
    #[value(name = "T2d")]
    T2d,
}

impl From<OpArg> for TransmuteKind {
    fn from(op: OpArg) -> Self {
        match op {
            OpArg::T0 => TransmuteKind::T0,
            OpArg::T1 => TransmuteKind::T1,
            OpArg::T1d => TransmuteKind::T1d,
            OpArg::T2d => TransmuteKind::T2d,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    #[value(name = "2to0")]
    TwoToZero,
    #[value(name = "0to2")]
    ZeroToTwo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    KerH0,
    KerH2,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// `zero`, `linear`, `quadratic` or `tabulated`.
    #[arg(long)]
    pub superpotential: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub params: Option<Vec<f64>>,
    #[arg(long)]
    pub chi1_file: Option<PathBuf>,
    #[arg(long)]
    pub chi2_file: Option<PathBuf>,
    #[arg(long)]
    pub a1: Option<f64>,
    #[arg(long)]
    pub a2: Option<f64>,
    /// Nodes per axis (sets both N1 and N2).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Expansion point; only the origin node is supported.
    #[arg(long, default_value = "0,0")]
    pub z0: String,
    #[arg(long)]
    pub goursat_tol: Option<f64>,
    #[arg(long)]
    pub goursat_max_iter: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let s = &mut cfg.superpotential;
        if let Some(n) = &self.superpotential {
            s.name = Some(n.clone());
        }
        if let Some(p) = &self.params {
            s.params = p.clone();
        }
        if self.chi1_file.is_some() {
            s.chi1_file = self.chi1_file.clone();
        }
        if self.chi2_file.is_some() {
            s.chi2_file = self.chi2_file.clone();
        }
        let g = &mut cfg.grid;
        if let Some(a) = self.a1 {
            g.a1 = a;
        }
        if let Some(a) = self.a2 {
            g.a2 = a;
        }
        if let Some(n) = self.n {
            g.n1 = n;
            g.n2 = n;
        }
        if let Some(n) = self.n1 {
            g.n1 = n;
        }
        if let Some(n) = self.n2 {
            g.n2 = n;
        }
        if let Some(t) = self.goursat_tol {
            cfg.goursat.tol = t;
        }
        if let Some(m) = self.goursat_max_iter {
            cfg.goursat.max_iter = m;
        }
        cfg.validate()?;
        let z0: Vec<f64> = self
            .z0
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("--z0 `{}`: {e}", self.z0)))?;
        if z0 != [0.0, 0.0] {
            return Err(Error::Config(format!("--z0 `{}`: only the origin 0,0 is supported", self.z0)));
        }
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    file: String,
    sequence: usize,
    n: usize,
    a: &'static str,
}

#[derive(Serialize)]
struct Manifest {
    command: &'static str,
    superpotential: String,
    params: Vec<f64>,
    grid: GridSpec,
    z0: [f64; 2],
    files: Vec<ManifestEntry>,
}

fn prepare(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn formal_powers(cfg: &RunConfig, out: &Path, n_max: usize) -> Result<ExitCode> {
    let sp = cfg.superpotential(cfg.grid()?)?;
    let table = build_formal_powers(&sp, n_max)?;
    prepare(out)?;
    let mut files = Vec::new();
    for m in 0..2 {
        for n in 0..=n_max {
            for u in Unit::BOTH {
                let file = format!("Z{m}_n{n}_a{}.csv", u.label());
                write_field_csv(&out.join(&file), table.get(m, n, u)?)?;
                files.push(ManifestEntry {
                    file,
                    sequence: m,
                    n,
                    a: u.label(),
                });
            }
        }
    }
    write_grid_json(&out.join("grid.json"), sp.grid())?;
    let manifest = Manifest {
        command: "formal-powers",
        superpotential: sp.name().to_string(),
        params: sp.params().to_vec(),
        grid: sp.grid().spec(),
        z0: [0.0, 0.0],
        files,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    println!("wrote {} formal powers to {}", manifest.files.len(), out.display());
    Ok(ExitCode::Pass)
}

/// The configured superpotential on the grid of an input field.
fn input_superpotential(cfg: &RunConfig, input: &ComplexField<f64>) -> Result<Superpotential<f64>> {
    cfg.superpotential(*input.grid())
}

fn transmute(cfg: &RunConfig, out: &Path, input: &Path, op: OpArg, dump: bool) -> Result<ExitCode> {
    let w = read_field_csv::<f64>(input)?;
    let sp = input_superpotential(cfg, &w)?;
    let tr = Transmutations::new(&sp, cfg.goursat_options())?;
    let res = tr.apply(op.into(), &w);
    prepare(out)?;
    let name = format!("transmuted_{op:?}.csv");
    write_field_csv(&out.join(&name), &res)?;
    write_grid_json(&out.join("grid.json"), sp.grid())?;
    if dump {
        write_kernel_csv(&out.join("kernel_x.csv"), &tr.x.kernel().triangle())?;
        write_kernel_csv(&out.join("kernel_y.csv"), &tr.y.kernel().triangle())?;
    }
    println!(
        "{op:?}: wrote {} (Goursat iterations {}/{})",
        out.join(name).display(),
        tr.x.kernel().iterations(),
        tr.y.kernel().iterations()
    );
    Ok(ExitCode::Pass)
}

#[derive(Serialize)]
struct ConjugateReport {
    direction: &'static str,
    superpotential: String,
    residual: f64,
    gauge_constant: f64,
    warnings: Vec<String>,
}

fn conjugate(cfg: &RunConfig, out: &Path, input: &Path, dir: DirectionArg) -> Result<ExitCode> {
    let w = read_field_csv::<f64>(input)?;
    let sp = input_superpotential(cfg, &w)?;
    let given = w.re();
    let (res, full, label) = match dir {
        DirectionArg::TwoToZero => {
            let r = conjugate_from_w1(&sp, &given)?;
            let full = ComplexField::from_parts(&given, &r.partner);
            (r, full, "2to0")
        }
        DirectionArg::ZeroToTwo => {
            let r = conjugate_from_w2(&sp, &given)?;
            let full = ComplexField::from_parts(&r.partner, &given);
            (r, full, "0to2")
        }
    };
    prepare(out)?;
    write_real_field_csv(&out.join("partner.csv"), &res.partner)?;
    write_field_csv(&out.join("combined.csv"), &full)?;
    for w in &res.warnings {
        eprintln!("warning: {w}");
    }
    let report = ConjugateReport {
        direction: label,
        superpotential: sp.name().to_string(),
        residual: res.residual,
        gauge_constant: res.gauge_constant,
        warnings: res.warnings,
    };
    write_json(&out.join("conjugate_report.json"), &report)?;
    println!("conjugate {label}: Vekua residual {:.3e}", report.residual);
    Ok(ExitCode::Pass)
}

#[derive(Serialize)]
struct FitCoefficient {
    n: usize,
    a: &'static str,
    coefficient: f64,
    dropped: bool,
}

#[derive(Serialize)]
struct FitReport {
    basis: &'static str,
    degree: usize,
    coefficients: Vec<FitCoefficient>,
    singular_values: Vec<f64>,
    residual_max: f64,
    residual_rms: f64,
}

#[derive(Serialize)]
struct TaylorCoefficient {
    n: usize,
    re: f64,
    im: f64,
    uncertainty: f64,
}

#[derive(Serialize)]
struct TaylorReport {
    order: usize,
    coefficients: Vec<TaylorCoefficient>,
    subrect_residual: f64,
    noise_bound: f64,
}

fn expand(cfg: &RunConfig, out: &Path, input: &Path, basis: BasisArg, degree: usize, taylor: bool) -> Result<ExitCode> {
    let w = read_field_csv::<f64>(input)?;
    let sp = input_superpotential(cfg, &w)?;
    let table = build_formal_powers(&sp, degree)?;
    prepare(out)?;
    if taylor {
        let c = taylor_coefficients(&sp, &w, &table, degree)?;
        let series = evaluate_series(&c, &table)?;
        let report = TaylorReport {
            order: degree,
            coefficients: c
                .coeffs
                .iter()
                .zip(&c.uncertainty)
                .enumerate()
                .map(|(n, (a, u))| TaylorCoefficient {
                    n,
                    re: a.re,
                    im: a.im,
                    uncertainty: *u,
                })
                .collect(),
            subrect_residual: series_residual(&c, &table, &w)?,
            noise_bound: round_trip_bound(&c, &table, &w)?,
        };
        write_field_csv(&out.join("series.csv"), &series)?;
        write_field_csv(&out.join("residual.csv"), &(&series - &w))?;
        write_json(&out.join("coefficients.json"), &report)?;
        println!(
            "taylor order {degree}: residual {:.3e} on the half-radius subrectangle (noise bound {:.3e})",
            report.subrect_residual, report.noise_bound
        );
        return Ok(ExitCode::Pass);
    }
    let (kind, label) = match basis {
        BasisArg::KerH0 => (BasisKind::KerH0, "ker-h0"),
        BasisArg::KerH2 => (BasisKind::KerH2, "ker-h2"),
    };
    let target = w.re();
    let fit = fit_formal_polynomial(&sp, &target, kind, &table, degree)?;
    let mut coefficients = Vec::new();
    for n in 0..=degree {
        for u in Unit::BOTH {
            let slot = FitResult::<f64>::slot(n, u);
            coefficients.push(FitCoefficient {
                n,
                a: u.label(),
                coefficient: fit.coefficients[slot],
                dropped: fit.dropped.contains(&slot),
            });
        }
    }
    write_real_field_csv(&out.join("residual.csv"), &fit.residual)?;
    let report = FitReport {
        basis: label,
        degree,
        coefficients,
        singular_values: fit.singular_values.clone(),
        residual_max: fit.residual_max,
        residual_rms: fit.residual_rms,
    };
    write_json(&out.join("coefficients.json"), &report)?;
    println!("fit {label} degree {degree}: interior residual max {:.3e}", fit.residual_max);
    Ok(ExitCode::Pass)
}

fn print_report(r: &Report) {
    println!("{:<44} {:<20} {:>11} {:>11} {:>10} {:>6}  verdict", "identity", "family", "residual", "fine", "cap", "ratio");
    for row in &r.rows {
        let ratio = row.ratio.map_or("-".to_string(), |q| format!("{q:.2}"));
        let v = if row.verdict == Verdict::Pass { "pass" } else { "FAIL" };
        println!(
            "{:<44} {:<20} {:>11.3e} {:>11.3e} {:>10.2e} {:>6}  {v}",
            row.identity, row.reference, row.residual, row.residual_fine, row.cap, ratio
        );
    }
}

fn verify(cfg: &RunConfig, out: &Path, corrupt: Option<f64>, only: Vec<String>) -> Result<ExitCode> {
    let sp = cfg.superpotential(cfg.grid()?)?;
    let mut opts = cfg.verify_options();
    opts.corrupt_u0 = corrupt;
    if !only.is_empty() {
        opts.families = only;
    }
    let report = run_verify(&sp, &opts)?;
    prepare(out)?;
    write_json(&out.join("verify_report.json"), &report)?;
    print_report(&report);
    if report.passed {
        println!("all {} identities pass", report.rows.len());
        Ok(ExitCode::Pass)
    } else {
        for row in report.failures() {
            eprintln!("failed: {} [{}]", row.identity, row.reference);
        }
        Ok(ExitCode::VerificationFailure)
    }
}

pub fn run_command(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::FormalPowers { common, n_max } => {
            let cfg = common.config()?;
            formal_powers(&cfg, &cfg.out_dir(common.out_dir.as_deref()), n_max)
        }
        Command::Transmute {
            common,
            input,
            op,
            kernel_dump,
        } => {
            let cfg = common.config()?;
            transmute(&cfg, &cfg.out_dir(common.out_dir.as_deref()), &input, op, kernel_dump)
        }
        Command::Conjugate {
            common,
            input,
            direction,
        } => {
            let cfg = common.config()?;
            conjugate(&cfg, &cfg.out_dir(common.out_dir.as_deref()), &input, direction)
        }
        Command::Expand {
            common,
            input,
            basis,
            degree,
            taylor,
        } => {
            let cfg = common.config()?;
            expand(&cfg, &cfg.out_dir(common.out_dir.as_deref()), &input, basis, degree, taylor)
        }
        Command::Verify {
            common,
            corrupt_u0,
            only,
        } => {
            let cfg = common.config()?;
            verify(&cfg, &cfg.out_dir(common.out_dir.as_deref()), corrupt_u0, only)
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Usage as i32 } else { 0 };
        }
    };
    match run_command(cli) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::for_error(&e) as i32
        }
    }
}
