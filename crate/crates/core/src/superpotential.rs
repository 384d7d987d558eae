//! Separable superpotentials `chi(x, y) = chi1(x) + chi2(y)`, the potentials
//! they induce, and generating pairs with their characteristic coefficients.

use num_complex::Complex;

use crate::diff::{d_z, d_zbar, derivative_1d, second_derivative_1d};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Field, ScalarField};
use crate::grid::{Grid1D, Grid2D};
use crate::scalar::Real;

/// How an axis profile is evaluated away from the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisModel<T> {
    /// `chi(s) = c1 s + c2 s^2 / 2`, evaluated in closed form.
    Polynomial { c1: T, c2: T },
    /// Node samples; derivatives by finite differences, off-node values by
    /// cubic interpolation.
    Sampled,
}

/// One factor `chi_j` of a separable superpotential, sampled on its axis.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisProfile<T> {
    grid: Grid1D<T>,
    model: AxisModel<T>,
    chi: Vec<T>,
    d1: Vec<T>,
    d2: Vec<T>,
}

impl<T: Real> AxisProfile<T> {
    pub fn polynomial(grid: Grid1D<T>, c1: T, c2: T) -> Self {
        let half = T::lit(0.5);
        let nodes = grid.nodes();
        Self {
            grid,
            model: AxisModel::Polynomial { c1, c2 },
            chi: nodes.iter().map(|&s| c1 * s + half * c2 * s * s).collect(),
            d1: nodes.iter().map(|&s| c1 + c2 * s).collect(),
            d2: vec![c2; grid.len()],
        }
    }

    pub fn sampled(grid: Grid1D<T>, chi: Vec<T>) -> Result<Self> {
        if chi.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} samples for a {}-node axis",
                chi.len(),
                grid.len()
            )));
        }
        let h = grid.spacing();
        let d1 = derivative_1d(&chi, h, 1);
        let d2 = second_derivative_1d(&chi, h);
        Ok(Self {
            grid,
            model: AxisModel::Sampled,
            chi,
            d1,
            d2,
        })
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    /// The same profile on another axis grid.
    pub fn resampled(&self, grid: Grid1D<T>) -> Result<Self> {
        match self.model {
            AxisModel::Polynomial { c1, c2 } => Ok(Self::polynomial(grid, c1, c2)),
            AxisModel::Sampled => {
                if grid.half_width() > self.grid.half_width() * (T::one() + T::lit(1e-12)) {
                    return Err(Error::Grid(format!(
                        "cannot resample a tabulated profile beyond its half-width {}",
                        self.grid.half_width()
                    )));
                }
                let chi = grid.nodes().iter().map(|&s| self.eval(s).0).collect();
                Self::sampled(grid, chi)
            }
        }
    }

    pub fn model(&self) -> &AxisModel<T> {
        &self.model
    }

    pub fn chi(&self) -> &[T] {
        &self.chi
    }

    pub fn d1(&self) -> &[T] {
        &self.d1
    }

    pub fn d2(&self) -> &[T] {
        &self.d2
    }

    /// Sturm-Liouville potential `chi'' + chi'^2` at the nodes.
    pub fn q(&self) -> Vec<T> {
        self.d1
            .iter()
            .zip(&self.d2)
            .map(|(&a, &b)| b + a * a)
            .collect()
    }

    /// `(chi, chi', chi'')` at an arbitrary point of the axis.
    pub fn eval(&self, s: T) -> (T, T, T) {
        match self.model {
            AxisModel::Polynomial { c1, c2 } => {
                (c1 * s + T::lit(0.5) * c2 * s * s, c1 + c2 * s, c2)
            }
            AxisModel::Sampled => (
                self.interpolate(&self.chi, s),
                self.interpolate(&self.d1, s),
                self.interpolate(&self.d2, s),
            ),
        }
    }

    pub fn q_at(&self, s: T) -> T {
        let (_, d1, d2) = self.eval(s);
        d2 + d1 * d1
    }

    /// `h = d/ds e^{chi}` at the origin.
    pub fn h_param(&self) -> T {
        let (c, d, _) = self.eval(T::zero());
        d * c.exp()
    }

    pub fn is_zero(&self) -> bool {
        self.chi.iter().chain(&self.d1).chain(&self.d2).all(|v| *v == T::zero())
    }

    pub fn negated(&self) -> Self {
        let model = match self.model {
            AxisModel::Polynomial { c1, c2 } => AxisModel::Polynomial { c1: -c1, c2: -c2 },
            AxisModel::Sampled => AxisModel::Sampled,
        };
        Self {
            grid: self.grid,
            model,
            chi: self.chi.iter().map(|v| -*v).collect(),
            d1: self.d1.iter().map(|v| -*v).collect(),
            d2: self.d2.iter().map(|v| -*v).collect(),
        }
    }

    /// Largest mismatch between the stored derivatives and finite differences
    /// of the stored values.
    pub fn derivative_defect(&self) -> T {
        let h = self.grid.spacing();
        let fd1 = derivative_1d(&self.chi, h, 1);
        let fd2 = second_derivative_1d(&self.chi, h);
        let m1 = fd1.iter().zip(&self.d1).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        let m2 = fd2.iter().zip(&self.d2).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        m1.max(m2)
    }

    /// 4-point Lagrange interpolation of node samples.
    fn interpolate(&self, samples: &[T], s: T) -> T {
        let n = self.grid.len();
        let h = self.grid.spacing();
        let r = (s + self.grid.half_width()) / h;
        let cell = r.floor().to_isize().unwrap_or(0);
        if n < 4 {
            let k = cell.clamp(0, n as isize - 2) as usize;
            let t = r - T::from_usize_lossy(k);
            return samples[k] * (T::one() - t) + samples[k + 1] * t;
        }
        let k0 = (cell - 1).clamp(0, n as isize - 4) as usize;
        let t = r - T::from_usize_lossy(k0);
        let mut acc = T::zero();
        for i in 0..4 {
            let mut w = T::one();
            for j in 0..4 {
                if i != j {
                    w = w * (t - T::from_usize_lossy(j))
                        / (T::from_usize_lossy(i) - T::from_usize_lossy(j));
                }
            }
            acc += w * samples[k0 + i];
        }
        acc
    }
}

/// `chi(x, y) = chi1(x) + chi2(y)` on a rectangle, normalized so that
/// `chi1(0) = chi2(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superpotential<T> {
    name: String,
    params: Vec<T>,
    grid: Grid2D<T>,
    x: AxisProfile<T>,
    y: AxisProfile<T>,
}

impl<T: Real> Superpotential<T> {
    /// Catalog families: `zero`, `linear [alpha, beta]` (`alpha x + beta y`),
    /// `quadratic [alpha, beta]` (`(alpha x^2 + beta y^2) / 2`).
    pub fn catalog(name: &str, params: &[T], grid: Grid2D<T>) -> Result<Self> {
        let zero = T::zero();
        let (cx, cy) = match name {
            "zero" => {
                if !params.is_empty() {
                    return Err(Error::Parameters("`zero` takes no parameters".into()));
                }
                ((zero, zero), (zero, zero))
            }
            "linear" | "quadratic" => {
                if params.len() != 2 || params.iter().any(|p| !p.is_finite()) {
                    return Err(Error::Parameters(format!(
                        "`{name}` takes two finite parameters [alpha, beta]"
                    )));
                }
                if name == "linear" {
                    ((params[0], zero), (params[1], zero))
                } else {
                    ((zero, params[0]), (zero, params[1]))
                }
            }
            "tabulated" => {
                return Err(Error::Parameters(
                    "`tabulated` superpotentials are built from sample files".into(),
                ))
            }
            other => return Err(Error::UnknownSuperpotential(other.to_string())),
        };
        Ok(Self {
            name: name.to_string(),
            params: params.to_vec(),
            grid,
            x: AxisProfile::polynomial(grid.gx, cx.0, cx.1),
            y: AxisProfile::polynomial(grid.gy, cy.0, cy.1),
        })
    }

    /// Superpotential from node samples of `chi1` on the x-axis and `chi2` on
    /// the y-axis.
    pub fn tabulated(grid: Grid2D<T>, chi1: Vec<T>, chi2: Vec<T>) -> Result<Self> {
        let tol = T::lit(1e-10);
        for (axis, (g, s)) in [(&grid.gx, &chi1), (&grid.gy, &chi2)].into_iter().enumerate() {
            if s.len() == g.len() && s[g.origin()].abs() > tol {
                return Err(Error::Normalization {
                    axis: axis + 1,
                    value: s[g.origin()].to_f64_lossy(),
                });
            }
        }
        Ok(Self {
            name: "tabulated".into(),
            params: Vec::new(),
            grid,
            x: AxisProfile::sampled(grid.gx, chi1)?,
            y: AxisProfile::sampled(grid.gy, chi2)?,
        })
    }

    pub fn from_profiles(name: &str, x: AxisProfile<T>, y: AxisProfile<T>) -> Self {
        Self {
            name: name.to_string(),
            params: Vec::new(),
            grid: Grid2D { gx: *x.grid(), gy: *y.grid() },
            x,
            y,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The same superpotential on another grid.
    pub fn resampled(&self, grid: Grid2D<T>) -> Result<Self> {
        Ok(Self {
            name: self.name.clone(),
            params: self.params.clone(),
            grid,
            x: self.x.resampled(grid.gx)?,
            y: self.y.resampled(grid.gy)?,
        })
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Profile of axis `1` (x) or `2` (y).
    pub fn axis(&self, j: usize) -> &AxisProfile<T> {
        match j {
            1 => &self.x,
            2 => &self.y,
            _ => panic!("axis index must be 1 or 2, got {j}"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `-chi`.
    pub fn negated(&self) -> Self {
        Self {
            name: format!("-{}", self.name),
            params: self.params.clone(),
            grid: self.grid,
            x: self.x.negated(),
            y: self.y.negated(),
        }
    }

    /// `-chi1 + chi2`, the superpotential of the successor pair.
    pub fn successor(&self) -> Self {
        Self {
            name: format!("{}~", self.name),
            params: self.params.clone(),
            grid: self.grid,
            x: self.x.negated(),
            y: self.y.clone(),
        }
    }

    fn broadcast(&self, fx: &[T], fy: &[T]) -> ScalarField<T> {
        let g = self.grid;
        let mut v = Vec::with_capacity(g.len());
        for &b in fy {
            v.extend(fx.iter().map(|&a| a + b));
        }
        Field::from_values(g, v).expect("axis profiles match the grid")
    }

    pub fn chi_field(&self) -> ScalarField<T> {
        self.broadcast(self.x.chi(), self.y.chi())
    }

    /// `e^{chi}` assembled as `e^{chi1} e^{chi2}`.
    pub fn exp_field(&self, sign: T) -> ScalarField<T> {
        let ex: Vec<T> = self.x.chi().iter().map(|c| (sign * *c).exp()).collect();
        let ey: Vec<T> = self.y.chi().iter().map(|c| (sign * *c).exp()).collect();
        Field::from_axes(self.grid, &ex, &ey).expect("axis profiles match the grid")
    }

    /// `d chi / d x_j`.
    pub fn dchi_field(&self, j: usize) -> ScalarField<T> {
        let zx = vec![T::zero(); self.grid.nx()];
        let zy = vec![T::zero(); self.grid.ny()];
        match j {
            1 => self.broadcast(self.x.d1(), &zy),
            2 => self.broadcast(&zx, self.y.d1()),
            _ => panic!("axis index must be 1 or 2, got {j}"),
        }
    }

    /// `d^2 chi / d x_i d x_j` (the mixed derivative vanishes).
    pub fn d2chi_field(&self, i: usize, j: usize) -> ScalarField<T> {
        let zx = vec![T::zero(); self.grid.nx()];
        let zy = vec![T::zero(); self.grid.ny()];
        match (i, j) {
            (1, 1) => self.broadcast(self.x.d2(), &zy),
            (2, 2) => self.broadcast(&zx, self.y.d2()),
            (1, 2) | (2, 1) => ScalarField::zeros(self.grid),
            _ => panic!("axis indices must be 1 or 2, got ({i}, {j})"),
        }
    }

    /// `d chi / dz = (chi_x - i chi_y) / 2`.
    pub fn dz_chi(&self) -> ComplexField<T> {
        let half = T::lit(0.5);
        ComplexField::from_parts(&self.dchi_field(1).scale(half), &self.dchi_field(2).scale(-half))
    }

    /// `d chi / dzbar = (chi_x + i chi_y) / 2`.
    pub fn dzbar_chi(&self) -> ComplexField<T> {
        self.dz_chi().conj()
    }

    /// Largest mismatch between supplied derivatives and finite differences of
    /// the samples, over both axes.
    pub fn derivative_defect(&self) -> T {
        self.x.derivative_defect().max(self.y.derivative_defect())
    }
}

/// `U0`, `U2` and the 2x2 matrix potential of `H1`.
#[derive(Clone, Debug)]
pub struct Potentials<T> {
    pub u0: ScalarField<T>,
    pub u2: ScalarField<T>,
    /// `h1[i][j]` is the potential entry `(i + 1, j + 1)`.
    pub h1: [[ScalarField<T>; 2]; 2],
}

pub fn potentials<T: Real>(sp: &Superpotential<T>) -> Potentials<T> {
    let c1 = sp.dchi_field(1);
    let c2 = sp.dchi_field(2);
    let c11 = sp.d2chi_field(1, 1);
    let c22 = sp.d2chi_field(2, 2);
    let grad2 = &c1.mul(&c1) + &c2.mul(&c2);
    let lap = &c11 + &c22;
    let u0 = &grad2 - &lap;
    let u2 = &grad2 + &lap;

    // complex form: 4 (|chi_z|^2 +/- Re chi_zz) on the diagonal, -4 Im chi_zz off it
    let four = T::lit(4.0);
    let quarter = T::lit(0.25);
    let chi_z = sp.dz_chi();
    let mod2 = chi_z.map(|v| v.norm_sqr() * four);
    let c12 = sp.d2chi_field(1, 2);
    let chi_zz_re = (&c11 - &c22).scale(quarter);
    let chi_zz_im = c12.scale(-T::lit(0.5));
    let h11 = &mod2 + &chi_zz_re.scale(four);
    let h22 = &mod2 - &chi_zz_re.scale(four);
    let h12 = chi_zz_im.scale(-four);
    Potentials {
        u0,
        u2,
        h1: [[h11, h12.clone()], [h12, h22]],
    }
}

/// `2 chi_ij + delta_ij U0`, the same matrix potential assembled from the
/// real form.
pub fn h1_potential_real_form<T: Real>(sp: &Superpotential<T>) -> [[ScalarField<T>; 2]; 2] {
    let u0 = potentials(sp).u0;
    let two = T::lit(2.0);
    let e = |i: usize, j: usize| {
        let m = sp.d2chi_field(i, j).scale(two);
        if i == j {
            &m + &u0
        } else {
            m
        }
    };
    [[e(1, 1), e(1, 2)], [e(2, 1), e(2, 2)]]
}

/// Which potential the Riccati residual is formed for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiccatiBranch {
    /// `R = -chi_z`, potential `U0`.
    U0,
    /// `R = chi_z`, potential `U2`.
    U2,
}

/// `dzbar R + |R|^2 - U / 4` at every node.
pub fn riccati_residual<T: Real>(sp: &Superpotential<T>, branch: RiccatiBranch) -> ScalarField<T> {
    let pots = potentials(sp);
    let (r, u) = match branch {
        RiccatiBranch::U0 => (sp.dz_chi().scale(-T::one()), pots.u0),
        RiccatiBranch::U2 => (sp.dz_chi(), pots.u2),
    };
    let quarter = T::lit(0.25);
    let dr = d_zbar(&r);
    let lhs = dr.zip_map(&r, |d, rv| d.re + rv.norm_sqr());
    &lhs - &u.scale(quarter)
}

/// Two complex fields with `Im(conj(F) G) != 0` at every node.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratingPair<T> {
    pub f: ComplexField<T>,
    pub g: ComplexField<T>,
}

impl<T: Real> GeneratingPair<T> {
    pub fn new(f: ComplexField<T>, g: ComplexField<T>) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::Shape("pair components on different grids".into()));
        }
        let grid = *f.grid();
        let eps = T::epsilon() * T::lit(16.0);
        for iy in 0..grid.ny() {
            for ix in 0..grid.nx() {
                let (a, b) = (f.at(ix, iy), g.at(ix, iy));
                let w = (a.conj() * b).im;
                if !(w.abs() > eps * a.norm() * b.norm()) {
                    return Err(Error::DegeneratePair { ix, iy });
                }
            }
        }
        Ok(Self { f, g })
    }

    /// `(e^{chi}, i e^{-chi})`, the pair of the main Vekua equation.
    pub fn main(sp: &Superpotential<T>) -> Self {
        let ep = sp.exp_field(T::one());
        let em = sp.exp_field(-T::one());
        Self {
            f: ep.to_complex(),
            g: ComplexField::from_parts(&ScalarField::zeros(*sp.grid()), &em),
        }
    }

    /// `(e^{-chi1 + chi2}, i e^{chi1 - chi2})`.
    pub fn successor(sp: &Superpotential<T>) -> Self {
        Self::main(&sp.successor())
    }

    /// Adjoint pair `F* = -2 conj(F) / (F conj(G) - conj(F) G)`,
    /// `G* = 2 conj(G) / (F conj(G) - conj(F) G)`.
    pub fn adjoint(&self) -> Self {
        let two = T::lit(2.0);
        let den = self.f.zip_map(&self.g, |f, g| f * g.conj() - f.conj() * g);
        let fs = self.f.zip_map(&den, |f, d| -(f.conj() * two) / d);
        let gs = self.g.zip_map(&den, |g, d| (g.conj() * two) / d);
        Self { f: fs, g: gs }
    }

    /// Splits `W = phi F + psi G` into the real coefficients `(phi, psi)`.
    pub fn decompose(&self, w: Complex<T>, ix: usize, iy: usize) -> (T, T) {
        let (f, g) = (self.f.at(ix, iy), self.g.at(ix, iy));
        let det = (f.conj() * g).im;
        let phi = (w.conj() * g).im / det;
        let psi = (f.conj() * w).im / det;
        (phi, psi)
    }
}

/// Characteristic coefficients `a, b, A, B` of a generating pair.
#[derive(Clone, Debug)]
pub struct CharacteristicCoefficients<T> {
    pub a: ComplexField<T>,
    pub b: ComplexField<T>,
    pub big_a: ComplexField<T>,
    pub big_b: ComplexField<T>,
}

pub fn characteristic_coefficients<T: Real>(
    f: &ComplexField<T>,
    g: &ComplexField<T>,
) -> Result<CharacteristicCoefficients<T>> {
    let pair = GeneratingPair::new(f.clone(), g.clone())?;
    let (f, g) = (&pair.f, &pair.g);
    let den = f.zip_map(g, |f, g| f * g.conj() - f.conj() * g);
    let (fzb, gzb) = (d_zbar(f), d_zbar(g));
    let (fz, gz) = (d_z(f), d_z(g));
    let grid = *f.grid();
    let n = grid.len();
    let mut out = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for k in 0..n {
        let (fv, gv, d) = (f.values()[k], g.values()[k], den.values()[k]);
        let (a_zb, b_zb) = (fzb.values()[k], gzb.values()[k]);
        let (a_z, b_z) = (fz.values()[k], gz.values()[k]);
        out[0].push(-(fv.conj() * b_zb - gv.conj() * a_zb) / d);
        out[1].push((fv * b_zb - gv * a_zb) / d);
        out[2].push(-(fv.conj() * b_z - gv.conj() * a_z) / d);
        out[3].push((fv * b_z - gv * a_z) / d);
    }
    let [a, b, big_a, big_b] = out.map(|v| ComplexField::from_values(grid, v).expect("shape"));
    Ok(CharacteristicCoefficients { a, b, big_a, big_b })
}
