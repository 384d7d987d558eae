//! The `A` and `Abar` path-integral operators and the construction of
//! metaharmonic conjugates between `ker H2` and `ker H0`.

use num_complex::Complex;

use crate::diff::{d_x, d_y, d_zbar};
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::quadrature::{path_integral_l, LegSigns, PathOrder};
use crate::scalar::Real;
use crate::superpotential::Superpotential;
use crate::susy::{SusyOps, VekuaKind};

/// Boundary margin used for every residual norm in this module.
pub const MARGIN: usize = 2;

/// Thresholds in units of `h^2 * scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateTolerances<T> {
    pub compat_warn: T,
    pub compat_cap: T,
    pub precondition_warn: T,
    pub precondition_cap: T,
}

impl<T: Real> Default for ConjugateTolerances<T> {
    fn default() -> Self {
        Self {
            compat_warn: T::lit(100.0),
            compat_cap: T::lit(1000.0),
            precondition_warn: T::lit(100.0),
            precondition_cap: T::lit(1000.0),
        }
    }
}

/// Output of [`abar_operator`] / [`a_operator`].
#[derive(Clone, Debug)]
pub struct Antiderivative<T> {
    pub field: ScalarField<T>,
    /// Interior max of the compatibility defect.
    pub defect: T,
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConjugateResult<T> {
    /// Conjugate partner, zero at `z0`.
    pub partner: ScalarField<T>,
    /// Additive gauge constant; fixed to zero by the normalization at `z0`.
    pub gauge_constant: T,
    /// Interior max of the main Vekua residual of the combined function.
    pub residual: T,
    pub warnings: Vec<String>,
}

fn scale_of<T: Real>(f: &ComplexField<T>) -> T {
    T::one().max(f.max_abs())
}

fn antiderivative<T: Real>(
    phi: &ComplexField<T>,
    z0: (usize, usize),
    signs: LegSigns,
    tol: &ConjugateTolerances<T>,
) -> Result<Antiderivative<T>> {
    let g = *phi.grid();
    let (p1, p2) = (phi.re(), phi.im());
    let defect_field = match signs {
        LegSigns::Plus => &d_y(&p1) - &d_x(&p2),
        LegSigns::Minus => &d_y(&p1) + &d_x(&p2),
    };
    let (defect, (ix, iy)) = defect_field.interior_argmax(MARGIN);
    let unit = g.h() * g.h() * scale_of(phi);
    if defect > tol.compat_cap * unit {
        return Err(Error::Compatibility {
            defect: defect.to_f64_lossy(),
            cap: (tol.compat_cap * unit).to_f64_lossy(),
            ix,
            iy,
        });
    }
    let warning = (defect > tol.compat_warn * unit).then(|| {
        format!(
            "compatibility defect {:.3e} at node ({ix}, {iy}) exceeds {:.3e}",
            defect.to_f64_lossy(),
            (tol.compat_warn * unit).to_f64_lossy()
        )
    });
    let field = path_integral_l(&p1, &p2, z0, signs, PathOrder::XThenY)?;
    Ok(Antiderivative { field, defect, warning })
}

/// `Abar[Phi] = 2 int (Phi1 dx + Phi2 dy)` from `z0`, so that
/// `dzbar Abar[Phi] = Phi`.
pub fn abar_operator<T: Real>(phi: &ComplexField<T>, z0: (usize, usize)) -> Result<Antiderivative<T>> {
    antiderivative(phi, z0, LegSigns::Plus, &ConjugateTolerances::default())
}

/// `A[Phi] = 2 int (Phi1 dx - Phi2 dy)` from `z0`, so that `dz A[Phi] = Phi`.
pub fn a_operator<T: Real>(phi: &ComplexField<T>, z0: (usize, usize)) -> Result<Antiderivative<T>> {
    antiderivative(phi, z0, LegSigns::Minus, &ConjugateTolerances::default())
}

fn precondition<T: Real>(
    what: &str,
    residual: &ScalarField<T>,
    w: &ScalarField<T>,
    tol: &ConjugateTolerances<T>,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let g = w.grid();
    let unit = g.h() * g.h() * T::one().max(w.max_abs());
    let r = residual.interior_max_abs(MARGIN);
    if r > tol.precondition_cap * unit {
        return Err(Error::Precondition {
            what: what.to_string(),
            residual: r.to_f64_lossy(),
            cap: (tol.precondition_cap * unit).to_f64_lossy(),
        });
    }
    if r > tol.precondition_warn * unit {
        warnings.push(format!(
            "{what} residual {:.3e} exceeds {:.3e}",
            r.to_f64_lossy(),
            (tol.precondition_warn * unit).to_f64_lossy()
        ));
    }
    Ok(())
}

/// Given `W1 in ker H2`, builds `W2 = e^{-chi} Abar[i e^{2 chi} dzbar(e^{-chi} W1)]`
/// so that `W1 + i W2` solves the main Vekua equation.
pub fn conjugate_from_w1<T: Real>(sp: &Superpotential<T>, w1: &ScalarField<T>) -> Result<ConjugateResult<T>> {
    conjugate_from_w1_with(sp, w1, &ConjugateTolerances::default())
}

pub fn conjugate_from_w1_with<T: Real>(
    sp: &Superpotential<T>,
    w1: &ScalarField<T>,
    tol: &ConjugateTolerances<T>,
) -> Result<ConjugateResult<T>> {
    let ops = SusyOps::new(sp);
    let mut warnings = Vec::new();
    precondition("H2 W1", &ops.h2(w1), w1, tol, &mut warnings)?;
    let ep = sp.exp_field(T::one());
    let em = sp.exp_field(-T::one());
    let inner = d_zbar(&w1.mul(&em).to_complex());
    let i = Complex::new(T::zero(), T::one());
    let phi = inner.mul_real(&ep.mul(&ep)).scale_complex(i);
    let anti = antiderivative(&phi, sp.grid().origin(), LegSigns::Plus, tol)?;
    warnings.extend(anti.warning);
    let partner = anti.field.mul(&em);
    let w = ComplexField::from_parts(w1, &partner);
    Ok(ConjugateResult {
        residual: ops.vekua(VekuaKind::V, &w).interior_max_abs(MARGIN),
        partner,
        gauge_constant: T::zero(),
        warnings,
    })
}

/// Given `W2 in ker H0`, builds `W1 = -e^{chi} Abar[i e^{-2 chi} dzbar(e^{chi} W2)]`.
pub fn conjugate_from_w2<T: Real>(sp: &Superpotential<T>, w2: &ScalarField<T>) -> Result<ConjugateResult<T>> {
    conjugate_from_w2_with(sp, w2, &ConjugateTolerances::default())
}

pub fn conjugate_from_w2_with<T: Real>(
    sp: &Superpotential<T>,
    w2: &ScalarField<T>,
    tol: &ConjugateTolerances<T>,
) -> Result<ConjugateResult<T>> {
    let ops = SusyOps::new(sp);
    let mut warnings = Vec::new();
    precondition("H0 W2", &ops.h0(w2), w2, tol, &mut warnings)?;
    let ep = sp.exp_field(T::one());
    let em = sp.exp_field(-T::one());
    let inner = d_zbar(&w2.mul(&ep).to_complex());
    let i = Complex::new(T::zero(), T::one());
    let phi = inner.mul_real(&em.mul(&em)).scale_complex(i);
    let anti = antiderivative(&phi, sp.grid().origin(), LegSigns::Plus, tol)?;
    warnings.extend(anti.warning);
    let partner = anti.field.mul(&ep).scale(-T::one());
    let w = ComplexField::from_parts(&partner, w2);
    Ok(ConjugateResult {
        residual: ops.vekua(VekuaKind::V, &w).interior_max_abs(MARGIN),
        partner,
        gauge_constant: T::zero(),
        warnings,
    })
}

/// Least-squares `c` minimizing `|candidate + c * mode - target|` over the
/// interior, and the interior max of the fitted difference.
pub fn fit_gauge<T: Real>(
    candidate: &ScalarField<T>,
    target: &ScalarField<T>,
    mode: &ScalarField<T>,
) -> (T, T) {
    let g = *candidate.grid();
    let (mut num, mut den) = (T::zero(), T::zero());
    for iy in 0..g.ny() {
        for ix in 0..g.nx() {
            if g.is_interior(ix, iy, MARGIN) {
                let e = mode.at(ix, iy);
                num += e * (target.at(ix, iy) - candidate.at(ix, iy));
                den += e * e;
            }
        }
    }
    let c = if den > T::zero() { num / den } else { T::zero() };
    let diff = &(candidate + &mode.scale(c)) - target;
    (c, diff.interior_max_abs(MARGIN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_powers::{build_formal_powers, Unit};
    use crate::grid::Grid2D;

    fn sp(name: &str, p: &[f64], n: usize) -> Superpotential<f64> {
        Superpotential::catalog(name, p, Grid2D::square(1.0, n).unwrap()).unwrap()
    }

    #[test]
    fn abar_reconstructs() {
        let g = Grid2D::<f64>::square(1.0, 201).unwrap();
        let o = g.origin();
        // dzbar(x^2 y) = x y + i x^2 / 2
        let phi = ComplexField::from_fn(g, |x, y| Complex::new(x * y, 0.5 * x * x));
        let r = abar_operator(&phi, o).unwrap();
        let want = ScalarField::from_fn(g, |x, y| x * x * y);
        assert!((&r.field - &want).max_abs() < 1e-4);
        assert_eq!(r.field.at(o.0, o.1), 0.0);
        assert!(r.warning.is_none());

        let zero = ComplexField::zeros(g);
        assert_eq!(abar_operator(&zero, o).unwrap().field.max_abs(), 0.0);

        // dzbar(e^x cos y) = e^x (cos y - i sin y) / 2
        let phi = ComplexField::from_fn(g, |x, y| Complex::new(x.exp() * y.cos(), -x.exp() * y.sin()) * 0.5);
        let r = abar_operator(&phi, o).unwrap();
        let want = ScalarField::from_fn(g, |x, y| x.exp() * y.cos() - 1.0);
        assert!((&r.field - &want).max_abs() < 1e-4);
    }

    #[test]
    fn a_operator_inverts_dz() {
        let g = Grid2D::<f64>::square(1.0, 101).unwrap();
        // dz(x^2 + x y) = (2x + y - i x) / 2
        let phi = ComplexField::from_fn(g, |x, y| Complex::new(x + 0.5 * y, -0.5 * x));
        let r = a_operator(&phi, g.origin()).unwrap();
        let want = ScalarField::from_fn(g, |x, y| x * x + x * y);
        assert!((&r.field - &want).max_abs() < 1e-12);
    }

    #[test]
    fn incompatible_input_is_rejected() {
        let g = Grid2D::square(1.0, 101).unwrap();
        let phi = ComplexField::from_fn(g, |x, _| Complex::new(0.0, 10.0 * x));
        match abar_operator(&phi, g.origin()) {
            Err(Error::Compatibility { ix, iy, .. }) => assert!(g.is_interior(ix, iy, MARGIN)),
            Err(e) => panic!("unexpected error {e}"),
            Ok(_) => panic!("incompatible input was accepted"),
        }
    }

    #[test]
    fn harmonic_conjugates() {
        let s = sp("zero", &[], 101);
        let g = *s.grid();
        let x = ScalarField::from_fn(g, |x, _| x);
        let y = ScalarField::from_fn(g, |_, y| y);
        let r = conjugate_from_w1(&s, &x).unwrap();
        assert!((&r.partner - &y).max_abs() < 1e-13);
        assert_eq!(r.gauge_constant, 0.0);
        let r = conjugate_from_w2(&s, &y).unwrap();
        assert!((&r.partner - &x).max_abs() < 1e-13);
    }

    #[test]
    fn zero_modes_have_zero_partners() {
        let s = sp("quadratic", &[1.0, 1.0], 101);
        let r = conjugate_from_w1(&s, &s.exp_field(1.0)).unwrap();
        assert!(r.partner.max_abs() < 1e-12);
        let r = conjugate_from_w2(&s, &s.exp_field(-1.0)).unwrap();
        assert!(r.partner.max_abs() < 1e-12);
    }

    #[test]
    fn formal_power_conjugates() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let t = build_formal_powers(&s, 2).unwrap();
        let h2 = s.grid().h().powi(2);
        let z1 = t.get(0, 1, Unit::One).unwrap();
        let r = conjugate_from_w1(&s, &z1.re()).unwrap();
        let (_, res) = fit_gauge(&r.partner, &z1.im(), &s.exp_field(-1.0));
        assert!(res <= 50.0 * h2, "{res}");
        assert!(r.residual <= 100.0 * h2);

        let z2 = t.get(0, 2, Unit::I).unwrap();
        let r = conjugate_from_w2(&s, &z2.im()).unwrap();
        let (_, res) = fit_gauge(&r.partner, &z2.re(), &s.exp_field(1.0));
        assert!(res <= 50.0 * h2, "{res}");
    }

    #[test]
    fn round_trip_returns_w1() {
        let s = sp("quadratic", &[1.0, 0.5], 201);
        let t = build_formal_powers(&s, 2).unwrap();
        let w1 = t.get(0, 2, Unit::One).unwrap().re();
        let w2 = conjugate_from_w1(&s, &w1).unwrap().partner;
        let back = conjugate_from_w2(&s, &w2).unwrap().partner;
        let (_, res) = fit_gauge(&back, &w1, &s.exp_field(1.0));
        assert!(res <= 100.0 * s.grid().h().powi(2), "{res}");
    }

    #[test]
    fn gauge_mode_is_invisible_to_h0() {
        let s = sp("quadratic", &[1.0, 1.0], 101);
        let ops = SusyOps::new(&s);
        let w = ScalarField::from_fn(*s.grid(), |x, y| (x * y).sin());
        let a = ops.h0(&w);
        let b = ops.h0(&(&w + &s.exp_field(-1.0).scale(0.7)));
        let zm = ops.h0(&s.exp_field(-1.0)).scale(0.7);
        assert!((&(&b - &a) - &zm).max_abs() < 1e-10);
    }

    #[test]
    fn precondition_failure() {
        let s = sp("quadratic", &[1.0, 1.0], 41);
        let w = ScalarField::from_fn(*s.grid(), |x, y| 5.0 * (3.0 * x).sin() * (2.0 * y).cos());
        assert!(matches!(conjugate_from_w1(&s, &w), Err(Error::Precondition { .. })));
    }
}
