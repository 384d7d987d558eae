//! Taylor coefficients in formal powers and least-squares fits over the
//! complete systems `Im Z^(n)` (kernel of `H0`) and `Re Z^(n)` (kernel of `H2`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::diff::d_z_stride;
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::formal_powers::{FormalPowerTable, Unit};
use crate::scalar::{factorial, Real};
use crate::superpotential::Superpotential;
use crate::susy::SusyOps;

/// Highest Taylor order attempted by numerical Bers differentiation.
pub const MAX_TAYLOR_ORDER: usize = 6;

const MARGIN: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorCoefficients<T> {
    pub z0: (usize, usize),
    /// `a_n = W^[n](z0) / n!`.
    pub coeffs: Vec<Complex<T>>,
    /// Richardson estimate of the stencil error of each coefficient.
    pub uncertainty: Vec<T>,
}

/// `d_(F_m, G_m)/dz w = dz w - B_m conj(w)` with `B_0 = dz chi` and
/// `B_1 = -dzbar chi`, using difference stencils of the given stride.
pub fn bers_derivative_stride<T: Real>(
    sp: &Superpotential<T>,
    m: usize,
    w: &ComplexField<T>,
    stride: usize,
) -> ComplexField<T> {
    let b = if m % 2 == 0 {
        sp.dz_chi()
    } else {
        sp.dzbar_chi().scale(-T::one())
    };
    let mut out = d_z_stride(w, stride);
    for ((o, bv), wv) in out.values_mut().iter_mut().zip(b.values()).zip(w.values()) {
        *o -= *bv * wv.conj();
    }
    out
}

fn derivative_values<T: Real>(
    sp: &Superpotential<T>,
    w: &ComplexField<T>,
    order: usize,
    stride: usize,
    z0: (usize, usize),
) -> Vec<Complex<T>> {
    let mut cur = w.clone();
    let mut out = vec![cur.at(z0.0, z0.1)];
    for m in 0..order {
        cur = bers_derivative_stride(sp, m, &cur, stride);
        out.push(cur.at(z0.0, z0.1));
    }
    out
}

/// Taylor coefficients of `w` at the origin node up to order `n`.
pub fn taylor_coefficients<T: Real>(
    sp: &Superpotential<T>,
    w: &ComplexField<T>,
    table: &FormalPowerTable<T>,
    n: usize,
) -> Result<TaylorCoefficients<T>> {
    if n > MAX_TAYLOR_ORDER {
        return Err(Error::Parameters(format!(
            "Taylor order {n} exceeds the supported maximum {MAX_TAYLOR_ORDER}"
        )));
    }
    if n > table.n_max() {
        return Err(Error::OutOfRange {
            index: n,
            limit: table.n_max(),
        });
    }
    let z0 = table.z0();
    let fine = derivative_values(sp, w, n, 1, z0);
    let coarse = derivative_values(sp, w, n, 2, z0);
    let three = T::lit(3.0);
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut uncertainty = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let f = factorial::<T>(k);
        coeffs.push(fine[k] / f);
        uncertainty.push((fine[k] - coarse[k]).norm() / (three * f));
    }
    let big = coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()));
    let limit = T::lit(1e-2) * (T::one() + big);
    if let Some((k, u)) = uncertainty.iter().enumerate().find(|(_, u)| **u > limit) {
        return Err(Error::NoiseTooLarge {
            order: k,
            noise: u.to_f64_lossy(),
        });
    }
    Ok(TaylorCoefficients {
        z0,
        coeffs,
        uncertainty,
    })
}

/// `sum_n Z^(n)(a_n)`.
pub fn evaluate_series<T: Real>(coeffs: &TaylorCoefficients<T>, table: &FormalPowerTable<T>) -> Result<ComplexField<T>> {
    let mut out = ComplexField::zeros(*table.grid());
    for (n, a) in coeffs.coeffs.iter().enumerate() {
        out = &out + &table.power(0, n, *a)?;
    }
    Ok(out)
}

/// Centered subrectangle with half the extent of the grid.
pub const SUBRECT: f64 = 0.5;

/// Max deviation of the series from `w` on the half-radius subrectangle.
pub fn series_residual<T: Real>(
    coeffs: &TaylorCoefficients<T>,
    table: &FormalPowerTable<T>,
    w: &ComplexField<T>,
) -> Result<T> {
    let s = evaluate_series(coeffs, table)?;
    Ok((&s - w).subrect_max_abs(T::lit(SUBRECT)))
}

/// Bound on [`series_residual`] implied by the coefficient uncertainties:
/// `2 sum_k u_k (|Z^(k)(1)| + |Z^(k)(i)|)` on the subrectangle, plus a
/// round-off floor.
pub fn round_trip_bound<T: Real>(coeffs: &TaylorCoefficients<T>, table: &FormalPowerTable<T>, w: &ComplexField<T>) -> Result<T> {
    let frac = T::lit(SUBRECT);
    let mut bound = T::zero();
    for (k, u) in coeffs.uncertainty.iter().enumerate() {
        let norms = table.get(0, k, Unit::One)?.subrect_max_abs(frac) + table.get(0, k, Unit::I)?.subrect_max_abs(frac);
        bound += *u * norms;
    }
    Ok(T::lit(2.0) * bound + T::lit(1e-10) * (T::one() + w.max_abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// `Im Z^(n)(1), Im Z^(n)(i)`
    KerH0,
    /// `Re Z^(n)(1), Re Z^(n)(i)`
    KerH2,
}

#[derive(Clone, Debug)]
pub struct FitResult<T> {
    pub degree: usize,
    pub kind: BasisKind,
    /// Coefficient of basis slot `(n, unit)` at index `2 n + (0 for 1, 1 for i)`.
    pub coefficients: Vec<T>,
    /// Slots whose basis function vanishes identically; their coefficient is 0.
    pub dropped: Vec<usize>,
    pub singular_values: Vec<f64>,
    pub residual_max: T,
    pub residual_rms: T,
    pub residual: ScalarField<T>,
}

impl<T: Real> FitResult<T> {
    pub fn slot(n: usize, unit: Unit) -> usize {
        2 * n + usize::from(unit == Unit::I)
    }

    pub fn reconstruction(&self, table: &FormalPowerTable<T>) -> Result<ScalarField<T>> {
        let mut out = ScalarField::zeros(*table.grid());
        for n in 0..=self.degree {
            for u in Unit::BOTH {
                let c = self.coefficients[Self::slot(n, u)];
                out = &out + &basis_function(table, self.kind, n, u)?.scale(c);
            }
        }
        Ok(out)
    }
}

pub fn basis_function<T: Real>(
    table: &FormalPowerTable<T>,
    kind: BasisKind,
    n: usize,
    unit: Unit,
) -> Result<ScalarField<T>> {
    let z = table.get(0, n, unit)?;
    Ok(match kind {
        BasisKind::KerH0 => z.im(),
        BasisKind::KerH2 => z.re(),
    })
}

/// Kernel-membership cap for fit targets, in units of `h^2 * scale`.
pub const KERNEL_CAP: f64 = 1e3;

/// Least-squares fit of `target` over the degree-`degree` formal polynomials.
pub fn fit_formal_polynomial<T: Real>(
    sp: &Superpotential<T>,
    target: &ScalarField<T>,
    kind: BasisKind,
    table: &FormalPowerTable<T>,
    degree: usize,
) -> Result<FitResult<T>> {
    if degree > table.n_max() {
        return Err(Error::OutOfRange {
            index: degree,
            limit: table.n_max(),
        });
    }
    let g = *target.grid();
    let ops = SusyOps::new(sp);
    let (what, res) = match kind {
        BasisKind::KerH0 => ("H0 target", ops.h0(target)),
        BasisKind::KerH2 => ("H2 target", ops.h2(target)),
    };
    let unit = g.h() * g.h() * T::one().max(target.max_abs());
    let cap = T::lit(KERNEL_CAP) * unit;
    let r = res.interior_max_abs(MARGIN);
    if r > cap {
        return Err(Error::Precondition {
            what: what.into(),
            residual: r.to_f64_lossy(),
            cap: cap.to_f64_lossy(),
        });
    }

    let nodes: Vec<(usize, usize)> = (0..g.ny())
        .flat_map(|iy| (0..g.nx()).map(move |ix| (ix, iy)))
        .filter(|&(ix, iy)| g.is_interior(ix, iy, MARGIN))
        .collect();
    let slots = 2 * (degree + 1);
    let mut columns = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for n in 0..=degree {
        for u in Unit::BOTH {
            let f = basis_function(table, kind, n, u)?;
            if f.max_abs() == T::zero() {
                dropped.push(FitResult::<T>::slot(n, u));
                continue;
            }
            let col: Vec<f64> = nodes.iter().map(|&(ix, iy)| f.at(ix, iy).to_f64_lossy()).collect();
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            columns.push(col.into_iter().map(|v| v / norm).collect::<Vec<f64>>());
            kept.push((FitResult::<T>::slot(n, u), norm));
        }
    }
    let rows = nodes.len();
    let a = DMatrix::from_fn(rows, kept.len(), |r, c| columns[c][r]);
    let b = DVector::from_iterator(rows, nodes.iter().map(|&(ix, iy)| target.at(ix, iy).to_f64_lossy()));
    let svd = a.svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if sv.is_empty() || smin <= 1e-12 * smax {
        return Err(Error::RankDeficient { singular_values: sv });
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Parameters(format!("least-squares solve failed: {e}")))?;
    let mut coefficients = vec![T::zero(); slots];
    for (c, (slot, norm)) in kept.iter().enumerate() {
        coefficients[*slot] = T::lit(x[c] / norm);
    }
    let mut fit = FitResult {
        degree,
        kind,
        coefficients,
        dropped,
        singular_values: sv,
        residual_max: T::zero(),
        residual_rms: T::zero(),
        residual: ScalarField::zeros(g),
    };
    let residual = &fit.reconstruction(table)? - target;
    fit.residual_max = residual.interior_max_abs(MARGIN);
    fit.residual_rms = residual.interior_rms(MARGIN);
    fit.residual = residual;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal_powers::build_formal_powers;
    use crate::grid::Grid2D;

    fn sp(name: &str, p: &[f64], n: usize) -> Superpotential<f64> {
        Superpotential::catalog(name, p, Grid2D::square(1.0, n).unwrap()).unwrap()
    }

    #[test]
    fn free_taylor_of_z_squared() {
        let s = sp("zero", &[], 101);
        let t = build_formal_powers(&s, 4).unwrap();
        let w = ComplexField::from_fn(*s.grid(), |x, y| Complex::new(x, y).powi(2));
        let c = taylor_coefficients(&s, &w, &t, 4).unwrap();
        for (k, a) in c.coeffs.iter().enumerate() {
            let want = if k == 2 { 1.0 } else { 0.0 };
            assert!((a - want).norm() < 1e-9, "k={k} {a}");
        }
        let series = evaluate_series(&c, &t).unwrap();
        assert!((&series - &w).subrect_max_abs(0.5) < 1e-8);
    }

    #[test]
    fn taylor_of_generating_function() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let t = build_formal_powers(&s, 4).unwrap();
        let f = t.get(0, 0, Unit::One).unwrap().clone();
        let c = taylor_coefficients(&s, &f, &t, 4).unwrap();
        assert_eq!(c.coeffs[0], Complex::new(1.0, 0.0));
        for a in &c.coeffs[1..] {
            assert!(a.norm() < 1e-3);
        }
    }

    #[test]
    fn taylor_of_formal_power() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let t = build_formal_powers(&s, 5).unwrap();
        let w = t.get(0, 3, Unit::One).unwrap().clone();
        let c = taylor_coefficients(&s, &w, &t, 5).unwrap();
        for (k, a) in c.coeffs.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((a - want).norm() < 1e-2, "k={k} {a}");
        }
        let res = series_residual(&c, &t, &w).unwrap();
        assert!(res <= round_trip_bound(&c, &t, &w).unwrap(), "{res}");
    }

    #[test]
    fn taylor_order_is_capped() {
        let s = sp("zero", &[], 41);
        let t = build_formal_powers(&s, 8).unwrap();
        let w = t.get(0, 1, Unit::One).unwrap().clone();
        assert!(taylor_coefficients(&s, &w, &t, 7).is_err());
    }

    #[test]
    fn coarse_grid_noise_is_reported() {
        let s = sp("quadratic", &[3.0, 3.0], 11);
        let t = build_formal_powers(&s, 6).unwrap();
        let w = t.get(0, 6, Unit::One).unwrap().clone();
        assert!(matches!(
            taylor_coefficients(&s, &w, &t, 6),
            Err(Error::NoiseTooLarge { .. })
        ));
    }

    #[test]
    fn zero_coefficients_give_zero_series() {
        let s = sp("quadratic", &[1.0, 1.0], 21);
        let t = build_formal_powers(&s, 2).unwrap();
        let c = TaylorCoefficients {
            z0: s.grid().origin(),
            coeffs: vec![Complex::new(0.0, 0.0); 3],
            uncertainty: vec![0.0; 3],
        };
        assert_eq!(evaluate_series(&c, &t).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn free_fit_of_harmonic_polynomial() {
        let s = sp("zero", &[], 101);
        let t = build_formal_powers(&s, 3).unwrap();
        let target = ScalarField::from_fn(*s.grid(), |x, y| x * x - y * y);
        let fit = fit_formal_polynomial(&s, &target, BasisKind::KerH0, &t, 3).unwrap();
        let hit = FitResult::<f64>::slot(2, Unit::I);
        for (k, c) in fit.coefficients.iter().enumerate() {
            let want = if k == hit { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-6, "slot {k}: {c}");
        }
        assert!(fit.residual_max <= 1e-10);
        assert_eq!(fit.dropped, vec![FitResult::<f64>::slot(0, Unit::One)]);
    }

    #[test]
    fn self_fit_and_zero_mode() {
        let s = sp("quadratic", &[1.0, 1.0], 101);
        let t = build_formal_powers(&s, 4).unwrap();
        let h2 = s.grid().h().powi(2);
        let target = t.get(0, 3, Unit::I).unwrap().im();
        let fit = fit_formal_polynomial(&s, &target, BasisKind::KerH0, &t, 4).unwrap();
        let hit = FitResult::<f64>::slot(3, Unit::I);
        for (k, c) in fit.coefficients.iter().enumerate() {
            let want = if k == hit { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-6, "slot {k}: {c}");
        }
        assert!(fit.residual_max <= 10.0 * h2);

        let fit = fit_formal_polynomial(&s, &s.exp_field(-1.0), BasisKind::KerH0, &t, 2).unwrap();
        assert!((fit.coefficients[FitResult::<f64>::slot(0, Unit::I)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn residual_is_monotone_in_degree() {
        let s = sp("quadratic", &[1.0, 0.5], 61);
        let t = build_formal_powers(&s, 5).unwrap();
        // a kernel member outside the span of low degrees
        let target = &t.get(0, 5, Unit::One).unwrap().im() + &t.get(0, 1, Unit::I).unwrap().im();
        let mut last = f64::INFINITY;
        for n in 0..=5 {
            let fit = fit_formal_polynomial(&s, &target, BasisKind::KerH0, &t, n).unwrap();
            assert!(fit.residual_rms <= last * (1.0 + 1e-9));
            last = fit.residual_rms;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn non_member_is_rejected() {
        let s = sp("quadratic", &[1.0, 1.0], 61);
        let t = build_formal_powers(&s, 2).unwrap();
        let target = ScalarField::from_fn(*s.grid(), |x, y| (3.0 * x).cos() * y);
        assert!(matches!(
            fit_formal_polynomial(&s, &target, BasisKind::KerH2, &t, 2),
            Err(Error::Precondition { .. })
        ));
    }
}
