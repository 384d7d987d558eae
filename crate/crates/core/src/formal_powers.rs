//! Formal powers of the main Vekua equation for separable superpotentials,
//! assembled from one-dimensional auxiliary integrals, plus the generic
//! recursive `(F, G)`-integral construction.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Field, ScalarField};
use crate::grid::Grid2D;
use crate::quadrature::{contour_integral_l, cumulative_trapezoid, PathOrder};
use crate::scalar::{binomial, Real};
use crate::superpotential::{AxisProfile, Superpotential};

/// Auxiliary integrals of one axis and the systems built from them.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisSystem<T> {
    /// `X^(n)` (or `Y^(n)`), n = 0..=n_max.
    pub plain: Vec<Vec<T>>,
    /// `X~^(n)` (or `Y~^(n)`).
    pub tilde: Vec<Vec<T>>,
    /// `phi_k` (or `psi_k`).
    pub sys: Vec<Vec<T>>,
    /// `phi~_k` (or `psi~_k`).
    pub sys_tilde: Vec<Vec<T>>,
}

impl<T: Real> AxisSystem<T> {
    pub fn build(profile: &AxisProfile<T>, n_max: usize) -> Self {
        let grid = profile.grid();
        let h = grid.spacing();
        let origin = grid.origin();
        let two = T::lit(2.0);
        let e2p: Vec<T> = profile.chi().iter().map(|c| (two * *c).exp()).collect();
        let e2m: Vec<T> = profile.chi().iter().map(|c| (-two * *c).exp()).collect();
        let ones = vec![T::one(); grid.len()];
        let mut plain = vec![ones.clone()];
        let mut tilde = vec![ones];
        for n in 1..=n_max {
            let nn = T::from_usize_lossy(n);
            let (w, wt) = if n % 2 == 1 { (&e2m, &e2p) } else { (&e2p, &e2m) };
            let step = |prev: &[T], w: &[T]| {
                let f: Vec<T> = prev.iter().zip(w).map(|(a, b)| *a * *b).collect();
                cumulative_trapezoid(&f, h, origin).into_iter().map(|v| v * nn).collect::<Vec<T>>()
            };
            let p = step(&plain[n - 1], w);
            let t = step(&tilde[n - 1], wt);
            plain.push(p);
            tilde.push(t);
        }
        let ep: Vec<T> = profile.chi().iter().map(|c| c.exp()).collect();
        let em: Vec<T> = profile.chi().iter().map(|c| (-*c).exp()).collect();
        let scale = |e: &[T], v: &[T]| e.iter().zip(v).map(|(a, b)| *a * *b).collect::<Vec<T>>();
        let mut sys = Vec::with_capacity(n_max + 1);
        let mut sys_tilde = Vec::with_capacity(n_max + 1);
        for k in 0..=n_max {
            if k % 2 == 1 {
                sys.push(scale(&ep, &plain[k]));
                sys_tilde.push(scale(&em, &tilde[k]));
            } else {
                sys.push(scale(&ep, &tilde[k]));
                sys_tilde.push(scale(&em, &plain[k]));
            }
        }
        Self { plain, tilde, sys, sys_tilde }
    }

    pub fn n_max(&self) -> usize {
        self.plain.len() - 1
    }
}

/// `X, X~, Y, Y~` tables and the `phi, phi~, psi, psi~` systems.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxSystem<T> {
    pub x: AxisSystem<T>,
    pub y: AxisSystem<T>,
    grid: Grid2D<T>,
}

impl<T: Real> AuxSystem<T> {
    pub fn build(sp: &Superpotential<T>, n_max: usize) -> Self {
        Self {
            x: AxisSystem::build(sp.axis(1), n_max),
            y: AxisSystem::build(sp.axis(2), n_max),
            grid: *sp.grid(),
        }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn n_max(&self) -> usize {
        self.x.n_max()
    }
}

/// Basis constant of a formal power: `a = 1` or `a = i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unit {
    One,
    I,
}

impl Unit {
    pub const BOTH: [Unit; 2] = [Unit::One, Unit::I];

    pub fn value<T: Real>(self) -> Complex<T> {
        match self {
            Unit::One => Complex::new(T::one(), T::zero()),
            Unit::I => Complex::new(T::zero(), T::one()),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Unit::One => "1",
            Unit::I => "i",
        }
    }
}

/// `Z_m^(n)(1)` and `Z_m^(n)(i)` for `m in {0, 1}` and `n = 0..=n_max`, with
/// `z0` at the origin node.
#[derive(Clone, Debug)]
pub struct FormalPowerTable<T> {
    z0: (usize, usize),
    n_max: usize,
    /// `powers[m][n][u]` with `u = 0` for `a = 1` and `u = 1` for `a = i`.
    powers: [Vec<[ComplexField<T>; 2]>; 2],
}

impl<T: Real> FormalPowerTable<T> {
    pub fn from_parts(z0: (usize, usize), powers: [Vec<[ComplexField<T>; 2]>; 2]) -> Self {
        let n_max = powers[0].len().saturating_sub(1);
        Self { z0, n_max, powers }
    }

    pub fn z0(&self) -> (usize, usize) {
        self.z0
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.powers[0][0][0].grid()
    }

    /// `Z_m^(n)(a)` for `a in {1, i}`.
    pub fn get(&self, m: usize, n: usize, unit: Unit) -> Result<&ComplexField<T>> {
        if m > 1 {
            return Err(Error::OutOfRange { index: m, limit: 1 });
        }
        let row = self.powers[m].get(n).ok_or(Error::OutOfRange {
            index: n,
            limit: self.n_max,
        })?;
        Ok(match unit {
            Unit::One => &row[0],
            Unit::I => &row[1],
        })
    }

    /// `Z_m^(n)(a) = a1 Z_m^(n)(1) + a2 Z_m^(n)(i)`.
    pub fn power(&self, m: usize, n: usize, a: Complex<T>) -> Result<ComplexField<T>> {
        let one = self.get(m, n, Unit::One)?;
        let i = self.get(m, n, Unit::I)?;
        Ok(&one.scale(a.re) + &i.scale(a.im))
    }
}

/// Formal power `Z^(n)(a)` of the main pair.
pub fn formal_power<T: Real>(
    table: &FormalPowerTable<T>,
    n: usize,
    a: Complex<T>,
) -> Result<ComplexField<T>> {
    table.power(0, n, a)
}

fn outer<T: Real>(grid: Grid2D<T>, fx: &[T], fy: &[T]) -> ScalarField<T> {
    Field::from_axes(grid, fx, fy).expect("aux tables match the grid")
}

/// Explicit binomial assembly. `swap` exchanges `phi` and `phi~`, which gives
/// the powers of the successor pair.
fn assemble_one<T: Real>(aux: &AuxSystem<T>, n: usize, unit: Unit, swap: bool) -> ComplexField<T> {
    let g = *aux.grid();
    let (phi, phit) = if swap {
        (&aux.x.sys_tilde, &aux.x.sys)
    } else {
        (&aux.x.sys, &aux.x.sys_tilde)
    };
    let (psi, psit) = (&aux.y.sys, &aux.y.sys_tilde);
    let mut re = ScalarField::zeros(g);
    let mut im = ScalarField::zeros(g);
    let sgn = |k: usize| if k % 2 == 0 { T::one() } else { -T::one() };
    match unit {
        Unit::One => {
            for k in (0..).take_while(|k| 2 * k <= n) {
                let c = sgn(k) * binomial::<T>(n, 2 * k);
                re = &re + &outer(g, &phi[n - 2 * k], &psi[2 * k]).scale(c);
            }
            for k in (0..).take_while(|k| 2 * k < n) {
                let c = sgn(k) * binomial::<T>(n, 2 * k + 1);
                im = &im + &outer(g, &phit[n - 2 * k - 1], &psit[2 * k + 1]).scale(c);
            }
        }
        Unit::I => {
            for k in (0..).take_while(|k| 2 * k < n) {
                let c = -sgn(k) * binomial::<T>(n, 2 * k + 1);
                re = &re + &outer(g, &phi[n - 2 * k - 1], &psi[2 * k + 1]).scale(c);
            }
            for k in (0..).take_while(|k| 2 * k <= n) {
                let c = sgn(k) * binomial::<T>(n, 2 * k);
                im = &im + &outer(g, &phit[n - 2 * k], &psit[2 * k]).scale(c);
            }
        }
    }
    ComplexField::from_parts(&re, &im)
}

/// Assembles `Z^(n)` and `Z_1^(n)` for `n = 0..=n_max` from the aux system.
pub fn assemble_formal_powers<T: Real>(aux: &AuxSystem<T>, n_max: usize) -> Result<FormalPowerTable<T>> {
    if n_max > aux.n_max() {
        return Err(Error::OutOfRange {
            index: n_max,
            limit: aux.n_max(),
        });
    }
    let mut powers: [Vec<[ComplexField<T>; 2]>; 2] = [Vec::new(), Vec::new()];
    for (m, out) in powers.iter_mut().enumerate() {
        for n in 0..=n_max {
            out.push([
                assemble_one(aux, n, Unit::One, m == 1),
                assemble_one(aux, n, Unit::I, m == 1),
            ]);
        }
    }
    Ok(FormalPowerTable::from_parts(aux.grid().origin(), powers))
}

/// Builds the aux system and assembles the table in one step.
pub fn build_formal_powers<T: Real>(sp: &Superpotential<T>, n_max: usize) -> Result<FormalPowerTable<T>> {
    assemble_formal_powers(&AuxSystem::build(sp, n_max), n_max)
}

/// Superpotential of the pair with index `m` in the period-2 sequence.
fn pair_chi<T: Real>(sp: &Superpotential<T>, m: usize) -> Superpotential<T> {
    if m % 2 == 0 {
        sp.clone()
    } else {
        sp.successor()
    }
}

/// `(F_m, G_m)`-integral of `w` from `z0` along L-paths (x first):
/// `F_m Re int G_m* w dzeta + G_m Re int F_m* w dzeta`.
pub fn fg_integral<T: Real>(
    m: usize,
    sp: &Superpotential<T>,
    w: &ComplexField<T>,
    z0: (usize, usize),
) -> ComplexField<T> {
    let chi = pair_chi(sp, m);
    let ep = chi.exp_field(T::one());
    let em = chi.exp_field(-T::one());
    // adjoint pair: F* = -i e^chi, G* = e^-chi
    let mi = Complex::new(T::zero(), -T::one());
    let gs_w = w.mul_real(&em);
    let fs_w = w.mul_real(&ep).scale_complex(mi);
    let a = contour_integral_l(&gs_w, z0, PathOrder::XThenY).re();
    let b = contour_integral_l(&fs_w, z0, PathOrder::XThenY).re();
    ComplexField::from_parts(&a.mul(&ep), &b.mul(&em))
}

/// Table built by `Z_m^(n+1) = (n + 1) int Z_{m+1}^(n) d_(F_m, G_m) zeta`,
/// starting from `Z_m^(0)(1) = F_m`, `Z_m^(0)(i) = G_m`.
pub fn recursive_formal_powers<T: Real>(
    sp: &Superpotential<T>,
    z0: (usize, usize),
    n_max: usize,
) -> FormalPowerTable<T> {
    let g = *sp.grid();
    let base = |m: usize| {
        let chi = pair_chi(sp, m);
        [
            chi.exp_field(T::one()).to_complex(),
            ComplexField::from_parts(&ScalarField::zeros(g), &chi.exp_field(-T::one())),
        ]
    };
    let mut powers: [Vec<[ComplexField<T>; 2]>; 2] = [vec![base(0)], vec![base(1)]];
    for n in 0..n_max {
        let c = T::from_usize_lossy(n + 1);
        for m in 0..2 {
            let prev = &powers[1 - m][n];
            let next = [
                fg_integral(m, sp, &prev[0], z0).scale(c),
                fg_integral(m, sp, &prev[1], z0).scale(c),
            ];
            powers[m].push(next);
        }
    }
    FormalPowerTable::from_parts(z0, powers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::susy::{SusyOps, VekuaKind};

    fn sp(name: &str, p: &[f64], n: usize) -> Superpotential<f64> {
        Superpotential::catalog(name, p, Grid2D::square(1.0, n).unwrap()).unwrap()
    }

    fn zpow(g: Grid2D<f64>, n: i32, a: Complex<f64>) -> ComplexField<f64> {
        ComplexField::from_fn(g, |x, y| a * Complex::new(x, y).powi(n))
    }

    #[test]
    fn aux_system_basics() {
        let s = sp("quadratic", &[1.0, 2.0], 41);
        let aux = AuxSystem::build(&s, 4);
        let o = s.grid().gx.origin();
        for ax in [&aux.x, &aux.y] {
            assert!(ax.plain[0].iter().chain(&ax.tilde[0]).all(|&v| v == 1.0));
            for n in 1..=4 {
                assert_eq!(ax.plain[n][o], 0.0);
                assert_eq!(ax.tilde[n][o], 0.0);
            }
        }
    }

    #[test]
    fn free_systems_are_monomials() {
        let s = sp("zero", &[], 201);
        let aux = AuxSystem::build(&s, 4);
        let xs = s.grid().gx.nodes();
        for k in 0..=4 {
            for (i, &x) in xs.iter().enumerate() {
                let want = x.powi(k as i32);
                assert!((aux.x.sys[k][i] - want).abs() < 1e-3);
                assert_eq!(aux.x.sys[k][i], aux.x.sys_tilde[k][i]);
                assert_eq!(aux.x.sys[k][i], aux.y.sys[k][i]);
            }
        }
    }

    #[test]
    fn linear_phi1_is_sinh() {
        let s = sp("linear", &[1.0, 0.0], 201);
        let aux = AuxSystem::build(&s, 1);
        let xs = s.grid().gx.nodes();
        for (i, &x) in xs.iter().enumerate() {
            assert!((aux.x.plain[1][i] - (1.0 - (-2.0 * x).exp()) / 2.0).abs() < 5e-4);
            assert!((aux.x.sys[1][i] - x.sinh()).abs() < 5e-4);
        }
    }

    #[test]
    fn free_powers_are_monomials() {
        let s = sp("zero", &[], 201);
        let t = build_formal_powers(&s, 6).unwrap();
        let g = *s.grid();
        for n in 0..=6 {
            let e = (&t.get(0, n, Unit::One).unwrap().clone() - &zpow(g, n as i32, Complex::new(1.0, 0.0))).interior_max_abs(1);
            assert!(e <= 5e-3, "n = {n}: {e}");
            let w = formal_power(&t, n, Complex::new(1.0, 1.0)).unwrap();
            assert!((&w - &zpow(g, n as i32, Complex::new(1.0, 1.0))).interior_max_abs(1) <= 1e-2);
        }
    }

    #[test]
    fn zeroth_powers_are_the_pairs() {
        let s = sp("quadratic", &[1.0, 0.5], 41);
        let t = build_formal_powers(&s, 2).unwrap();
        let g = *s.grid();
        let f = s.exp_field(1.0).to_complex();
        let gg = ComplexField::from_parts(&ScalarField::zeros(g), &s.exp_field(-1.0));
        assert_eq!(t.get(0, 0, Unit::One).unwrap(), &f);
        assert_eq!(t.get(0, 0, Unit::I).unwrap(), &gg);
        let f1 = s.successor().exp_field(1.0).to_complex();
        assert_eq!(t.get(1, 0, Unit::One).unwrap(), &f1);
        assert!(t.get(0, 3, Unit::One).is_err());
        assert!(t.get(2, 0, Unit::One).is_err());
    }

    #[test]
    fn vekua_and_differential_relations() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let ops = SusyOps::new(&s);
        let t = build_formal_powers(&s, 4).unwrap();
        let h2 = s.grid().h().powi(2);
        for n in 0..=4 {
            for u in Unit::BOTH {
                let z = t.get(0, n, u).unwrap();
                assert!(ops.vekua(VekuaKind::V, z).interior_max_abs(2) < 100.0 * h2, "V n={n}");
                let z1 = t.get(1, n, u).unwrap();
                assert!(ops.vekua(VekuaKind::V1, z1).interior_max_abs(2) < 100.0 * h2, "V1 n={n}");
                if n > 0 {
                    let d = ops.bers(z);
                    let want = t.get(1, n - 1, u).unwrap().scale(n as f64);
                    assert!((&d - &want).interior_max_abs(2) < 200.0 * h2, "bers n={n}");
                }
            }
        }
    }

    #[test]
    fn explicit_and_recursive_agree() {
        let s = sp("quadratic", &[1.0, 1.0], 101);
        let t = build_formal_powers(&s, 4).unwrap();
        let r = recursive_formal_powers(&s, s.grid().origin(), 4);
        let h2 = s.grid().h().powi(2);
        for m in 0..2 {
            for n in 0..=4 {
                for u in Unit::BOTH {
                    let d = (t.get(m, n, u).unwrap() - r.get(m, n, u).unwrap()).max_abs();
                    assert!(d <= 20.0 * h2, "m={m} n={n} {u:?}: {d}");
                }
            }
        }
        assert_eq!(r.get(0, 0, Unit::One).unwrap(), t.get(0, 0, Unit::One).unwrap());
    }

    #[test]
    fn free_fg_integral_of_one_is_z() {
        let s = sp("zero", &[], 21);
        let g = *s.grid();
        let one = ComplexField::from_fn(g, |_, _| Complex::new(1.0, 0.0));
        let z = fg_integral(0, &s, &one, g.origin());
        assert!((&z - &zpow(g, 1, Complex::new(1.0, 0.0))).max_abs() < 1e-14);
    }

    #[test]
    fn asymptotics_near_origin() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let t = build_formal_powers(&s, 3).unwrap();
        let g = *s.grid();
        let (ox, oy) = g.origin();
        let h2 = g.h() * g.h();
        for n in 0..=3 {
            for u in Unit::BOTH {
                let z = t.get(0, n, u).unwrap();
                // quadrature error enters at O(h^2 |z|)
                for (dx, dy) in [(1isize, 0isize), (0, 1), (-1, 1), (2, -1), (8, 5)] {
                    let (ix, iy) = ((ox as isize + dx) as usize, (oy as isize + dy) as usize);
                    let (x, y) = g.coords(ix, iy);
                    let zz = Complex::new(x, y);
                    let d = (z.at(ix, iy) - u.value::<f64>() * zz.powi(n as i32)).norm();
                    assert!(d <= 4.0 * zz.norm().powi(n as i32 + 1) + 10.0 * h2 * zz.norm(), "n={n} {u:?}");
                }
            }
        }
    }
}
