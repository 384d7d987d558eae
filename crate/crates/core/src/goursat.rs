//! Goursat problem for the transmutation kernel of one axis.
//!
//! In characteristic variables `u = (x + t) / 2`, `v = (x - t) / 2` the kernel
//! `H(u, v) = K(x, t)` solves `H(u, v) = g(u) + int_0^u int_0^v q(a + b) H db da`
//! with `g(u) = (1/2) int_0^u q`. The lattice uses spacing `h / 2` so that
//! every `(x, t)` pair of axis nodes is a lattice point.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::quadrature::cumulative_trapezoid;
use crate::scalar::Real;
use crate::superpotential::{AxisProfile, Superpotential};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoursatOptions<T> {
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for GoursatOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 60,
        }
    }
}

/// Solved kernel `K(x, t)` of one axis, tabulated on all pairs of axis nodes
/// (row `x`, column `t`), together with `dK/dt`.
#[derive(Clone, Debug)]
pub struct GoursatKernel<T> {
    axis: usize,
    grid: Grid1D<T>,
    q: Vec<T>,
    h_param: T,
    k: Vec<T>,
    k_t: Vec<T>,
    iterations: usize,
    history: Vec<T>,
}

/// Square lattice `i, j in [-r, r]` restricted to the diamond `|i| + |j| <= r`.
struct Lattice {
    r: isize,
    side: usize,
}

impl Lattice {
    fn new(r: usize) -> Self {
        Self {
            r: r as isize,
            side: 2 * r + 1,
        }
    }

    #[inline]
    fn at(&self, i: isize, j: isize) -> usize {
        (i + self.r) as usize * self.side + (j + self.r) as usize
    }

    fn len(&self) -> usize {
        self.side * self.side
    }
}

const QUADRANTS: [(isize, isize); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

/// For `f` on the diamond, returns `(I, Ib, Ia)` where
/// `I(i, j) = int_0^u int_0^v f`, `Ib(i, j) = int_0^v f(u, b) db` and
/// `Ia(i, j) = int_0^u f(a, v) da`.
fn integrals<T: Real>(lat: &Lattice, f: &[T], eta: T, want_lines: bool) -> (Vec<T>, Vec<T>, Vec<T>) {
    let half = T::lit(0.5);
    let r = lat.r;
    let mut total = vec![T::zero(); lat.len()];
    let (mut ib, mut ia) = if want_lines {
        (vec![T::zero(); lat.len()], vec![T::zero(); lat.len()])
    } else {
        (Vec::new(), Vec::new())
    };
    for (su, sv) in QUADRANTS {
        let s = T::from_isize(su * sv).unwrap();
        // running cumulative sums in b for each a, then in a for each b
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(r as usize + 1);
        for a in 0..=r {
            let mut acc = T::zero();
            let mut row = Vec::with_capacity((r - a) as usize + 1);
            row.push(T::zero());
            for b in 1..=(r - a) {
                acc += half * (f[lat.at(su * a, sv * (b - 1))] + f[lat.at(su * a, sv * b)]);
                row.push(acc);
            }
            rows.push(row);
        }
        for b in 0..=r {
            let mut acc = T::zero();
            let mut acc_line = T::zero();
            for a in 0..=(r - b) {
                if a > 0 {
                    let (au, bu) = (a as usize, b as usize);
                    acc += half * (rows[au - 1][bu] + rows[au][bu]);
                    acc_line += half * (f[lat.at(su * (a - 1), sv * b)] + f[lat.at(su * a, sv * b)]);
                }
                let idx = lat.at(su * a, sv * b);
                total[idx] = s * eta * eta * acc;
                if want_lines {
                    ib[idx] = T::from_isize(sv).unwrap() * eta * rows[a as usize][b as usize];
                    ia[idx] = T::from_isize(su).unwrap() * eta * acc_line;
                }
            }
        }
    }
    (total, ib, ia)
}

impl<T: Real> GoursatKernel<T> {
    /// Solves the Goursat problem for axis `j` of `sp` by Picard iteration.
    pub fn solve(sp: &Superpotential<T>, j: usize, opts: GoursatOptions<T>) -> Result<Self> {
        Self::solve_profile(sp.axis(j), j, opts)
    }

    pub fn solve_profile(profile: &AxisProfile<T>, axis: usize, opts: GoursatOptions<T>) -> Result<Self> {
        let grid = *profile.grid();
        let m = grid.origin();
        let h = grid.spacing();
        let eta = h * T::lit(0.5);
        let r = 2 * m;
        let lat = Lattice::new(r);
        let ri = r as isize;
        let half = T::lit(0.5);

        // q at lattice diagonals s = i + j, position s * eta
        let qd: Vec<T> = (-ri..=ri)
            .map(|s| profile.q_at(T::from_isize(s).unwrap() * eta))
            .collect();
        let g: Vec<T> = cumulative_trapezoid(&qd, eta, r).into_iter().map(|v| v * half).collect();
        let qs = |i: isize, j: isize| qd[(i + j + ri) as usize];
        let inside = |i: isize, j: isize| i.abs() + j.abs() <= ri;

        let mut hh = vec![T::zero(); lat.len()];
        for i in -ri..=ri {
            for jj in -ri..=ri {
                if inside(i, jj) {
                    hh[lat.at(i, jj)] = g[(i + ri) as usize];
                }
            }
        }
        let mut history = Vec::new();
        let mut f = vec![T::zero(); lat.len()];
        let mut converged = false;
        for _ in 0..opts.max_iter {
            for i in -ri..=ri {
                for jj in -ri..=ri {
                    if inside(i, jj) {
                        let k = lat.at(i, jj);
                        f[k] = qs(i, jj) * hh[k];
                    }
                }
            }
            let (int, _, _) = integrals(&lat, &f, eta, false);
            let mut defect = T::zero();
            for i in -ri..=ri {
                for jj in -ri..=ri {
                    if inside(i, jj) {
                        let k = lat.at(i, jj);
                        let next = g[(i + ri) as usize] + int[k];
                        defect = defect.max((next - hh[k]).abs());
                        hh[k] = next;
                    }
                }
            }
            history.push(defect);
            if !defect.is_finite() {
                break;
            }
            if defect <= opts.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                iterations: history.len(),
                last: history.last().map_or(f64::NAN, |v| v.to_f64_lossy()),
                history: history.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }

        // characteristic derivatives of the converged iterate
        for i in -ri..=ri {
            for jj in -ri..=ri {
                if inside(i, jj) {
                    let k = lat.at(i, jj);
                    f[k] = qs(i, jj) * hh[k];
                }
            }
        }
        let (_, ib, ia) = integrals(&lat, &f, eta, true);

        let n = grid.len();
        let mi = m as isize;
        let mut k = vec![T::zero(); n * n];
        let mut k_t = vec![T::zero(); n * n];
        for xm in -mi..=mi {
            for tl in -mi..=mi {
                let (i, jj) = (xm + tl, xm - tl);
                let idx = lat.at(i, jj);
                let h_u = half * qd[(i + ri) as usize] + ib[idx];
                let h_v = ia[idx];
                let row = (xm + mi) as usize;
                let col = (tl + mi) as usize;
                k[row * n + col] = hh[idx];
                k_t[row * n + col] = half * (h_u - h_v);
            }
        }
        Ok(Self {
            axis,
            grid,
            q: profile.q(),
            h_param: profile.h_param(),
            k,
            k_t,
            iterations: history.len(),
            history,
        })
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    /// `q = chi'' + chi'^2` at the axis nodes.
    pub fn q(&self) -> &[T] {
        &self.q
    }

    /// `h = (e^chi)'(0)`.
    pub fn h_param(&self) -> T {
        self.h_param
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn final_defect(&self) -> T {
        self.history.last().copied().unwrap_or_else(T::zero)
    }

    pub fn history(&self) -> &[T] {
        &self.history
    }

    /// `K(x_r, t_c)` by axis node indices.
    #[inline]
    pub fn k(&self, r: usize, c: usize) -> T {
        self.k[r * self.grid.len() + c]
    }

    /// `dK/dt (x_r, t_c)`.
    #[inline]
    pub fn k_t(&self, r: usize, c: usize) -> T {
        self.k_t[r * self.grid.len() + c]
    }

    /// `(x, t, K)` for every node pair with `|t| <= |x|`.
    pub fn triangle(&self) -> Vec<(T, T, T)> {
        let n = self.grid.len();
        let o = self.grid.origin() as isize;
        let mut out = Vec::new();
        for r in 0..n {
            let xr = (r as isize - o).abs();
            for c in 0..n {
                if (c as isize - o).abs() <= xr {
                    out.push((self.grid.node(r), self.grid.node(c), self.k(r, c)));
                }
            }
        }
        out
    }
}

/// `K(x, t; h) = h/2 + K(x, t) + (h/2) int_t^x [K(x, s) - K(x, -s)] ds` and its
/// `t`-derivative, on all node pairs.
#[derive(Clone, Debug)]
pub struct BoldKernel<T> {
    grid: Grid1D<T>,
    h_param: T,
    values: Vec<T>,
    dt: Vec<T>,
}

impl<T: Real> BoldKernel<T> {
    pub fn new(kernel: &GoursatKernel<T>) -> Self {
        Self::with_h(kernel, kernel.h_param())
    }

    pub fn with_h(kernel: &GoursatKernel<T>, h_param: T) -> Self {
        let grid = *kernel.grid();
        let n = grid.len();
        let o = grid.origin();
        let hs = grid.spacing();
        let half_h = h_param * T::lit(0.5);
        let mut values = vec![T::zero(); n * n];
        let mut dt = vec![T::zero(); n * n];
        for r in 0..n {
            let odd: Vec<T> = (0..n).map(|c| kernel.k(r, c) - kernel.k(r, grid.mirror(c))).collect();
            let cum = cumulative_trapezoid(&odd, hs, o);
            for c in 0..n {
                let idx = r * n + c;
                values[idx] = half_h + kernel.k(r, c) + half_h * (cum[r] - cum[c]);
                dt[idx] = kernel.k_t(r, c) - half_h * odd[c];
            }
        }
        Self {
            grid,
            h_param,
            values,
            dt,
        }
    }

    pub fn grid(&self) -> &Grid1D<T> {
        &self.grid
    }

    pub fn h_param(&self) -> T {
        self.h_param
    }

    #[inline]
    pub fn value(&self, r: usize, c: usize) -> T {
        self.values[r * self.grid.len() + c]
    }

    #[inline]
    pub fn dt(&self, r: usize, c: usize) -> T {
        self.dt[r * self.grid.len() + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn sp(name: &str, p: &[f64], n: usize) -> Superpotential<f64> {
        Superpotential::catalog(name, p, Grid2D::square(1.0, n).unwrap()).unwrap()
    }

    #[test]
    fn free_kernel_vanishes_in_one_iteration() {
        let s = sp("zero", &[], 21);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        assert_eq!(k.iterations(), 1);
        assert!(k.triangle().iter().all(|&(_, _, v)| v == 0.0));
        let b = BoldKernel::new(&k);
        assert_eq!(b.value(3, 5), 0.0);
    }

    #[test]
    fn goursat_data_on_the_characteristics() {
        let s = sp("quadratic", &[1.0, 1.0], 101);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        let g = s.grid().gx;
        let h = g.spacing();
        let half: Vec<f64> = cumulative_trapezoid(k.q(), h, g.origin()).iter().map(|v| v / 2.0).collect();
        for r in 0..g.len() {
            assert!((k.k(r, r) - half[r]).abs() < 1e-4);
            assert!(k.k(r, g.mirror(r)).abs() < 1e-15);
        }
        assert!(k.final_defect() <= 1e-12);
    }

    #[test]
    fn kernel_satisfies_the_wave_equation() {
        let s = sp("quadratic", &[1.0, 1.0], 201);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        let g = s.grid().gx;
        let h = g.spacing();
        let mut worst: f64 = 0.0;
        for r in 20..181 {
            for c in 20..181 {
                let kxx = (k.k(r + 1, c) - 2.0 * k.k(r, c) + k.k(r - 1, c)) / (h * h);
                let ktt = (k.k(r, c + 1) - 2.0 * k.k(r, c) + k.k(r, c - 1)) / (h * h);
                let x = g.node(r);
                worst = worst.max((kxx - (1.0 + x * x) * k.k(r, c) - ktt).abs());
            }
        }
        assert!(worst < 1e-2, "{worst}");
    }

    #[test]
    fn t_derivative_matches_differences() {
        let s = sp("linear", &[1.0, 0.0], 201);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        let h = s.grid().h();
        for r in 10..190 {
            for c in 10..190 {
                let fd = (k.k(r, c + 1) - k.k(r, c - 1)) / (2.0 * h);
                assert!((fd - k.k_t(r, c)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn bold_kernel_special_cases() {
        let s = sp("zero", &[], 21);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        let b = BoldKernel::with_h(&k, 0.8);
        assert!((b.value(4, 7) - 0.4).abs() < 1e-15);

        let s = sp("linear", &[1.0, 0.0], 41);
        let k = GoursatKernel::solve(&s, 1, GoursatOptions::default()).unwrap();
        let b0 = BoldKernel::with_h(&k, 0.0);
        assert_eq!(b0.value(30, 25), k.k(30, 25));
        let b = BoldKernel::new(&k);
        assert_eq!(b.h_param(), 1.0);
        // direct trapezoid of the odd part between t and x
        let g = s.grid().gx;
        let (r, c) = (35, 22);
        let mut acc = 0.0;
        for s in c..r {
            let f = |s: usize| k.k(r, s) - k.k(r, g.mirror(s));
            acc += 0.5 * g.spacing() * (f(s) + f(s + 1));
        }
        assert!((b.value(r, c) - (0.5 + k.k(r, c) + 0.5 * acc)).abs() < 1e-13);
    }

    #[test]
    fn non_convergence_reports_history() {
        let s = sp("quadratic", &[1.0, 1.0], 41);
        let err = GoursatKernel::solve(&s, 1, GoursatOptions { tol: 1e-30, max_iter: 3 }).unwrap_err();
        match err {
            Error::NonConvergence { iterations, history, .. } => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 3);
                assert!(history[2] < history[0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
