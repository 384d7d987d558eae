//! Transmutation operators `T_j`, `T~_j` as Volterra integrals with the
//! Goursat kernel, and the operators `T0`, `T1` acting on complex fields.

use crate::diff::derivative_1d;
use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::goursat::{BoldKernel, GoursatKernel, GoursatOptions};
use crate::grid::Grid1D;
use crate::quadrature::cumulative_trapezoid;
use crate::scalar::Real;
use crate::superpotential::Superpotential;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    T,
    Ttilde,
}

/// Dense `n x n` Volterra operator `f -> f + int_{-x}^{x} k(x, t) f(t) dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct Volterra<T> {
    n: usize,
    matrix: Vec<T>,
}

impl<T: Real> Volterra<T> {
    /// Trapezoid discretization with oriented limits for `x < 0`.
    pub fn from_kernel(grid: &Grid1D<T>, kernel: impl Fn(usize, usize) -> T) -> Self {
        let n = grid.len();
        let o = grid.origin();
        let h = grid.spacing();
        let half = T::lit(0.5);
        let mut matrix = vec![T::zero(); n * n];
        for r in 0..n {
            matrix[r * n + r] = T::one();
            if r == o {
                continue;
            }
            let (lo, hi, sign) = if r > o {
                (grid.mirror(r), r, T::one())
            } else {
                (r, grid.mirror(r), -T::one())
            };
            for c in lo..=hi {
                let w = if c == lo || c == hi { half * h } else { h };
                matrix[r * n + c] += sign * w * kernel(r, c);
            }
        }
        Self { n, matrix }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn entry(&self, r: usize, c: usize) -> T {
        self.matrix[r * self.n + c]
    }

    pub fn apply(&self, f: &[T]) -> Vec<T> {
        assert_eq!(f.len(), self.n, "sample count must match the axis");
        self.matrix
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(f).fold(T::zero(), |acc, (a, b)| acc + *a * *b))
            .collect()
    }
}

/// `T_j` and `T~_j` of one axis.
#[derive(Clone, Debug)]
pub struct AxisTransmutation<T> {
    kernel: GoursatKernel<T>,
    t: Volterra<T>,
    tt: Volterra<T>,
    ep: Vec<T>,
    em: Vec<T>,
    cross_check: T,
}

impl<T: Real> AxisTransmutation<T> {
    /// Builds both operators and cross-checks the kernel form of `T~` against
    /// `e^{-chi} (int_0^x e^chi T[f'] + f(0))` on monomials.
    pub fn new(kernel: GoursatKernel<T>, chi: &[T]) -> Result<Self> {
        let grid = *kernel.grid();
        let n = grid.len();
        let bold = BoldKernel::new(&kernel);
        let t = Volterra::from_kernel(&grid, |r, c| bold.value(r, c));
        let ep: Vec<T> = chi.iter().map(|c| c.exp()).collect();
        let em: Vec<T> = chi.iter().map(|c| (-*c).exp()).collect();

        // K~(x, t) = -e^{-chi(x)} (int_{-t}^{x} dK/dt(s, t) e^{chi(s)} ds + (h/2) e^{chi(-t)})
        let h = grid.spacing();
        let half_h = kernel.h_param() * T::lit(0.5);
        let mut kt = vec![T::zero(); n * n];
        for c in 0..n {
            let integrand: Vec<T> = (0..n).map(|s| bold.dt(s, c) * ep[s]).collect();
            let cum = cumulative_trapezoid(&integrand, h, grid.mirror(c));
            for r in 0..n {
                kt[r * n + c] = -em[r] * (cum[r] + half_h * ep[grid.mirror(c)]);
            }
        }
        let tt = Volterra::from_kernel(&grid, |r, c| kt[r * n + c]);
        let mut op = Self {
            kernel,
            t,
            tt,
            ep,
            em,
            cross_check: T::zero(),
        };
        let cap = T::lit(50.0) * h * h;
        let nodes = grid.nodes();
        let mut worst = T::zero();
        for k in 0..=4 {
            let f: Vec<T> = nodes.iter().map(|x| x.powi(k)).collect();
            let a = op.apply(Variant::Ttilde, &f);
            let b = op.ttilde_via_derivative(&f);
            let scale = a.iter().fold(T::one(), |m, v| m.max(v.abs()));
            let d = a.iter().zip(&b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
            worst = worst.max(d / scale);
        }
        op.cross_check = worst;
        if worst > cap {
            return Err(Error::CrossCheck {
                difference: worst.to_f64_lossy(),
                cap: cap.to_f64_lossy(),
            });
        }
        Ok(op)
    }

    pub fn kernel(&self) -> &GoursatKernel<T> {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid1D<T> {
        self.kernel.grid()
    }

    /// Relative disagreement between the two `T~` representations.
    pub fn cross_check_defect(&self) -> T {
        self.cross_check
    }

    pub fn operator(&self, variant: Variant) -> &Volterra<T> {
        match variant {
            Variant::T => &self.t,
            Variant::Ttilde => &self.tt,
        }
    }

    pub fn apply(&self, variant: Variant, f: &[T]) -> Vec<T> {
        self.operator(variant).apply(f)
    }

    /// `T~[f] = e^{-chi} (int_0^x e^chi T[f'] ds + f(0))`, with `f'` by finite
    /// differences.
    pub fn ttilde_via_derivative(&self, f: &[T]) -> Vec<T> {
        let grid = self.grid();
        let h = grid.spacing();
        let o = grid.origin();
        let fp = derivative_1d(f, h, 1);
        let tf = self.t.apply(&fp);
        let integrand: Vec<T> = tf.iter().zip(&self.ep).map(|(a, b)| *a * *b).collect();
        let cum = cumulative_trapezoid(&integrand, h, o);
        cum.iter()
            .zip(&self.em)
            .map(|(c, e)| *e * (*c + f[o]))
            .collect()
    }

    pub fn exp_plus(&self) -> &[T] {
        &self.ep
    }

    pub fn exp_minus(&self) -> &[T] {
        &self.em
    }
}

/// Transmutations of both axes of a superpotential.
#[derive(Clone, Debug)]
pub struct Transmutations<T> {
    pub x: AxisTransmutation<T>,
    pub y: AxisTransmutation<T>,
}

/// Which operator the `transmute` command applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransmuteKind {
    /// `T1 T2 P+ + i T~1 T~2 P-`
    T0,
    /// `T~1 T2 P+ + i T1 T~2 P-`
    T1,
    /// `T_1` along x on real and imaginary parts
    T1d,
    /// `T_2` along y on real and imaginary parts
    T2d,
}

impl<T: Real> Transmutations<T> {
    pub fn new(sp: &Superpotential<T>, opts: GoursatOptions<T>) -> Result<Self> {
        let kx = GoursatKernel::solve(sp, 1, opts)?;
        let ky = GoursatKernel::solve(sp, 2, opts)?;
        Ok(Self {
            x: AxisTransmutation::new(kx, sp.axis(1).chi())?,
            y: AxisTransmutation::new(ky, sp.axis(2).chi())?,
        })
    }

    /// Applies `op` along x to every row of `f`.
    pub fn along_x(&self, variant: Variant, f: &ScalarField<T>) -> ScalarField<T> {
        let g = *f.grid();
        let op = self.x.operator(variant);
        let mut out = ScalarField::zeros(g);
        for iy in 0..g.ny() {
            let row = op.apply(f.row(iy));
            for (ix, v) in row.into_iter().enumerate() {
                out.set(ix, iy, v);
            }
        }
        out
    }

    /// Applies `op` along y to every column of `f`.
    pub fn along_y(&self, variant: Variant, f: &ScalarField<T>) -> ScalarField<T> {
        let g = *f.grid();
        let op = self.y.operator(variant);
        let mut out = ScalarField::zeros(g);
        for ix in 0..g.nx() {
            let col = op.apply(&f.column(ix));
            for (iy, v) in col.into_iter().enumerate() {
                out.set(ix, iy, v);
            }
        }
        out
    }

    fn both(&self, vx: Variant, vy: Variant, f: &ScalarField<T>) -> ScalarField<T> {
        self.along_x(vx, &self.along_y(vy, f))
    }

    /// `T0 w = T1 T2 Re w + i T~1 T~2 Im w`.
    pub fn t0(&self, w: &ComplexField<T>) -> ComplexField<T> {
        ComplexField::from_parts(
            &self.both(Variant::T, Variant::T, &w.re()),
            &self.both(Variant::Ttilde, Variant::Ttilde, &w.im()),
        )
    }

    /// `T1 w = T~1 T2 Re w + i T1 T~2 Im w`.
    pub fn t1(&self, w: &ComplexField<T>) -> ComplexField<T> {
        ComplexField::from_parts(
            &self.both(Variant::Ttilde, Variant::T, &w.re()),
            &self.both(Variant::T, Variant::Ttilde, &w.im()),
        )
    }

    pub fn apply(&self, kind: TransmuteKind, w: &ComplexField<T>) -> ComplexField<T> {
        match kind {
            TransmuteKind::T0 => self.t0(w),
            TransmuteKind::T1 => self.t1(w),
            TransmuteKind::T1d => ComplexField::from_parts(
                &self.along_x(Variant::T, &w.re()),
                &self.along_x(Variant::T, &w.im()),
            ),
            TransmuteKind::T2d => ComplexField::from_parts(
                &self.along_y(Variant::T, &w.re()),
                &self.along_y(Variant::T, &w.im()),
            ),
        }
    }
}
