//! Fields sampled on a [`Grid2D`].

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::scalar::{FieldValue, Real};

/// Node values on a grid, row-major (`x` fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T, S> {
    grid: Grid2D<T>,
    values: Vec<S>,
}

pub type ScalarField<T> = Field<T, T>;
pub type ComplexField<T> = Field<T, Complex<T>>;

impl<T: Real, S: FieldValue<T>> Field<T, S> {
    pub fn from_values(grid: Grid2D<T>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self {
            grid,
            values: vec![S::zero(); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> S) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            let y = grid.gy.node(iy);
            for ix in 0..grid.nx() {
                values.push(f(grid.gx.node(ix), y));
            }
        }
        Self { grid, values }
    }

    /// Tensor product `fx(x) * fy(y)` of per-axis samples.
    pub fn from_axes(grid: Grid2D<T>, fx: &[S], fy: &[T]) -> Result<Self> {
        if fx.len() != grid.nx() || fy.len() != grid.ny() {
            return Err(Error::Shape("axis sample lengths do not match the grid".into()));
        }
        let mut values = Vec::with_capacity(grid.len());
        for &b in fy {
            values.extend(fx.iter().map(|&a| a * b));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> S {
        self.values[self.grid.index(ix, iy)]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: S) {
        let k = self.grid.index(ix, iy);
        self.values[k] = v;
    }

    /// Value at the origin node.
    pub fn at_origin(&self) -> S {
        let (ix, iy) = self.grid.origin();
        self.at(ix, iy)
    }

    pub fn row(&self, iy: usize) -> &[S] {
        let nx = self.grid.nx();
        &self.values[iy * nx..(iy + 1) * nx]
    }

    pub fn column(&self, ix: usize) -> Vec<S> {
        (0..self.grid.ny()).map(|iy| self.at(ix, iy)).collect()
    }

    pub fn map<R: FieldValue<T>>(&self, f: impl Fn(S) -> R) -> Field<T, R> {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nodewise map with access to coordinates.
    pub fn map_xy<R: FieldValue<T>>(&self, f: impl Fn(T, T, S) -> R) -> Field<T, R> {
        let g = self.grid;
        let mut values = Vec::with_capacity(g.len());
        for iy in 0..g.ny() {
            let y = g.gy.node(iy);
            for ix in 0..g.nx() {
                values.push(f(g.gx.node(ix), y, self.at(ix, iy)));
            }
        }
        Field { grid: g, values }
    }

    pub fn zip_map<U: FieldValue<T>, R: FieldValue<T>>(
        &self,
        other: &Field<T, U>,
        f: impl Fn(S, U) -> R,
    ) -> Field<T, R> {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    /// Nodewise product with a real field.
    pub fn mul_real(&self, r: &ScalarField<T>) -> Self {
        self.zip_map(r, |a, b| a * b)
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.magnitude()))
    }

    /// Max-norm over nodes at least `margin` nodes away from the boundary.
    pub fn interior_max_abs(&self, margin: usize) -> T {
        self.interior_argmax(margin).0
    }

    /// Max-norm over the interior together with the node attaining it.
    pub fn interior_argmax(&self, margin: usize) -> (T, (usize, usize)) {
        let g = self.grid;
        let mut best = (T::zero(), g.origin());
        for iy in margin..g.ny().saturating_sub(margin) {
            for ix in margin..g.nx().saturating_sub(margin) {
                let m = self.at(ix, iy).magnitude();
                if m > best.0 || m.is_nan() {
                    best = (m, (ix, iy));
                }
            }
        }
        best
    }

    /// Root-mean-square over the interior.
    pub fn interior_rms(&self, margin: usize) -> T {
        let g = self.grid;
        let mut acc = T::zero();
        let mut count = 0usize;
        for iy in margin..g.ny().saturating_sub(margin) {
            for ix in margin..g.nx().saturating_sub(margin) {
                let m = self.at(ix, iy).magnitude();
                acc += m * m;
                count += 1;
            }
        }
        if count == 0 {
            T::zero()
        } else {
            (acc / T::from_usize_lossy(count)).sqrt()
        }
    }

    /// Max-norm of a field on a refined grid (`2N - 1` nodes per axis), taken
    /// only over the nodes shared with the coarse grid's interior.
    pub fn coarse_interior_max_abs(&self, coarse_margin: usize) -> T {
        let g = self.grid;
        let (cnx, cny) = ((g.nx() + 1) / 2, (g.ny() + 1) / 2);
        let mut best = T::zero();
        for cy in coarse_margin..cny.saturating_sub(coarse_margin) {
            for cx in coarse_margin..cnx.saturating_sub(coarse_margin) {
                let m = self.at(2 * cx, 2 * cy).magnitude();
                if m > best || m.is_nan() {
                    best = m;
                }
            }
        }
        best
    }

    /// Max-norm restricted to `|x| <= fx * a1` and `|y| <= fy * a2`.
    pub fn subrect_max_abs(&self, frac: T) -> T {
        let g = self.grid;
        let (ax, ay) = (g.gx.half_width() * frac, g.gy.half_width() * frac);
        let tol = T::lit(1e-12);
        let mut best = T::zero();
        for iy in 0..g.ny() {
            let y = g.gy.node(iy);
            if y.abs() > ay + tol {
                continue;
            }
            for ix in 0..g.nx() {
                if g.gx.node(ix).abs() > ax + tol {
                    continue;
                }
                best = best.max(self.at(ix, iy).magnitude());
            }
        }
        best
    }
}

impl<T: Real> ScalarField<T> {
    pub fn to_complex(&self) -> ComplexField<T> {
        self.map(|v| Complex::new(v, T::zero()))
    }

    /// Nodewise `exp`.
    pub fn exp(&self) -> Self {
        self.map(|v| v.exp())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }
}

impl<T: Real> ComplexField<T> {
    pub fn from_parts(re: &ScalarField<T>, im: &ScalarField<T>) -> Self {
        re.zip_map(im, |a, b| Complex::new(a, b))
    }

    pub fn re(&self) -> ScalarField<T> {
        self.map(|v| v.re)
    }

    pub fn im(&self) -> ScalarField<T> {
        self.map(|v| v.im)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn mul_complex(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale_complex(&self, c: Complex<T>) -> Self {
        self.map(|v| v * c)
    }
}

impl<T: Real, S: FieldValue<T>> Add for &Field<T, S> {
    type Output = Field<T, S>;
    fn add(self, rhs: Self) -> Field<T, S> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real, S: FieldValue<T>> Sub for &Field<T, S> {
    type Output = Field<T, S>;
    fn sub(self, rhs: Self) -> Field<T, S> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real, S: FieldValue<T>> Neg for &Field<T, S> {
    type Output = Field<T, S>;
    fn neg(self) -> Field<T, S> {
        self.map(|a| -a)
    }
}

impl<T: Real, S: FieldValue<T>> Mul<T> for &Field<T, S> {
    type Output = Field<T, S>;
    fn mul(self, rhs: T) -> Field<T, S> {
        self.scale(rhs)
    }
}

/// Pair of real fields on one grid, e.g. `(psi0, psi2)` or `(psi1_1, psi1_2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField2<T> {
    pub c1: ScalarField<T>,
    pub c2: ScalarField<T>,
}

impl<T: Real> VectorField2<T> {
    pub fn new(c1: ScalarField<T>, c2: ScalarField<T>) -> Result<Self> {
        if c1.grid() != c2.grid() {
            return Err(Error::Shape("vector components on different grids".into()));
        }
        Ok(Self { c1, c2 })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.c1.grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField<T> {
        match i {
            1 => &self.c1,
            2 => &self.c2,
            _ => panic!("vector component index must be 1 or 2, got {i}"),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c1: &self.c1 - &other.c1,
            c2: &self.c2 - &other.c2,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c1: &self.c1 + &other.c1,
            c2: &self.c2 + &other.c2,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            c1: self.c1.scale(s),
            c2: self.c2.scale(s),
        }
    }

    pub fn interior_max_abs(&self, margin: usize) -> T {
        self.c1
            .interior_max_abs(margin)
            .max(self.c2.interior_max_abs(margin))
    }

    pub fn coarse_interior_max_abs(&self, margin: usize) -> T {
        self.c1
            .coarse_interior_max_abs(margin)
            .max(self.c2.coarse_interior_max_abs(margin))
    }

    pub fn max_abs(&self) -> T {
        self.c1.max_abs().max(self.c2.max_abs())
    }
}
