//! Uniform tensor-product grids on symmetric intervals and rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform grid on `[-a, a]` with an odd number of nodes, so that `0` is a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D<T> {
    half_width: T,
    n: usize,
    h: T,
}

impl<T: Real> Grid1D<T> {
    pub fn new(half_width: T, n: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::Grid(format!("node count must be odd and >= 3, got {n}")));
        }
        let h = (half_width + half_width) / T::from_usize_lossy(n - 1);
        Ok(Self { half_width, n, h })
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> T {
        self.h
    }

    /// Index of the node at `0`.
    #[inline]
    pub fn origin(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Node coordinate, computed from the signed offset to the origin so the
    /// grid is exactly symmetric.
    #[inline]
    pub fn node(&self, k: usize) -> T {
        let c = self.origin();
        if k >= c {
            T::from_usize_lossy(k - c) * self.h
        } else {
            -(T::from_usize_lossy(c - k) * self.h)
        }
    }

    /// Signed offset of node `k` from the origin, in units of `h`.
    #[inline]
    pub fn offset(&self, k: usize) -> isize {
        k as isize - self.origin() as isize
    }

    /// Node index at signed offset `m` from the origin.
    #[inline]
    pub fn index_of_offset(&self, m: isize) -> usize {
        (self.origin() as isize + m) as usize
    }

    /// Index of the node `-x_k`.
    #[inline]
    pub fn mirror(&self, k: usize) -> usize {
        self.n - 1 - k
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Locates `x` among the nodes within `1e-9 h`.
    pub fn locate(&self, x: T) -> Option<usize> {
        let r = x / self.h + T::from_usize_lossy(self.origin());
        let k = r.round();
        if k < T::zero() || k > T::from_usize_lossy(self.n - 1) {
            return None;
        }
        if (r - k).abs() > T::lit(1e-9) {
            return None;
        }
        k.to_usize()
    }

    /// Grid with `2n - 1` nodes on the same interval (spacing halved).
    pub fn refined(&self) -> Self {
        Self::new(self.half_width, 2 * self.n - 1).expect("refinement of a valid grid")
    }
}

/// Tensor-product grid on `[-a1, a1] x [-a2, a2]`. Values are stored row-major
/// with `x` varying fastest: index `iy * nx + ix`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    pub gx: Grid1D<T>,
    pub gy: Grid1D<T>,
}

/// Grid metadata record written next to exported fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a1: f64,
    pub a2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl<T: Real> Grid2D<T> {
    pub fn new(a1: T, n1: usize, a2: T, n2: usize) -> Result<Self> {
        Ok(Self {
            gx: Grid1D::new(a1, n1)?,
            gy: Grid1D::new(a2, n2)?,
        })
    }

    pub fn square(a: T, n: usize) -> Result<Self> {
        Self::new(a, n, a, n)
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(T::lit(spec.a1), spec.n1, T::lit(spec.a2), spec.n2)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            a1: self.gx.half_width().to_f64_lossy(),
            a2: self.gy.half_width().to_f64_lossy(),
            n1: self.gx.len(),
            n2: self.gy.len(),
        }
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.gx.len()
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.gy.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    #[inline]
    pub fn coords(&self, ix: usize, iy: usize) -> (T, T) {
        (self.gx.node(ix), self.gy.node(iy))
    }

    /// Node indices of the origin `z0 = (0, 0)`.
    #[inline]
    pub fn origin(&self) -> (usize, usize) {
        (self.gx.origin(), self.gy.origin())
    }

    /// Largest of the two spacings.
    pub fn h(&self) -> T {
        self.gx.spacing().max(self.gy.spacing())
    }

    pub fn locate(&self, x: T, y: T) -> Result<(usize, usize)> {
        match (self.gx.locate(x), self.gy.locate(y)) {
            (Some(ix), Some(iy)) => Ok((ix, iy)),
            _ => Err(Error::OffGrid {
                x: x.to_f64_lossy(),
                y: y.to_f64_lossy(),
            }),
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            gx: self.gx.refined(),
            gy: self.gy.refined(),
        }
    }

    /// True when node `(ix, iy)` is at least `margin` nodes away from every edge.
    #[inline]
    pub fn is_interior(&self, ix: usize, iy: usize, margin: usize) -> bool {
        ix >= margin && iy >= margin && ix + margin < self.nx() && iy + margin < self.ny()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_even_and_tiny_grids() {
        assert!(Grid1D::new(1.0f64, 4).is_err());
        assert!(Grid1D::new(1.0f64, 1).is_err());
        assert!(Grid1D::new(0.0f64, 5).is_err());
        assert!(Grid1D::new(1.0f64, 3).is_ok());
    }

    #[test]
    fn nodes_are_symmetric_and_span_the_interval() {
        for &(a, n) in &[(1.0f64, 201usize), (0.7, 33), (2.5, 3)] {
            let g = Grid1D::new(a, n).unwrap();
            for k in 0..n {
                assert_eq!(g.node(k) + g.node(g.mirror(k)), 0.0);
            }
            assert_eq!(g.node(g.origin()), 0.0);
            assert!((g.spacing() * (n - 1) as f64 - 2.0 * a).abs() <= 1e-12 * a);
            assert!((g.node(0) + a).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn locate_round_trips() {
        let g = Grid2D::square(1.0f64, 21).unwrap();
        let (x, y) = g.coords(3, 17);
        assert_eq!(g.locate(x, y).unwrap(), (3, 17));
        assert!(g.locate(0.0123, 0.0).is_err());
        assert!(g.locate(1.5, 0.0).is_err());
    }

    #[test]
    fn refinement_halves_spacing() {
        let g = Grid2D::square(1.0f64, 11).unwrap();
        let r = g.refined();
        assert_eq!(r.nx(), 21);
        assert!((r.gx.spacing() * 2.0 - g.gx.spacing()).abs() < 1e-15);
    }
}
