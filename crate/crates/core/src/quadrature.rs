//! Cumulative trapezoid quadrature and integrals along axis-parallel L-paths.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Field, ScalarField};
use crate::grid::{Grid1D, Grid2D};
use crate::scalar::{FieldValue, Real};

/// Antiderivative of node samples by the composite trapezoid rule, vanishing
/// at `origin`. Integration toward smaller indices is oriented (negative).
pub fn cumulative_integral_1d<T: Real, S: FieldValue<T>>(
    grid: &Grid1D<T>,
    samples: &[S],
    origin: usize,
) -> Result<Vec<S>> {
    if samples.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{} samples for a {}-node grid",
            samples.len(),
            grid.len()
        )));
    }
    if origin >= grid.len() {
        return Err(Error::OutOfRange {
            index: origin,
            limit: grid.len(),
        });
    }
    Ok(cumulative_trapezoid(samples, grid.spacing(), origin))
}

/// Unchecked core of [`cumulative_integral_1d`].
pub fn cumulative_trapezoid<T: Real, S: FieldValue<T>>(f: &[S], h: T, origin: usize) -> Vec<S> {
    let half_h = h * T::lit(0.5);
    let mut out = vec![S::zero(); f.len()];
    for k in origin + 1..f.len() {
        out[k] = out[k - 1] + (f[k - 1] + f[k]) * half_h;
    }
    for k in (0..origin).rev() {
        out[k] = out[k + 1] - (f[k] + f[k + 1]) * half_h;
    }
    out
}

/// Leg order of an axis-parallel L-path from the start node to the end node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PathOrder {
    /// Along `x` at the start's `y`, then along `y` at the end's `x`.
    #[default]
    XThenY,
    YThenX,
}

/// Axis-parallel L-path between two grid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSpec<T> {
    pub start: (T, T),
    pub end: (T, T),
    pub order: PathOrder,
}

/// Sign pairing of the two legs: `+` integrates `phi1 dx + phi2 dy`,
/// `-` integrates `phi1 dx - phi2 dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LegSigns {
    Plus,
    Minus,
}

/// `2 (int phi1 dx +/- phi2 dy)` along L-paths from `start` to every node.
pub fn path_integral_l<T: Real>(
    phi1: &ScalarField<T>,
    phi2: &ScalarField<T>,
    start: (usize, usize),
    signs: LegSigns,
    order: PathOrder,
) -> Result<ScalarField<T>> {
    if phi1.grid() != phi2.grid() {
        return Err(Error::Shape("integrand components on different grids".into()));
    }
    let g = *phi1.grid();
    if start.0 >= g.nx() || start.1 >= g.ny() {
        return Err(Error::OutOfRange {
            index: start.0.max(start.1),
            limit: g.nx().min(g.ny()),
        });
    }
    let s = match signs {
        LegSigns::Plus => T::one(),
        LegSigns::Minus => -T::one(),
    };
    let p2 = phi2.scale(s);
    let two = T::lit(2.0);
    Ok(l_path(phi1, &p2, start, order).scale(two))
}

/// Single-endpoint evaluation of [`path_integral_l`].
pub fn path_integral_l_at<T: Real>(
    phi1: &ScalarField<T>,
    phi2: &ScalarField<T>,
    path: &PathSpec<T>,
    signs: LegSigns,
) -> Result<T> {
    let g = phi1.grid();
    let start = g.locate(path.start.0, path.start.1)?;
    let end = g.locate(path.end.0, path.end.1)?;
    let field = path_integral_l(phi1, phi2, start, signs, path.order)?;
    Ok(field.at(end.0, end.1))
}

/// Complex line integral `int w dzeta` along L-paths from `start`.
pub fn contour_integral_l<T: Real>(
    w: &ComplexField<T>,
    start: (usize, usize),
    order: PathOrder,
) -> ComplexField<T> {
    let i = Complex::new(T::zero(), T::one());
    l_path(w, &w.scale_complex(i), start, order)
}

/// `int f dx + g dy` along L-paths from `start` (no factor 2).
fn l_path<T: Real, S: FieldValue<T>>(
    f: &Field<T, S>,
    g: &Field<T, S>,
    start: (usize, usize),
    order: PathOrder,
) -> Field<T, S> {
    let grid: Grid2D<T> = *f.grid();
    let (hx, hy) = (grid.gx.spacing(), grid.gy.spacing());
    let (sx, sy) = start;
    let mut out = Field::zeros(grid);
    match order {
        PathOrder::XThenY => {
            let first = cumulative_trapezoid(f.row(sy), hx, sx);
            for ix in 0..grid.nx() {
                let leg = cumulative_trapezoid(&g.column(ix), hy, sy);
                for iy in 0..grid.ny() {
                    out.set(ix, iy, first[ix] + leg[iy]);
                }
            }
        }
        PathOrder::YThenX => {
            let first = cumulative_trapezoid(&g.column(sx), hy, sy);
            for iy in 0..grid.ny() {
                let leg = cumulative_trapezoid(f.row(iy), hx, sx);
                for ix in 0..grid.nx() {
                    out.set(ix, iy, first[iy] + leg[ix]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(n: usize) -> Grid1D<f64> {
        Grid1D::new(1.0, n).unwrap()
    }

    #[test]
    fn exact_for_constant_and_affine() {
        let g = axis(21);
        let ones = vec![1.0; 21];
        let f = cumulative_integral_1d(&g, &ones, g.origin()).unwrap();
        let s: Vec<f64> = g.nodes();
        let fs = cumulative_integral_1d(&g, &s, g.origin()).unwrap();
        for k in 0..21 {
            assert!((f[k] - s[k]).abs() < 1e-14);
            assert!((fs[k] - 0.5 * s[k] * s[k]).abs() < 1e-14);
        }
        assert_eq!(f[g.origin()], 0.0);
    }

    #[test]
    fn exponential_against_closed_form() {
        let g = axis(201);
        let f: Vec<f64> = g.nodes().iter().map(|x| (-2.0 * x).exp()).collect();
        let big_f = cumulative_integral_1d(&g, &f, g.origin()).unwrap();
        let exact = (1.0 - (-2.0f64).exp()) / 2.0;
        assert!((big_f[200] - exact).abs() < 1e-4);
        assert!((exact - 0.432332).abs() < 1e-6);
    }

    #[test]
    fn shape_and_origin_errors() {
        let g = axis(11);
        assert!(cumulative_integral_1d(&g, &[1.0; 10], 0).is_err());
        assert!(cumulative_integral_1d(&g, &[1.0; 11], 11).is_err());
    }

    #[test]
    fn gradient_reconstruction() {
        let g = Grid2D::square(1.0, 41).unwrap();
        // dzbar (x^2 + y^2) = x + i y
        let p1 = ScalarField::from_fn(g, |x, _| x);
        let p2 = ScalarField::from_fn(g, |_, y| y);
        let phi = path_integral_l(&p1, &p2, g.origin(), LegSigns::Plus, PathOrder::XThenY).unwrap();
        let exact = ScalarField::from_fn(g, |x, y| x * x + y * y);
        assert!((&phi - &exact).max_abs() < 1e-12);
        let zero = ScalarField::zeros(g);
        let z = path_integral_l(&zero, &zero, g.origin(), LegSigns::Plus, PathOrder::XThenY).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn exponential_reconstruction_is_second_order() {
        let err = |n: usize| {
            let g = Grid2D::<f64>::square(1.0, n).unwrap();
            // dzbar e^{x+y} = (1 + i) e^{x+y} / 2
            let p = ScalarField::from_fn(g, |x, y| 0.5 * (x + y).exp());
            let phi = path_integral_l(&p, &p, g.origin(), LegSigns::Plus, PathOrder::XThenY).unwrap();
            let exact = ScalarField::from_fn(g, |x, y| (x + y).exp() - 1.0);
            (&phi - &exact).max_abs()
        };
        let (a, b) = (err(51), err(101));
        assert!(a < 1e-3);
        assert!((3.5..=4.5).contains(&(a / b)), "ratio {}", a / b);
    }

    #[test]
    fn single_endpoint_and_off_grid() {
        let g = Grid2D::square(1.0, 21).unwrap();
        let p1 = ScalarField::from_fn(g, |x, _| x);
        let p2 = ScalarField::from_fn(g, |_, y| y);
        let path = PathSpec {
            start: (0.0, 0.0),
            end: (0.5, -0.3),
            order: PathOrder::XThenY,
        };
        let v: f64 = path_integral_l_at(&p1, &p2, &path, LegSigns::Plus).unwrap();
        assert!((v - 0.34).abs() < 1e-12);
        let v: f64 = path_integral_l_at(&p1, &p2, &path, LegSigns::Minus).unwrap();
        assert!((v - 0.16).abs() < 1e-12);
        let bad = PathSpec { end: (0.55, 0.0), ..path };
        assert!(path_integral_l_at(&p1, &p2, &bad, LegSigns::Plus).is_err());
    }

    #[test]
    fn contour_integral_of_one_is_z() {
        let g = Grid2D::square(1.0, 11).unwrap();
        let one = ComplexField::from_fn(g, |_, _| Complex::new(1.0, 0.0));
        let z = contour_integral_l(&one, g.origin(), PathOrder::XThenY);
        for iy in 0..11 {
            for ix in 0..11 {
                let (x, y) = g.coords(ix, iy);
                assert!((z.at(ix, iy) - Complex::new(x, y)).norm() < 1e-14);
            }
        }
    }
}
