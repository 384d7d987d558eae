//! Second-order finite differences: central in the interior, one-sided
//! (second-order) at the boundary.

use num_complex::Complex;

use crate::field::{ComplexField, Field};
use crate::scalar::{FieldValue, Real};

/// First derivative of uniformly spaced samples using nodes `stride` apart.
pub fn derivative_1d<T: Real, S: FieldValue<T>>(f: &[S], h: T, stride: usize) -> Vec<S> {
    let n = f.len();
    assert!(n >= 3, "need at least three samples to differentiate");
    let s = stride.max(1).min((n - 1) / 2);
    let inv2 = (T::lit(2.0) * T::from_usize_lossy(s) * h).recip();
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    (0..n)
        .map(|i| {
            if i >= s && i + s < n {
                (f[i + s] - f[i - s]) * inv2
            } else if i < s {
                (f[i] * (-three) + f[i + s] * four - f[i + 2 * s]) * inv2
            } else {
                (f[i] * three - f[i - s] * four + f[i - 2 * s]) * inv2
            }
        })
        .collect()
}

/// Second derivative of uniformly spaced samples.
pub fn second_derivative_1d<T: Real, S: FieldValue<T>>(f: &[S], h: T) -> Vec<S> {
    let n = f.len();
    assert!(n >= 3, "need at least three samples to differentiate");
    let inv = (h * h).recip();
    let two = T::lit(2.0);
    (0..n)
        .map(|i| {
            if i >= 1 && i + 1 < n {
                (f[i + 1] - f[i] * two + f[i - 1]) * inv
            } else if n < 4 {
                let c = if i == 0 { 1 } else { n - 2 };
                (f[c + 1] - f[c] * two + f[c - 1]) * inv
            } else if i == 0 {
                (f[0] * two - f[1] * T::lit(5.0) + f[2] * T::lit(4.0) - f[3]) * inv
            } else {
                (f[i] * two - f[i - 1] * T::lit(5.0) + f[i - 2] * T::lit(4.0) - f[i - 3]) * inv
            }
        })
        .collect()
}

fn along_x<T: Real, S: FieldValue<T>>(
    f: &Field<T, S>,
    op: impl Fn(&[S]) -> Vec<S>,
) -> Field<T, S> {
    let g = *f.grid();
    let mut out = Vec::with_capacity(g.len());
    for iy in 0..g.ny() {
        out.extend(op(f.row(iy)));
    }
    Field::from_values(g, out).expect("row-wise op preserves shape")
}

fn along_y<T: Real, S: FieldValue<T>>(
    f: &Field<T, S>,
    op: impl Fn(&[S]) -> Vec<S>,
) -> Field<T, S> {
    let g = *f.grid();
    let mut out = Field::zeros(g);
    for ix in 0..g.nx() {
        let col = op(&f.column(ix));
        for (iy, v) in col.into_iter().enumerate() {
            out.set(ix, iy, v);
        }
    }
    out
}

pub fn d_x<T: Real, S: FieldValue<T>>(f: &Field<T, S>) -> Field<T, S> {
    d_x_stride(f, 1)
}

pub fn d_y<T: Real, S: FieldValue<T>>(f: &Field<T, S>) -> Field<T, S> {
    d_y_stride(f, 1)
}

pub fn d_x_stride<T: Real, S: FieldValue<T>>(f: &Field<T, S>, stride: usize) -> Field<T, S> {
    let h = f.grid().gx.spacing();
    along_x(f, |r| derivative_1d(r, h, stride))
}

pub fn d_y_stride<T: Real, S: FieldValue<T>>(f: &Field<T, S>, stride: usize) -> Field<T, S> {
    let h = f.grid().gy.spacing();
    along_y(f, |c| derivative_1d(c, h, stride))
}

pub fn d_xx<T: Real, S: FieldValue<T>>(f: &Field<T, S>) -> Field<T, S> {
    let h = f.grid().gx.spacing();
    along_x(f, |r| second_derivative_1d(r, h))
}

pub fn d_yy<T: Real, S: FieldValue<T>>(f: &Field<T, S>) -> Field<T, S> {
    let h = f.grid().gy.spacing();
    along_y(f, |c| second_derivative_1d(c, h))
}

/// 5-point Laplacian. Boundary rows carry one-sided values and are meant to be
/// excluded from residual norms.
pub fn laplacian<T: Real, S: FieldValue<T>>(f: &Field<T, S>) -> Field<T, S> {
    &d_xx(f) + &d_yy(f)
}

/// `d/dz = (d/dx - i d/dy) / 2`.
pub fn d_z<T: Real>(f: &ComplexField<T>) -> ComplexField<T> {
    d_z_stride(f, 1)
}

/// `d/dzbar = (d/dx + i d/dy) / 2`.
pub fn d_zbar<T: Real>(f: &ComplexField<T>) -> ComplexField<T> {
    d_zbar_stride(f, 1)
}

pub fn d_z_stride<T: Real>(f: &ComplexField<T>, stride: usize) -> ComplexField<T> {
    wirtinger(f, stride, -T::one())
}

pub fn d_zbar_stride<T: Real>(f: &ComplexField<T>, stride: usize) -> ComplexField<T> {
    wirtinger(f, stride, T::one())
}

fn wirtinger<T: Real>(f: &ComplexField<T>, stride: usize, sign: T) -> ComplexField<T> {
    let half = T::lit(0.5);
    let fx = d_x_stride(f, stride);
    let fy = d_y_stride(f, stride);
    fx.zip_map(&fy, |a, b| (a + Complex::new(T::zero(), sign) * b) * half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::grid::Grid2D;

    fn grid(n: usize) -> Grid2D<f64> {
        Grid2D::square(1.0, n).unwrap()
    }

    #[test]
    fn central_difference_is_exact_for_quadratics() {
        let g = grid(21);
        let f = ScalarField::from_fn(g, |x, _| x * x);
        let d = d_x(&f);
        for iy in 0..g.ny() {
            for ix in 0..g.nx() {
                assert!((d.at(ix, iy) - 2.0 * g.gx.node(ix)).abs() < 1e-12);
            }
        }
        let c = ScalarField::from_fn(g, |_, _| 3.5);
        assert_eq!(d_y(&c).max_abs(), 0.0);
    }

    #[test]
    fn sine_derivative_error_bound() {
        // h = 0.01 on [-1, 1]
        let g = grid(201);
        let f = ScalarField::from_fn(g, |x, _| x.sin());
        let d = d_x(&f);
        let err = ScalarField::from_fn(g, |x, _| x.cos());
        assert!((&d - &err).max_abs() <= 2e-5);
    }

    #[test]
    fn wirtinger_of_z_and_zbar() {
        let g = grid(11);
        let z = ComplexField::from_fn(g, |x, y| Complex::new(x, y));
        let zb = z.conj();
        let one = Complex::new(1.0, 0.0);
        for (&a, &b) in d_z(&z).values().iter().zip(d_zbar(&z).values()) {
            assert!((a - one).norm() < 1e-12);
            assert!(b.norm() < 1e-12);
        }
        for &b in d_zbar(&zb).values() {
            assert!((b - one).norm() < 1e-12);
        }
        let x2 = ScalarField::from_fn(g, |x, _| x * x).to_complex();
        let d = d_zbar(&x2);
        for ix in 0..g.nx() {
            assert!((d.at(ix, 4) - Complex::new(g.gx.node(ix), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_exact_cases() {
        let g = grid(15);
        let f = ScalarField::from_fn(g, |x, y| x * x + y * y);
        let h = ScalarField::from_fn(g, |x, y| x * x - y * y);
        let lf = laplacian(&f);
        let lh = laplacian(&h);
        assert!((lf.map(|v| v - 4.0)).interior_max_abs(1) < 1e-10);
        assert!(lh.interior_max_abs(1) < 1e-10);
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let err = |n: usize| {
            let g = grid(n);
            let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin());
            let exact = f.scale(-2.0);
            (&laplacian(&f) - &exact).interior_max_abs(1)
        };
        let (e1, e2) = (err(41), err(81));
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn one_sided_boundary_is_second_order() {
        let err = |n: usize| {
            let f: Vec<f64> = (0..n)
                .map(|k| (-1.0 + 2.0 * k as f64 / (n - 1) as f64).exp())
                .collect();
            let d = derivative_1d(&f, 2.0 / (n - 1) as f64, 1);
            (d[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(41) / err(81);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid2D::square(1.0f32, 41).unwrap();
        let f = ScalarField::from_fn(g, |x, y| x * x + y * y);
        let l = laplacian(&f);
        assert!((l.map(|v| v - 4.0)).interior_max_abs(1) < 1e-2);
    }
}
