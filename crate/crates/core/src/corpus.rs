//! Smooth complex test fields: low-degree polynomials times a Gaussian.

use num_complex::Complex;

use crate::field::ComplexField;
use crate::grid::Grid2D;
use crate::scalar::Real;

pub type Member<T> = (&'static str, ComplexField<T>);

pub fn corpus<T: Real>(grid: Grid2D<T>) -> Vec<Member<T>> {
    let half = T::lit(0.5);
    let gauss = |x: T, y: T| (-(x * x + y * y)).exp();
    vec![
        (
            "gauss-a",
            ComplexField::from_fn(grid, |x, y| {
                let e = gauss(x, y);
                Complex::new((T::one() + x * y) * e, (x - half * y * y) * e)
            }),
        ),
        (
            "gauss-b",
            ComplexField::from_fn(grid, |x, y| {
                let e = gauss(x, y);
                Complex::new((x * x - y + half) * e, (x * y * y + y) * e)
            }),
        ),
        (
            "gauss-c",
            ComplexField::from_fn(grid, |x, y| {
                let e = gauss(x, y);
                Complex::new(x * x * x * e, (T::one() - x * x * y - y * y) * e)
            }),
        ),
    ]
}

/// `max(1, |f|_inf)`.
pub fn scale<T: Real>(f: &ComplexField<T>) -> T {
    T::one().max(f.max_abs())
}
