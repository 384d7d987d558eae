//! Formal powers of the main Vekua equation for separable superpotentials,
//! the 2-D SUSY QM operator algebra on uniform grids, and numerical checks of
//! the identities that tie them together.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

pub mod cli;
pub mod config;
pub mod conjugate;
pub mod corpus;
pub mod diff;
pub mod error;
pub mod expansion;
pub mod field;
pub mod formal_powers;
pub mod goursat;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod scalar;
pub mod superpotential;
pub mod susy;
pub mod transmutation;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{FieldValue, Real};

pub type Grid = grid::Grid2D<f64>;
pub type Axis = grid::Grid1D<f64>;
pub type RealField = field::ScalarField<f64>;
pub type CField = field::ComplexField<f64>;
pub type VField = field::VectorField2<f64>;
pub type Chi = superpotential::Superpotential<f64>;
pub type Complex64 = num_complex::Complex<f64>;
