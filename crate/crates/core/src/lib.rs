//! Numerical and exact verification of the explicit formula for zeta
//! functions of elliptic curves over finite fields, read as a Lefschetz
//! trace formula, together with the finite models behind it: the Tate
//! module of the period lattice and characters and Laplacian on `Z_p^m`.
//!
//! Floating point routines are generic over [`Real`] (`f32`, `f64`); the
//! `*64` aliases below fix `f64`. Counts, indices, Jacobians and Haar ratios
//! are exact integers or rationals.

pub mod census;
pub mod error;
pub mod explicit_formula;
pub mod field_curve;
pub mod padic_transversal;
pub mod scalar;
pub mod tate_lattice;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type TestFunction64 = explicit_formula::TestFunction<f64>;
pub type FormulaData64 = explicit_formula::FormulaData<f64>;
pub type FormulaConfig64 = explicit_formula::FormulaConfig<f64>;
pub type SpectralEngine64 = explicit_formula::SpectralEngine<f64>;
pub type SpectralSide64 = explicit_formula::SpectralSide<f64>;
pub type GeometricSide64 = explicit_formula::GeometricSide<f64>;
pub type OrbitClass64 = census::OrbitClass<f64>;
pub type TransversalFunction64 = padic_transversal::TransversalFunction<f64>;
pub type CharacterExpansion64 = padic_transversal::CharacterExpansion<f64>;
pub type LatticeData64 = tate_lattice::LatticeData<f64>;
