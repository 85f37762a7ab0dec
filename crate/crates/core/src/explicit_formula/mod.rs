//! Both sides of the explicit formula for a curve over `F_q`, and the local
//! orbit weights behind its geometric side.
//!
//! The spectral side is
//! `h0 - h1 + h2 = sum_nu Phi(2 pi i nu / L) - sum_j sum_nu Phi(rho_j + 2 pi i nu / L)
//! + sum_nu Phi(1 + 2 pi i nu / L)` with `L = log q`; the geometric side is
//! `(2 - 2g) alpha(0) L` plus a finite sum over closed orbits. For genus one
//! the first term vanishes.
//!
//! The Euler characteristic term is taken as `(2 - 2g) log q`. That reading
//! of the foliated Euler characteristic is a convention of this crate, used
//! as a dictionary and not derived.

mod geometric;
mod quadrature;
mod spectral;
mod test_function;
mod verify;
mod weights;

pub use geometric::{geometric_side, FormulaData, GeometricSide, OrbitTerm};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use spectral::{
    nu_max_for, pairwise_sum, phi_transform, poisson_sum, spectral_sum, FormulaConfig, SpectralEngine,
    SpectralSum,
};
pub use test_function::{TestFunction, TestFunctionKind};
pub use verify::{
    convergence_csv, engine_for, report, spectral_side, spectral_side_from_engine,
    verify_formula, verify_trace_formula, verify_with_engine, SpectralSide, TermValue,
    TraceReport,
};
pub use weights::{
    alternating_trace, complex_multiplier_matrix, guillemin_sternberg_weight, Direction,
    OrbitWeight,
};
