//! Exact dyadic Haar analysis, Riesz-product test functions and duality
//! certificates for hyperbolic Haar sums and the discrepancy function.

pub mod discrepancy;
pub mod dyadic;
pub mod error;
pub mod field;
pub mod graphs;
pub mod scalar;
pub mod smallball;

pub use error::{HyperHaarError, Result};
pub use scalar::{Mode, Scalar};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Grid function with exact rational values.
pub type ExactGrid = field::GridFunction<Rational>;
/// Grid function with `f64` values.
pub type FloatGrid = field::GridFunction<f64>;
