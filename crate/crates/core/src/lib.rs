//! Online correlated selection and the analysis machinery around it.

pub mod bounds;
pub mod error;
pub mod frlp;
pub mod matching;
pub mod ocs;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational arithmetic.
pub type Exact = num_rational::BigRational;

pub type Params = bounds::BoundParams<f64>;
pub type ExactParams = bounds::BoundParams<Exact>;
pub type Model = frlp::LpModel<f64>;
pub type ExactModel = frlp::LpModel<Exact>;
pub type Solution = frlp::LpSolution<f64>;
pub type ExactSolution = frlp::LpSolution<Exact>;
pub type Distribution = bounds::SymmetricDistribution<f64>;
pub type ExactDistribution = bounds::SymmetricDistribution<Exact>;
