//! Exact ensemble-average analysis of non-adaptive group testing with sparse
//! pooling graphs.
//!
//! The crate evaluates generating-function enumerators for the COMP and DD
//! detectors on regular and irregular pooling-graph ensembles, turns them
//! into false-alarm and misdetection probabilities, and checks them against
//! an exhaustive socket-matching oracle and a seeded Monte Carlo simulator.
//!
//! Polynomials are generic over their coefficient ring and probability sums
//! over their scalar field; the aliases below fix the exact choices used by
//! the enumerators.

pub mod combinatorics;
pub mod detection;
pub mod ensemble;
pub mod enumerator;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod polynomial;
pub mod scalar;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use detection::{Algorithm, DdRule};
pub use ensemble::{DegreeDistribution, EnsembleSpec, PoolingGraph};
pub use enumerator::{EnumeratorTable, Method};
pub use error::{Error, Result, ValidationError};
pub use polynomial::SparsePoly;
pub use scalar::{Coefficient, Scalar};

/// Polynomial with arbitrary-precision integer coefficients.
pub type IntPoly = SparsePoly<BigInt>;
/// Exact rational scalar.
pub type Rational = BigRational;
