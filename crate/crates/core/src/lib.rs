//! Bayesian MAP estimation of the number of sources for uniform linear
//! arrays, built on exact double-gamma dominance probabilities.
//!
//! The pipeline is: simulate or load `Y` ([`array`]), form subspace
//! candidates ([`subspace`]), score each order `K` ([`order`]) and evaluate
//! the result ([`metrics`]). [`specfun`] and [`dgamma`] carry the special
//! functions underneath the scores.

pub mod array;
pub mod dgamma;
pub mod error;
pub mod metrics;
pub mod order;
pub mod quadrature;
pub mod specfun;
pub mod subspace;
pub mod validate;

pub use array::{ArrayScenario, AmplitudeMatrix, CMatrix, CVector, FreqData, TimeData, C64};
pub use error::{Error, Result};
pub use order::{Method, OrderPosterior, ScanPrior};
pub use subspace::{EigenBasis, Peak, ProjectionStats, SpectrumCurve};
