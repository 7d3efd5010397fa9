//! Bayesian Dirichlet scores, posterior entropy estimators and
//! score-based structure learning for discrete Bayesian networks.

pub mod analysis;
pub mod cli;
pub mod dataset;
pub mod entropy;
pub mod error;
pub mod graph;
pub mod learn;
pub mod scores;
pub mod specfun;

pub use dataset::{Dataset, LocalCounts};
pub use error::{Error, Result};
pub use graph::Dag;
pub use scores::{AlphaSpec, AlphaTable, PriorKind, Score};
