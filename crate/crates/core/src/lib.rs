//! ℓ'-diverted zero-differential privacy: decoy-group randomization of
//! sensitive attributes, the baselines it is compared against, count
//! reconstruction, analytic guarantees and a benchmark harness.

pub mod bench;
pub mod data;
pub mod estimator;
mod error;
pub mod exec;
pub mod guarantees;
pub mod mechanism;
pub mod partition;
pub mod seed;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_rational::Ratio;
