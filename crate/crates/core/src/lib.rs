//! Skewness tests and moment estimation for studies that report a median-based
//! five-number summary instead of a mean and SD.
//!
//! The typical flow is: build a [`SummaryRecord`], run [`run_test`] to decide
//! whether the data look normal enough, then convert it with
//! [`estimate_moments`] and pool the study arms with [`meta`].

pub mod critical;
pub mod error;
pub mod meta;
pub mod moments;
pub mod montecarlo;
pub mod normal;
pub mod quadrature;
pub mod sampling;
pub mod sim;
pub mod skew;
pub mod summary;

pub use critical::{critical_value, CriticalValueSource};
pub use error::{Error, Result};
pub use moments::{estimate_mean, estimate_moments, estimate_sd, MomentEstimate};
pub use normal::Probability;
pub use sampling::{DistributionSpec, Seed};
pub use skew::{run_test, t1_statistic, t2_statistic, t3_statistic, SkewTestResult};
pub use summary::{FiveNumbers, Scenario, SummaryRecord};
