//! Joint and marginal risk prediction for two correlated binary outcomes.
//!
//! Six model families share one prediction type, [`JointRisk`]:
//!
//! | tag          | model                                           |
//! |--------------|-------------------------------------------------|
//! | `univariate` | two independent logistic regressions            |
//! | `sr`         | stacked regression with a lasso second stage    |
//! | `pcc`        | probabilistic classifier chains, both orderings |
//! | `mlr`        | multinomial logistic regression on 4 categories |
//! | `mlm`        | Gumbel bivariate logistic regression            |
//! | `mpm`        | Bayesian bivariate probit fitted by Gibbs       |
//!
//! [`datagen`] simulates correlated outcomes through a Gaussian copula and
//! exposes the exact generating risks; [`metrics`] scores predictions.

pub mod data;
pub mod datagen;
pub mod error;
pub mod glm;
pub mod metrics;
pub mod models;
pub mod num;
pub mod risk;

pub use data::Dataset;
pub use datagen::{GenConfig, Scenario, SyntheticDataset, SyntheticTruth};
pub use error::{Error, Result};
pub use metrics::{MetricsReport, Target};
pub use models::{FittedModel, FitOptions, Method};
pub use num::RngStream;
pub use risk::JointRisk;
