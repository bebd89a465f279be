//! Numerical building blocks shared by the models and metrics.

pub mod lasso;
pub mod optim;
pub mod rng;
pub mod special;
pub mod truncnorm;

pub use rng::RngStream;
