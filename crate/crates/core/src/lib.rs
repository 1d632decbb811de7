//! Nested Monte Carlo estimation: plain and online nested Monte Carlo,
//! nested importance sampling for probabilistic queries, benchmark models
//! and a convergence harness.

pub mod error;
pub mod estimators;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod ppl;
pub mod schedules;

pub use error::{Error, Result};
pub use numerics::{LogWeight, RngStream};
