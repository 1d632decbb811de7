//! Log-space weight arithmetic and splittable randomness.

mod logweight;
mod rng;

pub use logweight::{categorical_from_logweights, log_sum_exp, LogWeight};
pub use rng::RngStream;
