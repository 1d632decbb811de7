//! A minimal nestable query abstraction with `sample` / `observe` semantics.
//!
//! Inference inside this module is importance sampling with the prior as the
//! proposal. Nesting one query inside another is not a type of its own: it is
//! spelled out by calling an estimator from `crate::estimators` with an
//! explicit budget policy.

mod dist;
mod measure;
mod query;

pub use dist::Dist;
pub use measure::EmpiricalMeasure;
pub use query::{log_marginal, run_weighted, Query, Trace, WeightedSample};

pub(crate) use query::log_marginal_of;
