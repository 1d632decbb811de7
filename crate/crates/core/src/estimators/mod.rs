//! Monte Carlo estimators for nested problems and nested queries.
//!
//! All randomness is addressed by substream paths. Outer sample `n` (0-based)
//! uses `root.substream(n)`; below that, substream 0 drives the node's own
//! draw and substream 1 is the parent of its inner samples. Nested query
//! estimators additionally use substream 2 for the outer completion of inner
//! draw `m` (at `.substream(2).substream(m)`) and substream 3 for the choice
//! of the returned inner sample. A fixed budget and a constant schedule
//! therefore consume identical random numbers.

mod conditioning;
mod nested_inference;
mod nmc;
mod special;

pub use conditioning::nested_conditioning_estimate;
pub use nested_inference::{
    draw_nested_sample, expected_single_measure, nested_is, nested_is_draws, nested_is_measure, nested_is_single,
    rb_measure, single_measure, NestingQuery, OuterSample,
};
pub use nmc::{mc_estimate, nested_estimate, nmc_estimate, onmc_estimate, onmc_outer_for_budget, NestedProblem, OnlineNmc};
pub use special::{finite_support_estimate, rejection_exact_sample, rejection_exact_sample_counted, DEFAULT_MAX_ATTEMPTS};

use std::fmt;

use crate::error::{Error, Result};
use crate::schedules::Schedule;

/// How inner budgets are chosen at each nesting level `k = 1..D`.
#[derive(Clone, Debug, PartialEq)]
pub enum BudgetPolicy {
    /// The same `N_k` for every outer sample.
    Fixed(Vec<u64>),
    /// `N_k = tau_k(n0)` for the `n0`-th outer sample.
    Schedule(Vec<Schedule>),
}

impl BudgetPolicy {
    pub fn fixed_single(n1: u64) -> Self {
        BudgetPolicy::Fixed(vec![n1])
    }

    pub fn schedule_single(s: Schedule) -> Self {
        BudgetPolicy::Schedule(vec![s])
    }

    pub fn depth(&self) -> usize {
        match self {
            BudgetPolicy::Fixed(v) => v.len(),
            BudgetPolicy::Schedule(v) => v.len(),
        }
    }

    pub fn validate(&self, depth: usize) -> Result<()> {
        if self.depth() != depth {
            return Err(Error::param(format!("budget policy covers {} levels, problem has {depth}", self.depth())));
        }
        match self {
            BudgetPolicy::Fixed(v) if v.contains(&0) => Err(Error::param("inner budgets must be >= 1")),
            BudgetPolicy::Schedule(v) => v.iter().try_for_each(Schedule::validate),
            _ => Ok(()),
        }
    }

    /// Inner budgets `N_1..N_D` for the 1-based outer iteration `n0`.
    pub fn budgets_at(&self, n0: u64) -> Vec<u64> {
        match self {
            BudgetPolicy::Fixed(v) => v.clone(),
            BudgetPolicy::Schedule(v) => v.iter().map(|s| s.tau(n0)).collect(),
        }
    }

    /// Budget of the first nesting level at outer iteration `n0`.
    pub fn first_level_at(&self, n0: u64) -> u64 {
        match self {
            BudgetPolicy::Fixed(v) => v[0],
            BudgetPolicy::Schedule(v) => v[0].tau(n0),
        }
    }
}

impl fmt::Display for BudgetPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            BudgetPolicy::Fixed(v) => v.iter().map(|n| format!("fixed:{n}")).collect(),
            BudgetPolicy::Schedule(v) => v.iter().map(Schedule::to_string).collect(),
        };
        f.write_str(&parts.join("|"))
    }
}

/// Which nested importance sampling estimator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorVariant {
    /// Every inner sample kept, weighted by its normalized inner weight.
    RaoBlackwellized,
    /// One inner sample per outer sample, drawn in proportion to the inner weights.
    SingleSample,
    /// One inner draw from the prior: the inner observes are ignored.
    NaiveN1Equals1,
    /// Single-sample selection with the inner budget stuck at two.
    BrokenConditionalN1Equals2,
}

impl EstimatorVariant {
    /// Overrides the policy's first-level budget for the deliberately broken variants.
    pub(crate) fn forced_budget(self) -> Option<u64> {
        match self {
            EstimatorVariant::NaiveN1Equals1 => Some(1),
            EstimatorVariant::BrokenConditionalN1Equals2 => Some(2),
            _ => None,
        }
    }
}
