//! A Gaussian model whose nested-conditioning posterior is known exactly.
//!
//! Outer `y ~ N(0, 1)` conditions on the evidence of the inner query
//! `theta ~ N(y, 1)`, observe `N(theta, 1)` at `D`. The evidence is
//! `N(D; y, sqrt 2)`, so `y | D ~ N(D / 3, sqrt(2 / 3))`.

use crate::error::Result;
use crate::estimators::NestingQuery;
use crate::ppl::{Dist, Query, Trace};

pub fn conjugate_posterior_mean(d: f64) -> f64 {
    d / 3.0
}

pub fn conjugate_posterior_var() -> f64 {
    2.0 / 3.0
}

/// Closed-form inner evidence `N(D; y, sqrt 2)`.
pub fn conjugate_evidence(y: f64, d: f64) -> f64 {
    (-(d - y) * (d - y) / 4.0).exp() / (4.0 * std::f64::consts::PI).sqrt()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ConjugateOuter;

impl NestingQuery for ConjugateOuter {
    type State = f64;
    type InnerInput = f64;
    type Draw = ();
    type Output = f64;

    fn prefix(&self, trace: &mut Trace) -> Result<f64> {
        trace.sample(&Dist::normal(0.0, 1.0)?)
    }

    fn inner_input(&self, y: &f64) -> f64 {
        *y
    }

    fn complete(&self, y: &f64, _: &(), _: &mut Trace) -> Result<f64> {
        Ok(*y)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConjugateEvidence {
    pub data: f64,
}

impl Query for ConjugateEvidence {
    type Input = f64;
    type Output = f64;

    fn run(&self, y: &f64, trace: &mut Trace) -> Result<f64> {
        let theta = trace.sample(&Dist::normal(*y, 1.0)?)?;
        trace.observe(&Dist::normal(theta, 1.0)?, self.data)?;
        Ok(theta)
    }
}
