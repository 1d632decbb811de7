//! The beta-gamma nested query and its finite-support variant.
//!
//! Outer: `y ~ Beta(2, 3)`, then `z` is drawn from the inner posterior and
//! `y z` is returned. Inner: `z ~ Gamma(shape y, rate 1)`, observe
//! `Normal(mean y, stddev z)` at `D`.

use statrs::function::gamma::ln_gamma;

use crate::error::Result;
use crate::estimators::NestingQuery;
use crate::numerics::LogWeight;
use crate::ppl::{Dist, Query, Trace};

pub const DEFAULT_DATA: f64 = 2.0;

/// Support and probabilities of the discrete variant (proportional to the
/// Beta(2, 3) density at each point).
pub const DISCRETE_SUPPORT: [(f64, f64); 3] = [(0.25, 0.45), (0.5, 0.40), (0.75, 0.15)];

/// Inner importance weight: the observe term only, since the gamma prior is
/// the proposal.
pub fn bg_inner_logweight(y: f64, z: f64, d: f64) -> LogWeight {
    if !(z > 0.0) {
        return LogWeight::ZERO;
    }
    let r = (d - y) / z;
    LogWeight::raw(-0.5 * r * r - z.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln())
}

/// The inner query, parameterized by the observation; input is `y`.
#[derive(Clone, Copy, Debug)]
pub struct BgInner {
    pub data: f64,
}

impl Query for BgInner {
    type Input = f64;
    type Output = f64;

    fn run(&self, y: &f64, trace: &mut Trace) -> Result<f64> {
        let z = trace.sample(&Dist::gamma(*y, 1.0)?)?;
        trace.factor(bg_inner_logweight(*y, z, self.data));
        Ok(z)
    }
}

/// The outer query with continuous `y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BgOuter;

impl NestingQuery for BgOuter {
    type State = f64;
    type InnerInput = f64;
    type Draw = f64;
    type Output = f64;

    fn prefix(&self, trace: &mut Trace) -> Result<f64> {
        trace.sample(&Dist::beta(2.0, 3.0)?)
    }

    fn inner_input(&self, y: &f64) -> f64 {
        *y
    }

    fn complete(&self, y: &f64, z: &f64, _: &mut Trace) -> Result<f64> {
        Ok(y * z)
    }
}

/// The outer query with `y` drawn from [`DISCRETE_SUPPORT`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BgDiscreteOuter;

impl NestingQuery for BgDiscreteOuter {
    type State = f64;
    type InnerInput = f64;
    type Draw = f64;
    type Output = f64;

    fn prefix(&self, trace: &mut Trace) -> Result<f64> {
        let u = trace.sample(&Dist::uniform(0.0, 1.0)?)?;
        let mut acc = 0.0;
        for (y, p) in DISCRETE_SUPPORT {
            acc += p;
            if u < acc {
                return Ok(y);
            }
        }
        Ok(DISCRETE_SUPPORT[DISCRETE_SUPPORT.len() - 1].0)
    }

    fn inner_input(&self, y: &f64) -> f64 {
        *y
    }

    fn complete(&self, y: &f64, z: &f64, _: &mut Trace) -> Result<f64> {
        Ok(y * z)
    }
}

/// `E[z | y, D]` under the inner posterior, by quadrature over `u = ln z`.
pub fn bg_inner_posterior_mean(y: f64, d: f64) -> f64 {
    // prior density of z times the weight, times the Jacobian z
    let log_kernel = |u: f64| {
        let z = u.exp();
        (y - 1.0) * u - z - ln_gamma(y) + bg_inner_logweight(y, z, d).value() + u
    };
    let (lo, hi) = (-40.0, 6.0);
    let peak = (0..=4600).map(|i| log_kernel(lo + i as f64 * 0.01)).fold(f64::NEG_INFINITY, f64::max);
    let kernel = |u: f64| (log_kernel(u) - peak).exp();
    let den = quadrature::integrate(kernel, lo, hi, 1e-13).integral;
    let num = quadrature::integrate(|u| u.exp() * kernel(u), lo, hi, 1e-13).integral;
    num / den
}

/// The posterior expectation of the returned `y z` with continuous `y`.
pub fn bg_truth(d: f64) -> f64 {
    let beta = |y: f64| 12.0 * y * (1.0 - y) * (1.0 - y);
    quadrature::integrate(|y| beta(y) * y * bg_inner_posterior_mean(y, d), 0.0, 1.0, 1e-10).integral
}

/// The posterior expectation of `y z` for the discrete variant.
pub fn bg_discrete_truth(d: f64) -> f64 {
    DISCRETE_SUPPORT.iter().map(|&(y, p)| p * y * bg_inner_posterior_mean(y, d)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{finite_support_estimate, nested_is_measure, BudgetPolicy};
    use crate::numerics::RngStream;
    use crate::ppl::run_weighted;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn inner_weight_examples() {
        assert_abs_diff_eq!(bg_inner_logweight(2.0, 1.0, 2.0).value(), -0.5 * (2.0 * PI).ln(), epsilon = 1e-15);
        assert!(bg_inner_logweight(0.5, 0.0, 2.0).is_zero());
        assert!(bg_inner_logweight(0.5, -1.0, 2.0).is_zero());
        let mut last = f64::INFINITY;
        for z in [1e-1, 1e-2, 1e-3, 1e-4] {
            let w = bg_inner_logweight(0.5, z, 2.0).value();
            assert!(w < last);
            last = w;
        }
        assert!(last < -1e6);
        // ratio of normal densities at the observation
        let n = |sd: f64| (-(1.5f64).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * PI).sqrt());
        let ratio = (bg_inner_logweight(0.5, 0.7, 2.0) - bg_inner_logweight(0.5, 1.9, 2.0)).linear();
        assert_abs_diff_eq!(ratio, n(0.7) / n(1.9), epsilon = 1e-12);
        let via_dist = Dist::normal(0.5, 0.7).unwrap().logpdf(2.0).unwrap();
        assert_abs_diff_eq!(bg_inner_logweight(0.5, 0.7, 2.0).value(), via_dist.value(), epsilon = 1e-12);
    }

    #[test]
    fn inner_run_weight_is_observe_term_and_joint_adds_prior() {
        let inner = BgInner { data: 2.0 };
        let s = run_weighted(&inner, &0.6, RngStream::new(3)).unwrap();
        assert_eq!(s.logw, bg_inner_logweight(0.6, s.value, 2.0));
        let mut t = Trace::replaying(RngStream::new(0), vec![s.value]);
        inner.run(&0.6, &mut t).unwrap();
        let prior = Dist::gamma(0.6, 1.0).unwrap().logpdf(s.value).unwrap();
        assert_abs_diff_eq!(t.log_joint().unwrap().value(), (prior + s.logw).value(), epsilon = 1e-12);
    }

    #[test]
    fn posterior_mean_quadrature_matches_snis() {
        let y = 0.5;
        let inner = BgInner { data: 2.0 };
        let root = RngStream::new(21);
        let n = 2_000_000;
        let (mut den, mut num, mut w2, mut w2z, mut w2z2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..n {
            let s = run_weighted(&inner, &y, root.substream(j)).unwrap();
            let (w, z) = (s.logw.linear(), s.value);
            den += w;
            num += w * z;
            w2 += w * w;
            w2z += w * w * z;
            w2z2 += w * w * z * z;
        }
        let est = num / den;
        let se = ((w2z2 - 2.0 * est * w2z + est * est * w2) / (den * den)).sqrt();
        let truth = bg_inner_posterior_mean(y, 2.0);
        assert!((est - truth).abs() < 4.0 * se, "{est} {truth} {se}");
    }

    #[test]
    fn discrete_prefix_frequencies() {
        let n = 300_000;
        let mut counts = [0u32; 3];
        for i in 0..n {
            let mut t = Trace::new(RngStream::new(i));
            let y = BgDiscreteOuter.prefix(&mut t).unwrap();
            counts[DISCRETE_SUPPORT.iter().position(|s| s.0 == y).unwrap()] += 1;
        }
        for (c, (_, p)) in counts.iter().zip(DISCRETE_SUPPORT) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.005);
        }
        let mass: f64 = DISCRETE_SUPPORT.iter().map(|s| s.1).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn estimators_approach_quadrature_truths() {
        let inner = BgInner { data: 2.0 };
        let est = finite_support_estimate(&DISCRETE_SUPPORT, &inner, |_, z| *z, |y, m| y * m, 600_000, RngStream::new(2))
            .unwrap();
        assert!((est - bg_discrete_truth(2.0)).abs() < 0.01, "{est} vs {}", bg_discrete_truth(2.0));
        let m = nested_is_measure(&BgOuter, &inner, 20_000, &BudgetPolicy::fixed_single(100), RngStream::new(4)).unwrap();
        let est = m.expectation(|v| *v);
        assert!((est - bg_truth(2.0)).abs() < 0.03, "{est} vs {}", bg_truth(2.0));
    }
}
