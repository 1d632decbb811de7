//! A depth-one problem with closed-form inner and outer expectations.
//!
//! `y0 ~ U(-1, 1)`, `y1 ~ N(0, 1)`, `f1 = N(y1; y0, var 1/4)` and
//! `f0 = log(gamma1)`. The inner expectation is a Gaussian convolution, so
//! `gamma1(y0) = N(y0; 0, var 5/4)` and the outer expectation is closed form.

use std::f64::consts::PI;

use crate::estimators::NestedProblem;
use crate::numerics::RngStream;
use crate::ppl::Dist;

/// The inner expectation `gamma1(y0)`.
pub fn gamma1(y0: f64) -> f64 {
    (2.0 * PI * 1.25).powf(-0.5) * (-2.0 * y0 * y0 / 5.0).exp()
}

/// The nested expectation `E[log gamma1(y0)]`, `1/2 log(2/(5 pi)) - 2/15`.
pub fn gamma0() -> f64 {
    0.5 * (2.0 / (5.0 * PI)).ln() - 2.0 / 15.0
}

fn f1(y0: f64, y1: f64) -> f64 {
    let d = y0 - y1;
    (2.0 / PI).sqrt() * (-2.0 * d * d).exp()
}

fn draw(level: usize, rng: &mut RngStream) -> f64 {
    let dist = if level == 0 { Dist::Uniform { lo: -1.0, hi: 1.0 } } else { Dist::Normal { mean: 0.0, stddev: 1.0 } };
    dist.sample_unchecked(rng)
}

/// The nested problem itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyticModel;

impl NestedProblem for AnalyticModel {
    type Value = f64;

    fn depth(&self) -> usize {
        1
    }

    fn sample(&self, level: usize, _: &[f64], rng: &mut RngStream) -> f64 {
        draw(level, rng)
    }

    fn evaluate(&self, level: usize, path: &[f64], inner: Option<f64>) -> f64 {
        match level {
            0 => inner.expect("outer level needs the inner estimate").ln(),
            _ => f1(path[0], path[1]),
        }
    }
}

/// The same target with the inner expectation plugged in exactly, so plain
/// Monte Carlo applies.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyticExact;

impl NestedProblem for AnalyticExact {
    type Value = f64;

    fn depth(&self) -> usize {
        0
    }

    fn sample(&self, _: usize, _: &[f64], rng: &mut RngStream) -> f64 {
        draw(0, rng)
    }

    fn evaluate(&self, _: usize, path: &[f64], _: Option<f64>) -> f64 {
        gamma1(path[0]).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{mc_estimate, nmc_estimate};
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_forms() {
        assert_abs_diff_eq!(gamma1(0.0), 0.356_82, epsilon = 1e-5);
        assert_abs_diff_eq!(gamma1(0.0), 1.0 / (2.5 * PI).sqrt(), epsilon = 1e-15);
        for y in [0.1, 0.7, 3.0] {
            assert_eq!(gamma1(y), gamma1(-y));
        }
        assert_abs_diff_eq!(gamma0(), -1.163_84, epsilon = 1e-5);
    }

    #[test]
    fn gamma1_is_a_density() {
        let total = quadrature::integrate(gamma1, -30.0, 30.0, 1e-12).integral;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn gamma1_is_the_convolution_by_quadrature() {
        for y0 in [-0.9, 0.0, 0.5] {
            let phi = |y1: f64| (-0.5 * y1 * y1).exp() / (2.0 * PI).sqrt();
            let q = quadrature::integrate(|y1| f1(y0, y1) * phi(y1), -12.0, 12.0, 1e-13).integral;
            assert_abs_diff_eq!(q, gamma1(y0), epsilon = 1e-10);
        }
    }

    #[test]
    fn gamma1_by_brute_force_mc() {
        let n = 10_000_000u64;
        let mut rng = RngStream::new(77);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = f1(0.5, draw(1, &mut rng));
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - gamma1(0.5)).abs() < 4.0 * se, "{mean} {se}");
    }

    #[test]
    fn gamma0_by_brute_force_mc() {
        let n = 10_000_000u64;
        let est = mc_estimate(&AnalyticExact, n, RngStream::new(5)).unwrap();
        // log gamma1 = c - 2 y^2 / 5 with y uniform: sd = (2/5) sd(y^2) = (2/5) sqrt(4/45)
        let se = 0.4 * (4.0f64 / 45.0).sqrt() / (n as f64).sqrt();
        assert!((est - gamma0()).abs() < 4.0 * se, "{est}");
    }

    #[test]
    fn nested_estimate_is_finite_and_close() {
        let est = nmc_estimate(&AnalyticModel, 10_000, &[100], RngStream::new(1)).unwrap();
        assert!((est - gamma0()).abs() < 0.05, "{est}");
    }
}
