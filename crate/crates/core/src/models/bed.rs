//! Expected information gain of a linear-Gaussian experiment.
//!
//! `theta ~ N(0, 1)`, `y ~ N(theta, d)`. The estimator averages
//! `log p(y | theta) - log p_hat(y)` where `p_hat` is the averaged likelihood
//! over `M` fresh prior draws; the log of that estimate makes the inner
//! budget matter even though each `p_hat` is unbiased.

use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::ppl::{log_marginal_of, run_weighted, Dist, Query, Trace};

/// Mutual information between `theta` and `y`, `1/2 log(1 + 1/d^2)`.
pub fn bed_mi_analytic(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::param(format!("design must be finite and > 0, got {d}")));
    }
    Ok(0.5 * (1.0 / (d * d)).ln_1p())
}

/// Likelihood of the observation under a fresh prior draw; input `(y, d)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BedLikelihood;

impl Query for BedLikelihood {
    type Input = (f64, f64);
    type Output = f64;

    fn run(&self, &(y, d): &(f64, f64), trace: &mut Trace) -> Result<f64> {
        let theta = trace.sample(&Dist::normal(0.0, 1.0)?)?;
        trace.observe(&Dist::normal(theta, d)?, y)?;
        Ok(theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BedEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `N` outer draws, `M` inner draws each. Outer draw `n` uses `rng.substream(n)`.
pub fn bed_estimate(d: f64, n: u64, m: u64, rng: RngStream) -> Result<BedEstimate> {
    bed_mi_analytic(d)?;
    if n < 2 || m == 0 {
        return Err(Error::param("need N >= 2 and M >= 1"));
    }
    let prior = Dist::normal(0.0, 1.0)?;
    let mut logws = Vec::with_capacity(m as usize);
    let (mut s, mut s2) = (0.0, 0.0);
    for i in 0..n {
        let node = rng.substream(i);
        let mut own = node.substream(0);
        let theta = prior.sample(&mut own)?;
        let y = Dist::normal(theta, d)?.sample(&mut own)?;
        let loglik = Dist::normal(theta, d)?.logpdf(y)?;
        let inner = node.substream(1);
        logws.clear();
        for j in 0..m {
            logws.push(run_weighted(&BedLikelihood, &(y, d), inner.substream(j))?.logw);
        }
        let v = loglik.value() - log_marginal_of(&logws)?.value();
        if !v.is_finite() {
            return Err(Error::DegenerateMeasure);
        }
        s += v;
        s2 += v * v;
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 - nf * mean * mean) / (nf - 1.0);
    Ok(BedEstimate { estimate: mean, std_error: (var.max(0.0) / nf).sqrt() })
}
