use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::ppl::{run_weighted, Query};

/// Attempt cap for rejection sampling when the caller has no better bound.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// Nested estimate when the outer variable takes finitely many values.
///
/// For each support point `y_c` with probability `p_c`, the inner
/// expectation of `statistic` is estimated by self-normalized importance
/// sampling with an equal share of the `total` inner budget (the first
/// `total mod C` points get one extra run). The result is
/// `sum_c p_c outer(y_c, I_c)`, which converges at the plain Monte Carlo rate.
pub fn finite_support_estimate<I, Q>(
    support: &[(I, f64)],
    inner: &Q,
    statistic: impl Fn(&I, &Q::Output) -> f64,
    outer: impl Fn(&I, f64) -> f64,
    total: u64,
    rng: RngStream,
) -> Result<f64>
where
    Q: Query<Input = I>,
{
    let c = support.len() as u64;
    if c == 0 {
        return Err(Error::param("support must not be empty"));
    }
    if total < c {
        return Err(Error::param(format!("budget {total} is smaller than the support size {c}")));
    }
    if support.iter().any(|(_, p)| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::param("support probabilities must be finite and >= 0"));
    }
    let mass: f64 = support.iter().map(|(_, p)| p).sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("support probabilities sum to {mass}, not 1")));
    }
    let mut est = 0.0;
    for (i, (y, p)) in support.iter().enumerate() {
        let i = i as u64;
        let budget = total / c + u64::from(i < total % c);
        let stream = rng.substream(i);
        let mut shift = f64::NEG_INFINITY;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..budget {
            let s = run_weighted(inner, y, stream.substream(j))?;
            let lw = s.logw.value();
            if lw == f64::NEG_INFINITY {
                continue;
            }
            // running rescale keeps the sums finite for extreme weights
            if lw > shift {
                let r = (shift - lw).exp();
                num *= r;
                den *= r;
                shift = lw;
            }
            let w = (lw - shift).exp();
            num += w * statistic(y, &s.value);
            den += w;
        }
        if den == 0.0 {
            if *p == 0.0 {
                continue;
            }
            return Err(Error::DegenerateMeasure);
        }
        est += p * outer(y, num / den);
    }
    Ok(est)
}

/// An exact draw from a query whose only conditioning is hard (weights are
/// zero or one): rerun until a run is accepted. Also returns the number of runs.
pub fn rejection_exact_sample_counted<Q: Query + ?Sized>(
    query: &Q,
    input: &Q::Input,
    rng: RngStream,
    max_attempts: u64,
) -> Result<(Q::Output, u64)> {
    for i in 0..max_attempts {
        let s = run_weighted(query, input, rng.substream(i))?;
        if !s.logw.is_zero() {
            if s.logw.value() != 0.0 {
                return Err(Error::param("rejection sampling needs hard conditioning (weights 0 or 1)"));
            }
            return Ok((s.value, i + 1));
        }
    }
    Err(Error::AcceptanceTooSmall(max_attempts))
}

pub fn rejection_exact_sample<Q: Query + ?Sized>(
    query: &Q,
    input: &Q::Input,
    rng: RngStream,
    max_attempts: u64,
) -> Result<Q::Output> {
    rejection_exact_sample_counted(query, input, rng, max_attempts).map(|(v, _)| v)
}
