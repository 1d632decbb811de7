use super::Dist;
use crate::error::Result;
use crate::numerics::{LogWeight, RngStream};

/// Execution state of one run of a query body under the prior proposal.
///
/// `sample` draws from the prior (scoring traces also record its density); `observe`
/// multiplies the trace weight by a likelihood term. With the prior as the
/// proposal, the importance weight is the product of the observe terms alone.
#[derive(Clone, Debug)]
pub struct Trace {
    rng: RngStream,
    log_weight: LogWeight,
    log_prior: Option<LogWeight>,
    forced: Vec<f64>,
    next_forced: usize,
}

impl Trace {
    pub fn new(rng: RngStream) -> Self {
        Trace { rng, log_weight: LogWeight::ONE, log_prior: None, forced: Vec::new(), next_forced: 0 }
    }

    /// A trace that also accumulates the prior density of every sampled value.
    pub fn scoring(rng: RngStream) -> Self {
        Trace { log_prior: Some(LogWeight::ONE), ..Trace::new(rng) }
    }

    /// A trace whose first `values.len()` sample statements return `values`
    /// in order instead of drawing. Their prior densities are still scored.
    pub fn replaying(rng: RngStream, values: Vec<f64>) -> Self {
        Trace { forced: values, ..Trace::scoring(rng) }
    }

    pub fn sample(&mut self, dist: &Dist) -> Result<f64> {
        let x = if self.next_forced < self.forced.len() {
            self.next_forced += 1;
            self.forced[self.next_forced - 1]
        } else {
            dist.sample(&mut self.rng)?
        };
        if let Some(lp) = self.log_prior.as_mut() {
            *lp += dist.logpdf(x)?;
        }
        Ok(x)
    }

    pub fn observe(&mut self, dist: &Dist, value: f64) -> Result<()> {
        self.log_weight += dist.logpdf(value)?;
        Ok(())
    }

    /// Multiplies the trace weight by an arbitrary non-negative factor.
    pub fn factor(&mut self, w: LogWeight) {
        self.log_weight += w;
    }

    /// Hard conditioning: weight zero unless `holds`.
    pub fn condition(&mut self, holds: bool) {
        if !holds {
            self.log_weight = LogWeight::ZERO;
        }
    }

    pub fn log_weight(&self) -> LogWeight {
        self.log_weight
    }

    /// Log prior density of the sampled values, when the trace is scoring.
    pub fn log_prior(&self) -> Option<LogWeight> {
        self.log_prior
    }

    /// Log joint density (prior plus observe terms), when the trace is scoring.
    pub fn log_joint(&self) -> Option<LogWeight> {
        self.log_prior.map(|lp| lp + self.log_weight)
    }

    /// Direct access for bodies that need raw uniforms.
    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }
}

/// A nestable probabilistic model: given inputs and a trace, draws from its
/// prior, accumulates observe weights, and returns a value.
///
/// Bodies must be deterministic functions of their inputs and the trace's
/// randomness.
pub trait Query: Sync {
    type Input;
    type Output;

    fn run(&self, input: &Self::Input, trace: &mut Trace) -> Result<Self::Output>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample<V> {
    pub value: V,
    pub logw: LogWeight,
}

/// One importance-sampling execution of `query` with the prior as proposal.
pub fn run_weighted<Q: Query + ?Sized>(query: &Q, input: &Q::Input, rng: RngStream) -> Result<WeightedSample<Q::Output>> {
    let mut trace = Trace::new(rng);
    let value = query.run(input, &mut trace)?;
    Ok(WeightedSample { value, logw: trace.log_weight() })
}

/// Log of the averaged importance weights, `log((1/M) sum exp(logw))`.
///
/// In linear space this is an unbiased estimate of the query's partition function.
pub fn log_marginal<V>(samples: &[WeightedSample<V>]) -> Result<LogWeight> {
    let ws: Vec<LogWeight> = samples.iter().map(|s| s.logw).collect();
    log_marginal_of(&ws)
}

pub(crate) fn log_marginal_of(ws: &[LogWeight]) -> Result<LogWeight> {
    let total = crate::numerics::log_sum_exp(ws)?;
    if total.is_zero() {
        return Ok(total);
    }
    Ok(LogWeight::raw(total.value() - (ws.len() as f64).ln()))
}

impl<Q: Query + ?Sized> Query for &Q {
    type Input = Q::Input;
    type Output = Q::Output;

    fn run(&self, input: &Self::Input, trace: &mut Trace) -> Result<Self::Output> {
        (**self).run(input, trace)
    }
}
