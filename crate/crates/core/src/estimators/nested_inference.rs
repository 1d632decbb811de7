use super::{BudgetPolicy, EstimatorVariant};
use crate::error::{Error, Result};
use crate::numerics::{categorical_from_logweights, log_sum_exp, LogWeight, RngStream};
use crate::ppl::{run_weighted, EmpiricalMeasure, Query, Trace, WeightedSample};

/// An outer query that calls an inner query's posterior once.
///
/// The body is split at the nested call: `prefix` runs everything before it
/// and returns the state the rest depends on, `inner_input` derives the inner
/// query's arguments, and `complete` runs the remainder given one inner draw.
/// Observe statements in either half contribute to the outer weight.
pub trait NestingQuery: Sync {
    type State;
    type InnerInput;
    type Draw;
    type Output;

    fn prefix(&self, trace: &mut Trace) -> Result<Self::State>;

    fn inner_input(&self, state: &Self::State) -> Self::InnerInput;

    fn complete(&self, state: &Self::State, draw: &Self::Draw, trace: &mut Trace) -> Result<Self::Output>;
}

/// Everything one outer sample produces when all inner draws are completed.
#[derive(Clone, Debug)]
pub struct OuterSample<V> {
    /// Weight of the part of the outer body before the nested call.
    pub prefix_logw: LogWeight,
    /// Importance weights of the inner draws.
    pub inner_logw: Vec<LogWeight>,
    /// Outer output and completion weight for each inner draw.
    pub completions: Vec<WeightedSample<V>>,
}

impl<V> OuterSample<V> {
    /// `false` when every inner weight is zero: the inner posterior has no estimate.
    pub fn is_usable(&self) -> bool {
        self.inner_logw.iter().any(|w| !w.is_zero())
    }
}

struct Raw<S, D> {
    state: S,
    prefix_logw: LogWeight,
    draws: Vec<WeightedSample<D>>,
}

fn draw_raw<O, Q>(outer: &O, inner: &Q, n1: u64, node: RngStream) -> Result<Raw<O::State, O::Draw>>
where
    O: NestingQuery,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    let mut trace = Trace::new(node.substream(0));
    let state = outer.prefix(&mut trace)?;
    let prefix_logw = trace.log_weight();
    let input = outer.inner_input(&state);
    let inner_root = node.substream(1);
    let draws = (0..n1).map(|m| run_weighted(inner, &input, inner_root.substream(m))).collect::<Result<Vec<_>>>()?;
    Ok(Raw { state, prefix_logw, draws })
}

fn complete_one<O: NestingQuery>(outer: &O, raw: &Raw<O::State, O::Draw>, m: usize, node: RngStream) -> Result<WeightedSample<O::Output>> {
    let mut trace = Trace::new(node.substream(2).substream(m as u64));
    let value = outer.complete(&raw.state, &raw.draws[m].value, &mut trace)?;
    Ok(WeightedSample { value, logw: trace.log_weight() })
}

/// Draws outer sample `node` with `n1` inner draws, each completed.
pub fn draw_nested_sample<O, Q>(outer: &O, inner: &Q, n1: u64, node: RngStream) -> Result<OuterSample<O::Output>>
where
    O: NestingQuery,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    if n1 == 0 {
        return Err(Error::param("inner budget must be >= 1"));
    }
    let raw = draw_raw(outer, inner, n1, node)?;
    let completions = (0..raw.draws.len()).map(|m| complete_one(outer, &raw, m, node)).collect::<Result<Vec<_>>>()?;
    Ok(OuterSample {
        prefix_logw: raw.prefix_logw,
        inner_logw: raw.draws.iter().map(|d| d.logw).collect(),
        completions,
    })
}

fn check_policy(n0: u64, policy: &BudgetPolicy) -> Result<()> {
    if n0 == 0 {
        return Err(Error::param("N0 must be >= 1"));
    }
    policy.validate(1)
}

/// `n0` fully completed outer samples; sample `n` uses budget `policy` at `n + 1`.
pub fn nested_is_draws<O, Q>(
    outer: &O,
    inner: &Q,
    n0: u64,
    policy: &BudgetPolicy,
    rng: RngStream,
) -> Result<Vec<OuterSample<O::Output>>>
where
    O: NestingQuery,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    check_policy(n0, policy)?;
    (0..n0).map(|n| draw_nested_sample(outer, inner, policy.first_level_at(n + 1), rng.substream(n))).collect()
}

fn warn_dropped(dropped: u64, total: u64) {
    if dropped > 0 {
        log::warn!("{dropped} of {total} outer samples had all-zero inner weights and were dropped");
    }
}

/// Appends the Rao-Blackwellized atoms of one outer sample: every inner draw,
/// weighted by the outer weight times its normalized inner weight.
fn push_rb_atoms<V: Clone>(sample: &OuterSample<V>, out: &mut Vec<(V, LogWeight)>) -> Result<bool> {
    let total = log_sum_exp(&sample.inner_logw)?;
    if total.is_zero() {
        return Ok(false);
    }
    for (c, &w) in sample.completions.iter().zip(&sample.inner_logw) {
        out.push((c.value.clone(), sample.prefix_logw + c.logw + (w - total)));
    }
    Ok(true)
}

/// Rao-Blackwellized posterior estimate from completed outer samples.
pub fn rb_measure<V: Clone>(samples: &[OuterSample<V>]) -> Result<EmpiricalMeasure<V>> {
    let mut atoms = Vec::with_capacity(samples.iter().map(|s| s.completions.len()).sum());
    let mut dropped = 0;
    for s in samples {
        if !push_rb_atoms(s, &mut atoms)? {
            dropped += 1;
        }
    }
    warn_dropped(dropped, samples.len() as u64);
    EmpiricalMeasure::from_log_atoms(atoms)
}

/// Single-sample estimate from completed outer samples: one inner draw per
/// outer sample is selected with probability proportional to its inner weight.
pub fn single_measure<V: Clone>(samples: &[OuterSample<V>], rng: RngStream) -> Result<EmpiricalMeasure<V>> {
    let mut atoms = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for (n, s) in samples.iter().enumerate() {
        match categorical_from_logweights(&s.inner_logw, &mut rng.substream(n as u64).substream(3)) {
            Ok(m) => {
                let c = &s.completions[m];
                atoms.push((c.value.clone(), s.prefix_logw + c.logw));
            }
            Err(Error::DegenerateCategorical) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    warn_dropped(dropped, samples.len() as u64);
    EmpiricalMeasure::from_log_atoms(atoms)
}

/// The single-sample measure averaged over the inner selection, by
/// enumerating every choice in linear space.
pub fn expected_single_measure<V: Clone>(samples: &[OuterSample<V>]) -> Result<EmpiricalMeasure<V>> {
    let shift = samples
        .iter()
        .flat_map(|s| s.completions.iter().map(move |c| (s.prefix_logw + c.logw).value()))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut atoms = Vec::new();
    let mut total = 0.0;
    for s in samples {
        let imax = s.inner_logw.iter().map(|w| w.value()).fold(f64::NEG_INFINITY, f64::max);
        if imax == f64::NEG_INFINITY {
            continue;
        }
        let probs: Vec<f64> = s.inner_logw.iter().map(|w| (w.value() - imax).exp()).collect();
        let z: f64 = probs.iter().sum();
        for (c, p) in s.completions.iter().zip(probs) {
            let w = p / z * ((s.prefix_logw + c.logw).value() - shift).exp();
            total += w;
            atoms.push((c.value.clone(), w));
        }
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateMeasure);
    }
    for a in &mut atoms {
        a.1 /= total;
    }
    EmpiricalMeasure::from_normalized(atoms)
}

/// Rao-Blackwellized nested importance sampling, streamed so only the atoms are kept.
pub fn nested_is_measure<O, Q>(
    outer: &O,
    inner: &Q,
    n0: u64,
    policy: &BudgetPolicy,
    rng: RngStream,
) -> Result<EmpiricalMeasure<O::Output>>
where
    O: NestingQuery,
    O::Output: Clone,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    check_policy(n0, policy)?;
    let mut atoms = match policy {
        BudgetPolicy::Fixed(b) => Vec::with_capacity((n0 * b[0]) as usize),
        BudgetPolicy::Schedule(_) => Vec::new(),
    };
    let mut dropped = 0;
    for n in 0..n0 {
        let s = draw_nested_sample(outer, inner, policy.first_level_at(n + 1), rng.substream(n))?;
        if !push_rb_atoms(&s, &mut atoms)? {
            dropped += 1;
        }
    }
    warn_dropped(dropped, n0);
    EmpiricalMeasure::from_log_atoms(atoms)
}

/// Single-sample nested importance sampling and its deliberately broken
/// variants. Only the selected inner draw is completed.
pub fn nested_is_single<O, Q>(
    outer: &O,
    inner: &Q,
    n0: u64,
    variant: EstimatorVariant,
    policy: &BudgetPolicy,
    rng: RngStream,
) -> Result<EmpiricalMeasure<O::Output>>
where
    O: NestingQuery,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    if variant == EstimatorVariant::RaoBlackwellized {
        return Err(Error::param("use nested_is_measure for the Rao-Blackwellized estimator"));
    }
    check_policy(n0, policy)?;
    let mut atoms = Vec::with_capacity(n0 as usize);
    let mut dropped = 0;
    for n in 0..n0 {
        let node = rng.substream(n);
        let n1 = variant.forced_budget().unwrap_or_else(|| policy.first_level_at(n + 1));
        let raw = draw_raw(outer, inner, n1, node)?;
        let logws: Vec<LogWeight> = raw.draws.iter().map(|d| d.logw).collect();
        match categorical_from_logweights(&logws, &mut node.substream(3)) {
            Ok(m) => {
                let c = complete_one(outer, &raw, m, node)?;
                atoms.push((c.value, raw.prefix_logw + c.logw));
            }
            Err(Error::DegenerateCategorical) => dropped += 1,
            Err(e) => return Err(e),
        }
    }
    warn_dropped(dropped, n0);
    EmpiricalMeasure::from_log_atoms(atoms)
}

/// Any nested importance sampling variant.
pub fn nested_is<O, Q>(
    outer: &O,
    inner: &Q,
    n0: u64,
    variant: EstimatorVariant,
    policy: &BudgetPolicy,
    rng: RngStream,
) -> Result<EmpiricalMeasure<O::Output>>
where
    O: NestingQuery,
    O::Output: Clone,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    match variant {
        EstimatorVariant::RaoBlackwellized => nested_is_measure(outer, inner, n0, policy, rng),
        _ => nested_is_single(outer, inner, n0, variant, policy, rng),
    }
}
