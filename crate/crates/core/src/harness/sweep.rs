use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use super::RunRecord;
use crate::error::{Error, Result};
use crate::estimators::{
    finite_support_estimate, mc_estimate, nested_conditioning_estimate, nested_is, nmc_estimate, onmc_estimate,
    onmc_outer_for_budget, BudgetPolicy, EstimatorVariant, NestingQuery,
};
use crate::models::{self, beta_gamma, conjugate, AnalyticExact, AnalyticModel};
use crate::numerics::RngStream;
use crate::ppl::{EmpiricalMeasure, Query};
use crate::schedules::{ceil_sqrt, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    Analytic,
    AnalyticExact,
    BetaGamma,
    BetaGammaDiscrete,
    Conjugate,
    Poker,
    Bed,
}

impl ModelId {
    pub const ALL: [ModelId; 7] = [
        ModelId::Analytic,
        ModelId::AnalyticExact,
        ModelId::BetaGamma,
        ModelId::BetaGammaDiscrete,
        ModelId::Conjugate,
        ModelId::Poker,
        ModelId::Bed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Analytic => "analytic",
            ModelId::AnalyticExact => "analytic-exact",
            ModelId::BetaGamma => "beta-gamma",
            ModelId::BetaGammaDiscrete => "beta-gamma-discrete",
            ModelId::Conjugate => "conjugate",
            ModelId::Poker => "poker",
            ModelId::Bed => "bed",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::config(format!("unknown model `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    Mc,
    Nmc,
    Onmc,
    NestedIsRb,
    NestedIsSingle,
    Naive,
    Broken,
    NestedCond,
    FiniteSupport,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 9] = [
        EstimatorId::Mc,
        EstimatorId::Nmc,
        EstimatorId::Onmc,
        EstimatorId::NestedIsRb,
        EstimatorId::NestedIsSingle,
        EstimatorId::Naive,
        EstimatorId::Broken,
        EstimatorId::NestedCond,
        EstimatorId::FiniteSupport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Mc => "mc",
            EstimatorId::Nmc => "nmc",
            EstimatorId::Onmc => "onmc",
            EstimatorId::NestedIsRb => "nested-is-rb",
            EstimatorId::NestedIsSingle => "nested-is-single",
            EstimatorId::Naive => "naive",
            EstimatorId::Broken => "broken",
            EstimatorId::NestedCond => "nested-cond",
            EstimatorId::FiniteSupport => "finite-support",
        }
    }

    fn variant(self) -> Option<EstimatorVariant> {
        match self {
            EstimatorId::Nmc | EstimatorId::NestedIsRb => Some(EstimatorVariant::RaoBlackwellized),
            EstimatorId::NestedIsSingle => Some(EstimatorVariant::SingleSample),
            EstimatorId::Naive => Some(EstimatorVariant::NaiveN1Equals1),
            EstimatorId::Broken => Some(EstimatorVariant::BrokenConditionalN1Equals2),
            _ => None,
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::config(format!("unknown estimator `{s}`")))
    }
}

/// How a total budget `T` is split between outer and inner samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerRule {
    /// Fixed `N1 = ceil(sqrt(N0))`, the rate-optimal split for depth one.
    SqrtSplit,
    /// A schedule; a constant schedule is a fixed inner budget.
    Schedule(Schedule),
}

impl fmt::Display for InnerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerRule::SqrtSplit => f.write_str("sqrt-split"),
            InnerRule::Schedule(s) => write!(f, "{s}"),
        }
    }
}

/// Model inputs that the command line can override.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Observation of the beta-gamma and conjugate models.
    pub data: f64,
    pub poker_hand: f64,
    pub poker_bet: f64,
    pub bed_design: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { data: beta_gamma::DEFAULT_DATA, poker_hand: 0.1, poker_bet: 6.0, bed_design: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub model: ModelId,
    pub estimator: EstimatorId,
    /// Strictly increasing total budgets.
    pub ladder: Vec<u64>,
    /// `None` picks the estimator's default.
    pub inner: Option<InnerRule>,
    pub replicates: u64,
    pub seed: u64,
    pub params: ModelParams,
    /// Smallest budget the online estimator is expected to be stopped at;
    /// defaults to the first ladder point.
    pub t_min: Option<u64>,
}

impl SweepConfig {
    pub fn new(model: ModelId, estimator: EstimatorId, ladder: Vec<u64>, replicates: u64, seed: u64) -> Self {
        SweepConfig { model, estimator, ladder, inner: None, replicates, seed, params: ModelParams::default(), t_min: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::config("budget ladder is empty"));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("budget ladder must be strictly increasing"));
        }
        if self.ladder[0] == 0 {
            return Err(Error::config("budgets must be >= 1"));
        }
        if self.replicates < 2 {
            return Err(Error::config("need at least 2 replicates"));
        }
        if !self.params.data.is_finite() {
            return Err(Error::config("observation must be finite"));
        }
        if !(0.0..=1.0).contains(&self.params.poker_hand) || !(self.params.poker_bet >= 0.0) {
            return Err(Error::config("poker hand must lie in [0, 1] and the bet be >= 0"));
        }
        if !(self.params.bed_design > 0.0) {
            return Err(Error::config("design must be > 0"));
        }
        allocate(self, self.ladder[0]).map(|_| ())
    }

    /// The inner rule actually used.
    pub fn inner_rule(&self) -> InnerRule {
        self.inner.unwrap_or(match self.estimator {
            EstimatorId::Onmc => InnerRule::Schedule(Schedule::recommended(self.t_min.unwrap_or(self.ladder[0]))),
            _ => InnerRule::SqrtSplit,
        })
    }
}

/// Largest `N0 >= 1` with `N0 * ceil(sqrt(N0)) <= t`.
pub fn outer_for_sqrt_split(t: u64) -> u64 {
    let cost = |n: u64| n.saturating_mul(ceil_sqrt(n));
    let (mut lo, mut hi) = (1u64, t.max(1));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if cost(mid) <= t {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Outer count and inner budget policy for one ladder point.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub n0: u64,
    pub policy: BudgetPolicy,
    pub descriptor: String,
}

fn fixed(n0: u64, n1: u64, label: &str) -> Allocation {
    Allocation { n0, policy: BudgetPolicy::fixed_single(n1), descriptor: format!("{label}={n1}") }
}

fn split_or_schedule(rule: InnerRule, t: u64, label: &str, allow_schedule: bool) -> Result<Allocation> {
    match rule {
        InnerRule::SqrtSplit => {
            let n0 = outer_for_sqrt_split(t);
            Ok(fixed(n0, ceil_sqrt(n0), label))
        }
        InnerRule::Schedule(Schedule::Constant(k)) => Ok(fixed((t / k).max(1), k, label)),
        InnerRule::Schedule(s) if allow_schedule => {
            let (n0, _) = onmc_outer_for_budget(&[s], t);
            Ok(Allocation { n0, policy: BudgetPolicy::schedule_single(s), descriptor: s.to_string() })
        }
        InnerRule::Schedule(s) => Err(Error::config(format!("schedule `{s}` needs an online estimator"))),
    }
}

const QUERY_MODELS: [ModelId; 3] = [ModelId::BetaGamma, ModelId::BetaGammaDiscrete, ModelId::Poker];

/// Splits the total budget `t` for the configured model and estimator, or
/// reports an unsupported combination as a config error.
pub fn allocate(cfg: &SweepConfig, t: u64) -> Result<Allocation> {
    use EstimatorId as E;
    use ModelId as M;
    let rule = cfg.inner_rule();
    let unsupported = || Err(Error::config(format!("estimator `{}` does not apply to model `{}`", cfg.estimator, cfg.model)));
    match (cfg.estimator, cfg.model) {
        (E::Mc, M::AnalyticExact) => {
            Ok(Allocation { n0: t, policy: BudgetPolicy::Fixed(vec![]), descriptor: "none".into() })
        }
        (E::Nmc, M::Analytic | M::Bed) => split_or_schedule(rule, t, if cfg.model == M::Bed { "M" } else { "N1" }, false),
        (E::Onmc, M::Analytic) => match rule {
            InnerRule::Schedule(s) => split_or_schedule(InnerRule::Schedule(s), t, "N1", true)
                .map(|a| Allocation { descriptor: s.to_string(), ..a }),
            InnerRule::SqrtSplit => Err(Error::config("onmc needs a schedule")),
        },
        (E::Nmc, m) if QUERY_MODELS.contains(&m) => split_or_schedule(rule, t, "N1", false),
        (E::NestedIsRb | E::NestedIsSingle, m) if QUERY_MODELS.contains(&m) => split_or_schedule(rule, t, "N1", true),
        (E::Naive, m) if QUERY_MODELS.contains(&m) => Ok(fixed(t, 1, "N1")),
        (E::Broken, m) if QUERY_MODELS.contains(&m) => Ok(fixed((t / 2).max(1), 2, "N1")),
        (E::NestedCond, M::Conjugate) => split_or_schedule(rule, t, "M", false),
        (E::FiniteSupport, M::BetaGammaDiscrete) => {
            let c = beta_gamma::DISCRETE_SUPPORT.len() as u64;
            if t < c {
                return Err(Error::config(format!("finite-support needs T >= {c}")));
            }
            Ok(Allocation { n0: c, policy: BudgetPolicy::Fixed(vec![t / c]), descriptor: format!("per-point={}", t / c) })
        }
        _ => unsupported(),
    }
}

fn measure_of<O, Q>(outer: &O, inner: &Q, cfg: &SweepConfig, alloc: &Allocation, rng: RngStream) -> Result<EmpiricalMeasure<f64>>
where
    O: NestingQuery<Output = f64>,
    Q: Query<Input = O::InnerInput, Output = O::Draw>,
{
    let variant = cfg.estimator.variant().expect("query estimator");
    nested_is(outer, inner, alloc.n0, variant, &alloc.policy, rng)
}

/// The weighted output measure of a nested query estimator at budget `t`.
pub fn build_measure(cfg: &SweepConfig, t: u64, rng: RngStream) -> Result<EmpiricalMeasure<f64>> {
    let alloc = allocate(cfg, t)?;
    let p = &cfg.params;
    match cfg.model {
        ModelId::BetaGamma => measure_of(&models::BgOuter, &models::BgInner { data: p.data }, cfg, &alloc, rng),
        ModelId::BetaGammaDiscrete => {
            measure_of(&models::BgDiscreteOuter, &models::BgInner { data: p.data }, cfg, &alloc, rng)
        }
        ModelId::Poker => {
            let outer = models::PokerPayoff { p1_hand: p.poker_hand, p1_bet: p.poker_bet };
            measure_of(&outer, &models::P2Sim, cfg, &alloc, rng)
        }
        ModelId::Conjugate if cfg.estimator == EstimatorId::NestedCond => {
            let m = alloc.policy.first_level_at(1);
            nested_conditioning_estimate(&conjugate::ConjugateOuter, &models::ConjugateEvidence { data: p.data }, alloc.n0, m, rng)
        }
        _ => Err(Error::config(format!("model `{}` with `{}` does not produce a measure", cfg.model, cfg.estimator))),
    }
}

/// One scalar estimate of the model's target at budget `t`.
fn estimate(cfg: &SweepConfig, t: u64, rng: RngStream) -> Result<(Allocation, f64)> {
    let alloc = allocate(cfg, t)?;
    let p = &cfg.params;
    let value = match (cfg.estimator, cfg.model) {
        (EstimatorId::Mc, _) => mc_estimate(&AnalyticExact, alloc.n0, rng)?,
        (EstimatorId::Nmc, ModelId::Analytic) => {
            let BudgetPolicy::Fixed(b) = &alloc.policy else { unreachable!("nmc allocations are fixed") };
            nmc_estimate(&AnalyticModel, alloc.n0, b, rng)?
        }
        (EstimatorId::Onmc, ModelId::Analytic) => {
            let s = match &alloc.policy {
                BudgetPolicy::Schedule(s) => s.clone(),
                BudgetPolicy::Fixed(b) => vec![Schedule::Constant(b[0])],
            };
            onmc_estimate(&AnalyticModel, alloc.n0, &s, rng)?
        }
        (EstimatorId::Nmc, ModelId::Bed) => {
            models::bed_estimate(p.bed_design, alloc.n0.max(2), alloc.policy.first_level_at(1), rng)?.estimate
        }
        (EstimatorId::FiniteSupport, _) => {
            let inner = models::BgInner { data: p.data };
            finite_support_estimate(&beta_gamma::DISCRETE_SUPPORT, &inner, |_, z| *z, |y, m| y * m, t, rng)?
        }
        _ => build_measure(cfg, t, rng)?.expectation(|v| *v),
    };
    if !value.is_finite() {
        return Err(Error::NonFiniteEstimate(value));
    }
    Ok((alloc, value))
}

/// Key of the pinned reference stream; disjoint from every `RngStream::new` seed path.
const REFERENCE_KEY: [u64; 2] = [0x005E_ED0F_7EF0_0000, 0xA5A5_5A5A_0BAD_F00D];

/// Ground truth for the configured model: closed form or quadrature when
/// available, otherwise a Rao-Blackwellized run at 100 times the largest budget.
pub fn truth_for(cfg: &SweepConfig) -> Result<Option<f64>> {
    let p = &cfg.params;
    Ok(Some(match cfg.model {
        ModelId::Analytic | ModelId::AnalyticExact => models::gamma0(),
        ModelId::BetaGamma => models::bg_truth(p.data),
        ModelId::BetaGammaDiscrete => models::bg_discrete_truth(p.data),
        ModelId::Conjugate => models::conjugate_posterior_mean(p.data),
        ModelId::Bed => models::bed_mi_analytic(p.bed_design)?,
        ModelId::Poker => {
            let t_ref = cfg.ladder.last().copied().unwrap_or(1).saturating_mul(100);
            let reference = SweepConfig {
                estimator: EstimatorId::NestedIsRb,
                inner: Some(InnerRule::SqrtSplit),
                ..cfg.clone()
            };
            log::info!("poker reference run at T = {t_ref}");
            build_measure(&reference, t_ref, RngStream::from_key(REFERENCE_KEY))?.expectation(|v| *v)
        }
    }))
}

/// Seed of replicate `r`.
fn replicate_seed(root: u64, r: u64) -> u64 {
    root.wrapping_add(r)
}

/// Runs every replicate at every ladder point. Records are sorted by
/// `(T, seed)`, so the output does not depend on the worker count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let truth = truth_for(cfg)?;
    let jobs: Vec<(usize, u64)> =
        (0..cfg.ladder.len()).flat_map(|i| (0..cfg.replicates).map(move |r| (i, r))).collect();
    let mut records = jobs
        .par_iter()
        .map(|&(i, r)| {
            let t = cfg.ladder[i];
            let seed = replicate_seed(cfg.seed, r);
            let start = Instant::now();
            let (alloc, value) = estimate(cfg, t, RngStream::new(seed).substream(i as u64))?;
            Ok(RunRecord {
                model: cfg.model.to_string(),
                estimator: cfg.estimator.to_string(),
                t,
                n0: alloc.n0,
                inner_budget: alloc.descriptor,
                seed,
                estimate: value,
                truth: None,
                abs_error: None,
                sq_error: None,
                wall_time_s: start.elapsed().as_secs_f64(),
            }
            .with_truth(truth))
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.t, r.seed));
    Ok(records)
}
