//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function wraps a plain Rust function of the same name
//! prefixed with `run_`, so the logic is testable without a JS host.

use wasm_bindgen::prelude::*;

use nestmc::estimators::{nested_is, BudgetPolicy, EstimatorVariant, NestedProblem, OnlineNmc};
use nestmc::models::{gamma0, AnalyticModel, BgInner, BgOuter, PokerPayoff, P2Sim};
use nestmc::schedules::Schedule;
use nestmc::RngStream;

/// Histogram range of the beta-gamma output `y z`.
pub const DENSITY_RANGE: (f64, f64) = (0.0, 4.0);

/// Running online estimates of the analytic model's target after each of
/// `checkpoints` evenly spaced outer counts up to `n0`, interleaved with the
/// matching fixed-budget estimate `N1 = floor` at the same outer count:
/// `[n, online, fixed, n, online, fixed, ...]`.
pub fn run_online_trace(n0: u32, floor: u32, checkpoints: u32, seed: u32) -> Result<Vec<f64>, String> {
    if n0 == 0 || floor == 0 || checkpoints == 0 {
        return Err("n0, floor and checkpoints must be positive".into());
    }
    let root = RngStream::new(seed as u64);
    let mut online = OnlineNmc::new(&AnalyticModel, vec![Schedule::SqrtFloor(floor as u64)], root.substream(0))
        .map_err(|e| e.to_string())?;
    let mut fixed = OnlineNmc::new(&AnalyticModel, vec![Schedule::Constant(floor as u64)], root.substream(1))
        .map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * checkpoints as usize);
    let step = (n0 / checkpoints).max(1);
    let mut next = step;
    for n in 1..=n0 {
        let a = online.step();
        let b = fixed.step();
        if n == next || n == n0 {
            out.extend([n as f64, a, b]);
            next += step;
        }
        if out.len() >= 3 * checkpoints as usize {
            break;
        }
    }
    Ok(out)
}

fn variant_named(name: &str) -> Result<EstimatorVariant, String> {
    Ok(match name {
        "rb" => EstimatorVariant::RaoBlackwellized,
        "single" => EstimatorVariant::SingleSample,
        "naive" => EstimatorVariant::NaiveN1Equals1,
        "broken" => EstimatorVariant::BrokenConditionalN1Equals2,
        other => return Err(format!("unknown estimator `{other}`")),
    })
}

/// Normalized histogram of the beta-gamma output over [`DENSITY_RANGE`].
/// `n1` is the inner budget for `rb` and `single`; values beyond the range
/// land in the last bin.
pub fn run_bg_density(estimator: &str, n0: u32, n1: u32, bins: u32, data: f64, seed: u32) -> Result<Vec<f64>, String> {
    if bins == 0 || n0 == 0 || n1 == 0 {
        return Err("n0, n1 and bins must be positive".into());
    }
    let variant = variant_named(estimator)?;
    let policy = BudgetPolicy::fixed_single(n1 as u64);
    let m = nested_is(&BgOuter, &BgInner { data }, n0 as u64, variant, &policy, RngStream::new(seed as u64))
        .map_err(|e| e.to_string())?;
    let (lo, hi) = DENSITY_RANGE;
    let width = (hi - lo) / bins as f64;
    let mut h = vec![0.0; bins as usize];
    for &(v, w) in m.atoms() {
        let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins as usize - 1);
        h[k] += w;
    }
    Ok(h)
}

/// Expected poker payoff and its standard error for one hand and bet.
pub fn run_poker_payoff(hand: f64, bet: f64, estimator: &str, n0: u32, n1: u32, seed: u32) -> Result<Vec<f64>, String> {
    if !(0.0..=1.0).contains(&hand) || !(bet >= 0.0) {
        return Err("hand must lie in [0, 1] and bet be >= 0".into());
    }
    let variant = variant_named(estimator)?;
    let q = PokerPayoff { p1_hand: hand, p1_bet: bet };
    let m = nested_is(&q, &P2Sim, n0 as u64, variant, &BudgetPolicy::fixed_single(n1.max(1) as u64), RngStream::new(seed as u64))
        .map_err(|e| e.to_string())?;
    Ok(vec![m.expectation(|v| *v), m.standard_error(|v| *v)])
}

#[wasm_bindgen]
pub fn truth() -> f64 {
    gamma0()
}

#[wasm_bindgen]
pub fn depth() -> usize {
    AnalyticModel.depth()
}

#[wasm_bindgen]
pub fn online_trace(n0: u32, floor: u32, checkpoints: u32, seed: u32) -> Result<Vec<f64>, JsValue> {
    run_online_trace(n0, floor, checkpoints, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bg_density(estimator: &str, n0: u32, n1: u32, bins: u32, data: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    run_bg_density(estimator, n0, n1, bins, data, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn poker_payoff(hand: f64, bet: f64, estimator: &str, n0: u32, n1: u32, seed: u32) -> Result<Vec<f64>, JsValue> {
    run_poker_payoff(hand, bet, estimator, n0, n1, seed).map_err(|e| JsValue::from_str(&e))
}
