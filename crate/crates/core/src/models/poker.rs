//! One-round poker where player 2 reasons about player 1's bet.
//!
//! Player 1 holds `p1_hand` and bets `p1_bet` (below the big blind means
//! fold). Player 2 sees only the bet, simulates player 1's hand from the
//! bet model, and calls if its own hand beats the simulated one.

use crate::error::Result;
use crate::estimators::NestingQuery;
use crate::numerics::{log_sum_exp, LogWeight};
use crate::ppl::{Dist, Query, Trace};

pub const SMALL_BLIND: f64 = 1.0;
pub const BIG_BLIND: f64 = 2.0;
pub const MAX_BET: f64 = 10.0;
pub const BLUFF_PROB: f64 = 0.05;
pub const BET_NOISE: f64 = 2.0;
const MIN_RAISE: f64 = 4.0;

/// Player 1's payoff. Ties go to player 2.
pub fn calc_payoff(p1_hand: f64, p1_bet: f64, p2_hand: f64, p2_call: bool) -> f64 {
    if p1_bet < BIG_BLIND {
        -SMALL_BLIND
    } else if !p2_call {
        BIG_BLIND
    } else if p1_hand > p2_hand {
        p1_bet
    } else {
        -p1_bet
    }
}

/// Expected payoff of matching the big blind against a uniform hand that always calls.
pub fn call_payoff(p1_hand: f64) -> f64 {
    BIG_BLIND * (2.0 * p1_hand - 1.0)
}

/// Log density of player 1 betting `bet` with `hand`: a noisy bet around
/// `8 hand` for strong hands (zero for weak ones), mixed with a uniform bluff.
pub fn p1_bet_logpdf(hand: f64, bet: f64) -> LogWeight {
    let mean = if hand < 0.5 { 0.0 } else { 8.0 * hand };
    let normal = Dist::Normal { mean, stddev: BET_NOISE }.logpdf(bet).expect("valid parameters");
    let bluff = Dist::Uniform { lo: MIN_RAISE, hi: MAX_BET }.logpdf(bet).expect("valid parameters");
    let parts = [
        LogWeight::raw((1.0 - BLUFF_PROB).ln()) + normal,
        LogWeight::raw(BLUFF_PROB.ln()) + bluff,
    ];
    log_sum_exp(&parts).expect("non-empty")
}

/// Player 2's model of the hand: input `(p1_bet, p2_hand)`, output the call decision.
#[derive(Clone, Copy, Debug, Default)]
pub struct P2Sim;

impl Query for P2Sim {
    type Input = (f64, f64);
    type Output = bool;

    fn run(&self, &(p1_bet, p2_hand): &(f64, f64), trace: &mut Trace) -> Result<bool> {
        let simulated = trace.sample(&Dist::uniform(0.0, 1.0)?)?;
        trace.factor(p1_bet_logpdf(simulated, p1_bet));
        Ok(p2_hand > simulated)
    }
}

/// Player 1's payoff for a fixed hand and bet; the call decision is nested.
#[derive(Clone, Copy, Debug)]
pub struct PokerPayoff {
    pub p1_hand: f64,
    pub p1_bet: f64,
}

impl NestingQuery for PokerPayoff {
    type State = f64;
    type InnerInput = (f64, f64);
    type Draw = bool;
    type Output = f64;

    fn prefix(&self, trace: &mut Trace) -> Result<f64> {
        trace.sample(&Dist::uniform(0.0, 1.0)?)
    }

    fn inner_input(&self, p2_hand: &f64) -> (f64, f64) {
        (self.p1_bet, *p2_hand)
    }

    fn complete(&self, p2_hand: &f64, call: &bool, _: &mut Trace) -> Result<f64> {
        Ok(calc_payoff(self.p1_hand, self.p1_bet, *p2_hand, *call))
    }
}
