use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{nested_is, BudgetPolicy, EstimatorVariant};
use crate::models::poker::{calc_payoff, PokerPayoff, P2Sim, BIG_BLIND};
use crate::numerics::RngStream;
use crate::ppl::Dist;

#[derive(Clone, Debug, PartialEq)]
pub struct PokerCell {
    pub hand: f64,
    /// `"bet"`, `"fold"` or `"call"` (matching the big blind).
    pub action: &'static str,
    pub bet: f64,
    pub payoff: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PokerGrid {
    pub hands: Vec<f64>,
    pub bets: Vec<f64>,
    pub cells: Vec<PokerCell>,
}

impl PokerGrid {
    /// 17 hands from 0 to 1 and 13 bets from 4 to 10.
    pub fn default_axes() -> (Vec<f64>, Vec<f64>) {
        ((0..17).map(|i| i as f64 / 16.0).collect(), (0..13).map(|j| 4.0 + 0.5 * j as f64).collect())
    }

    pub fn cell(&self, hand: f64, action: &str, bet: Option<f64>) -> Option<&PokerCell> {
        self.cells
            .iter()
            .find(|c| c.hand == hand && c.action == action && bet.is_none_or(|b| c.bet == b))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["hand", "action", "bet", "payoff", "std_error"])?;
        for c in &self.cells {
            w.write_record([c.hand.to_string(), c.action.to_string(), c.bet.to_string(), c.payoff.to_string(), c.std_error.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_poker_csv<W: Write>(grid: &PokerGrid, out: W) -> Result<()> {
    grid.write_csv(out)
}

/// Payoff of a fixed action against `n` uniform opponent hands that always call.
fn showdown_mc(hand: f64, bet: f64, n: u64, rng: RngStream) -> (f64, f64) {
    let u = Dist::Uniform { lo: 0.0, hi: 1.0 };
    let mut s = rng;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let v = calc_payoff(hand, bet, u.sample_unchecked(&mut s), true);
        sum += v;
        sum2 += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    (mean, ((sum2 / nf - mean * mean).max(0.0) / nf).sqrt())
}

/// Expected payoffs over a hand x bet grid, plus fold and call columns.
/// Cell estimates are independent; cell `k` uses `RngStream::new(seed).substream(k)`.
pub fn poker_grid(
    hands: &[f64],
    bets: &[f64],
    n0: u64,
    variant: EstimatorVariant,
    policy: &BudgetPolicy,
    seed: u64,
) -> Result<PokerGrid> {
    if hands.is_empty() || bets.is_empty() {
        return Err(Error::config("poker grid axes must be non-empty"));
    }
    if hands.iter().any(|h| !(0.0..=1.0).contains(h)) || bets.iter().any(|b| !(*b >= 0.0)) {
        return Err(Error::config("hands must lie in [0, 1] and bets be >= 0"));
    }
    let root = RngStream::new(seed);
    let jobs: Vec<(usize, Option<usize>)> = (0..hands.len())
        .flat_map(|i| std::iter::once((i, None)).chain((0..bets.len()).map(move |j| (i, Some(j)))))
        .collect();
    let per_hand = bets.len() as u64 + 2;
    let cells = jobs
        .par_iter()
        .map(|&(i, j)| -> Result<Vec<PokerCell>> {
            let hand = hands[i];
            let base = i as u64 * per_hand;
            match j {
                None => {
                    let (fold, fold_se) = showdown_mc(hand, 0.0, n0, root.substream(base));
                    let (call, call_se) = showdown_mc(hand, BIG_BLIND, n0, root.substream(base + 1));
                    Ok(vec![
                        PokerCell { hand, action: "fold", bet: 0.0, payoff: fold, std_error: fold_se },
                        PokerCell { hand, action: "call", bet: BIG_BLIND, payoff: call, std_error: call_se },
                    ])
                }
                Some(j) => {
                    let q = PokerPayoff { p1_hand: hand, p1_bet: bets[j] };
                    let m = nested_is(&q, &P2Sim, n0, variant, policy, root.substream(base + 2 + j as u64))?;
                    Ok(vec![PokerCell {
                        hand,
                        action: "bet",
                        bet: bets[j],
                        payoff: m.expectation(|v| *v),
                        std_error: m.standard_error(|v| *v),
                    }])
                }
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(PokerGrid { hands: hands.to_vec(), bets: bets.to_vec(), cells })
}

/// The hand at which calling the big blind starts to beat folding, located by
/// bisection on Monte Carlo payoffs with common random opponent hands.
pub fn call_crossover(n0: u64, seed: u64) -> Result<f64> {
    if n0 == 0 {
        return Err(Error::param("need at least one opponent hand"));
    }
    let u = Dist::Uniform { lo: 0.0, hi: 1.0 };
    let mut rng = RngStream::new(seed);
    let opponents: Vec<f64> = (0..n0).map(|_| u.sample_unchecked(&mut rng)).collect();
    let advantage = |h: f64| {
        let call: f64 = opponents.iter().map(|&p2| calc_payoff(h, BIG_BLIND, p2, true)).sum::<f64>() / n0 as f64;
        let fold: f64 = opponents.iter().map(|&p2| calc_payoff(h, 0.0, p2, true)).sum::<f64>() / n0 as f64;
        call - fold
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if advantage(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
