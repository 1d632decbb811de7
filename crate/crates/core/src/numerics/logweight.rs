use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use super::RngStream;
use crate::error::{Error, Result};

/// A non-negative weight stored as its natural logarithm.
///
/// `-inf` encodes weight zero. `NaN` and `+inf` are rejected at construction,
/// so arithmetic on valid values never produces them either.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
#[repr(transparent)]
pub struct LogWeight(f64);

impl LogWeight {
    /// Weight zero.
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    /// Weight one.
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value == f64::INFINITY {
            return Err(Error::param(format!("log weight must be < +inf and not NaN, got {value}")));
        }
        Ok(LogWeight(value))
    }

    /// Log of a linear-space weight `w >= 0`.
    pub fn from_linear(w: f64) -> Result<Self> {
        if !(w >= 0.0) || w.is_infinite() {
            return Err(Error::param(format!("weight must be finite and >= 0, got {w}")));
        }
        Ok(LogWeight(w.ln()))
    }

    /// Wraps a value the caller has already checked to be a valid log weight.
    #[inline]
    pub(crate) fn raw(value: f64) -> Self {
        debug_assert!(!value.is_nan() && value != f64::INFINITY, "invalid log weight {value}");
        LogWeight(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// The weight in linear space.
    #[inline]
    pub fn linear(self) -> f64 {
        self.0.exp()
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Multiplication of the underlying weights.
impl Add for LogWeight {
    type Output = LogWeight;
    #[inline]
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight::raw(self.0 + rhs.0)
    }
}

impl AddAssign for LogWeight {
    #[inline]
    fn add_assign(&mut self, rhs: LogWeight) {
        *self = *self + rhs;
    }
}

/// Division of the underlying weights. Dividing by weight zero is a logic error.
impl Sub for LogWeight {
    type Output = LogWeight;
    #[inline]
    fn sub(self, rhs: LogWeight) -> LogWeight {
        debug_assert!(!rhs.is_zero(), "division by zero weight");
        if self.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight::raw(self.0 - rhs.0)
    }
}

/// `log(sum(exp(w)))` with a max shift. Returns `ZERO` iff every input is zero.
pub fn log_sum_exp(ws: &[LogWeight]) -> Result<LogWeight> {
    let max = ws
        .iter()
        .copied()
        .max_by(LogWeight::total_cmp)
        .ok_or(Error::EmptyWeights)?;
    if max.is_zero() {
        return Ok(LogWeight::ZERO);
    }
    let sum: f64 = ws.iter().map(|w| (w.0 - max.0).exp()).sum();
    Ok(LogWeight::raw(max.0 + sum.ln()))
}

/// Draws index `m` with probability `exp(w_m) / sum_l exp(w_l)`.
pub fn categorical_from_logweights(ws: &[LogWeight], rng: &mut RngStream) -> Result<usize> {
    let max = ws
        .iter()
        .copied()
        .max_by(LogWeight::total_cmp)
        .ok_or(Error::EmptyWeights)?;
    if max.is_zero() {
        return Err(Error::DegenerateCategorical);
    }
    if ws.len() == 1 {
        return Ok(0);
    }
    let total: f64 = ws.iter().map(|w| (w.0 - max.0).exp()).sum();
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in ws.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        acc += (w.0 - max.0).exp();
        last_positive = i;
        if target < acc {
            return Ok(i);
        }
    }
    // Rounding can leave `target` a hair above the accumulated total.
    Ok(last_positive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn lw(v: f64) -> LogWeight {
        LogWeight::new(v).unwrap()
    }

    #[test]
    fn rejects_nan_and_positive_infinity() {
        assert!(LogWeight::new(f64::NAN).is_err());
        assert!(LogWeight::new(f64::INFINITY).is_err());
        assert!(LogWeight::new(f64::NEG_INFINITY).unwrap().is_zero());
        assert!(LogWeight::from_linear(-1.0).is_err());
        assert!(LogWeight::from_linear(0.0).unwrap().is_zero());
    }

    #[test]
    fn lse_of_two_ones_is_log_two() {
        let r = log_sum_exp(&[lw(0.0), lw(0.0)]).unwrap();
        assert_abs_diff_eq!(r.value(), 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn lse_zero_weight_is_absorbing() {
        let r = log_sum_exp(&[LogWeight::ZERO, lw(3f64.ln())]).unwrap();
        assert_abs_diff_eq!(r.value(), 3f64.ln(), epsilon = 1e-15);
        assert!(log_sum_exp(&[LogWeight::ZERO, LogWeight::ZERO]).unwrap().is_zero());
    }

    #[test]
    fn lse_large_values_do_not_overflow() {
        // exp(710) overflows f64; 710 + ln 2 is the exact answer.
        let r = log_sum_exp(&[lw(710.0), lw(710.0)]).unwrap();
        assert!(r.value().is_finite());
        assert_abs_diff_eq!(r.value(), 710.0 + 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn lse_empty_is_error() {
        assert_eq!(log_sum_exp(&[]), Err(Error::EmptyWeights));
    }

    #[test]
    fn categorical_single_atom_and_zero_weights() {
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(categorical_from_logweights(&[lw(0.0)], &mut rng).unwrap(), 0);
            let ws = [LogWeight::ZERO, lw(2f64.ln())];
            assert_eq!(categorical_from_logweights(&ws, &mut rng).unwrap(), 1);
        }
        assert_eq!(
            categorical_from_logweights(&[LogWeight::ZERO; 3], &mut rng),
            Err(Error::DegenerateCategorical)
        );
    }

    #[test]
    fn categorical_fair_coin_frequency() {
        let mut rng = RngStream::new(42);
        let ws = [lw(0.0), lw(0.0)];
        let n = 1_000_000;
        let zeros = (0..n)
            .filter(|_| categorical_from_logweights(&ws, &mut rng).unwrap() == 0)
            .count();
        // 4 sigma of a fair binomial proportion at n = 1e6 is 0.002.
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "freq {freq}");
    }

    proptest! {
        #[test]
        fn lse_permutation_invariant_and_ignores_zero(
            mut xs in prop::collection::vec(-50.0f64..50.0, 1..20),
            seed in any::<u64>(),
        ) {
            let ws: Vec<_> = xs.iter().map(|&x| lw(x)).collect();
            let base = log_sum_exp(&ws).unwrap().value();
            // deterministic shuffle
            let mut rng = RngStream::new(seed);
            for i in (1..xs.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                xs.swap(i, j);
            }
            let mut shuffled: Vec<_> = xs.iter().map(|&x| lw(x)).collect();
            prop_assert!((log_sum_exp(&shuffled).unwrap().value() - base).abs() < 1e-12);
            shuffled.push(LogWeight::ZERO);
            prop_assert!((log_sum_exp(&shuffled).unwrap().value() - base).abs() < 1e-12);
        }

        #[test]
        fn categorical_shift_invariant(
            xs in prop::collection::vec(-20.0f64..20.0, 1..10),
            shift in -500.0f64..500.0,
            seed in any::<u64>(),
        ) {
            let a: Vec<_> = xs.iter().map(|&x| lw(x)).collect();
            let b: Vec<_> = xs.iter().map(|&x| lw(x + shift)).collect();
            let mut r1 = RngStream::new(seed);
            let mut r2 = RngStream::new(seed);
            let pa: Vec<f64> = {
                let t = log_sum_exp(&a).unwrap().value();
                a.iter().map(|w| (w.value() - t).exp()).collect()
            };
            let pb: Vec<f64> = {
                let t = log_sum_exp(&b).unwrap().value();
                b.iter().map(|w| (w.value() - t).exp()).collect()
            };
            for (x, y) in pa.iter().zip(&pb) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let ia = categorical_from_logweights(&a, &mut r1).unwrap();
            let ib = categorical_from_logweights(&b, &mut r2).unwrap();
            prop_assert_eq!(ia, ib);
        }
    }
}
