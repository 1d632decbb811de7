use super::WeightedSample;
use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, LogWeight};

/// A self-normalized weighted sample set. Weights are non-negative and sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure<V> {
    atoms: Vec<(V, f64)>,
}

impl<V> EmpiricalMeasure<V> {
    /// Normalizes log-weighted samples. Fails if every weight is zero.
    pub fn from_weighted(samples: Vec<WeightedSample<V>>) -> Result<Self> {
        let (values, logws): (Vec<V>, Vec<LogWeight>) = samples.into_iter().map(|s| (s.value, s.logw)).unzip();
        Self::from_parts(values, &logws)
    }

    pub(crate) fn from_parts(values: Vec<V>, logws: &[LogWeight]) -> Result<Self> {
        debug_assert_eq!(values.len(), logws.len());
        if values.is_empty() {
            return Err(Error::DegenerateMeasure);
        }
        let total = log_sum_exp(logws)?;
        if total.is_zero() {
            return Err(Error::DegenerateMeasure);
        }
        let atoms = values
            .into_iter()
            .zip(logws)
            .map(|(v, w)| (v, (w.value() - total.value()).exp()))
            .collect();
        Ok(EmpiricalMeasure { atoms })
    }

    /// Normalizes `(value, log weight)` pairs, reusing the allocation.
    pub(crate) fn from_log_atoms(atoms: Vec<(V, LogWeight)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::DegenerateMeasure);
        }
        let max = atoms.iter().map(|(_, w)| w.value()).fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateMeasure);
        }
        let total = max + atoms.iter().map(|(_, w)| (w.value() - max).exp()).sum::<f64>().ln();
        let atoms = atoms.into_iter().map(|(v, w)| (v, (w.value() - total).exp())).collect();
        Ok(EmpiricalMeasure { atoms })
    }

    /// Builds a measure from linear weights that are already normalized.
    pub fn from_normalized(atoms: Vec<(V, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::DegenerateMeasure);
        }
        if atoms.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("normalized weights must be finite and >= 0"));
        }
        let sum: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("weights sum to {sum}, not 1")));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(V, f64)] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<(V, f64)> {
        self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|(_, w)| *w)
    }

    pub fn expectation(&self, f: impl Fn(&V) -> f64) -> f64 {
        self.atoms.iter().map(|(v, w)| w * f(v)).sum()
    }

    /// Kish effective sample size, `1 / sum w^2`.
    pub fn ess(&self) -> f64 {
        1.0 / self.atoms.iter().map(|(_, w)| w * w).sum::<f64>()
    }

    /// Delta-method standard error of `expectation(f)` for a self-normalized estimate.
    pub fn standard_error(&self, f: impl Fn(&V) -> f64) -> f64 {
        let mean = self.expectation(&f);
        self.atoms
            .iter()
            .map(|(v, w)| {
                let d = f(v) - mean;
                w * w * d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn map<U>(self, f: impl Fn(V) -> U) -> EmpiricalMeasure<U> {
        EmpiricalMeasure { atoms: self.atoms.into_iter().map(|(v, w)| (f(v), w)).collect() }
    }
}
