use std::io::Write;

use crate::error::{Error, Result};
use crate::ppl::EmpiricalMeasure;

/// Coefficient of the asymptotic 1% two-sample Kolmogorov–Smirnov critical value.
const KS_COEF_1PCT: f64 = 1.628;

#[derive(Clone, Debug, PartialEq)]
pub struct KsComparison {
    pub a: String,
    pub b: String,
    pub statistic: f64,
    /// 1% critical value using the Kish effective sample sizes.
    pub critical: f64,
}

impl KsComparison {
    pub fn rejects(&self) -> bool {
        self.statistic > self.critical
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub edges: Vec<f64>,
    /// Per measure: name and bin masses (summing to one; values outside the
    /// edges are counted in the end bins).
    pub histograms: Vec<(String, Vec<f64>)>,
    pub ess: Vec<(String, f64)>,
    pub ks: Vec<KsComparison>,
}

pub fn ks_critical_value(ess_a: f64, ess_b: f64) -> f64 {
    KS_COEF_1PCT * (1.0 / ess_a + 1.0 / ess_b).sqrt()
}

/// Largest gap between the weighted empirical CDFs of two value-sorted atom lists.
pub fn weighted_ks(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    debug_assert!(a.windows(2).all(|w| w[0].0 <= w[1].0) && b.windows(2).all(|w| w[0].0 <= w[1].0));
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut d = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.min(y.0),
            (Some(x), None) => x.0,
            (None, Some(y)) => y.0,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i].0 <= v {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 <= v {
            fb += b[j].1;
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    d
}

fn weighted_quantile(sorted: &[(f64, f64)], q: f64) -> f64 {
    let mut acc = 0.0;
    for &(v, w) in sorted {
        acc += w;
        if acc >= q {
            return v;
        }
    }
    sorted.last().map_or(f64::NAN, |a| a.0)
}

/// Histograms and pairwise KS statistics of scalar measures. Without an
/// explicit `range`, bins span the 0.5%–99.5% weighted quantiles of the first measure.
pub fn density_compare(
    measures: Vec<(String, EmpiricalMeasure<f64>)>,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<DensityReport> {
    if measures.len() < 2 {
        return Err(Error::param("need at least two measures"));
    }
    if bins == 0 {
        return Err(Error::param("need at least one bin"));
    }
    let mut sorted = Vec::with_capacity(measures.len());
    for (name, m) in measures {
        if m.is_empty() {
            return Err(Error::DegenerateMeasure);
        }
        let ess = m.ess();
        let mut atoms = m.into_atoms();
        if atoms.iter().any(|a| !a.0.is_finite()) {
            return Err(Error::param(format!("measure `{name}` has non-finite values")));
        }
        atoms.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
        sorted.push((name, ess, atoms));
    }
    let (lo, hi) = range.unwrap_or_else(|| (weighted_quantile(&sorted[0].2, 0.005), weighted_quantile(&sorted[0].2, 0.995)));
    if !(hi > lo) {
        return Err(Error::param(format!("empty histogram range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let histograms = sorted
        .iter()
        .map(|(name, _, atoms)| {
            let mut h = vec![0.0; bins];
            for &(v, w) in atoms {
                let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
                h[k] += w;
            }
            (name.clone(), h)
        })
        .collect();
    let mut ks = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            ks.push(KsComparison {
                a: sorted[i].0.clone(),
                b: sorted[j].0.clone(),
                statistic: weighted_ks(&sorted[i].2, &sorted[j].2),
                critical: ks_critical_value(sorted[i].1, sorted[j].1),
            });
        }
    }
    let ess = sorted.iter().map(|(n, e, _)| (n.clone(), *e)).collect();
    Ok(DensityReport { edges, histograms, ess, ks })
}

impl DensityReport {
    /// One row per bin: `bin_lo,bin_hi,<mass per measure>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
        header.extend(self.histograms.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for k in 0..self.edges.len() - 1 {
            let mut row = vec![self.edges[k].to_string(), self.edges[k + 1].to_string()];
            row.extend(self.histograms.iter().map(|(_, h)| h[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
