use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// B_2k / (2k)! for k = 1..6
const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
];

/// Riemann zeta for real `s > 1`: partial sum plus Euler–Maclaurin tail.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::param(format!("zeta needs finite s > 1, got {s}")));
    }
    const N: f64 = 20.0;
    let head: f64 = (1..20).map(|n| (n as f64).powf(-s)).sum();
    let mut tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2)
    let mut rising = s;
    let mut power = N.powf(-s - 1.0);
    for (k, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= N * N;
        }
        tail += coef * rising * power;
    }
    Ok(head + tail)
}

/// Generalized harmonic number `H_alpha[n] = sum_{i=1}^n i^(-alpha)`.
pub fn harmonic(alpha: f64, n: u64) -> f64 {
    // Sum smallest terms first for accuracy when alpha > 0.
    (1..=n).rev().map(|i| (i as f64).powf(-alpha)).sum()
}

/// Bias inflation factor of online estimation with polynomial schedules.
///
/// `1/(1-alpha)` for `alpha < 1`, `ln N0 + gamma` at `alpha = 1`, and
/// `zeta(alpha) N0^(alpha-1)` above.
pub fn g_factor(alpha: f64, n0: u64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("g_factor needs alpha > 0, got {alpha}")));
    }
    if n0 == 0 {
        return Err(Error::param("g_factor needs N0 >= 1"));
    }
    let n0 = n0 as f64;
    Ok(if alpha < 1.0 {
        1.0 / (1.0 - alpha)
    } else if alpha == 1.0 {
        n0.ln() + EULER_GAMMA
    } else {
        zeta(alpha)? * n0.powf(alpha - 1.0)
    })
}

/// Asymptotic cost of online relative to fixed-budget estimation at matched
/// outer samples: `c = (1 + alpha D)^(-1 / (1 + alpha D))`.
pub fn cost_ratio_c(alpha: f64, depth: u32) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("cost ratio needs alpha > 0, got {alpha}")));
    }
    if depth == 0 {
        return Err(Error::param("cost ratio needs depth >= 1"));
    }
    let x = 1.0 + alpha * depth as f64;
    Ok(x.powf(-1.0 / x))
}

/// Per-level variance constants and derivative bounds of a nested problem.
///
/// `varsigma` has `D + 1` entries; `second_deriv` (the `C_k`) and
/// `first_deriv` (the `K_k`) have `D` entries each.
#[derive(Clone, Debug, PartialEq)]
pub struct RateConstants {
    pub varsigma: Vec<f64>,
    pub second_deriv: Vec<f64>,
    pub first_deriv: Vec<f64>,
}

impl RateConstants {
    pub fn depth(&self) -> usize {
        self.varsigma.len().saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        let d = self.depth();
        if self.varsigma.is_empty() || self.second_deriv.len() != d || self.first_deriv.len() != d {
            return Err(Error::param(format!(
                "rate constants need D+1 varsigma and D of each derivative bound; got {}, {}, {}",
                self.varsigma.len(),
                self.second_deriv.len(),
                self.first_deriv.len()
            )));
        }
        let all = self.varsigma.iter().chain(&self.second_deriv).chain(&self.first_deriv);
        if all.clone().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("rate constants must be finite and >= 0"));
        }
        Ok(())
    }

    /// Bias term with budget `n[k]` at level `k` (entry 0 unused).
    fn bias(&self, n: &[f64]) -> f64 {
        let d = self.depth();
        if d == 0 {
            return 0.0;
        }
        let s2 = |k: usize| self.varsigma[k] * self.varsigma[k];
        let mut b = self.second_deriv[0] * s2(1) / (2.0 * n[1]);
        let mut prod = 1.0;
        for k in 0..d.saturating_sub(1) {
            prod *= self.first_deriv[k];
            b += prod * self.second_deriv[k + 1] * s2(k + 2) / (2.0 * n[k + 2]);
        }
        b
    }
}

/// MSE bound of fixed-budget nested estimation: variance `varsigma_0^2 / N0`
/// plus the squared bias term. `budgets` holds `N0..N_D`.
pub fn nmc_mse_bound(consts: &RateConstants, budgets: &[u64]) -> Result<f64> {
    consts.validate()?;
    if budgets.len() != consts.depth() + 1 {
        return Err(Error::param(format!("need {} budgets, got {}", consts.depth() + 1, budgets.len())));
    }
    if budgets.contains(&0) {
        return Err(Error::param("budgets must be >= 1"));
    }
    let n: Vec<f64> = budgets.iter().map(|&b| b as f64).collect();
    let bias = consts.bias(&n);
    Ok(consts.varsigma[0].powi(2) / n[0] + bias * bias)
}

/// The bias numerator `beta`: the bias term with every inner budget set to one.
pub fn beta_constant(consts: &RateConstants) -> Result<f64> {
    consts.validate()?;
    Ok(consts.bias(&vec![1.0; consts.depth() + 1]))
}

/// MSE bound of online estimation with `tau_k(n0) >= scale * n0^alpha`.
pub fn onmc_mse_bound(consts: &RateConstants, scale: f64, alpha: f64, n0: u64) -> Result<f64> {
    if !(scale > 0.0) {
        return Err(Error::param("scale must be > 0"));
    }
    let beta = beta_constant(consts)?;
    let g = g_factor(alpha, n0)?;
    let n = n0 as f64;
    let bias = beta * g / (scale * n.powf(alpha));
    Ok(consts.varsigma[0].powi(2) / n + bias * bias)
}
