use rand_distr::{Beta as BetaSampler, Distribution, Gamma as GammaSampler, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{categorical_from_logweights, log_sum_exp, LogWeight, RngStream};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Elementary random procedures.
///
/// Normal is parameterised by standard deviation and gamma by shape and rate.
#[derive(Clone, Debug, PartialEq)]
pub enum Dist {
    Normal { mean: f64, stddev: f64 },
    Gamma { shape: f64, rate: f64 },
    Beta { a: f64, b: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Index-valued; samples are returned as `f64` indices.
    Categorical { logweights: Vec<LogWeight> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be finite, got {v}")))
    }
}

impl Dist {
    pub fn normal(mean: f64, stddev: f64) -> Result<Dist> {
        finite("mean", mean)?;
        positive("stddev", stddev)?;
        Ok(Dist::Normal { mean, stddev })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Dist> {
        positive("shape", shape)?;
        positive("rate", rate)?;
        Ok(Dist::Gamma { shape, rate })
    }

    pub fn beta(a: f64, b: f64) -> Result<Dist> {
        positive("a", a)?;
        positive("b", b)?;
        Ok(Dist::Beta { a, b })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Dist> {
        finite("lo", lo)?;
        finite("hi", hi)?;
        if lo >= hi {
            return Err(Error::param(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Dist::Uniform { lo, hi })
    }

    pub fn categorical(logweights: Vec<LogWeight>) -> Result<Dist> {
        if log_sum_exp(&logweights)?.is_zero() {
            return Err(Error::DegenerateCategorical);
        }
        Ok(Dist::Categorical { logweights })
    }

    /// Re-checks the parameter invariants, for values built with struct syntax.
    pub fn validate(&self) -> Result<()> {
        match self {
            Dist::Normal { mean, stddev } => Dist::normal(*mean, *stddev).map(drop),
            Dist::Gamma { shape, rate } => Dist::gamma(*shape, *rate).map(drop),
            Dist::Beta { a, b } => Dist::beta(*a, *b).map(drop),
            Dist::Uniform { lo, hi } => Dist::uniform(*lo, *hi).map(drop),
            Dist::Categorical { logweights } => {
                if log_sum_exp(logweights)?.is_zero() {
                    Err(Error::DegenerateCategorical)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Exact log density (log mass for categorical). Out-of-support points give `ZERO`.
    pub fn logpdf(&self, x: f64) -> Result<LogWeight> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::param("logpdf evaluated at NaN"));
        }
        let v = match *self {
            Dist::Normal { mean, stddev } => {
                let u = (x - mean) / stddev;
                -HALF_LN_TWO_PI - stddev.ln() - 0.5 * u * u
            }
            Dist::Gamma { shape, rate } => {
                if x <= 0.0 || x.is_infinite() {
                    f64::NEG_INFINITY
                } else {
                    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
                }
            }
            Dist::Beta { a, b } => {
                if x <= 0.0 || x >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
                }
            }
            Dist::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Dist::Categorical { ref logweights } => {
                if x < 0.0 || x.fract() != 0.0 || x as usize >= logweights.len() {
                    f64::NEG_INFINITY
                } else {
                    let total = log_sum_exp(logweights)?;
                    (logweights[x as usize] - total).value()
                }
            }
        };
        LogWeight::new(v)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        self.validate()?;
        Ok(self.sample_unchecked(rng))
    }

    pub(crate) fn sample_unchecked(&self, rng: &mut RngStream) -> f64 {
        match *self {
            Dist::Normal { mean, stddev } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + stddev * z
            }
            Dist::Gamma { shape, rate } => GammaSampler::new(shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            Dist::Beta { a, b } => BetaSampler::new(a, b).expect("validated beta parameters").sample(rng),
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
            Dist::Categorical { ref logweights } => {
                categorical_from_logweights(logweights, rng).expect("validated categorical") as f64
            }
        }
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn standard_normal_mode() {
        let lp = Dist::normal(0.0, 1.0).unwrap().logpdf(0.0).unwrap();
        assert_abs_diff_eq!(lp.value(), -0.5 * (2.0 * std::f64::consts::PI).ln(), epsilon = 1e-15);
    }

    #[test]
    fn uniform_out_of_support() {
        let d = Dist::uniform(4.0, 10.0).unwrap();
        assert!(d.logpdf(3.0).unwrap().is_zero());
        assert_abs_diff_eq!(d.logpdf(5.0).unwrap().value(), -(6f64.ln()), epsilon = 1e-15);
    }

    #[test]
    fn gamma_two_one_at_one() {
        // Gamma(2) = 1, density x e^{-x} at x = 1.
        let lp = Dist::gamma(2.0, 1.0).unwrap().logpdf(1.0).unwrap();
        assert_abs_diff_eq!(lp.value(), -1.0, epsilon = 1e-12);
        assert!(Dist::gamma(2.0, 1.0).unwrap().logpdf(-0.1).unwrap().is_zero());
    }

    #[test]
    fn beta_density_matches_closed_form() {
        // Beta(2,3) density is 12 x (1-x)^2.
        let lp = Dist::beta(2.0, 3.0).unwrap().logpdf(0.3).unwrap();
        assert_abs_diff_eq!(lp.value(), (12.0 * 0.3 * 0.49f64).ln(), epsilon = 1e-12);
    }

    #[test]
    fn categorical_mass() {
        let ws = vec![LogWeight::new(0.0).unwrap(), LogWeight::new(3f64.ln()).unwrap()];
        let d = Dist::categorical(ws).unwrap();
        assert_abs_diff_eq!(d.logpdf(1.0).unwrap().linear(), 0.75, epsilon = 1e-12);
        assert!(d.logpdf(2.0).unwrap().is_zero());
        assert!(d.logpdf(0.5).unwrap().is_zero());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(Dist::normal(0.0, 0.0).is_err());
        assert!(Dist::gamma(-1.0, 1.0).is_err());
        assert!(Dist::gamma(1.0, 0.0).is_err());
        assert!(Dist::beta(0.0, 1.0).is_err());
        assert!(Dist::uniform(1.0, 1.0).is_err());
        assert!(Dist::categorical(vec![LogWeight::ZERO]).is_err());
        let bad = Dist::Normal { mean: 0.0, stddev: -1.0 };
        assert!(bad.logpdf(0.0).is_err());
        assert!(bad.sample(&mut RngStream::new(0)).is_err());
    }

    #[test]
    fn uniform_samples_in_support() {
        let d = Dist::uniform(0.0, 1.0).unwrap();
        let mut rng = RngStream::new(1);
        for _ in 0..10_000 {
            let x = d.sample(&mut rng).unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn beta_two_three_mean() {
        let d = Dist::beta(2.0, 3.0).unwrap();
        let mut rng = RngStream::new(2);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut rng).unwrap()).sum::<f64>() / n as f64;
        // var = ab/((a+b)^2 (a+b+1)) = 0.04, so 4 sigma of the mean is 0.0008.
        assert!((mean - 0.4).abs() < 0.001, "mean {mean}");
    }

    #[test]
    fn normal_five_two_stddev() {
        let d = Dist::normal(5.0, 2.0).unwrap();
        let mut rng = RngStream::new(3);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        // sd of the sample sd is about 2/sqrt(2n) = 0.0014
        assert!((sd - 2.0).abs() < 0.01, "sd {sd}");
        assert!((mean - 5.0).abs() < 4.0 * 0.002);
    }

    #[test]
    fn gamma_shape_below_one_mean() {
        let d = Dist::gamma(0.4, 1.0).unwrap();
        let mut rng = RngStream::new(4);
        let n = 400_000;
        let mean = (0..n).map(|_| d.sample(&mut rng).unwrap()).sum::<f64>() / n as f64;
        // variance 0.4
        assert!((mean - 0.4).abs() < 4.0 * (0.4f64 / n as f64).sqrt());
    }
}
