//! Inner-budget schedules for online estimation, and closed-form rate quantities.

mod theory;

pub use theory::{
    beta_constant, cost_ratio_c, g_factor, harmonic, nmc_mse_bound, onmc_mse_bound, zeta, RateConstants, EULER_GAMMA,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Maps the outer iteration `n0 >= 1` to an inner budget `tau(n0) >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant(u64),
    /// `max(floor, ceil(sqrt(n0)))`
    SqrtFloor(u64),
    /// `min(cap, ceil(sqrt(n0)))`
    SqrtCap(u64),
    /// `max(floor, ceil(scale * n0^alpha))`
    Poly { scale: f64, alpha: f64, floor: u64 },
}

/// Smallest `r` with `r * r >= n`.
pub(crate) fn ceil_sqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) < n {
        r += 1;
    }
    while r > 0 && (r - 1).saturating_mul(r - 1) >= n {
        r -= 1;
    }
    r
}

/// Smallest `r` with `r^3 >= n`.
pub(crate) fn ceil_cbrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let cube = |r: u64| r.saturating_mul(r).saturating_mul(r);
    let mut r = (n as f64).cbrt() as u64;
    while cube(r) < n {
        r += 1;
    }
    while r > 0 && cube(r - 1) >= n {
        r -= 1;
    }
    r
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant(n) | Schedule::SqrtFloor(n) | Schedule::SqrtCap(n) if n == 0 => {
                Err(Error::param("schedule constant must be >= 1"))
            }
            Schedule::Poly { scale, alpha, .. } if !(scale > 0.0 && scale.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::param(format!("poly schedule needs scale > 0 and alpha > 0, got {scale}, {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// The recommended default: `max(ceil(t_min^(1/3)), ceil(sqrt(n0)))`.
    pub fn recommended(t_min: u64) -> Schedule {
        Schedule::SqrtFloor(ceil_cbrt(t_min).max(1))
    }

    /// Budget at outer iteration `n0` (1-based). `n0 = 0` is treated as 1.
    pub fn tau(&self, n0: u64) -> u64 {
        let n0 = n0.max(1);
        let t = match *self {
            Schedule::Constant(n) => n,
            Schedule::SqrtFloor(f) => f.max(ceil_sqrt(n0)),
            Schedule::SqrtCap(c) => c.min(ceil_sqrt(n0)),
            Schedule::Poly { scale, alpha, floor } => {
                let raw = (scale * (n0 as f64).powf(alpha)).ceil();
                floor.max(if raw >= u64::MAX as f64 { u64::MAX } else { raw as u64 })
            }
        };
        t.max(1)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Schedule::Constant(_))
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(n) => write!(f, "const:{n}"),
            Schedule::SqrtFloor(n) => write!(f, "sqrt-floor:{n}"),
            Schedule::SqrtCap(n) => write!(f, "sqrt-cap:{n}"),
            Schedule::Poly { scale, alpha, floor } => write!(f, "poly:{scale},{alpha},{floor}"),
        }
    }
}

/// Parses `const:N`, `sqrt-floor:F`, `sqrt-cap:C` or `poly:A,alpha[,B]`.
impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("schedule `{s}` must look like kind:value")))?;
        let int = |a: &str| -> Result<u64> {
            a.trim().parse::<u64>().map_err(|_| Error::config(format!("bad integer `{a}` in schedule `{s}`")))
        };
        let real = |a: &str| -> Result<f64> {
            a.trim().parse::<f64>().map_err(|_| Error::config(format!("bad number `{a}` in schedule `{s}`")))
        };
        let sched = match kind {
            "const" => Schedule::Constant(int(arg)?),
            "sqrt-floor" => Schedule::SqrtFloor(int(arg)?),
            "sqrt-cap" => Schedule::SqrtCap(int(arg)?),
            "poly" => {
                let parts: Vec<&str> = arg.split(',').collect();
                match parts.as_slice() {
                    [a, alpha] => Schedule::Poly { scale: real(a)?, alpha: real(alpha)?, floor: 1 },
                    [a, alpha, b] => Schedule::Poly { scale: real(a)?, alpha: real(alpha)?, floor: int(b)? },
                    _ => return Err(Error::config(format!("poly schedule `{s}` needs A,alpha[,floor]"))),
                }
            }
            other => return Err(Error::config(format!("unknown schedule kind `{other}`"))),
        };
        sched.validate().map_err(|e| Error::config(e.to_string()))?;
        Ok(sched)
    }
}
