use super::BudgetPolicy;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::schedules::Schedule;

/// A depth-`D` nested expectation.
///
/// Level `k` draws `y_k ~ p(y_k | y_0..y_{k-1})`. The level function `f_k`
/// receives the path `y_0..y_k` and, for `k < D`, the estimate of the next
/// level's expectation; the innermost `f_D` receives `None`.
pub trait NestedProblem: Sync {
    type Value: Clone;

    fn depth(&self) -> usize;

    fn sample(&self, level: usize, prefix: &[Self::Value], rng: &mut RngStream) -> Self::Value;

    fn evaluate(&self, level: usize, path: &[Self::Value], inner: Option<f64>) -> f64;
}

fn node_value<P: NestedProblem + ?Sized>(
    problem: &P,
    level: usize,
    path: &mut Vec<P::Value>,
    node: RngStream,
    budgets: &[u64],
) -> f64 {
    let mut own = node.substream(0);
    let y = problem.sample(level, path, &mut own);
    path.push(y);
    let inner = if level < problem.depth() {
        Some(level_mean(problem, level + 1, path, node.substream(1), budgets))
    } else {
        None
    };
    let v = problem.evaluate(level, path, inner);
    path.pop();
    v
}

/// Inner estimate `I_level` given the prefix in `path`.
fn level_mean<P: NestedProblem + ?Sized>(
    problem: &P,
    level: usize,
    path: &mut Vec<P::Value>,
    stream: RngStream,
    budgets: &[u64],
) -> f64 {
    let n = budgets[level - 1];
    let mut sum = 0.0;
    for i in 0..n {
        sum += node_value(problem, level, path, stream.substream(i), budgets);
    }
    sum / n as f64
}

fn check_fixed<P: NestedProblem + ?Sized>(problem: &P, n0: u64, budgets: &[u64]) -> Result<()> {
    if n0 == 0 {
        return Err(Error::param("N0 must be >= 1"));
    }
    BudgetPolicy::Fixed(budgets.to_vec()).validate(problem.depth())
}

/// Plain Monte Carlo, `(1/N0) sum lambda(y_n)`, for a depth-0 problem.
pub fn mc_estimate<P: NestedProblem + ?Sized>(problem: &P, n0: u64, rng: RngStream) -> Result<f64> {
    if problem.depth() != 0 {
        return Err(Error::param(format!("plain Monte Carlo needs depth 0, got {}", problem.depth())));
    }
    nmc_estimate(problem, n0, &[], rng)
}

/// Fixed-budget nested Monte Carlo with `N_k = budgets[k - 1]`.
pub fn nmc_estimate<P: NestedProblem + ?Sized>(problem: &P, n0: u64, budgets: &[u64], rng: RngStream) -> Result<f64> {
    check_fixed(problem, n0, budgets)?;
    let mut path = Vec::with_capacity(problem.depth() + 1);
    let mut sum = 0.0;
    for n in 0..n0 {
        sum += node_value(problem, 0, &mut path, rng.substream(n), budgets);
    }
    Ok(sum / n0 as f64)
}

/// Online nested Monte Carlo as a stream of running estimates.
///
/// The `n0`-th outer sample uses inner budgets `tau_k(n0)`; earlier samples
/// are never revisited. Each call to `next` returns the running mean.
pub struct OnlineNmc<'a, P: NestedProblem + ?Sized> {
    problem: &'a P,
    schedules: Vec<Schedule>,
    root: RngStream,
    n0: u64,
    sum: f64,
    cost: u64,
    path: Vec<P::Value>,
}

impl<'a, P: NestedProblem + ?Sized> OnlineNmc<'a, P> {
    pub fn new(problem: &'a P, schedules: Vec<Schedule>, root: RngStream) -> Result<Self> {
        BudgetPolicy::Schedule(schedules.clone()).validate(problem.depth())?;
        Ok(OnlineNmc { problem, schedules, root, n0: 0, sum: 0.0, cost: 0, path: Vec::new() })
    }

    pub fn outer_samples(&self) -> u64 {
        self.n0
    }

    /// Total samples drawn at the innermost level so far.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn estimate(&self) -> Option<f64> {
        (self.n0 > 0).then(|| self.sum / self.n0 as f64)
    }

    /// Advances by one outer sample and returns the updated estimate.
    pub fn step(&mut self) -> f64 {
        self.n0 += 1;
        let budgets: Vec<u64> = self.schedules.iter().map(|s| s.tau(self.n0)).collect();
        self.cost = self.cost.saturating_add(budgets.iter().product::<u64>());
        let v = node_value(self.problem, 0, &mut self.path, self.root.substream(self.n0 - 1), &budgets);
        self.sum += v;
        self.sum / self.n0 as f64
    }
}

impl<P: NestedProblem + ?Sized> Iterator for OnlineNmc<'_, P> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.step())
    }
}

/// Online nested Monte Carlo estimate after `n0` outer samples.
pub fn onmc_estimate<P: NestedProblem + ?Sized>(
    problem: &P,
    n0: u64,
    schedules: &[Schedule],
    rng: RngStream,
) -> Result<f64> {
    if n0 == 0 {
        return Err(Error::param("N0 must be >= 1"));
    }
    let mut online = OnlineNmc::new(problem, schedules.to_vec(), rng)?;
    for _ in 0..n0 {
        online.step();
    }
    Ok(online.estimate().expect("n0 >= 1"))
}

/// Largest `n0 >= 1` whose cumulative innermost cost `sum_n prod_k tau_k(n)`
/// does not exceed `total`, and that cost.
pub fn onmc_outer_for_budget(schedules: &[Schedule], total: u64) -> (u64, u64) {
    let mut n0 = 0u64;
    let mut cost = 0u64;
    loop {
        let next: u64 = schedules.iter().map(|s| s.tau(n0 + 1)).product();
        if n0 > 0 && cost.saturating_add(next) > total {
            return (n0, cost);
        }
        n0 += 1;
        cost = cost.saturating_add(next);
    }
}

/// Dispatches to fixed-budget or online estimation.
pub fn nested_estimate<P: NestedProblem + ?Sized>(
    problem: &P,
    n0: u64,
    policy: &BudgetPolicy,
    rng: RngStream,
) -> Result<f64> {
    match policy {
        BudgetPolicy::Fixed(b) => nmc_estimate(problem, n0, b, rng),
        BudgetPolicy::Schedule(s) => onmc_estimate(problem, n0, s, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// lambda(y) = y with y ~ U(-1, 1).
    struct Linear;
    impl NestedProblem for Linear {
        type Value = f64;
        fn depth(&self) -> usize {
            0
        }
        fn sample(&self, _: usize, _: &[f64], rng: &mut RngStream) -> f64 {
            2.0 * rng.uniform() - 1.0
        }
        fn evaluate(&self, _: usize, path: &[f64], _: Option<f64>) -> f64 {
            path[0]
        }
    }

    /// f_0(y, gamma) = gamma, f_1 = 3.
    struct ConstantInner;
    impl NestedProblem for ConstantInner {
        type Value = f64;
        fn depth(&self) -> usize {
            1
        }
        fn sample(&self, _: usize, _: &[f64], rng: &mut RngStream) -> f64 {
            rng.uniform()
        }
        fn evaluate(&self, level: usize, _: &[f64], inner: Option<f64>) -> f64 {
            if level == 0 {
                inner.unwrap()
            } else {
                3.0
            }
        }
    }

    struct Constant;
    impl NestedProblem for Constant {
        type Value = ();
        fn depth(&self) -> usize {
            0
        }
        fn sample(&self, _: usize, _: &[()], _: &mut RngStream) {}
        fn evaluate(&self, _: usize, _: &[()], _: Option<f64>) -> f64 {
            3.0
        }
    }

    #[test]
    fn mc_constant_and_single_draw() {
        for n in [1, 10, 1000] {
            assert_eq!(mc_estimate(&Constant, n, RngStream::new(1)).unwrap(), 3.0);
        }
        let root = RngStream::new(4);
        let mut own = root.substream(0).substream(0);
        let y = 2.0 * own.uniform() - 1.0;
        assert_eq!(mc_estimate(&Linear, 1, root).unwrap(), y);
    }

    #[test]
    fn mc_uniform_mean() {
        let est = mc_estimate(&Linear, 1_000_000, RngStream::new(8)).unwrap();
        // sd of the mean is 0.577e-3
        assert!(est.abs() < 0.002, "{est}");
    }

    #[test]
    fn mc_errors() {
        assert!(mc_estimate(&Linear, 0, RngStream::new(0)).is_err());
        assert!(mc_estimate(&ConstantInner, 10, RngStream::new(0)).is_err());
        assert!(nmc_estimate(&ConstantInner, 10, &[0], RngStream::new(0)).is_err());
        assert!(nmc_estimate(&ConstantInner, 10, &[], RngStream::new(0)).is_err());
    }

    #[test]
    fn constant_inner_function_is_exact() {
        assert_eq!(nmc_estimate(&ConstantInner, 50, &[7], RngStream::new(2)).unwrap(), 3.0);
    }

    #[test]
    fn constant_schedule_equals_fixed_bitwise() {
        let a = nmc_estimate(&ConstantInner, 100, &[5], RngStream::new(3)).unwrap();
        let b = onmc_estimate(&ConstantInner, 100, &[Schedule::Constant(5)], RngStream::new(3)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn online_budget_accounting() {
        let s = [Schedule::SqrtFloor(1)];
        let mut online = OnlineNmc::new(&ConstantInner, s.to_vec(), RngStream::new(0)).unwrap();
        for _ in 0..4 {
            online.step();
        }
        // budgets 1, 2, 2, 2
        assert_eq!(online.cost(), 7);
        assert_eq!(onmc_outer_for_budget(&s, 7), (4, 7));
        assert_eq!(onmc_outer_for_budget(&s, 8), (4, 7));
        assert_eq!(onmc_outer_for_budget(&s, 0), (1, 1));
        assert_eq!(onmc_outer_for_budget(&[Schedule::Constant(10)], 1000), (100, 1000));
    }
}
