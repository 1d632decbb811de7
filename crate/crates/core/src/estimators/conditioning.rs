use super::NestingQuery;
use crate::error::{Error, Result};
use crate::numerics::{LogWeight, RngStream};
use crate::ppl::{log_marginal_of, run_weighted, EmpiricalMeasure, Query, Trace};

/// Nested conditioning: the outer query conditions on the inner query's
/// partition function, estimated by `m` inner runs per outer sample.
///
/// The outer weight becomes `psi * p_hat / q`, where `p_hat` is the averaged
/// inner importance weight. The inner draws themselves are discarded, so
/// `complete` receives `&()`. Outer samples with a zero estimate keep weight zero.
pub fn nested_conditioning_estimate<O, Q>(
    outer: &O,
    inner: &Q,
    n0: u64,
    m: u64,
    rng: RngStream,
) -> Result<EmpiricalMeasure<O::Output>>
where
    O: NestingQuery<Draw = ()>,
    Q: Query<Input = O::InnerInput>,
{
    if n0 == 0 || m == 0 {
        return Err(Error::param("N0 and M must be >= 1"));
    }
    let mut atoms = Vec::with_capacity(n0 as usize);
    let mut logws = Vec::with_capacity(m as usize);
    for n in 0..n0 {
        let node = rng.substream(n);
        let mut trace = Trace::new(node.substream(0));
        let state = outer.prefix(&mut trace)?;
        let input = outer.inner_input(&state);
        logws.clear();
        let inner_root = node.substream(1);
        for j in 0..m {
            logws.push(run_weighted(inner, &input, inner_root.substream(j))?.logw);
        }
        let p_hat: LogWeight = log_marginal_of(&logws)?;
        trace.factor(p_hat);
        let mut tail = Trace::new(node.substream(2));
        let value = outer.complete(&state, &(), &mut tail)?;
        atoms.push((value, trace.log_weight() + tail.log_weight()));
    }
    EmpiricalMeasure::from_log_atoms(atoms)
}
