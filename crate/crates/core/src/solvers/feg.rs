use crate::error::Result;
use crate::operator::ProblemSpec;
use crate::point::Point;

use super::engine::ClassFeg;
use super::{check_feg_range, check_iters, drive, ExactOracle, MethodSpec, StepSchedule, Trace};

/// Fast extragradient: Class FEG with `α_k = 1/L`, `β_k = 1/(k+1)`, `ρ_k = ρ`.
///
/// Needs declared `L` and `ρ` with `ρ > −1/(2L)`.
pub fn run_feg(problem: &ProblemSpec, z0: &Point, iters: usize) -> Result<Trace> {
    let l = problem.require_lipschitz("feg")?;
    let rho = problem.require_comonotone("feg")?;
    run_feg_with(problem, z0, iters, l, rho)
}

/// FEG with explicitly supplied `L` and `ρ` instead of the declared constants.
pub fn run_feg_with(
    problem: &ProblemSpec,
    z0: &Point,
    iters: usize,
    l: f64,
    rho: f64,
) -> Result<Trace> {
    check_feg_range(l, rho)?;
    check_iters(iters)?;
    z0.ensure_dim(problem.dim())?;
    let fz0 = problem.operator.eval(z0)?;
    let mut trace = Trace::start(MethodSpec::Feg { lipschitz: l, rho }, z0.clone(), &fz0);
    continue_feg(problem, &mut trace, iters)?;
    Ok(trace)
}

pub(super) fn continue_feg(problem: &ProblemSpec, trace: &mut Trace, target: usize) -> Result<()> {
    let MethodSpec::Feg { lipschitz, rho } = trace.method else {
        unreachable!("continue_feg on a non-FEG trace");
    };
    let sched = StepSchedule::feg(lipschitz, rho)?;
    drive(&ClassFeg(&sched), &ExactOracle(&problem.operator), trace, target)
}
