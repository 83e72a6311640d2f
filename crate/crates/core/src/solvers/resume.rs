use crate::error::{Error, Result};
use crate::operator::ProblemSpec;

use super::{adaptive, baselines, feg, MethodSpec, StopReason, Trace};

/// Continues `trace` on `problem` for `extra` more iterations.
///
/// The result is bitwise identical to a single run of the combined length.
/// A trace that stopped at a stationary point is returned unchanged.
pub fn resume(problem: &ProblemSpec, trace: &Trace, extra: usize) -> Result<Trace> {
    if trace.stop_reason == StopReason::Stationary || extra == 0 {
        return Ok(trace.clone());
    }
    trace.z0().ensure_dim(problem.dim())?;
    if trace.iterates.len() != trace.iterations() + 1
        || trace.grad_norm_sq.len() != trace.iterates.len()
    {
        return Err(Error::Resume("trace lengths are inconsistent".into()));
    }
    let mut out = trace.clone();
    let target = trace.iterations() + extra;
    match &trace.method {
        MethodSpec::Feg { .. } => feg::continue_feg(problem, &mut out, target)?,
        MethodSpec::FegA { .. } => adaptive::continue_feg_a(&problem.operator, &mut out, target)?,
        MethodSpec::EgPlus { .. } => baselines::continue_eg_plus(problem, &mut out, target)?,
        MethodSpec::Eag { .. } => baselines::continue_eag(problem, &mut out, target)?,
        MethodSpec::SFeg { .. } => crate::stochastic::continue_sfeg(problem, &mut out, target)?,
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;
    use crate::problems::make_bilinear;
    use crate::solvers::{run_eag, run_feg, run_feg_a, EagVariant};

    fn z0() -> Point {
        Point::new(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn feg_split_equals_unsplit() {
        let prob = make_bilinear(1.0).unwrap();
        let first = run_feg(&prob, &z0(), 3).unwrap();
        let resumed = resume(&prob, &first, 3).unwrap();
        assert_eq!(resumed, run_feg(&prob, &z0(), 6).unwrap());
    }

    #[test]
    fn eag_v_split_equals_unsplit() {
        let prob = make_bilinear(1.0).unwrap();
        let first = run_eag(&prob, &z0(), 5, EagVariant::V).unwrap();
        let resumed = resume(&prob, &first, 5).unwrap();
        assert_eq!(resumed, run_eag(&prob, &z0(), 10, EagVariant::V).unwrap());
    }

    #[test]
    fn feg_a_split_equals_unsplit() {
        let prob = make_bilinear(1.0).unwrap();
        let first = run_feg_a(&prob.operator, &z0(), 10.0, 10.0, 0.1, 7).unwrap();
        let resumed = resume(&prob, &first, 13).unwrap();
        let whole = run_feg_a(&prob.operator, &z0(), 10.0, 10.0, 0.1, 20).unwrap();
        assert_eq!(resumed, whole);
    }

    #[test]
    fn feg_a_without_state_is_an_error() {
        let prob = make_bilinear(1.0).unwrap();
        let mut t = run_feg_a(&prob.operator, &z0(), 10.0, 10.0, 0.1, 4).unwrap();
        t.step_eta = None;
        assert!(matches!(resume(&prob, &t, 2), Err(Error::Resume(_))));
    }

    #[test]
    fn stationary_trace_is_unchanged() {
        let prob = make_bilinear(1.0).unwrap();
        let t = run_feg(&prob, &Point::zeros(2), 4).unwrap();
        assert_eq!(resume(&prob, &t, 10).unwrap(), t);
    }
}
