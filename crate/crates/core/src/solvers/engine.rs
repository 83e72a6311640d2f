use crate::error::{Error, Result};
use crate::operator::{OperatorHandle, STATIONARY_TOL};
use crate::point::{vector_combine, Point};

use super::{StepSchedule, StopReason, Trace};

/// Source of operator values for a run.
///
/// `exact` is the true `F z`; `perturb` turns it into the value an update
/// actually uses (identity for deterministic runs).
pub(crate) trait Oracle {
    fn exact(&self, z: &Point) -> Result<Point>;
    fn perturb(&self, exact: Point, k: usize, half: bool) -> Result<Point>;
}

pub(crate) struct ExactOracle<'a>(pub &'a OperatorHandle);

impl Oracle for ExactOracle<'_> {
    fn exact(&self, z: &Point) -> Result<Point> {
        self.0.eval(z)
    }
    fn perturb(&self, exact: Point, _k: usize, _half: bool) -> Result<Point> {
        Ok(exact)
    }
}

/// One two-evaluation update `z_k -> (z_{k+1/2}, z_{k+1})`.
pub(crate) trait Stepper {
    fn half(&self, k: usize, zk: &Point, z0: &Point, fk: &Point) -> Result<Point>;
    fn next(&self, k: usize, zk: &Point, z0: &Point, fk: &Point, fh: &Point) -> Result<Point>;

    /// Whether the update pulls toward `z_0`.
    fn anchored(&self) -> bool {
        true
    }
}

/// A zero of `F` is only a fixed point of an anchored update when it is also
/// the anchor; elsewhere the anchor term keeps moving the iterate.
pub(crate) fn is_fixed_point(fz: &Point, zk: &Point, z0: &Point, anchored: bool) -> bool {
    fz.norm_sq() < STATIONARY_TOL * STATIONARY_TOL
        && (!anchored || zk.distance(z0) <= STATIONARY_TOL * (1.0 + z0.norm()))
}

fn at_iteration(k: usize, e: Error) -> Error {
    match e {
        Error::NonFinite { coord, context } => Error::NonFiniteIterate {
            k,
            detail: format!("coordinate {coord} ({context})"),
        },
        other => other,
    }
}

/// Combination that drops terms with an exactly zero coefficient, so that
/// `β = 1` reproduces the anchor bitwise.
fn combine(terms: &[(f64, &Point)]) -> Result<Point> {
    let kept: Vec<(f64, &Point)> = terms.iter().copied().filter(|(c, _)| *c != 0.0).collect();
    if kept.is_empty() {
        return Ok(Point::zeros(terms[0].1.dim()));
    }
    vector_combine(&kept)
}

/// `(1−β) z_k + β z_0 − c F z_k`.
pub(crate) fn anchored_half(zk: &Point, z0: &Point, fk: &Point, beta: f64, c: f64) -> Result<Point> {
    combine(&[(1.0 - beta, zk), (beta, z0), (-c, fk)])
}

/// `(1−β) z_k + β z_0 − α F z_{k+1/2} − c F z_k`.
pub(crate) fn anchored_next(
    zk: &Point,
    z0: &Point,
    fh: &Point,
    fk: &Point,
    beta: f64,
    alpha: f64,
    c: f64,
) -> Result<Point> {
    combine(&[(1.0 - beta, zk), (beta, z0), (-alpha, fh), (-c, fk)])
}

/// Class FEG step with the coefficients of `sched` at index `k`.
pub(crate) struct ClassFeg<'a>(pub &'a StepSchedule);

impl ClassFeg<'_> {
    fn coeffs(&self, k: usize) -> Result<(f64, f64, f64)> {
        Ok((self.0.alpha(k)?, self.0.beta(k)?, self.0.rho(k)?))
    }
}

impl Stepper for ClassFeg<'_> {
    fn half(&self, k: usize, zk: &Point, z0: &Point, fk: &Point) -> Result<Point> {
        let (alpha, beta, rho) = self.coeffs(k)?;
        anchored_half(zk, z0, fk, beta, (1.0 - beta) * (alpha + 2.0 * rho))
    }
    fn next(&self, k: usize, zk: &Point, z0: &Point, fk: &Point, fh: &Point) -> Result<Point> {
        let (alpha, beta, rho) = self.coeffs(k)?;
        anchored_next(zk, z0, fh, fk, beta, alpha, (1.0 - beta) * 2.0 * rho)
    }
}

/// One Class FEG step from `z_k`, returning `(z_{k+1/2}, z_{k+1})`.
///
/// Uses exactly two operator evaluations: `F z_k` (reused in both lines) and `F z_{k+1/2}`.
pub fn class_feg_step(
    zk: &Point,
    z0: &Point,
    op: &OperatorHandle,
    k: usize,
    sched: &StepSchedule,
) -> Result<(Point, Point)> {
    zk.ensure_dim(op.dim())?;
    z0.ensure_dim(op.dim())?;
    let step = ClassFeg(sched);
    let inner = || -> Result<(Point, Point)> {
        let fk = op.eval(zk)?;
        let half = step.half(k, zk, z0, &fk)?;
        let fh = op.eval(&half)?;
        let next = step.next(k, zk, z0, &fk, &fh)?;
        Ok((half, next))
    };
    inner().map_err(|e| at_iteration(k, e))
}

/// Runs `stepper` until the trace holds `target` iterations or a stationary
/// point is reached. Resumes from whatever the trace already contains.
pub(crate) fn drive<S: Stepper, O: Oracle>(
    stepper: &S,
    oracle: &O,
    trace: &mut Trace,
    target: usize,
) -> Result<()> {
    let z0 = trace.z0().clone();
    let mut k = trace.iterations();
    let mut fz = oracle.exact(trace.last()).map_err(|e| at_iteration(k, e))?;
    while k < target {
        if is_fixed_point(&fz, trace.last(), &z0, stepper.anchored()) {
            trace.stop_reason = StopReason::Stationary;
            return Ok(());
        }
        let zk = trace.last().clone();
        let step = || -> Result<(Point, Point, Point)> {
            let fk = oracle.perturb(fz.clone(), k, false)?;
            let half = stepper.half(k, &zk, &z0, &fk)?;
            let fh = oracle.perturb(oracle.exact(&half)?, k, true)?;
            let next = stepper.next(k, &zk, &z0, &fk, &fh)?;
            let fnext = oracle.exact(&next)?;
            Ok((half, next, fnext))
        };
        let (half, next, fnext) = step().map_err(|e| at_iteration(k, e))?;
        trace.oracle_calls += 2;
        trace.grad_norm_sq.push(fnext.norm_sq());
        trace.half_iterates.push(half);
        trace.iterates.push(next);
        fz = fnext;
        k += 1;
    }
    trace.stop_reason = StopReason::MaxIters;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_bilinear;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn first_step_keeps_anchor_exactly() {
        let prob = make_bilinear(1.0).unwrap();
        let z0 = p(&[0.3, -0.7]);
        for rho in [-0.4, 0.0, 2.0] {
            let sched = StepSchedule::feg(1.0, rho).unwrap();
            let (half, next) = class_feg_step(&z0, &z0, &prob.operator, 0, &sched).unwrap();
            assert_eq!(half, z0);
            let fz0 = prob.operator.eval(&z0).unwrap();
            assert_eq!(next, vector_combine(&[(1.0, &z0), (-1.0, &fz0)]).unwrap());
        }
    }

    #[test]
    fn bilinear_second_step() {
        let prob = make_bilinear(1.0).unwrap();
        let sched = StepSchedule::feg(1.0, 0.0).unwrap();
        let (half, next) =
            class_feg_step(&p(&[1.0, 1.0]), &p(&[1.0, 0.0]), &prob.operator, 1, &sched).unwrap();
        assert_eq!(half.as_slice(), &[0.5, 1.0]);
        assert_eq!(next.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn zero_operator_is_a_fixed_point() {
        let op = OperatorHandle::zero(3);
        let z = p(&[1.0, 2.0, 3.0]);
        let sched = StepSchedule::feg(1.0, 0.3).unwrap();
        for k in 0..4 {
            let (half, next) = class_feg_step(&z, &z, &op, k, &sched).unwrap();
            assert_eq!(half, z);
            assert_eq!(next, z);
        }
    }

    #[test]
    fn overflow_reports_iteration() {
        let op = OperatorHandle::from_fn(1, |z, out| out[0] = z[0] * 1e300);
        let sched = StepSchedule::feg(1e-300, 0.0).unwrap();
        let err = class_feg_step(&p(&[1e10]), &p(&[1.0]), &op, 3, &sched).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIterate { k: 3, .. }), "{err:?}");
    }
}
