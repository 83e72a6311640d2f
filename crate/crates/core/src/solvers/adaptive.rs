use crate::error::{Error, Result};
use crate::operator::OperatorHandle;
use crate::point::{vector_combine, Point};

use super::engine::{anchored_half, anchored_next, is_fixed_point};
use super::{check_iters, MethodSpec, StopReason, Trace};

/// Cap on the total number of step-size shrinkages in one run.
pub const MAX_SHRINKS: u64 = 1_000_000;

/// Multiple of machine epsilon allowed for rounding in the two line-search
/// tests. Without it, once `z_{k+1} - z_{k+1/2}` reaches the rounding level of
/// the iterates the Lipschitz test compares noise and shrinks `τ` below
/// `(1-δ)/L`.
const ROUNDING_SLACK: f64 = 32.0 * f64::EPSILON;

/// `‖Fw - Fz‖ <= ‖w - z‖ / τ`, up to the rounding of both differences.
fn lipschitz_ok(w: &Point, fw: &Point, z: &Point, fz: &Point, tau: f64) -> bool {
    let slack = ROUNDING_SLACK * (fw.norm() + fz.norm() + (w.norm() + z.norm()) / tau);
    fw.sub(fz).norm() <= w.sub(z).norm() / tau + slack
}

/// `<Fw - Fz, w - z> >= (η - τ)/2 ‖Fw - Fz‖²`, up to the same rounding.
fn comonotone_ok(w: &Point, fw: &Point, z: &Point, fz: &Point, half_gap: f64) -> bool {
    let (df, dz) = (fw.sub(fz), w.sub(z));
    let (ef, ez) = (ROUNDING_SLACK * (fw.norm() + fz.norm()), ROUNDING_SLACK * (w.norm() + z.norm()));
    let dfn = df.norm();
    let slack = dfn * ez + dz.norm() * ef + 2.0 * half_gap.abs() * dfn * ef;
    df.dot(&dz) >= half_gap * dfn * dfn - slack
}

/// FEG with backtracking on `τ` (local Lipschitz test) and `η` (local
/// comonotonicity test). Uses no knowledge of `L` or `ρ`.
///
/// `tau_init` is `τ_{-1}` and `eta_init` is `η_0`. Every operator evaluation,
/// including rejected candidates, is counted in `oracle_calls`.
pub fn run_feg_a(
    op: &OperatorHandle,
    z0: &Point,
    tau_init: f64,
    eta_init: f64,
    delta: f64,
    iters: usize,
) -> Result<Trace> {
    if !(tau_init > 0.0 && tau_init.is_finite()) {
        return Err(Error::param("tau_init", format!("must be positive, got {tau_init}")));
    }
    if !(eta_init > 0.0 && eta_init.is_finite()) {
        return Err(Error::param("eta_init", format!("must be positive, got {eta_init}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    check_iters(iters)?;
    z0.ensure_dim(op.dim())?;
    let fz0 = op.eval(z0)?;
    let method = MethodSpec::FegA {
        tau_init,
        eta_init,
        delta,
    };
    let mut trace = Trace::start(method, z0.clone(), &fz0);
    trace.step_tau = Some(Vec::new());
    trace.step_eta = Some(Vec::new());
    trace.shrinks = Some(Vec::new());
    trace.oracle_calls = 1;
    continue_feg_a(op, &mut trace, iters)?;
    Ok(trace)
}

fn non_finite_at(k: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite { coord, context } => Error::NonFiniteIterate {
            k,
            detail: format!("coordinate {coord} ({context})"),
        },
        other => other,
    }
}

pub(super) fn continue_feg_a(op: &OperatorHandle, trace: &mut Trace, target: usize) -> Result<()> {
    advance(op, trace, target, MAX_SHRINKS)
}

fn advance(op: &OperatorHandle, trace: &mut Trace, target: usize, cap: u64) -> Result<()> {
    let MethodSpec::FegA {
        tau_init,
        eta_init,
        delta,
    } = trace.method
    else {
        unreachable!("continue_feg_a on a non-FEG-A trace");
    };
    let missing = || Error::Resume("FEG-A trace lacks step-size state".into());
    if trace.step_tau.is_none() || trace.step_eta.is_none() || trace.shrinks.is_none() {
        return Err(missing());
    }
    let q = 1.0 - delta;
    let z0 = trace.z0().clone();
    let mut k = trace.iterations();
    if k > 0 && trace.step_tau.as_ref().map_or(0, Vec::len) != k {
        return Err(missing());
    }
    let mut fk = op.eval(trace.last()).map_err(non_finite_at(k))?;

    while k < target {
        if is_fixed_point(&fk, trace.last(), &z0, true) {
            trace.stop_reason = StopReason::Stationary;
            return Ok(());
        }
        let zk = trace.last().clone();
        let wrap = non_finite_at(k);
        let (half, next, fnext, tau, eta, shrinks) = if k == 0 {
            // smallest i_0 with tau * ||F zhat - F z0|| <= ||zhat - z0||
            let mut i: u64 = 0;
            loop {
                let tau = tau_init * q.powi(i as i32);
                let zhat = vector_combine(&[(1.0, &z0), (-tau, &fk)]).map_err(&wrap)?;
                let fhat = op.eval(&zhat).map_err(&wrap)?;
                trace.oracle_calls += 1;
                if lipschitz_ok(&zhat, &fhat, &z0, &fk, tau) {
                    break (z0.clone(), zhat, fhat, tau, eta_init, i);
                }
                i += 1;
                let total = trace.total_shrinks() + i;
                if total > cap {
                    return Err(Error::BacktrackingExhausted { k, shrinks: total });
                }
            }
        } else {
            let tau_prev = *trace.step_tau.as_ref().and_then(|v| v.last()).ok_or_else(missing)?;
            let eta_prev = *trace.step_eta.as_ref().and_then(|v| v.last()).ok_or_else(missing)?;
            let beta = 1.0 / (k as f64 + 1.0);
            let (mut i, mut j): (u64, u64) = (0, 0);
            loop {
                let tau = tau_prev * q.powi(i as i32);
                let eta = eta_prev * q.powi(j as i32);
                let half = anchored_half(&zk, &z0, &fk, beta, (1.0 - beta) * eta).map_err(&wrap)?;
                let fh = op.eval(&half).map_err(&wrap)?;
                let next = anchored_next(&zk, &z0, &fh, &fk, beta, tau, (1.0 - beta) * (eta - tau))
                    .map_err(&wrap)?;
                let fnext = op.eval(&next).map_err(&wrap)?;
                trace.oracle_calls += 2;

                let mut accepted = true;
                if !lipschitz_ok(&next, &fnext, &half, &fh, tau) {
                    i += 1;
                    accepted = false;
                }
                if !comonotone_ok(&next, &fnext, &zk, &fk, (eta - tau) / 2.0) {
                    j += 1;
                    accepted = false;
                }
                if accepted {
                    break (half, next, fnext, tau, eta, i + j);
                }
                let total = trace.total_shrinks() + i + j;
                if total > cap {
                    return Err(Error::BacktrackingExhausted { k, shrinks: total });
                }
            }
        };
        trace.step_tau.as_mut().ok_or_else(missing)?.push(tau);
        trace.step_eta.as_mut().ok_or_else(missing)?.push(eta);
        trace.shrinks.as_mut().ok_or_else(missing)?.push(shrinks);
        trace.grad_norm_sq.push(fnext.norm_sq());
        trace.half_iterates.push(half);
        trace.iterates.push(next);
        fk = fnext;
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
    fn bilinear_steps_stay_above_floors() {
        let prob = make_bilinear(1.0).unwrap();
        let t = run_feg_a(&prob.operator, &p(&[1.0, 0.0]), 10.0, 10.0, 0.1, 200).unwrap();
        let taus = t.step_tau.as_ref().unwrap();
        let etas = t.step_eta.as_ref().unwrap();
        assert_eq!(taus.len(), 200);
        assert!(taus.iter().all(|&tau| tau > 0.9));
        assert!(etas.iter().all(|&eta| eta > 0.81));
        assert!(taus.windows(2).all(|w| w[1] <= w[0]));
        assert!(etas.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rounding_level_steps_do_not_shrink_tau() {
        // converges until z_{k+1} - z_{k+1/2} is ~1e-18 while |F z_k| ~ 1e-2
        let prob = crate::problems::random_negative_comonotone(1000, 2, -0.05).unwrap();
        let l = prob.lipschitz.unwrap();
        let t = run_feg_a(&prob.operator, &p(&[1.0, -0.25]), 10.0, 10.0, 0.1, 1000).unwrap();
        assert!(t.step_tau.as_ref().unwrap().iter().all(|&tau| tau > 0.9 / l));
        assert!(t.shrinks.as_ref().unwrap()[2..].iter().all(|&s| s == 0));
    }

    #[test]
    fn oracle_calls_account_for_rejections() {
        let prob = make_bilinear(1.0).unwrap();
        let t = run_feg_a(&prob.operator, &p(&[1.0, 0.0]), 10.0, 10.0, 0.1, 30).unwrap();
        let s = t.shrinks.as_ref().unwrap();
        let i0 = s[0];
        // 1 for F z0, i0 + 1 for the initial search; each pass costs 2 and
        // a pass shrinks at least one of the two counters unless it is the last
        let passes_lower = (t.iterations() - 1) as u64;
        assert!(t.oracle_calls >= 1 + (i0 + 1) + 2 * passes_lower);
        assert_eq!(t.oracle_calls % 2, (1 + i0 + 1) % 2);
    }

    #[test]
    fn constant_operator_never_shrinks() {
        let op = OperatorHandle::from_fn(2, |_, out| {
            out[0] = 1.0;
            out[1] = -2.0;
        });
        let t = run_feg_a(&op, &p(&[0.0, 0.0]), 3.0, 5.0, 0.5, 10).unwrap();
        assert_eq!(t.total_shrinks(), 0);
        assert_eq!(t.oracle_calls, 1 + 1 + 2 * 9);
        assert!(t.step_tau.as_ref().unwrap().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn zero_operator_is_stationary() {
        let op = OperatorHandle::zero(2);
        let z0 = p(&[1.0, -1.0]);
        let t = run_feg_a(&op, &z0, 1.0, 1.0, 0.5, 10).unwrap();
        assert_eq!(t.stop_reason, StopReason::Stationary);
        assert!(t.iterates.iter().all(|z| *z == z0));
        assert_eq!(t.total_shrinks(), 0);
    }

    #[test]
    fn parameter_checks() {
        let op = OperatorHandle::zero(2);
        let z0 = p(&[1.0, -1.0]);
        assert!(run_feg_a(&op, &z0, 0.0, 1.0, 0.5, 3).is_err());
        assert!(run_feg_a(&op, &z0, 1.0, -1.0, 0.5, 3).is_err());
        assert!(run_feg_a(&op, &z0, 1.0, 1.0, 1.0, 3).is_err());
        assert!(run_feg_a(&op, &z0, 1.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn expanding_operator_exhausts_backtracking() {
        // F z = -z is (-1)-comonotone: at k = 1 the comonotonicity test needs
        // eta <= tau - 2, so only shrinks remain until rounding hides the step.
        let op = OperatorHandle::from_fn(1, |z, out| out[0] = -z[0]);
        let z0 = p(&[1.0]);
        let mut t = Trace::start(
            MethodSpec::FegA { tau_init: 1.0, eta_init: 1.0, delta: 0.5 },
            z0.clone(),
            &op.eval(&z0).unwrap(),
        );
        t.step_tau = Some(Vec::new());
        t.step_eta = Some(Vec::new());
        t.shrinks = Some(Vec::new());
        match advance(&op, &mut t, 5, 20).unwrap_err() {
            Error::BacktrackingExhausted { k, shrinks } => {
                assert_eq!(k, 1);
                assert_eq!(shrinks, 21);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
