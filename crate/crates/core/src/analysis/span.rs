use crate::error::Result;
use crate::operator::OperatorHandle;
use crate::point::Point;
use crate::solvers::Trace;

const SPAN_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis grown by repeated Gram–Schmidt.
struct Basis {
    vectors: Vec<Vec<f64>>,
}

impl Basis {
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        r
    }

    fn push(&mut self, v: &[f64]) {
        let scale = norm(v);
        if scale == 0.0 {
            return;
        }
        let r = self.residual(v);
        let n = norm(&r);
        if n > RANK_TOL * scale {
            self.vectors.push(r.into_iter().map(|x| x / n).collect());
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest relative span residual over the trace; see [`check_span`].
pub fn span_residual(trace: &Trace, op: &OperatorHandle) -> Result<f64> {
    let z0 = trace.z0();
    let mut basis = Basis { vectors: Vec::new() };
    let mut worst = 0.0f64;
    let mut check = |basis: &Basis, z: &Point| {
        let d = z.sub(z0);
        let r = norm(&basis.residual(d.as_slice()));
        worst = worst.max(r / (1.0 + d.norm()));
    };
    basis.push(op.eval(z0)?.as_slice());
    for k in 0..trace.iterations() {
        let half = &trace.half_iterates[k];
        check(&basis, half);
        basis.push(op.eval(half)?.as_slice());
        let next = &trace.iterates[k + 1];
        check(&basis, next);
        basis.push(op.eval(next)?.as_slice());
    }
    Ok(worst)
}

/// Whether every half-iterate and iterate lies in `z_0` plus the span of the
/// operator values at all previously queried points, to `1e-8 (1 + ||z − z_0||)`.
pub fn check_span(trace: &Trace, op: &OperatorHandle) -> bool {
    span_residual(trace, op).is_ok_and(|r| r <= SPAN_TOL)
}
