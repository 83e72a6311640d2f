use crate::error::{Error, Result};
use crate::operator::ProblemSpec;
use crate::point::{vector_combine, Point};

use super::engine::{anchored_half, anchored_next, Stepper};
use super::{check_iters, drive, EagVariant, ExactOracle, MethodSpec, Trace};

struct EgPlus {
    alpha: f64,
    beta: f64,
}

impl Stepper for EgPlus {
    fn anchored(&self) -> bool {
        false
    }

    fn half(&self, _k: usize, zk: &Point, _z0: &Point, fk: &Point) -> Result<Point> {
        vector_combine(&[(1.0, zk), (-(self.alpha / self.beta), fk)])
    }
    fn next(&self, _k: usize, zk: &Point, _z0: &Point, _fk: &Point, fh: &Point) -> Result<Point> {
        vector_combine(&[(1.0, zk), (-self.alpha, fh)])
    }
}

/// EG+: `z_{k+1/2} = z_k − (α/β) F z_k`, `z_{k+1} = z_k − α F z_{k+1/2}`.
pub fn run_eg_plus(
    problem: &ProblemSpec,
    z0: &Point,
    iters: usize,
    alpha: f64,
    beta: f64,
) -> Result<Trace> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    check_iters(iters)?;
    z0.ensure_dim(problem.dim())?;
    let fz0 = problem.operator.eval(z0)?;
    let mut trace = Trace::start(MethodSpec::EgPlus { alpha, beta }, z0.clone(), &fz0);
    continue_eg_plus(problem, &mut trace, iters)?;
    Ok(trace)
}

/// Plain extragradient: EG+ with `β = 1` and `α = 1/L`.
pub fn run_eg(problem: &ProblemSpec, z0: &Point, iters: usize) -> Result<Trace> {
    let l = problem.require_lipschitz("eg")?;
    run_eg_plus(problem, z0, iters, 1.0 / l, 1.0)
}

pub(super) fn continue_eg_plus(problem: &ProblemSpec, trace: &mut Trace, target: usize) -> Result<()> {
    let MethodSpec::EgPlus { alpha, beta } = trace.method else {
        unreachable!("continue_eg_plus on a non-EG+ trace");
    };
    drive(&EgPlus { alpha, beta }, &ExactOracle(&problem.operator), trace, target)
}

/// `α_0, …, α_{n−1}` of the EAG-V recursion for Lipschitz constant `L`.
pub fn eag_v_alphas(lipschitz: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    extend_eag_v(lipschitz, &mut out, n)?;
    Ok(out)
}

fn extend_eag_v(l: f64, alphas: &mut Vec<f64>, n: usize) -> Result<()> {
    if alphas.is_empty() && n > 0 {
        alphas.push(0.618 / l);
    }
    while alphas.len() < n {
        let k = alphas.len() - 1;
        let a = alphas[k];
        let a2l2 = a * a * l * l;
        if a2l2 >= 1.0 {
            return Err(Error::ParameterRange(format!(
                "EAG-V recursion: alpha_{k}^2 L^2 = {a2l2} >= 1"
            )));
        }
        let kf = k as f64;
        let ratio = (kf + 2.0) * (kf + 2.0) / ((kf + 1.0) * (kf + 3.0));
        alphas.push(a / (1.0 - a2l2) * (1.0 - ratio * a2l2));
    }
    Ok(())
}

struct Eag<'a> {
    alphas: &'a [f64],
}

impl Eag<'_> {
    fn coeffs(&self, k: usize) -> (f64, f64) {
        (self.alphas[k], 1.0 / (k as f64 + 2.0))
    }
}

impl Stepper for Eag<'_> {
    fn half(&self, k: usize, zk: &Point, z0: &Point, fk: &Point) -> Result<Point> {
        let (alpha, beta) = self.coeffs(k);
        anchored_half(zk, z0, fk, beta, alpha)
    }
    fn next(&self, k: usize, zk: &Point, z0: &Point, fk: &Point, fh: &Point) -> Result<Point> {
        let (alpha, beta) = self.coeffs(k);
        anchored_next(zk, z0, fh, fk, beta, alpha, 0.0)
    }
}

/// Extra anchored gradient with `β_k = 1/(k+2)`; variant C uses `α_k = 1/(8L)`,
/// variant V the recursive schedule (cached in the trace).
pub fn run_eag(problem: &ProblemSpec, z0: &Point, iters: usize, variant: EagVariant) -> Result<Trace> {
    let l = problem.require_lipschitz("eag")?;
    check_iters(iters)?;
    z0.ensure_dim(problem.dim())?;
    let fz0 = problem.operator.eval(z0)?;
    let mut trace = Trace::start(MethodSpec::Eag { variant, lipschitz: l }, z0.clone(), &fz0);
    if variant == EagVariant::V {
        trace.step_alpha = Some(Vec::new());
    }
    continue_eag(problem, &mut trace, iters)?;
    Ok(trace)
}

pub(super) fn continue_eag(problem: &ProblemSpec, trace: &mut Trace, target: usize) -> Result<()> {
    let MethodSpec::Eag { variant, lipschitz } = trace.method else {
        unreachable!("continue_eag on a non-EAG trace");
    };
    let alphas = match variant {
        EagVariant::C => vec![1.0 / (8.0 * lipschitz); target],
        EagVariant::V => {
            let cached = trace
                .step_alpha
                .as_mut()
                .ok_or_else(|| Error::Resume("EAG-V trace lacks cached step sizes".into()))?;
            extend_eag_v(lipschitz, cached, target)?;
            cached.clone()
        }
    };
    drive(&Eag { alphas: &alphas }, &ExactOracle(&problem.operator), trace, target)
}
