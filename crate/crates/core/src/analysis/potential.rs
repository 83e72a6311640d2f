use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::operator::ProblemSpec;
use crate::solvers::{MethodSpec, StepSchedule, Trace};

/// Relative tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Relative tolerance for certificate inequalities.
pub const CERT_TOL: f64 = 1e-9;

/// Local Lipschitz constants `L_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LipschitzSeq {
    Constant(f64),
    Table(Vec<f64>),
}

impl LipschitzSeq {
    pub fn get(&self, k: usize) -> Result<f64> {
        match self {
            LipschitzSeq::Constant(l) => Ok(*l),
            LipschitzSeq::Table(t) => t.get(k).copied().ok_or(Error::IndexOutOfRange {
                index: k,
                len: t.len(),
            }),
        }
    }
}

/// `b_k`: `b_0 = 0`, `b_1 = 1`, `b_{k+1} = b_k/(1−β_k)`.
pub fn b_coefficient(sched: &StepSchedule, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let mut b = 1.0;
    for j in 1..k {
        b /= 1.0 - sched.beta(j)?;
    }
    Ok(b)
}

fn a_from(sched: &StepSchedule, l_seq: &LipschitzSeq, k: usize, b: f64) -> Result<f64> {
    let alpha = sched.alpha(k)?;
    if k == 0 {
        let l0 = l_seq.get(0)?;
        return Ok(alpha * (l0 * l0 * alpha * alpha - 1.0) / 2.0);
    }
    let beta = sched.beta(k)?;
    let rho = sched.rho(k)?;
    Ok(b * (1.0 - beta) / (2.0 * beta) * (alpha + 2.0 * rho) - b * rho)
}

/// Potential coefficients `(a_k, b_k)`.
pub fn potential_coefficients(sched: &StepSchedule, l_seq: &LipschitzSeq, k: usize) -> Result<(f64, f64)> {
    let b = b_coefficient(sched, k)?;
    Ok((a_from(sched, l_seq, k, b)?, b))
}

/// Whether `sched` satisfies the hypotheses of the potential lemma on `0..=K`:
/// `β_0 = 1`, `β_k ∈ (0,1)`, `α_k ∈ (0, 1/L_k]`, and the coefficient inequality
/// between consecutive indices, each to relative tolerance `1e-12`.
pub fn check_schedule_admissible(sched: &StepSchedule, l_seq: &LipschitzSeq, iters: usize) -> bool {
    admissible(sched, l_seq, iters).unwrap_or(false)
}

fn admissible(sched: &StepSchedule, l_seq: &LipschitzSeq, iters: usize) -> Result<bool> {
    if iters == 0 {
        return Ok(false);
    }
    if (sched.beta(0)? - 1.0).abs() > IDENTITY_TOL {
        return Ok(false);
    }
    let coef = |k: usize| -> Result<f64> {
        let (alpha, beta, rho) = (sched.alpha(k)?, sched.beta(k)?, sched.rho(k)?);
        Ok((alpha + 2.0 * rho) / (2.0 * beta) - rho)
    };
    for k in 0..=iters {
        let (alpha, beta, l) = (sched.alpha(k)?, sched.beta(k)?, l_seq.get(k)?);
        if k >= 1 && !(beta > 0.0 && beta < 1.0) {
            return Ok(false);
        }
        if !(alpha > 0.0 && alpha * l <= 1.0 + IDENTITY_TOL) {
            return Ok(false);
        }
    }
    for k in 0..iters {
        let (alpha, beta, rho) = (sched.alpha(k + 1)?, sched.beta(k + 1)?, sched.rho(k + 1)?);
        let lhs = (1.0 - beta) / (2.0 * beta) * (alpha + 2.0 * rho) - rho;
        let rhs = coef(k)?;
        if lhs > rhs + IDENTITY_TOL * (1.0 + rhs.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coefficients `a_k`, `b_k` and (optionally) potential values `V_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialLedger {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub v: Vec<f64>,
    pub schedule: StepSchedule,
    pub lipschitz: LipschitzSeq,
}

impl PotentialLedger {
    /// Coefficients for `k < n`, with `b` computed by its recursion.
    pub fn from_schedule(sched: &StepSchedule, l_seq: &LipschitzSeq, n: usize) -> Result<Self> {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut bk = 0.0;
        for k in 0..n {
            bk = match k {
                0 => 0.0,
                1 => 1.0,
                _ => bk / (1.0 - sched.beta(k - 1)?),
            };
            a.push(a_from(sched, l_seq, k, bk)?);
            b.push(bk);
        }
        Ok(PotentialLedger {
            a,
            b,
            v: Vec::new(),
            schedule: sched.clone(),
            lipschitz: l_seq.clone(),
        })
    }

    /// The schedule and `L_k` that a Class FEG trace instantiates, covering `k < n`.
    ///
    /// FEG uses `α = 1/L` and constant `L_k = L`; FEG-A uses `α_k = τ_k`,
    /// `ρ_k = (η_k − τ_k)/2`, `L_k = 1/τ_k`, with the last committed pair
    /// carried forward past the final step.
    pub fn for_trace(trace: &Trace, n: usize) -> Result<Self> {
        let (sched, l_seq) = trace_schedule(trace, n)?;
        Self::from_schedule(&sched, &l_seq, n)
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `V_k = a_k ||F z_k||² − b_k <F z_k, z_0 − z_k>`, with a fresh evaluation of `F z_k`.
    pub fn potential(&self, problem: &ProblemSpec, trace: &Trace, k: usize) -> Result<f64> {
        evaluate_potential(trace, self, problem, k)
    }

    /// Fills `v` for every iterate of `trace`.
    pub fn fill(&mut self, problem: &ProblemSpec, trace: &Trace, exec: Execution) -> Result<()> {
        let n = trace.iterates.len().min(self.len());
        let v = map_indexed(n, exec, |k| evaluate_potential(trace, self, problem, k));
        self.v = v.into_iter().collect::<Result<Vec<f64>>>()?;
        Ok(())
    }
}

pub(crate) fn trace_schedule(trace: &Trace, n: usize) -> Result<(StepSchedule, LipschitzSeq)> {
    match &trace.method {
        MethodSpec::Feg { lipschitz, rho } => {
            Ok((StepSchedule::feg(*lipschitz, *rho)?, LipschitzSeq::Constant(*lipschitz)))
        }
        MethodSpec::SFeg { lipschitz, .. } => {
            Ok((StepSchedule::feg(*lipschitz, 0.0)?, LipschitzSeq::Constant(*lipschitz)))
        }
        MethodSpec::FegA { tau_init, eta_init, .. } => {
            let missing = || Error::param("trace", "FEG-A trace lacks step sizes");
            let taus = trace.step_tau.as_ref().ok_or_else(missing)?;
            let etas = trace.step_eta.as_ref().ok_or_else(missing)?;
            // a run stopped at z0 never took a step
            let tau_last = taus.last().copied().unwrap_or(*tau_init);
            let eta_last = etas.last().copied().unwrap_or(*eta_init);
            let tau_at = |k: usize| taus.get(k).copied().unwrap_or(tau_last);
            let eta_at = |k: usize| etas.get(k).copied().unwrap_or(eta_last);
            let alpha: Vec<f64> = (0..n).map(tau_at).collect();
            let rho: Vec<f64> = (0..n).map(|k| (eta_at(k) - tau_at(k)) / 2.0).collect();
            let beta: Vec<f64> = (0..n).map(|k| 1.0 / (k as f64 + 1.0)).collect();
            let lips = alpha.iter().map(|t| 1.0 / t).collect();
            Ok((
                StepSchedule::Tabulated { alpha, beta, rho },
                LipschitzSeq::Table(lips),
            ))
        }
        other => Err(Error::param(
            "trace",
            format!("method `{}` has no potential certificate", other.selector()),
        )),
    }
}

/// `V_k` for iterate `k` of `trace`, using one fresh operator evaluation.
pub fn evaluate_potential(
    trace: &Trace,
    ledger: &PotentialLedger,
    problem: &ProblemSpec,
    k: usize,
) -> Result<f64> {
    let zk = trace.iterates.get(k).ok_or(Error::IndexOutOfRange {
        index: k,
        len: trace.iterates.len(),
    })?;
    let (a, b) = match (ledger.a.get(k), ledger.b.get(k)) {
        (Some(a), Some(b)) => (*a, *b),
        _ => {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: ledger.len(),
            })
        }
    };
    let fz = problem.operator.eval(zk)?;
    Ok(a * fz.norm_sq() - b * fz.dot(&trace.z0().sub(zk)))
}

/// Index of the first `k >= 1` with `V_k > V_{k−1} + 1e-9 (1 + |V_{k−1}|)`.
pub fn first_potential_increase(v: &[f64]) -> Option<usize> {
    (1..v.len()).find(|&k| v[k] > v[k - 1] + CERT_TOL * (1.0 + v[k - 1].abs()))
}
