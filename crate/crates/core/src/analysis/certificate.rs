use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::operator::ProblemSpec;
use crate::solvers::{EagVariant, MethodSpec, Trace};

use super::bounds::{bound_eag_c, bound_eag_v, bound_fega, bound_feg};
use super::potential::{check_schedule_admissible, first_potential_increase, trace_schedule, PotentialLedger, CERT_TOL};
use super::span::check_span;

/// Outcome of one certificate over a whole trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    Pass,
    Fail,
    Skipped,
}

impl CertStatus {
    fn from_flags(flags: impl Iterator<Item = Option<bool>>) -> Self {
        let mut seen = false;
        for f in flags.flatten() {
            if !f {
                return CertStatus::Fail;
            }
            seen = true;
        }
        if seen {
            CertStatus::Pass
        } else {
            CertStatus::Skipped
        }
    }

    pub fn is_fail(self) -> bool {
        self == CertStatus::Fail
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PassFlags {
    pub bound: Option<bool>,
    pub potential: Option<bool>,
}

/// Per-iterate certificate data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub k: usize,
    pub grad_norm_sq: f64,
    pub bound: Option<f64>,
    #[serde(rename = "V")]
    pub v: Option<f64>,
    pub pass_flags: PassFlags,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub method: String,
    pub problem: String,
    pub potential: CertStatus,
    pub bound: CertStatus,
    pub span: CertStatus,
    pub schedule_admissible: Option<bool>,
    pub records: Vec<CertificateRecord>,
}

impl CertificateReport {
    pub fn any_failed(&self) -> bool {
        self.potential.is_fail() || self.bound.is_fail() || self.span.is_fail()
    }
}

/// The closed-form bound matching the trace's method at every `k`, when one
/// applies (`None` for `k = 0` and when the bound's hypotheses are unavailable).
pub fn bound_series(problem: &ProblemSpec, trace: &Trace) -> Result<Option<Vec<Option<f64>>>> {
    let Some(d) = problem.distance_to_solution(trace.z0()) else {
        return Ok(None);
    };
    let n = trace.iterates.len();
    let series = |f: &dyn Fn(usize) -> Result<f64>| -> Result<Option<Vec<Option<f64>>>> {
        let mut out = vec![None];
        for k in 1..n {
            out.push(Some(f(k)?));
        }
        Ok(Some(out))
    };
    match trace.method {
        MethodSpec::Feg { lipschitz, rho } => series(&|k| bound_feg(lipschitz, rho, d, k)),
        MethodSpec::FegA { delta, .. } => match (problem.lipschitz, problem.comonotone) {
            (Some(l), Some(rho)) if rho > -(1.0 - delta) / (2.0 * l) => {
                series(&|k| bound_fega(l, rho, delta, d, k))
            }
            _ => Ok(None),
        },
        MethodSpec::Eag { variant, lipschitz } => match variant {
            EagVariant::C => series(&|k| bound_eag_c(lipschitz, d, k)),
            EagVariant::V => series(&|k| bound_eag_v(lipschitz, d, k)),
        },
        MethodSpec::EgPlus { .. } | MethodSpec::SFeg { .. } => Ok(None),
    }
}

/// `g <= (1 + 1e-9) bound`.
pub fn within_bound(g: f64, bound: f64) -> bool {
    g <= (1.0 + CERT_TOL) * bound
}

/// Runs the bound, potential and span certificates on a deterministic trace.
///
/// Noisy traces only get the bound column (which is an expectation bound,
/// checked by Monte Carlo instead), so their certificates are skipped.
pub fn certify(problem: &ProblemSpec, trace: &Trace, exec: Execution) -> Result<CertificateReport> {
    let n = trace.iterates.len();
    let noisy = matches!(trace.method, MethodSpec::SFeg { .. });
    let bounds = bound_series(problem, trace)?;

    let (values, admissible) = if trace.method.is_class_feg() && !noisy {
        let mut ledger = PotentialLedger::for_trace(trace, n)?;
        ledger.fill(problem, trace, exec)?;
        let (sched, l_seq) = trace_schedule(trace, n)?;
        let ok = n < 2 || check_schedule_admissible(&sched, &l_seq, n - 1);
        (Some(ledger.v), Some(ok))
    } else {
        (None, None)
    };

    let records: Vec<CertificateRecord> = (0..n)
        .map(|k| {
            let g = trace.grad_norm_sq[k];
            let bound = bounds.as_ref().and_then(|b| b[k]);
            let v = values.as_ref().map(|v| v[k]);
            let potential = values.as_ref().and_then(|v| {
                (k >= 1).then(|| v[k] <= v[k - 1] + CERT_TOL * (1.0 + v[k - 1].abs()))
            });
            CertificateRecord {
                k,
                grad_norm_sq: g,
                bound,
                v,
                pass_flags: PassFlags {
                    bound: bound.map(|b| within_bound(g, b)),
                    potential,
                },
            }
        })
        .collect();

    let bound = CertStatus::from_flags(records.iter().map(|r| r.pass_flags.bound));
    let mut potential = CertStatus::from_flags(records.iter().map(|r| r.pass_flags.potential));
    if admissible == Some(false) {
        potential = CertStatus::Fail;
    }
    debug_assert_eq!(
        potential == CertStatus::Fail && admissible != Some(false),
        values.as_ref().and_then(|v| first_potential_increase(v)).is_some()
    );
    let span = if noisy {
        CertStatus::Skipped
    } else if check_span(trace, &problem.operator) {
        CertStatus::Pass
    } else {
        CertStatus::Fail
    };
    Ok(CertificateReport {
        method: trace.method.selector().to_string(),
        problem: problem.label.clone(),
        potential,
        bound,
        span,
        schedule_admissible: admissible,
        records,
    })
}
