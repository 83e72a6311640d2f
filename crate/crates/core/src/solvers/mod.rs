//! The Class FEG engine and the named methods built on it, plus the
//! extragradient baselines.

mod adaptive;
mod baselines;
mod engine;
mod feg;
mod resume;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::stochastic::NoiseModel;

pub use adaptive::{run_feg_a, MAX_SHRINKS};
pub use baselines::{eag_v_alphas, run_eag, run_eg, run_eg_plus};
pub use engine::class_feg_step;
pub use feg::{run_feg, run_feg_with};
pub use resume::resume;

pub(crate) use engine::{drive, ClassFeg, ExactOracle, Oracle};

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIters,
    /// `||F z_k|| < 1e-14` at the start of an iteration.
    Stationary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EagVariant {
    /// Constant step `1/(8L)`.
    C,
    /// Recursively varying step starting at `0.618/L`.
    V,
}

/// The method (and its parameters) that produced a trace; enough to resume it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodSpec {
    Feg { lipschitz: f64, rho: f64 },
    FegA { tau_init: f64, eta_init: f64, delta: f64 },
    EgPlus { alpha: f64, beta: f64 },
    Eag { variant: EagVariant, lipschitz: f64 },
    SFeg { lipschitz: f64, noise: NoiseModel, trial: u64 },
}

impl MethodSpec {
    /// CLI selector for this method.
    pub fn selector(&self) -> &'static str {
        match self {
            MethodSpec::Feg { .. } => "feg",
            MethodSpec::FegA { .. } => "feg-a",
            MethodSpec::EgPlus { beta, .. } if *beta == 1.0 => "eg",
            MethodSpec::EgPlus { .. } => "eg+",
            MethodSpec::Eag { variant: EagVariant::C, .. } => "eag-c",
            MethodSpec::Eag { variant: EagVariant::V, .. } => "eag-v",
            MethodSpec::SFeg { .. } => "s-feg",
        }
    }

    /// Whether the method belongs to Class FEG (and so has a potential certificate).
    pub fn is_class_feg(&self) -> bool {
        matches!(
            self,
            MethodSpec::Feg { .. } | MethodSpec::FegA { .. } | MethodSpec::SFeg { .. }
        )
    }
}

/// Iterate history of a run.
///
/// `iterates[k]` is `z_k`, `half_iterates[k]` is `z_{k+1/2}` and
/// `grad_norm_sq[k]` is `||F z_k||²` (always the exact operator, even for noisy runs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub method: MethodSpec,
    pub iterates: Vec<Point>,
    pub half_iterates: Vec<Point>,
    pub grad_norm_sq: Vec<f64>,
    /// Committed `τ_k` (FEG-A only).
    pub step_tau: Option<Vec<f64>>,
    /// Committed `η_k` (FEG-A only).
    pub step_eta: Option<Vec<f64>>,
    /// Cached step sizes `α_k` (EAG-V only).
    pub step_alpha: Option<Vec<f64>>,
    /// Backtracking shrinkages per iteration, `i_k + j_k` (FEG-A only).
    pub shrinks: Option<Vec<u64>>,
    pub oracle_calls: u64,
    pub stop_reason: StopReason,
}

impl Trace {
    pub(crate) fn start(method: MethodSpec, z0: Point, fz0: &Point) -> Self {
        Trace {
            method,
            iterates: vec![z0],
            half_iterates: Vec::new(),
            grad_norm_sq: vec![fz0.norm_sq()],
            step_tau: None,
            step_eta: None,
            step_alpha: None,
            shrinks: None,
            oracle_calls: 0,
            stop_reason: StopReason::MaxIters,
        }
    }

    pub fn z0(&self) -> &Point {
        &self.iterates[0]
    }

    /// Number of completed iterations (`K` when run to completion).
    pub fn iterations(&self) -> usize {
        self.half_iterates.len()
    }

    pub fn last(&self) -> &Point {
        self.iterates.last().expect("trace always holds z_0")
    }

    pub fn final_grad_norm_sq(&self) -> f64 {
        *self.grad_norm_sq.last().expect("trace always holds z_0")
    }

    pub fn dim(&self) -> usize {
        self.z0().dim()
    }

    /// `min_{j <= k} ||F z_j||²` for each `k`.
    pub fn best_grad_norm_sq(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.grad_norm_sq
            .iter()
            .map(|&g| {
                best = best.min(g);
                best
            })
            .collect()
    }

    pub fn total_shrinks(&self) -> u64 {
        self.shrinks.as_ref().map_or(0, |s| s.iter().sum())
    }
}

/// Step coefficients `α_k, β_k, ρ_k` of Class FEG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepSchedule {
    /// `α_k = 1/L`, `β_k = 1/(k+1)`, `ρ_k = ρ`.
    Feg { lipschitz: f64, rho: f64 },
    /// Explicit finite tables indexed by `k`.
    Tabulated {
        alpha: Vec<f64>,
        beta: Vec<f64>,
        rho: Vec<f64>,
    },
}

impl StepSchedule {
    /// The FEG schedule; requires `ρ > −1/(2L)`.
    pub fn feg(lipschitz: f64, rho: f64) -> Result<Self> {
        check_feg_range(lipschitz, rho)?;
        Ok(StepSchedule::Feg { lipschitz, rho })
    }

    fn lookup(table: &[f64], k: usize, name: &str) -> Result<f64> {
        table
            .get(k)
            .copied()
            .ok_or_else(|| Error::ParameterRange(format!("schedule has no {name} at k={k}")))
    }

    pub fn alpha(&self, k: usize) -> Result<f64> {
        match self {
            StepSchedule::Feg { lipschitz, .. } => Ok(1.0 / lipschitz),
            StepSchedule::Tabulated { alpha, .. } => Self::lookup(alpha, k, "alpha"),
        }
    }

    pub fn beta(&self, k: usize) -> Result<f64> {
        match self {
            StepSchedule::Feg { .. } => Ok(1.0 / (k as f64 + 1.0)),
            StepSchedule::Tabulated { beta, .. } => Self::lookup(beta, k, "beta"),
        }
    }

    pub fn rho(&self, k: usize) -> Result<f64> {
        match self {
            StepSchedule::Feg { rho, .. } => Ok(*rho),
            StepSchedule::Tabulated { rho, .. } => Self::lookup(rho, k, "rho"),
        }
    }

    /// Number of indices the schedule is defined on (`None` if unbounded).
    pub fn len(&self) -> Option<usize> {
        match self {
            StepSchedule::Feg { .. } => None,
            StepSchedule::Tabulated { alpha, beta, rho } => {
                Some(alpha.len().min(beta.len()).min(rho.len()))
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }
}

pub(crate) fn check_feg_range(lipschitz: f64, rho: f64) -> Result<()> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::param("L", format!("must be positive, got {lipschitz}")));
    }
    if !rho.is_finite() || rho <= -1.0 / (2.0 * lipschitz) {
        return Err(Error::ParameterRange(format!(
            "rho = {rho} must exceed -1/(2L) = {}",
            -1.0 / (2.0 * lipschitz)
        )));
    }
    Ok(())
}

pub(crate) fn check_iters(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("K", "must be at least 1"));
    }
    Ok(())
}
