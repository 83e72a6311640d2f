//! Noisy oracles, the variance schedule that yields an `ε`-accurate bound,
//! stochastic FEG, and Monte Carlo aggregation.

mod monte_carlo;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{OperatorHandle, ProblemSpec};
use crate::point::{vector_combine, Point};
use crate::solvers::{drive, MethodSpec, Oracle, StepSchedule, Trace};
use crate::solvers::check_iters;

pub use monte_carlo::{
    lemma_d2_checks, mean_and_stderr, monte_carlo_report, potential_gap_samples, run_sfeg_trials,
    D2Check, McRecord, STDERR_BAND,
};

/// Distribution of a single noise draw; each coordinate has variance `σ²/d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// `±sqrt(σ²/d)` with equal probability.
    Rademacher,
}

/// Total variance `σ²_{k/2}` per half-index `k` (`z_j` has half-index `2j`,
/// `z_{j+1/2}` has `2j+1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarianceSchedule {
    Constant { variance: f64 },
    /// `σ_0² = ε/6`, `σ_k² = ε/(6k)`, `σ²_{k+1/2} = ε/(6(k+1))` for `1 <= k < iters`.
    Epsilon { eps: f64, iters: usize },
    /// Explicit table indexed by half-index.
    Table { variances: Vec<f64> },
}

impl VarianceSchedule {
    pub fn constant(variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::param("variance", format!("must be nonnegative, got {variance}")));
        }
        Ok(VarianceSchedule::Constant { variance })
    }

    pub fn zero() -> Self {
        VarianceSchedule::Constant { variance: 0.0 }
    }

    /// `σ²` at `half_index`.
    pub fn variance(&self, half_index: usize) -> Result<f64> {
        let missing = Error::ScheduleMissing { half_index };
        let v = match self {
            VarianceSchedule::Constant { variance } => *variance,
            VarianceSchedule::Epsilon { eps, iters } => {
                let k = half_index / 2;
                if half_index == 0 {
                    eps / 6.0
                } else if k == 0 || k >= *iters {
                    return Err(missing);
                } else if half_index.is_multiple_of(2) {
                    eps / (6.0 * k as f64)
                } else {
                    eps / (6.0 * (k as f64 + 1.0))
                }
            }
            VarianceSchedule::Table { variances } => *variances.get(half_index).ok_or(missing)?,
        };
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param("variance", format!("negative or non-finite at {half_index}")));
        }
        Ok(v)
    }
}

/// The equality schedule under which the stochastic bound reduces to
/// `4L²D²/k² + ε`.
pub fn schedule_for_epsilon(eps: f64, iters: usize) -> Result<VarianceSchedule> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    check_iters(iters)?;
    Ok(VarianceSchedule::Epsilon { eps, iters })
}

/// Zero-mean oracle noise with a keyed, counter-based random stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub family: NoiseFamily,
    pub schedule: VarianceSchedule,
    pub seed: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, schedule: VarianceSchedule, seed: u64) -> Self {
        NoiseModel {
            family,
            schedule,
            seed,
        }
    }

    pub fn gaussian(schedule: VarianceSchedule, seed: u64) -> Self {
        Self::new(NoiseFamily::Gaussian, schedule, seed)
    }

    fn stream(&self, trial: u64, half_index: usize) -> ChaCha8Rng {
        let key = splitmix(splitmix(splitmix(self.seed) ^ trial) ^ half_index as u64);
        ChaCha8Rng::seed_from_u64(key)
    }

    /// The draw `ξ` for `(trial, half_index)` in dimension `dim`; `None` when `σ² = 0`.
    pub fn sample(&self, trial: u64, half_index: usize, dim: usize) -> Result<Option<Point>> {
        let var = self.schedule.variance(half_index)?;
        if var == 0.0 {
            return Ok(None);
        }
        let scale = (var / dim as f64).sqrt();
        let mut rng = self.stream(trial, half_index);
        let coords = (0..dim)
            .map(|_| match self.family {
                NoiseFamily::Gaussian => scale * rng.sample::<f64, _>(StandardNormal),
                NoiseFamily::Rademacher => {
                    if rng.random::<bool>() {
                        scale
                    } else {
                        -scale
                    }
                }
            })
            .collect();
        Point::new(coords).map(Some)
    }

    fn perturb(&self, exact: Point, trial: u64, half_index: usize) -> Result<Point> {
        match self.sample(trial, half_index, exact.dim())? {
            None => Ok(exact),
            Some(xi) => vector_combine(&[(1.0, &exact), (1.0, &xi)]),
        }
    }
}

/// `F z + ξ` with `ξ` drawn from the stream keyed by `(seed, trial, half_index)`.
pub fn noisy_eval(
    op: &OperatorHandle,
    noise: &NoiseModel,
    trial: u64,
    z: &Point,
    half_index: usize,
) -> Result<Point> {
    noise.perturb(op.eval(z)?, trial, half_index)
}

/// Half-index of the noise used at iteration `k`. At `k = 0` the half-point is
/// `z_0` itself, so its noisy value is the one drawn for `z_0`.
pub(crate) fn noise_index(k: usize, half: bool) -> usize {
    match (k, half) {
        (0, _) => 0,
        (k, false) => 2 * k,
        (k, true) => 2 * k + 1,
    }
}

struct NoisyOracle<'a> {
    op: &'a OperatorHandle,
    noise: &'a NoiseModel,
    trial: u64,
}

impl Oracle for NoisyOracle<'_> {
    fn exact(&self, z: &Point) -> Result<Point> {
        self.op.eval(z)
    }
    fn perturb(&self, exact: Point, k: usize, half: bool) -> Result<Point> {
        self.noise.perturb(exact, self.trial, noise_index(k, half))
    }
}

/// Stochastic FEG: FEG at `ρ = 0` driven by noisy operator values.
///
/// The trace records the exact `||F z_k||²`.
pub fn run_sfeg(
    problem: &ProblemSpec,
    noise: &NoiseModel,
    z0: &Point,
    iters: usize,
    trial: u64,
) -> Result<Trace> {
    let l = problem.require_lipschitz("s-feg")?;
    check_iters(iters)?;
    z0.ensure_dim(problem.dim())?;
    let fz0 = problem.operator.eval(z0)?;
    let method = MethodSpec::SFeg {
        lipschitz: l,
        noise: noise.clone(),
        trial,
    };
    let mut trace = Trace::start(method, z0.clone(), &fz0);
    continue_sfeg(problem, &mut trace, iters)?;
    Ok(trace)
}

pub(crate) fn continue_sfeg(problem: &ProblemSpec, trace: &mut Trace, target: usize) -> Result<()> {
    let MethodSpec::SFeg {
        lipschitz,
        ref noise,
        trial,
    } = trace.method
    else {
        unreachable!("continue_sfeg on a non-S-FEG trace");
    };
    let noise = noise.clone();
    let sched = StepSchedule::feg(lipschitz, 0.0)?;
    let oracle = NoisyOracle {
        op: &problem.operator,
        noise: &noise,
        trial,
    };
    drive(&crate::solvers::ClassFeg(&sched), &oracle, trace, target)
}

/// Lower bound on `E[V_k] − E[V_{k+1}]` for the stochastic FEG schedule.
pub fn expected_potential_gap_floor(
    sched: &StepSchedule,
    lipschitz: f64,
    sigmas: &VarianceSchedule,
    k: usize,
) -> Result<f64> {
    let l = lipschitz;
    if k == 0 {
        let a0 = sched.alpha(0)?;
        return Ok(-(l * l * a0 * a0 * a0 / 2.0 + l * a0 * a0) * sigmas.variance(0)?);
    }
    let b = crate::analysis::b_coefficient(sched, k)?;
    let (alpha, beta) = (sched.alpha(k)?, sched.beta(k)?);
    let s_k = sigmas.variance(2 * k)?;
    let s_half = sigmas.variance(2 * k + 1)?;
    Ok(-(b * alpha * (1.0 + 2.0 * l * alpha) / (2.0 * beta))
        * ((1.0 - beta) * s_k + s_half / (1.0 - beta)))
}
