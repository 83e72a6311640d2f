use serde::{Deserialize, Serialize};

use crate::analysis::PotentialLedger;
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::operator::ProblemSpec;
use crate::point::Point;
use crate::solvers::{MethodSpec, Trace};

use super::{run_sfeg, NoiseModel};

/// Number of standard errors allowed in statistical checks.
pub const STDERR_BAND: f64 = 4.0;

/// One row of a Monte Carlo report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub k: usize,
    pub mean_grad_norm_sq: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

/// Runs trials `0..trials` of stochastic FEG; results are in trial order.
pub fn run_sfeg_trials(
    problem: &ProblemSpec,
    noise: &NoiseModel,
    z0: &Point,
    iters: usize,
    trials: usize,
    exec: Execution,
) -> Result<Vec<Trace>> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    map_indexed(trials, exec, |t| run_sfeg(problem, noise, z0, iters, t as u64))
        .into_iter()
        .collect()
}

/// Sample mean and standard error of the mean (`s/sqrt(n)`, unbiased `s`).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Mean `||F z_k||²` across traces at each `k` in `ks`, checked against
/// `bound(k)` with a four-standard-error band.
pub fn monte_carlo_report<B>(traces: &[Trace], ks: &[usize], bound: B) -> Result<Vec<McRecord>>
where
    B: Fn(usize) -> Option<f64>,
{
    ks.iter()
        .map(|&k| {
            let values = traces
                .iter()
                .map(|t| {
                    t.grad_norm_sq.get(k).copied().ok_or(Error::IndexOutOfRange {
                        index: k,
                        len: t.grad_norm_sq.len(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean, stderr) = mean_and_stderr(&values);
            let b = bound(k);
            Ok(McRecord {
                k,
                mean_grad_norm_sq: mean,
                stderr,
                bound: b,
                pass: b.map(|b| mean <= b + STDERR_BAND * stderr),
            })
        })
        .collect()
}

/// Empirical check of one noise inner-product bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D2Check {
    pub label: String,
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

impl D2Check {
    fn new(label: String, k: usize, samples: &[f64], bound: f64) -> Self {
        let (mean, stderr) = mean_and_stderr(samples);
        D2Check {
            label,
            k,
            mean,
            stderr,
            bound,
            pass: mean.abs() <= bound + STDERR_BAND * stderr,
        }
    }
}

fn sfeg_params(trace: &Trace) -> Result<(f64, u64)> {
    match trace.method {
        MethodSpec::SFeg { lipschitz, trial, .. } => Ok((lipschitz, trial)),
        _ => Err(Error::param("trace", "expected a stochastic FEG trace")),
    }
}

fn noise_or_zero(noise: &NoiseModel, trial: u64, idx: usize, dim: usize) -> Result<Point> {
    Ok(noise.sample(trial, idx, dim)?.unwrap_or_else(|| Point::zeros(dim)))
}

/// The three noise inner-product bounds for stochastic FEG:
/// `|E<F z_1, ξ_0>| <= Lα_0σ_0²`,
/// `|E<F z_{k+1/2}, ξ_k>| <= L(1−β_k)α_kσ_k²` and
/// `|E<F z_{k+1}, ξ_{k+1/2}>| <= Lα_kσ²_{k+1/2}` for each `k` in `ks` (`k >= 1`).
pub fn lemma_d2_checks(
    problem: &ProblemSpec,
    noise: &NoiseModel,
    traces: &[Trace],
    ks: &[usize],
) -> Result<Vec<D2Check>> {
    let first = traces.first().ok_or(Error::Empty("no traces"))?;
    let (l, _) = sfeg_params(first)?;
    let alpha = 1.0 / l;
    let dim = first.dim();
    let op = &problem.operator;

    let mut out = Vec::new();
    let samples = traces
        .iter()
        .map(|t| {
            let (_, trial) = sfeg_params(t)?;
            let z1 = t.iterates.get(1).ok_or(Error::IndexOutOfRange { index: 1, len: t.iterates.len() })?;
            Ok(op.eval(z1)?.dot(&noise_or_zero(noise, trial, 0, dim)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let s0 = noise.schedule.variance(0)?;
    out.push(D2Check::new("<F z_1, xi_0>".into(), 0, &samples, l * alpha * s0));

    for &k in ks {
        if k == 0 {
            return Err(Error::param("ks", "indices must be at least 1"));
        }
        let beta = 1.0 / (k as f64 + 1.0);
        let mut half_samples = Vec::with_capacity(traces.len());
        let mut next_samples = Vec::with_capacity(traces.len());
        for t in traces {
            let (_, trial) = sfeg_params(t)?;
            let oob = |len| Error::IndexOutOfRange { index: k + 1, len };
            let zh = t.half_iterates.get(k).ok_or_else(|| oob(t.half_iterates.len()))?;
            let zn = t.iterates.get(k + 1).ok_or_else(|| oob(t.iterates.len()))?;
            half_samples.push(op.eval(zh)?.dot(&noise_or_zero(noise, trial, 2 * k, dim)?));
            next_samples.push(op.eval(zn)?.dot(&noise_or_zero(noise, trial, 2 * k + 1, dim)?));
        }
        let s_k = noise.schedule.variance(2 * k)?;
        let s_half = noise.schedule.variance(2 * k + 1)?;
        out.push(D2Check::new(
            format!("<F z_{{{k}+1/2}}, xi_{k}>"),
            k,
            &half_samples,
            l * (1.0 - beta) * alpha * s_k,
        ));
        out.push(D2Check::new(
            format!("<F z_{}, xi_{{{k}+1/2}}>", k + 1),
            k,
            &next_samples,
            l * alpha * s_half,
        ));
    }
    Ok(out)
}

/// `V_k − V_{k+1}` for each trace, with the deterministic FEG coefficients.
pub fn potential_gap_samples(problem: &ProblemSpec, traces: &[Trace], k: usize) -> Result<Vec<f64>> {
    let first = traces.first().ok_or(Error::Empty("no traces"))?;
    let ledger = PotentialLedger::for_trace(first, k + 2)?;
    traces
        .iter()
        .map(|t| Ok(ledger.potential(problem, t, k)? - ledger.potential(problem, t, k + 1)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr_oracle() {
        let (m, se) = mean_and_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // s^2 = 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_and_stderr(&[7.0]), (7.0, 0.0));
    }
}
