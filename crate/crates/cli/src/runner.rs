use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use feg_core::analysis::{bound_sfeg, certify, CertStatus};
use feg_core::problems::{
    make_bilinear, make_quadratic, make_worst_case_smooth, random_negative_comonotone, ProblemLabel,
    QuadraticMinimax,
};
use feg_core::solvers::{run_eag, run_eg, run_eg_plus, run_feg_a, run_feg_with, EagVariant, Trace};
use feg_core::stochastic::{monte_carlo_report, run_sfeg_trials, schedule_for_epsilon, McRecord, NoiseModel, VarianceSchedule};
use feg_core::{Execution, Point, ProblemSpec};

use crate::config::{Emit, ExperimentConfig, MethodConfig, ProblemConfig};
use crate::error::{BenchError, Result};
use crate::output::{emit_trace_csv, trace_rows, write_json, TraceRow};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificates {
    pub potential: CertStatus,
    pub bound: CertStatus,
    pub span: CertStatus,
}

impl Certificates {
    pub fn any_failed(&self) -> bool {
        self.potential.is_fail() || self.bound.is_fail() || self.span.is_fail()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub problem: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub final_grad_norm_sq: f64,
    pub bound_final: Option<f64>,
    pub bound_ratio_max: Option<f64>,
    pub oracle_calls: u64,
    pub certificates: Certificates,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Everything a run produced, in method order.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub summaries: Vec<Summary>,
    pub rows: Vec<Vec<TraceRow>>,
}

impl ExperimentOutcome {
    pub fn any_certificate_failed(&self) -> bool {
        self.summaries.iter().any(|s| s.certificates.any_failed())
    }
}

pub fn build_problem(p: &ProblemConfig, seed: u64) -> Result<ProblemSpec> {
    let label: ProblemLabel = p
        .label
        .parse()
        .map_err(|e: feg_core::Error| BenchError::config("problem.label", e.to_string()))?;
    let l = p.lipschitz.unwrap_or(1.0);
    Ok(match label {
        ProblemLabel::Bilinear => make_bilinear(l)?,
        ProblemLabel::WorstCase => make_worst_case_smooth(l, p.radius.unwrap_or(1.0))?,
        ProblemLabel::Quadratic(path) => make_quadratic(&QuadraticMinimax::load(&path)?)?,
        ProblemLabel::RandomNc => {
            random_negative_comonotone(p.seed.unwrap_or(seed), p.dim.unwrap_or(4), p.rho.unwrap_or(-0.1))?
        }
    })
}

fn default_z0(label: &str, dim: usize) -> Point {
    let mut z = vec![0.0; dim];
    if label != "worst-case" {
        z[0] = 1.0;
    }
    Point::new(z).expect("finite start")
}

fn stem(name: &str, taken: &mut BTreeMap<String, usize>) -> String {
    let base = name.replace('+', "-plus");
    let n = taken.entry(base.clone()).or_insert(0);
    *n += 1;
    if *n == 1 {
        base
    } else {
        format!("{base}-{n}")
    }
}

fn ratio_max(rows: &[TraceRow]) -> Option<f64> {
    rows.iter()
        .filter_map(|r| r.bound.filter(|b| *b > 0.0).map(|b| r.grad_norm_sq / b))
        .reduce(f64::max)
}

fn stall_note(problem: &ProblemConfig, rows: &[TraceRow]) -> Option<String> {
    if problem.label != "worst-case" {
        return None;
    }
    let g0 = rows.first()?.grad_norm_sq;
    rows.iter().all(|r| r.grad_norm_sq == g0).then(|| {
        format!("expected stall: grad_norm_sq stays at 2LR = {g0} for every span-respecting method")
    })
}

struct MethodRun {
    rows: Vec<TraceRow>,
    summary: Summary,
    report: serde_json::Value,
}

fn run_deterministic(cfg: &ExperimentConfig, problem: &ProblemSpec, trace: Trace) -> Result<MethodRun> {
    let report = certify(problem, &trace, Execution::default())?;
    let bounds: Vec<Option<f64>> = report.records.iter().map(|r| r.bound).collect();
    let potential: Option<Vec<f64>> = report.records.iter().map(|r| r.v).collect();
    let rows = trace_rows(&trace, Some(&bounds), potential.as_deref());
    let last = rows.last().expect("trace has z_0");
    let summary = Summary {
        method: report.method.clone(),
        problem: problem.label.clone(),
        k: trace.iterations(),
        final_grad_norm_sq: last.grad_norm_sq,
        bound_final: last.bound,
        bound_ratio_max: ratio_max(&rows),
        oracle_calls: trace.oracle_calls,
        certificates: Certificates {
            potential: report.potential,
            bound: report.bound,
            span: report.span,
        },
        note: stall_note(&cfg.problem, &rows),
    };
    let report = serde_json::to_value(&report).expect("report serializes");
    Ok(MethodRun { rows, summary, report })
}

fn run_stochastic(
    cfg: &ExperimentConfig,
    problem: &ProblemSpec,
    z0: &Point,
    family: feg_core::stochastic::NoiseFamily,
    variance: Option<f64>,
) -> Result<MethodRun> {
    let schedule = match (variance, cfg.eps) {
        (Some(v), _) => VarianceSchedule::constant(v)?,
        (None, Some(eps)) => schedule_for_epsilon(eps, cfg.iters)?,
        (None, None) => return Err(BenchError::config("eps", "s-feg needs eps (or a constant variance)")),
    };
    let noise = NoiseModel::new(family, schedule.clone(), cfg.seed);
    let traces = run_sfeg_trials(problem, &noise, z0, cfg.iters, cfg.trials, Execution::default())?;
    let l = problem.require_lipschitz("s-feg")?;
    let d = problem.distance_to_solution(z0);
    let ks: Vec<usize> = (0..=cfg.iters).collect();
    let records: Vec<McRecord> = monte_carlo_report(&traces, &ks, |k| {
        let d = d?;
        (k >= 1).then(|| bound_sfeg(l, d, &schedule, k).ok()).flatten()
    })?;
    let rows: Vec<TraceRow> = records
        .iter()
        .map(|r| TraceRow {
            k: r.k,
            grad_norm_sq: r.mean_grad_norm_sq,
            bound: r.bound,
            potential: None,
            tau: None,
            eta: None,
        })
        .collect();
    let bound = if records.iter().any(|r| r.pass == Some(false)) {
        CertStatus::Fail
    } else if records.iter().any(|r| r.pass.is_some()) {
        CertStatus::Pass
    } else {
        CertStatus::Skipped
    };
    let last = rows.last().expect("at least z_0");
    let summary = Summary {
        method: "s-feg".into(),
        problem: problem.label.clone(),
        k: cfg.iters,
        final_grad_norm_sq: last.grad_norm_sq,
        bound_final: last.bound,
        bound_ratio_max: ratio_max(&rows),
        oracle_calls: traces.iter().map(|t| t.oracle_calls).sum(),
        certificates: Certificates {
            potential: CertStatus::Skipped,
            bound,
            span: CertStatus::Skipped,
        },
        note: Some(format!(
            "Monte Carlo over {} trials; grad_norm_sq is the sample mean, bound is checked within 4 standard errors",
            cfg.trials
        )),
    };
    let report = serde_json::to_value(&records).expect("records serialize");
    Ok(MethodRun { rows, summary, report })
}

fn run_method(cfg: &ExperimentConfig, problem: &ProblemSpec, z0: &Point, i: usize) -> Result<MethodRun> {
    let iters = cfg.iters;
    let lipschitz = || problem.require_lipschitz(cfg.methods[i].name());
    let trace = match cfg.methods[i] {
        MethodConfig::Feg { rho } => {
            let l = lipschitz()?;
            let field = format!("methods[{i}].rho");
            let rho = match (rho, problem.comonotone) {
                (Some(r), _) | (None, Some(r)) => r,
                (None, None) if cfg.problem.label == "worst-case" => 0.0,
                (None, None) => {
                    return Err(BenchError::config(field, "problem declares no comonotonicity constant; give rho"))
                }
            };
            if !(rho > -1.0 / (2.0 * l)) {
                return Err(BenchError::config(field, format!("rho = {rho} must exceed -1/(2L) = {}", -0.5 / l)));
            }
            run_feg_with(problem, z0, iters, l, rho)?
        }
        MethodConfig::FegA {
            tau_init,
            eta_init,
            delta,
        } => run_feg_a(&problem.operator, z0, tau_init, eta_init, delta, iters)?,
        MethodConfig::EgPlus { alpha, beta } => {
            let alpha = match alpha {
                Some(a) => a,
                None => 0.5 / lipschitz()?,
            };
            run_eg_plus(problem, z0, iters, alpha, beta)?
        }
        MethodConfig::Eg => run_eg(problem, z0, iters)?,
        MethodConfig::EagC => run_eag(problem, z0, iters, EagVariant::C)?,
        MethodConfig::EagV => run_eag(problem, z0, iters, EagVariant::V)?,
        MethodConfig::SFeg { family, variance } => return run_stochastic(cfg, problem, z0, family, variance),
    };
    run_deterministic(cfg, problem, trace)
}

/// Runs every configured method, computes bounds and certificates, and writes
/// the requested artifacts into `output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let problem = build_problem(&cfg.problem, cfg.seed)?;
    let z0 = match &cfg.z0 {
        Some(z) => {
            if z.len() != problem.dim() {
                return Err(BenchError::config(
                    "z0",
                    format!("has dimension {}, problem has {}", z.len(), problem.dim()),
                ));
            }
            Point::new(z.clone())?
        }
        None => default_z0(&cfg.problem.label, problem.dim()),
    };

    let mut runs = Vec::with_capacity(cfg.methods.len());
    for i in 0..cfg.methods.len() {
        runs.push(run_method(cfg, &problem, &z0, i)?);
    }

    let dir = &cfg.output_dir;
    let mut taken = BTreeMap::new();
    for run in &runs {
        let name = stem(&run.summary.method, &mut taken);
        if cfg.emit.contains(&Emit::TraceCsv) {
            emit_trace_csv(&run.rows, &dir.join(format!("{name}.csv")))?;
        }
        if cfg.emit.contains(&Emit::CertificateJson) {
            write_json(&run.report, &dir.join(format!("{name}.certificate.json")))?;
        }
    }
    let summaries: Vec<Summary> = runs.iter().map(|r| r.summary.clone()).collect();
    if cfg.emit.contains(&Emit::SummaryJson) {
        write_json(&summaries, &dir.join("summary.json"))?;
    }
    if !cfg.emit.is_empty() {
        write_json(cfg, &dir.join("config.json"))?;
    }
    Ok(ExperimentOutcome {
        summaries,
        rows: runs.into_iter().map(|r| r.rows).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn cfg(label: &str, methods: &[&str], iters: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            ProblemConfig::labelled(label),
            methods.iter().map(|m| MethodConfig::from_selector(m).unwrap()).collect(),
            iters,
            "unused".into(),
        );
        c.emit = BTreeSet::new();
        c
    }

    #[test]
    fn bilinear_sixth_row() {
        let out = run_experiment(&cfg("bilinear", &["feg"], 6)).unwrap();
        let rows = &out.rows[0];
        assert_eq!(rows.len(), 7);
        assert!((rows[6].grad_norm_sq - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(rows[2].grad_norm_sq, 1.0);
        assert_eq!(rows[2].bound, Some(1.0));
        assert!(!out.any_certificate_failed());
        assert_eq!(out.summaries[0].oracle_calls, 12);
    }

    #[test]
    fn feg_bound_below_eag_v() {
        let out = run_experiment(&cfg("bilinear", &["feg", "eag-v"], 100)).unwrap();
        assert!(!out.any_certificate_failed());
        for k in 2..=100 {
            assert!(out.rows[0][k].bound.unwrap() < out.rows[1][k].bound.unwrap());
        }
    }

    #[test]
    fn worst_case_reports_expected_stall() {
        let out = run_experiment(&cfg("worst-case", &["feg", "feg-a", "eag-c"], 50)).unwrap();
        assert!(!out.any_certificate_failed());
        for s in &out.summaries {
            assert_eq!(s.final_grad_norm_sq, 2.0);
            assert!(s.note.as_deref().unwrap().starts_with("expected stall"), "{s:?}");
            assert_eq!(s.certificates.bound, CertStatus::Skipped);
        }
    }

    #[test]
    fn incompatible_method_is_an_error() {
        // a quadratic loaded from file declares no comonotonicity constant
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.json");
        std::fs::write(&path, r#"{"a":[[0.0]],"b":[[1.0]],"c":[[0.0]]}"#).unwrap();
        let c = cfg(&format!("quadratic:{}", path.display()), &["feg"], 5);
        match run_experiment(&c).unwrap_err() {
            BenchError::Config { field, .. } => assert_eq!(field, "methods[0].rho"),
            other => panic!("{other:?}"),
        }
        let mut c = c;
        c.methods = vec![MethodConfig::Feg { rho: Some(0.0) }];
        assert!(run_experiment(&c).is_ok());
    }

    #[test]
    fn rho_gate() {
        let mut c = cfg("bilinear", &["feg"], 5);
        c.methods = vec![MethodConfig::Feg { rho: Some(-1.0) }];
        assert!(matches!(run_experiment(&c), Err(BenchError::Config { .. })));
    }

    #[test]
    fn stochastic_summary() {
        let mut c = cfg("bilinear", &["s-feg"], 10);
        c.eps = Some(0.5);
        c.trials = 50;
        let out = run_experiment(&c).unwrap();
        let s = &out.summaries[0];
        assert_eq!(s.certificates.potential, CertStatus::Skipped);
        assert_eq!(s.certificates.bound, CertStatus::Pass);
        assert_eq!(s.oracle_calls, 50 * 20);
        assert!(out.rows[0][0].bound.is_none());
        assert!((out.rows[0][10].bound.unwrap() - (0.04 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn stems_are_unique() {
        let mut taken = BTreeMap::new();
        assert_eq!(stem("feg", &mut taken), "feg");
        assert_eq!(stem("feg", &mut taken), "feg-2");
        assert_eq!(stem("eg+", &mut taken), "eg-plus");
    }
}
