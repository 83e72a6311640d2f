use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use feg_core::problems::ProblemLabel;

use crate::error::{BenchError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    TraceCsv,
    CertificateJson,
    SummaryJson,
}

fn all_emits() -> BTreeSet<Emit> {
    [Emit::TraceCsv, Emit::CertificateJson, Emit::SummaryJson].into()
}

fn one() -> usize {
    1
}

/// Problem label plus its parameters. Parameters that do not apply to the
/// label are rejected during validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub label: String,
    /// Scale `L` of the bilinear game or the worst-case function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// Radius `R` of the worst-case function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Dimension of a random negative-comonotone quadratic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Comonotonicity of a random negative-comonotone quadratic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Generator seed of a random negative-comonotone quadratic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemConfig {
    pub fn labelled(label: impl Into<String>) -> Self {
        ProblemConfig {
            label: label.into(),
            lipschitz: None,
            radius: None,
            dim: None,
            rho: None,
            seed: None,
        }
    }
}

fn default_tau() -> f64 {
    10.0
}

fn default_delta() -> f64 {
    0.1
}

fn default_half() -> f64 {
    0.5
}

/// A registered method with its parameters. Constants not given here come from
/// the problem's declared `L` and `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MethodConfig {
    Feg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rho: Option<f64>,
    },
    FegA {
        #[serde(default = "default_tau")]
        tau_init: f64,
        #[serde(default = "default_tau")]
        eta_init: f64,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    #[serde(rename = "eg+")]
    EgPlus {
        /// Defaults to `1/(2L)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default = "default_half")]
        beta: f64,
    },
    Eg,
    EagC,
    EagV,
    SFeg {
        #[serde(default)]
        family: feg_core::stochastic::NoiseFamily,
        /// Constant variance instead of the `eps` schedule.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<f64>,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MethodConfig::Feg { .. } => "feg",
            MethodConfig::FegA { .. } => "feg-a",
            MethodConfig::EgPlus { .. } => "eg+",
            MethodConfig::Eg => "eg",
            MethodConfig::EagC => "eag-c",
            MethodConfig::EagV => "eag-v",
            MethodConfig::SFeg { .. } => "s-feg",
        }
    }

    /// Parses a bare selector, taking every parameter at its default.
    pub fn from_selector(s: &str) -> Result<Self> {
        Ok(match s {
            "feg" => MethodConfig::Feg { rho: None },
            "feg-a" => MethodConfig::FegA {
                tau_init: default_tau(),
                eta_init: default_tau(),
                delta: default_delta(),
            },
            "eg+" | "eg-plus" => MethodConfig::EgPlus {
                alpha: None,
                beta: default_half(),
            },
            "eg" => MethodConfig::Eg,
            "eag-c" => MethodConfig::EagC,
            "eag-v" => MethodConfig::EagV,
            "s-feg" => MethodConfig::SFeg {
                family: Default::default(),
                variance: None,
            },
            other => {
                return Err(BenchError::config(
                    "method",
                    format!("unknown method `{other}` (expected feg, feg-a, eg+, eg, eag-c, eag-v or s-feg)"),
                ))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: ProblemConfig,
    pub methods: Vec<MethodConfig>,
    pub iters: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub output_dir: PathBuf,
    #[serde(default = "all_emits")]
    pub emit: BTreeSet<Emit>,
    /// Starting point; defaults to `(1, 0, ..., 0)`, or the origin for the
    /// worst-case problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
}

fn positive(field: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => {
            Err(BenchError::config(field, format!("must be positive, got {x}")))
        }
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn new(problem: ProblemConfig, methods: Vec<MethodConfig>, iters: usize, output_dir: PathBuf) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            problem,
            methods,
            iters,
            trials: 1,
            seed: 0,
            eps: None,
            output_dir,
            emit: all_emits(),
            z0: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| BenchError::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges that do not depend on the constructed problem.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(BenchError::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.methods.is_empty() {
            return Err(BenchError::config("methods", "at least one method is required"));
        }
        if self.iters == 0 {
            return Err(BenchError::config("iters", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(BenchError::config("trials", "must be at least 1"));
        }
        positive("eps", self.eps)?;
        if let Some(z) = &self.z0 {
            if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
                return Err(BenchError::config("z0", "must be a non-empty list of finite numbers"));
            }
        }

        let p = &self.problem;
        let label: ProblemLabel = p
            .label
            .parse()
            .map_err(|e: feg_core::Error| BenchError::config("problem.label", e.to_string()))?;
        positive("problem.lipschitz", p.lipschitz)?;
        positive("problem.radius", p.radius)?;
        let scale_ok = matches!(label, ProblemLabel::Bilinear | ProblemLabel::WorstCase);
        if !scale_ok && p.lipschitz.is_some() {
            return Err(BenchError::config("problem.lipschitz", format!("not a parameter of {label}")));
        }
        if label != ProblemLabel::WorstCase && p.radius.is_some() {
            return Err(BenchError::config("problem.radius", format!("not a parameter of {label}")));
        }
        if label != ProblemLabel::RandomNc {
            for (field, set) in [
                ("problem.dim", p.dim.is_some()),
                ("problem.rho", p.rho.is_some()),
                ("problem.seed", p.seed.is_some()),
            ] {
                if set {
                    return Err(BenchError::config(field, format!("not a parameter of {label}")));
                }
            }
        }

        for (i, m) in self.methods.iter().enumerate() {
            let field = |name: &str| format!("methods[{i}].{name}");
            match *m {
                MethodConfig::Feg { rho: Some(r) } if !r.is_finite() => {
                    return Err(BenchError::config(field("rho"), "must be finite"));
                }
                MethodConfig::FegA {
                    tau_init,
                    eta_init,
                    delta,
                } => {
                    positive(&field("tau_init"), Some(tau_init))?;
                    positive(&field("eta_init"), Some(eta_init))?;
                    if !(delta > 0.0 && delta < 1.0) {
                        return Err(BenchError::config(field("delta"), format!("must lie in (0, 1), got {delta}")));
                    }
                }
                MethodConfig::EgPlus { alpha, beta } => {
                    positive(&field("alpha"), alpha)?;
                    if !(beta > 0.0 && beta <= 1.0) {
                        return Err(BenchError::config(field("beta"), format!("must lie in (0, 1], got {beta}")));
                    }
                }
                MethodConfig::SFeg { variance, .. } => {
                    if let Some(v) = variance {
                        if !(v >= 0.0 && v.is_finite()) {
                            return Err(BenchError::config(field("variance"), format!("must be nonnegative, got {v}")));
                        }
                    } else if self.eps.is_none() {
                        return Err(BenchError::config("eps", "s-feg needs eps (or a constant variance)"));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}
