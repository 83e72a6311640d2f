use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use feg_bench::{run_experiment, ExperimentConfig, MethodConfig, ProblemConfig, Summary};

const EXIT_ERROR: u8 = 1;
const EXIT_CERTIFICATE: u8 = 2;

/// Run extragradient-type solvers on a benchmark problem and check their
/// convergence certificates.
///
/// Exit status: 0 on success, 1 on a usage or configuration error, 2 when
/// `--verify` is set and a certificate fails.
#[derive(Parser, Debug)]
#[command(name = "feg-bench", version)]
struct Args {
    /// JSON experiment config; excludes the inline problem and method flags.
    #[arg(long, conflicts_with_all = ["problem", "method", "lipschitz", "rho", "iters", "delta", "eps", "trials", "seed", "radius", "dim"])]
    config: Option<PathBuf>,

    /// bilinear, worst-case, quadratic:<file> or random-nc.
    #[arg(long)]
    problem: Option<String>,

    /// Method selector; repeat or comma-separate for several
    /// (feg, feg-a, eg+, eg, eag-c, eag-v, s-feg).
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,

    /// Scale L of the bilinear or worst-case problem.
    #[arg(long = "L")]
    lipschitz: Option<f64>,

    /// Radius R of the worst-case problem.
    #[arg(long = "R")]
    radius: Option<f64>,

    /// Dimension of a random-nc problem.
    #[arg(long)]
    dim: Option<usize>,

    /// Comonotonicity used by FEG (defaults to the problem's declared value).
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,

    /// Number of iterations K.
    #[arg(long)]
    iters: Option<usize>,

    /// Backtracking factor of FEG-A.
    #[arg(long)]
    delta: Option<f64>,

    /// Target accuracy of the S-FEG variance schedule.
    #[arg(long)]
    eps: Option<f64>,

    /// Monte Carlo trials for S-FEG.
    #[arg(long)]
    trials: Option<usize>,

    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides the config's).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Exit with status 2 if any certificate fails.
    #[arg(long)]
    verify: bool,
}

fn inline_config(args: &Args) -> feg_bench::Result<ExperimentConfig> {
    let label = args.problem.clone().unwrap_or_else(|| "bilinear".into());
    let mut problem = ProblemConfig::labelled(label);
    problem.lipschitz = args.lipschitz;
    problem.radius = args.radius;
    problem.dim = args.dim;

    let selectors = if args.method.is_empty() {
        vec!["feg".to_string()]
    } else {
        args.method.clone()
    };
    let mut methods = Vec::with_capacity(selectors.len());
    for s in &selectors {
        let mut m = MethodConfig::from_selector(s.trim())?;
        match &mut m {
            MethodConfig::Feg { rho } => *rho = args.rho,
            MethodConfig::FegA { delta, .. } => {
                if let Some(d) = args.delta {
                    *delta = d;
                }
            }
            _ => {}
        }
        methods.push(m);
    }

    let mut cfg = ExperimentConfig::new(
        problem,
        methods,
        args.iters.unwrap_or(100),
        args.out.clone().unwrap_or_else(|| "feg-out".into()),
    );
    cfg.eps = args.eps;
    cfg.trials = args.trials.unwrap_or(1);
    cfg.seed = args.seed.unwrap_or(0);
    Ok(cfg)
}

fn status(s: &Summary) -> String {
    let c = &s.certificates;
    format!("potential={:?} bound={:?} span={:?}", c.potential, c.bound, c.span).to_lowercase()
}

fn run(args: &Args) -> feg_bench::Result<bool> {
    let cfg = match &args.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::load(path)?;
            if let Some(out) = &args.out {
                cfg.output_dir = out.clone();
            }
            cfg
        }
        None => inline_config(args)?,
    };
    let outcome = run_experiment(&cfg)?;
    println!("{:<7} {:>6} {:>24} {:>24} {:>10} {:>10}  certificates", "method", "K", "final_grad_norm_sq", "bound_final", "ratio_max", "calls");
    for s in &outcome.summaries {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{:<7} {:>6} {:>24.6e} {:>24} {:>10} {:>10}  {}",
            s.method,
            s.k,
            s.final_grad_norm_sq,
            opt(s.bound_final),
            s.bound_ratio_max.map_or("-".to_string(), |r| format!("{r:.4}")),
            s.oracle_calls,
            status(s)
        );
        if let Some(note) = &s.note {
            println!("        note: {note}");
        }
    }
    Ok(outcome.any_certificate_failed())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(failed) if failed && args.verify => {
            eprintln!("feg-bench: certificate check failed");
            ExitCode::from(EXIT_CERTIFICATE)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("feg-bench: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
