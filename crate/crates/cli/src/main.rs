//! `solve`: runs one configuration (or a batch file of them) and writes the
//! metrics trace as CSV.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Parser;
use regefg::runner::{
    csv_string, emit_csv, emit_plot_script, run, run_batch, Algo, GameSource, Report, RunConfig,
    TauMode, Trace,
};
use regefg::Error;

#[derive(Parser, Debug)]
#[command(
    name = "solve",
    version,
    about = "Regularized equilibrium solvers for zero-sum extensive-form games"
)]
struct Args {
    /// kuhn, leduc, a game JSON file, or a payoff matrix file
    #[arg(long, default_value = "kuhn")]
    game: GameSource,

    /// reg-domwu, reg-dogda, reg-cfr, cfr or cfr-plus
    #[arg(long, default_value = "reg-domwu")]
    algo: Algo,

    /// Regularization weight (initial weight for adaptive and episodic modes)
    #[arg(long, default_value_t = 0.05)]
    tau: f64,

    /// Behavioral probability floor of the perturbed game
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,

    /// Stepsize, or "auto" for 1/(8P)
    #[arg(long, default_value = "auto")]
    eta: Auto,

    /// Reg-CFR stepsize offset, or "auto" for sqrt(iters)
    #[arg(long, default_value = "auto")]
    kappa: Auto,

    #[arg(long, default_value_t = 1000)]
    iters: usize,

    /// fixed, adaptive or episodic
    #[arg(long, default_value = "fixed")]
    tau_mode: TauMode,

    #[arg(long, default_value_t = 1)]
    log_every: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Residual target of the reference solution; 0 skips the distance columns
    #[arg(long, default_value_t = 0.0)]
    ref_tol: f64,

    /// Stepsize of the reference run, or "auto" for 1/(8P)
    #[arg(long, default_value = "auto")]
    ref_eta: Auto,

    /// Iteration cap of the reference run
    #[arg(long, default_value_t = 5_000_000)]
    ref_max_iters: usize,

    /// Residual check period of the adaptive schedule
    #[arg(long, default_value_t = 1)]
    check_every: usize,

    /// Episode length constant, or "auto" for 8/eta
    #[arg(long, default_value = "auto")]
    episode_c: Auto,

    /// Strategy the metrics describe: auto, last or average
    #[arg(long, default_value = "auto")]
    report: Report,

    /// Fill the wall_ns column (makes the CSV nondeterministic)
    #[arg(long)]
    timing: bool,

    /// CSV output path; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a matplotlib script plotting the CSV (requires --out)
    #[arg(long)]
    plot: Option<PathBuf>,

    /// JSON array of run configurations to execute concurrently; every other
    /// run flag is ignored
    #[arg(long)]
    batch: Option<PathBuf>,
}

/// A number, or `auto` for the algorithm's default.
#[derive(Debug, Clone, Copy)]
struct Auto(Option<f64>);

impl FromStr for Auto {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Auto(None));
        }
        s.parse::<f64>()
            .map(|v| Auto(Some(v)))
            .map_err(|e| format!("expected a number or \"auto\": {e}"))
    }
}

impl Args {
    fn config(&self) -> RunConfig {
        RunConfig {
            game: self.game.clone(),
            algo: self.algo,
            tau0: self.tau,
            gamma: self.gamma,
            eta: self.eta.0,
            kappa: self.kappa.0,
            iters: self.iters,
            tau_mode: self.tau_mode,
            log_every: self.log_every,
            seed: self.seed,
            ref_tol: self.ref_tol,
            ref_eta: self.ref_eta.0,
            ref_max_iters: self.ref_max_iters,
            check_every: self.check_every,
            episode_c: self.episode_c.0,
            report: self.report,
            timing: self.timing,
            out: None,
        }
    }
}

fn summarize(trace: &Trace) {
    if let Some(r) = trace.records.last() {
        log::info!(
            "{} on {:?}: iter {} tau {:e} gap {:e} residual {:e} regret bound {:e}",
            trace.config.algo,
            trace.config.game,
            r.iter,
            r.tau,
            r.duality_gap,
            r.saddle_residual,
            r.regret_bound
        );
    }
    if !trace.shrinks.is_empty() {
        log::info!("{} tau shrinks", trace.shrinks.len());
    }
}

fn solve_one(args: &Args) -> Result<()> {
    if args.plot.is_some() && args.out.is_none() {
        bail!(Error::Config("--plot needs --out".into()));
    }
    let trace = run(&args.config())?;
    summarize(&trace);
    match &args.out {
        Some(out) => {
            emit_csv(&trace, out)?;
            if let Some(plot) = &args.plot {
                emit_plot_script(&trace, out, plot)?;
            }
        }
        None => print!("{}", csv_string(&trace.records)),
    }
    Ok(())
}

fn solve_batch(path: &PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let configs: Vec<RunConfig> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    })?;
    if let Some(i) = configs.iter().position(|c| c.out.is_none()) {
        bail!(Error::Config(format!(
            "batch entry {i} has no \"out\" path"
        )));
    }
    let mut first_error = None;
    for (i, result) in run_batch(&configs).into_iter().enumerate() {
        match result {
            Ok(trace) => summarize(&trace),
            Err(e) => {
                log::error!("batch entry {i}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(e).context(format!("batch {}", path.display())),
        None => Ok(()),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Convergence { .. }) => 3,
        Some(
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::InfeasibleGamma { .. }
            | Error::Unsupported(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let result = match &args.batch {
        Some(path) => solve_batch(path),
        None => solve_one(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
