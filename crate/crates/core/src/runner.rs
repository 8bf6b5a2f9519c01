//! Experiment orchestration: run configuration, the three regularization
//! schedules (fixed, adaptive shrinking, episodic restarts), trace records and
//! their CSV serialization.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cfr::{
    counterfactual_values, regcfr_step, rm_step, Averager, CfrState, JointLedger, RmState,
};
use crate::domd::{default_eta, DomdSolver};
use crate::games::{build_kuhn, build_leduc, load_game, load_matrix, GameSpec, JointStrategy};
use crate::metrics::{
    distance_metrics, duality_gap, reference_solution, saddle_residual, MetricsRecord,
    ReferenceOptions,
};
use crate::regularizer::{RegKind, Regularizers};
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "iter,tau,duality_gap,saddle_residual,regret_bound,dist_ref_l2,dist_ref_bregman,wall_ns";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameSource {
    Kuhn,
    Leduc,
    /// A game in the JSON interchange format.
    File(PathBuf),
    /// A dense payoff matrix, rows for the minimizing player.
    Matrix(PathBuf),
}

impl GameSource {
    pub fn load(&self) -> Result<GameSpec> {
        match self {
            GameSource::Kuhn => Ok(build_kuhn()),
            GameSource::Leduc => Ok(build_leduc()),
            GameSource::File(p) => load_game(p),
            GameSource::Matrix(p) => load_matrix(p),
        }
    }
}

/// `kuhn`, `leduc`, `file:<path>`, `matrix:<path>`, or a bare path (`.json`
/// is a game file, anything else a matrix).
impl FromStr for GameSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "" => return Err(Error::Config("empty game name".into())),
            "kuhn" => GameSource::Kuhn,
            "leduc" => GameSource::Leduc,
            _ => {
                if let Some(p) = s.strip_prefix("file:") {
                    GameSource::File(p.into())
                } else if let Some(p) = s.strip_prefix("matrix:") {
                    GameSource::Matrix(p.into())
                } else if Path::new(s).extension().is_some_and(|e| e == "json") {
                    GameSource::File(s.into())
                } else {
                    GameSource::Matrix(s.into())
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    RegDomwu,
    RegDogda,
    RegCfr,
    Cfr,
    CfrPlus,
}

impl Algo {
    pub const ALL: [Algo; 5] = [
        Algo::RegDomwu,
        Algo::RegDogda,
        Algo::RegCfr,
        Algo::Cfr,
        Algo::CfrPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::RegDomwu => "reg-domwu",
            Algo::RegDogda => "reg-dogda",
            Algo::RegCfr => "reg-cfr",
            Algo::Cfr => "cfr",
            Algo::CfrPlus => "cfr-plus",
        }
    }

    /// Base regularizer: entropy for Reg-DOMWU, Euclidean otherwise.
    pub fn reg_kind(self) -> RegKind {
        match self {
            Algo::RegDomwu => RegKind::Entropy,
            _ => RegKind::Euclidean,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauMode {
    Fixed,
    Adaptive,
    Episodic,
}

impl FromStr for TauMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(TauMode::Fixed),
            "adaptive" => Ok(TauMode::Adaptive),
            "episodic" => Ok(TauMode::Episodic),
            _ => Err(Error::Config(format!("unknown tau mode {s:?}"))),
        }
    }
}

/// Which strategy the metrics are evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Report {
    /// The running average for CFR and CFR+, the last iterate otherwise.
    #[default]
    Auto,
    Last,
    Average,
}

impl FromStr for Report {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Report::Auto),
            "last" => Ok(Report::Last),
            "average" => Ok(Report::Average),
            _ => Err(Error::Config(format!("unknown report mode {s:?}"))),
        }
    }
}

fn default_one() -> usize {
    1
}

fn default_ref_max_iters() -> usize {
    ReferenceOptions::default().max_iters
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub game: GameSource,
    pub algo: Algo,
    pub tau0: f64,
    #[serde(default)]
    pub gamma: f64,
    /// `None` is `1/(8P)`.
    #[serde(default)]
    pub eta: Option<f64>,
    /// `None` is `√iters`.
    #[serde(default)]
    pub kappa: Option<f64>,
    pub iters: usize,
    pub tau_mode: TauMode,
    #[serde(default = "default_one")]
    pub log_every: usize,
    #[serde(default)]
    pub seed: u64,
    /// Saddle-residual target of the reference solution; `0` disables the
    /// distance columns.
    #[serde(default)]
    pub ref_tol: f64,
    /// Stepsize of the reference run; `None` is `1/(8P)`.
    #[serde(default)]
    pub ref_eta: Option<f64>,
    /// Iteration cap of the reference run.
    #[serde(default = "default_ref_max_iters")]
    pub ref_max_iters: usize,
    /// Residual evaluation period of the adaptive schedule.
    #[serde(default = "default_one")]
    pub check_every: usize,
    /// Episode length constant `c`; `None` is `8/η`.
    #[serde(default)]
    pub episode_c: Option<f64>,
    #[serde(default)]
    pub report: Report,
    /// Record wall-clock time; otherwise `wall_ns` is 0 and traces are
    /// byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// A fixed-τ configuration with every optional knob at its default.
    pub fn new(game: GameSource, algo: Algo, tau0: f64, iters: usize) -> Self {
        Self {
            game,
            algo,
            tau0,
            gamma: 0.0,
            eta: None,
            kappa: None,
            iters,
            tau_mode: TauMode::Fixed,
            log_every: 1,
            seed: 0,
            ref_tol: 0.0,
            ref_eta: None,
            ref_max_iters: default_ref_max_iters(),
            check_every: 1,
            episode_c: None,
            report: Report::Auto,
            timing: false,
            out: None,
        }
    }

    pub fn eta_for(&self, game: &GameSpec) -> f64 {
        self.eta.unwrap_or_else(|| default_eta(game))
    }

    pub fn kappa_value(&self) -> f64 {
        self.kappa
            .unwrap_or_else(|| (self.iters as f64).sqrt().max(1.0))
    }

    pub fn episode_constant(&self, game: &GameSpec) -> f64 {
        self.episode_c.unwrap_or_else(|| 8.0 / self.eta_for(game))
    }

    fn report_average(&self) -> bool {
        match self.report {
            Report::Auto => matches!(self.algo, Algo::Cfr | Algo::CfrPlus),
            Report::Last => false,
            Report::Average => true,
        }
    }

    /// Checks every invariant that does not need a solver run.
    pub fn validate(&self, game: &GameSpec) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.iters == 0 {
            return bad("iters must be at least 1".into());
        }
        if self.log_every == 0 || self.check_every == 0 {
            return bad("log_every and check_every must be at least 1".into());
        }
        if !(self.tau0 >= 0.0 && self.tau0.is_finite()) {
            return bad(format!(
                "tau must be a nonnegative number, got {}",
                self.tau0
            ));
        }
        if self.tau_mode != TauMode::Fixed && self.tau0 == 0.0 {
            return bad("adaptive and episodic schedules need a positive initial tau".into());
        }
        let c_omega = game.tp_x().max_actions().max(game.tp_y().max_actions());
        if !(self.gamma >= 0.0 && self.gamma * (c_omega as f64) < 1.0) {
            return bad(format!(
                "gamma must lie in [0, 1/{c_omega}), got {}",
                self.gamma
            ));
        }
        if self.gamma > 0.0 && matches!(self.algo, Algo::RegDomwu | Algo::Cfr | Algo::CfrPlus) {
            return bad(format!(
                "{} does not support a perturbed game (gamma > 0)",
                self.algo
            ));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return bad(format!("eta must be positive, got {eta}"));
            }
        }
        if let Some(eta) = self.ref_eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return bad(format!("ref_eta must be positive, got {eta}"));
            }
        }
        if let Some(k) = self.kappa {
            if !(k >= 1.0 && k.is_finite()) {
                return bad(format!("kappa must be at least 1, got {k}"));
            }
        }
        if let Some(c) = self.episode_c {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("episode constant must be positive, got {c}"));
            }
        }
        if !(self.ref_tol >= 0.0) {
            return bad(format!("ref_tol must be nonnegative, got {}", self.ref_tol));
        }
        if self.ref_tol > 0.0 && self.ref_max_iters == 0 {
            return bad("ref_max_iters must be at least 1".into());
        }
        if self.algo == Algo::RegDomwu && self.eta_for(game) * self.tau0 >= 1.0 {
            return bad("reg-domwu needs eta * tau < 1".into());
        }
        if self.algo == Algo::RegCfr && self.tau0 > 0.0 {
            let regs = Regularizers::new(game, RegKind::Euclidean);
            if self.tau0 > 1.0 / (2.0 * regs.alpha_max()) {
                log::warn!(
                    "tau = {} exceeds 1/(2 max alpha) = {}",
                    self.tau0,
                    1.0 / (2.0 * regs.alpha_max())
                );
            }
        }
        Ok(())
    }
}

/// A step-driven equilibrium solver with a mutable regularization weight.
pub trait Solver: Send {
    fn step(&mut self) -> Result<()>;
    fn tau(&self) -> f64;
    fn set_tau(&mut self, tau: f64) -> Result<()>;
    /// The point a last-iterate guarantee is about: `ẑ_{t+1}` for Reg-DOMD,
    /// `z_{t+1/2}` for Reg-CFR, the last played profile for CFR/CFR+.
    fn iterate(&self) -> &JointStrategy;
    /// Uniform average of the played profiles.
    fn average(&self) -> Option<JointStrategy>;
    /// Laminar upper bound on `R^X_T + R^Y_T`.
    fn regret_bound(&self) -> Result<f64>;
    /// Continue from the current iterate after a change of `τ`.
    fn warm_restart(&mut self);
    /// Back to the uniform profile with fresh accumulators.
    fn reset(&mut self) -> Result<()>;
    fn regs(&self) -> &Regularizers;
    fn iters(&self) -> usize;
}

struct DomdRun {
    inner: DomdSolver,
    ledger: JointLedger,
    avg: Averager,
}

impl Solver for DomdRun {
    fn step(&mut self) -> Result<()> {
        let z = self.inner.step()?;
        let tau = self.inner.state.tau;
        self.ledger.record(
            &counterfactual_values(&self.inner.game, &self.inner.regs, tau, &z)?,
            tau,
        );
        self.avg.add(&z);
        Ok(())
    }

    fn tau(&self) -> f64 {
        self.inner.state.tau
    }

    fn set_tau(&mut self, tau: f64) -> Result<()> {
        self.inner.state.tau = tau;
        Ok(())
    }

    fn iterate(&self) -> &JointStrategy {
        &self.inner.state.z_hat
    }

    fn average(&self) -> Option<JointStrategy> {
        self.avg.average()
    }

    fn regret_bound(&self) -> Result<f64> {
        self.ledger
            .regret_upper_bound(&self.inner.regs, self.inner.gamma)
    }

    fn warm_restart(&mut self) {
        self.inner.state.z_prev = self.inner.state.z_hat.clone();
    }

    fn reset(&mut self) -> Result<()> {
        self.inner.reset();
        self.ledger = JointLedger::new(&self.inner.game);
        self.avg = Averager::new(&self.inner.game);
        Ok(())
    }

    fn regs(&self) -> &Regularizers {
        &self.inner.regs
    }

    fn iters(&self) -> usize {
        self.inner.state.iter
    }
}

struct CfrRun {
    game: GameSpec,
    regs: Regularizers,
    state: CfrState,
    tau: f64,
    gamma: f64,
}

impl Solver for CfrRun {
    fn step(&mut self) -> Result<()> {
        regcfr_step(
            &mut self.state,
            &self.game,
            &self.regs,
            self.tau,
            self.gamma,
        )
        .map(drop)
    }

    fn tau(&self) -> f64 {
        self.tau
    }

    fn set_tau(&mut self, tau: f64) -> Result<()> {
        self.tau = tau;
        self.state.refresh_values(&self.game, &self.regs, tau)
    }

    fn iterate(&self) -> &JointStrategy {
        &self.state.last
    }

    fn average(&self) -> Option<JointStrategy> {
        self.state.average_strategy()
    }

    fn regret_bound(&self) -> Result<f64> {
        self.state.ledger.regret_upper_bound(&self.regs, self.gamma)
    }

    fn warm_restart(&mut self) {
        self.state.warm_restart();
    }

    fn reset(&mut self) -> Result<()> {
        self.state = CfrState::new(&self.game, &self.regs, self.tau, self.state.kappa)?;
        Ok(())
    }

    fn regs(&self) -> &Regularizers {
        &self.regs
    }

    fn iters(&self) -> usize {
        self.state.iter
    }
}

struct RmRun {
    game: GameSpec,
    regs: Regularizers,
    state: RmState,
    tau: f64,
}

impl Solver for RmRun {
    fn step(&mut self) -> Result<()> {
        rm_step(&mut self.state, &self.game, &self.regs, self.tau, 0.0).map(drop)
    }

    fn tau(&self) -> f64 {
        self.tau
    }

    fn set_tau(&mut self, tau: f64) -> Result<()> {
        self.tau = tau;
        Ok(())
    }

    fn iterate(&self) -> &JointStrategy {
        &self.state.last
    }

    fn average(&self) -> Option<JointStrategy> {
        self.state.average_strategy()
    }

    fn regret_bound(&self) -> Result<f64> {
        self.state.ledger.regret_upper_bound(&self.regs, 0.0)
    }

    fn warm_restart(&mut self) {}

    fn reset(&mut self) -> Result<()> {
        self.state = RmState::new(&self.game, self.state.plus);
        Ok(())
    }

    fn regs(&self) -> &Regularizers {
        &self.regs
    }

    fn iters(&self) -> usize {
        self.state.iter
    }
}

/// Builds the solver named by `cfg.algo` at `τ = cfg.tau0`.
pub fn make_solver(cfg: &RunConfig, game: &GameSpec) -> Result<Box<dyn Solver>> {
    let kind = cfg.algo.reg_kind();
    Ok(match cfg.algo {
        Algo::RegDomwu | Algo::RegDogda => {
            let inner =
                DomdSolver::new(game.clone(), kind, cfg.eta_for(game), cfg.tau0, cfg.gamma)?;
            Box::new(DomdRun {
                inner,
                ledger: JointLedger::new(game),
                avg: Averager::new(game),
            })
        }
        Algo::RegCfr => {
            let regs = Regularizers::new(game, kind);
            let state = CfrState::new(game, &regs, cfg.tau0, cfg.kappa_value())?;
            Box::new(CfrRun {
                game: game.clone(),
                regs,
                state,
                tau: cfg.tau0,
                gamma: cfg.gamma,
            })
        }
        Algo::Cfr | Algo::CfrPlus => Box::new(RmRun {
            game: game.clone(),
            regs: Regularizers::new(game, kind),
            state: RmState::new(game, cfg.algo == Algo::CfrPlus),
            tau: cfg.tau0,
        }),
    })
}

/// One firing of the adaptive shrink rule: after step `iter` the residual
/// fell to `residual ≤ delta/4` and `τ` went from `tau_before` to half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkEvent {
    pub iter: usize,
    pub tau_before: f64,
    pub residual: f64,
    pub delta: f64,
}

/// One restart of the episodic schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    /// Number of steps taken before the episode started.
    pub start: usize,
    pub tau: f64,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: RunConfig,
    pub records: Vec<MetricsRecord>,
    /// Smallest `dist_ref_bregman` seen up to each record.
    pub best_bregman: Vec<f64>,
    pub shrinks: Vec<ShrinkEvent>,
    pub episodes: Vec<Episode>,
}

struct Evaluator<'a> {
    cfg: &'a RunConfig,
    game: &'a GameSpec,
    references: HashMap<u64, JointStrategy>,
    start: Instant,
    best: f64,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a RunConfig, game: &'a GameSpec) -> Self {
        Self {
            cfg,
            game,
            references: HashMap::new(),
            start: Instant::now(),
            best: f64::INFINITY,
        }
    }

    fn reference(&mut self, regs: &Regularizers, tau: f64) -> Result<Option<&JointStrategy>> {
        if self.cfg.ref_tol <= 0.0 || tau <= 0.0 {
            return Ok(None);
        }
        let key = tau.to_bits();
        if !self.references.contains_key(&key) {
            let opts = ReferenceOptions {
                eta: self.cfg.ref_eta,
                max_iters: self.cfg.ref_max_iters,
                ..Default::default()
            };
            let z =
                reference_solution(self.game, regs, tau, self.cfg.gamma, self.cfg.ref_tol, opts)?;
            self.references.insert(key, z);
        }
        Ok(self.references.get(&key))
    }

    fn record(&mut self, solver: &dyn Solver, iter: usize, trace: &mut Trace) -> Result<()> {
        let tau = solver.tau();
        let gamma = self.cfg.gamma;
        let avg;
        let z = if self.cfg.report_average() {
            avg = solver.average().unwrap_or_else(|| solver.iterate().clone());
            &avg
        } else {
            solver.iterate()
        };
        let regs = solver.regs();
        let (dist_ref_l2, dist_ref_bregman) = match self.reference(regs, tau)? {
            Some(zr) => distance_metrics(regs, z, zr)?,
            None => (f64::NAN, f64::NAN),
        };
        if dist_ref_bregman < self.best {
            self.best = dist_ref_bregman;
        }
        let wall_ns = if self.cfg.timing {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        };
        trace.records.push(MetricsRecord {
            iter,
            tau,
            duality_gap: duality_gap(self.game, z, gamma)?,
            saddle_residual: saddle_residual(self.game, regs, tau, z, gamma)?,
            regret_bound: solver.regret_bound()?,
            dist_ref_l2,
            dist_ref_bregman,
            wall_ns,
        });
        trace.best_bregman.push(if self.best.is_finite() {
            self.best
        } else {
            f64::NAN
        });
        Ok(())
    }

    fn due(&self, t: usize) -> bool {
        t.is_multiple_of(self.cfg.log_every) || t == self.cfg.iters
    }
}

fn empty_trace(cfg: &RunConfig) -> Trace {
    Trace {
        config: cfg.clone(),
        records: Vec::new(),
        best_bregman: Vec::new(),
        shrinks: Vec::new(),
        episodes: Vec::new(),
    }
}

fn prepare(cfg: &RunConfig, expected: TauMode) -> Result<GameSpec> {
    if cfg.tau_mode != expected {
        return Err(Error::Config(format!(
            "expected tau mode {expected:?}, got {:?}",
            cfg.tau_mode
        )));
    }
    let game = cfg.game.load()?;
    cfg.validate(&game)?;
    Ok(game)
}

/// `iters` steps at constant `τ = tau0`.
pub fn run_fixed_tau(cfg: &RunConfig) -> Result<Trace> {
    let game = prepare(cfg, TauMode::Fixed)?;
    let mut solver = make_solver(cfg, &game)?;
    let mut eval = Evaluator::new(cfg, &game);
    let mut trace = empty_trace(cfg);
    for t in 1..=cfg.iters {
        solver.step()?;
        if eval.due(t) {
            eval.record(solver.as_ref(), t, &mut trace)?;
        }
    }
    Ok(trace)
}

/// Adaptive weight shrinking. `δ` starts as the residual of the initial
/// profile; whenever the residual of the current iterate drops to `δ/4`, `τ`
/// halves, `δ` is recomputed at the new `τ`, and the solver continues from its
/// current iterate.
pub fn run_adaptive_shrink(cfg: &RunConfig) -> Result<Trace> {
    let game = prepare(cfg, TauMode::Adaptive)?;
    let mut solver = make_solver(cfg, &game)?;
    let mut eval = Evaluator::new(cfg, &game);
    let mut trace = empty_trace(cfg);
    let gamma = cfg.gamma;
    let mut tau = cfg.tau0;
    let mut delta = saddle_residual(&game, solver.regs(), tau, solver.iterate(), gamma)?;
    for t in 1..=cfg.iters {
        solver.step()?;
        if eval.due(t) {
            eval.record(solver.as_ref(), t, &mut trace)?;
        }
        if t % cfg.check_every != 0 {
            continue;
        }
        let residual = saddle_residual(&game, solver.regs(), tau, solver.iterate(), gamma)?;
        if residual <= delta / 4.0 {
            trace.shrinks.push(ShrinkEvent {
                iter: t,
                tau_before: tau,
                residual,
                delta,
            });
            tau /= 2.0;
            solver.set_tau(tau)?;
            solver.warm_restart();
            delta = saddle_residual(&game, solver.regs(), tau, solver.iterate(), gamma)?;
            log::debug!("step {t}: tau -> {tau:e}, delta = {delta:e}");
        }
    }
    Ok(trace)
}

/// `⌈c/τ · max(ln(1/τ), 1)⌉`.
pub fn episode_length(c: f64, tau: f64) -> usize {
    (c / tau * (1.0 / tau).ln().max(1.0)).ceil() as usize
}

/// Episodes restarted from the uniform profile, `τ` halving between them.
pub fn run_episodic(cfg: &RunConfig) -> Result<Trace> {
    let game = prepare(cfg, TauMode::Episodic)?;
    let mut solver = make_solver(cfg, &game)?;
    let mut eval = Evaluator::new(cfg, &game);
    let mut trace = empty_trace(cfg);
    let c = cfg.episode_constant(&game);
    let mut tau = cfg.tau0;
    let mut t = 0;
    while t < cfg.iters {
        let length = episode_length(c, tau).max(1);
        if t > 0 {
            solver.set_tau(tau)?;
            solver.reset()?;
        }
        trace.episodes.push(Episode {
            start: t,
            tau,
            length,
        });
        for _ in 0..length {
            if t == cfg.iters {
                break;
            }
            solver.step()?;
            t += 1;
            if eval.due(t) {
                eval.record(solver.as_ref(), t, &mut trace)?;
            }
        }
        tau /= 2.0;
    }
    Ok(trace)
}

/// Dispatches on `cfg.tau_mode` and writes the CSV to `cfg.out` if set.
pub fn run(cfg: &RunConfig) -> Result<Trace> {
    let trace = match cfg.tau_mode {
        TauMode::Fixed => run_fixed_tau(cfg)?,
        TauMode::Adaptive => run_adaptive_shrink(cfg)?,
        TauMode::Episodic => run_episodic(cfg)?,
    };
    if let Some(out) = &cfg.out {
        emit_csv(&trace, out)?;
    }
    Ok(trace)
}

/// Runs independent configurations on separate threads; results keep the
/// input order.
pub fn run_batch(configs: &[RunConfig]) -> Vec<Result<Trace>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || run(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes records with 17 significant digits, one line each.
pub fn csv_string(records: &[MetricsRecord]) -> String {
    let mut s = String::with_capacity(CSV_HEADER.len() + 1 + records.len() * 180);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.iter,
            r.tau,
            r.duality_gap,
            r.saddle_residual,
            r.regret_bound,
            r.dist_ref_l2,
            r.dist_ref_bregman,
            r.wall_ns
        ));
    }
    s
}

pub fn emit_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(csv_string(&trace.records).as_bytes())
        .map_err(io_err(path))
}

pub fn parse_csv(text: &str, context: &str) -> Result<Vec<MetricsRecord>> {
    let perr = |line: usize, message: String| Error::Parse {
        context: format!("{context}:{line}"),
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(perr(1, "missing or unexpected header".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(perr(
                i + 1,
                format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let real = |k: usize| {
            fields[k]
                .parse::<f64>()
                .map_err(|e| perr(i + 1, format!("field {}: {e}", k + 1)))
        };
        out.push(MetricsRecord {
            iter: fields[0]
                .parse()
                .map_err(|e| perr(i + 1, format!("field 1: {e}")))?,
            tau: real(1)?,
            duality_gap: real(2)?,
            saddle_residual: real(3)?,
            regret_bound: real(4)?,
            dist_ref_l2: real(5)?,
            dist_ref_bregman: real(6)?,
            wall_ns: fields[7]
                .parse()
                .map_err(|e| perr(i + 1, format!("field 8: {e}")))?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_csv(&text, &path.display().to_string())
}

/// Writes a standalone matplotlib script that plots the CSV at `csv_path`.
pub fn emit_plot_script(
    trace: &Trace,
    csv_path: impl AsRef<Path>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let csv = csv_path.as_ref().display().to_string();
    let title = format!(
        "{} on {:?}, tau mode {:?}",
        trace.config.algo, trace.config.game, trace.config.tau_mode
    );
    let script = format!(
        r#"#!/usr/bin/env python3
import csv
import math

import matplotlib.pyplot as plt

CSV = {csv:?}
COLUMNS = ["duality_gap", "saddle_residual", "regret_bound"]

rows = list(csv.DictReader(open(CSV)))
iters = [int(r["iter"]) for r in rows]
fig, ax = plt.subplots(figsize=(7, 4.5))
for col in COLUMNS:
    pts = [(t, float(r[col])) for t, r in zip(iters, rows)]
    pts = [(t, v) for t, v in pts if math.isfinite(v) and v > 0]
    if pts:
        ax.loglog(*zip(*pts), label=col)
ax.set_xlabel("iteration")
ax.set_title({title:?})
ax.legend()
fig.tight_layout()
fig.savefig(CSV.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    );
    fs::write(path, script).map_err(io_err(path))
}
