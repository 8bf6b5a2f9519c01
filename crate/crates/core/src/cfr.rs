//! Laminar regret decomposition solvers.
//!
//! Counterfactual values `V^h`/`W^h`, per-infoset regret bookkeeping, and three
//! local regret minimizers plugged into it: Reg-DS-OptMD (Reg-CFR), regret
//! matching (CFR) and regret matching plus (CFR+). The last two see the
//! regularized loss through its linearization `V^h + τα_h∇ψΔ(q_h)`.

use crate::games::{GameSpec, JointStrategy, Player};
use crate::regularizer::{
    euclidean_local, local_prox, softmax_into, DilatedRegularizer, RegKind, Regularizers,
};
use crate::simplex;
use crate::treeplex::{Sense, Treeplex};
use crate::{Error, Result};

/// Counterfactual values of one player. `v` is indexed by sequence (block
/// `Ω_h` holds `V^h`), `w` by infoset.
#[derive(Debug, Clone, PartialEq)]
pub struct CfValues {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl CfValues {
    /// `Σ_{h root} W^h`, the regularized value of the whole treeplex.
    pub fn root_value(&self, tp: &Treeplex) -> f64 {
        tp.roots().iter().map(|&h| self.w[h]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointCfValues {
    pub x: CfValues,
    pub y: CfValues,
}

impl JointCfValues {
    pub fn player(&self, p: Player) -> &CfValues {
        match p {
            Player::X => &self.x,
            Player::Y => &self.y,
        }
    }
}

/// One leaf-to-root pass: `V^h_i = g_i + Σ_{h'∈H_i} W^{h'}` and
/// `W^h = ⟨q_h, V^h⟩ + τα_hψΔ(q_h)`.
pub fn cf_values_behavioral(
    reg: &DilatedRegularizer,
    tau: f64,
    q: &[f64],
    g: &[f64],
) -> Result<CfValues> {
    let tp = reg.treeplex();
    tp.check_dim(q)?;
    tp.check_dim(g)?;
    let alpha = reg.alpha();
    let mut v = vec![0.0; tp.dim()];
    let mut w = vec![0.0; tp.num_infosets()];
    for &h in tp.topo_order() {
        let r = tp.infosets()[h].indices();
        let mut total = 0.0;
        for i in r.clone() {
            v[i] = g[i] + tp.children(i).iter().map(|&c| w[c]).sum::<f64>();
            total += q[i] * v[i];
        }
        if tau != 0.0 {
            total += tau * alpha[h] * reg.kind().base_value(&q[r]);
        }
        w[h] = total;
    }
    Ok(CfValues { v, w })
}

/// Counterfactual values of both players at `z`; the min player sees `Ay`,
/// the max player `−Aᵀx`.
pub fn counterfactual_values(
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    z: &JointStrategy,
) -> Result<JointCfValues> {
    let qx = game.tp_x().sequence_to_behavioral(&z.x)?.q;
    let qy = game.tp_y().sequence_to_behavioral(&z.y)?.q;
    joint_values_behavioral(game, regs, tau, &qx, &qy, z)
}

fn joint_values_behavioral(
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    qx: &[f64],
    qy: &[f64],
    z: &JointStrategy,
) -> Result<JointCfValues> {
    Ok(JointCfValues {
        x: cf_values_behavioral(&regs.x, tau, qx, &game.ay(&z.y))?,
        y: cf_values_behavioral(&regs.y, tau, qy, &game.neg_atx(&z.x))?,
    })
}

/// `min_{q∈Δ^γ} ⟨v, q⟩ + β ψΔ(q)` for `β ≥ 0`.
fn regularized_local_min(kind: RegKind, v: &[f64], beta: f64, gamma: f64) -> Result<f64> {
    let mut q = vec![0.0; v.len()];
    if beta == 0.0 {
        simplex::check_gamma(gamma, v.len())?;
        return Ok(simplex::linear_opt(v, gamma, false, &mut q));
    }
    match kind {
        RegKind::Euclidean => euclidean_local(v, beta, gamma, &mut q),
        RegKind::Entropy => {
            if gamma > 0.0 {
                return Err(Error::Unsupported(
                    "entropy local regret over a perturbed simplex".into(),
                ));
            }
            let logits: Vec<f64> = v.iter().map(|x| -x / beta).collect();
            Ok(-beta * softmax_into(&logits, &mut q))
        }
    }
}

/// Running sums needed for the local regrets of one player:
/// `Σ_t V^h_t`, `Σ_t l^h_t(q_{t,h})`, `Σ_t τ_t` and `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    cum_v: Vec<f64>,
    cum_loss: Vec<f64>,
    tau_sum: f64,
    rounds: usize,
}

impl RegretLedger {
    pub fn new(tp: &Treeplex) -> Self {
        Self {
            cum_v: vec![0.0; tp.dim()],
            cum_loss: vec![0.0; tp.num_infosets()],
            tau_sum: 0.0,
            rounds: 0,
        }
    }

    /// Adds one round whose played losses are `values.w`.
    pub fn record(&mut self, values: &CfValues, tau: f64) {
        self.cum_v
            .iter_mut()
            .zip(&values.v)
            .for_each(|(c, v)| *c += v);
        self.cum_loss
            .iter_mut()
            .zip(&values.w)
            .for_each(|(c, w)| *c += w);
        self.tau_sum += tau;
        self.rounds += 1;
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn tau_sum(&self) -> f64 {
        self.tau_sum
    }

    /// `Σ_t l^h_t(q) = ⟨Σ_t V^h_t, q⟩ + (Σ_t τ_t) α_h ψΔ(q)`.
    pub fn cumulative_loss_at(&self, reg: &DilatedRegularizer, h: usize, q: &[f64]) -> f64 {
        let r = reg.treeplex().infosets()[h].indices();
        let lin: f64 = self.cum_v[r].iter().zip(q).map(|(v, p)| v * p).sum();
        lin + self.tau_sum * reg.alpha()[h] * reg.kind().base_value(q)
    }

    /// `R^h_T = Σ_t l^h_t(q_{t,h}) − min_{q∈Δ^γ} Σ_t l^h_t(q)`.
    pub fn local_regret(&self, reg: &DilatedRegularizer, h: usize, gamma: f64) -> Result<f64> {
        let r = reg.treeplex().infosets()[h].indices();
        let best = regularized_local_min(
            reg.kind(),
            &self.cum_v[r],
            self.tau_sum * reg.alpha()[h],
            gamma,
        )?;
        Ok(self.cum_loss[h] - best)
    }

    /// `max_{ẑ∈Z^γ} Σ_h ẑ_{σ(h)} R^h_T`, a best response with each local
    /// regret injected at its parent sequence.
    pub fn regret_upper_bound(&self, reg: &DilatedRegularizer, gamma: f64) -> Result<f64> {
        let tp = reg.treeplex();
        let regrets = (0..tp.num_infosets())
            .map(|h| self.local_regret(reg, h, gamma))
            .collect::<Result<Vec<_>>>()?;
        let bonus: Vec<f64> = (0..tp.dim())
            .map(|i| tp.children(i).iter().map(|&c| regrets[c]).sum())
            .collect();
        let (inner, _) = tp.best_response(&bonus, gamma, Sense::Max)?;
        Ok(inner + tp.roots().iter().map(|&h| regrets[h]).sum::<f64>())
    }
}

/// Ledgers of both players.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLedger {
    pub x: RegretLedger,
    pub y: RegretLedger,
}

impl JointLedger {
    pub fn new(game: &GameSpec) -> Self {
        Self {
            x: RegretLedger::new(game.tp_x()),
            y: RegretLedger::new(game.tp_y()),
        }
    }

    pub fn record(&mut self, values: &JointCfValues, tau: f64) {
        self.x.record(&values.x, tau);
        self.y.record(&values.y, tau);
    }

    /// `R^X_T + R^Y_T` bounded through the laminar decomposition.
    pub fn regret_upper_bound(&self, regs: &Regularizers, gamma: f64) -> Result<f64> {
        Ok(self.x.regret_upper_bound(&regs.x, gamma)?
            + self.y.regret_upper_bound(&regs.y, gamma)?)
    }
}

/// Both sides of the laminar decomposition for comparator `z`:
/// `Σ_t F(z_t)ᵀ(z_t − z) + τψ(z_t) − τψ(z)` and `Σ_h z_{σ(h)} G^h_T(q_h)`.
pub fn laminar_difference(
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    history: &[JointStrategy],
    z: &JointStrategy,
) -> Result<(f64, f64)> {
    if history.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut global = 0.0;
    let mut ledger = JointLedger::new(game);
    let psi_z = if tau != 0.0 { regs.value(z)? } else { 0.0 };
    for zt in history {
        let gx = game.ay(&zt.y);
        let gy = game.neg_atx(&zt.x);
        let lin: f64 = gx
            .iter()
            .zip(zt.x.iter().zip(&z.x))
            .map(|(g, (a, b))| g * (a - b))
            .sum::<f64>()
            + gy.iter()
                .zip(zt.y.iter().zip(&z.y))
                .map(|(g, (a, b))| g * (a - b))
                .sum::<f64>();
        let psi_t = if tau != 0.0 { regs.value(zt)? } else { 0.0 };
        global += lin + tau * (psi_t - psi_z);
        ledger.record(&counterfactual_values(game, regs, tau, zt)?, tau);
    }
    let mut decomposed = 0.0;
    for (p, ledger) in [(Player::X, &ledger.x), (Player::Y, &ledger.y)] {
        let reg = regs.get(p);
        let tp = reg.treeplex();
        let zp = z.player(p);
        let q = tp.sequence_to_behavioral(zp)?.q;
        for (h, info) in tp.infosets().iter().enumerate() {
            let mass = tp.parent_mass(h, zp);
            if mass == 0.0 {
                continue;
            }
            let g = ledger.cum_loss[h] - ledger.cumulative_loss_at(reg, h, &q[info.indices()]);
            decomposed += mass * g;
        }
    }
    Ok((global, decomposed))
}

/// Running sum of played sequence-form iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct Averager {
    sum: JointStrategy,
    count: usize,
}

impl Averager {
    pub fn new(game: &GameSpec) -> Self {
        Self {
            sum: JointStrategy {
                x: vec![0.0; game.tp_x().dim()],
                y: vec![0.0; game.tp_y().dim()],
            },
            count: 0,
        }
    }

    pub fn add(&mut self, z: &JointStrategy) {
        self.sum.x.iter_mut().zip(&z.x).for_each(|(s, v)| *s += v);
        self.sum.y.iter_mut().zip(&z.y).for_each(|(s, v)| *s += v);
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Uniform average of everything added; `None` before the first iterate.
    pub fn average(&self) -> Option<JointStrategy> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        Some(JointStrategy {
            x: self.sum.x.iter().map(|s| s / n).collect(),
            y: self.sum.y.iter().map(|s| s / n).collect(),
        })
    }
}

fn behavioral_to_joint(game: &GameSpec, qx: &[f64], qy: &[f64]) -> Result<JointStrategy> {
    Ok(JointStrategy {
        x: game.tp_x().behavioral_to_sequence(qx)?,
        y: game.tp_y().behavioral_to_sequence(qy)?,
    })
}

/// Per-player Reg-DS-OptMD state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerCfr {
    /// `q_{t-1}` before a step, `q_t` after.
    pub q_cur: Vec<f64>,
    /// `q_{t-1/2}` before a step, `q_{t+1/2}` after.
    pub q_half: Vec<f64>,
    /// `q_1`, fixed after the first step.
    pub q_anchor: Option<Vec<f64>>,
    /// `Σ_{s<t} δ^h_s` per infoset.
    pub delta_sum: Vec<f64>,
    /// `λ^h_{t-1}` per infoset.
    pub lambda_prev: Vec<f64>,
    /// `V(z_{t-1/2})`.
    pub v_half: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfrState {
    pub x: PlayerCfr,
    pub y: PlayerCfr,
    pub kappa: f64,
    pub iter: usize,
    pub ledger: JointLedger,
    pub avg: Averager,
    /// `z_{t+1/2}` of the latest step (uniform before the first).
    pub last: JointStrategy,
}

impl CfrState {
    pub fn new(game: &GameSpec, regs: &Regularizers, tau: f64, kappa: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::Config(format!(
                "kappa must be at least 1, got {kappa}"
            )));
        }
        let qx = game.tp_x().uniform_behavioral();
        let qy = game.tp_y().uniform_behavioral();
        let z = behavioral_to_joint(game, &qx, &qy)?;
        let values = joint_values_behavioral(game, regs, tau, &qx, &qy, &z)?;
        let init = |tp: &Treeplex, q: Vec<f64>, v: Vec<f64>| PlayerCfr {
            q_cur: q.clone(),
            q_half: q,
            q_anchor: None,
            delta_sum: vec![0.0; tp.num_infosets()],
            lambda_prev: vec![kappa.sqrt(); tp.num_infosets()],
            v_half: v,
        };
        Ok(Self {
            x: init(game.tp_x(), qx, values.x.v),
            y: init(game.tp_y(), qy, values.y.v),
            kappa,
            iter: 0,
            ledger: JointLedger::new(game),
            avg: Averager::new(game),
            last: z,
        })
    }

    /// `λ^h_t` for the step about to run.
    pub fn lambda(&self, p: Player, h: usize) -> f64 {
        let s = match p {
            Player::X => &self.x,
            Player::Y => &self.y,
        };
        (self.kappa + s.delta_sum[h]).sqrt()
    }

    pub fn average_strategy(&self) -> Option<JointStrategy> {
        self.avg.average()
    }

    /// Recomputes the cached `V(z_{t-1/2})` under a new `τ`.
    pub fn refresh_values(&mut self, game: &GameSpec, regs: &Regularizers, tau: f64) -> Result<()> {
        let z = behavioral_to_joint(game, &self.x.q_half, &self.y.q_half)?;
        let values = joint_values_behavioral(game, regs, tau, &self.x.q_half, &self.y.q_half, &z)?;
        self.x.v_half = values.x.v;
        self.y.v_half = values.y.v;
        Ok(())
    }

    /// Continues from the latest half iterate: `q_t ← q_{t+1/2}`.
    pub fn warm_restart(&mut self) {
        self.x.q_cur.clone_from(&self.x.q_half);
        self.y.q_cur.clone_from(&self.y.q_half);
    }
}

fn regcfr_local_updates(
    st: &mut PlayerCfr,
    reg: &DilatedRegularizer,
    tau: f64,
    gamma: f64,
    kappa: f64,
) -> Result<()> {
    let tp = reg.treeplex();
    let kind = reg.kind();
    let mut grad = vec![0.0; tp.max_actions()];
    for (h, info) in tp.infosets().iter().enumerate() {
        let r = info.indices();
        let n = r.len();
        let ta = tau * reg.alpha()[h];
        let lam_prev = st.lambda_prev[h];
        let lam = (kappa + st.delta_sum[h]).sqrt();
        let v = &st.v_half[r.clone()];

        kind.base_grad(&st.q_cur[r.clone()], &mut grad[..n]);
        let g: Vec<f64> = v.iter().zip(&grad[..n]).map(|(v, d)| v + ta * d).collect();
        let anchor = st
            .q_anchor
            .as_ref()
            .map(|a| (lam - lam_prev, &a[r.clone()]));
        let q_t = local_prox(kind, &st.q_cur[r.clone()], &g, lam_prev, anchor, gamma)?;

        kind.base_grad(&q_t, &mut grad[..n]);
        let g: Vec<f64> = v.iter().zip(&grad[..n]).map(|(v, d)| v + ta * d).collect();
        let q_half = local_prox(kind, &q_t, &g, lam, None, gamma)?;

        st.q_cur[r.clone()].copy_from_slice(&q_t);
        st.q_half[r].copy_from_slice(&q_half);
        st.lambda_prev[h] = lam;
    }
    Ok(())
}

fn regcfr_finish(st: &mut PlayerCfr, tp: &Treeplex, values: &CfValues) {
    for (h, info) in tp.infosets().iter().enumerate() {
        let r = info.indices();
        st.delta_sum[h] += st.v_half[r.clone()]
            .iter()
            .zip(&values.v[r])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    st.v_half.copy_from_slice(&values.v);
    if st.q_anchor.is_none() {
        st.q_anchor = Some(st.q_cur.clone());
    }
}

/// One synchronous Reg-CFR sweep. Every infoset of both players updates from
/// the frozen `V(z_{t-1/2})`; returns the new played iterate `z_{t+1/2}`.
pub fn regcfr_step(
    state: &mut CfrState,
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    gamma: f64,
) -> Result<JointStrategy> {
    let kappa = state.kappa;
    regcfr_local_updates(&mut state.x, &regs.x, tau, gamma, kappa)?;
    regcfr_local_updates(&mut state.y, &regs.y, tau, gamma, kappa)?;

    let z = behavioral_to_joint(game, &state.x.q_half, &state.y.q_half)?;
    let values = joint_values_behavioral(game, regs, tau, &state.x.q_half, &state.y.q_half, &z)?;
    regcfr_finish(&mut state.x, game.tp_x(), &values.x);
    regcfr_finish(&mut state.y, game.tp_y(), &values.y);

    state.ledger.record(&values, tau);
    state.avg.add(&z);
    state.last = z.clone();
    state.iter += 1;
    Ok(z)
}

/// Regret matching state for CFR (`plus = false`) or CFR+ (`plus = true`).
#[derive(Debug, Clone, PartialEq)]
pub struct RmState {
    pub regret_x: Vec<f64>,
    pub regret_y: Vec<f64>,
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub plus: bool,
    pub iter: usize,
    pub ledger: JointLedger,
    pub avg: Averager,
    /// The most recently played iterate.
    pub last: JointStrategy,
}

impl RmState {
    pub fn new(game: &GameSpec, plus: bool) -> Self {
        let qx = game.tp_x().uniform_behavioral();
        let qy = game.tp_y().uniform_behavioral();
        Self {
            regret_x: vec![0.0; game.tp_x().dim()],
            regret_y: vec![0.0; game.tp_y().dim()],
            qx,
            qy,
            plus,
            iter: 0,
            ledger: JointLedger::new(game),
            avg: Averager::new(game),
            last: game.uniform(),
        }
    }

    pub fn average_strategy(&self) -> Option<JointStrategy> {
        self.avg.average()
    }
}

/// Next strategy from cumulative regrets: positive parts normalized, or
/// uniform when no regret is positive.
pub fn regret_matching(regret: &[f64], q: &mut [f64]) {
    let pos: f64 = regret.iter().map(|r| r.max(0.0)).sum();
    if pos > 0.0 {
        q.iter_mut()
            .zip(regret)
            .for_each(|(p, r)| *p = r.max(0.0) / pos);
    } else {
        let u = 1.0 / q.len() as f64;
        q.iter_mut().for_each(|p| *p = u);
    }
}

fn rm_player(
    regret: &mut [f64],
    q: &mut [f64],
    reg: &DilatedRegularizer,
    values: &CfValues,
    tau: f64,
    plus: bool,
) {
    let tp = reg.treeplex();
    let mut loss = vec![0.0; tp.max_actions()];
    for (h, info) in tp.infosets().iter().enumerate() {
        let r = info.indices();
        let n = r.len();
        let loss = &mut loss[..n];
        reg.kind().base_grad(&q[r.clone()], loss);
        let ta = tau * reg.alpha()[h];
        loss.iter_mut()
            .zip(&values.v[r.clone()])
            .for_each(|(l, v)| *l = v + ta * *l);
        let expected: f64 = loss.iter().zip(&q[r.clone()]).map(|(l, p)| l * p).sum();
        for (rg, l) in regret[r.clone()].iter_mut().zip(loss.iter()) {
            *rg += expected - l;
            if plus {
                *rg = rg.max(0.0);
            }
        }
        regret_matching(&regret[r.clone()], &mut q[r]);
    }
}

/// One simultaneous regret matching step. Plays the current strategies,
/// records them, then updates every infoset from `V(z_t) + τα∇ψΔ(q_t)`.
pub fn rm_step(
    state: &mut RmState,
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    gamma: f64,
) -> Result<JointStrategy> {
    if gamma > 0.0 {
        return Err(Error::Unsupported(
            "regret matching over a perturbed treeplex".into(),
        ));
    }
    if tau > 0.0 && regs.kind() == RegKind::Entropy {
        return Err(Error::Unsupported(
            "regret matching with an entropy-regularized loss".into(),
        ));
    }
    let z = behavioral_to_joint(game, &state.qx, &state.qy)?;
    let values = joint_values_behavioral(game, regs, tau, &state.qx, &state.qy, &z)?;
    rm_player(
        &mut state.regret_x,
        &mut state.qx,
        &regs.x,
        &values.x,
        tau,
        state.plus,
    );
    rm_player(
        &mut state.regret_y,
        &mut state.qy,
        &regs.y,
        &values.y,
        tau,
        state.plus,
    );
    state.ledger.record(&values, tau);
    state.avg.add(&z);
    state.last = z.clone();
    state.iter += 1;
    Ok(z)
}
