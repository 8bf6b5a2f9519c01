//! Regularized dilated optimistic mirror descent.
//!
//! With entropy as the base regularizer this is Reg-DOMWU, with the
//! Euclidean base it is Reg-DOGDA. One step computes
//!
//! ```text
//! z_t     = argmin_z ⟨z, F(z_{t-1}) + τ∇ψ(ẑ_t)⟩ + D_ψ(z, ẑ_t)/η
//! ẑ_{t+1} = argmin_z ⟨z, F(z_t)     + τ∇ψ(ẑ_t)⟩ + D_ψ(z, ẑ_t)/η
//! ```
//!
//! for each player separately, starting from `z_0 = ẑ_1 = uniform`.

use crate::games::{GameSpec, JointStrategy, Player};
use crate::regularizer::{
    euclidean_local, softmax_into, DilatedRegularizer, RegKind, Regularizers,
};
use crate::{Error, Result};

/// `1 / (8P)`.
pub fn default_eta(game: &GameSpec) -> f64 {
    1.0 / (8.0 * game.dim() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomdState {
    /// `z_{t-1}`
    pub z_prev: JointStrategy,
    /// `ẑ_t`
    pub z_hat: JointStrategy,
    pub iter: usize,
    pub eta: f64,
    pub tau: f64,
}

impl DomdState {
    pub fn new(game: &GameSpec, eta: f64, tau: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Config(format!(
                "stepsize must be positive, got {eta}"
            )));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!(
                "regularization weight must be nonnegative, got {tau}"
            )));
        }
        if eta > default_eta(game) * (1.0 + 1e-12) || tau > 1.0 {
            log::warn!("eta = {eta}, tau = {tau} is outside the eta <= 1/(8P), tau <= 1 regime");
        }
        let u = game.uniform();
        Ok(Self {
            z_prev: u.clone(),
            z_hat: u,
            iter: 0,
            eta,
            tau,
        })
    }
}

/// The prox center `ẑ` in the form each base regularizer needs:
/// `ln q̂` for entropy, the block gradient of `ψ` for Euclidean.
struct Center {
    aux: Vec<f64>,
}

impl Center {
    fn new(reg: &DilatedRegularizer, z_hat: &[f64]) -> Result<Self> {
        let aux = match reg.kind() {
            RegKind::Entropy => {
                let q = reg.treeplex().sequence_to_behavioral(z_hat)?.q;
                q.iter().map(|p| p.ln()).collect()
            }
            RegKind::Euclidean => reg.grad(z_hat)?,
        };
        Ok(Self { aux })
    }
}

fn prox_from_center(
    reg: &DilatedRegularizer,
    center: &Center,
    g: &[f64],
    eta: f64,
    tau: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    let tp = reg.treeplex();
    tp.check_dim(g)?;
    tp.check_gamma(gamma)?;
    let alpha = reg.alpha();
    let mut v = Vec::with_capacity(tp.max_actions());
    let (_, z) = match reg.kind() {
        RegKind::Entropy => {
            if gamma > 0.0 {
                return Err(Error::Unsupported(
                    "Reg-DOMWU over a perturbed treeplex".into(),
                ));
            }
            let keep = 1.0 - eta * tau;
            if !(keep > 0.0) {
                return Err(Error::Config(format!(
                    "eta * tau must be below 1, got {}",
                    eta * tau
                )));
            }
            tp.solve_dilated(|h, cont, q| {
                let a = alpha[h];
                v.clear();
                v.extend(
                    tp.infosets()[h]
                        .indices()
                        .zip(cont)
                        .map(|(i, c)| keep * center.aux[i] - eta * (g[i] + c) / a),
                );
                Ok(-(a / eta) * softmax_into(&v, q))
            })?
        }
        RegKind::Euclidean => tp.solve_dilated(|h, cont, q| {
            v.clear();
            v.extend(
                tp.infosets()[h]
                    .indices()
                    .zip(cont)
                    .map(|(i, c)| (g[i] + tau * center.aux[i]) - center.aux[i] / eta + c),
            );
            euclidean_local(&v, alpha[h] / eta, gamma, q)
        })?,
    };
    Ok(z)
}

/// `argmin_{z∈Z^γ} ⟨z, g + τ∇ψ(ẑ)⟩ + D_ψ(z, ẑ)/η`, solved exactly by a
/// leaf-to-root pass. Entropy propagates `−(α_h/η)·logsumexp` values and
/// supports `γ = 0` only.
pub fn dilated_prox(
    reg: &DilatedRegularizer,
    z_hat: &[f64],
    g: &[f64],
    eta: f64,
    tau: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    reg.treeplex().check_dim(z_hat)?;
    let center = Center::new(reg, z_hat)?;
    prox_from_center(reg, &center, g, eta, tau, gamma)
}

/// One optimistic step. Updates `state` to `(z_t, ẑ_{t+1})` and returns `z_t`.
pub fn domd_step(
    state: &mut DomdState,
    game: &GameSpec,
    regs: &Regularizers,
    gamma: f64,
) -> Result<JointStrategy> {
    let cx = Center::new(&regs.x, &state.z_hat.x)?;
    let cy = Center::new(&regs.y, &state.z_hat.y)?;
    let (eta, tau) = (state.eta, state.tau);

    let gx = game.gradient(Player::X, &state.z_prev);
    let gy = game.gradient(Player::Y, &state.z_prev);
    let z_t = JointStrategy {
        x: prox_from_center(&regs.x, &cx, &gx, eta, tau, gamma)?,
        y: prox_from_center(&regs.y, &cy, &gy, eta, tau, gamma)?,
    };

    let gx = game.gradient(Player::X, &z_t);
    let gy = game.gradient(Player::Y, &z_t);
    let z_next = JointStrategy {
        x: prox_from_center(&regs.x, &cx, &gx, eta, tau, gamma)?,
        y: prox_from_center(&regs.y, &cy, &gy, eta, tau, gamma)?,
    };

    state.z_prev = z_t.clone();
    state.z_hat = z_next;
    state.iter += 1;
    Ok(z_t)
}

/// A self-contained Reg-DOMD run: game, regularizers and state.
#[derive(Debug, Clone)]
pub struct DomdSolver {
    pub game: GameSpec,
    pub regs: Regularizers,
    pub gamma: f64,
    pub state: DomdState,
}

impl DomdSolver {
    pub fn new(game: GameSpec, kind: RegKind, eta: f64, tau: f64, gamma: f64) -> Result<Self> {
        game.tp_x().check_gamma(gamma)?;
        game.tp_y().check_gamma(gamma)?;
        if kind == RegKind::Entropy && gamma > 0.0 {
            return Err(Error::Unsupported(
                "Reg-DOMWU over a perturbed treeplex".into(),
            ));
        }
        let regs = Regularizers::new(&game, kind);
        let state = DomdState::new(&game, eta, tau)?;
        Ok(Self {
            game,
            regs,
            gamma,
            state,
        })
    }

    pub fn step(&mut self) -> Result<JointStrategy> {
        domd_step(&mut self.state, &self.game, &self.regs, self.gamma)
    }

    /// Restarts from the uniform profile, keeping `η` and `τ`.
    pub fn reset(&mut self) {
        let u = self.game.uniform();
        self.state.z_prev = u.clone();
        self.state.z_hat = u;
    }
}
