//! Certificates of solution quality: duality gap, regularized saddle
//! residual, reference equilibria of the regularized game, distances, and
//! the perturbed-game gap bound.

use serde::{Deserialize, Serialize};

use crate::domd::{default_eta, domd_step, DomdState};
use crate::games::{GameSpec, JointStrategy};
use crate::regularizer::Regularizers;
use crate::treeplex::Sense;
use crate::{Error, Result};

/// One logged evaluation point of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub iter: usize,
    pub tau: f64,
    pub duality_gap: f64,
    pub saddle_residual: f64,
    pub regret_bound: f64,
    pub dist_ref_l2: f64,
    pub dist_ref_bregman: f64,
    pub wall_ns: u64,
}

/// `max_{ŷ∈Y^γ} xᵀAŷ − min_{x̂∈X^γ} x̂ᵀAy`. For `z ∈ Z^γ` this is a maximum
/// over a set containing `z` itself, so rounding below zero is clamped.
pub fn duality_gap(game: &GameSpec, z: &JointStrategy, gamma: f64) -> Result<f64> {
    let (min_x, _) = game
        .tp_x()
        .best_response(&game.ay(&z.y), gamma, Sense::Min)?;
    let (min_y, _) = game
        .tp_y()
        .best_response(&game.neg_atx(&z.x), gamma, Sense::Min)?;
    Ok((-min_y - min_x).max(0.0))
}

/// `max_{ẑ∈Z^γ} F(z)ᵀ(z − ẑ) + τψ(z) − τψ(ẑ)`. Each player's inner problem is
/// a smoothed best response; at `τ = 0` this is [`duality_gap`].
pub fn saddle_residual(
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    z: &JointStrategy,
    gamma: f64,
) -> Result<f64> {
    if tau == 0.0 {
        return duality_gap(game, z, gamma);
    }
    let (min_x, _) = regs.x.smoothed_response(&game.ay(&z.y), tau, gamma)?;
    let (min_y, _) = regs.y.smoothed_response(&game.neg_atx(&z.x), tau, gamma)?;
    Ok((tau * regs.value(z)? - min_x - min_y).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Stepsize of the reference run; `None` means `1/(8P)`.
    pub eta: Option<f64>,
    pub max_iters: usize,
    /// Residual evaluation period.
    pub check_every: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            eta: None,
            max_iters: 5_000_000,
            check_every: 50,
        }
    }
}

/// The regularized equilibrium `z*_τ` (over `Z^γ`), computed by a fixed-τ
/// Reg-DOMD run with the kind of `regs` until the saddle residual of `ẑ`
/// drops to `tol`.
pub fn reference_solution(
    game: &GameSpec,
    regs: &Regularizers,
    tau: f64,
    gamma: f64,
    tol: f64,
    opts: ReferenceOptions,
) -> Result<JointStrategy> {
    if !(tau > 0.0) {
        return Err(Error::Config(format!(
            "reference solution needs a positive tau, got {tau}"
        )));
    }
    let eta = opts.eta.unwrap_or_else(|| default_eta(game));
    let mut state = DomdState::new(game, eta, tau)?;
    let check_every = opts.check_every.max(1);
    let mut residual = saddle_residual(game, regs, tau, &state.z_hat, gamma)?;
    while state.iter < opts.max_iters {
        if residual <= tol {
            log::debug!(
                "reference at tau = {tau} reached residual {residual:.3e} after {} steps",
                state.iter
            );
            return Ok(state.z_hat);
        }
        for _ in 0..check_every {
            domd_step(&mut state, game, regs, gamma)?;
        }
        residual = saddle_residual(game, regs, tau, &state.z_hat, gamma)?;
    }
    if residual <= tol {
        return Ok(state.z_hat);
    }
    Err(Error::Convergence {
        iters: state.iter,
        residual,
        target: tol,
    })
}

/// `(gap over Z^0, gap over Z^γ + γP², holds)` where `holds` allows `1e−9`
/// of rounding.
pub fn efpe_gap_bound_check(
    game: &GameSpec,
    z: &JointStrategy,
    gamma: f64,
) -> Result<(f64, f64, bool)> {
    let lhs = duality_gap(game, z, 0.0)?;
    let p = game.dim() as f64;
    let rhs = duality_gap(game, z, gamma)? + gamma * p * p;
    Ok((lhs, rhs, lhs <= rhs + 1e-9))
}

/// `(‖z − z_ref‖₂, D_ψ(z_ref, z))`.
pub fn distance_metrics(
    regs: &Regularizers,
    z: &JointStrategy,
    z_ref: &JointStrategy,
) -> Result<(f64, f64)> {
    Ok((z.l2_distance(z_ref), regs.bregman(z_ref, z)?))
}

/// `2τC_B + 2P·sqrt(D)`, the duality gap bound for a point at Bregman
/// distance `D` from `z*_τ`.
pub fn tau_gap_bound(game: &GameSpec, regs: &Regularizers, tau: f64, bregman: f64) -> f64 {
    2.0 * tau * regs.bound() + 2.0 * game.dim() as f64 * bregman.max(0.0).sqrt()
}
