//! Dilated regularizers `ψ(z) = Σ_h α_h z_{σ(h)} ψΔ(z_h / z_{σ(h)})`.
//!
//! Off the treeplex the parent mass `z_{σ(h)}` is replaced by the block mass
//! `Σ_{i∈Ω_h} z_i`. Both agree on valid strategies; the block form makes each
//! term depend on its own block only, so the gradient has no child terms and
//! is exactly `α_h ∇ψΔ(q_h)` up to the base-specific constant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::games::{GameSpec, JointStrategy, Player};
use crate::simplex;
use crate::treeplex::{Sense, Treeplex};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegKind {
    /// `ψΔ(q) = Σ q_i log q_i`
    Entropy,
    /// `ψΔ(q) = ½ Σ q_i²`
    Euclidean,
}

impl RegKind {
    pub fn base_value(self, q: &[f64]) -> f64 {
        match self {
            RegKind::Entropy => q.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum(),
            RegKind::Euclidean => 0.5 * q.iter().map(|p| p * p).sum::<f64>(),
        }
    }

    /// `∇ψΔ(q)`; `−∞` entries for zero probabilities under entropy.
    pub fn base_grad(self, q: &[f64], out: &mut [f64]) {
        match self {
            RegKind::Entropy => q.iter().zip(out).for_each(|(p, o)| *o = p.ln() + 1.0),
            RegKind::Euclidean => out.copy_from_slice(q),
        }
    }

    /// `D_ψΔ(p, q)` on the simplex.
    pub fn base_bregman(self, p: &[f64], q: &[f64]) -> Result<f64> {
        match self {
            RegKind::Entropy => {
                let mut kl = 0.0;
                for (a, b) in p.iter().zip(q) {
                    if *a > 0.0 {
                        if *b <= 0.0 {
                            return Err(Error::Boundary(
                                "KL divergence against a zero probability".into(),
                            ));
                        }
                        kl += a * (a / b).ln();
                    }
                }
                Ok(kl)
            }
            RegKind::Euclidean => {
                Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
            }
        }
    }
}

/// `α_h = 2 + 2 · max_{i∈Ω_h} Σ_{h'∈H_i} α_{h'}`, computed leaf to root.
pub fn compute_alpha(tp: &Treeplex) -> Vec<f64> {
    let mut alpha = vec![0.0; tp.num_infosets()];
    for &h in tp.topo_order() {
        let below = tp.infosets()[h]
            .indices()
            .map(|i| tp.children(i).iter().map(|&c| alpha[c]).sum::<f64>())
            .fold(0.0, f64::max);
        alpha[h] = 2.0 + 2.0 * below;
    }
    alpha
}

/// Log-sum-exp with max subtraction; writes the softmax into `q`.
pub(crate) fn softmax_into(logits: &[f64], q: &mut [f64]) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (p, l) in q.iter_mut().zip(logits) {
        *p = (l - m).exp();
        s += *p;
    }
    q.iter_mut().for_each(|p| *p /= s);
    m + s.ln()
}

/// `min_{q∈Δ^γ} ⟨v, q⟩ + (β/2)‖q‖²` for `β > 0`; writes the minimizer.
pub(crate) fn euclidean_local(v: &[f64], beta: f64, gamma: f64, q: &mut [f64]) -> Result<f64> {
    let target: Vec<f64> = v.iter().map(|x| -x / beta).collect();
    simplex::project_into(&target, gamma, q)?;
    Ok(q.iter()
        .zip(v)
        .map(|(p, x)| p * x + 0.5 * beta * p * p)
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilatedRegularizer {
    kind: RegKind,
    alpha: Vec<f64>,
    tp: Arc<Treeplex>,
}

impl DilatedRegularizer {
    pub fn new(tp: Arc<Treeplex>, kind: RegKind) -> Self {
        let alpha = compute_alpha(&tp);
        Self { kind, alpha, tp }
    }

    pub fn with_alpha(tp: Arc<Treeplex>, kind: RegKind, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != tp.num_infosets() {
            return Err(Error::Dimension {
                expected: tp.num_infosets(),
                got: alpha.len(),
            });
        }
        if alpha.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Config("regularizer weights must be positive".into()));
        }
        Ok(Self { kind, alpha, tp })
    }

    pub fn kind(&self) -> RegKind {
        self.kind
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(0.0, f64::max)
    }

    pub fn treeplex(&self) -> &Treeplex {
        &self.tp
    }

    pub fn value(&self, z: &[f64]) -> Result<f64> {
        self.tp.check_dim(z)?;
        let mut total = 0.0;
        let mut q = Vec::with_capacity(self.tp.max_actions());
        for h in self.tp.infosets() {
            let block = &z[h.indices()];
            let mass: f64 = block.iter().sum();
            if mass > 0.0 {
                q.clear();
                q.extend(block.iter().map(|v| v / mass));
                total += self.alpha[h.id] * mass * self.kind.base_value(&q);
            }
        }
        Ok(total)
    }

    pub fn grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.tp.check_dim(z)?;
        let mut out = vec![0.0; z.len()];
        for h in self.tp.infosets() {
            let block = &z[h.indices()];
            let mass: f64 = block.iter().sum();
            let a = self.alpha[h.id];
            match self.kind {
                RegKind::Entropy => {
                    for i in h.indices() {
                        if !(z[i] > 0.0) {
                            return Err(Error::Boundary(format!(
                                "entropy gradient at z[{i}] = {}",
                                z[i]
                            )));
                        }
                        out[i] = a * (z[i] / mass).ln();
                    }
                }
                RegKind::Euclidean => {
                    let uniform = 1.0 / h.len as f64;
                    let q = |i: usize| if mass > 0.0 { z[i] / mass } else { uniform };
                    let sq: f64 = h.indices().map(|i| q(i) * q(i)).sum();
                    for i in h.indices() {
                        out[i] = 0.5 * a * (2.0 * q(i) - sq);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dilated form `Σ_h α_h z1_{σ(h)} D_ψΔ(q1_h, q2_h)`.
    pub fn bregman(&self, z1: &[f64], z2: &[f64]) -> Result<f64> {
        let q1 = self.tp.sequence_to_behavioral(z1)?.q;
        let q2 = self.tp.sequence_to_behavioral(z2)?.q;
        let mut total = 0.0;
        for h in self.tp.infosets() {
            let parent = self.tp.parent_mass(h.id, z1);
            if parent > 0.0 {
                let r = h.indices();
                total +=
                    self.alpha[h.id] * parent * self.kind.base_bregman(&q1[r.clone()], &q2[r])?;
            }
        }
        Ok(total)
    }

    /// `ψ(z1) − ψ(z2) − ⟨∇ψ(z2), z1 − z2⟩`.
    pub fn bregman_generic(&self, z1: &[f64], z2: &[f64]) -> Result<f64> {
        let g = self.grad(z2)?;
        let lin: f64 = g
            .iter()
            .zip(z1.iter().zip(z2))
            .map(|(g, (a, b))| g * (a - b))
            .sum();
        Ok(self.value(z1)? - self.value(z2)? - lin)
    }

    /// `min_{z∈Z^γ} ⟨c, z⟩ + weight · ψ(z)` by leaf-to-root decomposition.
    /// `weight == 0` reduces to a linear best response.
    pub fn smoothed_response(&self, c: &[f64], weight: f64, gamma: f64) -> Result<(f64, Vec<f64>)> {
        self.tp.check_dim(c)?;
        if weight == 0.0 {
            return self.tp.best_response(c, gamma, Sense::Min);
        }
        if !(weight > 0.0) {
            return Err(Error::Config(format!(
                "regularization weight must be nonnegative, got {weight}"
            )));
        }
        self.tp.check_gamma(gamma)?;
        if self.kind == RegKind::Entropy && gamma > 0.0 {
            return Err(Error::Unsupported(
                "entropy regularizer over a perturbed treeplex".into(),
            ));
        }
        let mut v = Vec::with_capacity(self.tp.max_actions());
        self.tp.solve_dilated(|h, cont, q| {
            let info = &self.tp.infosets()[h];
            let beta = weight * self.alpha[h];
            v.clear();
            v.extend(info.indices().zip(cont).map(|(i, k)| c[i] + k));
            match self.kind {
                RegKind::Entropy => {
                    v.iter_mut().for_each(|x| *x = -*x / beta);
                    Ok(-beta * softmax_into(&v, q))
                }
                RegKind::Euclidean => euclidean_local(&v, beta, gamma, q),
            }
        })
    }
}

/// Regularizers of both players of a game, sharing one base kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizers {
    pub x: DilatedRegularizer,
    pub y: DilatedRegularizer,
}

impl Regularizers {
    pub fn new(game: &GameSpec, kind: RegKind) -> Self {
        Self {
            x: DilatedRegularizer::new(game.treeplex_arc(Player::X), kind),
            y: DilatedRegularizer::new(game.treeplex_arc(Player::Y), kind),
        }
    }

    pub fn kind(&self) -> RegKind {
        self.x.kind
    }

    pub fn get(&self, p: Player) -> &DilatedRegularizer {
        match p {
            Player::X => &self.x,
            Player::Y => &self.y,
        }
    }

    pub fn alpha_max(&self) -> f64 {
        self.x.alpha_max().max(self.y.alpha_max())
    }

    pub fn value(&self, z: &JointStrategy) -> Result<f64> {
        Ok(self.x.value(&z.x)? + self.y.value(&z.y)?)
    }

    pub fn bregman(&self, z1: &JointStrategy, z2: &JointStrategy) -> Result<f64> {
        Ok(self.x.bregman(&z1.x, &z2.x)? + self.y.bregman(&z1.y, &z2.y)?)
    }

    /// `C_B` for the joint problem: `P‖α‖∞ log C_Ω` (entropy) or
    /// `P‖α‖∞ / C_Ω` (Euclidean).
    pub fn bound(&self) -> f64 {
        let p = self.x.tp.dim() + self.y.tp.dim();
        let c_omega = self.x.tp.max_actions().max(self.y.tp.max_actions()) as f64;
        match self.kind() {
            RegKind::Entropy => p as f64 * self.alpha_max() * c_omega.ln(),
            RegKind::Euclidean => p as f64 * self.alpha_max() / c_omega,
        }
    }
}

/// One local step on a simplex:
/// `argmin_{q∈Δ^γ} ⟨g, q⟩ + λ₁ D(q, q_prev) + w D(q, q_anchor)`.
pub fn local_prox(
    kind: RegKind,
    q_prev: &[f64],
    g: &[f64],
    step: f64,
    anchor: Option<(f64, &[f64])>,
    gamma: f64,
) -> Result<Vec<f64>> {
    let n = q_prev.len();
    if g.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: g.len(),
        });
    }
    if !(step > 0.0) {
        return Err(Error::Config(format!(
            "local step must be positive, got {step}"
        )));
    }
    let (w, q_anchor) = match anchor {
        Some((w, qa)) if w > 0.0 => {
            if qa.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: qa.len(),
                });
            }
            (w, qa)
        }
        Some((w, _)) if w < 0.0 => {
            return Err(Error::Config(format!(
                "anchor weight must be nonnegative, got {w}"
            )))
        }
        _ => (0.0, q_prev),
    };
    let total = step + w;
    let mut q = vec![0.0; n];
    match kind {
        RegKind::Euclidean => {
            let target: Vec<f64> = (0..n)
                .map(|i| (step * q_prev[i] + w * q_anchor[i] - g[i]) / total)
                .collect();
            simplex::project_into(&target, gamma, &mut q)?;
        }
        RegKind::Entropy => {
            if gamma > 0.0 {
                return Err(Error::Unsupported(
                    "entropy local prox over a perturbed simplex".into(),
                ));
            }
            simplex::check_gamma(gamma, n)?;
            let logits: Vec<f64> = (0..n)
                .map(|i| {
                    let mut l = step * q_prev[i].ln() - g[i];
                    if w > 0.0 {
                        l += w * q_anchor[i].ln();
                    }
                    l / total
                })
                .collect();
            softmax_into(&logits, &mut q);
        }
    }
    Ok(q)
}
