//! Two-player zero-sum games in sequence form.
//!
//! The first player `x` minimizes `xᵀAy`, the second player `y` maximizes it;
//! `A[i][j]` is the (chance-weighted) payoff to `y` when `x` plays sequence
//! `i` and `y` plays sequence `j`. Payoffs are normalized into `[-1, 1]` and
//! the divisor is kept in [`GameSpec::scale`].

mod builder;
mod io;
mod kuhn;
mod leduc;
mod matrix;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::treeplex::Treeplex;
use crate::{Error, Result};

pub use io::{load_game, load_matrix, save_game};
pub use kuhn::build_kuhn;
pub use leduc::build_leduc;
pub use matrix::build_matrix_game;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffEntry {
    pub x: usize,
    pub y: usize,
    pub value: f64,
}

/// `F(z) = (Ay, −Aᵀx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

/// A strategy profile `z = (x, y)` in sequence form.
#[derive(Debug, Clone, PartialEq)]
pub struct JointStrategy {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JointStrategy {
    pub fn player(&self, p: Player) -> &[f64] {
        match p {
            Player::X => &self.x,
            Player::Y => &self.y,
        }
    }

    pub fn l2_distance(&self, other: &JointStrategy) -> f64 {
        self.x
            .iter()
            .zip(&other.x)
            .chain(self.y.iter().zip(&other.y))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    tp_x: Arc<Treeplex>,
    tp_y: Arc<Treeplex>,
    payoffs: Vec<PayoffEntry>,
    scale: f64,
}

impl GameSpec {
    /// Validates an already-normalized payoff list. Entries are sorted by
    /// `(x, y)`.
    pub fn new(
        tp_x: Treeplex,
        tp_y: Treeplex,
        mut payoffs: Vec<PayoffEntry>,
        scale: f64,
    ) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Game(format!(
                "scale must be positive and finite, got {scale}"
            )));
        }
        for (k, e) in payoffs.iter().enumerate() {
            if e.x >= tp_x.dim() || e.y >= tp_y.dim() {
                return Err(Error::Game(format!(
                    "payoffs[{k}]: sequence pair ({}, {}) out of range {}x{}",
                    e.x,
                    e.y,
                    tp_x.dim(),
                    tp_y.dim()
                )));
            }
            if !(e.value.abs() <= 1.0) {
                return Err(Error::Game(format!(
                    "payoffs[{k}]: value {} outside [-1, 1]",
                    e.value
                )));
            }
        }
        payoffs.sort_by_key(|e| (e.x, e.y));
        if let Some(w) = payoffs
            .windows(2)
            .find(|w| (w[0].x, w[0].y) == (w[1].x, w[1].y))
        {
            return Err(Error::Game(format!(
                "duplicate payoff entry for sequence pair ({}, {})",
                w[0].x, w[0].y
            )));
        }
        Ok(Self {
            tp_x: Arc::new(tp_x),
            tp_y: Arc::new(tp_y),
            payoffs,
            scale,
        })
    }

    /// Normalizes raw payoffs by their largest magnitude. Duplicate pairs
    /// are summed and exact zeros dropped.
    pub fn from_raw(
        tp_x: Treeplex,
        tp_y: Treeplex,
        raw: impl IntoIterator<Item = PayoffEntry>,
    ) -> Result<Self> {
        let mut raw: Vec<PayoffEntry> = raw.into_iter().collect();
        raw.sort_by_key(|e| (e.x, e.y));
        let mut merged: Vec<PayoffEntry> = Vec::with_capacity(raw.len());
        for e in raw {
            match merged.last_mut() {
                Some(last) if (last.x, last.y) == (e.x, e.y) => last.value += e.value,
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value != 0.0);
        let max_abs = merged.iter().map(|e| e.value.abs()).fold(0.0, f64::max);
        let scale = if max_abs > 0.0 { max_abs } else { 1.0 };
        for e in &mut merged {
            e.value /= scale;
        }
        Self::new(tp_x, tp_y, merged, scale)
    }

    pub fn tp_x(&self) -> &Treeplex {
        &self.tp_x
    }

    pub fn tp_y(&self) -> &Treeplex {
        &self.tp_y
    }

    pub fn treeplex(&self, p: Player) -> &Treeplex {
        match p {
            Player::X => &self.tp_x,
            Player::Y => &self.tp_y,
        }
    }

    pub(crate) fn treeplex_arc(&self, p: Player) -> Arc<Treeplex> {
        match p {
            Player::X => self.tp_x.clone(),
            Player::Y => self.tp_y.clone(),
        }
    }

    pub fn payoffs(&self) -> &[PayoffEntry] {
        &self.payoffs
    }

    /// Divisor applied to the raw payoffs.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `P = M + N`.
    pub fn dim(&self) -> usize {
        self.tp_x.dim() + self.tp_y.dim()
    }

    pub fn uniform(&self) -> JointStrategy {
        JointStrategy {
            x: self.tp_x.uniform_strategy(),
            y: self.tp_y.uniform_strategy(),
        }
    }

    /// `Ay`.
    pub fn ay(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.tp_x.dim()];
        for e in &self.payoffs {
            out[e.x] += e.value * y[e.y];
        }
        out
    }

    /// `−Aᵀx`.
    pub fn neg_atx(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.tp_y.dim()];
        for e in &self.payoffs {
            out[e.y] -= e.value * x[e.x];
        }
        out
    }

    pub fn payoff_operator(&self, x: &[f64], y: &[f64]) -> Result<GradientPair> {
        self.tp_x.check_dim(x)?;
        self.tp_y.check_dim(y)?;
        Ok(GradientPair {
            gx: self.ay(y),
            gy: self.neg_atx(x),
        })
    }

    /// The loss gradient of player `p` at `z`.
    pub fn gradient(&self, p: Player, z: &JointStrategy) -> Vec<f64> {
        match p {
            Player::X => self.ay(&z.y),
            Player::Y => self.neg_atx(&z.x),
        }
    }

    /// `xᵀAy` in normalized units.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.payoffs.iter().map(|e| x[e.x] * e.value * y[e.y]).sum()
    }

    /// Expected raw payoff of the first (minimizing) player.
    pub fn min_player_value(&self, z: &JointStrategy) -> f64 {
        -self.scale * self.bilinear(&z.x, &z.y)
    }
}
