//! Regularized last-iterate solvers for two-player zero-sum extensive-form games.
//!
//! Games are represented in sequence form: each player's strategy space is a
//! [`Treeplex`] and the payoff is a sparse bilinear form `xᵀAy`, with the
//! first player `x` minimizing and the second player `y` maximizing.
//!
//! The crate provides
//!
//! * dilated entropy and Euclidean regularizers ([`regularizer`]),
//! * regularized dilated optimistic mirror descent, i.e. Reg-DOMWU and
//!   Reg-DOGDA ([`domd`]),
//! * regularized CFR with dual-stabilized optimistic local updates, plus
//!   CFR / CFR+ baselines ([`cfr`]),
//! * duality gap, saddle residual and reference-solution certification
//!   ([`metrics`]),
//! * fixed, adaptive and episodic regularization schedules with CSV traces
//!   ([`runner`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cfr;
pub mod domd;
mod error;
pub mod games;
pub mod metrics;
pub mod regularizer;
pub mod runner;
pub mod simplex;
pub mod treeplex;

pub use error::{Error, Result};
pub use games::{GameSpec, GradientPair, JointStrategy, PayoffEntry};
pub use regularizer::{DilatedRegularizer, RegKind, Regularizers};
pub use treeplex::{BehavioralStrategy, InfoSet, InfoSetSpec, Sense, Treeplex};
