#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use regefg::games::build_matrix_game;
use regefg::{GameSpec, InfoSetSpec, JointStrategy, Treeplex};

pub fn pennies() -> GameSpec {
    build_matrix_game(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap()
}

/// Behavioral strategy with every probability at least `floor` times the
/// block's uniform share.
pub fn random_behavioral(tp: &Treeplex, rng: &mut impl Rng, floor: f64) -> Vec<f64> {
    let mut q = vec![0.0; tp.dim()];
    for h in tp.infosets() {
        let r = h.indices();
        let w: Vec<f64> = r.clone().map(|_| floor + rng.gen::<f64>()).collect();
        let s: f64 = w.iter().sum();
        for (i, w) in r.zip(w) {
            q[i] = w / s;
        }
    }
    q
}

pub fn random_sequence(tp: &Treeplex, rng: &mut impl Rng, floor: f64) -> Vec<f64> {
    tp.behavioral_to_sequence(&random_behavioral(tp, rng, floor))
        .unwrap()
}

pub fn random_joint(game: &GameSpec, rng: &mut impl Rng, floor: f64) -> JointStrategy {
    JointStrategy {
        x: random_sequence(game.tp_x(), rng, floor),
        y: random_sequence(game.tp_y(), rng, floor),
    }
}

/// Pure sequence-form strategy with a random action at every infoset.
pub fn random_vertex(tp: &Treeplex, rng: &mut impl Rng) -> Vec<f64> {
    let mut q = vec![0.0; tp.dim()];
    for h in tp.infosets() {
        q[h.start + rng.gen_range(0..h.len)] = 1.0;
    }
    tp.behavioral_to_sequence(&q).unwrap()
}

/// Every pure strategy of a small treeplex, in sequence form.
pub fn all_vertices(tp: &Treeplex) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let n = tp.num_infosets();
    let mut choice = vec![0usize; n];
    loop {
        let mut q = vec![0.0; tp.dim()];
        for (h, info) in tp.infosets().iter().enumerate() {
            q[info.start + choice[h]] = 1.0;
        }
        let z = tp.behavioral_to_sequence(&q).unwrap();
        if !out.contains(&z) {
            out.push(z);
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            choice[k] += 1;
            if choice[k] < tp.infosets()[k].len {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Random treeplex specs: each information set has 1 to `max_actions`
/// actions and hangs below the root or below a sequence of an earlier one.
pub fn arb_specs(
    max_infosets: usize,
    max_actions: usize,
) -> impl Strategy<Value = Vec<InfoSetSpec>> {
    prop::collection::vec(
        (1..=max_actions, any::<prop::sample::Index>(), any::<bool>()),
        1..=max_infosets,
    )
    .prop_map(|raw| {
        let mut specs: Vec<InfoSetSpec> = Vec::new();
        let mut dim = 0;
        for (k, (n, pick, root)) in raw.into_iter().enumerate() {
            let parent = if k == 0 || root {
                None
            } else {
                Some(pick.index(dim))
            };
            specs.push(InfoSetSpec {
                parent,
                num_actions: n,
                label: format!("h{k}"),
            });
            dim += n;
        }
        specs
    })
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
