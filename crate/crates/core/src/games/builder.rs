//! Reduction of an explicit game tree with chance nodes to sequence form.

use std::collections::HashMap;

use super::{GameSpec, PayoffEntry};
use crate::treeplex::{InfoSetSpec, Treeplex};
use crate::{Error, Result};

pub(crate) enum Node {
    Chance(Vec<(f64, Node)>),
    Decision {
        player: usize,
        infoset: String,
        actions: Vec<Node>,
    },
    /// Payoff to the first player.
    Terminal(f64),
}

#[derive(Default)]
struct PlayerTables {
    specs: Vec<InfoSetSpec>,
    starts: Vec<usize>,
    by_key: HashMap<String, usize>,
    next_seq: usize,
}

/// Walks the tree, creating information sets (and their sequence blocks) in
/// depth-first discovery order, and accumulates chance-weighted payoffs into
/// `A`. Chance is eliminated entirely.
pub(crate) struct Builder {
    players: [PlayerTables; 2],
    payoffs: HashMap<(usize, usize), f64>,
}

impl Builder {
    pub(crate) fn new() -> Self {
        Self {
            players: Default::default(),
            payoffs: HashMap::new(),
        }
    }

    pub(crate) fn add(&mut self, node: &Node, prob: f64) -> Result<()> {
        self.walk(node, prob, [None, None])
    }

    fn walk(&mut self, node: &Node, prob: f64, last: [Option<usize>; 2]) -> Result<()> {
        match node {
            Node::Chance(outcomes) => {
                for (p, child) in outcomes {
                    self.walk(child, prob * p, last)?;
                }
            }
            Node::Terminal(u) => {
                let (Some(x), Some(y)) = (last[0], last[1]) else {
                    return Err(Error::Game(
                        "terminal reached before both players acted".into(),
                    ));
                };
                // A holds the payoff of the maximizing second player.
                *self.payoffs.entry((x, y)).or_insert(0.0) -= prob * u;
            }
            Node::Decision {
                player,
                infoset,
                actions,
            } => {
                let p = *player;
                let table = &mut self.players[p];
                let id = match table.by_key.get(infoset) {
                    Some(&id) => {
                        let spec = &table.specs[id];
                        if spec.parent != last[p] || spec.num_actions != actions.len() {
                            return Err(Error::Game(format!(
                                "imperfect recall at information set {infoset}"
                            )));
                        }
                        id
                    }
                    None => {
                        let id = table.specs.len();
                        table.specs.push(InfoSetSpec {
                            parent: last[p],
                            num_actions: actions.len(),
                            label: infoset.clone(),
                        });
                        table.starts.push(table.next_seq);
                        table.next_seq += actions.len();
                        table.by_key.insert(infoset.clone(), id);
                        id
                    }
                };
                let start = self.players[p].starts[id];
                for (a, child) in actions.iter().enumerate() {
                    let mut next = last;
                    next[p] = Some(start + a);
                    self.walk(child, prob, next)?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn finish(self) -> Result<GameSpec> {
        let [px, py] = self.players;
        let tp_x = Treeplex::new(px.specs)?;
        let tp_y = Treeplex::new(py.specs)?;
        let raw = self
            .payoffs
            .into_iter()
            .map(|((x, y), value)| PayoffEntry { x, y, value });
        GameSpec::from_raw(tp_x, tp_y, raw)
    }
}
