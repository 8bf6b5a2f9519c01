use super::builder::{Builder, Node};
use super::GameSpec;

const CARDS: [&str; 3] = ["J", "Q", "K"];

/// Three-card Kuhn poker. The first mover is the minimizing player `x`.
///
/// Each player antes one chip. Player one checks or bets one chip; after a
/// check, player two checks or bets; facing a bet a player folds or calls.
/// Every player ends up with six two-action information sets.
pub fn build_kuhn() -> GameSpec {
    let mut builder = Builder::new();
    for (c1, n1) in CARDS.iter().enumerate() {
        for (c2, n2) in CARDS.iter().enumerate() {
            if c1 == c2 {
                continue;
            }
            let showdown = |amount: f64| if c1 > c2 { amount } else { -amount };
            let p1 = |history: &str, actions| Node::Decision {
                player: 0,
                infoset: format!("{n1}:{history}"),
                actions,
            };
            let p2 = |history: &str, actions| Node::Decision {
                player: 1,
                infoset: format!("{n2}:{history}"),
                actions,
            };
            let tree = p1(
                "",
                vec![
                    p2(
                        "c",
                        vec![
                            Node::Terminal(showdown(1.0)),
                            p1(
                                "cb",
                                vec![Node::Terminal(-1.0), Node::Terminal(showdown(2.0))],
                            ),
                        ],
                    ),
                    p2(
                        "b",
                        vec![Node::Terminal(1.0), Node::Terminal(showdown(2.0))],
                    ),
                ],
            );
            builder
                .add(&tree, 1.0 / 6.0)
                .expect("kuhn tree is well formed");
        }
    }
    builder.finish().expect("kuhn tree is well formed")
}
