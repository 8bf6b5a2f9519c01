use super::builder::{Builder, Node};
use super::GameSpec;

const RANKS: [&str; 3] = ["J", "Q", "K"];
const RAISE_SIZES: [f64; 2] = [1.0, 2.0];
const MAX_RAISES: usize = 2;

#[derive(Clone)]
struct Betting {
    cards: [usize; 2],
    public: Option<usize>,
    history: String,
    round: usize,
    contrib: [f64; 2],
    raises: usize,
    to_act: usize,
    facing_raise: bool,
    acted: usize,
}

/// Leduc hold'em with six cards (J, Q, K in two suits), an ante of one chip,
/// two betting rounds with at most two raises each, raise sizes of one chip
/// in the first round and two in the second, and a public card dealt between
/// the rounds. A pair with the public card wins, otherwise the higher rank;
/// equal ranks split the pot. The first mover is the minimizing player `x`.
pub fn build_leduc() -> GameSpec {
    let mut builder = Builder::new();
    for c1 in 0..3 {
        for c2 in 0..3 {
            let prob = (2.0 / 6.0) * ((2 - usize::from(c1 == c2)) as f64 / 5.0);
            let start = Betting {
                cards: [c1, c2],
                public: None,
                history: String::new(),
                round: 0,
                contrib: [1.0, 1.0],
                raises: 0,
                to_act: 0,
                facing_raise: false,
                acted: 0,
            };
            builder
                .add(&decision(start), prob)
                .expect("leduc tree is well formed");
        }
    }
    builder.finish().expect("leduc tree is well formed")
}

fn decision(s: Betting) -> Node {
    let p = s.to_act;
    let public = s.public.map_or("", |c| RANKS[c]);
    let infoset = format!("{}{}:{}", RANKS[s.cards[p]], public, s.history);
    let raise = RAISE_SIZES[s.round];
    let mut actions = Vec::new();

    let next = |s: &Betting, tag: char| {
        let mut n = s.clone();
        n.history.push(tag);
        n.to_act = 1 - p;
        n.acted += 1;
        n
    };

    if s.facing_raise {
        // fold: the folder loses its contribution
        actions.push(Node::Terminal(if p == 0 {
            -s.contrib[0]
        } else {
            s.contrib[1]
        }));
        let mut call = next(&s, 'c');
        call.contrib[p] = call.contrib[1 - p];
        actions.push(end_of_round(call));
    } else {
        let check = next(&s, 'c');
        actions.push(if s.acted >= 1 {
            end_of_round(check)
        } else {
            decision(check)
        });
    }
    if s.raises < MAX_RAISES {
        let mut r = next(&s, 'r');
        r.contrib[p] = r.contrib[1 - p] + raise;
        r.raises += 1;
        r.facing_raise = true;
        actions.push(decision(r));
    }
    Node::Decision {
        player: p,
        infoset,
        actions,
    }
}

fn end_of_round(s: Betting) -> Node {
    if s.round == 0 {
        let mut left = [2usize; 3];
        left[s.cards[0]] -= 1;
        left[s.cards[1]] -= 1;
        let outcomes = (0..3)
            .filter(|&c| left[c] > 0)
            .map(|c| {
                let mut n = s.clone();
                n.public = Some(c);
                n.history.push('/');
                n.round = 1;
                n.raises = 0;
                n.to_act = 0;
                n.facing_raise = false;
                n.acted = 0;
                (left[c] as f64 / 4.0, decision(n))
            })
            .collect();
        return Node::Chance(outcomes);
    }
    let public = s.public.expect("second round has a public card");
    let [a, b] = s.cards;
    let winner = match (a == public, b == public) {
        (true, false) => Some(0),
        (false, true) => Some(1),
        _ if a > b => Some(0),
        _ if b > a => Some(1),
        _ => None,
    };
    Node::Terminal(match winner {
        Some(0) => s.contrib[1],
        Some(_) => -s.contrib[0],
        None => 0.0,
    })
}
