use super::{GameSpec, PayoffEntry};
use crate::treeplex::Treeplex;
use crate::{Error, Result};

/// A normal-form game as a pair of single-simplex treeplexes. Rows belong to
/// the minimizing player, columns to the maximizing player, and `a[i][j]` is
/// the payoff to the column player.
pub fn build_matrix_game(a: &[Vec<f64>]) -> Result<GameSpec> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Game("payoff matrix is empty".into()));
    }
    if let Some(r) = a.iter().position(|row| row.len() != cols) {
        return Err(Error::Game(format!(
            "row {r} has {} entries, expected {cols}",
            a[r].len()
        )));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Game("payoff matrix has non-finite entries".into()));
    }
    let entries = a.iter().enumerate().flat_map(|(i, row)| {
        row.iter()
            .enumerate()
            .map(move |(j, &value)| PayoffEntry { x: i, y: j, value })
    });
    GameSpec::from_raw(Treeplex::simplex(rows)?, Treeplex::simplex(cols)?, entries)
}
