//! JSON game files and plain-text payoff matrices.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{build_matrix_game, GameSpec, PayoffEntry};
use crate::treeplex::{InfoSetSpec, Treeplex};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    players: Vec<PlayerFile>,
    payoffs: Vec<(usize, usize, f64)>,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayerFile {
    infosets: Vec<InfoSetFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfoSetFile {
    id: usize,
    parent_seq: Option<usize>,
    num_actions: usize,
    #[serde(default)]
    label: String,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn player_file(tp: &Treeplex) -> PlayerFile {
    PlayerFile {
        infosets: tp
            .infosets()
            .iter()
            .map(|h| InfoSetFile {
                id: h.id,
                parent_seq: h.parent,
                num_actions: h.len,
                label: h.label.clone(),
            })
            .collect(),
    }
}

pub fn game_to_json(game: &GameSpec) -> String {
    let file = GameFile {
        players: vec![player_file(game.tp_x()), player_file(game.tp_y())],
        payoffs: game.payoffs().iter().map(|e| (e.x, e.y, e.value)).collect(),
        scale: game.scale(),
    };
    serde_json::to_string_pretty(&file).expect("game file serializes")
}

pub fn game_from_json(text: &str, context: &str) -> Result<GameSpec> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    if file.players.len() != 2 {
        return Err(Error::Game(format!(
            "players: expected 2 entries, got {}",
            file.players.len()
        )));
    }
    let mut tps = Vec::with_capacity(2);
    for (p, player) in file.players.into_iter().enumerate() {
        let mut specs = Vec::with_capacity(player.infosets.len());
        for (k, h) in player.infosets.into_iter().enumerate() {
            if h.id != k {
                return Err(Error::Game(format!(
                    "players[{p}].infosets[{k}]: id {} out of order",
                    h.id
                )));
            }
            specs.push(InfoSetSpec {
                parent: h.parent_seq,
                num_actions: h.num_actions,
                label: h.label,
            });
        }
        tps.push(Treeplex::new(specs).map_err(|e| Error::Game(format!("players[{p}]: {e}")))?);
    }
    let tp_y = tps.pop().expect("two players");
    let tp_x = tps.pop().expect("two players");
    let payoffs = file
        .payoffs
        .into_iter()
        .map(|(x, y, value)| PayoffEntry { x, y, value })
        .collect();
    GameSpec::new(tp_x, tp_y, payoffs, file.scale)
}

pub fn save_game(game: &GameSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, game_to_json(game)).map_err(|e| io_err(path, e))
}

pub fn load_game(path: impl AsRef<Path>) -> Result<GameSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    game_from_json(&text, &path.display().to_string())
}

/// Reads a dense matrix: one row per line, entries separated by commas or
/// whitespace. Blank lines and lines starting with `#` are skipped.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<GameSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(k, t)| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("{} line {} field {}", path.display(), n + 1, k + 1),
                    message: format!("{t:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    build_matrix_game(&rows)
}
