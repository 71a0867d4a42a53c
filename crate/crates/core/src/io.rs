//! Game files (TOML), observation files (CSV), JSON exports of regions and
//! curves, and the bundled games.
//!
//! Axis order: a payoff tensor is indexed by pure strategies with player 0
//! on the outermost axis. A symmetric game stores one "own payoff" tensor
//! `payoff[own][first opponent][second opponent]`; the other players'
//! tensors follow by permuting roles.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::geometry::Region;
use crate::models::ModelCurve;
use crate::stats::Observation;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tensor {
    Matrix(Vec<Vec<f64>>),
    Cube(Vec<Vec<Vec<f64>>>),
}

impl Tensor {
    fn flatten(&self) -> Vec<f64> {
        match self {
            Tensor::Matrix(m) => m.concat(),
            Tensor::Cube(c) => c.iter().flat_map(|m| m.concat()).collect(),
        }
    }

    fn shape(&self) -> Vec<usize> {
        match self {
            Tensor::Matrix(m) => vec![m.len(), m.first().map_or(0, Vec::len)],
            Tensor::Cube(c) => vec![
                c.len(),
                c.first().map_or(0, Vec::len),
                c.first().and_then(|m| m.first()).map_or(0, Vec::len),
            ],
        }
    }

    fn is_ragged(&self) -> bool {
        let s = self.shape();
        match self {
            Tensor::Matrix(m) => m.iter().any(|r| r.len() != s[1]),
            Tensor::Cube(c) => c
                .iter()
                .any(|m| m.len() != s[1] || m.iter().any(|r| r.len() != s[2])),
        }
    }

    fn from_flat(shape: &[usize], flat: &[f64]) -> Tensor {
        match shape {
            [_, b] => Tensor::Matrix(flat.chunks(*b).map(<[f64]>::to_vec).collect()),
            [_, b, c] => Tensor::Cube(
                flat.chunks(b * c)
                    .map(|m| m.chunks(*c).map(<[f64]>::to_vec).collect())
                    .collect(),
            ),
            _ => unreachable!("games have two or three players"),
        }
    }
}

/// On-disk layout of a game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub format_version: u32,
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub players: usize,
    pub symmetric: bool,
    /// Strategy labels per player; symmetric games may give one list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Vec<String>>>,
    /// Own-payoff tensor of a symmetric game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Tensor>,
    /// One full tensor per player of an asymmetric game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<Tensor>>,
}

impl GameFile {
    pub fn from_game(game: &Game) -> GameFile {
        let shape = game.strategy_counts().to_vec();
        let labels = if game.is_symmetric() {
            vec![game.labels(0).to_vec()]
        } else {
            game.all_labels().to_vec()
        };
        let (payoff, payoffs) = if game.is_symmetric() {
            (Some(Tensor::from_flat(&shape, game.payoff_tensor(0))), None)
        } else {
            (
                None,
                Some(
                    (0..game.n_players())
                        .map(|i| Tensor::from_flat(&shape, game.payoff_tensor(i)))
                        .collect(),
                ),
            )
        };
        GameFile {
            format_version: FORMAT_VERSION,
            id: game.id().to_string(),
            description: game.description().to_string(),
            players: game.n_players(),
            symmetric: game.is_symmetric(),
            labels: Some(labels),
            payoff,
            payoffs,
        }
    }

    pub fn into_game(self) -> Result<Game> {
        let ctx = format!("game '{}'", self.id);
        if self.format_version != FORMAT_VERSION {
            return Err(Error::parse(
                ctx,
                format!("format_version {} is not supported (expected {FORMAT_VERSION})", self.format_version),
            ));
        }
        if self.id.trim().is_empty() {
            return Err(Error::parse(ctx, "field `id` is empty"));
        }
        let n = self.players;
        let game = if self.symmetric {
            let t = self
                .payoff
                .as_ref()
                .ok_or_else(|| Error::parse(&ctx, "symmetric games need the field `payoff`"))?;
            if self.payoffs.is_some() {
                return Err(Error::parse(&ctx, "symmetric games take `payoff`, not `payoffs`"));
            }
            let shape = t.shape();
            if t.is_ragged() || shape.len() != n || shape.iter().any(|&s| s != shape[0]) {
                return Err(Error::parse(
                    &ctx,
                    format!("field `payoff` must be a {n}-dimensional cube with equal sides, got shape {shape:?}"),
                ));
            }
            let labels = match &self.labels {
                None => None,
                Some(l) if l.len() == 1 => Some(l[0].clone()),
                Some(l) if l.len() == n && l.iter().all(|x| *x == l[0]) => Some(l[0].clone()),
                Some(_) => return Err(Error::parse(&ctx, "field `labels` must list the shared labels once")),
            };
            Game::symmetric(self.id.clone(), n, shape[0], t.flatten(), labels)
                .map_err(|e| Error::parse(&ctx, e))?
        } else {
            let ts = self
                .payoffs
                .as_ref()
                .ok_or_else(|| Error::parse(&ctx, "asymmetric games need the field `payoffs`"))?;
            if self.payoff.is_some() {
                return Err(Error::parse(&ctx, "asymmetric games take `payoffs`, not `payoff`"));
            }
            if ts.len() != n {
                return Err(Error::parse(&ctx, format!("field `payoffs` has {} tensors for {n} players", ts.len())));
            }
            let shape = ts[0].shape();
            if shape.len() != n {
                return Err(Error::parse(&ctx, format!("payoff tensors must have {n} axes")));
            }
            for (i, t) in ts.iter().enumerate() {
                if t.is_ragged() || t.shape() != shape {
                    return Err(Error::parse(&ctx, format!("payoffs[{i}] has shape {:?}, expected {shape:?}", t.shape())));
                }
            }
            Game::new(self.id.clone(), shape, ts.iter().map(Tensor::flatten).collect(), self.labels.clone())
                .map_err(|e| Error::parse(&ctx, e))?
        };
        Ok(game.with_description(self.description))
    }
}

pub fn parse_game(text: &str) -> Result<Game> {
    let file: GameFile = toml::from_str(text).map_err(|e| Error::parse("game file", e))?;
    file.into_game()
}

pub fn game_to_toml(game: &Game) -> Result<String> {
    toml::to_string(&GameFile::from_game(game)).map_err(|e| Error::parse(format!("game '{}'", game.id()), e))
}

pub fn load_game(path: impl AsRef<Path>) -> Result<Game> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_game(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::parse(format!("{}: {context}", path.display()), message),
        other => other,
    })
}

pub fn save_game(game: &Game, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, game_to_toml(game)?).map_err(|e| Error::io(path, e))
}

// --------------------------------------------------------------- bundled

const BUNDLED: [(&str, &str); 15] = [
    ("chain_store", include_str!("../games/chain_store.toml")),
    ("anti_coordination", include_str!("../games/anti_coordination.toml")),
    ("G1", include_str!("../games/G1_three_player.toml")),
    ("G2", include_str!("../games/G2_three_player.toml")),
    ("G3", include_str!("../games/G3_three_player.toml")),
    ("g1", include_str!("../games/g1.toml")),
    ("g2", include_str!("../games/g2.toml")),
    ("g3", include_str!("../games/g3.toml")),
    ("g4", include_str!("../games/g4.toml")),
    ("g5", include_str!("../games/g5.toml")),
    ("g6", include_str!("../games/g6.toml")),
    ("g7", include_str!("../games/g7.toml")),
    ("g8", include_str!("../games/g8.toml")),
    ("g9", include_str!("../games/g9.toml")),
    ("g10", include_str!("../games/g10.toml")),
];

const BUNDLED_FILES: [&str; 15] = [
    "chain_store.toml",
    "anti_coordination.toml",
    "G1_three_player.toml",
    "G2_three_player.toml",
    "G3_three_player.toml",
    "g1.toml",
    "g2.toml",
    "g3.toml",
    "g4.toml",
    "g5.toml",
    "g6.toml",
    "g7.toml",
    "g8.toml",
    "g9.toml",
    "g10.toml",
];

const CHECKSUMS: &str = include_str!("../games/CHECKSUMS");

pub fn bundled_ids() -> Vec<&'static str> {
    BUNDLED.iter().map(|(id, _)| *id).collect()
}

pub fn bundled_game(id: &str) -> Result<Game> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(i, _)| *i == id)
        .ok_or_else(|| Error::validation(format!("no bundled game '{id}' (known: {})", bundled_ids().join(", "))))?;
    parse_game(text)
}

pub fn bundled_games() -> Result<Vec<Game>> {
    BUNDLED.iter().map(|(_, t)| parse_game(t)).collect()
}

/// Check every bundled file against the pinned SHA-256 list.
pub fn verify_bundled_checksums() -> Result<()> {
    for ((_, text), file) in BUNDLED.iter().zip(BUNDLED_FILES) {
        let want = CHECKSUMS
            .lines()
            .find_map(|l| {
                let (hash, name) = l.split_once(char::is_whitespace)?;
                (name.trim() == file).then_some(hash)
            })
            .ok_or_else(|| Error::validation(format!("{file} has no pinned checksum")))?;
        let got = hex::encode(Sha256::digest(text.as_bytes()));
        if got != want {
            return Err(Error::validation(format!("{file}: checksum {got} does not match {want}")));
        }
    }
    Ok(())
}

/// A bundled id, or else a path to a game file.
pub fn resolve_game(spec: &str) -> Result<Game> {
    if bundled_ids().contains(&spec) {
        bundled_game(spec)
    } else if Path::new(spec).exists() {
        load_game(spec)
    } else {
        Err(Error::validation(format!(
            "'{spec}' is neither a bundled game ({}) nor an existing file",
            bundled_ids().join(", ")
        )))
    }
}

// ----------------------------------------------------------- observations

const REQUIRED: [&str; 6] = ["game", "session", "subject", "round", "role", "choice"];

/// Read observations: header `game,session,subject,round,role,choice`
/// followed by optional `belief_1..belief_K`; `choice` is a 0-based index.
pub fn read_observations<R: Read>(reader: R) -> Result<Vec<Observation>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::parse("observations header", e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 6];
    for (slot, name) in idx.iter_mut().zip(REQUIRED) {
        *slot = col(name).ok_or_else(|| Error::parse("observations header", format!("missing column `{name}`")))?;
    }
    let mut belief_cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| Some((h.strip_prefix("belief_")?.parse::<usize>().ok()?, i)))
        .collect();
    belief_cols.sort_unstable();
    for (expect, (k, _)) in belief_cols.iter().enumerate() {
        if *k != expect + 1 {
            return Err(Error::parse("observations header", "belief columns must be belief_1..belief_K"));
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse("observations", e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::parse(format!("line {line}"), format!("missing field `{name}`")))
        };
        let num = |i: usize, name: &str| -> Result<u64> {
            let s = field(i, name)?;
            s.parse::<u64>()
                .map_err(|_| Error::parse(format!("line {line}, field `{name}`"), format!("'{s}' is not a nonnegative integer")))
        };
        let cells: Vec<&str> = belief_cols.iter().map(|(_, i)| rec.get(*i).unwrap_or("")).collect();
        let belief = if cells.iter().all(|c| c.is_empty()) {
            None
        } else {
            let v = cells
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    c.parse::<f64>().map_err(|_| {
                        Error::parse(format!("line {line}, field `belief_{}`", k + 1), format!("'{c}' is not a number"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(v)
        };
        out.push(Observation {
            game_id: field(idx[0], "game")?.to_string(),
            session: field(idx[1], "session")?.to_string(),
            subject: field(idx[2], "subject")?.to_string(),
            round: num(idx[3], "round")? as u32,
            role: num(idx[4], "role")? as usize,
            choice: num(idx[5], "choice")? as usize,
            belief,
        });
    }
    Ok(out)
}

pub fn load_observations(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_observations(file).map_err(|e| match e {
        Error::Parse { context, message } => Error::parse(format!("{}: {context}", path.display()), message),
        other => other,
    })
}

/// Check that every observation refers to one of `games` and is valid there.
pub fn validate_observations(data: &[Observation], games: &[&Game]) -> Result<()> {
    for (i, o) in data.iter().enumerate() {
        let g = games
            .iter()
            .find(|g| g.id() == o.game_id)
            .ok_or_else(|| Error::validation(format!("record {}: unknown game '{}'", i + 1, o.game_id)))?;
        o.validate(g)
            .map_err(|e| Error::validation(format!("record {}: {e}", i + 1)))?;
    }
    Ok(())
}

pub fn write_observations<W: Write>(data: &[Observation], writer: W) -> Result<()> {
    let k = data.iter().filter_map(|o| o.belief.as_ref().map(Vec::len)).max().unwrap_or(0);
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let mut header: Vec<String> = REQUIRED.iter().map(|s| s.to_string()).collect();
    header.extend((1..=k).map(|i| format!("belief_{i}")));
    w.write_record(&header).map_err(|e| Error::parse("observations", e))?;
    for o in data {
        let mut row = vec![
            o.game_id.clone(),
            o.session.clone(),
            o.subject.clone(),
            o.round.to_string(),
            o.role.to_string(),
            o.choice.to_string(),
        ];
        for i in 0..k {
            row.push(o.belief.as_ref().and_then(|b| b.get(i)).map_or(String::new(), |x| x.to_string()));
        }
        w.write_record(&row).map_err(|e| Error::parse("observations", e))?;
    }
    w.flush().map_err(|e| Error::io("<observations>", e))
}

pub fn save_observations(data: &[Observation], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_observations(data, std::io::BufWriter::new(file))
}

// ------------------------------------------------------------- exports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionDocument {
    pub format_version: u32,
    pub game_id: String,
    pub epsilon: Option<f64>,
    pub regions: Vec<Region>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub format_version: u32,
    pub curve: ModelCurve,
}

pub fn export_regions(game_id: &str, epsilon: Option<f64>, regions: &[Region]) -> Result<String> {
    to_json(&RegionDocument {
        format_version: FORMAT_VERSION,
        game_id: game_id.to_string(),
        epsilon,
        regions: regions.to_vec(),
    })
}

pub fn import_regions(text: &str) -> Result<RegionDocument> {
    let doc: RegionDocument = serde_json::from_str(text).map_err(|e| Error::parse("region document", e))?;
    check_version(doc.format_version, "region document")?;
    Ok(doc)
}

pub fn export_curve(curve: &ModelCurve) -> Result<String> {
    to_json(&CurveDocument {
        format_version: FORMAT_VERSION,
        curve: curve.clone(),
    })
}

pub fn import_curve(text: &str) -> Result<ModelCurve> {
    let doc: CurveDocument = serde_json::from_str(text).map_err(|e| Error::parse("curve document", e))?;
    check_version(doc.format_version, "curve document")?;
    Ok(doc.curve)
}

fn check_version(v: u32, what: &str) -> Result<()> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::parse(what, format!("format_version {v} is not supported (expected {FORMAT_VERSION})")))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::parse("json export", e))?;
    s.push('\n');
    Ok(s)
}
