//! Synthetic sessions: agents draw choices from a model's prediction and
//! report noisy beliefs around the model's belief.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Dirichlet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{best_reply_set, Game, MixedProfile, StrategySet, TIE_TOL};
use crate::models::{eps_model_curve, eps_fixed_point_near, level_hierarchy, logit_qre_curve, poisson_weights, ModelKind};
use crate::numeric;
use crate::potential::supp_eps;
use crate::stats::Observation;

pub const DEFAULT_CONCENTRATION: f64 = 50.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentModel {
    Logit(f64),
    LevelK(f64),
    EpsPerfect(f64),
    EpsProper(f64),
    /// Play a fixed profile (e.g. a point inside an S(ε) set).
    Fixed(MixedProfile),
}

impl AgentModel {
    pub fn from_kind(kind: ModelKind, param: f64) -> Result<Self> {
        match kind {
            ModelKind::Logit => Ok(AgentModel::Logit(param)),
            ModelKind::LevelK => Ok(AgentModel::LevelK(param)),
            ModelKind::EpsPerfect => Ok(AgentModel::EpsPerfect(param)),
            ModelKind::EpsProper => Ok(AgentModel::EpsProper(param)),
            ModelKind::S => Err(Error::validation(
                "S predicts a set; simulate from a fixed profile inside it instead",
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub model: AgentModel,
    /// Dirichlet concentration of stated beliefs around the model's belief;
    /// `None` reports the model belief exactly.
    pub belief_concentration: Option<f64>,
    /// Own random stream; by default derived from the session seed.
    pub seed: Option<u64>,
}

impl AgentSpec {
    pub fn new(model: AgentModel) -> Self {
        AgentSpec {
            model,
            belief_concentration: Some(DEFAULT_CONCENTRATION),
            seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Nobody meets the same opponent twice.
    PerfectStranger,
    /// Cycle through the perfect-stranger schedule when rounds exceed it.
    #[default]
    MinimalRepeat,
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect-stranger" => Ok(Protocol::PerfectStranger),
            "minimal-repeat" => Ok(Protocol::MinimalRepeat),
            _ => Err(Error::validation(format!(
                "unknown protocol '{s}' (perfect-stranger, minimal-repeat)"
            ))),
        }
    }
}

/// Per-round matchings; each match lists agents by player position.
pub type Schedule = Vec<Vec<Vec<usize>>>;

/// Matchings without repeated encounters, as many rounds as possible.
pub fn stranger_schedule(game: &Game, agents: usize) -> Result<Schedule> {
    let n = game.n_players();
    match (n, game.is_symmetric()) {
        (2, true) => {
            if agents < 2 {
                return Err(Error::validation("need at least two agents"));
            }
            // circle method; an odd agent count gets a bye slot
            let slots = agents + agents % 2;
            let mut ring: Vec<usize> = (1..slots).collect();
            let mut out = Vec::with_capacity(slots - 1);
            for _ in 0..slots - 1 {
                let order: Vec<usize> = std::iter::once(0).chain(ring.iter().copied()).collect();
                let round: Vec<Vec<usize>> = (0..slots / 2)
                    .map(|i| vec![order[i], order[slots - 1 - i]])
                    .filter(|m| m.iter().all(|&a| a < agents))
                    .collect();
                out.push(round);
                ring.rotate_right(1);
            }
            Ok(out)
        }
        (2, false) => {
            if agents < 2 || !agents.is_multiple_of(2) {
                return Err(Error::validation(format!(
                    "an asymmetric two-player game needs an even number of agents (got {agents})"
                )));
            }
            let h = agents / 2;
            Ok((0..h)
                .map(|r| (0..h).map(|i| vec![i, h + (i + r) % h]).collect())
                .collect())
        }
        (3, true) => {
            if agents < 3 || !agents.is_multiple_of(3) {
                return Err(Error::validation(format!(
                    "a three-player game needs a multiple of three agents (got {agents})"
                )));
            }
            // agents in an m x 3 array; group j takes row j, j+r, j+2r of the columns
            let m = agents / 3;
            let rounds = if m % 2 == 1 { m } else { m / 2 };
            Ok((0..rounds)
                .map(|r| {
                    (0..m)
                        .map(|j| vec![j, m + (j + r) % m, 2 * m + (j + 2 * r) % m])
                        .collect()
                })
                .collect())
        }
        _ => Err(Error::Unsupported(
            "matching schedules exist for symmetric games and two-player games".into(),
        )),
    }
}

/// (weight, strategy per role block, belief per role block)
type Component = (f64, Vec<Vec<f64>>, Vec<Vec<f64>>);

#[derive(Clone, Debug)]
struct Behavior {
    components: Vec<Component>,
}

fn opponent_block(game: &Game, role: usize) -> usize {
    if game.is_symmetric() {
        0
    } else {
        1 - role
    }
}

fn blocks(game: &Game, p: &MixedProfile) -> Vec<Vec<f64>> {
    if game.is_symmetric() {
        vec![p.player(0).to_vec()]
    } else {
        p.players().to_vec()
    }
}

fn behavior(game: &Game, model: &AgentModel) -> Result<Behavior> {
    let equilibrium = |p: MixedProfile| {
        let b = blocks(game, &p);
        Behavior {
            components: vec![(1.0, b.clone(), b)],
        }
    };
    match model {
        AgentModel::Logit(l) => {
            let c = logit_qre_curve(game, *l, 40)?;
            Ok(equilibrium(c.samples.last().expect("curve").profile.clone()))
        }
        AgentModel::EpsPerfect(e) | AgentModel::EpsProper(e) => {
            let kind = if matches!(model, AgentModel::EpsPerfect(_)) {
                ModelKind::EpsPerfect
            } else {
                ModelKind::EpsProper
            }
            .restricted()
            .expect("restricted");
            let c = eps_model_curve(game, kind, 100)?;
            let near = c.nearest(*e).expect("curve").profile.clone();
            Ok(equilibrium(eps_fixed_point_near(game, kind, *e, &near)?.profile))
        }
        AgentModel::Fixed(p) => {
            if p.players().len() != game.n_players()
                || p.players().iter().zip(game.strategy_counts()).any(|(v, &k)| v.len() != k)
            {
                return Err(Error::validation("fixed profile does not fit the game"));
            }
            Ok(equilibrium(p.clone()))
        }
        AgentModel::LevelK(tau) => {
            if !(*tau >= 0.0 && tau.is_finite()) {
                return Err(Error::validation(format!("tau must be >= 0, got {tau}")));
            }
            let w = poisson_weights(*tau, 20);
            let total: f64 = w.iter().sum();
            let h = level_hierarchy(game, w.len() - 1);
            let comps = w
                .iter()
                .enumerate()
                .map(|(k, &wk)| {
                    let play = blocks(game, &h.levels[k]);
                    // level k believes opponents are level k-1; level 0 holds a uniform belief
                    let belief = if k == 0 {
                        play.iter().map(|b| numeric::uniform(b.len())).collect()
                    } else {
                        blocks(game, &h.levels[k - 1])
                    };
                    (wk / total, play, belief)
                })
                .collect();
            Ok(Behavior { components: comps })
        }
    }
}

fn sample(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    WeightedIndex::new(weights).expect("valid distribution").sample(rng)
}

fn noisy_belief(rng: &mut ChaCha8Rng, mean: &[f64], concentration: Option<f64>) -> Result<Vec<f64>> {
    let Some(c) = concentration else {
        return Ok(mean.to_vec());
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::validation(format!("belief concentration must be > 0, got {c}")));
    }
    let alpha: Vec<f64> = mean.iter().map(|m| (c * m).max(1e-3)).collect();
    let d = Dirichlet::new(&alpha).map_err(|e| Error::numerical(e.to_string()))?;
    Ok(d.sample(rng))
}

/// One session. Agents keep their role in asymmetric games; in symmetric
/// games the role records the seat within the match.
pub fn simulate_session(
    game: &Game,
    agents: &[AgentSpec],
    rounds: usize,
    protocol: Protocol,
    seed: u64,
    session_id: &str,
) -> Result<Vec<Observation>> {
    let schedule = stranger_schedule(game, agents.len())?;
    if protocol == Protocol::PerfectStranger && rounds > schedule.len() {
        return Err(Error::validation(format!(
            "perfect-stranger matching supports at most {} rounds with {} agents",
            schedule.len(),
            agents.len()
        )));
    }
    let behaviors: Vec<Behavior> = agents.iter().map(|a| behavior(game, &a.model)).collect::<Result<_>>()?;
    let mut rngs: Vec<ChaCha8Rng> = agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut r = ChaCha8Rng::seed_from_u64(a.seed.unwrap_or(seed));
            if a.seed.is_none() {
                r.set_stream(i as u64);
            }
            r
        })
        .collect();
    let mut out = Vec::new();
    for round in 0..rounds {
        let mut decisions = Vec::new();
        for m in &schedule[round % schedule.len()] {
            for (seat, &agent) in m.iter().enumerate() {
                decisions.push((agent, seat));
            }
        }
        decisions.sort_unstable();
        for (agent, seat) in decisions {
            let rng = &mut rngs[agent];
            let beh = &behaviors[agent];
            let comp = if beh.components.len() == 1 {
                0
            } else {
                let w: Vec<f64> = beh.components.iter().map(|c| c.0).collect();
                sample(rng, &w)
            };
            let (_, play, belief) = &beh.components[comp];
            let block = if game.is_symmetric() { 0 } else { seat };
            let choice = sample(rng, &play[block]);
            let stated = noisy_belief(rng, &belief[opponent_block(game, seat)], agents[agent].belief_concentration)?;
            out.push(Observation {
                game_id: game.id().to_string(),
                session: session_id.to_string(),
                subject: format!("{}", agent + 1),
                round: round as u32 + 1,
                role: seat,
                choice,
                belief: Some(stated),
            });
        }
    }
    Ok(out)
}

/// Several sessions with seeds `seed, seed+1, ...`, run in parallel and
/// returned in session order.
pub fn simulate_sessions(
    game: &Game,
    agents: &[AgentSpec],
    rounds: usize,
    protocol: Protocol,
    seed: u64,
    sessions: usize,
) -> Result<Vec<Observation>> {
    let parts: Vec<Vec<Observation>> = (0..sessions)
        .into_par_iter()
        .map(|s| simulate_session(game, agents, rounds, protocol, seed.wrapping_add(s as u64), &format!("{}", s + 1)))
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// A symmetric profile inside S(`eps0`) but outside S(ε) for every
/// `ε < ratio`: the modal strategy is the unique best reply and every other
/// strategy is played `ratio` times as often.
pub fn s_interior_profile(game: &Game, ratio: f64) -> Option<MixedProfile> {
    if !game.is_symmetric() || !(ratio > 0.0 && ratio < 1.0) {
        return None;
    }
    let k = game.k(0);
    (0..k).find_map(|a| {
        let mut v = vec![ratio; k];
        v[a] = 1.0;
        numeric::normalize(&mut v);
        let p = MixedProfile::symmetric(&v, game.n_players()).ok()?;
        let pi = game.payoffs_against(0, &p);
        let best = best_reply_set(&pi, TIE_TOL);
        // a clear margin keeps sampled frequencies on the same side
        let mut sorted = pi.0.clone();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let margin = sorted[0] - sorted[1];
        (best == StrategySet::singleton(a) && supp_eps(&v, 1.0) == StrategySet::singleton(a) && margin > 1.0).then_some(p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::bundled_game;

    fn agents(model: AgentModel, n: usize) -> Vec<AgentSpec> {
        vec![AgentSpec::new(model); n]
    }

    #[test]
    fn schedules_never_repeat_pairs() {
        for (id, n) in [("g1", 8), ("g1", 9), ("chain_store", 8), ("G2", 9), ("G2", 15)] {
            let g = bundled_game(id).unwrap();
            let s = stranger_schedule(&g, n).unwrap();
            let mut met = std::collections::BTreeSet::new();
            for round in &s {
                let mut seen = std::collections::BTreeSet::new();
                for m in round {
                    for &a in m {
                        assert!(seen.insert(a), "{id}: agent twice in a round");
                    }
                    for i in 0..m.len() {
                        for j in i + 1..m.len() {
                            let pair = (m[i].min(m[j]), m[i].max(m[j]));
                            assert!(met.insert(pair), "{id} n={n}: {pair:?} met twice");
                        }
                    }
                }
            }
        }
        assert_eq!(stranger_schedule(&bundled_game("g1").unwrap(), 8).unwrap().len(), 7);
        assert!(stranger_schedule(&bundled_game("G1").unwrap(), 8).is_err());
    }

    #[test]
    fn perfect_stranger_rejects_too_many_rounds() {
        let g = bundled_game("g1").unwrap();
        let a = agents(AgentModel::Logit(0.0), 8);
        assert!(simulate_session(&g, &a, 8, Protocol::PerfectStranger, 1, "1").is_err());
        assert!(simulate_session(&g, &a, 8, Protocol::MinimalRepeat, 1, "1").is_ok());
    }

    #[test]
    fn uniform_logit_frequencies() {
        let g = bundled_game("g1").unwrap();
        let obs = simulate_sessions(&g, &agents(AgentModel::Logit(0.0), 10), 30, Protocol::MinimalRepeat, 7, 10).unwrap();
        let n = obs.len() as f64;
        let sd = (n * (1. / 3.) * (2. / 3.)).sqrt();
        for k in 0..3 {
            let c = obs.iter().filter(|o| o.choice == k).count() as f64;
            assert!((c - n / 3.).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn level_k_in_g2_concentrates_on_b() {
        let g = bundled_game("G2").unwrap();
        let obs = simulate_sessions(&g, &agents(AgentModel::LevelK(8.0), 9), 10, Protocol::MinimalRepeat, 3, 4).unwrap();
        let b = obs.iter().filter(|o| o.choice == 1).count() as f64;
        assert!(b / obs.len() as f64 > 0.95);
    }

    #[test]
    fn same_seed_same_output() {
        let g = bundled_game("g3").unwrap();
        let a = agents(AgentModel::LevelK(1.5), 8);
        let x = simulate_sessions(&g, &a, 15, Protocol::MinimalRepeat, 11, 3).unwrap();
        let y = simulate_sessions(&g, &a, 15, Protocol::MinimalRepeat, 11, 3).unwrap();
        assert_eq!(x, y);
        let z = simulate_sessions(&g, &a, 15, Protocol::MinimalRepeat, 12, 3).unwrap();
        assert_ne!(x, z);
    }

    #[test]
    fn interior_profile_has_unique_modal_best_reply() {
        let g = bundled_game("g2").unwrap();
        let p = s_interior_profile(&g, 0.18).unwrap();
        let v = p.player(0);
        let modal = (0..3).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(best_reply_set(&g.payoffs_against(0, &p), TIE_TOL), StrategySet::singleton(modal));
    }
}
