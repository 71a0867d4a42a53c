//! Shared inputs for the benchmarks.

use sequil_core::io::bundled_game;
use sequil_core::simulate::{simulate_sessions, AgentModel, AgentSpec, Protocol};
use sequil_core::stats::Observation;
use sequil_core::Game;

pub fn game(id: &str) -> Game {
    bundled_game(id).expect("bundled game")
}

/// Two sessions of eight logit players over fifteen rounds.
pub fn logit_sessions(game: &Game, lambda: f64, seed: u64) -> Vec<Observation> {
    let agents = vec![AgentSpec::new(AgentModel::Logit(lambda)); 8];
    simulate_sessions(game, &agents, 15, Protocol::MinimalRepeat, seed, 2).expect("simulation")
}
