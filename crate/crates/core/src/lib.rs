//! S(ε) equilibria for finite normal-form games, the rival one-parameter
//! behavioral models, and the metrics used to score all of them on data.

pub mod error;
pub mod game;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod models;
pub mod monotone;
pub mod numeric;
pub mod potential;
pub mod simulate;
pub mod stats;
pub mod svg;

pub use error::{Error, Result};
pub use game::{
    best_reply_set, pure_nash, support_enumeration_nash, symmetric_nash, BeliefPoint, Game,
    MixedProfile, NashSet, PayoffVector, StrategySet, TIE_TOL,
};
pub use geometry::{AnalysisMode, Region, RegionKind, SEquilibrium, SetAnalyzer};
pub use io::{bundled_game, load_game, load_observations, resolve_game};
pub use models::{CurveSample, ModelCurve, ModelKind, RestrictedKind, RestrictedSimplex};
pub use potential::{is_s_choice_point, potential_value};
pub use simulate::{AgentModel, AgentSpec, Protocol};
pub use stats::{FitOptions, FitResult, HitUnit, MpsResult, Observation};
pub use svg::PlotSpec;
