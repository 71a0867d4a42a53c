//! Likelihood-based fit, predictive success, nonparametric comparisons and
//! belief diagnostics.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::game::{best_reply_set, Game, MixedProfile, StrategySet, TIE_TOL};
use crate::geometry::{hit_test, union_measure, AnalysisMode, Region, SetAnalyzer};
use crate::models::{
    eps_fixed_point_near, eps_model_curve, level_hierarchy, level_k_mixture, logit_qre_at,
    logit_qre_curve, ModelKind,
};
use crate::numeric;

/// One recorded decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub game_id: String,
    pub session: String,
    pub subject: String,
    pub round: u32,
    /// Player position; always 0 in symmetric games unless recorded.
    pub role: usize,
    pub choice: usize,
    /// Stated belief about the opponents' play.
    pub belief: Option<Vec<f64>>,
}

impl Observation {
    pub fn validate(&self, game: &Game) -> Result<()> {
        if self.role >= game.n_players() {
            return Err(Error::validation(format!(
                "observation role {} outside the {} players of {}",
                self.role,
                game.n_players(),
                game.id()
            )));
        }
        if self.choice >= game.k(self.role) {
            return Err(Error::validation(format!(
                "choice {} outside the {} strategies of {}",
                self.choice,
                game.k(self.role),
                game.id()
            )));
        }
        if let Some(b) = &self.belief {
            let k = belief_len(game, self.role);
            if b.len() != k || !numeric::is_simplex_vector(b, 1e-6) {
                return Err(Error::validation(format!(
                    "belief of subject {} in round {} is not a distribution over {k} strategies",
                    self.subject, self.round
                )));
            }
        }
        Ok(())
    }
}

fn belief_len(game: &Game, role: usize) -> usize {
    if game.n_players() == 2 {
        game.k(1 - role)
    } else {
        game.k(role)
    }
}

/// Number of separately modeled frequency vectors: one for symmetric games
/// (roles pooled), one per role otherwise.
fn n_blocks(game: &Game) -> usize {
    if game.is_symmetric() {
        1
    } else {
        game.n_players()
    }
}

fn block_of(game: &Game, role: usize) -> usize {
    if game.is_symmetric() {
        0
    } else {
        role
    }
}

fn block_sizes(game: &Game) -> Vec<usize> {
    (0..n_blocks(game)).map(|b| game.k(b)).collect()
}

/// Choice counts of one session, per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCounts {
    pub game_id: String,
    pub session: String,
    pub counts: Vec<Vec<f64>>,
}

impl SessionCounts {
    pub fn total(&self) -> f64 {
        self.counts.iter().flatten().sum()
    }

    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|c| {
                let n: f64 = c.iter().sum();
                if n > 0.0 {
                    c.iter().map(|x| x / n).collect()
                } else {
                    numeric::uniform(c.len())
                }
            })
            .collect()
    }

    /// The session frequencies as a full profile.
    pub fn frequency_profile(&self, game: &Game) -> MixedProfile {
        expand_blocks(game, self.frequencies())
    }
}

fn expand_blocks(game: &Game, blocks: Vec<Vec<f64>>) -> MixedProfile {
    if blocks.len() == 1 {
        MixedProfile::from_parts_unchecked(vec![blocks[0].clone(); game.n_players()])
    } else {
        MixedProfile::from_parts_unchecked(blocks)
    }
}

/// Group a game's observations into sessions (sorted by session id).
pub fn session_counts(game: &Game, data: &[Observation]) -> Result<Vec<SessionCounts>> {
    let sizes = block_sizes(game);
    let mut by_session: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    for o in data.iter().filter(|o| o.game_id == game.id()) {
        o.validate(game)?;
        let entry = by_session
            .entry(o.session.as_str())
            .or_insert_with(|| sizes.iter().map(|&k| vec![0.0; k]).collect());
        entry[block_of(game, o.role)][o.choice] += 1.0;
    }
    if by_session.is_empty() {
        return Err(Error::validation(format!("no observations for game {}", game.id())));
    }
    Ok(by_session
        .into_iter()
        .map(|(s, counts)| SessionCounts {
            game_id: game.id().to_string(),
            session: s.to_string(),
            counts,
        })
        .collect())
}

// ------------------------------------------------------------- G statistic

const CHI2_01: [f64; 10] = [
    6.634897, 9.210340, 11.344867, 13.276704, 15.086272, 16.811894, 18.475307, 20.090235, 21.665994, 23.209251,
];
const CHI2_05: [f64; 10] = [
    3.841459, 5.991465, 7.814728, 9.487729, 11.070498, 12.591587, 14.067140, 15.507313, 16.918978, 18.307038,
];

/// Upper-`alpha` quantile of the χ² distribution. Tabulated for
/// `alpha ∈ {0.01, 0.05}` and `dof ≤ 10`; computed otherwise.
pub fn chi2_critical(dof: usize, alpha: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::validation("chi-square quantile needs dof >= 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::validation(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let table = if (alpha - 0.01).abs() < 1e-12 {
        Some(&CHI2_01)
    } else if (alpha - 0.05).abs() < 1e-12 {
        Some(&CHI2_05)
    } else {
        None
    };
    if let Some(t) = table.filter(|_| dof <= 10) {
        return Ok(t[dof - 1]);
    }
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::numerical(e.to_string()))?;
    // the library inverse is a coarse bisection; polish with Newton steps
    let mut x = dist.inverse_cdf(1.0 - alpha);
    for _ in 0..3 {
        x -= (dist.cdf(x) - (1.0 - alpha)) / dist.pdf(x);
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GStat {
    pub g: f64,
    pub dof: usize,
    pub g_bar: f64,
}

impl GStat {
    pub fn new(g: f64, dof: usize) -> Result<Self> {
        Ok(GStat {
            g,
            dof,
            g_bar: g / chi2_critical(dof, 0.01)?,
        })
    }
}

/// `Σ n_k ln p_k` with `0 ln 0 = 0`; `-∞` if a chosen strategy has zero
/// predicted probability.
pub fn log_likelihood(counts: &[f64], predicted: &[f64]) -> f64 {
    counts
        .iter()
        .zip(predicted)
        .map(|(&n, &p)| {
            if n == 0.0 {
                0.0
            } else if p <= 0.0 {
                f64::NEG_INFINITY
            } else {
                n * p.ln()
            }
        })
        .sum()
}

/// Log-likelihood at the empirical frequencies.
pub fn saturated_log_likelihood(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    if n == 0.0 {
        return 0.0;
    }
    let f: Vec<f64> = counts.iter().map(|c| c / n).collect();
    log_likelihood(counts, &f)
}

fn g_from(counts: &[Vec<f64>], ll: f64) -> f64 {
    let sat: f64 = counts.iter().map(|c| saturated_log_likelihood(c)).sum();
    (2.0 * (sat - ll)).max(0.0)
}

/// G of a point prediction against per-block counts.
pub fn g_statistic(counts: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<GStat> {
    if counts.len() != predicted.len() {
        return Err(Error::validation("counts and prediction have different block counts"));
    }
    let mut dof = 0;
    let mut ll = 0.0;
    for (c, p) in counts.iter().zip(predicted) {
        if c.len() != p.len() {
            return Err(Error::validation("counts and prediction differ in length"));
        }
        if c.iter().any(|&x| x < 0.0 || !x.is_finite()) || c.iter().sum::<f64>() <= 0.0 {
            return Err(Error::validation("counts must be nonnegative with a positive total"));
        }
        dof += c.len() - 1;
        ll += log_likelihood(c, p);
    }
    GStat::new(g_from(counts, ll), dof)
}

fn profile_blocks(game: &Game, profile: &MixedProfile) -> Vec<Vec<f64>> {
    profile.players()[..n_blocks(game)].to_vec()
}

/// Supremum of the session's log-likelihood over the closure of the union
/// of `regions`.
pub fn sup_log_likelihood(game: &Game, counts: &SessionCounts, regions: &[Region], eps: f64) -> f64 {
    let freq = counts.frequencies();
    let mut best = f64::NEG_INFINITY;
    for r in regions {
        let blocks = region_blocks(r);
        let mut total = 0.0;
        for (f, piece) in r.factors.iter().enumerate() {
            let block = blocks[f];
            let c = &counts.counts[block];
            let closure = |v: &[f64]| in_factor_closure(game, r, f, v, eps);
            let f_ll = if closure(&freq[block]) {
                log_likelihood(c, &freq[block])
            } else {
                let grid = piece.grid();
                let mut cand: Option<(f64, Vec<f64>)> = None;
                let pts = piece
                    .cells
                    .iter()
                    .map(|&cell| grid.center(cell as usize))
                    .chain(piece.points.iter().cloned());
                for p in pts {
                    let ll = log_likelihood(c, &p);
                    if cand.as_ref().is_none_or(|(b, _)| ll > *b) {
                        cand = Some((ll, p));
                    }
                }
                match cand {
                    Some((_, start)) => refine(c, start, &closure, 1.0 / piece.resolution as f64),
                    None => f64::NEG_INFINITY,
                }
            };
            total += f_ll;
        }
        best = best.max(total);
    }
    best
}

/// Which block each factor of a region predicts.
fn region_blocks(r: &Region) -> Vec<usize> {
    match r.mode {
        AnalysisMode::Symmetric => vec![0],
        AnalysisMode::Product => vec![0, 1],
    }
}

/// Closure of one factor of a region's pattern set: the pattern's best
/// replies stay best (ties allowed) and strategies outside the support
/// pattern stay at or below the ε cut.
fn in_factor_closure(game: &Game, r: &Region, factor: usize, v: &[f64], eps: f64) -> bool {
    if !numeric::is_simplex_vector(v, 1e-12) {
        return false;
    }
    let (pi, best_target, support) = match r.mode {
        AnalysisMode::Symmetric => (game.payoffs_shared(0, v).0, r.pattern[0], r.pattern[0]),
        AnalysisMode::Product => {
            // x is player 0's mix and drives player 1's payoffs, and vice versa
            let other = 1 - factor;
            (game.payoffs_shared(other, v).0, r.pattern[other], r.pattern[factor])
        }
    };
    let m = numeric::max_value(&pi);
    let scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
    let best_ok = best_target.iter().all(|j| pi[j] >= m - 1e-9 * scale);
    let cut = eps * numeric::max_value(v) + 1e-9;
    best_ok && (0..v.len()).all(|j| support.contains(j) || v[j] <= cut)
}

/// Compass search on the log-likelihood within a membership predicate.
fn refine(counts: &[f64], start: Vec<f64>, member: &dyn Fn(&[f64]) -> bool, step: f64) -> f64 {
    let k = start.len();
    let mut x = start;
    let mut fx = log_likelihood(counts, &x);
    if !member(&x) {
        // lattice centers of a closed set are members; thin points may sit
        // a rounding error outside
        return fx;
    }
    let dirs: Vec<Vec<f64>> = (0..k)
        .flat_map(|a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| {
            let mut d = vec![0.0; k];
            d[a] = 1.0;
            d[b] = -1.0;
            d
        })
        .collect();
    let mut h = step;
    for _ in 0..10_000 {
        if h <= 1e-10 {
            break;
        }
        let mut moved = false;
        for d in &dirs {
            let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + h * b).collect();
            if y.iter().any(|&p| p < 0.0) || !member(&y) {
                continue;
            }
            let fy = log_likelihood(counts, &y);
            if fy > fx + 1e-14 {
                x = y;
                fx = fy;
                moved = true;
            }
        }
        // expand after a successful sweep so long slides along a boundary stay cheap
        h = if moved { (2.0 * h).min(step) } else { 0.5 * h };
    }
    fx
}

/// G of the S(ε) union against one game's sessions.
pub fn g_statistic_sets(game: &Game, sessions: &[SessionCounts], regions: &[Region], eps: f64) -> Result<GStat> {
    let mut g = 0.0;
    let mut dof = 0;
    for s in sessions {
        let ll = sup_log_likelihood(game, s, regions, eps);
        g += g_from(&s.counts, ll);
        dof += s.counts.iter().map(|c| c.len() - 1).sum::<usize>();
    }
    GStat::new(g, dof)
}

// -------------------------------------------------------------- fitting

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub lambda_max: f64,
    pub lambda_steps: usize,
    pub tau_max: f64,
    pub tau_steps: usize,
    pub eps_steps: usize,
    /// ε grid for the S model: `i / s_steps`.
    pub s_steps: usize,
    /// Grid resolution for set geometry; `None` uses the mode default.
    pub resolution: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            lambda_max: 2.0,
            lambda_steps: 60,
            tau_max: 10.0,
            tau_steps: 101,
            eps_steps: 100,
            s_steps: 20,
            resolution: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionFit {
    pub game_id: String,
    pub session: String,
    pub counts: Vec<Vec<f64>>,
    pub frequencies: Vec<Vec<f64>>,
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub param: f64,
    pub log_likelihood: f64,
    pub log_likelihood_max: f64,
    pub g: f64,
    pub dof: usize,
    pub g_bar: f64,
    pub sessions: Vec<SessionFit>,
}

/// One game's data together with cached model predictions on the grid.
struct Evaluator<'a> {
    game: &'a Game,
    sessions: Vec<SessionCounts>,
    model: ModelKind,
    grid: Vec<f64>,
    /// Curve models: the prediction at each grid value.
    profiles: Vec<MixedProfile>,
    /// S model: the analyzer for set geometry.
    analyzer: Option<SetAnalyzer<'a>>,
}

impl<'a> Evaluator<'a> {
    fn new(game: &'a Game, data: &[Observation], model: ModelKind, opts: &FitOptions) -> Result<Self> {
        let sessions = session_counts(game, data)?;
        let mut ev = Evaluator {
            game,
            sessions,
            model,
            grid: Vec::new(),
            profiles: Vec::new(),
            analyzer: None,
        };
        match model {
            ModelKind::S => {
                let mode = AnalysisMode::default_for(game)?;
                let m = opts.resolution.unwrap_or(mode.default_resolution());
                ev.analyzer = Some(SetAnalyzer::new(game, mode, m)?);
                ev.grid = (1..=opts.s_steps).map(|i| i as f64 / opts.s_steps as f64).collect();
            }
            ModelKind::Logit => {
                let c = logit_qre_curve(game, opts.lambda_max, opts.lambda_steps)?;
                ev.grid = c.samples.iter().map(|s| s.param).collect();
                ev.profiles = c.samples.into_iter().map(|s| s.profile).collect();
            }
            ModelKind::LevelK => {
                let n = opts.tau_steps.max(2);
                ev.grid = (0..n).map(|i| opts.tau_max * i as f64 / (n - 1) as f64).collect();
                ev.profiles = ev
                    .grid
                    .iter()
                    .map(|&t| level_k_mixture(game, t, 20).map(|(p, _)| p))
                    .collect::<Result<_>>()?;
            }
            ModelKind::EpsPerfect | ModelKind::EpsProper => {
                let kind = model.restricted().expect("restricted model");
                let c = eps_model_curve(game, kind, opts.eps_steps)?;
                // ascending in ε
                let mut samples = c.samples;
                samples.reverse();
                ev.grid = samples.iter().map(|s| s.param).collect();
                ev.profiles = samples.into_iter().map(|s| s.profile).collect();
            }
        }
        Ok(ev)
    }

    fn profile_at(&self, param: f64) -> Result<MixedProfile> {
        let nearest = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - param).abs().total_cmp(&(b.1 - param).abs()))
            .map(|(i, _)| i)
            .expect("nonempty grid");
        match self.model {
            ModelKind::Logit => logit_qre_at(self.game, param, &self.profiles[nearest]),
            ModelKind::LevelK => Ok(level_k_mixture(self.game, param, 20)?.0),
            ModelKind::EpsPerfect | ModelKind::EpsProper => {
                let kind = self.model.restricted().expect("restricted model");
                Ok(eps_fixed_point_near(self.game, kind, param, &self.profiles[nearest])?.profile)
            }
            ModelKind::S => Err(Error::Unsupported("S predictions are sets".into())),
        }
    }

    /// Per-session log-likelihoods at a grid index.
    fn session_ll_at_index(&self, i: usize) -> Result<Vec<f64>> {
        match self.model {
            ModelKind::S => {
                let eps = self.grid[i];
                let regions = self.analyzer.as_ref().expect("S analyzer").choice_sets(eps)?;
                Ok(self
                    .sessions
                    .iter()
                    .map(|s| sup_log_likelihood(self.game, s, &regions, eps))
                    .collect())
            }
            _ => Ok(self.session_ll_for(&self.profiles[i])),
        }
    }

    fn session_ll_for(&self, profile: &MixedProfile) -> Vec<f64> {
        let blocks = profile_blocks(self.game, profile);
        self.sessions
            .iter()
            .map(|s| s.counts.iter().zip(&blocks).map(|(c, p)| log_likelihood(c, p)).sum())
            .collect()
    }

    fn g_of(&self, lls: &[f64]) -> f64 {
        self.sessions.iter().zip(lls).map(|(s, &ll)| g_from(&s.counts, ll)).sum()
    }

    fn dof(&self) -> usize {
        self.sessions
            .iter()
            .map(|s| s.counts.iter().map(|c| c.len() - 1).sum::<usize>())
            .sum()
    }

    fn session_fits(&self, lls: &[f64]) -> Vec<SessionFit> {
        self.sessions
            .iter()
            .zip(lls)
            .map(|(s, &ll)| SessionFit {
                game_id: s.game_id.clone(),
                session: s.session.clone(),
                counts: s.counts.clone(),
                frequencies: s.frequencies(),
                g: g_from(&s.counts, ll),
            })
            .collect()
    }

    fn saturated(&self) -> f64 {
        self.sessions
            .iter()
            .flat_map(|s| s.counts.iter())
            .map(|c| saturated_log_likelihood(c))
            .sum()
    }
}

fn result_for(model: ModelKind, param: f64, evs: &[Evaluator], lls: &[Vec<f64>]) -> Result<FitResult> {
    let g: f64 = evs.iter().zip(lls).map(|(e, l)| e.g_of(l)).sum();
    let dof = evs.iter().map(Evaluator::dof).sum();
    let stat = GStat::new(g, dof)?;
    Ok(FitResult {
        model,
        param,
        log_likelihood: lls.iter().flatten().sum(),
        log_likelihood_max: evs.iter().map(Evaluator::saturated).sum(),
        g,
        dof,
        g_bar: stat.g_bar,
        sessions: evs.iter().zip(lls).flat_map(|(e, l)| e.session_fits(l)).collect(),
    })
}

/// Fit one parameter shared by all `games` by minimizing the summed G.
/// Sessions are fitted separately (each with its own frequency) and their
/// G values added.
pub fn fit_scalar_model(games: &[&Game], data: &[Observation], model: ModelKind, opts: &FitOptions) -> Result<FitResult> {
    if games.is_empty() {
        return Err(Error::validation("no games to fit"));
    }
    let evs: Vec<Evaluator> = games
        .iter()
        .map(|g| Evaluator::new(g, data, model, opts))
        .collect::<Result<_>>()?;
    fit_with(&evs, model)
}

fn fit_with(evs: &[Evaluator], model: ModelKind) -> Result<FitResult> {
    let grid = evs[0].grid.clone();
    let mut table: Vec<Vec<Vec<f64>>> = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        table.push(evs.iter().map(|e| e.session_ll_at_index(i)).collect::<Result<_>>()?);
    }
    let totals: Vec<f64> = table
        .iter()
        .map(|lls| evs.iter().zip(lls).map(|(e, l)| e.g_of(l)).sum())
        .collect();
    // smallest parameter among the minimizers
    let best_g = totals.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = best_g.abs().max(1.0);
    let best = totals
        .iter()
        .position(|&g| g <= best_g + 1e-9 * scale)
        .ok_or_else(|| Error::numerical("no finite likelihood on the parameter grid"))?;
    let mut result = result_for(model, grid[best], evs, &table[best])?;
    if model == ModelKind::S || grid.len() < 3 {
        return Ok(result);
    }
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let objective = |p: f64| -> f64 {
        evs.iter()
            .map(|e| match e.profile_at(p) {
                Ok(prof) => e.g_of(&e.session_ll_for(&prof)),
                Err(_) => f64::INFINITY,
            })
            .sum()
    };
    let tol = (hi - lo).abs() * 1e-6;
    let (p, gp) = numeric::golden_section(objective, lo, hi, tol.max(1e-12));
    if gp < result.g {
        let lls: Vec<Vec<f64>> = evs
            .iter()
            .map(|e| e.profile_at(p).map(|prof| e.session_ll_for(&prof)))
            .collect::<Result<_>>()?;
        result = result_for(model, p, evs, &lls)?;
    }
    Ok(result)
}

/// Predicted profile of a curve model at a parameter value.
pub fn model_prediction(game: &Game, model: ModelKind, param: f64, opts: &FitOptions) -> Result<MixedProfile> {
    match model {
        ModelKind::S => Err(Error::Unsupported("S predictions are sets".into())),
        ModelKind::LevelK => Ok(level_k_mixture(game, param, 20)?.0),
        ModelKind::Logit => {
            let c = logit_qre_curve(game, param.max(opts.lambda_max.min(param)), opts.lambda_steps)?;
            Ok(c.samples.last().expect("nonempty curve").profile.clone())
        }
        ModelKind::EpsPerfect | ModelKind::EpsProper => {
            let kind = model.restricted().expect("restricted model");
            let steps = opts.eps_steps.max(1);
            let c = eps_model_curve(game, kind, steps)?;
            let near = c.nearest(param).expect("nonempty curve").profile.clone();
            Ok(eps_fixed_point_near(game, kind, param, &near)?.profile)
        }
    }
}

// ------------------------------------------------------------------ MPS

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpsResult {
    pub eps: f64,
    pub hit_rate: f64,
    pub area_size: f64,
    pub mps: f64,
}

impl MpsResult {
    pub fn new(eps: f64, hit_rate: f64, area_size: f64) -> Self {
        MpsResult {
            eps,
            hit_rate,
            area_size,
            mps: hit_rate - area_size,
        }
    }
}

/// What one "data point" for the hit rate is.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HitUnit {
    /// Each subject's choice frequency over the rounds of a session.
    #[default]
    Subject,
    /// Each round's session-wide choice frequency.
    Round,
    /// One point per session.
    Session,
}

impl std::str::FromStr for HitUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subject" => Ok(HitUnit::Subject),
            "round" => Ok(HitUnit::Round),
            "session" => Ok(HitUnit::Session),
            _ => Err(Error::validation(format!("unknown hit unit '{s}' (subject, round, session)"))),
        }
    }
}

/// Frequency points for the hit rate, as full profiles. In games with
/// separate roles a subject's own frequency is paired with the session
/// frequency of the other role.
pub fn hit_points(game: &Game, data: &[Observation], unit: HitUnit) -> Result<Vec<MixedProfile>> {
    let sizes = block_sizes(game);
    let obs: Vec<&Observation> = data.iter().filter(|o| o.game_id == game.id()).collect();
    for o in &obs {
        o.validate(game)?;
    }
    let tally = |it: &mut dyn Iterator<Item = &&Observation>| -> Vec<Vec<f64>> {
        let mut c: Vec<Vec<f64>> = sizes.iter().map(|&k| vec![0.0; k]).collect();
        for o in it {
            c[block_of(game, o.role)][o.choice] += 1.0;
        }
        c
    };
    let freq = |c: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        c.into_iter()
            .map(|v| {
                let n: f64 = v.iter().sum();
                if n > 0.0 {
                    v.iter().map(|x| x / n).collect()
                } else {
                    vec![f64::NAN; v.len()]
                }
            })
            .collect()
    };
    let sessions: BTreeMap<&str, Vec<&Observation>> =
        obs.iter().copied().map(|o| (o.session.as_str(), o)).into_group_map().into_iter().collect();
    let mut points = Vec::new();
    for (_, rows) in sessions {
        let session_freq = freq(tally(&mut rows.iter()));
        let groups: Vec<Vec<&Observation>> = match unit {
            HitUnit::Session => vec![rows.clone()],
            HitUnit::Round => rows
                .iter()
                .map(|o| (o.round, *o))
                .into_group_map()
                .into_iter()
                .sorted_by_key(|(r, _)| *r)
                .map(|(_, v)| v)
                .collect(),
            HitUnit::Subject => rows
                .iter()
                .map(|o| ((o.subject.clone(), o.role), *o))
                .into_group_map()
                .into_iter()
                .sorted_by(|a, b| a.0.cmp(&b.0))
                .map(|(_, v)| v)
                .collect(),
        };
        for g in groups {
            let mut f = freq(tally(&mut g.iter()));
            for (b, block) in f.iter_mut().enumerate() {
                if block.iter().any(|x| x.is_nan()) {
                    *block = session_freq[b].clone();
                }
            }
            if f.iter().flatten().any(|x| x.is_nan()) {
                continue;
            }
            points.push(expand_blocks(game, f));
        }
    }
    Ok(points)
}

/// Hit rate, area and MPS of a predicted union of regions.
pub fn mps(points: &[MixedProfile], regions: &[Region], eps: f64) -> MpsResult {
    let hits = points.iter().filter(|p| hit_test(regions, p).is_some()).count();
    let rate = if points.is_empty() { 0.0 } else { hits as f64 / points.len() as f64 };
    MpsResult::new(eps, rate, union_measure(regions).min(1.0))
}

/// The ε on the grid `i / steps` that maximizes MPS (smallest on ties),
/// together with the whole sweep.
pub fn epsilon_by_mps(
    game: &Game,
    data: &[Observation],
    unit: HitUnit,
    steps: usize,
    resolution: Option<usize>,
) -> Result<(MpsResult, Vec<MpsResult>)> {
    let mode = AnalysisMode::default_for(game)?;
    let analyzer = SetAnalyzer::new(game, mode, resolution.unwrap_or(mode.default_resolution()))?;
    let points = hit_points(game, data, unit)?;
    let steps = steps.max(1);
    let sweep: Vec<MpsResult> = (1..=steps)
        .map(|i| {
            let eps = i as f64 / steps as f64;
            Ok(mps(&points, &analyzer.choice_sets(eps)?, eps))
        })
        .collect::<Result<_>>()?;
    let best = sweep
        .iter()
        .fold(None::<MpsResult>, |acc, r| match acc {
            Some(a) if a.mps >= r.mps - 1e-12 => Some(a),
            _ => Some(*r),
        })
        .expect("nonempty sweep");
    Ok((best, sweep))
}

// ------------------------------------------------- nonparametric tests

/// Two-sample Kolmogorov-Smirnov distance with optional sample weights.
pub fn ks_d_weighted(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() || a.len() != wa.len() || b.len() != wb.len() {
        return Err(Error::validation("KS samples must be nonempty and match their weights"));
    }
    let (ta, tb): (f64, f64) = (wa.iter().sum(), wb.iter().sum());
    if !(ta > 0.0 && tb > 0.0) || wa.iter().chain(wb).any(|&w| w < 0.0) {
        return Err(Error::validation("KS weights must be nonnegative with positive totals"));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    pooled.dedup();
    let cdf = |xs: &[f64], ws: &[f64], t: f64, total: f64| -> f64 {
        xs.iter().zip(ws).filter(|(x, _)| **x <= t).map(|(_, w)| w).sum::<f64>() / total
    };
    Ok(pooled
        .iter()
        .map(|&t| (cdf(a, wa, t, ta) - cdf(b, wb, t, tb)).abs())
        .fold(0.0, f64::max))
}

pub fn ks_d(a: &[f64], b: &[f64]) -> Result<f64> {
    ks_d_weighted(a, &vec![1.0; a.len()], b, &vec![1.0; b.len()])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wilcoxon {
    /// Number of nonzero differences.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Paired signed-rank test (normal approximation, continuity correction,
/// mid-ranks for ties, zero differences dropped).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<Wilcoxon> {
    if a.len() != b.len() {
        return Err(Error::validation("paired samples differ in length"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(Wilcoxon {
            n,
            w_plus: 0.0,
            w_minus: 0.0,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let nf = n as f64;
    let w_minus = nf * (nf + 1.0) / 2.0 - w_plus;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let diff = w_plus - mean;
    let z = if var > 0.0 {
        (diff - 0.5 * diff.signum()) / var.sqrt()
    } else {
        0.0
    };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p_value = (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0);
    Ok(Wilcoxon {
        n,
        w_plus,
        w_minus,
        z,
        p_value,
    })
}

// ------------------------------------------------------- out of sample

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutOfSample {
    pub model: ModelKind,
    pub subset_size: usize,
    pub combinations: usize,
    /// Average over combinations of the in-sample G per game.
    pub mean_in_sample_g: f64,
    /// Average over combinations and held-out games of G at the in-sample
    /// parameter.
    pub mean_held_out_g: f64,
    pub per_combination: Vec<(Vec<String>, f64, f64)>,
}

/// Fit on every `subset_size`-subset of the games and score the rest.
pub fn out_of_sample(
    games: &[&Game],
    data: &[Observation],
    model: ModelKind,
    subset_size: usize,
    opts: &FitOptions,
) -> Result<OutOfSample> {
    let n = games.len();
    if n < 3 || subset_size < 2 || subset_size >= n {
        return Err(Error::validation(format!(
            "in-sample size must lie in 2..{} for {n} games",
            n.saturating_sub(1)
        )));
    }
    let evs: Vec<Evaluator> = games
        .iter()
        .map(|g| Evaluator::new(g, data, model, opts))
        .collect::<Result<_>>()?;
    // G of every game at every grid value, computed once
    let grid_g: Vec<Vec<f64>> = evs
        .par_iter()
        .map(|e| {
            (0..e.grid.len())
                .map(|i| e.session_ll_at_index(i).map(|l| e.g_of(&l)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let combos: Vec<Vec<usize>> = (0..n).combinations(subset_size).collect();
    let rows: Vec<(Vec<String>, f64, f64)> = combos
        .par_iter()
        .map(|inside| {
            let totals: Vec<f64> = (0..evs[0].grid.len())
                .map(|i| inside.iter().map(|&g| grid_g[g][i]).sum())
                .collect();
            let best_g = totals.iter().copied().fold(f64::INFINITY, f64::min);
            let best = totals
                .iter()
                .position(|&g| g <= best_g + 1e-9 * best_g.abs().max(1.0))
                .unwrap_or(0);
            let held: Vec<f64> = (0..n).filter(|g| !inside.contains(g)).map(|g| grid_g[g][best]).collect();
            (
                inside.iter().map(|&g| games[g].id().to_string()).collect(),
                best_g / subset_size as f64,
                held.iter().sum::<f64>() / held.len() as f64,
            )
        })
        .collect();
    let m = rows.len() as f64;
    Ok(OutOfSample {
        model,
        subset_size,
        combinations: rows.len(),
        mean_in_sample_g: rows.iter().map(|r| r.1).sum::<f64>() / m,
        mean_held_out_g: rows.iter().map(|r| r.2).sum::<f64>() / m,
        per_combination: rows,
    })
}

// --------------------------------------------------- belief diagnostics

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationTest {
    pub statistic: f64,
    pub p_value: f64,
    pub resamples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefReport {
    pub game_id: String,
    pub n_beliefs: usize,
    pub missing: usize,
    /// Share of beliefs equal (after rounding) to some level-k belief.
    pub level_k_share: f64,
    /// `rank_counts[r]`: choices that were the `(r+1)`-th best reply to the
    /// chooser's own belief.
    pub rank_counts: Vec<usize>,
    /// Share of beliefs whose best reply matches the best reply to actual
    /// play.
    pub unbiased_share: f64,
    pub mean_belief: Vec<Vec<f64>>,
    pub mean_choice: Vec<Vec<f64>>,
    /// Equality of mean choice and mean belief, per role block.
    pub rational_expectations: Vec<PermutationTest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefOptions {
    /// Beliefs and level beliefs are compared after rounding to this step.
    pub rounding: f64,
    pub k_max: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for BeliefOptions {
    fn default() -> Self {
        BeliefOptions {
            rounding: 0.01,
            k_max: 20,
            resamples: 10_000,
            seed: 1,
        }
    }
}

/// Rank of `choice` in the payoff ordering (1 = best; ties share the better
/// rank).
pub fn choice_rank(pi: &[f64], choice: usize) -> usize {
    let scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
    1 + pi.iter().filter(|&&p| p > pi[choice] + TIE_TOL * scale).count()
}

/// Which block of choices a belief held by `role` is about.
fn opponent_block(game: &Game, role: usize) -> usize {
    if game.is_symmetric() {
        0
    } else {
        1 - role
    }
}

pub fn belief_diagnostics(game: &Game, data: &[Observation], opts: &BeliefOptions) -> Result<BeliefReport> {
    if game.n_players() > 2 && !game.is_symmetric() {
        return Err(Error::Unsupported(
            "belief diagnostics need a two-player or symmetric game".into(),
        ));
    }
    let obs: Vec<&Observation> = data.iter().filter(|o| o.game_id == game.id()).collect();
    for o in &obs {
        o.validate(game)?;
    }
    let with: Vec<&Observation> = obs.iter().copied().filter(|o| o.belief.is_some()).collect();
    let missing = obs.len() - with.len();
    if with.is_empty() {
        return Err(Error::validation(format!("no stated beliefs for game {}", game.id())));
    }
    let sizes = block_sizes(game);
    let round = |v: &[f64]| -> Vec<i64> { v.iter().map(|x| (x / opts.rounding).round() as i64).collect() };
    let levels = level_hierarchy(game, opts.k_max);
    let level_beliefs: Vec<Vec<Vec<i64>>> = (0..sizes.len())
        .map(|b| levels.levels[..opts.k_max].iter().map(|p| round(p.player(b))).collect())
        .collect();

    // choice frequencies per block, and the best replies against them
    let mut choice_counts: Vec<Vec<f64>> = sizes.iter().map(|&k| vec![0.0; k]).collect();
    for o in &obs {
        choice_counts[block_of(game, o.role)][o.choice] += 1.0;
    }
    let choice_freq: Vec<Vec<f64>> = choice_counts
        .iter()
        .map(|c| {
            let n: f64 = c.iter().sum();
            if n > 0.0 {
                c.iter().map(|x| x / n).collect()
            } else {
                numeric::uniform(c.len())
            }
        })
        .collect();
    let actual_best = |role: usize| -> StrategySet {
        let pi = game.payoffs_shared(role, &choice_freq[opponent_block(game, role)]).0;
        best_reply_set(&pi, TIE_TOL)
    };

    let mut level_hits = 0;
    let mut unbiased = 0;
    let k_max = *sizes.iter().max().expect("players");
    let mut rank_counts = vec![0; k_max];
    let mut belief_sum: Vec<Vec<f64>> = sizes.iter().map(|&k| vec![0.0; k]).collect();
    let mut belief_n = vec![0.0; sizes.len()];
    let mut belief_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); sizes.len()];
    for o in &with {
        let b = o.belief.as_ref().expect("filtered");
        let about = opponent_block(game, o.role);
        let rb = round(b);
        if level_beliefs[about].contains(&rb) {
            level_hits += 1;
        }
        let pi = game.payoffs_shared(o.role, b).0;
        rank_counts[choice_rank(&pi, o.choice) - 1] += 1;
        let best = best_reply_set(&pi, TIE_TOL);
        if best.bits() & actual_best(o.role).bits() != 0 {
            unbiased += 1;
        }
        for (s, x) in belief_sum[about].iter_mut().zip(b) {
            *s += x;
        }
        belief_n[about] += 1.0;
        belief_rows[about].push(b.clone());
    }
    let mean_belief: Vec<Vec<f64>> = belief_sum
        .iter()
        .zip(&belief_n)
        .map(|(s, &n)| s.iter().map(|x| if n > 0.0 { x / n } else { f64::NAN }).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut re_tests = Vec::new();
    for (b, rows) in belief_rows.iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        let choices: Vec<Vec<f64>> = obs
            .iter()
            .filter(|o| block_of(game, o.role) == b)
            .map(|o| numeric::unit(sizes[b], o.choice))
            .collect();
        re_tests.push(permutation_test(&choices, rows, opts.resamples, &mut rng));
    }
    let n = with.len() as f64;
    Ok(BeliefReport {
        game_id: game.id().to_string(),
        n_beliefs: with.len(),
        missing,
        level_k_share: level_hits as f64 / n,
        rank_counts,
        unbiased_share: unbiased as f64 / n,
        mean_belief,
        mean_choice: choice_freq,
        rational_expectations: re_tests,
    })
}

fn max_mean_gap(a: &[&Vec<f64>], b: &[&Vec<f64>]) -> f64 {
    let k = a.first().or(b.first()).map_or(0, |v| v.len());
    (0..k)
        .map(|j| {
            let ma = a.iter().map(|v| v[j]).sum::<f64>() / a.len() as f64;
            let mb = b.iter().map(|v| v[j]).sum::<f64>() / b.len() as f64;
            (ma - mb).abs()
        })
        .fold(0.0, f64::max)
}

/// Two-sample permutation test of equal mean vectors, statistic = largest
/// componentwise gap. `p = (1 + #{T* >= T}) / (1 + R)`.
pub fn permutation_test(a: &[Vec<f64>], b: &[Vec<f64>], resamples: usize, rng: &mut ChaCha8Rng) -> PermutationTest {
    if a.is_empty() || b.is_empty() {
        return PermutationTest {
            statistic: 0.0,
            p_value: 1.0,
            resamples: 0,
        };
    }
    let pooled: Vec<&Vec<f64>> = a.iter().chain(b).collect();
    let observed = max_mean_gap(&pooled[..a.len()], &pooled[a.len()..]);
    let mut idx: Vec<usize> = (0..pooled.len()).collect();
    let mut exceed = 0;
    for _ in 0..resamples {
        idx.shuffle(rng);
        let left: Vec<&Vec<f64>> = idx[..a.len()].iter().map(|&i| pooled[i]).collect();
        let right: Vec<&Vec<f64>> = idx[a.len()..].iter().map(|&i| pooled[i]).collect();
        if max_mean_gap(&left, &right) >= observed - 1e-12 {
            exceed += 1;
        }
    }
    PermutationTest {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (1 + resamples) as f64,
        resamples,
    }
}
