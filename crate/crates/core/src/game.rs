//! Finite normal-form games, mixed profiles, beliefs and best replies.
//!
//! Payoffs are dense per-player tensors over pure profiles, stored row-major
//! with player 0 as the slowest axis. Symmetric games are built from the
//! player-0 tensor `T[own][opp_1]..[opp_{n-1}]`; player `i` receives
//! `T[x_i][x_j][x_k]` where `j < k` are the other players in increasing
//! order. For two players this is the transpose rule; for three players the
//! opponent slices must be symmetric, so the order of opponents is
//! immaterial.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, gauss_newton, is_simplex_vector, max_abs_diff};

/// Default tolerance for exact payoff ties.
pub const TIE_TOL: f64 = 1e-9;

/// A set of pure-strategy indices for one player, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategySet(u32);

impl StrategySet {
    pub const EMPTY: StrategySet = StrategySet(0);

    pub fn singleton(k: usize) -> Self {
        StrategySet(1 << k)
    }

    pub fn full(k: usize) -> Self {
        StrategySet(((1u64 << k) - 1) as u32)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        StrategySet(it.into_iter().fold(0, |m, k| m | (1 << k)))
    }

    pub fn from_bits(bits: u32) -> Self {
        StrategySet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, k: usize) -> bool {
        self.0 & (1 << k) != 0
    }

    pub fn insert(&mut self, k: usize) {
        self.0 |= 1 << k;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: StrategySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&k| self.0 & (1 << k) != 0)
    }

    /// Render with strategy labels, e.g. `{R,B}`.
    pub fn display_with(self, labels: &[String]) -> String {
        let names: Vec<&str> = self
            .iter()
            .map(|k| labels.get(k).map(String::as_str).unwrap_or("?"))
            .collect();
        format!("{{{}}}", names.join(","))
    }
}

impl fmt::Debug for StrategySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Expected payoff of each pure strategy of one player.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffVector(pub Vec<f64>);

impl Deref for PayoffVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl PayoffVector {
    pub fn max(&self) -> f64 {
        numeric::max_value(&self.0)
    }
}

/// A mixed strategy for every player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedProfile {
    probs: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::validation("mixed profile has no players"));
        }
        for (i, p) in probs.iter().enumerate() {
            if !is_simplex_vector(p, numeric::SIMPLEX_TOL) {
                return Err(Error::validation(format!(
                    "player {i} strategy {p:?} is not a probability vector"
                )));
            }
        }
        Ok(MixedProfile { probs })
    }

    pub(crate) fn from_parts_unchecked(probs: Vec<Vec<f64>>) -> Self {
        MixedProfile { probs }
    }

    pub fn centroid(strategy_counts: &[usize]) -> Self {
        MixedProfile {
            probs: strategy_counts.iter().map(|&k| numeric::uniform(k)).collect(),
        }
    }

    pub fn pure(strategy_counts: &[usize], profile: &[usize]) -> Self {
        MixedProfile {
            probs: strategy_counts
                .iter()
                .zip(profile)
                .map(|(&k, &x)| numeric::unit(k, x))
                .collect(),
        }
    }

    /// Every player uses the same mixed strategy `v`.
    pub fn symmetric(v: &[f64], n: usize) -> Result<Self> {
        Self::new(vec![v.to_vec(); n])
    }

    pub fn n_players(&self) -> usize {
        self.probs.len()
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn players(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.probs
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.probs
            .iter()
            .all(|p| p.len() == self.probs[0].len() && max_abs_diff(p, &self.probs[0]) <= tol)
    }

    pub fn max_abs_diff(&self, other: &MixedProfile) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// Opponents' strategies of player `i`, in increasing player order.
    pub fn opponents_of(&self, i: usize) -> BeliefPoint {
        BeliefPoint::Independent(
            self.probs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p.clone())
                .collect(),
        )
    }
}

/// A player's belief about opponents' play.
#[derive(Clone, Debug, PartialEq)]
pub enum BeliefPoint {
    /// One simplex vector per opponent, in increasing player order.
    Independent(Vec<Vec<f64>>),
    /// A single vector held about every opponent (symmetric games).
    Shared(Vec<f64>),
}

impl BeliefPoint {
    pub fn factors(&self) -> Vec<&[f64]> {
        match self {
            BeliefPoint::Independent(v) => v.iter().map(Vec::as_slice).collect(),
            BeliefPoint::Shared(v) => vec![v.as_slice()],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    id: String,
    description: String,
    strategy_counts: Vec<usize>,
    labels: Vec<Vec<String>>,
    payoffs: Vec<Vec<f64>>,
    strides: Vec<usize>,
    symmetric: bool,
}

fn default_labels(k: usize) -> Vec<String> {
    const RBY: [&str; 3] = ["R", "B", "Y"];
    if k == 3 {
        RBY.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("s{i}")).collect()
    }
}

fn strides_for(counts: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; counts.len()];
    for i in (0..counts.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * counts[i + 1];
    }
    strides
}

impl Game {
    /// Build a game from explicit per-player payoff tensors (row-major over
    /// the full pure profile, player 0 slowest).
    pub fn new(
        id: impl Into<String>,
        strategy_counts: Vec<usize>,
        payoffs: Vec<Vec<f64>>,
        labels: Option<Vec<Vec<String>>>,
    ) -> Result<Self> {
        let n = strategy_counts.len();
        if n < 2 {
            return Err(Error::validation("a game needs at least two players"));
        }
        if n > 3 {
            return Err(Error::Unsupported(format!("{n}-player games (at most 3 supported)")));
        }
        if let Some(&k) = strategy_counts.iter().find(|&&k| !(2..=16).contains(&k)) {
            return Err(Error::validation(format!("strategy count {k} outside 2..=16")));
        }
        if payoffs.len() != n {
            return Err(Error::validation(format!(
                "expected {n} payoff tensors, got {}",
                payoffs.len()
            )));
        }
        let cells: usize = strategy_counts.iter().product();
        for (i, t) in payoffs.iter().enumerate() {
            if t.len() != cells {
                return Err(Error::validation(format!(
                    "payoff tensor of player {i} has {} entries, expected {cells}",
                    t.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(format!("player {i} has non-finite payoffs")));
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n || l.iter().zip(&strategy_counts).any(|(l, &k)| l.len() != k) {
                    return Err(Error::validation("strategy labels do not match strategy counts"));
                }
                l
            }
            None => strategy_counts.iter().map(|&k| default_labels(k)).collect(),
        };
        Ok(Game {
            id: id.into(),
            description: String::new(),
            strides: strides_for(&strategy_counts),
            strategy_counts,
            labels,
            payoffs,
            symmetric: false,
        })
    }

    /// Build a symmetric game from the player-0 tensor `own[x_own][x_opp..]`.
    pub fn symmetric(
        id: impl Into<String>,
        n: usize,
        k: usize,
        own: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::Unsupported(format!("symmetric {n}-player games")));
        }
        let cells = k.pow(n as u32);
        if own.len() != cells {
            return Err(Error::validation(format!(
                "symmetric tensor has {} entries, expected {cells}",
                own.len()
            )));
        }
        if n == 3 {
            for a in 0..k {
                for b in 0..k {
                    for c in 0..k {
                        if own[a * k * k + b * k + c] != own[a * k * k + c * k + b] {
                            return Err(Error::validation(format!(
                                "3-player symmetric tensor must be symmetric in the opponents' \
                                 actions (slice {a}, entries ({b},{c}) and ({c},{b}) differ)"
                            )));
                        }
                    }
                }
            }
        }
        let counts = vec![k; n];
        let strides = strides_for(&counts);
        let mut payoffs = vec![vec![0.0; cells]; n];
        let mut x = vec![0usize; n];
        for idx in 0..cells {
            let mut rem = idx;
            for (j, s) in strides.iter().enumerate() {
                x[j] = rem / s;
                rem %= s;
            }
            for (i, tensor) in payoffs.iter_mut().enumerate() {
                let mut own_idx = x[i];
                for (j, &xj) in x.iter().enumerate() {
                    if j != i {
                        own_idx = own_idx * k + xj;
                    }
                }
                tensor[idx] = own[own_idx];
            }
        }
        let labels = labels.unwrap_or_else(|| default_labels(k));
        if labels.len() != k {
            return Err(Error::validation("strategy labels do not match strategy count"));
        }
        Ok(Game {
            id: id.into(),
            description: String::new(),
            strategy_counts: counts,
            labels: vec![labels; n],
            payoffs,
            strides,
            symmetric: true,
        })
    }

    /// Convenience constructor for a two-player game from row/column matrices.
    pub fn bimatrix(id: impl Into<String>, row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let k1 = row.len();
        let k2 = row.first().map_or(0, Vec::len);
        if col.len() != k1 || row.iter().chain(col).any(|r| r.len() != k2) {
            return Err(Error::validation("bimatrix payoff shapes differ"));
        }
        Game::new(
            id,
            vec![k1, k2],
            vec![row.concat(), col.concat()],
            None,
        )
    }

    /// Assert the symmetric flag on a game given by explicit tensors; fails
    /// unless the tensors obey the role-permutation rule.
    pub fn mark_symmetric(self) -> Result<Self> {
        let k = self.strategy_counts[0];
        if self.strategy_counts.iter().any(|&c| c != k) {
            return Err(Error::validation("symmetric games need equal strategy counts"));
        }
        let rebuilt = Game::symmetric(
            self.id.clone(),
            self.n_players(),
            k,
            self.payoffs[0].clone(),
            Some(self.labels[0].clone()),
        )?;
        if rebuilt.payoffs != self.payoffs {
            return Err(Error::validation(
                "payoff tensors are not consistent with the symmetric role permutation",
            ));
        }
        Ok(rebuilt.with_description(self.description))
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Result<Self> {
        if labels.len() != self.n_players()
            || labels.iter().zip(&self.strategy_counts).any(|(l, &k)| l.len() != k)
        {
            return Err(Error::validation("strategy labels do not match strategy counts"));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn n_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn k(&self, player: usize) -> usize {
        self.strategy_counts[player]
    }

    pub fn labels(&self, player: usize) -> &[String] {
        &self.labels[player]
    }

    pub fn all_labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Row-major payoff tensor of one player.
    pub fn payoff_tensor(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        let idx: usize = profile.iter().zip(&self.strides).map(|(x, s)| x * s).sum();
        self.payoffs[player][idx]
    }

    pub fn n_profiles(&self) -> usize {
        self.strategy_counts.iter().product()
    }

    pub fn min_payoff(&self) -> f64 {
        self.payoffs
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Constant added to every payoff so that expected payoffs are positive.
    pub fn positivity_shift(&self) -> f64 {
        let m = self.min_payoff();
        if m <= 0.0 {
            1.0 - m
        } else {
            0.0
        }
    }

    /// Core accumulation: `out[k] = sum_x prod_{j != who} w(j, x_j) Pi_who(k, x_{-who})`.
    pub(crate) fn accumulate<W>(&self, who: usize, weight: W, out: &mut [f64])
    where
        W: Fn(usize, usize) -> f64,
    {
        let n = self.n_players();
        out.iter_mut().for_each(|v| *v = 0.0);
        let tensor = &self.payoffs[who];
        let mut x = vec![0usize; n];
        for &payoff in tensor.iter() {
            let mut w = 1.0;
            for (j, &xj) in x.iter().enumerate() {
                if j != who {
                    w *= weight(j, xj);
                }
            }
            out[x[who]] += w * payoff;
            // odometer increment, last player fastest
            for j in (0..n).rev() {
                x[j] += 1;
                if x[j] < self.strategy_counts[j] {
                    break;
                }
                x[j] = 0;
            }
        }
    }

    /// Expected payoff of each pure strategy of `who` against a belief.
    pub fn expected_payoffs(&self, who: usize, against: &BeliefPoint) -> Result<PayoffVector> {
        let n = self.n_players();
        if who >= n {
            return Err(Error::validation(format!("player {who} out of range")));
        }
        let mut out = vec![0.0; self.k(who)];
        match against {
            BeliefPoint::Shared(v) => {
                if !self.symmetric {
                    return Err(Error::validation(
                        "a shared belief requires a game flagged symmetric",
                    ));
                }
                if v.len() != self.k(who) || !is_simplex_vector(v, 1e-9) {
                    return Err(Error::validation("shared belief is not a valid simplex vector"));
                }
                self.accumulate(who, |_, x| v[x], &mut out);
            }
            BeliefPoint::Independent(factors) => {
                if factors.len() != n - 1 {
                    return Err(Error::validation(format!(
                        "belief has {} factors, expected {}",
                        factors.len(),
                        n - 1
                    )));
                }
                let mut by_player: Vec<&[f64]> = vec![&[]; n];
                let mut it = factors.iter();
                for (j, slot) in by_player.iter_mut().enumerate() {
                    if j == who {
                        continue;
                    }
                    let f = it.next().expect("factor count checked");
                    if f.len() != self.k(j) || !is_simplex_vector(f, 1e-9) {
                        return Err(Error::validation(format!(
                            "belief about player {j} does not match its {} strategies",
                            self.k(j)
                        )));
                    }
                    *slot = f;
                }
                self.accumulate(who, |j, x| by_player[j][x], &mut out);
            }
        }
        Ok(PayoffVector(out))
    }

    /// `pi_i(sigma_{-i})`: payoffs when beliefs are correct.
    pub fn payoffs_against(&self, who: usize, sigma: &MixedProfile) -> PayoffVector {
        let mut out = vec![0.0; self.k(who)];
        self.accumulate(who, |j, x| sigma.player(j)[x], &mut out);
        PayoffVector(out)
    }

    /// Payoffs when every opponent plays (or is believed to play) `v`.
    pub fn payoffs_shared_into(&self, who: usize, v: &[f64], out: &mut [f64]) {
        self.accumulate(who, |_, x| v[x], out);
    }

    pub fn payoffs_shared(&self, who: usize, v: &[f64]) -> PayoffVector {
        let mut out = vec![0.0; self.k(who)];
        self.payoffs_shared_into(who, v, &mut out);
        PayoffVector(out)
    }

    /// Row player's (player 0) and column player's matrices of a 2-player game.
    pub fn bimatrix_parts(&self) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        if self.n_players() != 2 {
            return None;
        }
        let (k1, k2) = (self.k(0), self.k(1));
        let a = DMatrix::from_row_slice(k1, k2, &self.payoffs[0]);
        let b = DMatrix::from_row_slice(k1, k2, &self.payoffs[1]);
        Some((a, b))
    }
}

/// Indices whose payoff is within `tie_tol` of the maximum.
pub fn best_reply_set(pi: &[f64], tie_tol: f64) -> StrategySet {
    let m = numeric::max_value(pi);
    StrategySet::from_indices(
        pi.iter()
            .enumerate()
            .filter(|(_, &v)| v >= m - tie_tol)
            .map(|(k, _)| k),
    )
}

/// All pure profiles at which no player has a strictly profitable pure deviation.
pub fn pure_nash(game: &Game) -> Vec<Vec<usize>> {
    let n = game.n_players();
    let mut found = Vec::new();
    let mut x = vec![0usize; n];
    for _ in 0..game.n_profiles() {
        let stable = (0..n).all(|i| {
            let here = game.payoff(i, &x);
            let mut y = x.clone();
            (0..game.k(i)).all(|d| {
                y[i] = d;
                game.payoff(i, &y) <= here + TIE_TOL
            })
        });
        if stable {
            found.push(x.clone());
        }
        for j in (0..n).rev() {
            x[j] += 1;
            if x[j] < game.k(j) {
                break;
            }
            x[j] = 0;
        }
    }
    found
}

/// Result of an equilibrium search.
#[derive(Clone, Debug, Default)]
pub struct NashSet {
    pub equilibria: Vec<MixedProfile>,
    /// Support systems that were singular (degenerate games); one
    /// representative solution of each was still checked.
    pub singular_systems: usize,
}

impl NashSet {
    pub fn is_degenerate(&self) -> bool {
        self.singular_systems > 0
    }

    fn push_unique(&mut self, p: MixedProfile) {
        if !self.equilibria.iter().any(|q| q.max_abs_diff(&p) < 1e-7) {
            self.equilibria.push(p);
        }
    }
}

/// Solve `M[rows, cols] y = v 1`, `sum y = 1` for `y` on `cols`. Returns the
/// (min-norm) solution as a full-length vector and whether the system was
/// singular.
fn indifference_solve(
    m: &DMatrix<f64>,
    rows: &[usize],
    cols: &[usize],
    full_len: usize,
) -> Option<(Vec<f64>, f64, bool)> {
    let r = rows.len() + 1;
    let c = cols.len() + 1;
    let mut sys = DMatrix::zeros(r, c);
    let mut rhs = DVector::zeros(r);
    for (a, &row) in rows.iter().enumerate() {
        for (b, &col) in cols.iter().enumerate() {
            sys[(a, b)] = m[(row, col)];
        }
        sys[(a, c - 1)] = -1.0;
    }
    for b in 0..cols.len() {
        sys[(r - 1, b)] = 1.0;
    }
    rhs[r - 1] = 1.0;
    let svd = sys.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.rank(1e-10 * smax.max(1.0));
    let sol = svd.solve(&rhs, 1e-10 * smax.max(1.0)).ok()?;
    let resid = (&sys * &sol - &rhs).amax();
    if resid > 1e-8 {
        return None;
    }
    let mut y = vec![0.0; full_len];
    for (b, &col) in cols.iter().enumerate() {
        if sol[b] < -1e-10 {
            return None;
        }
        y[col] = sol[b].max(0.0);
    }
    numeric::normalize(&mut y);
    Some((y, sol[c - 1], rank < c))
}

/// Nash equilibria of a two-player game by support enumeration. With
/// `symmetric_only`, keep equilibria in which both players use the same
/// mixed strategy (requires a symmetric game).
pub fn support_enumeration_nash(game: &Game, symmetric_only: bool) -> Result<NashSet> {
    let (a, b) = game
        .bimatrix_parts()
        .ok_or_else(|| Error::Unsupported("support enumeration needs a 2-player game".into()))?;
    let (k1, k2) = (game.k(0), game.k(1));
    if k1 > 6 || k2 > 6 {
        return Err(Error::Unsupported("support enumeration beyond 6 strategies".into()));
    }
    if symmetric_only && !game.is_symmetric() {
        return Err(Error::validation("symmetric filter on an asymmetric game"));
    }
    let bt = b.transpose();
    let mut out = NashSet::default();
    for rows in numeric::nonempty_subsets(k1) {
        for cols in numeric::nonempty_subsets(k2) {
            // y: column mix making the row player indifferent on `rows`
            let Some((y, v, sing_y)) = indifference_solve(&a, &rows, &cols, k2) else {
                continue;
            };
            let Some((x, u, sing_x)) = indifference_solve(&bt, &cols, &rows, k1) else {
                continue;
            };
            if sing_x || sing_y {
                out.singular_systems += 1;
            }
            let ay = &a * DVector::from_column_slice(&y);
            let bx = &bt * DVector::from_column_slice(&x);
            let row_ok = ay.iter().all(|&p| p <= v + 1e-8);
            let col_ok = bx.iter().all(|&p| p <= u + 1e-8);
            if !(row_ok && col_ok) {
                continue;
            }
            let prof = MixedProfile::from_parts_unchecked(vec![x, y]);
            if symmetric_only && !prof.is_symmetric(1e-8) {
                continue;
            }
            out.push_unique(prof);
        }
    }
    if out.is_degenerate() {
        log::warn!(
            "game {}: {} singular support systems (degenerate game)",
            game.id(),
            out.singular_systems
        );
    }
    Ok(out)
}

/// Symmetric Nash equilibria of a symmetric 2- or 3-player game by
/// enumerating supports of the common mixed strategy. For three players the
/// indifference conditions are quadratic and are solved by multistart
/// Gauss-Newton on each support face.
pub fn symmetric_nash(game: &Game) -> Result<NashSet> {
    if !game.is_symmetric() {
        return Err(Error::validation("symmetric_nash needs a symmetric game"));
    }
    let n = game.n_players();
    let k = game.k(0);
    let mut out = NashSet::default();
    let is_equilibrium = |v: &[f64]| {
        let pi = game.payoffs_shared(0, v);
        let m = pi.max();
        v.iter()
            .zip(pi.iter())
            .all(|(&p, &payoff)| p <= 1e-12 || payoff >= m - 1e-7)
    };
    for support in numeric::nonempty_subsets(k) {
        let s = support.len();
        let embed = |params: &[f64]| {
            let mut v = vec![0.0; k];
            let mut rest = 1.0;
            for (t, &p) in params.iter().enumerate() {
                v[support[t]] = p;
                rest -= p;
            }
            v[support[s - 1]] = rest;
            v
        };
        let residual = |params: &[f64]| {
            let v = embed(params);
            let pi = game.payoffs_shared(0, &v);
            (1..s)
                .map(|t| pi[support[0]] - pi[support[t]])
                .collect::<Vec<f64>>()
        };
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if s == 1 {
            candidates.push(embed(&[]));
        } else if n == 2 {
            let (a, _) = game.bimatrix_parts().expect("two players");
            if let Some((v, _, singular)) = indifference_solve(&a, &support, &support, k) {
                if singular {
                    out.singular_systems += 1;
                }
                candidates.push(v);
            }
        } else if s == 2 {
            // one free parameter and a quadratic residual: solve in closed form,
            // which also handles the tangential (double-root) case exactly
            let (a, b, c) = numeric::quadratic_through(|t| residual(&[t])[0]);
            for t in numeric::real_roots_quadratic(a, b, c) {
                if (-1e-12..=1.0 + 1e-12).contains(&t) {
                    candidates.push(embed(&[t.clamp(0.0, 1.0)]));
                }
            }
        } else {
            // lattice of start points on the support face
            let res = 6usize;
            let mut starts = Vec::new();
            lattice_points(s, res, &mut Vec::new(), &mut starts);
            for start in starts {
                let params: Vec<f64> = start[..s - 1].to_vec();
                if let Some(sol) = gauss_newton(residual, &params, 1e-12, 60) {
                    let v = embed(&sol);
                    if v.iter().all(|&p| p >= -1e-10) {
                        let mut v: Vec<f64> = v.iter().map(|p| p.max(0.0)).collect();
                        numeric::normalize(&mut v);
                        candidates.push(v);
                    }
                }
            }
        }
        for v in candidates {
            if is_equilibrium(&v) {
                out.push_unique(MixedProfile::from_parts_unchecked(vec![v; n]));
            }
        }
    }
    Ok(out)
}

/// Barycentric lattice points with denominator `res` on the `(dim-1)`-simplex.
pub(crate) fn lattice_points(dim: usize, res: usize, prefix: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    let used: f64 = prefix.iter().sum();
    if prefix.len() == dim - 1 {
        let mut p = prefix.clone();
        p.push((1.0 - used).max(0.0));
        out.push(p);
        return;
    }
    let remaining = ((1.0 - used) * res as f64).round() as usize;
    for a in 0..=remaining {
        prefix.push(a as f64 / res as f64);
        lattice_points(dim, res, prefix, out);
        prefix.pop();
    }
}
