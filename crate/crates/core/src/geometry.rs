//! S(ε) choice and belief sets assembled from the pointwise tests.
//!
//! Two layouts are supported. In symmetric mode every player uses the same
//! mixed strategy, so the analysis lives on one simplex. In product mode (two
//! players) the domain is `Δ₁ × Δ₂`; since player 1's constraint only
//! involves `σ₁` and `π₁(σ₂)`, each set with best-reply pattern `(A₁, A₂)`
//! factorizes as
//!
//! ```text
//! X = {σ₁ : argmax π₂(σ₁) = A₂, supp_ε(σ₁) ⊆ A₁}
//! Z = {σ₂ : argmax π₁(σ₂) = A₁, supp_ε(σ₂) ⊆ A₂}
//! ```
//!
//! and its connected components are products of components of `X` and `Z`.
//! Lower-dimensional pieces that fall between lattice cell centers are
//! recovered from payoff-tie points on the lattice lines.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{best_reply_set, Game, MixedProfile, StrategySet, TIE_TOL};
use crate::grid::SimplexGrid;
use crate::numeric;
use crate::potential::{supp_eps, Epsilon};

pub const DEFAULT_SYMMETRIC_RESOLUTION: usize = 200;
pub const DEFAULT_PRODUCT_RESOLUTION: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisMode {
    Symmetric,
    Product,
}

impl AnalysisMode {
    /// Symmetric games use the shared simplex; other two-player games use
    /// the product of both simplices.
    pub fn default_for(game: &Game) -> Result<Self> {
        if game.is_symmetric() {
            Ok(AnalysisMode::Symmetric)
        } else if game.n_players() == 2 {
            Ok(AnalysisMode::Product)
        } else {
            Err(Error::Unsupported(
                "asymmetric games with three players have no set geometry".into(),
            ))
        }
    }

    pub fn default_resolution(self) -> usize {
        match self {
            AnalysisMode::Symmetric => DEFAULT_SYMMETRIC_RESOLUTION,
            AnalysisMode::Product => DEFAULT_PRODUCT_RESOLUTION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Choice,
    Belief,
}

/// One factor of a region: lattice cells plus off-lattice points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorPiece {
    pub k: usize,
    pub resolution: usize,
    /// Sorted cell indices of the factor grid.
    pub cells: Vec<u32>,
    /// Members that no lattice cell represents (tie curves, isolated points).
    pub points: Vec<Vec<f64>>,
    pub dimension: usize,
    pub interior_cells: usize,
    pub colorable: bool,
}

impl FactorPiece {
    pub fn grid(&self) -> SimplexGrid {
        SimplexGrid::new(self.k, self.resolution).expect("piece built from a valid grid")
    }

    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.grid().cell_measure()
    }

    fn has_cell(&self, c: usize) -> bool {
        self.cells.binary_search(&(c as u32)).is_ok()
    }

    /// Membership at grid resolution. With `closure`, a face neighbour of
    /// the containing cell also counts, as do points within two cells of a
    /// thin member.
    pub fn contains(&self, v: &[f64], closure: bool) -> bool {
        let grid = self.grid();
        let c = grid.locate(v);
        if self.has_cell(c) {
            return true;
        }
        if closure && grid.neighbors(c).into_iter().any(|n| self.has_cell(n)) {
            return true;
        }
        let radius = if closure { 2.0 } else { 1.0 } / self.resolution as f64;
        self.points
            .iter()
            .any(|p| euclid(p, v) <= radius)
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A connected S(ε) choice set, or the belief set of a best-reply pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub game_id: String,
    /// Absent for belief sets, which do not depend on ε.
    pub epsilon: Option<f64>,
    pub kind: RegionKind,
    pub mode: AnalysisMode,
    /// Each player's best-reply set on the region.
    pub pattern: Vec<StrategySet>,
    pub color: Option<Vec<StrategySet>>,
    pub measure: f64,
    pub dimension: usize,
    pub full_dimensional: bool,
    pub robust: bool,
    pub colorable: bool,
    pub factors: Vec<FactorPiece>,
}

impl Region {
    /// The probability vectors the factors are indexed by.
    pub fn factor_points<'a>(&self, point: &'a MixedProfile) -> Vec<&'a [f64]> {
        match self.mode {
            AnalysisMode::Symmetric => vec![point.player(0)],
            AnalysisMode::Product => vec![point.player(0), point.player(1)],
        }
    }

    pub fn contains(&self, point: &MixedProfile, closure: bool) -> bool {
        self.factors
            .iter()
            .zip(self.factor_points(point))
            .all(|(f, v)| f.contains(v, closure))
    }

    /// Flattened domain-lattice indices covered by the region's cells.
    pub fn domain_cells(&self) -> Vec<usize> {
        match self.factors.as_slice() {
            [f] => f.cells.iter().map(|&c| c as usize).collect(),
            [f0, f1] => {
                let n1 = f1.grid().n_cells();
                let mut out = Vec::with_capacity(f0.cells.len() * f1.cells.len());
                for &x in &f0.cells {
                    for &z in &f1.cells {
                        out.push(x as usize * n1 + z as usize);
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    pub fn is_thin(&self) -> bool {
        self.measure == 0.0
    }
}

/// A choice set paired with the belief set sharing its best-reply pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SEquilibrium {
    pub epsilon: f64,
    pub choice: Region,
    pub belief: Region,
}

impl SEquilibrium {
    /// Whether some belief in the belief set is interior, i.e. puts positive
    /// weight on every strategy. Patterns that only a degenerate belief
    /// supports (weakly dominated choices made optimal by certainty) fail.
    pub fn has_interior_belief(&self) -> bool {
        self.belief.factors.iter().all(|f| {
            !f.cells.is_empty() || f.points.iter().any(|p| p.iter().all(|&x| x > crate::potential::SUPPORT_TOL))
        })
    }
}

#[derive(Clone, Copy, Debug)]
enum Source {
    /// Every opponent plays the factor's point (symmetric mode).
    Shared,
    /// The factor's point is the strategy of `who`'s only opponent.
    Against(usize),
}

#[derive(Clone, Debug)]
struct Candidate {
    point: Vec<f64>,
    best: StrategySet,
}

#[derive(Clone, Debug)]
struct Factor {
    grid: SimplexGrid,
    centers: Vec<Vec<f64>>,
    best: Vec<StrategySet>,
    neighbors: Vec<Vec<u32>>,
    candidates: Vec<Candidate>,
}

impl Factor {
    fn new(game: &Game, source: Source, grid: SimplexGrid) -> Factor {
        let len = match source {
            Source::Shared => game.k(0),
            Source::Against(who) => game.k(who),
        };
        let payoff = |v: &[f64]| {
            let mut out = vec![0.0; len];
            match source {
                Source::Shared => game.payoffs_shared_into(0, v, &mut out),
                Source::Against(who) => game.payoffs_shared_into(who, v, &mut out),
            }
            out
        };
        let centers = grid.centers();
        // A center can sit exactly on a tie curve that crosses its cell. Such
        // a cell takes the pattern found just beside the center, and the
        // center itself joins the tie candidates. Ties that survive every
        // nudge (clones) are kept.
        let mut on_ties = Vec::new();
        let best = centers
            .iter()
            .enumerate()
            .map(|(c, center)| {
                let b = best_reply_set(&payoff(center), TIE_TOL);
                if b.len() < 2 {
                    return b;
                }
                for corner in grid.corners(c) {
                    let nudged: Vec<f64> = center
                        .iter()
                        .zip(&corner)
                        .map(|(x, y)| x + 1e-7 * (y - x))
                        .collect();
                    let nb = best_reply_set(&payoff(&nudged), TIE_TOL);
                    if nb != b && nb.is_subset_of(b) {
                        on_ties.push(center.clone());
                        return nb;
                    }
                }
                b
            })
            .collect();
        let neighbors = (0..grid.n_cells())
            .map(|c| grid.neighbors(c).into_iter().map(|n| n as u32).collect())
            .collect();
        let candidates = tie_candidates(&grid, &payoff)
            .into_iter()
            .chain(on_ties)
            .filter_map(|point| {
                let best = best_reply_set(&payoff(&point), TIE_TOL);
                let vertex = point.contains(&1.0);
                (best.len() >= 2 || vertex).then_some(Candidate { point, best })
            })
            .collect();
        Factor {
            grid,
            centers,
            best,
            neighbors,
            candidates,
        }
    }

    fn realized_patterns(&self) -> BTreeSet<StrategySet> {
        self.best
            .iter()
            .copied()
            .chain(self.candidates.iter().map(|c| c.best))
            .collect()
    }

    /// Components of `{v : best(v) = pay, supp_ε(v) ⊆ supp}`; without a
    /// support target this is the plain belief set of `pay`.
    fn components(&self, eps: f64, pay: StrategySet, supp: Option<StrategySet>) -> Vec<FactorPiece> {
        let n = self.grid.n_cells();
        let admits = |v: &[f64], best: StrategySet| {
            best == pay && supp.is_none_or(|s| supp_eps(v, eps).is_subset_of(s))
        };
        let member: Vec<bool> = (0..n)
            .map(|c| admits(&self.centers[c], self.best[c]))
            .collect();
        let colorable_at = |v: &[f64]| supp.is_none_or(|s| supp_eps(v, eps) == s);

        let mut pieces = Vec::new();
        let mut seen = vec![false; n];
        for start in 0..n {
            if !member[start] || seen[start] {
                continue;
            }
            let mut cells = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(c) = stack.pop() {
                cells.push(c as u32);
                for &nb in &self.neighbors[c] {
                    let nb = nb as usize;
                    if member[nb] && !seen[nb] {
                        seen[nb] = true;
                        stack.push(nb);
                    }
                }
            }
            cells.sort_unstable();
            let interior: Vec<u32> = cells
                .iter()
                .copied()
                .filter(|&c| {
                    self.neighbors[c as usize].iter().all(|&x| member[x as usize])
                })
                .collect();
            let probe = if interior.is_empty() { &cells } else { &interior };
            let colorable = probe.iter().all(|&c| colorable_at(&self.centers[c as usize]));
            pieces.push(FactorPiece {
                k: self.grid.k(),
                resolution: self.grid.resolution(),
                dimension: if interior.is_empty() {
                    self.grid.dim().saturating_sub(1)
                } else {
                    self.grid.dim()
                },
                interior_cells: interior.len(),
                colorable,
                cells,
                points: Vec::new(),
            });
        }

        let covered = |v: &[f64]| {
            let c = self.grid.locate(v);
            member[c] || self.neighbors[c].iter().any(|&x| member[x as usize])
        };
        let thin: Vec<&Vec<f64>> = self
            .candidates
            .iter()
            .filter(|c| admits(&c.point, c.best) && !covered(&c.point))
            .map(|c| &c.point)
            .collect();
        let radius = 2.5 / self.grid.resolution() as f64;
        for cluster in cluster_points(&thin, radius) {
            let points: Vec<Vec<f64>> = cluster.iter().map(|&i| thin[i].clone()).collect();
            let colorable = points.iter().all(|p| colorable_at(p));
            pieces.push(FactorPiece {
                k: self.grid.k(),
                resolution: self.grid.resolution(),
                cells: Vec::new(),
                dimension: affine_rank(&points),
                interior_cells: 0,
                colorable,
                points,
            });
        }
        pieces
    }

    fn merged(&self, eps: f64, pay: StrategySet) -> Option<FactorPiece> {
        let pieces = self.components(eps, pay, None);
        let mut it = pieces.into_iter();
        let mut acc = it.next()?;
        for p in it {
            acc.cells.extend(p.cells);
            acc.points.extend(p.points);
            acc.dimension = acc.dimension.max(p.dimension);
            acc.interior_cells += p.interior_cells;
        }
        acc.cells.sort_unstable();
        Some(acc)
    }
}

/// Points on the lattice lines where two strategies tie, full-tie points and
/// the vertices.
fn tie_candidates<F>(grid: &SimplexGrid, payoff: &F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let k = grid.k();
    let m = grid.resolution();
    let mut out: Vec<Vec<f64>> = (0..k).map(|i| numeric::unit(k, i)).collect();
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|j| (j + 1..k).map(move |l| (j, l)))
        .collect();
    // roots of π_j - π_l along a segment s -> point(s), s in [0, 1]
    let mut along = |point: &dyn Fn(f64) -> Vec<f64>| {
        for &(j, l) in &pairs {
            let gap = |s: f64| {
                let pi = payoff(&point(s));
                pi[j] - pi[l]
            };
            let (a, b, c) = numeric::quadratic_through(gap);
            for s in numeric::real_roots_quadratic(a, b, c) {
                if (-1e-12..=1.0 + 1e-12).contains(&s) {
                    out.push(point(s.clamp(0.0, 1.0)));
                }
            }
        }
    };
    if k == 2 {
        along(&|s| vec![s, 1.0 - s]);
    } else {
        for c in 0..3 {
            let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
            for a in 0..m {
                let fixed = a as f64 / m as f64;
                let rest = 1.0 - fixed;
                along(&|s| {
                    let mut v = vec![0.0; 3];
                    v[c] = fixed;
                    v[c1] = rest * s;
                    v[c2] = rest * (1.0 - s);
                    v
                });
            }
        }
        // all three payoffs equal
        let mut starts = Vec::new();
        crate::game::lattice_points(3, 4, &mut Vec::new(), &mut starts);
        for start in starts {
            let residual = |x: &[f64]| {
                let pi = payoff(&[x[0], x[1], 1.0 - x[0] - x[1]]);
                let scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
                vec![(pi[0] - pi[1]) / scale, (pi[0] - pi[2]) / scale]
            };
            if let Some(x) = numeric::gauss_newton(residual, &start[..2], 1e-13, 40) {
                let v = [x[0], x[1], 1.0 - x[0] - x[1]];
                if v.iter().all(|&p| p >= -1e-12) {
                    let mut v: Vec<f64> = v.iter().map(|p| p.max(0.0)).collect();
                    numeric::normalize(&mut v);
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Single-linkage clusters of points within `radius` of each other.
fn cluster_points(points: &[&Vec<f64>], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if euclid(points[i], points[j]) <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Dimension of the affine hull of a point cloud (numerical rank).
fn affine_rank(points: &[Vec<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = points[0].len() - 1;
    let n = points.len();
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let m = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    m.singular_values()
        .iter()
        .filter(|&&s| s > 1e-7 * (n as f64).sqrt())
        .count()
}

/// Set-level analysis of one game on a fixed grid; ε-independent work is
/// done once so that sweeps over ε are cheap.
#[derive(Clone, Debug)]
pub struct SetAnalyzer<'g> {
    game: &'g Game,
    mode: AnalysisMode,
    factors: Vec<Factor>,
}

impl<'g> SetAnalyzer<'g> {
    pub fn new(game: &'g Game, mode: AnalysisMode, resolution: usize) -> Result<Self> {
        let factors = match mode {
            AnalysisMode::Symmetric => {
                if !game.is_symmetric() {
                    return Err(Error::validation(format!(
                        "game {} is not symmetric; use product mode",
                        game.id()
                    )));
                }
                vec![Factor::new(
                    game,
                    Source::Shared,
                    SimplexGrid::new(game.k(0), resolution)?,
                )]
            }
            AnalysisMode::Product => {
                if game.n_players() != 2 {
                    return Err(Error::Unsupported(
                        "product-mode geometry needs exactly two players".into(),
                    ));
                }
                vec![
                    Factor::new(game, Source::Against(1), SimplexGrid::new(game.k(0), resolution)?),
                    Factor::new(game, Source::Against(0), SimplexGrid::new(game.k(1), resolution)?),
                ]
            }
        };
        Ok(SetAnalyzer {
            game,
            mode,
            factors,
        })
    }

    /// Default mode and resolution for the game.
    pub fn with_defaults(game: &'g Game) -> Result<Self> {
        let mode = AnalysisMode::default_for(game)?;
        Self::new(game, mode, mode.default_resolution())
    }

    pub fn game(&self) -> &Game {
        self.game
    }

    pub fn mode(&self) -> AnalysisMode {
        self.mode
    }

    pub fn grids(&self) -> Vec<SimplexGrid> {
        self.factors.iter().map(|f| f.grid).collect()
    }

    pub fn domain_size(&self) -> usize {
        self.factors.iter().map(|f| f.grid.n_cells()).product()
    }

    /// Center of a flattened domain cell as a full profile.
    pub fn domain_center(&self, idx: usize) -> MixedProfile {
        let n = self.game.n_players();
        match self.factors.as_slice() {
            [f] => MixedProfile::from_parts_unchecked(vec![f.centers[idx].clone(); n]),
            [f0, f1] => {
                let n1 = f1.grid.n_cells();
                MixedProfile::from_parts_unchecked(vec![
                    f0.centers[idx / n1].clone(),
                    f1.centers[idx % n1].clone(),
                ])
            }
            _ => unreachable!("one or two factors"),
        }
    }

    /// The S(ε) choice sets, ordered by decreasing measure.
    pub fn choice_sets(&self, eps: f64) -> Result<Vec<Region>> {
        let eps = Epsilon::new(eps)?.value();
        let mut regions = Vec::new();
        match self.factors.as_slice() {
            [f] => {
                for a in f.realized_patterns() {
                    for piece in f.components(eps, a, Some(a)) {
                        regions.push(self.region(
                            Some(eps),
                            RegionKind::Choice,
                            vec![a; self.game.n_players()],
                            vec![piece],
                        ));
                    }
                }
            }
            [f0, f1] => {
                // f0 cells carry player 2's best replies, f1 cells player 1's
                for a1 in f1.realized_patterns() {
                    for a2 in f0.realized_patterns() {
                        let xs = f0.components(eps, a2, Some(a1));
                        if xs.is_empty() {
                            continue;
                        }
                        let zs = f1.components(eps, a1, Some(a2));
                        for x in &xs {
                            for z in &zs {
                                regions.push(self.region(
                                    Some(eps),
                                    RegionKind::Choice,
                                    vec![a1, a2],
                                    vec![x.clone(), z.clone()],
                                ));
                            }
                        }
                    }
                }
            }
            _ => unreachable!("one or two factors"),
        }
        finish(&mut regions, true);
        if regions.is_empty() {
            log::warn!(
                "no S({eps}) set found for {}; the grid is probably too coarse",
                self.game.id()
            );
        }
        Ok(regions)
    }

    /// Belief sets for the given best-reply patterns: every belief under
    /// which exactly those strategies are best.
    pub fn belief_sets(&self, patterns: &[Vec<StrategySet>]) -> Vec<Region> {
        let mut regions = Vec::new();
        let mut done = BTreeSet::new();
        for pattern in patterns {
            if !done.insert(pattern.clone()) {
                continue;
            }
            let pieces = match self.factors.as_slice() {
                [f] => f.merged(1.0, pattern[0]).map(|p| vec![p]),
                // factor 0 holds player 2's beliefs about player 1
                [f0, f1] => match (f0.merged(1.0, pattern[1]), f1.merged(1.0, pattern[0])) {
                    (Some(x), Some(z)) => Some(vec![x, z]),
                    _ => None,
                },
                _ => unreachable!("one or two factors"),
            };
            if let Some(pieces) = pieces {
                let mut r = self.region(None, RegionKind::Belief, pattern.clone(), pieces);
                r.color = Some(pattern.clone());
                r.colorable = true;
                regions.push(r);
            }
        }
        finish(&mut regions, false);
        regions
    }

    /// Choice sets paired with their belief sets.
    pub fn s_equilibria(&self, eps: f64) -> Result<Vec<SEquilibrium>> {
        let choices = self.choice_sets(eps)?;
        let patterns: Vec<Vec<StrategySet>> = choices.iter().map(|r| r.pattern.clone()).collect();
        let beliefs = self.belief_sets(&patterns);
        Ok(choices
            .into_iter()
            .filter_map(|c| {
                let b = beliefs.iter().find(|b| b.pattern == c.pattern)?.clone();
                Some(SEquilibrium {
                    epsilon: eps,
                    choice: c,
                    belief: b,
                })
            })
            .collect())
    }

    /// Membership of every domain cell in the union of the given regions.
    pub fn union_mask(&self, regions: &[Region]) -> Vec<bool> {
        let mut mask = vec![false; self.domain_size()];
        for r in regions {
            for c in r.domain_cells() {
                mask[c] = true;
            }
        }
        mask
    }

    fn region(
        &self,
        eps: Option<f64>,
        kind: RegionKind,
        pattern: Vec<StrategySet>,
        factors: Vec<FactorPiece>,
    ) -> Region {
        let measure = factors.iter().map(FactorPiece::measure).product();
        let dimension = factors.iter().map(|f| f.dimension).sum();
        let full_dim: usize = factors.iter().map(|f| f.grid().dim()).sum();
        let colorable = factors.iter().all(|f| f.colorable);
        Region {
            id: 0,
            game_id: self.game.id().to_string(),
            epsilon: eps,
            kind,
            mode: self.mode,
            color: colorable.then(|| pattern.clone()),
            pattern,
            measure,
            dimension,
            full_dimensional: dimension == full_dim,
            robust: false,
            colorable,
            factors,
        }
    }
}

fn finish(regions: &mut [Region], mark_robust: bool) {
    regions.sort_by(|a, b| {
        b.measure
            .total_cmp(&a.measure)
            .then(b.dimension.cmp(&a.dimension))
            .then(a.pattern.cmp(&b.pattern))
            .then_with(|| first_key(a).total_cmp(&first_key(b)))
    });
    let max_dim = regions.iter().map(|r| r.dimension).max().unwrap_or(0);
    for (i, r) in regions.iter_mut().enumerate() {
        r.id = i;
        if mark_robust {
            r.robust = r.dimension == max_dim;
        }
    }
}

fn first_key(r: &Region) -> f64 {
    r.factors
        .iter()
        .map(|f| {
            f.cells
                .first()
                .map(|&c| c as f64)
                .or_else(|| f.points.first().map(|p| -1.0 - p[0]))
                .unwrap_or(0.0)
        })
        .fold(0.0, |acc, v| acc * 1e6 + v)
}

/// S(ε) choice sets with the default mode for the game.
pub fn enumerate_s_choice_sets(game: &Game, eps: f64, resolution: usize) -> Result<Vec<Region>> {
    let mode = AnalysisMode::default_for(game)?;
    SetAnalyzer::new(game, mode, resolution)?.choice_sets(eps)
}

/// Belief sets for the colors of previously computed choice sets.
pub fn enumerate_s_belief_sets(
    game: &Game,
    patterns: &[Vec<StrategySet>],
    resolution: usize,
) -> Result<Vec<Region>> {
    let mode = AnalysisMode::default_for(game)?;
    Ok(SetAnalyzer::new(game, mode, resolution)?.belief_sets(patterns))
}

/// Largest relative measure of one player's projection of an S(ε) set:
/// `prod_{k=1}^{K-1} kε / (1 + kε)`.
pub fn max_area_bound(k: usize, eps: f64) -> f64 {
    (1..k)
        .map(|j| {
            let x = j as f64 * eps;
            x / (1.0 + x)
        })
        .product()
}

pub fn region_measure(region: &Region) -> f64 {
    region.measure
}

/// Relative measure of a union of regions with pairwise distinct patterns
/// (such regions never share a cell).
pub fn union_measure(regions: &[Region]) -> f64 {
    regions.iter().map(|r| r.measure).sum()
}

/// The first region containing the point at grid resolution.
pub fn hit_test(regions: &[Region], point: &MixedProfile) -> Option<usize> {
    regions
        .iter()
        .find(|r| r.contains(point, false))
        .map(|r| r.id)
}
