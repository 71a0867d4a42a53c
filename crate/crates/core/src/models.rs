//! The four one-parameter rivals: logit QRE, Poisson level-k, and the
//! ε-perfect and ε-proper restricted-game models.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{best_reply_set, Game, MixedProfile, StrategySet, TIE_TOL};
use crate::geometry::AnalysisMode;
use crate::numeric;

/// Target residual for every fixed point on a curve.
pub const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// The set-valued S(ε) prediction; no curve.
    S,
    Logit,
    LevelK,
    EpsPerfect,
    EpsProper,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::S => "s",
            ModelKind::Logit => "logit",
            ModelKind::LevelK => "levelk",
            ModelKind::EpsPerfect => "eps-perfect",
            ModelKind::EpsProper => "eps-proper",
        }
    }

    pub fn restricted(self) -> Option<RestrictedKind> {
        match self {
            ModelKind::EpsPerfect => Some(RestrictedKind::Perfect),
            ModelKind::EpsProper => Some(RestrictedKind::Proper),
            _ => None,
        }
    }

    pub fn all() -> [ModelKind; 5] {
        [
            ModelKind::S,
            ModelKind::EpsPerfect,
            ModelKind::EpsProper,
            ModelKind::Logit,
            ModelKind::LevelK,
        ]
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::all()
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::validation(format!("unknown model '{s}' (s, eps-perfect, eps-proper, logit, levelk)")))
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub param: f64,
    pub profile: MixedProfile,
    pub residual: f64,
}

/// A parameter-indexed sequence of predicted profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelCurve {
    pub model: ModelKind,
    pub game_id: String,
    pub samples: Vec<CurveSample>,
}

impl ModelCurve {
    /// Index of the sample whose parameter is closest to `param`.
    pub fn nearest(&self, param: f64) -> Option<&CurveSample> {
        self.samples
            .iter()
            .min_by(|a, b| (a.param - param).abs().total_cmp(&(b.param - param).abs()))
    }
}

/// Unknowns of a model fixed point: one shared vector for symmetric games,
/// one vector per player otherwise.
fn blocks_for(game: &Game) -> Vec<usize> {
    if game.is_symmetric() {
        vec![game.k(0)]
    } else {
        game.strategy_counts().to_vec()
    }
}

fn expand(game: &Game, blocks: &[Vec<f64>]) -> MixedProfile {
    if blocks.len() == 1 && game.n_players() > 1 {
        MixedProfile::from_parts_unchecked(vec![blocks[0].clone(); game.n_players()])
    } else {
        MixedProfile::from_parts_unchecked(blocks.to_vec())
    }
}

/// Expected payoffs of each block's player against the others.
fn block_payoffs(game: &Game, blocks: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if blocks.len() == 1 {
        vec![game.payoffs_shared(0, &blocks[0]).0]
    } else {
        let prof = MixedProfile::from_parts_unchecked(blocks.to_vec());
        (0..blocks.len())
            .map(|i| game.payoffs_against(i, &prof).0)
            .collect()
    }
}

// ---------------------------------------------------------------- logit

/// `σ_k = exp(λ π_k) / Σ exp(λ π_l)`, computed with the maximum subtracted.
pub fn logit_response(pi: &[f64], lambda: f64) -> Vec<f64> {
    let m = numeric::max_value(pi);
    let mut w: Vec<f64> = pi.iter().map(|p| (lambda * (p - m)).exp()).collect();
    numeric::normalize(&mut w);
    w
}

fn logit_residual(game: &Game, blocks: &[Vec<f64>], lambda: f64) -> f64 {
    block_payoffs(game, blocks)
        .iter()
        .zip(blocks)
        .map(|(pi, s)| numeric::max_abs_diff(s, &logit_response(pi, lambda)))
        .fold(0.0, f64::max)
}

fn split_reduced(sizes: &[usize], x: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &k in sizes {
        let mut v = x[at..at + k - 1].to_vec();
        v.push(1.0 - v.iter().sum::<f64>());
        out.push(v);
        at += k - 1;
    }
    out
}

fn reduce(blocks: &[Vec<f64>]) -> Vec<f64> {
    blocks
        .iter()
        .flat_map(|b| b[..b.len() - 1].iter().copied())
        .collect()
}

/// Newton's method on `σ - L(λ π(σ)) = 0` in reduced coordinates.
fn logit_newton(game: &Game, start: &[Vec<f64>], lambda: f64) -> Option<Vec<Vec<f64>>> {
    let sizes: Vec<usize> = start.iter().map(Vec::len).collect();
    let f = |x: &[f64]| -> Vec<f64> {
        let blocks = split_reduced(&sizes, x);
        let pis = block_payoffs(game, &blocks);
        blocks
            .iter()
            .zip(&pis)
            .flat_map(|(s, pi)| {
                let l = logit_response(pi, lambda);
                (0..s.len() - 1).map(move |k| s[k] - l[k]).collect::<Vec<_>>()
            })
            .collect()
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut x = reduce(start);
    let mut r = f(&x);
    for _ in 0..60 {
        if logit_residual(game, &split_reduced(&sizes, &x), lambda) <= 1e-13 {
            break;
        }
        let jac = numeric::jacobian(&f, &x, 1e-7);
        let step = jac.lu().solve(&DVector::from_column_slice(&r))?;
        let mut alpha = 1.0;
        let current = norm(&r);
        loop {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - alpha * s).collect();
            let feasible = split_reduced(&sizes, &trial)
                .iter()
                .all(|b| b.iter().all(|&p| p > 0.0));
            if feasible {
                let rt = f(&trial);
                if norm(&rt) < current || alpha < 1e-3 {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-6 {
                return None;
            }
        }
    }
    let blocks = split_reduced(&sizes, &x);
    (logit_residual(game, &blocks, lambda) <= FIXED_POINT_TOL).then_some(blocks)
}

fn logit_damped(game: &Game, start: &[Vec<f64>], lambda: f64) -> Option<Vec<Vec<f64>>> {
    let mut s = start.to_vec();
    let mut alpha = 0.5;
    let mut last = logit_residual(game, &s, lambda);
    for _ in 0..20_000 {
        let pis = block_payoffs(game, &s);
        let next: Vec<Vec<f64>> = s
            .iter()
            .zip(&pis)
            .map(|(b, pi)| {
                let l = logit_response(pi, lambda);
                b.iter().zip(&l).map(|(x, y)| (1.0 - alpha) * x + alpha * y).collect()
            })
            .collect();
        let res = logit_residual(game, &next, lambda);
        if res > last {
            alpha = (alpha * 0.5).max(1e-3);
        }
        s = next;
        last = res;
        if res <= 1e-6 {
            return logit_newton(game, &s, lambda);
        }
    }
    None
}

/// One logit QRE at `lambda`, found from the warm start `start` (one vector
/// per unknown block; see [`logit_qre_curve`]).
pub fn logit_qre_at(game: &Game, lambda: f64, start: &MixedProfile) -> Result<MixedProfile> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::validation(format!("lambda must be >= 0, got {lambda}")));
    }
    let sizes = blocks_for(game);
    let start: Vec<Vec<f64>> = start.players()[..sizes.len()].to_vec();
    let blocks = logit_newton(game, &start, lambda)
        .or_else(|| logit_damped(game, &start, lambda))
        .ok_or_else(|| Error::numerical(format!("logit QRE did not converge at lambda={lambda}")))?;
    Ok(expand(game, &blocks))
}

/// The λ values sampled by [`logit_qre_curve`]: 0, then a geometric grid
/// from `lambda_max / 1000` to `lambda_max`.
pub fn lambda_grid(lambda_max: f64, steps: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    if steps <= 1 || lambda_max <= 0.0 {
        return out;
    }
    let lo = lambda_max * 1e-3;
    let n = steps - 1;
    for i in 0..n {
        let t = if n == 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
        out.push(lo * (lambda_max / lo).powf(t));
    }
    out
}

/// The principal logit QRE branch, traced from the centroid by
/// pseudo-arclength continuation in `(σ, ln(1 + λ))` so that folds, where
/// the branch turns back in λ, are passed. Each grid value of λ is sampled
/// the first time the branch reaches it. Symmetric games follow the
/// symmetric branch.
pub fn logit_qre_curve(game: &Game, lambda_max: f64, steps: usize) -> Result<ModelCurve> {
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::validation(format!("lambda_max must be >= 0, got {lambda_max}")));
    }
    let sizes = blocks_for(game);
    let centroid: Vec<Vec<f64>> = sizes.iter().map(|&k| numeric::uniform(k)).collect();
    let grid = lambda_grid(lambda_max, steps);
    let mut samples = vec![CurveSample {
        param: 0.0,
        residual: logit_residual(game, &centroid, 0.0),
        profile: expand(game, &centroid),
    }];
    let targets = &grid[1..];
    let found = trace_logit(game, &sizes, targets).ok_or_else(|| {
        Error::numerical(format!("logit continuation failed for {}", game.id()))
    })?;
    for (lambda, blocks) in targets.iter().zip(found) {
        samples.push(CurveSample {
            param: *lambda,
            residual: logit_residual(game, &blocks, *lambda),
            profile: expand(game, &blocks),
        });
    }
    Ok(ModelCurve {
        model: ModelKind::Logit,
        game_id: game.id().to_string(),
        samples,
    })
}

/// Follows `H(x, ν) = x - L(λ π(x)) = 0`, `λ = e^ν - 1`, from the centroid
/// and returns the first solution on the path at each target λ (ascending).
fn trace_logit(game: &Game, sizes: &[usize], targets: &[f64]) -> Option<Vec<Vec<Vec<f64>>>> {
    if targets.is_empty() {
        return Some(Vec::new());
    }
    let n: usize = sizes.iter().map(|k| k - 1).sum();
    let h_map = |y: &[f64]| -> Vec<f64> {
        let lambda = y[n].exp_m1();
        let blocks = split_reduced(sizes, &y[..n]);
        let pis = block_payoffs(game, &blocks);
        blocks
            .iter()
            .zip(&pis)
            .flat_map(|(b, pi)| {
                let l = logit_response(pi, lambda);
                (0..b.len() - 1).map(move |k| b[k] - l[k]).collect::<Vec<_>>()
            })
            .collect()
    };
    let feasible = |y: &[f64]| split_reduced(sizes, &y[..n]).iter().all(|b| b.iter().all(|&p| p >= 0.0));
    let inf = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // unit tangent: null vector of the Jacobian, oriented along `prev`
    let tangent = |y: &[f64], prev: &DVector<f64>| -> Option<DVector<f64>> {
        let jac = numeric::jacobian(&h_map, y, 1e-7);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n + 1)).copy_from(&jac);
        a.set_row(n, &prev.transpose());
        let mut rhs = DVector::zeros(n + 1);
        rhs[n] = 1.0;
        let t = a.lu().solve(&rhs)?;
        let norm = t.norm();
        (norm.is_finite() && norm > 0.0).then(|| t / norm)
    };

    let nu_targets: Vec<f64> = targets.iter().map(|l| l.ln_1p()).collect();
    let mut out: Vec<Vec<Vec<f64>>> = Vec::with_capacity(targets.len());
    let mut y: Vec<f64> = sizes
        .iter()
        .flat_map(|&k| std::iter::repeat_n(1.0 / k as f64, k - 1))
        .chain(std::iter::once(0.0))
        .collect();
    let mut t = {
        let mut e = DVector::zeros(n + 1);
        e[n] = 1.0;
        tangent(&y, &e)?
    };
    let mut h = (nu_targets[nu_targets.len() - 1] / 50.0).clamp(1e-4, 0.1);
    let h_max = 0.25;
    for _ in 0..200_000 {
        if out.len() == targets.len() {
            return Some(out);
        }
        // predictor, then Newton on H = 0 within the hyperplane ⟂ t
        let pred: Vec<f64> = y.iter().zip(t.iter()).map(|(a, b)| a + h * b).collect();
        let mut z = pred.clone();
        let mut ok = false;
        for _ in 0..12 {
            let r = h_map(&z);
            let plane: f64 = z.iter().zip(&pred).zip(t.iter()).map(|((a, b), c)| (a - b) * c).sum();
            if inf(&r) <= 1e-12 && plane.abs() <= 1e-12 {
                ok = true;
                break;
            }
            let jac = numeric::jacobian(&h_map, &z, 1e-7);
            let mut a = DMatrix::zeros(n + 1, n + 1);
            a.view_mut((0, 0), (n, n + 1)).copy_from(&jac);
            a.set_row(n, &t.transpose());
            let mut rhs = DVector::from_column_slice(&r).push(plane);
            rhs.neg_mut();
            let Some(d) = a.lu().solve(&rhs) else { break };
            z.iter_mut().zip(d.iter()).for_each(|(a, b)| *a += b);
            if !feasible(&z) || !z.iter().all(|v| v.is_finite()) {
                break;
            }
        }
        let dist: f64 = z.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let new_t = if ok && dist <= 2.0 * h { tangent(&z, &t) } else { None };
        let Some(new_t) = new_t.filter(|nt| nt.dot(&t) > 0.5) else {
            h *= 0.5;
            if h < 1e-12 {
                return None;
            }
            continue;
        };
        // record targets passed for the first time
        let (nu_a, nu_b) = (y[n], z[n]);
        // targets are ascending and every earlier one lies below the path's running maximum
        while out.len() < targets.len() && nu_targets[out.len()] <= nu_b {
            let i = out.len();
            let w = ((nu_targets[i] - nu_a) / (nu_b - nu_a)).clamp(0.0, 1.0);
            let guess: Vec<f64> = y[..n].iter().zip(&z[..n]).map(|(a, b)| a + w * (b - a)).collect();
            let guess = split_reduced(sizes, &guess);
            let sol = logit_newton(game, &guess, targets[i]).or_else(|| logit_damped(game, &guess, targets[i]))?;
            out.push(sol);
        }
        y = z;
        t = new_t;
        h = (h * 1.5).min(h_max);
    }
    None
}

// ------------------------------------------------------------- level-k

/// Level profiles `a_0 .. a_{k_max}`; `a_0` is uniform and `a_k` is uniform
/// over the best replies to `a_{k-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub levels: Vec<MixedProfile>,
    /// `(start, period)` with `a_{start + period} = a_start`, if seen.
    pub cycle: Option<(usize, usize)>,
}

impl LevelProfile {
    pub fn k_max(&self) -> usize {
        self.levels.len() - 1
    }
}

pub fn level_hierarchy(game: &Game, k_max: usize) -> LevelProfile {
    let sizes = blocks_for(game);
    let mut levels: Vec<Vec<Vec<f64>>> = vec![sizes.iter().map(|&k| numeric::uniform(k)).collect()];
    let mut cycle = None;
    for k in 1..=k_max {
        let prev = &levels[k - 1];
        let next: Vec<Vec<f64>> = block_payoffs(game, prev)
            .iter()
            .map(|pi| uniform_on(best_reply_set(pi, TIE_TOL), pi.len()))
            .collect();
        if cycle.is_none() {
            if let Some(start) = levels.iter().position(|l| *l == next) {
                cycle = Some((start, k - start));
            }
        }
        levels.push(next);
    }
    LevelProfile {
        levels: levels.iter().map(|l| expand(game, l)).collect(),
        cycle,
    }
}

fn uniform_on(set: StrategySet, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    let w = 1.0 / set.len() as f64;
    for j in set.iter() {
        v[j] = w;
    }
    v
}

/// Poisson weights `p_0 .. p_{k}` with `k >= k_min`, extended until the
/// neglected tail is below `1e-12`.
pub fn poisson_weights(tau: f64, k_min: usize) -> Vec<f64> {
    let mut w = vec![(-tau).exp()];
    let mut total = w[0];
    let mut k = 0;
    while k < k_min || (1.0 - total > 1e-12 && k < 10_000) {
        k += 1;
        let next = w[k - 1] * tau / k as f64;
        w.push(next);
        total += next;
    }
    w
}

/// Poisson level-k prediction. Returns the mixture and the truncation used.
pub fn level_k_mixture(game: &Game, tau: f64, k_max: usize) -> Result<(MixedProfile, usize)> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::validation(format!("tau must be >= 0, got {tau}")));
    }
    let weights = poisson_weights(tau, k_max.max(2));
    let hierarchy = level_hierarchy(game, weights.len() - 1);
    let total: f64 = weights.iter().sum();
    let mut mix: Vec<Vec<f64>> = hierarchy.levels[0]
        .players()
        .iter()
        .map(|p| vec![0.0; p.len()])
        .collect();
    for (w, level) in weights.iter().zip(&hierarchy.levels) {
        for (m, p) in mix.iter_mut().zip(level.players()) {
            for (a, b) in m.iter_mut().zip(p) {
                *a += w / total * b;
            }
        }
    }
    Ok((MixedProfile::from_parts_unchecked(mix), weights.len() - 1))
}

pub fn level_k_curve(game: &Game, tau_max: f64, steps: usize) -> Result<ModelCurve> {
    let steps = steps.max(2);
    let samples = (0..steps)
        .map(|i| {
            let tau = tau_max * i as f64 / (steps - 1) as f64;
            let (profile, _) = level_k_mixture(game, tau, 20)?;
            Ok(CurveSample {
                param: tau,
                profile,
                residual: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelCurve {
        model: ModelKind::LevelK,
        game_id: game.id().to_string(),
        samples,
    })
}

// ------------------------------------------------- restricted polytopes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RestrictedKind {
    Perfect,
    Proper,
}

/// Vertices of the interior simplex (perfect) or permutohedron (proper).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSimplex {
    pub kind: RestrictedKind,
    pub k: usize,
    pub eps: f64,
    pub vertices: Vec<Vec<f64>>,
}

impl RestrictedSimplex {
    /// The weight vector whose permutations are the vertices.
    pub fn base(kind: RestrictedKind, k: usize, eps: f64) -> Vec<f64> {
        match kind {
            RestrictedKind::Perfect => {
                let s = 1.0 + (k - 1) as f64 * eps;
                std::iter::once(1.0 / s)
                    .chain(std::iter::repeat_n(eps / s, k - 1))
                    .collect()
            }
            RestrictedKind::Proper => {
                let mut v: Vec<f64> = (0..k).map(|j| eps.powi(j as i32)).collect();
                numeric::normalize(&mut v);
                v
            }
        }
    }

    /// Whether `v` lies in the polytope (up to `tol`).
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let mut base = Self::base(self.kind, self.k, self.eps);
        base.sort_by(f64::total_cmp);
        match self.kind {
            RestrictedKind::Perfect => v.iter().all(|&x| x >= base[0] - tol),
            RestrictedKind::Proper => {
                // majorization: every j-subset carries at least the j smallest weights
                let mut sorted = v.to_vec();
                sorted.sort_by(f64::total_cmp);
                let mut a = 0.0;
                let mut b = 0.0;
                for j in 0..self.k {
                    a += sorted[j];
                    b += base[j];
                    if a < b - tol {
                        return false;
                    }
                }
                true
            }
        }
    }
}

pub fn restricted_vertices(k: usize, eps: f64, kind: RestrictedKind) -> Result<RestrictedSimplex> {
    if k < 2 {
        return Err(Error::validation("restricted polytopes need at least two strategies"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::validation(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let base = RestrictedSimplex::base(kind, k, eps);
    let vertices = match kind {
        RestrictedKind::Perfect => (0..k)
            .map(|top| {
                let mut v = vec![base[1]; k];
                v[top] = base[0];
                v
            })
            .collect(),
        RestrictedKind::Proper => {
            if k > 5 {
                return Err(Error::Unsupported(format!(
                    "permutohedron with {k}! vertices; at most 5 strategies"
                )));
            }
            // vertex for each ranking: rank r gets base[r]
            (0..k)
                .permutations(k)
                .map(|order| {
                    let mut v = vec![0.0; k];
                    for (rank, &j) in order.iter().enumerate() {
                        v[j] = base[rank];
                    }
                    v
                })
                .collect()
        }
    };
    Ok(RestrictedSimplex {
        kind,
        k,
        eps,
        vertices,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn best_vertices(poly: &RestrictedSimplex, pi: &[f64]) -> Vec<usize> {
    let values: Vec<f64> = poly.vertices.iter().map(|v| dot(v, pi)).collect();
    let m = numeric::max_value(&values);
    let scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
    values
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= m - TIE_TOL * scale)
        .map(|(i, _)| i)
        .collect()
}

/// The face of the restricted polytope that maximizes expected payoff
/// against `against`, returned as its vertex list.
pub fn better_reply(game: &Game, who: usize, against: &MixedProfile, restricted: &RestrictedSimplex) -> Vec<Vec<f64>> {
    let pi = game.payoffs_against(who, against);
    best_vertices(restricted, &pi)
        .into_iter()
        .map(|i| restricted.vertices[i].clone())
        .collect()
}

/// Barycenter of a face given by its vertices.
pub fn face_barycenter(face: &[Vec<f64>]) -> Vec<f64> {
    let k = face[0].len();
    let mut c = vec![0.0; k];
    for v in face {
        for (a, b) in c.iter_mut().zip(v) {
            *a += b / face.len() as f64;
        }
    }
    c
}

/// How far each block is from a better reply: the largest gap between the
/// best vertex value and the block's own value, relative to the payoff
/// scale.
fn eps_residual(game: &Game, polys: &[RestrictedSimplex], blocks: &[Vec<f64>]) -> f64 {
    let pis = block_payoffs(game, blocks);
    pis.iter()
        .zip(blocks)
        .zip(polys)
        .map(|((pi, s), poly)| {
            let best = poly
                .vertices
                .iter()
                .map(|v| dot(v, pi))
                .fold(f64::NEG_INFINITY, f64::max);
            let scale = pi.iter().fold(1.0f64, |a, p| a.max(p.abs()));
            ((best - dot(s, pi)) / scale).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Candidate faces of one polytope: vertices, vertex pairs and (for three
/// strategies) the whole polygon.
fn faces(poly: &RestrictedSimplex) -> Vec<Vec<usize>> {
    let n = poly.vertices.len();
    let mut out: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    out.extend((0..n).tuple_combinations().map(|(a, b)| vec![a, b]));
    if poly.k == 3 && n > 2 {
        out.push((0..n).collect());
    }
    out
}

fn face_dim(poly: &RestrictedSimplex, face: &[usize]) -> usize {
    match face.len() {
        1 => 0,
        2 => 1,
        _ => poly.k - 1,
    }
}

/// Point of a face from its local coordinates: vertex, segment parameter,
/// or (for the whole polygon) the first `K-1` probabilities.
fn face_point(poly: &RestrictedSimplex, face: &[usize], x: &[f64]) -> Vec<f64> {
    match face.len() {
        1 => poly.vertices[face[0]].clone(),
        2 => {
            let (a, b) = (&poly.vertices[face[0]], &poly.vertices[face[1]]);
            a.iter().zip(b).map(|(p, q)| x[0] * p + (1.0 - x[0]) * q).collect()
        }
        _ => {
            let mut v = x.to_vec();
            v.push(1.0 - x.iter().sum::<f64>());
            v
        }
    }
}

/// Tie equations that make every vertex of the face equally good.
/// `scale` must not depend on the point, so the equations stay polynomial.
fn face_ties(poly: &RestrictedSimplex, face: &[usize], pi: &[f64], scale: f64) -> Vec<f64> {
    match face.len() {
        1 => Vec::new(),
        2 => vec![(dot(&poly.vertices[face[0]], pi) - dot(&poly.vertices[face[1]], pi)) / scale],
        _ => (1..pi.len()).map(|j| (pi[0] - pi[j]) / scale).collect(),
    }
}

fn eps_fixed_points(game: &Game, kind: RestrictedKind, eps: f64) -> Result<Vec<Vec<Vec<f64>>>> {
    let sizes = blocks_for(game);
    if sizes.iter().any(|&k| k > 3) {
        return Err(Error::Unsupported(
            "restricted-game fixed points are enumerated for at most 3 strategies".into(),
        ));
    }
    let polys: Vec<RestrictedSimplex> = sizes
        .iter()
        .map(|&k| restricted_vertices(k, eps, kind))
        .collect::<Result<_>>()?;
    let face_lists: Vec<Vec<Vec<usize>>> = polys.iter().map(faces).collect();
    let scale = payoff_scale(game);
    let mut found: Vec<Vec<Vec<f64>>> = Vec::new();
    for combo in face_lists.iter().map(|f| f.iter()).multi_cartesian_product() {
        let dims: Vec<usize> = combo.iter().zip(&polys).map(|(f, p)| face_dim(p, f)).collect();
        // square systems only: each face's ties are equations in the others' unknowns
        if sizes.len() > 1 && dims.iter().any(|&d| d != dims[0]) {
            continue;
        }
        let n_unknowns: usize = dims.iter().sum();
        let build = |x: &[f64]| -> Vec<Vec<f64>> {
            let mut at = 0;
            combo
                .iter()
                .zip(&polys)
                .zip(&dims)
                .map(|((f, p), &d)| {
                    let v = face_point(p, f, &x[at..at + d]);
                    at += d;
                    v
                })
                .collect()
        };
        let equations = |x: &[f64]| -> Vec<f64> {
            let blocks = build(x);
            let pis = block_payoffs(game, &blocks);
            combo
                .iter()
                .zip(&polys)
                .zip(&pis)
                .flat_map(|((f, p), pi)| face_ties(p, f, pi, scale))
                .collect()
        };
        let mut solutions: Vec<Vec<f64>> = Vec::new();
        if n_unknowns == 0 {
            solutions.push(Vec::new());
        } else if n_unknowns == 1 {
            let (a, b, c) = numeric::quadratic_through(|s| equations(&[s])[0]);
            solutions.extend(
                numeric::real_roots_quadratic(a, b, c)
                    .into_iter()
                    .filter(|s| (-1e-12..=1.0 + 1e-12).contains(s))
                    .map(|s| vec![s.clamp(0.0, 1.0)]),
            );
        } else {
            let starts = local_starts(&combo, &polys, &dims);
            for s in starts {
                if let Some(x) = numeric::gauss_newton(equations, &s, 1e-14, 60) {
                    solutions.push(x);
                }
            }
        }
        for x in solutions {
            let blocks = build(&x);
            let inside = blocks.iter().zip(&polys).all(|(b, p)| p.contains(b, 1e-12));
            if inside && eps_residual(game, &polys, &blocks) <= FIXED_POINT_TOL
                && !found.iter().any(|f| blocks_close(f, &blocks, 1e-9)) {
                    found.push(blocks);
                }
        }
    }
    Ok(found)
}

fn payoff_scale(game: &Game) -> f64 {
    (0..game.n_players())
        .flat_map(|i| game.payoff_tensor(i).iter())
        .fold(1.0f64, |a, p| a.max(p.abs()))
}

fn local_starts(combo: &[&Vec<usize>], polys: &[RestrictedSimplex], dims: &[usize]) -> Vec<Vec<f64>> {
    // local coordinates of a few interior points of each face
    let per_block: Vec<Vec<Vec<f64>>> = combo
        .iter()
        .zip(polys)
        .zip(dims)
        .map(|((f, p), &d)| match d {
            0 => vec![Vec::new()],
            1 => vec![vec![0.5], vec![0.2], vec![0.8]],
            _ => {
                let c = face_barycenter(&f.iter().map(|&i| p.vertices[i].clone()).collect::<Vec<_>>());
                let mut pts = vec![c[..d].to_vec()];
                for &i in f.iter() {
                    let v = &p.vertices[i];
                    pts.push((0..d).map(|j| 0.5 * (c[j] + v[j])).collect());
                }
                pts
            }
        })
        .collect();
    per_block
        .iter()
        .map(|v| v.iter())
        .multi_cartesian_product()
        .map(|parts| parts.into_iter().flatten().copied().collect())
        .collect()
}

fn blocks_close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| numeric::max_abs_diff(x, y) <= tol)
}

/// All fixed points `σ ∈ BR^ε(σ)` at one ε (symmetric ones for symmetric
/// games).
pub fn eps_equilibria(game: &Game, kind: RestrictedKind, eps: f64) -> Result<Vec<MixedProfile>> {
    Ok(eps_fixed_points(game, kind, eps)?
        .iter()
        .map(|b| expand(game, b))
        .collect())
}

/// The fixed point at `eps` nearest to `near`.
pub fn eps_fixed_point_near(game: &Game, kind: RestrictedKind, eps: f64, near: &MixedProfile) -> Result<CurveSample> {
    let sizes = blocks_for(game);
    let target: Vec<Vec<f64>> = near.players()[..sizes.len()].to_vec();
    let polys: Vec<RestrictedSimplex> = sizes
        .iter()
        .map(|&k| restricted_vertices(k, eps, kind))
        .collect::<Result<_>>()?;
    let best = eps_fixed_points(game, kind, eps)?
        .into_iter()
        .min_by(|a, b| {
            let da = dist(a, &target);
            let db = dist(b, &target);
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::numerical(format!("no restricted-game equilibrium found at eps={eps}")))?;
    Ok(CurveSample {
        param: eps,
        residual: eps_residual(game, &polys, &best),
        profile: expand(game, &best),
    })
}

fn dist(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Fixed points traced from `ε = 1` (the centroid) down along
/// `ε = 1 - i/steps`, each chosen nearest to the previous sample.
pub fn eps_model_curve(game: &Game, kind: RestrictedKind, steps: usize) -> Result<ModelCurve> {
    let steps = steps.max(1);
    let mut prev = MixedProfile::centroid(game.strategy_counts());
    let mut samples = Vec::with_capacity(steps);
    for i in 0..steps {
        let eps = 1.0 - i as f64 / steps as f64;
        let sample = eps_fixed_point_near(game, kind, eps, &prev).map_err(|e| {
            Error::numerical(format!("{e} (last good eps={})", samples.last().map_or(1.0, |s: &CurveSample| s.param)))
        })?;
        prev = sample.profile.clone();
        samples.push(sample);
    }
    Ok(ModelCurve {
        model: match kind {
            RestrictedKind::Perfect => ModelKind::EpsPerfect,
            RestrictedKind::Proper => ModelKind::EpsProper,
        },
        game_id: game.id().to_string(),
        samples,
    })
}

/// Residual of a logit sample recomputed from scratch.
pub fn logit_fixed_point_residual(game: &Game, profile: &MixedProfile, lambda: f64) -> f64 {
    let n = blocks_for(game).len();
    logit_residual(game, &profile.players()[..n], lambda)
}

/// Residual of an ε-model sample recomputed from scratch.
pub fn eps_fixed_point_residual(game: &Game, kind: RestrictedKind, profile: &MixedProfile, eps: f64) -> Result<f64> {
    let sizes = blocks_for(game);
    let polys: Vec<RestrictedSimplex> = sizes
        .iter()
        .map(|&k| restricted_vertices(k, eps, kind))
        .collect::<Result<_>>()?;
    let blocks = &profile.players()[..sizes.len()];
    if !blocks.iter().zip(&polys).all(|(b, p)| p.contains(b, 1e-12)) {
        return Ok(f64::INFINITY);
    }
    Ok(eps_residual(game, &polys, blocks))
}

/// Symmetric or product layout implied by the game, for callers that need
/// to agree with the model's unknowns.
pub fn model_mode(game: &Game) -> AnalysisMode {
    if game.is_symmetric() {
        AnalysisMode::Symmetric
    } else {
        AnalysisMode::Product
    }
}
