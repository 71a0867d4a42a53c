//! Membership in the rank-monotone set: the closure of the profiles whose
//! choice probabilities are ordered exactly like their expected payoffs.
//! That set is the union of all regular quantal response equilibria.
//!
//! A profile on the boundary of the strict set is a member iff some feasible
//! direction moves it into the strict set. To first order this is a small
//! linear program in the direction `d` and a margin `t`, maximised over `t`.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};

use crate::game::{Game, MixedProfile, TIE_TOL};
use crate::geometry::AnalysisMode;
use crate::numeric;

/// Default tolerance for ties in choice probabilities.
pub const PROB_TIE_TOL: f64 = 1e-9;

struct Block {
    /// Offset of this player's own direction variables.
    own: usize,
    sigma: Vec<f64>,
    pi: Vec<f64>,
    /// `grad[j]` = gradient of `π_j` with respect to all direction variables.
    grad: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, PartialEq)]
enum Rel {
    Gt,
    Lt,
    Eq,
}

struct PairConstraint {
    /// Coefficients over direction variables for `d_j - d_k`.
    own: Vec<f64>,
    /// Coefficients for the directional derivative of `π_j - π_k`.
    payoff: Vec<f64>,
    kind: PairKind,
}

enum PairKind {
    /// Only the choice order must open up, in direction `sign`.
    Choice(f64),
    /// Only the payoff order must open up, in direction `sign`.
    Payoff(f64),
    /// Both tied: choose a common order.
    Both,
}

fn sign(x: f64, tol: f64) -> i8 {
    if x > tol {
        1
    } else if x < -tol {
        -1
    } else {
        0
    }
}

fn blocks(game: &Game, sigma: &MixedProfile, mode: AnalysisMode) -> (usize, Vec<Block>) {
    match mode {
        AnalysisMode::Symmetric => {
            let v = sigma.player(0);
            let k = v.len();
            let f = |x: &[f64]| game.payoffs_shared(0, x).0;
            let jac = numeric::jacobian(&f, v, 1e-6);
            let grad = (0..k).map(|j| (0..k).map(|m| jac[(j, m)]).collect()).collect();
            (
                k,
                vec![Block {
                    own: 0,
                    sigma: v.to_vec(),
                    pi: f(v),
                    grad,
                }],
            )
        }
        AnalysisMode::Product => {
            let k0 = game.k(0);
            let k1 = game.k(1);
            let n = k0 + k1;
            let mut out = Vec::new();
            for i in 0..2 {
                let opp = 1 - i;
                let opp_off = if opp == 0 { 0 } else { k0 };
                let ki = game.k(i);
                let mut grad = vec![vec![0.0; n]; ki];
                // π_i is linear in the opponent's mix
                for m in 0..game.k(opp) {
                    let col = game.payoffs_shared(i, &numeric::unit(game.k(opp), m));
                    for j in 0..ki {
                        grad[j][opp_off + m] = col[j];
                    }
                }
                out.push(Block {
                    own: if i == 0 { 0 } else { k0 },
                    sigma: sigma.player(i).to_vec(),
                    pi: game.payoffs_against(i, sigma).0,
                    grad,
                });
            }
            (n, out)
        }
    }
}

/// Whether `sigma` lies in the rank-monotone set. `tol` is the tie tolerance
/// for choice probabilities; payoff ties use [`TIE_TOL`].
pub fn monotone_set_membership(game: &Game, sigma: &MixedProfile, mode: AnalysisMode, tol: f64) -> bool {
    let (n_vars, blocks) = blocks(game, sigma, mode);
    let mut pairs = Vec::new();
    for b in &blocks {
        let k = b.sigma.len();
        for j in 0..k {
            for l in j + 1..k {
                let s_sigma = sign(b.sigma[j] - b.sigma[l], tol);
                let s_pi = sign(b.pi[j] - b.pi[l], TIE_TOL);
                if s_sigma * s_pi == -1 {
                    return false;
                }
                if s_sigma != 0 && s_pi != 0 {
                    continue;
                }
                let payoff: Vec<f64> = (0..n_vars).map(|m| b.grad[j][m] - b.grad[l][m]).collect();
                // a payoff tie that no direction can break (clones) leaves the order free
                let persistent = payoff.iter().all(|g| g.abs() <= 1e-9);
                let mut own = vec![0.0; n_vars];
                own[b.own + j] = 1.0;
                own[b.own + l] = -1.0;
                let kind = match (s_sigma, s_pi) {
                    (0, 0) if persistent => continue,
                    (0, 0) => PairKind::Both,
                    (0, s) => PairKind::Choice(f64::from(s)),
                    (_, 0) if persistent => continue,
                    (s, _) => PairKind::Payoff(f64::from(s)),
                };
                pairs.push(PairConstraint { own, payoff, kind });
            }
        }
    }
    if pairs.is_empty() {
        return true;
    }
    let branching: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| matches!(p.kind, PairKind::Both))
        .map(|(i, _)| i)
        .collect();
    let combos = 3usize.pow(branching.len() as u32);
    (0..combos).any(|mut code| {
        let mut rel = vec![Rel::Eq; pairs.len()];
        for &i in &branching {
            rel[i] = [Rel::Gt, Rel::Lt, Rel::Eq][code % 3];
            code /= 3;
        }
        best_margin(n_vars, &blocks, &pairs, &rel) > 1e-9
    })
}

fn best_margin(n_vars: usize, blocks: &[Block], pairs: &[PairConstraint], rel: &[Rel]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let d: Vec<_> = (0..n_vars).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let t = lp.add_var(1.0, (-1.0, 1.0));
    let expr = |coef: &[f64], with_t: f64| {
        let mut e = LinearExpr::empty();
        for (m, &c) in coef.iter().enumerate() {
            if c != 0.0 {
                e.add(d[m], c);
            }
        }
        if with_t != 0.0 {
            e.add(t, with_t);
        }
        e
    };
    for b in blocks {
        let k = b.sigma.len();
        let mut sum = vec![0.0; n_vars];
        sum[b.own..b.own + k].iter_mut().for_each(|c| *c = 1.0);
        lp.add_constraint(expr(&sum, 0.0), ComparisonOp::Eq, 0.0);
        for (j, &p) in b.sigma.iter().enumerate() {
            if p <= PROB_TIE_TOL {
                let mut unit = vec![0.0; n_vars];
                unit[b.own + j] = 1.0;
                lp.add_constraint(expr(&unit, 0.0), ComparisonOp::Ge, 0.0);
            }
        }
    }
    // s·(a·d) ≥ t  <=>  s·(a·d) - t ≥ 0
    let open = |lp: &mut Problem, coef: &[f64], s: f64| {
        let scaled: Vec<f64> = coef.iter().map(|c| c * s).collect();
        lp.add_constraint(expr(&scaled, -1.0), ComparisonOp::Ge, 0.0);
    };
    for (p, &r) in pairs.iter().zip(rel) {
        match p.kind {
            PairKind::Choice(s) => open(&mut lp, &p.own, s),
            PairKind::Payoff(s) => open(&mut lp, &normalized(&p.payoff), s),
            PairKind::Both => match r {
                Rel::Gt | Rel::Lt => {
                    let s = if r == Rel::Gt { 1.0 } else { -1.0 };
                    open(&mut lp, &p.own, s);
                    open(&mut lp, &normalized(&p.payoff), s);
                }
                Rel::Eq => {
                    lp.add_constraint(expr(&p.own, 0.0), ComparisonOp::Eq, 0.0);
                    lp.add_constraint(expr(&normalized(&p.payoff), 0.0), ComparisonOp::Eq, 0.0);
                }
            },
        }
    }
    match lp.solve() {
        Ok(outcome) => outcome.solution().map_or(f64::NEG_INFINITY, |s| s.objective()),
        Err(_) => f64::NEG_INFINITY,
    }
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let scale = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / scale).collect()
    }
}
