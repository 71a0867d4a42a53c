//! Pointwise S(ε) tests: the ε-support, the nonpositive potential whose
//! roots are the choice sets, and a direct inequality oracle that shares no
//! code with the potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{best_reply_set, Game, MixedProfile, StrategySet, TIE_TOL};
use crate::numeric;

/// Default tolerance for treating the potential as zero.
pub const ROOT_TOL: f64 = 1e-9;

/// Slack in the ε-support cut so that rounding noise in computed points
/// (e.g. a solver landing on the centroid) does not change supports.
pub const SUPPORT_TOL: f64 = 1e-12;

/// A validated ε in `(0, 1]`. `ε = 1` is the argmax-support limit.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 && eps <= 1.0 {
            Ok(Epsilon(eps))
        } else {
            Err(Error::validation(format!("epsilon must lie in (0, 1], got {eps}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - k/steps` for `k = 0..steps`, i.e. `steps` values from 1 downwards.
    pub fn descending_grid(steps: usize) -> Vec<Epsilon> {
        (0..steps)
            .map(|k| Epsilon(1.0 - k as f64 / steps as f64))
            .collect()
    }

    /// `0.1, 0.2, ..., 1.0`.
    pub fn tenths() -> Vec<Epsilon> {
        (1..=10).map(|k| Epsilon(k as f64 / 10.0)).collect()
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Epsilon::new(v)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

/// Per-player ε-supports.
pub type SupportPattern = Vec<StrategySet>;

/// `{l : σ_l ≥ ε · max σ}`.
pub fn supp_eps(sigma: &[f64], eps: f64) -> StrategySet {
    let cut = eps * numeric::max_value(sigma) - SUPPORT_TOL;
    StrategySet::from_indices(
        sigma
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= cut)
            .map(|(l, _)| l),
    )
}

/// One player's contribution: min of `π` over the ε-support minus max of `π`.
pub fn potential_term(pi: &[f64], sigma: &[f64], eps: f64) -> f64 {
    let support = supp_eps(sigma, eps);
    let worst = support
        .iter()
        .map(|l| pi[l])
        .fold(f64::INFINITY, f64::min);
    worst - numeric::max_value(pi)
}

/// Per-player terms of the potential, using positivity-shifted payoffs.
pub fn potential_terms(game: &Game, sigma: &MixedProfile, eps: f64) -> Vec<f64> {
    let shift = game.positivity_shift();
    (0..game.n_players())
        .map(|i| {
            let pi: Vec<f64> = game.payoffs_against(i, sigma).iter().map(|p| p + shift).collect();
            potential_term(&pi, sigma.player(i), eps)
        })
        .collect()
}

/// `Y_ε(σ)`; zero exactly on the S(ε) choice sets.
pub fn potential_value(game: &Game, sigma: &MixedProfile, eps: f64) -> f64 {
    potential_terms(game, sigma, eps).iter().sum()
}

pub fn is_root(y: f64, tol: f64) -> bool {
    y >= -tol
}

/// Direct check of one player's condition: every strategy whose payoff is
/// below the best by more than `tol` is played with probability strictly
/// below `ε` times the modal probability (up to [`SUPPORT_TOL`]).
pub fn player_condition_holds(pi: &[f64], sigma: &[f64], eps: f64, tol: f64) -> bool {
    let best_payoff = pi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let modal = sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for j in 0..pi.len() {
        if pi[j] < best_payoff - tol && sigma[j] >= eps * modal - SUPPORT_TOL {
            return false;
        }
    }
    true
}

/// Oracle for S(ε) choice-point membership, independent of the potential.
pub fn is_s_choice_point(game: &Game, sigma: &MixedProfile, eps: f64, tol: f64) -> bool {
    (0..game.n_players()).all(|i| {
        let pi = game.payoffs_against(i, sigma);
        player_condition_holds(&pi, sigma.player(i), eps, tol)
    })
}

/// The per-player color (best-option set) if every ε-supported strategy is
/// payoff-maximal and vice versa; `None` otherwise.
pub fn color_of(game: &Game, sigma: &MixedProfile, eps: f64) -> Option<Vec<StrategySet>> {
    (0..game.n_players())
        .map(|i| {
            let pi = game.payoffs_against(i, sigma);
            let best = best_reply_set(&pi, TIE_TOL);
            (supp_eps(sigma.player(i), eps) == best).then_some(best)
        })
        .collect()
}

/// Suboptimality pattern: each player's best-reply set at `σ`.
pub fn best_reply_pattern(game: &Game, sigma: &MixedProfile) -> Vec<StrategySet> {
    (0..game.n_players())
        .map(|i| best_reply_set(&game.payoffs_against(i, sigma), TIE_TOL))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_store() -> Game {
        Game::bimatrix(
            "chain_store",
            &[vec![2., 2.], vec![0., 3.]],
            &[vec![2., 2.], vec![0., 1.]],
        )
        .unwrap()
    }

    // p = P(incumbent fights), q = P(entrant stays out)
    fn square(p: f64, q: f64) -> MixedProfile {
        MixedProfile::new(vec![vec![q, 1. - q], vec![p, 1. - p]]).unwrap()
    }

    #[test]
    fn eps_support_examples() {
        assert_eq!(supp_eps(&[0.6, 0.3, 0.1], 0.5), StrategySet::from_indices([0, 1]));
        assert_eq!(supp_eps(&[1., 0., 0.], 0.01), StrategySet::singleton(0));
        assert_eq!(supp_eps(&[1. / 3.; 3], 1.0), StrategySet::full(3));
    }

    #[test]
    fn chain_store_points() {
        let g = chain_store();
        let eps = 1. / 3.;
        assert!(is_root(potential_value(&g, &square(0.1, 0.1), eps), ROOT_TOL));
        assert!(potential_value(&g, &square(0.3, 0.1), eps) < -1e-3);
        assert!(is_s_choice_point(&g, &square(0.2, 0.2), eps, TIE_TOL));
        assert!(!is_s_choice_point(&g, &square(0.2, 0.5), eps, TIE_TOL));
        // incumbent A, entrant E
        assert_eq!(
            color_of(&g, &square(0.1, 0.1), eps),
            Some(vec![StrategySet::singleton(1), StrategySet::singleton(1)])
        );
        // on p = 1/3 the entrant is indifferent but does not randomize evenly
        let on_line = square(1. / 3., 0.2);
        assert!(is_s_choice_point(&g, &on_line, 2. / 3., TIE_TOL));
        assert_eq!(color_of(&g, &on_line, 2. / 3.), None);
    }

    #[test]
    fn nash_profiles_are_roots_for_every_eps() {
        let g = chain_store();
        for eq in crate::game::support_enumeration_nash(&g, false).unwrap().equilibria {
            for eps in [0.01, 0.3, 0.7, 1.0] {
                assert!(is_s_choice_point(&g, &eq, eps, TIE_TOL));
                assert!(is_root(potential_value(&g, &eq, eps), ROOT_TOL));
            }
        }
    }

    #[test]
    fn dominant_strategy_excludes_uniform() {
        let g = Game::symmetric("dom", 2, 3, vec![5., 5., 5., 1., 1., 1., 0., 0., 0.], None).unwrap();
        let u = MixedProfile::centroid(&[3, 3]);
        assert!(!is_s_choice_point(&g, &u, 0.1, TIE_TOL));
        assert!(potential_value(&g, &u, 0.1) < 0.0);
    }

    #[test]
    fn matching_pennies_uniform_is_colorable_with_full_color() {
        let g = Game::bimatrix(
            "mp",
            &[vec![1., -1.], vec![-1., 1.]],
            &[vec![-1., 1.], vec![1., -1.]],
        )
        .unwrap();
        let u = MixedProfile::centroid(&[2, 2]);
        assert_eq!(color_of(&g, &u, 0.5), Some(vec![StrategySet::full(2); 2]));
    }

    #[test]
    fn epsilon_domain() {
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(1.5).is_err());
        assert!(Epsilon::new(1.0).is_ok());
        let grid = Epsilon::descending_grid(4);
        assert_eq!(grid.iter().map(|e| e.value()).collect::<Vec<_>>(), vec![1.0, 0.75, 0.5, 0.25]);
    }
}
