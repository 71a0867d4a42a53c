use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sequil_core::geometry::{max_area_bound, SetAnalyzer};
use sequil_core::io::{read_observations, write_observations};
use sequil_core::models::{
    eps_fixed_point_residual, eps_model_curve, level_k_mixture, logit_fixed_point_residual, logit_qre_curve,
    logit_response, poisson_weights, restricted_vertices, RestrictedKind,
};
use sequil_core::potential::{is_root, is_s_choice_point, potential_value, ROOT_TOL};
use sequil_core::stats::{ks_d, mps, permutation_test, wilcoxon_signed_rank, Observation};
use sequil_core::svg::{from_cartesian, to_cartesian};
use sequil_core::{Game, MixedProfile};

fn game3() -> impl Strategy<Value = Game> {
    prop::collection::vec(0u8..=150, 9)
        .prop_map(|v| Game::symmetric("p", 2, 3, v.into_iter().map(f64::from).collect(), None).unwrap())
}

fn simplex3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 3).prop_filter_map("nonzero", |mut v| {
        let s: f64 = v.iter().sum();
        if s < 1e-6 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= s);
        Some(v)
    })
}

fn sym(v: &[f64]) -> MixedProfile {
    MixedProfile::symmetric(v, 2).unwrap()
}

fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_is_nonpositive_and_matches_oracle(g in game3(), v in simplex3(), eps in 0.01f64..=1.0) {
        let p = sym(&v);
        let y = potential_value(&g, &p, eps);
        prop_assert!(y <= 1e-12);
        prop_assert_eq!(is_root(y, ROOT_TOL), is_s_choice_point(&g, &p, eps, ROOT_TOL));
    }

    #[test]
    fn s_points_nest_in_eps(g in game3(), v in simplex3(), e1 in 0.01f64..=1.0, e2 in 0.01f64..=1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let p = sym(&v);
        if is_s_choice_point(&g, &p, lo, ROOT_TOL) {
            prop_assert!(is_s_choice_point(&g, &p, hi, ROOT_TOL));
        }
    }

    #[test]
    fn logit_response_ignores_payoff_shifts(pi in prop::collection::vec(-50.0f64..50.0, 3), c in -100.0f64..100.0, l in 0.0f64..5.0) {
        let a = logit_response(&pi, l);
        let shifted: Vec<f64> = pi.iter().map(|x| x + c).collect();
        let b = logit_response(&shifted, l);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_weights_sum_to_one(tau in 0.0f64..10.0) {
        let w = poisson_weights(tau, 5);
        prop_assert!(w.len() >= 6);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn level_k_mixture_is_a_distribution(g in game3(), tau in 0.0f64..8.0) {
        let (p, _) = level_k_mixture(&g, tau, 20).unwrap();
        let v = p.player(0);
        prop_assert!(v.iter().all(|&x| x >= 0.0));
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn barycentric_map_round_trips(v in simplex3()) {
        let (x, y) = to_cartesian(&v);
        let back = from_cartesian(x, y);
        for (a, b) in v.iter().zip(back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_matches_brute_force(a in prop::collection::vec(0u8..20, 1..15), b in prop::collection::vec(0u8..20, 1..15)) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let d = ks_d(&a, &b).unwrap();
        prop_assert!((d - brute_ks(&a, &b)).abs() < 1e-12);
        prop_assert!((d - ks_d(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_ranks_add_up(pairs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 3..30)) {
        let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let Ok(w) = wilcoxon_signed_rank(&a, &b) {
            let n = w.n as f64;
            prop_assert!((w.w_plus + w.w_minus - n * (n + 1.0) / 2.0).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&w.p_value));
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec((0u32..40, 0usize..3, prop::option::of(simplex3())), 1..20)) {
        let data: Vec<Observation> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (round, choice, belief))| Observation {
                game_id: "g1".into(),
                session: format!("s{}", i % 3),
                subject: format!("{}", i % 5),
                round: round + 1,
                role: 0,
                choice,
                belief,
            })
            .collect();
        // belief columns are all-or-nothing per file; keep them only if every row has one
        let all = data.iter().all(|o| o.belief.is_some());
        let data: Vec<Observation> = data
            .into_iter()
            .map(|mut o| {
                if !all {
                    o.belief = None;
                }
                o
            })
            .collect();
        let mut buf = Vec::new();
        write_observations(&data, &mut buf).unwrap();
        let back = read_observations(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), data.len());
        for (x, y) in back.iter().zip(&data) {
            prop_assert_eq!(&x.session, &y.session);
            prop_assert_eq!(x.choice, y.choice);
            prop_assert_eq!(x.round, y.round);
            match (&x.belief, &y.belief) {
                (Some(p), Some(q)) => prop_assert!(p.iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-12)),
                (None, None) => {}
                _ => prop_assert!(false, "belief lost"),
            }
        }
    }

    #[test]
    fn restricted_vertices_are_members(eps in 0.01f64..=1.0) {
        for kind in [RestrictedKind::Perfect, RestrictedKind::Proper] {
            let poly = restricted_vertices(3, eps, kind).unwrap();
            for v in &poly.vertices {
                prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(poly.contains(v, 1e-12));
            }
            let c = vec![1.0 / 3.0; 3];
            prop_assert!(poly.contains(&c, 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn logit_curves_solve_the_fixed_point(g in game3(), lmax in 0.01f64..0.5) {
        let c = logit_qre_curve(&g, lmax, 12).unwrap();
        for s in &c.samples {
            prop_assert!(logit_fixed_point_residual(&g, &s.profile, s.param) <= 1e-10);
        }
    }

    #[test]
    fn eps_proper_orders_like_payoffs(g in game3()) {
        let c = eps_model_curve(&g, RestrictedKind::Proper, 10).unwrap();
        for s in &c.samples {
            let r = eps_fixed_point_residual(&g, RestrictedKind::Proper, &s.profile, s.param).unwrap();
            prop_assert!(r <= 1e-8, "residual {}", r);
            let pi = g.payoffs_against(0, &s.profile);
            let v = s.profile.player(0);
            for j in 0..3 {
                for k in 0..3 {
                    if pi[j] > pi[k] + 1e-9 {
                        prop_assert!(v[j] >= v[k] - 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn mps_is_bounded_and_area_obeys_bound(g in game3(), eps in 0.05f64..=1.0, pts in prop::collection::vec(simplex3(), 1..30)) {
        let a = SetAnalyzer::new(&g, sequil_core::geometry::AnalysisMode::Symmetric, 40).unwrap();
        let regions = a.choice_sets(eps).unwrap();
        let points: Vec<MixedProfile> = pts.iter().map(|v| sym(v)).collect();
        let r = mps(&points, &regions, eps);
        prop_assert!((0.0..=1.0).contains(&r.hit_rate));
        prop_assert!((0.0..=1.0).contains(&r.area_size));
        prop_assert!((r.mps - (r.hit_rate - r.area_size)).abs() < 1e-15);
        prop_assert!(max_area_bound(3, eps) <= 1.0 / 3.0 + 1e-15);
    }
}

#[test]
fn permutation_p_values_are_roughly_uniform_under_the_null() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut small = 0;
    let trials = 200;
    for _ in 0..trials {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
            (0..20)
                .map(|_| {
                    let x: f64 = rng.gen();
                    vec![x, 1.0 - x]
                })
                .collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let t = permutation_test(&a, &b, 199, &mut rng);
        assert!(t.p_value > 0.0 && t.p_value <= 1.0);
        if t.p_value <= 0.05 {
            small += 1;
        }
    }
    // 5% expected; allow generous sampling noise
    assert!(small <= 2 * trials / 10, "{small} of {trials} below 0.05");
}
