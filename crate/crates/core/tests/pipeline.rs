use std::path::PathBuf;

use sequil_core::geometry::{AnalysisMode, SetAnalyzer};
use sequil_core::io::{
    bundled_game, export_curve, import_curve, import_regions, load_game, load_observations, save_game,
    save_observations, export_regions, verify_bundled_checksums,
};
use sequil_core::models::{logit_qre_curve, ModelKind};
use sequil_core::simulate::{simulate_sessions, AgentModel, AgentSpec, Protocol};
use sequil_core::stats::{
    belief_diagnostics, epsilon_by_mps, fit_scalar_model, out_of_sample, BeliefOptions, FitOptions, HitUnit,
};
use sequil_core::svg::{render_square, render_ternary, Marker, MarkerShape, PlotSpec, MARKER_COLOR};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("SEQUIL_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "{name} differs from the golden file");
}

#[test]
fn bundled_fixtures_are_intact() {
    verify_bundled_checksums().unwrap();
}

#[test]
fn simulate_save_load_fit() {
    let dir = tempfile::tempdir().unwrap();
    let g = bundled_game("g4").unwrap();
    let path = dir.path().join("g4.toml");
    save_game(&g, &path).unwrap();
    assert_eq!(load_game(&path).unwrap(), g);

    let agents = vec![AgentSpec::new(AgentModel::LevelK(1.0)); 8];
    let data = simulate_sessions(&g, &agents, 7, Protocol::PerfectStranger, 5, 6).unwrap();
    assert_eq!(data.len(), 8 * 7 * 6);
    let csv = dir.path().join("obs.csv");
    save_observations(&data, &csv).unwrap();
    let back = load_observations(&csv).unwrap();
    assert_eq!(back.len(), data.len());

    let fit = fit_scalar_model(&[&g], &back, ModelKind::LevelK, &FitOptions::default()).unwrap();
    assert!(fit.param > 0.3 && fit.param < 3.0, "{}", fit.param);
    assert_eq!(fit.dof, 6 * 2);

    let (best, sweep) = epsilon_by_mps(&g, &back, HitUnit::Subject, 10, Some(60)).unwrap();
    assert_eq!(sweep.len(), 10);
    assert!(sweep.iter().all(|r| r.mps <= best.mps + 1e-12));

    let report = belief_diagnostics(&g, &back, &BeliefOptions { resamples: 200, ..BeliefOptions::default() }).unwrap();
    assert_eq!(report.n_beliefs, back.len());
}

#[test]
fn out_of_sample_runs_over_subsets() {
    let games: Vec<_> = ["g1", "g2", "g4"].iter().map(|id| bundled_game(id).unwrap()).collect();
    let mut data = Vec::new();
    for (i, g) in games.iter().enumerate() {
        let agents = vec![AgentSpec::new(AgentModel::Logit(0.05)); 6];
        data.extend(simulate_sessions(g, &agents, 5, Protocol::PerfectStranger, 10 + i as u64, 2).unwrap());
    }
    let refs: Vec<_> = games.iter().collect();
    let oos = out_of_sample(&refs, &data, ModelKind::Logit, 2, &FitOptions::default()).unwrap();
    assert_eq!(oos.combinations, 3);
    assert_eq!(oos.per_combination.len(), 3);
}

#[test]
fn region_and_curve_documents_round_trip() {
    let g = bundled_game("g2").unwrap();
    let a = SetAnalyzer::with_defaults(&g).unwrap();
    let regions = a.choice_sets(0.4).unwrap();
    let text = export_regions(g.id(), Some(0.4), &regions).unwrap();
    let doc = import_regions(&text).unwrap();
    assert_eq!(doc.regions, regions);

    let c = logit_qre_curve(&g, 1.0, 10).unwrap();
    assert_eq!(import_curve(&export_curve(&c).unwrap()).unwrap(), c);
}

#[test]
fn chain_store_square_plot_is_stable() {
    let g = bundled_game("chain_store").unwrap();
    let a = SetAnalyzer::new(&g, AnalysisMode::Product, 60).unwrap();
    let regions = a.choice_sets(1.0 / 3.0).unwrap();
    let mut spec = PlotSpec::square();
    spec.labels = vec!["P(N)".into(), "P(F)".into()];
    spec.add_regions(&regions).unwrap();
    golden("chain_store_third.svg", &render_square(&spec).unwrap());
}

#[test]
fn g3_ternary_plot_is_stable() {
    let g = bundled_game("g3").unwrap();
    let a = SetAnalyzer::new(&g, AnalysisMode::Symmetric, 30).unwrap();
    let regions: Vec<_> = a.choice_sets(1.0).unwrap().into_iter().filter(|r| !r.is_thin()).collect();
    let mut spec = PlotSpec::ternary();
    spec.title = Some("g3, eps = 1".into());
    spec.add_regions(&regions).unwrap();
    spec.markers.push(Marker {
        shape: MarkerShape::Star,
        color: MARKER_COLOR.into(),
        point: vec![1.0 / 3.0; 3],
    });
    golden("g3_one.svg", &render_ternary(&spec).unwrap());
}
