use std::path::Path;
use std::process::{Command, Output};

fn sequil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sequil"))
        .args(args)
        .env_remove("SEQUIL_THREADS")
        .output()
        .expect("run sequil")
}

fn ok(args: &[&str]) -> String {
    let out = sequil(args);
    assert!(
        out.status.success(),
        "sequil {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Data rows of an aligned table (header skipped, stops at the first blank line).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect()
}

#[test]
fn chain_store_has_one_set_of_a_sixteenth() {
    let out = ok(&["analyze", "chain_store", "--epsilon", "0.3333"]);
    let r = rows(&out);
    assert_eq!(r.len(), 1, "{out}");
    let measure: f64 = r[0][4].parse().unwrap();
    assert!((measure - 1.0 / 16.0).abs() < 2.0 / 60.0, "{measure}");
}

#[test]
fn analyze_writes_figure_and_regions() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("g3.svg");
    let json = dir.path().join("g3.json");
    let csv = dir.path().join("g3.csv");
    ok(&[
        "analyze", "g3", "--epsilon", "1", "--grid", "30", "--svg", p(&svg), "--json", p(&json), "--csv", p(&csv),
    ]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml") || text.starts_with("<svg"));
    let doc = std::fs::read_to_string(&json).unwrap();
    assert!(doc.contains("\"regions\""));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("set,kind,pattern"));
    // the three colored sets; the rest are thin tie sets
    let full = table.lines().filter(|l| l.contains(",2,true,true,true")).count();
    assert_eq!(full, 3, "{table}");
}

#[test]
fn logit_curve_of_g3_stays_at_the_centroid() {
    let out = ok(&["curve", "g3", "--model", "logit", "--steps", "8"]);
    let r = rows(&out);
    assert_eq!(r.len(), 8);
    for row in r {
        for x in &row[1..4] {
            assert_eq!(x, "0.333333");
        }
    }
}

#[test]
fn simulated_random_play_fits_lambda_near_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g1.csv");
    ok(&[
        "simulate", "g1", "--model", "logit", "--param", "0", "--seed", "1", "--sessions", "4", "--out", p(&data),
    ]);
    let out = ok(&["fit", p(&data), "--model", "logit"]);
    let r = rows(&out);
    let lambda: f64 = r[0][3].parse().unwrap();
    assert!(lambda < 0.02, "{out}");
}

#[test]
fn simulation_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["simulate", "G1", "--model", "levelk", "--param", "1.5", "--seed", "7", "--sessions", "3"];
    let a = ok(&args);
    let b = ok(&args);
    let mut with_threads = vec!["--threads", "1"];
    with_threads.extend(args);
    let c = ok(&with_threads);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.lines().count(), 1 + 3 * 9 * 15);
}

#[test]
fn data_pipeline_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let mut all = String::new();
    for (i, g) in ["g1", "g2", "g4"].iter().enumerate() {
        let seed = (i + 1).to_string();
        let text = ok(&["simulate", g, "--model", "logit", "--param", "0.05", "--seed", &seed, "--sessions", "2"]);
        if i == 0 {
            all.push_str(&text);
        } else {
            all.extend(text.lines().skip(1).map(|l| format!("{l}\n")));
        }
    }
    let data = dir.path().join("obs.csv");
    std::fs::write(&data, all).unwrap();
    let fits = dir.path().join("fits.csv");
    let out = ok(&["fit", p(&data), "--model", "logit", "--model", "levelk", "--csv", p(&fits)]);
    assert_eq!(rows(&out).len(), 3 * 2 + 2);
    let out = ok(&["compare", p(&fits)]);
    assert!(out.contains("# ks") && out.contains("# wilcoxon"), "{out}");
    let mps = ok(&["mps", p(&data), "--steps", "10"]);
    assert_eq!(rows(&mps).last().unwrap()[0], "pooled");
    let b = ok(&["beliefs", p(&data), "--resamples", "100"]);
    assert_eq!(rows(&b).len(), 3);
    let o = ok(&["oos", p(&data), "--model", "logit", "--k", "2"]);
    assert_eq!(rows(&o)[0][2], "3");
}

#[test]
fn analyses_are_deterministic() {
    let args = ["analyze", "g2", "--epsilon", "0.4", "--grid", "40", "--beliefs"];
    assert_eq!(ok(&args), ok(&args));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sequil.toml");
    std::fs::write(&cfg, "grid = 30\n").unwrap();
    let a = ok(&["--config", p(&cfg), "analyze", "g3", "--epsilon", "0.5"]);
    assert!(a.contains("grid 30"), "{a}");
    let b = ok(&["--config", p(&cfg), "analyze", "g3", "--epsilon", "0.5", "--grid", "40"]);
    assert!(b.contains("grid 40"), "{b}");
}

#[test]
fn validation_errors_exit_with_two() {
    let out = sequil(&["analyze", "nope", "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bundled game"));

    let out = sequil(&["analyze", "g1", "--epsilon", "1.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = sequil(&["simulate", "G1", "--model", "logit", "--param", "0.1", "--subjects", "8"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "game,session,subject,round,role,choice\nzz,1,1,1,0,0\n").unwrap();
    let out = sequil(&["fit", p(&data)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("'zz'"));

    let out = sequil(&["--threads", "0", "curve", "g1", "--model", "logit"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_covers_every_command() {
    let out = ok(&["--help"]);
    for c in ["analyze", "curve", "fit", "mps", "beliefs", "oos", "simulate", "compare", "--threads", "--config", "--csv"] {
        assert!(out.contains(c), "missing {c}");
    }
}
