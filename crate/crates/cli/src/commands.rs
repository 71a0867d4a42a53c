use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sequil_core::geometry::{union_measure, AnalysisMode, Region, SetAnalyzer};
use sequil_core::io::{
    bundled_games, export_curve, export_regions, load_game, load_observations, resolve_game, save_observations,
    validate_observations, write_observations,
};
use sequil_core::models::{eps_model_curve, level_k_curve, logit_qre_curve, ModelCurve, ModelKind};
use sequil_core::simulate::{s_interior_profile, simulate_sessions, AgentModel, AgentSpec, Protocol};
use sequil_core::stats::{
    belief_diagnostics, epsilon_by_mps, fit_scalar_model, hit_points, ks_d_weighted, out_of_sample,
    wilcoxon_signed_rank, BeliefOptions, FitOptions, FitResult, HitUnit, MpsResult, Observation,
};
use sequil_core::svg::{render_square, render_ternary, CurveLayer, Marker, MarkerShape, PlotSpec, MARKER_COLOR};
use sequil_core::{Error, Game, Result};

use crate::config::Config;
use crate::table::{emit, num, Table};
use crate::{Cli, Command, FitArgs, ModeArg};

/// Share of the target ε at which the S generator's off-modal strategies
/// are played, so the profile is inside S(ε) with some room.
const S_GENERATOR_RATIO: f64 = 0.9;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(cli.global.config.as_deref())?;
    if let Some(n) = cli.global.threads.or(cfg.threads) {
        if n == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    }
    let csv = cli.global.csv.as_deref();
    match cli.command {
        Command::Analyze {
            game,
            epsilon,
            grid,
            mode,
            beliefs,
            all,
            svg,
            json,
        } => analyze(&cfg, csv, &game, epsilon, grid, mode, beliefs, all, svg, json),
        Command::Curve {
            game,
            model,
            steps,
            max,
            json,
            svg,
        } => curve(&cfg, csv, &game, model, steps, max, json, svg),
        Command::Fit {
            data,
            games,
            model,
            fit: args,
        } => {
            let (data, games) = load_data(&cfg, &data, games.games.as_deref())?;
            fit(csv, &data, &games, &models_or_all(model), &fit_options(&cfg, &args))
        }
        Command::Mps {
            data,
            games,
            unit,
            steps,
            grid,
        } => {
            let (data, games) = load_data(&cfg, &data, games.games.as_deref())?;
            let unit = match (unit, &cfg.hit_unit) {
                (Some(u), _) => u,
                (None, Some(s)) => s.parse()?,
                (None, None) => HitUnit::default(),
            };
            let steps = steps.or(cfg.mps_steps).unwrap_or(20);
            mps(csv, &data, &games, unit, steps, grid.or(cfg.grid))
        }
        Command::Beliefs {
            data,
            games,
            resamples,
            seed,
        } => {
            let (data, games) = load_data(&cfg, &data, games.games.as_deref())?;
            let d = BeliefOptions::default();
            let opts = BeliefOptions {
                resamples: resamples.or(cfg.resamples).unwrap_or(d.resamples),
                seed: seed.or(cfg.seed).unwrap_or(d.seed),
                ..d
            };
            beliefs(csv, &data, &games, &opts)
        }
        Command::Oos {
            data,
            games,
            model,
            k,
            fit: args,
        } => {
            let (data, games) = load_data(&cfg, &data, games.games.as_deref())?;
            oos(csv, &data, &games, &models_or_all(model), &k, &fit_options(&cfg, &args))
        }
        Command::Simulate {
            game,
            model,
            param,
            subjects,
            rounds,
            seed,
            sessions,
            protocol,
            concentration,
            out,
        } => simulate(&game, model, param, subjects, rounds, seed, sessions, protocol, concentration, out),
        Command::Compare { fits } => compare(csv, &fits),
    }
}

fn models_or_all(models: Vec<ModelKind>) -> Vec<ModelKind> {
    if models.is_empty() {
        ModelKind::all().to_vec()
    } else {
        models
    }
}

fn fit_options(cfg: &Config, args: &FitArgs) -> FitOptions {
    let d = FitOptions::default();
    FitOptions {
        lambda_max: args.lambda_max.or(cfg.lambda_max).unwrap_or(d.lambda_max),
        tau_max: args.tau_max.or(cfg.tau_max).unwrap_or(d.tau_max),
        s_steps: args.s_steps.or(cfg.s_steps).unwrap_or(d.s_steps),
        resolution: args.grid.or(cfg.grid).or(d.resolution),
        ..d
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Index of the player whose labels describe `block`.
fn block_players(game: &Game) -> Vec<usize> {
    if game.is_symmetric() {
        vec![0]
    } else {
        (0..game.n_players()).collect()
    }
}

// ----------------------------------------------------------------- games

fn load_game_dir(dir: Option<&Path>) -> Result<Vec<Game>> {
    let Some(dir) = dir else {
        return bundled_games();
    };
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let games: Vec<Game> = paths.iter().map(load_game).collect::<Result<_>>()?;
    let mut seen = BTreeMap::new();
    for (g, p) in games.iter().zip(&paths) {
        if let Some(prev) = seen.insert(g.id().to_string(), p) {
            return Err(Error::Validation(format!(
                "game id '{}' appears in both {} and {}",
                g.id(),
                prev.display(),
                p.display()
            )));
        }
    }
    Ok(games)
}

/// Observations plus the games they reference, in order of first
/// appearance in the data.
fn load_data(cfg: &Config, data: &Path, dir: Option<&Path>) -> Result<(Vec<Observation>, Vec<Game>)> {
    let obs = load_observations(data)?;
    if obs.is_empty() {
        return Err(Error::Validation(format!("{}: no observations", data.display())));
    }
    let dir = dir.or(cfg.games.as_deref());
    let mut pool = load_game_dir(dir)?;
    let mut games = Vec::new();
    for o in &obs {
        if games.iter().any(|g: &Game| g.id() == o.game_id) {
            continue;
        }
        let pos = pool.iter().position(|g| g.id() == o.game_id).ok_or_else(|| {
            let known: Vec<&str> = pool.iter().map(|g| g.id()).collect();
            Error::Validation(format!(
                "game '{}' in the data is not among the games in {} ({})",
                o.game_id,
                dir.map(|d| d.display().to_string()).unwrap_or_else(|| "the bundled set".into()),
                known.join(", ")
            ))
        })?;
        games.push(pool.swap_remove(pos));
    }
    let refs: Vec<&Game> = games.iter().collect();
    validate_observations(&obs, &refs)?;
    Ok((obs, games))
}

// --------------------------------------------------------------- analyze

fn pattern_text(game: &Game, r: &Region, sets: &[sequil_core::StrategySet]) -> String {
    let _ = r;
    sets.iter()
        .enumerate()
        .map(|(i, s)| s.display_with(game.labels(i.min(game.n_players() - 1))))
        .collect::<Vec<_>>()
        .join("/")
}

fn region_row(game: &Game, set: usize, r: &Region) -> Vec<String> {
    vec![
        set.to_string(),
        format!("{:?}", r.kind).to_lowercase(),
        pattern_text(game, r, &r.pattern),
        r.color.as_ref().map(|c| pattern_text(game, r, c)).unwrap_or_else(|| "-".into()),
        num(r.measure, 6),
        r.dimension.to_string(),
        r.full_dimensional.to_string(),
        r.robust.to_string(),
        r.colorable.to_string(),
    ]
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    cfg: &Config,
    csv: Option<&Path>,
    game: &str,
    epsilon: f64,
    grid: Option<usize>,
    mode: Option<ModeArg>,
    beliefs: bool,
    all: bool,
    svg: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<()> {
    let g = resolve_game(game)?;
    let mode = match mode {
        Some(ModeArg::Symmetric) => AnalysisMode::Symmetric,
        Some(ModeArg::Product) => AnalysisMode::Product,
        None => AnalysisMode::default_for(&g)?,
    };
    let m = grid.or(cfg.grid).unwrap_or(mode.default_resolution());
    let analyzer = SetAnalyzer::new(&g, mode, m)?;
    let eqs: Vec<_> = analyzer
        .s_equilibria(epsilon)?
        .into_iter()
        .filter(|e| all || e.has_interior_belief())
        .collect();
    let mut t = Table::new(
        "regions",
        &["set", "kind", "pattern", "color", "measure", "dimension", "full_dim", "robust", "colorable"],
    );
    for (i, e) in eqs.iter().enumerate() {
        t.push(region_row(&g, i + 1, &e.choice));
        if beliefs {
            t.push(region_row(&g, i + 1, &e.belief));
        }
    }
    emit(&[t], csv)?;
    let choice: Vec<Region> = eqs.iter().map(|e| e.choice.clone()).collect();
    println!(
        "\n{} set(s) at eps = {epsilon}; union measure {} ({:?} mode, grid {m})",
        choice.len(),
        num(union_measure(&choice), 6),
        mode
    );
    if let Some(path) = json {
        let mut regions = choice.clone();
        if beliefs {
            regions.extend(eqs.iter().map(|e| e.belief.clone()));
        }
        write_text(&path, &export_regions(g.id(), Some(epsilon), &regions)?)?;
    }
    if let Some(path) = svg {
        let text = match mode {
            AnalysisMode::Symmetric => {
                let mut spec = PlotSpec::ternary();
                spec.labels = g.labels(0).to_vec();
                spec.title = Some(format!("{}, eps = {epsilon}", g.id()));
                spec.add_regions(&choice)?;
                render_ternary(&spec)?
            }
            AnalysisMode::Product => {
                let mut spec = PlotSpec::square();
                spec.labels = vec![format!("P({})", g.labels(0)[0]), format!("P({})", g.labels(1)[0])];
                spec.title = Some(format!("{}, eps = {epsilon}", g.id()));
                spec.add_regions(&choice)?;
                render_square(&spec)?
            }
        };
        write_text(&path, &text)?;
    }
    Ok(())
}

// ----------------------------------------------------------------- curve

fn curve_table(game: &Game, c: &ModelCurve) -> Table {
    let players = block_players(game);
    let mut headers = vec!["param".to_string()];
    for &p in &players {
        for l in game.labels(p) {
            headers.push(if players.len() > 1 { format!("{}:{l}", p + 1) } else { l.clone() });
        }
    }
    headers.push("residual".into());
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new("curve", &refs);
    for s in &c.samples {
        let mut row = vec![num(s.param, 6)];
        for &p in &players {
            row.extend(s.profile.player(p).iter().map(|x| num(*x, 6)));
        }
        row.push(format!("{:.1e}", s.residual));
        t.push(row);
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn curve(
    cfg: &Config,
    csv: Option<&Path>,
    game: &str,
    model: ModelKind,
    steps: usize,
    max: Option<f64>,
    json: Option<PathBuf>,
    svg: Option<PathBuf>,
) -> Result<()> {
    let g = resolve_game(game)?;
    let d = FitOptions::default();
    let c = match model {
        ModelKind::Logit => logit_qre_curve(&g, max.or(cfg.lambda_max).unwrap_or(d.lambda_max), steps)?,
        ModelKind::LevelK => level_k_curve(&g, max.or(cfg.tau_max).unwrap_or(d.tau_max), steps)?,
        ModelKind::EpsPerfect | ModelKind::EpsProper => {
            if max.is_some() {
                log::warn!("--max is ignored for {model}; eps runs over (0, 1]");
            }
            eps_model_curve(&g, model.restricted().expect("restricted model"), steps)?
        }
        ModelKind::S => {
            return Err(Error::Validation(
                "S predicts sets, not a curve; use `sequil analyze`".into(),
            ))
        }
    };
    emit(&[curve_table(&g, &c)], csv)?;
    if let Some(path) = json {
        write_text(&path, &export_curve(&c)?)?;
    }
    if let Some(path) = svg {
        if !(g.is_symmetric() && g.k(0) == 3) {
            return Err(Error::Unsupported(
                "curve plots need a symmetric three-strategy game".into(),
            ));
        }
        let mut spec = PlotSpec::ternary();
        spec.labels = g.labels(0).to_vec();
        spec.title = Some(format!("{}, {model}", g.id()));
        spec.curves.push(CurveLayer {
            color: "#000000".into(),
            width: 1.5,
            points: c.samples.iter().map(|s| s.profile.player(0).to_vec()).collect(),
        });
        if let Some(last) = c.samples.last() {
            spec.markers.push(Marker {
                shape: MarkerShape::Dot,
                color: MARKER_COLOR.into(),
                point: last.profile.player(0).to_vec(),
            });
        }
        write_text(&path, &render_ternary(&spec)?)?;
    }
    Ok(())
}

// ------------------------------------------------------------------- fit

const FIT_HEADERS: [&str; 7] = ["game", "n_obs", "model", "param", "g", "dof", "g_bar"];

fn fit_row(game: &str, n_obs: usize, r: &FitResult) -> Vec<String> {
    vec![
        game.to_string(),
        n_obs.to_string(),
        r.model.to_string(),
        num(r.param, 4),
        num(r.g, 3),
        r.dof.to_string(),
        num(r.g_bar, 3),
    ]
}

fn count_obs(data: &[Observation], games: &[&Game]) -> usize {
    data.iter().filter(|o| games.iter().any(|g| g.id() == o.game_id)).count()
}

fn fit(csv: Option<&Path>, data: &[Observation], games: &[Game], models: &[ModelKind], opts: &FitOptions) -> Result<()> {
    let mut jobs: Vec<(Vec<&Game>, ModelKind)> = Vec::new();
    for g in games {
        for &m in models {
            jobs.push((vec![g], m));
        }
    }
    if games.len() > 1 {
        for &m in models {
            jobs.push((games.iter().collect(), m));
        }
    }
    let fits: Vec<FitResult> = jobs
        .par_iter()
        .map(|(gs, m)| fit_scalar_model(gs, data, *m, opts))
        .collect::<Result<_>>()?;
    let mut t = Table::new("fit", &FIT_HEADERS);
    for ((gs, _), r) in jobs.iter().zip(&fits) {
        let name = if gs.len() == 1 { gs[0].id() } else { "pooled" };
        t.push(fit_row(name, count_obs(data, gs), r));
    }
    emit(&[t], csv)
}

// ------------------------------------------------------------------- mps

fn mps_row(game: &str, points: usize, r: &MpsResult) -> Vec<String> {
    vec![
        game.to_string(),
        points.to_string(),
        num(r.eps, 3),
        num(r.hit_rate, 3),
        num(r.area_size, 3),
        num(r.mps, 3),
    ]
}

fn best_of(sweep: &[MpsResult]) -> MpsResult {
    let mut best = sweep[0];
    for r in &sweep[1..] {
        if r.mps > best.mps + 1e-12 {
            best = *r;
        }
    }
    best
}

fn mps(
    csv: Option<&Path>,
    data: &[Observation],
    games: &[Game],
    unit: HitUnit,
    steps: usize,
    grid: Option<usize>,
) -> Result<()> {
    if steps == 0 {
        return Err(Error::Validation("--steps must be at least 1".into()));
    }
    let per_game: Vec<(usize, MpsResult, Vec<MpsResult>)> = games
        .par_iter()
        .map(|g| {
            let n = hit_points(g, data, unit)?.len();
            let (best, sweep) = epsilon_by_mps(g, data, unit, steps, grid)?;
            Ok((n, best, sweep))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("mps", &["game", "points", "eps", "hit_rate", "area", "mps"]);
    for (g, (n, best, _)) in games.iter().zip(&per_game) {
        t.push(mps_row(g.id(), *n, best));
    }
    if games.len() > 1 {
        // one ε for all games: hits pooled over points, areas averaged over games
        let total: usize = per_game.iter().map(|p| p.0).sum();
        let pooled: Vec<MpsResult> = (0..steps)
            .map(|i| {
                let hits: f64 = per_game.iter().map(|(n, _, s)| s[i].hit_rate * *n as f64).sum();
                let area = per_game.iter().map(|(_, _, s)| s[i].area_size).sum::<f64>() / per_game.len() as f64;
                let rate = if total > 0 { hits / total as f64 } else { 0.0 };
                MpsResult::new(per_game[0].2[i].eps, rate, area)
            })
            .collect();
        t.push(mps_row("pooled", total, &best_of(&pooled)));
    }
    emit(&[t], csv)
}

// --------------------------------------------------------------- beliefs

fn beliefs(csv: Option<&Path>, data: &[Observation], games: &[Game], opts: &BeliefOptions) -> Result<()> {
    let with_beliefs: Vec<&Game> = games
        .iter()
        .filter(|g| {
            let any = data.iter().any(|o| o.game_id == g.id() && o.belief.is_some());
            if !any {
                log::warn!("{}: no stated beliefs, skipped", g.id());
            }
            any
        })
        .collect();
    if with_beliefs.is_empty() {
        return Err(Error::Validation("the data hold no stated beliefs".into()));
    }
    let reports: Vec<_> = with_beliefs
        .par_iter()
        .map(|g| belief_diagnostics(g, data, opts))
        .collect::<Result<_>>()?;
    let ranks = reports.iter().map(|r| r.rank_counts.len()).max().unwrap_or(0);
    let mut headers = vec!["game".to_string(), "beliefs".into(), "missing".into(), "level_k".into()];
    headers.extend((1..=ranks).map(|r| format!("rank_{r}")));
    headers.extend(["unbiased".into(), "re_p".into()]);
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new("beliefs", &refs);
    for r in &reports {
        let total: usize = r.rank_counts.iter().sum();
        let mut row = vec![
            r.game_id.clone(),
            r.n_beliefs.to_string(),
            r.missing.to_string(),
            num(r.level_k_share, 3),
        ];
        for i in 0..ranks {
            row.push(match r.rank_counts.get(i) {
                Some(&c) if total > 0 => num(c as f64 / total as f64, 3),
                _ => "-".into(),
            });
        }
        row.push(num(r.unbiased_share, 3));
        row.push(
            r.rational_expectations
                .iter()
                .map(|p| num(p.p_value, 4))
                .collect::<Vec<_>>()
                .join(" "),
        );
        t.push(row);
    }
    emit(&[t], csv)
}

// ------------------------------------------------------------------- oos

fn oos(
    csv: Option<&Path>,
    data: &[Observation],
    games: &[Game],
    models: &[ModelKind],
    ks: &[usize],
    opts: &FitOptions,
) -> Result<()> {
    let refs: Vec<&Game> = games.iter().collect();
    let mut t = Table::new("oos", &["model", "k", "subsets", "g_in", "g_out"]);
    for &m in models {
        for &k in ks {
            let r = out_of_sample(&refs, data, m, k, opts)?;
            t.push(vec![
                m.to_string(),
                k.to_string(),
                r.combinations.to_string(),
                num(r.mean_in_sample_g, 3),
                num(r.mean_held_out_g, 3),
            ]);
        }
    }
    emit(&[t], csv)
}

// -------------------------------------------------------------- simulate

#[allow(clippy::too_many_arguments)]
fn simulate(
    game: &str,
    model: ModelKind,
    param: f64,
    subjects: Option<usize>,
    rounds: usize,
    seed: u64,
    sessions: usize,
    protocol: Protocol,
    concentration: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let g = resolve_game(game)?;
    if !(concentration >= 0.0 && concentration.is_finite()) {
        return Err(Error::Validation("--concentration must be a finite number >= 0".into()));
    }
    if rounds == 0 || sessions == 0 {
        return Err(Error::Validation("--rounds and --sessions must be at least 1".into()));
    }
    let agent = match model {
        ModelKind::S => {
            if !(param > 0.0 && param <= 1.0) {
                return Err(Error::Validation(format!("S needs 0 < param <= 1, got {param}")));
            }
            let p = s_interior_profile(&g, S_GENERATOR_RATIO * param).ok_or_else(|| {
                Error::Validation(format!(
                    "{} has no profile with a strict modal best reply inside S({param})",
                    g.id()
                ))
            })?;
            AgentModel::Fixed(p)
        }
        m => AgentModel::from_kind(m, param)?,
    };
    let n = subjects.unwrap_or(if g.n_players() == 3 { 9 } else { 8 });
    let spec = AgentSpec {
        belief_concentration: (concentration > 0.0).then_some(concentration),
        ..AgentSpec::new(agent)
    };
    let data = simulate_sessions(&g, &vec![spec; n], rounds, protocol, seed, sessions)?;
    match out {
        Some(path) => save_observations(&data, &path),
        None => write_observations(&data, std::io::stdout().lock()),
    }
}

// --------------------------------------------------------------- compare

struct FitRow {
    game: String,
    model: String,
    g_bar: f64,
    n_obs: f64,
}

fn read_fits(path: &Path) -> Result<Vec<FitRow>> {
    let perr = |m: String| Error::Parse {
        context: path.display().to_string(),
        message: m,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::Validation(format!("{}: {e}", path.display())),
        _ => perr(e.to_string()),
    })?;
    let headers = r.headers().map_err(|e| perr(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (game, model, g_bar) = match (col("game"), col("model"), col("g_bar")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(perr("needs columns game, model and g_bar".into())),
    };
    let n_obs = col("n_obs");
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| perr(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let parse = |i: usize, what: &str| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .map_err(|_| perr(format!("row {}: bad {what} '{}'", line + 2, field(i))))
        };
        if field(game) == "pooled" {
            continue;
        }
        rows.push(FitRow {
            game: field(game).to_string(),
            model: field(model).to_string(),
            g_bar: parse(g_bar, "g_bar")?,
            n_obs: match n_obs {
                Some(i) => parse(i, "n_obs")?,
                None => 1.0,
            },
        });
    }
    Ok(rows)
}

fn compare(csv: Option<&Path>, path: &Path) -> Result<()> {
    let rows = read_fits(path)?;
    let mut models: Vec<String> = Vec::new();
    for r in &rows {
        if !models.contains(&r.model) {
            models.push(r.model.clone());
        }
    }
    if models.len() < 2 {
        return Err(Error::Validation(format!("{}: need fits of at least two models", path.display())));
    }
    let of = |m: &str| -> Vec<&FitRow> { rows.iter().filter(|r| r.model == m).collect() };
    let mut headers = vec!["model".to_string()];
    headers.extend(models.iter().cloned());
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut ks = Table::new("ks", &refs);
    for a in &models {
        let ra = of(a);
        let mut row = vec![a.clone()];
        for b in &models {
            let rb = of(b);
            let d = ks_d_weighted(
                &ra.iter().map(|r| r.g_bar).collect::<Vec<_>>(),
                &ra.iter().map(|r| r.n_obs).collect::<Vec<_>>(),
                &rb.iter().map(|r| r.g_bar).collect::<Vec<_>>(),
                &rb.iter().map(|r| r.n_obs).collect::<Vec<_>>(),
            )?;
            row.push(num(d, 3));
        }
        ks.push(row);
    }
    let mut wx = Table::new("wilcoxon", &["model_a", "model_b", "pairs", "w_plus", "w_minus", "z", "p_value"]);
    for (i, a) in models.iter().enumerate() {
        for b in &models[i + 1..] {
            let rb = of(b);
            let (xa, xb): (Vec<f64>, Vec<f64>) = of(a)
                .iter()
                .filter_map(|ra| rb.iter().find(|r| r.game == ra.game).map(|r| (ra.g_bar, r.g_bar)))
                .unzip();
            let w = wilcoxon_signed_rank(&xa, &xb)?;
            wx.push(vec![
                a.clone(),
                b.clone(),
                xa.len().to_string(),
                num(w.w_plus, 1),
                num(w.w_minus, 1),
                num(w.z, 3),
                num(w.p_value, 4),
            ]);
        }
    }
    emit(&[ks, wx], csv)
}
