use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cluster_games::classical_bounds::{bound, BoundMethod, BoundResult, GeometricCircuitStrategy};
use cluster_games::games::{
    bell_success_probability, play_quantum, GameInstance, GameKind, InputSetKind, SuccessEstimate,
};
use cluster_games::graphsim::{preparation_circuit, NoiseParams, PrepForm, TrajectoryRng};
use cluster_games::noise_fit::{grid_fit, simulate_report, write_fit_csv, FitGrid, FitResult, GridPoint};
use cluster_games::tomography::{
    estimate_expectations, fidelity_and_witness, format_with_uncertainty, greedy_clique_cover, nontrivial_stabilizers,
    plan_from_table, read_table_csv, reference_table, report_from_table, simulate_dataset, spam_correct, table_rows,
    write_bar_chart_csv, write_table_csv, ConfusionSpec, FidelityEstimate, MeasurementPlan,
};
use cluster_games::{CycleGraph, EstimationReport64, StabilizerGroup};

use crate::config::{parse_json, CliError, ExperimentConfig, Format};

pub const PLAY_FILE: &str = "play.json";
pub const ROUNDS_FILE: &str = "rounds.csv";
pub const BOUNDS_FILE: &str = "bounds.json";
pub const TOMO_FILE: &str = "tomo.json";
pub const STABILIZERS_FILE: &str = "stabilizers.csv";
pub const BARS_FILE: &str = "bars.csv";
pub const FIT_FILE: &str = "fit.json";
pub const FIT_GRID_FILE: &str = "fit_grid.csv";
pub const REPORT_FILE: &str = "report.json";
pub const REPORT_CSV_FILE: &str = "report.csv";

/// Experiment id of a synthetic fit reference, offset from the grid's own streams.
const REFERENCE_EXPERIMENT_OFFSET: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlanChoice {
    /// `table` for n = 6, `greedy` otherwise.
    Auto,
    Table,
    Greedy,
}

fn out_dir(cfg: &ExperimentConfig) -> Result<Option<&Path>, CliError> {
    match cfg.out.as_deref() {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
            Ok(Some(d))
        }
        None => Ok(None),
    }
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("csv: {e}"))
}

fn write_csv<W: Write, R: Serialize>(writer: W, header: &[&str], rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(header).map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Summary on stdout in the requested format.
fn emit<J: Serialize, R: Serialize>(
    cfg: &ExperimentConfig,
    json: &J,
    header: &[&str],
    rows: &[R],
) -> Result<(), CliError> {
    let stdout = io::stdout();
    match cfg.format() {
        Format::Json => {
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, json).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(lock).map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Csv => write_csv(stdout.lock(), header, rows),
    }
}

fn input_set_name(game: &GameInstance) -> String {
    game.input_set().kind.to_string()
}

// ---- play ---------------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlaySummary {
    pub game: String,
    pub kind: GameKind,
    pub inputs: String,
    pub n: usize,
    pub shots: usize,
    pub seed: u64,
    pub noise: NoiseParams,
    pub estimate: SuccessEstimate,
}

#[derive(Serialize)]
struct PlayRow {
    input: String,
    shots: u64,
    wins: u64,
    win_rate: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct RoundRow {
    x: String,
    y: String,
    won: bool,
    strategy: String,
    seed: u64,
    experiment: u64,
    setting: u64,
    shot: u64,
}

pub fn play(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let seed = cfg.require_seed("play")?;
    let game = cfg.require_game()?;
    let noise = cfg.noise()?;
    let shots = cfg.shots()?;
    let out = play_quantum(&game, &noise, shots, &TrajectoryRng::new(seed), 0)?;
    let est = &out.estimate;
    eprintln!("{}: Pr[win] = {}", game.label(), format_with_uncertainty(est.p_hat, est.stderr, 4));
    let summary = PlaySummary {
        game: game.label(),
        kind: game.kind(),
        inputs: input_set_name(&game),
        n: game.n(),
        shots,
        seed,
        noise,
        estimate: out.estimate.clone(),
    };
    if let Some(dir) = out_dir(cfg)? {
        write_json(&dir.join(PLAY_FILE), &summary)?;
        let rows: Vec<RoundRow> = out
            .records
            .iter()
            .map(|r| RoundRow {
                x: r.x.to_string(),
                y: r.y.to_string(),
                won: r.won,
                strategy: r.strategy.clone(),
                seed: r.seed,
                experiment: r.stream.experiment,
                setting: r.stream.setting,
                shot: r.stream.shot,
            })
            .collect();
        let path = dir.join(ROUNDS_FILE);
        write_csv(create(&path)?, &["x", "y", "won", "strategy", "seed", "experiment", "setting", "shot"], &rows)?;
    }
    let mut rows: Vec<PlayRow> = est
        .per_input
        .iter()
        .map(|r| PlayRow {
            input: r.input.to_string(),
            shots: r.shots,
            wins: r.wins,
            win_rate: r.win_rate,
            stderr: r.stderr,
        })
        .collect();
    rows.push(PlayRow {
        input: "mean".into(),
        shots: rows.iter().map(|r| r.shots).sum(),
        wins: rows.iter().map(|r| r.wins).sum(),
        win_rate: est.p_hat,
        stderr: est.stderr,
    });
    emit(cfg, &summary, &["input", "shots", "wins", "win_rate", "stderr"], &rows)
}

// ---- bounds -------------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: i64,
    pub den: i64,
}

/// A [`BoundResult`] without its wall-clock time, so reruns are byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundRecord {
    pub game: String,
    pub depth: usize,
    pub beta: Fraction,
    pub wins: usize,
    pub inputs: usize,
    pub method: BoundMethod,
    pub search_size: f64,
    pub witness: GeometricCircuitStrategy,
}

impl From<BoundResult> for BoundRecord {
    fn from(r: BoundResult) -> Self {
        BoundRecord {
            game: r.game,
            depth: r.depth,
            beta: Fraction { num: *r.beta.numer(), den: *r.beta.denom() },
            wins: r.wins,
            inputs: r.inputs,
            method: r.method,
            search_size: r.search_size,
            witness: r.witness,
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    game: String,
    depth: usize,
    beta: String,
    beta_value: f64,
    wins: usize,
    inputs: usize,
    method: BoundMethod,
    search_size: f64,
}

fn compute_bound(game: &GameInstance, depth: usize) -> Result<BoundRecord, CliError> {
    let r = bound(game, depth)?;
    eprintln!(
        "{} depth {depth}: beta = {} ({:?}, {:.3e} strategies, {:.2} s)",
        r.game, r.beta, r.method, r.search_size, r.seconds
    );
    Ok(r.into())
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let game = cfg.require_game()?;
    let depths = match cfg.depth {
        Some(d) => vec![d],
        None => vec![0, 1],
    };
    let records = depths.iter().map(|&d| compute_bound(&game, d)).collect::<Result<Vec<_>, _>>()?;
    if let Some(dir) = out_dir(cfg)? {
        write_json(&dir.join(BOUNDS_FILE), &records)?;
    }
    let rows: Vec<BoundRow> = records
        .iter()
        .map(|r| BoundRow {
            game: r.game.clone(),
            depth: r.depth,
            beta: format!("{}/{}", r.beta.num, r.beta.den),
            beta_value: r.beta.num as f64 / r.beta.den as f64,
            wins: r.wins,
            inputs: r.inputs,
            method: r.method,
            search_size: r.search_size,
        })
        .collect();
    emit(cfg, &rows, &["game", "depth", "beta", "beta_value", "wins", "inputs", "method", "search_size"], &rows)
}

// ---- tomo ---------------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TomoArtifact {
    pub n: usize,
    pub shots: usize,
    pub seed: u64,
    pub noise: NoiseParams,
    pub readout: Option<ConfusionSpec>,
    pub plan_hash: String,
    pub settings: usize,
    pub raw: EstimationReport64,
    pub spam: Option<EstimationReport64>,
    pub fidelity_raw: FidelityEstimate<f64>,
    pub fidelity_spam: Option<FidelityEstimate<f64>>,
}

#[derive(Serialize)]
struct FidelityRow {
    pipeline: &'static str,
    fidelity: f64,
    stderr: f64,
    witness: f64,
    witness_stderr: f64,
    entangled: bool,
}

fn fidelity_rows(raw: &FidelityEstimate<f64>, spam: Option<&FidelityEstimate<f64>>) -> Vec<FidelityRow> {
    let row = |pipeline, f: &FidelityEstimate<f64>| FidelityRow {
        pipeline,
        fidelity: f.fidelity,
        stderr: f.stderr,
        witness: f.witness,
        witness_stderr: f.witness_stderr,
        entangled: f.entangled,
    };
    std::iter::once(row("raw", raw)).chain(spam.map(|f| row("spam_corrected", f))).collect()
}

const FIDELITY_HEADER: [&str; 6] = ["pipeline", "fidelity", "stderr", "witness", "witness_stderr", "entangled"];

fn cycle(n: usize) -> Result<(CycleGraph, StabilizerGroup), CliError> {
    let g = CycleGraph::new(n).map_err(|e| CliError::Config(e.to_string()))?;
    let group = StabilizerGroup::cycle(&g);
    Ok((g, group))
}

fn tomography_plan(n: usize, group: &StabilizerGroup, choice: PlanChoice) -> Result<MeasurementPlan, CliError> {
    match (choice, n) {
        (PlanChoice::Table, 6) | (PlanChoice::Auto, 6) => Ok(plan_from_table(&reference_table())?),
        (PlanChoice::Table, _) => Err(CliError::Config(format!("the table plan is defined for n = 6, not n = {n}"))),
        _ => Ok(greedy_clique_cover(&nontrivial_stabilizers(group))?),
    }
}

fn print_fidelity(label: &str, f: &FidelityEstimate<f64>) {
    eprintln!(
        "{label}: F = {}, W = {}",
        format_with_uncertainty(f.fidelity, f.stderr, 4),
        format_with_uncertainty(f.witness, f.witness_stderr, 4)
    );
}

fn write_stabilizer_files(
    dir: &Path,
    raw: Option<&EstimationReport64>,
    spam: Option<&EstimationReport64>,
) -> Result<(), CliError> {
    let rows = raw.map(|r| table_rows(r, spam)).unwrap_or_default();
    write_table_csv(&rows, create(&dir.join(STABILIZERS_FILE))?)?;
    let bars = create(&dir.join(BARS_FILE))?;
    match spam.or(raw) {
        Some(r) => write_bar_chart_csv(r, bars)?,
        None => write_csv::<_, FidelityRow>(bars, &["input", "stabilizer", "value", "stderr"], &[])?,
    }
    Ok(())
}

pub fn tomo(cfg: &ExperimentConfig, choice: PlanChoice) -> Result<(), CliError> {
    let seed = cfg.require_seed("tomo")?;
    let shots = cfg.shots()?;
    let noise = cfg.noise()?;
    let n = cfg.n();
    let (graph, group) = cycle(n)?;
    let plan = tomography_plan(n, &group, choice)?;
    let readout = cfg.readout()?;
    if let Some(m) = &readout {
        if m.n() != n {
            return Err(CliError::Config(format!("readout model has {} qubits, expected {n}", m.n())));
        }
    }
    let prep = preparation_circuit(&graph, PrepForm::Rxx)?;
    let data = simulate_dataset(&plan, &prep, &noise, shots, &TrajectoryRng::new(seed), 0, readout.as_ref())?;
    let raw = estimate_expectations::<f64>(&plan, &data)?;
    let spam = readout.as_ref().map(|m| spam_correct::<f64>(&plan, &data, m)).transpose()?;
    let fidelity_raw = fidelity_and_witness(&raw, &group)?;
    let fidelity_spam = spam.as_ref().map(|r| fidelity_and_witness(r, &group)).transpose()?;
    print_fidelity("raw", &fidelity_raw);
    if let Some(f) = &fidelity_spam {
        print_fidelity("spam-corrected", f);
    }
    let artifact = TomoArtifact {
        n,
        shots,
        seed,
        noise,
        readout: readout.as_ref().map(|m| m.to_spec()),
        plan_hash: plan.hash(),
        settings: plan.len(),
        raw,
        spam,
        fidelity_raw,
        fidelity_spam,
    };
    if let Some(dir) = out_dir(cfg)? {
        write_json(&dir.join(TOMO_FILE), &artifact)?;
        write_stabilizer_files(dir, Some(&artifact.raw), artifact.spam.as_ref())?;
    }
    let rows = fidelity_rows(&artifact.fidelity_raw, artifact.fidelity_spam.as_ref());
    emit(cfg, &rows, &FIDELITY_HEADER, &rows)
}

// ---- fit ----------------------------------------------------------------------------------

pub struct FitArgs {
    pub reference: Option<PathBuf>,
    pub raw: bool,
    pub truth: Option<(f64, f64, f64)>,
    pub reference_shots: usize,
    pub grid: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitArtifact {
    pub reference: String,
    pub grid: FitGrid,
    pub result: FitResult,
}

#[derive(Serialize)]
struct FitRow {
    p1d: f64,
    #[serde(rename = "p2XX")]
    p2xx: f64,
    p2d: f64,
    delta_f: f64,
    delta_s: f64,
    on_level_set: bool,
    level_set_size: usize,
    two_qubit_infidelity: f64,
}

fn load_reference(path: &Path, raw: bool) -> Result<EstimationReport64, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        let t: TomoArtifact = parse_json(path)?;
        return Ok(if raw { t.raw } else { t.spam.unwrap_or(t.raw) });
    }
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let rows = read_table_csv(file).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(report_from_table(&rows, !raw)?)
}

pub fn fit(cfg: &ExperimentConfig, args: &FitArgs) -> Result<(), CliError> {
    let seed = cfg.require_seed("fit")?;
    let mut grid = match &args.grid {
        Some(p) => parse_json::<FitGrid>(p)?,
        None => FitGrid::default_grid(seed),
    };
    grid.seed = seed;
    if let Some(s) = cfg.shots {
        grid.shots = s;
    }
    if cfg.noise.is_some() {
        grid.base = cfg.noise()?;
    }
    grid.validate()?;
    let (label, reference) = match (&args.truth, &args.reference) {
        (Some(t), _) => {
            let (_, group) = cycle(cfg.n())?;
            let plan = tomography_plan(cfg.n(), &group, PlanChoice::Auto)?;
            let rng = TrajectoryRng::new(seed);
            let truth = grid.noise_at(*t);
            let experiment = grid.experiment.wrapping_add(REFERENCE_EXPERIMENT_OFFSET);
            let r = simulate_report(&plan, &truth, args.reference_shots, &rng, experiment)?;
            (format!("synthetic({}, {}, {})", t.0, t.1, t.2), r)
        }
        (None, Some(p)) => (p.display().to_string(), load_reference(p, args.raw)?),
        (None, None) => ("bundled table".to_string(), report_from_table(&reference_table(), !args.raw)?),
    };
    eprintln!("fitting {} grid points against the {label} reference", grid.points().len());
    let result = grid_fit(&reference, &grid)?;
    let b: &GridPoint = &result.best_fit;
    if !result.best_on_level_set {
        eprintln!("warning: no grid point has |dF| <= {}; reporting the dF minimizer", result.tolerance);
    }
    eprintln!(
        "best fit: p1d = {}, p2XX = {}, p2d = {} (dF = {:.4}, dS = {:.4}); two-qubit infidelity {:.4}",
        b.p1d, b.p2xx, b.p2d, b.delta_f, b.delta_s, result.two_qubit_infidelity
    );
    let row = FitRow {
        p1d: b.p1d,
        p2xx: b.p2xx,
        p2d: b.p2d,
        delta_f: b.delta_f,
        delta_s: b.delta_s,
        on_level_set: result.best_on_level_set,
        level_set_size: result.level_set.len(),
        two_qubit_infidelity: result.two_qubit_infidelity,
    };
    let artifact = FitArtifact { reference: label, grid, result };
    if let Some(dir) = out_dir(cfg)? {
        write_json(&dir.join(FIT_FILE), &artifact)?;
        write_fit_csv(&artifact.result, create(&dir.join(FIT_GRID_FILE))?)?;
    }
    emit(
        cfg,
        &row,
        &["p1d", "p2XX", "p2d", "delta_f", "delta_s", "on_level_set", "level_set_size", "two_qubit_infidelity"],
        &[&row],
    )
}

// ---- report -------------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameRow {
    pub game: String,
    pub inputs: usize,
    pub stabilizers: usize,
    pub settings: usize,
    pub beta0: Option<String>,
    pub beta1: Option<String>,
    pub pr_raw: Option<f64>,
    pub pr_spam: Option<f64>,
    pub pr_played: Option<f64>,
    pub pr_played_stderr: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub games: Vec<GameRow>,
    pub fidelity_raw: Option<FidelityEstimate<f64>>,
    pub fidelity_spam: Option<FidelityEstimate<f64>>,
    pub fit: Option<GridPoint>,
    pub two_qubit_infidelity: Option<f64>,
}

fn load_optional<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<Option<T>, CliError> {
    let p = dir.join(name);
    if p.exists() {
        Ok(Some(parse_json(&p)?))
    } else {
        Ok(None)
    }
}

fn table_games(cfg: &ExperimentConfig, play: Option<&PlaySummary>) -> Result<Vec<GameInstance>, CliError> {
    if let Some(g) = cfg.optional_game()? {
        return Ok(vec![g]);
    }
    let mut games = Vec::new();
    if cfg.n() == 6 {
        for (k, s) in [
            (GameKind::Cbf, InputSetKind::Full),
            (GameKind::Cbf, InputSetKind::Mermin55),
            (GameKind::Ss, InputSetKind::Hlf8),
            (GameKind::Ss, InputSetKind::Hlf5),
        ] {
            games.push(GameInstance::build(k, s, 6)?);
        }
    }
    if let Some(p) = play {
        if !games.iter().any(|g| g.label() == p.game) {
            games.push(GameInstance::build(p.kind, p.inputs.parse()?, p.n)?);
        }
    }
    Ok(games)
}

fn beta_for(game: &GameInstance, depth: usize, stored: &[BoundRecord]) -> Option<String> {
    if let Some(r) = stored.iter().find(|r| r.game == game.label() && r.depth == depth) {
        return Some(format!("{}/{}", r.beta.num, r.beta.den));
    }
    match bound(game, depth) {
        Ok(r) => Some(r.beta.to_string()),
        Err(e) => {
            eprintln!("{} depth {depth}: {e}", game.label());
            None
        }
    }
}

fn bell_from(game: &GameInstance, report: Option<&EstimationReport64>) -> Option<f64> {
    let r = report?;
    if r.n != game.n() {
        return None;
    }
    bell_success_probability::<f64, _>(game, |p| r.value_of(p)).ok()
}

pub fn report(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let dir = cfg.out.as_deref().ok_or_else(|| CliError::Config("report needs --out DIR".into()))?;
    if !dir.is_dir() {
        return Err(CliError::io(dir, "no such directory"));
    }
    let stored: Vec<BoundRecord> = load_optional(dir, BOUNDS_FILE)?.unwrap_or_default();
    let play: Option<PlaySummary> = load_optional(dir, PLAY_FILE)?;
    let tomo: Option<TomoArtifact> = load_optional(dir, TOMO_FILE)?;
    let fit: Option<FitArtifact> = load_optional(dir, FIT_FILE)?;

    let mut games = Vec::new();
    for game in table_games(cfg, play.as_ref())? {
        let stabilizers: BTreeSet<_> = (0..game.inputs().len())
            .flat_map(|i| game.terms(i).iter().map(|t| t.0))
            .filter(|p| !p.is_identity())
            .collect();
        let settings: BTreeSet<String> = game
            .inputs()
            .iter()
            .map(|x| cluster_games::graphsim::bases_to_string(&game.measurement_bases(x)))
            .collect();
        let played = play.as_ref().filter(|p| p.game == game.label());
        games.push(GameRow {
            game: game.label(),
            inputs: game.inputs().len(),
            stabilizers: stabilizers.len(),
            settings: settings.len(),
            beta0: beta_for(&game, 0, &stored),
            beta1: beta_for(&game, 1, &stored),
            pr_raw: bell_from(&game, tomo.as_ref().map(|t| &t.raw)),
            pr_spam: bell_from(&game, tomo.as_ref().and_then(|t| t.spam.as_ref())),
            pr_played: played.map(|p| p.estimate.p_hat),
            pr_played_stderr: played.map(|p| p.estimate.stderr),
        });
    }
    let report = Report {
        games,
        fidelity_raw: tomo.as_ref().map(|t| t.fidelity_raw.clone()),
        fidelity_spam: tomo.as_ref().and_then(|t| t.fidelity_spam.clone()),
        fit: fit.as_ref().map(|f| f.result.best_fit.clone()),
        two_qubit_infidelity: fit.as_ref().map(|f| f.result.two_qubit_infidelity),
    };
    if let Some(f) = &report.fidelity_raw {
        print_fidelity("raw", f);
    }
    if let Some(f) = &report.fidelity_spam {
        print_fidelity("spam-corrected", f);
    }
    const HEADER: [&str; 10] = [
        "game",
        "inputs",
        "stabilizers",
        "settings",
        "beta0",
        "beta1",
        "pr_raw",
        "pr_spam",
        "pr_played",
        "pr_played_stderr",
    ];
    write_json(&dir.join(REPORT_FILE), &report)?;
    write_csv(create(&dir.join(REPORT_CSV_FILE))?, &HEADER, &report.games)?;
    write_stabilizer_files(dir, tomo.as_ref().map(|t| &t.raw), tomo.as_ref().and_then(|t| t.spam.as_ref()))?;
    emit(cfg, &report, &HEADER, &report.games)
}
