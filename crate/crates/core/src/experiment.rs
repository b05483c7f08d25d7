//! Experiment configs, seed sweeps, run artifacts and comparison reports.
//!
//! A config is sectioned `key = value` text (TOML):
//!
//! ```text
//! [experiment]
//! map = "fixtures/maze.map"
//! planners = ["adaptive", "lf8"]
//! seeds = [1, 2, 3]
//! out = "runs/maze"
//! frames = 0
//!
//! [planner]
//! max_simulations = 2000
//! ```
//!
//! Every section and key is optional and unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baselines::DecoupledConfig;
use crate::coverage_sensor::SensorParams;
use crate::decision_core::RewardWeights;
use crate::error::{ConfigError, MissionError};
use crate::planner::PlannerConfig;
use crate::simulator::{
    load_environment, run_mission_with, GroundTruthGrid, MissionConfig, MissionLog, PlannerKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub map: String,
    pub planners: Vec<PlannerKind>,
    pub seeds: Vec<u64>,
    pub out: String,
    /// Dump a PPM of the map every this many steps; 0 disables.
    pub frames: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            map: "fixtures/maze.map".into(),
            planners: vec![PlannerKind::Adaptive],
            seeds: vec![1],
            out: "runs/out".into(),
            frames: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSettings {
    pub alpha: f64,
    pub window: usize,
    pub step_limit: usize,
    pub metric_radius: f64,
    pub check_invariants: bool,
}

impl Default for MissionSettings {
    fn default() -> Self {
        let m = MissionConfig::default();
        Self {
            alpha: m.alpha,
            window: m.window,
            step_limit: m.step_limit,
            metric_radius: m.metric_radius,
            check_invariants: m.check_invariants,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: RunSettings,
    pub mission: MissionSettings,
    pub sensor: SensorParams,
    pub reward: RewardWeights,
    pub planner: PlannerConfig,
    pub decoupled: DecoupledConfig,
}

fn value_of(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Reject keys the default config does not have, naming them as
/// `section.key`.
fn check_keys(table: &toml::Table, reference: &toml::Table) -> Result<(), ConfigError> {
    for (section, body) in table {
        let Some(known) = reference.get(section) else {
            return Err(ConfigError::UnknownKey(section.clone()));
        };
        let (Some(body), Some(known)) = (body.as_table(), known.as_table()) else {
            return Err(ConfigError::BadValue {
                key: section.clone(),
                message: "expected a section".into(),
            });
        };
        for key in body.keys() {
            if !known.contains_key(key) {
                return Err(ConfigError::UnknownKey(format!("{section}.{key}")));
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parse config text, apply `section.key=value` overrides in order and
    /// validate the result.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            ConfigError::Syntax {
                line,
                message: e.message().to_string(),
            }
        })?;
        for o in overrides {
            let (key, raw) = o.split_once('=').ok_or_else(|| ConfigError::BadValue {
                key: o.clone(),
                message: "expected section.key=value".into(),
            })?;
            let (section, field) = key.trim().split_once('.').ok_or_else(|| ConfigError::BadValue {
                key: key.trim().to_string(),
                message: "expected section.key".into(),
            })?;
            let entry = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let Some(body) = entry.as_table_mut() else {
                return Err(ConfigError::BadValue {
                    key: section.to_string(),
                    message: "expected a section".into(),
                });
            };
            body.insert(field.to_string(), value_of(raw.trim()));
        }
        let reference = toml::Table::try_from(Self::default()).expect("defaults serialize");
        check_keys(&table, &reference)?;
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| ConfigError::BadValue {
            key: "config".into(),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::parse_with(text, &[])
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_with(&text, overrides)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| ConfigError::Invalid(m);
        self.sensor.validate().map_err(|e| bad(e.to_string()))?;
        self.reward.validate().map_err(bad)?;
        self.planner.validate().map_err(bad)?;
        if self.experiment.planners.is_empty() {
            return Err(bad("at least one planner is required".into()));
        }
        if self.experiment.seeds.is_empty() {
            return Err(bad("at least one seed is required".into()));
        }
        let m = &self.mission;
        if !(m.alpha >= 1.0) {
            return Err(bad("alpha must be at least 1".into()));
        }
        if m.window < 3 {
            return Err(bad("window must be at least 3 cells".into()));
        }
        if !(m.metric_radius > 0.0) {
            return Err(bad("metric_radius must be positive".into()));
        }
        Ok(())
    }

    pub fn mission_config(&self) -> MissionConfig {
        MissionConfig {
            sensor: self.sensor,
            weights: self.reward,
            planner: self.planner,
            alpha: self.mission.alpha,
            window: self.mission.window,
            step_limit: self.mission.step_limit,
            metric_radius: self.mission.metric_radius,
            decoupled: self.decoupled,
            check_invariants: self.mission.check_invariants,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{planner} seed {seed}: {source}")]
    Mission {
        planner: PlannerKind,
        seed: u64,
        #[source]
        source: MissionError,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed run artifact {path}: {message}")]
    Artifact { path: String, message: String },
    #[error("runs use different maps: {0}")]
    MapMismatch(String),
}

impl ExperimentError {
    /// Process exit code: 1 for a failed mission, 2 for anything the user
    /// can fix in the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Mission { .. } => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Hex SHA-256 of the grid in its canonical text form.
pub fn map_digest(grid: &GroundTruthGrid) -> String {
    Sha256::digest(grid.to_map_string().as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn load_map(path: &Path) -> Result<GroundTruthGrid, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(load_environment(&text)?)
}

pub fn log_file_name(planner: PlannerKind, seed: u64) -> String {
    format!("{planner}_seed{seed}.csv")
}

pub fn trace_file_name(planner: PlannerKind, seed: u64) -> String {
    format!("{planner}_seed{seed}.trace.jsonl")
}

/// Run every (planner, seed) pair, fanned out over the available cores.
/// Logs come back in planner-major, seed-minor order.
pub fn run_sweep(
    grid: &GroundTruthGrid,
    cfg: &MissionConfig,
    planners: &[PlannerKind],
    seeds: &[u64],
    frames: Option<(&Path, usize)>,
) -> Result<Vec<MissionLog>, ExperimentError> {
    let jobs: Vec<(PlannerKind, u64)> = planners
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(jobs.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<MissionLog, ExperimentError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(planner, seed)) = jobs.get(i) else {
                    break;
                };
                let out = run_one(grid, cfg, planner, seed, frames);
                results.lock().expect("no worker panicked")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn run_one(
    grid: &GroundTruthGrid,
    cfg: &MissionConfig,
    planner: PlannerKind,
    seed: u64,
    frames: Option<(&Path, usize)>,
) -> Result<MissionLog, ExperimentError> {
    let mut frame_err = None;
    let mut observer = |step: usize, map: &crate::world_model::Irm| {
        let Some((dir, every)) = frames else { return };
        if every == 0 || !step.is_multiple_of(every) || frame_err.is_some() {
            return;
        }
        let path = dir.join(format!("{planner}_seed{seed}_{step:06}.ppm"));
        if let Err(e) = map.write_ppm(&path) {
            frame_err = Some(ExperimentError::Io {
                path: path.display().to_string(),
                source: e,
            });
        }
    };
    let log = run_mission_with(grid, planner, cfg, seed, None, &mut observer).map_err(|source| {
        ExperimentError::Mission {
            planner,
            seed,
            source,
        }
    })?;
    match frame_err {
        Some(e) => Err(e),
        None => Ok(log),
    }
}

/// Aggregate of one planner's missions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSummary {
    pub label: String,
    pub planner: PlannerKind,
    pub runs: usize,
    pub final_area_m2: f64,
    pub path_m: f64,
    pub steps: f64,
    pub episode_ms: f64,
}

/// One mission reduced to the numbers the reports use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionSummary {
    pub final_area_m2: f64,
    pub path_m: f64,
    pub steps: usize,
    pub episode_ms: f64,
}

impl From<&MissionLog> for MissionSummary {
    fn from(log: &MissionLog) -> Self {
        Self {
            final_area_m2: log.covered_area(),
            path_m: log.path_length(),
            steps: log.steps(),
            episode_ms: log.mean_planning_ms(),
        }
    }
}

impl PlannerSummary {
    /// Row name: the planner, prefixed by the run label when there is one.
    pub fn name(&self) -> String {
        if self.label.is_empty() {
            self.planner.to_string()
        } else {
            format!("{}/{}", self.label, self.planner)
        }
    }
}

pub fn summarize(label: &str, planner: PlannerKind, runs: &[MissionSummary]) -> PlannerSummary {
    let n = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&MissionSummary) -> f64| runs.iter().map(f).sum::<f64>() / n;
    PlannerSummary {
        label: label.to_string(),
        planner,
        runs: runs.len(),
        final_area_m2: mean(&|r| r.final_area_m2),
        path_m: mean(&|r| r.path_m),
        steps: mean(&|r| r.steps as f64),
        episode_ms: mean(&|r| r.episode_ms),
    }
}

/// Aligned per-planner table with the best entry of each metric flagged
/// and deltas against the first row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<PlannerSummary>,
    /// Row index of the best value for area (max), path, steps and episode
    /// time (min).
    pub best: [usize; 4],
}

pub const METRICS: [&str; 4] = ["final_area_m2", "path_m", "steps", "episode_ms"];

impl ComparisonReport {
    pub fn new(rows: Vec<PlannerSummary>) -> Self {
        let pick = |key: &dyn Fn(&PlannerSummary) -> f64, larger: bool| {
            let mut best = 0;
            for (i, r) in rows.iter().enumerate() {
                let (v, b) = (key(r), key(&rows[best]));
                if (larger && v > b) || (!larger && v < b) {
                    best = i;
                }
            }
            best
        };
        let best = [
            pick(&|r| r.final_area_m2, true),
            pick(&|r| r.path_m, false),
            pick(&|r| r.steps, false),
            pick(&|r| r.episode_ms, false),
        ];
        Self { rows, best }
    }

    fn values(r: &PlannerSummary) -> [f64; 4] {
        [r.final_area_m2, r.path_m, r.steps, r.episode_ms]
    }

    /// `row - first row` for each metric.
    pub fn deltas(&self, row: usize) -> [f64; 4] {
        let base = Self::values(&self.rows[0]);
        let v = Self::values(&self.rows[row]);
        [v[0] - base[0], v[1] - base[1], v[2] - base[2], v[3] - base[3]]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,planner,runs");
        for m in METRICS {
            let _ = write!(s, ",{m},{m}_best,{m}_delta");
        }
        s.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(s, "{},{},{}", r.label, r.planner, r.runs);
            let d = self.deltas(i);
            for (k, v) in Self::values(r).iter().enumerate() {
                let _ = write!(s, ",{v:.6},{},{:.6}", u8::from(self.best[k] == i), d[k]);
            }
            s.push('\n');
        }
        s
    }

    /// Human-readable table; `*` marks the best value per column.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:<24} {:>4} {:>14} {:>12} {:>10} {:>12}\n",
            "run", "n", "area [m2]", "path [m]", "steps", "episode [ms]"
        );
        for (i, r) in self.rows.iter().enumerate() {
            let v = Self::values(r);
            let cell = |k: usize, prec: usize| {
                let mark = if self.best[k] == i { "*" } else { " " };
                format!("{:.*}{mark}", prec, v[k])
            };
            let name = r.name();
            let _ = writeln!(
                s,
                "{:<24} {:>4} {:>14} {:>12} {:>10} {:>12}",
                name,
                r.runs,
                cell(0, 1),
                cell(1, 1),
                cell(2, 1),
                cell(3, 2)
            );
        }
        if self.rows.len() > 1 {
            s.push_str("\ndeltas against the first row\n");
            for i in 1..self.rows.len() {
                let d = self.deltas(i);
                let r = &self.rows[i];
                let _ = writeln!(
                    s,
                    "{:<24} area {:+.1} m2, path {:+.1} m, steps {:+.1}, episode {:+.2} ms",
                    r.name(),
                    d[0],
                    d[1],
                    d[2],
                    d[3]
                );
            }
        }
        s
    }
}

/// What a run directory records about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub map: String,
    pub map_sha256: String,
    pub planners: Vec<PlannerKind>,
    pub seeds: Vec<u64>,
    pub config: String,
}

pub const MANIFEST: &str = "manifest.json";

/// Outcome of [`run_experiment`].
#[derive(Debug)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub logs: Vec<MissionLog>,
    pub report: ComparisonReport,
}

/// Run the sweep a config describes and write the run directory: one CSV and
/// one trace per mission, `report.csv`, `report.txt`, the resolved config and
/// a manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    let grid = load_map(Path::new(&cfg.experiment.map))?;
    let mission = cfg.mission_config();
    for p in &cfg.experiment.planners {
        if let Some(lf) = p.lf_config() {
            lf.validate(mission.window, grid.cell_width())
                .map_err(|m| ConfigError::Invalid(format!("{p}: {m}")))?;
        }
    }
    let out = PathBuf::from(&cfg.experiment.out);
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let frames_dir = out.join("frames");
    if cfg.experiment.frames > 0 {
        fs::create_dir_all(&frames_dir).map_err(io_err(&frames_dir))?;
    }
    let frames = (cfg.experiment.frames > 0).then_some((frames_dir.as_path(), cfg.experiment.frames));
    let logs = run_sweep(&grid, &mission, &cfg.experiment.planners, &cfg.experiment.seeds, frames)?;

    let write = |name: &str, body: &str| {
        let path = out.join(name);
        fs::write(&path, body).map_err(io_err(&path))
    };
    for log in &logs {
        write(&log_file_name(log.planner, log.seed), &log.to_csv())?;
        write(&trace_file_name(log.planner, log.seed), &log.trace_jsonl())?;
    }
    let rows = cfg
        .experiment
        .planners
        .iter()
        .map(|&p| {
            let runs: Vec<MissionSummary> =
                logs.iter().filter(|l| l.planner == p).map(MissionSummary::from).collect();
            summarize("", p, &runs)
        })
        .collect();
    let report = ComparisonReport::new(rows);
    write("report.csv", &report.to_csv())?;
    write("report.txt", &report.to_table())?;
    write("config.toml", &cfg.to_text())?;
    let manifest = Manifest {
        map: cfg.experiment.map.clone(),
        map_sha256: map_digest(&grid),
        planners: cfg.experiment.planners.clone(),
        seeds: cfg.experiment.seeds.clone(),
        config: cfg.to_text(),
    };
    write(MANIFEST, &serde_json::to_string_pretty(&manifest).expect("serializable"))?;
    Ok(RunOutput {
        out_dir: out,
        logs,
        report,
    })
}

fn artifact(path: &Path, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Artifact {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Rebuild a mission summary from its CSV log and episode trace.
pub fn read_mission(dir: &Path, planner: PlannerKind, seed: u64) -> Result<MissionSummary, ExperimentError> {
    let csv_path = dir.join(log_file_name(planner, seed));
    let text = fs::read_to_string(&csv_path).map_err(io_err(&csv_path))?;
    let mut lines = text.lines();
    if lines.next() != Some(MissionLog::CSV_HEADER) {
        return Err(artifact(&csv_path, "unexpected header"));
    }
    let last = lines.last().ok_or_else(|| artifact(&csv_path, "no records"))?;
    let cols: Vec<&str> = last.split(',').collect();
    if cols.len() != 7 {
        return Err(artifact(&csv_path, "expected 7 columns"));
    }
    let num = |i: usize| -> Result<f64, ExperimentError> {
        cols[i].parse().map_err(|_| artifact(&csv_path, format!("bad number `{}`", cols[i])))
    };
    let steps = num(0)? as usize;
    let (path_m, final_area_m2) = (num(3)?, num(4)?);

    let trace_path = dir.join(trace_file_name(planner, seed));
    let trace = fs::read_to_string(&trace_path).map_err(io_err(&trace_path))?;
    let mut total = 0.0;
    let mut count = 0usize;
    for line in trace.lines().filter(|l| !l.trim().is_empty()) {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| artifact(&trace_path, e.to_string()))?;
        let ms = v
            .get("planning_ms")
            .and_then(|x| x.as_f64())
            .ok_or_else(|| artifact(&trace_path, "record without planning_ms"))?;
        total += ms;
        count += 1;
    }
    let episode_ms = if count == 0 { 0.0 } else { total / count as f64 };
    Ok(MissionSummary {
        final_area_m2,
        path_m,
        steps,
        episode_ms,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, ExperimentError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| artifact(&path, e.to_string()))
}

/// Compare completed run directories. Every directory must have been run
/// on the same map.
pub fn compare_runs(dirs: &[PathBuf]) -> Result<ComparisonReport, ExperimentError> {
    if dirs.is_empty() {
        return Err(ConfigError::Invalid("compare needs at least one run directory".into()).into());
    }
    let mut digests: BTreeMap<String, String> = BTreeMap::new();
    let mut rows = Vec::new();
    for dir in dirs {
        let manifest = read_manifest(dir)?;
        digests.insert(dir.display().to_string(), manifest.map_sha256.clone());
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        for &p in &manifest.planners {
            let runs = manifest
                .seeds
                .iter()
                .map(|&s| read_mission(dir, p, s))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(summarize(&label, p, &runs));
        }
    }
    let first = digests.values().next().cloned().unwrap_or_default();
    if digests.values().any(|d| *d != first) {
        let listing = digests
            .iter()
            .map(|(k, v)| format!("{k} {}", &v[..12.min(v.len())]))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(ExperimentError::MapMismatch(listing));
    }
    Ok(ComparisonReport::new(rows))
}
