//! Experiment orchestration: plans, reference solutions, per-cell CSV traces
//! and the run manifest.
//!
//! Plans are written and read as line-oriented `key=value` text. The same
//! format serves as the optional `--config` file and as the body of
//! `manifest.txt`, so a manifest can be fed back to rerun the plan. Keys
//! starting with `meta.` and lines starting with `#` are informational and
//! ignored when parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bounds::{self, BoundError};
use crate::data::{self, DataError, Dataset};
use crate::losses::{LossError, LossKind, LossSpec};
use crate::solver::{
    self, Init, Observer, OutputOption, Schedule, SolverConfig, SolverError, TraceRecord,
};

/// Gap a reference solve aims for.
pub const REFERENCE_TOL: f64 = 1e-10;
/// Epoch cap of a reference solve.
pub const REFERENCE_MAX_EPOCHS: u64 = 10_000;
/// Seed of the reference solve's random schedule.
pub const REFERENCE_SEED: u64 = 0x5dca_5eed;

/// CSV header of every trace file.
pub const CSV_HEADER: &str =
    "epoch,primal,dual,gap,primal_subopt,dual_subopt,bound,test_error,wall_seconds";

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

impl From<LossError> for Error {
    fn from(e: LossError) -> Self {
        Error::Config(e.to_string())
    }
}

impl Error {
    /// 2 for configuration problems, 3 for unreadable or unwritable files.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Solver(_) | Error::Bound(_) => 2,
            Error::Io { .. } | Error::Data(_) => 3,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Sdca,
    SdcaSgdInit,
    Sgd,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Sdca => "sdca",
            Algorithm::SdcaSgdInit => "sdca-sgd-init",
            Algorithm::Sgd => "sgd",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "sdca" => Ok(Algorithm::Sdca),
            "sdca-sgd-init" => Ok(Algorithm::SdcaSgdInit),
            "sgd" => Ok(Algorithm::Sgd),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// A fully specified experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub train_path: PathBuf,
    pub test_path: Option<PathBuf>,
    pub loss: LossSpec,
    pub lambdas: Vec<f64>,
    pub schedules: Vec<Schedule>,
    pub algorithms: Vec<Algorithm>,
    pub epochs: u64,
    pub seeds: Vec<u64>,
    pub gap_every: u64,
    pub stop_gap: Option<f64>,
    pub emit_bounds: bool,
    pub output_dir: PathBuf,
    pub normalize: bool,
    pub t0_fraction: f64,
    pub output: OutputOption,
    pub jobs: usize,
}

/// Partially specified plan settings, as read from flags or a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanSettings {
    values: BTreeMap<String, String>,
}

const PLAN_KEYS: &[&str] = &[
    "train",
    "test",
    "loss",
    "gamma",
    "lambda",
    "schedule",
    "algo",
    "epochs",
    "seed",
    "gap_every",
    "stop_gap",
    "emit_bounds",
    "out_dir",
    "normalize",
    "t0_fraction",
    "output",
    "jobs",
];

impl PlanSettings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key=value` lines. Blank lines, `#` comments and `meta.` keys
    /// are skipped; unknown keys are an error.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut settings = Self::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let key = key.trim();
            if key.starts_with("meta.") {
                continue;
            }
            if !PLAN_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            settings.set(key, value.trim());
        }
        Ok(settings)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `self` with every key of `overrides` replacing the existing value.
    pub fn overridden_by(mut self, overrides: &PlanSettings) -> Self {
        for (k, v) in &overrides.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    fn required(&self, key: &str) -> Result<&str, Error> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required setting {key:?}")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("bad value for {key}: {v:?}")))
            })
            .transpose()
    }

    fn list<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, Error>) -> Result<Option<Vec<T>>, Error> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(&parse)
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }

    pub fn into_plan(self) -> Result<ExperimentPlan, Error> {
        let kind: LossKind = self.required("loss")?.parse()?;
        let gamma = self.parsed::<f64>("gamma")?.unwrap_or(1.0);
        let loss = LossSpec::new(kind, gamma)?;
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number {s:?}")))
        };
        let lambdas = self
            .list("lambda", parse_f64)?
            .ok_or_else(|| Error::Config("missing required setting \"lambda\"".into()))?;
        let schedules = self
            .list("schedule", |s| {
                s.parse::<Schedule>().map_err(|e| Error::Config(e.to_string()))
            })?
            .unwrap_or_else(|| vec![Schedule::Random]);
        let algorithms = self
            .list("algo", Algorithm::parse)?
            .unwrap_or_else(|| vec![Algorithm::Sdca]);
        let seeds = self
            .list("seed", |s| {
                s.parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad seed {s:?}")))
            })?
            .unwrap_or_else(|| vec![0]);
        let stop_gap = match self.get("stop_gap") {
            None | Some("") | Some("none") => None,
            Some(v) => Some(parse_f64(v)?),
        };
        let output = self
            .get("output")
            .map(|s| s.parse::<OutputOption>().map_err(|e| Error::Config(e.to_string())))
            .transpose()?
            .unwrap_or(OutputOption::Average);
        let normalize = match self.get("normalize").unwrap_or("on") {
            "on" => true,
            "off" => false,
            other => return Err(Error::Config(format!("normalize must be on or off, got {other:?}"))),
        };
        let plan = ExperimentPlan {
            train_path: PathBuf::from(self.required("train")?),
            test_path: self.get("test").filter(|s| !s.is_empty()).map(PathBuf::from),
            loss,
            lambdas,
            schedules,
            algorithms,
            epochs: self.parsed("epochs")?.unwrap_or(10),
            seeds,
            gap_every: self.parsed("gap_every")?.unwrap_or(1),
            stop_gap,
            emit_bounds: self.parsed("emit_bounds")?.unwrap_or(false),
            output_dir: PathBuf::from(self.get("out_dir").unwrap_or("out")),
            normalize,
            t0_fraction: self.parsed("t0_fraction")?.unwrap_or(0.5),
            output,
            jobs: self.parsed("jobs")?.unwrap_or(1),
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), Error> {
        if self.lambdas.is_empty() || self.seeds.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config(
                "lambdas, seeds and algorithms must be non-empty".into(),
            ));
        }
        if self.schedules.is_empty() {
            return Err(Error::Config("schedules must be non-empty".into()));
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Config("every lambda must be positive".into()));
        }
        if self.epochs == 0 || self.gap_every == 0 || self.jobs == 0 {
            return Err(Error::Config("epochs, gap_every and jobs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.t0_fraction) {
            return Err(Error::Config("t0_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn to_settings(&self) -> PlanSettings {
        let mut s = PlanSettings::new();
        s.set("train", self.train_path.display().to_string());
        if let Some(t) = &self.test_path {
            s.set("test", t.display().to_string());
        }
        s.set("loss", self.loss.kind().as_str());
        s.set("gamma", self.loss.gamma().to_string());
        s.set("lambda", join(&self.lambdas, |l| l.to_string()));
        s.set("schedule", join(&self.schedules, |x| x.as_str().to_string()));
        s.set("algo", join(&self.algorithms, |a| a.as_str().to_string()));
        s.set("epochs", self.epochs.to_string());
        s.set("seed", join(&self.seeds, |x| x.to_string()));
        s.set("gap_every", self.gap_every.to_string());
        s.set(
            "stop_gap",
            self.stop_gap.map_or("none".to_string(), |g| g.to_string()),
        );
        s.set("emit_bounds", self.emit_bounds.to_string());
        s.set("out_dir", self.output_dir.display().to_string());
        s.set("normalize", if self.normalize { "on" } else { "off" });
        s.set("t0_fraction", self.t0_fraction.to_string());
        s.set("output", self.output.as_str());
        s.set("jobs", self.jobs.to_string());
        s
    }

    /// `key=value` lines in a fixed key order.
    pub fn to_kv(&self) -> String {
        let s = self.to_settings();
        let mut out = String::new();
        for key in PLAN_KEYS {
            if let Some(v) = s.get(key) {
                writeln!(out, "{key}={v}").unwrap();
            }
        }
        out
    }

    /// The `(algorithm, schedule)` pairs to run. SGD samples with replacement
    /// and has no schedule, so it runs once under the label `random`.
    pub fn algorithm_schedules(&self) -> Vec<(Algorithm, Schedule)> {
        let mut pairs = Vec::new();
        for &algo in &self.algorithms {
            if algo == Algorithm::Sgd {
                pairs.push((algo, Schedule::Random));
            } else {
                pairs.extend(self.schedules.iter().map(|&s| (algo, s)));
            }
        }
        pairs
    }
}

/// A high-accuracy solution used to turn objective values into
/// suboptimalities.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub lambda: f64,
    pub loss: LossSpec,
    pub w_ref: Vec<f64>,
    pub dual_ref: f64,
    pub primal_ref: f64,
    pub gap_achieved: f64,
    pub epochs: u64,
    /// True when the epoch cap was hit before the target gap.
    pub degraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub tol: f64,
    pub max_epochs: u64,
    pub seed: u64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            tol: REFERENCE_TOL,
            max_epochs: REFERENCE_MAX_EPOCHS,
            seed: REFERENCE_SEED,
        }
    }
}

/// Runs random-schedule SDCA until the gap reaches `1e-10` or `10^4` epochs.
pub fn solve_reference(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
) -> Result<ReferenceSolution, Error> {
    solve_reference_with(loss, lambda, dataset, ReferenceOptions::default())
}

pub fn solve_reference_with(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    opts: ReferenceOptions,
) -> Result<ReferenceSolution, Error> {
    let config = SolverConfig {
        epochs: opts.max_epochs,
        output: OutputOption::Final,
        stop_gap: Some(opts.tol),
        seed: opts.seed,
        ..SolverConfig::new(*loss, lambda)
    };
    let run = solver::run_sdca(&config, dataset)?;
    let eval = solver::evaluate(loss, lambda, dataset, &run.final_state.alpha)?;
    let degraded = !(eval.gap <= opts.tol);
    if degraded {
        log::warn!(
            "reference solve for lambda={lambda} stopped at gap {:e} after {} epochs",
            eval.gap,
            run.steps / dataset.n() as u64
        );
    }
    Ok(ReferenceSolution {
        lambda,
        loss: *loss,
        w_ref: eval.w,
        dual_ref: eval.dual,
        primal_ref: eval.primal,
        gap_achieved: eval.gap,
        epochs: run.steps / dataset.n() as u64,
        degraded,
    })
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn reference_file_name(loss: &LossSpec, lambda: f64, digest: &str) -> String {
    format!(
        "reference_{}_gamma{}_lam{}_{}.txt",
        loss.kind().as_str(),
        loss.gamma(),
        lambda,
        &digest[..digest.len().min(16)]
    )
}

impl ReferenceSolution {
    fn to_text(&self, digest: &str) -> String {
        let mut out = String::new();
        writeln!(out, "loss={}", self.loss.kind().as_str()).unwrap();
        writeln!(out, "gamma={}", self.loss.gamma()).unwrap();
        writeln!(out, "lambda={}", self.lambda).unwrap();
        writeln!(out, "digest={digest}").unwrap();
        writeln!(out, "primal={}", fmt_f64(self.primal_ref)).unwrap();
        writeln!(out, "dual={}", fmt_f64(self.dual_ref)).unwrap();
        writeln!(out, "gap={}", fmt_f64(self.gap_achieved)).unwrap();
        writeln!(out, "epochs={}", self.epochs).unwrap();
        writeln!(out, "degraded={}", self.degraded).unwrap();
        writeln!(out, "w={}", join(&self.w_ref, |v| fmt_f64(*v))).unwrap();
        out
    }

    /// Parses a cache file; `None` if it does not match the requested key.
    fn from_text(text: &str, loss: &LossSpec, lambda: f64, digest: &str) -> Option<Self> {
        let kv: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once('=')).collect();
        let f = |k: &str| kv.get(k)?.parse::<f64>().ok();
        if kv.get("loss") != Some(&loss.kind().as_str())
            || f("gamma")? != loss.gamma()
            || f("lambda")? != lambda
            || kv.get("digest") != Some(&digest)
        {
            return None;
        }
        let w_ref = match kv.get("w")? {
            &"" => Vec::new(),
            s => s
                .split(',')
                .map(|v| v.parse::<f64>().ok())
                .collect::<Option<Vec<_>>>()?,
        };
        Some(Self {
            lambda,
            loss: *loss,
            w_ref,
            dual_ref: f("dual")?,
            primal_ref: f("primal")?,
            gap_achieved: f("gap")?,
            epochs: kv.get("epochs")?.parse().ok()?,
            degraded: kv.get("degraded")?.parse().ok()?,
        })
    }
}

/// A reference solution together with where it came from.
#[derive(Debug, Clone)]
pub struct CachedReference {
    pub solution: ReferenceSolution,
    pub path: PathBuf,
    pub from_cache: bool,
}

/// Loads the reference for `(digest, loss, gamma, lambda)` from `dir`, or
/// solves and stores it.
pub fn solve_reference_cached(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    digest: &str,
    dir: &Path,
    opts: ReferenceOptions,
) -> Result<CachedReference, Error> {
    let path = dir.join(reference_file_name(loss, lambda, digest));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Some(solution) = ReferenceSolution::from_text(&text, loss, lambda, digest) {
            if solution.w_ref.len() == dataset.dim() {
                return Ok(CachedReference {
                    solution,
                    path,
                    from_cache: true,
                });
            }
        }
    }
    let solution = solve_reference_with(loss, lambda, dataset, opts)?;
    fs::write(&path, solution.to_text(digest)).map_err(|e| Error::io(&path, e))?;
    Ok(CachedReference {
        solution,
        path,
        from_cache: false,
    })
}

/// Fraction of examples with `sign(w.x) != y`; a zero score counts as an
/// error. Features beyond the length of `w` contribute nothing.
pub fn evaluate_test_error(w: &[f64], test: &Dataset) -> f64 {
    let wrong = test
        .examples()
        .iter()
        .filter(|ex| {
            let score: f64 = ex
                .features()
                .iter()
                .filter(|&(j, _)| j < w.len())
                .map(|(j, v)| v * w[j])
                .sum();
            score == 0.0 || score.signum() != ex.label().signum()
        })
        .count();
    wrong as f64 / test.n() as f64
}

/// SHA-256 of a file's bytes, hex encoded.
pub fn file_digest(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Training (and optional test) data prepared for a run.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub train: Dataset,
    pub test: Option<Dataset>,
    /// The factor divided out of every feature value (1 if none).
    pub scale: f64,
    pub digest: String,
}

/// Reads the training file (and test file), widens both to a common
/// dimension and, if asked, scales both by the training set's max norm.
pub fn load_data(train: &Path, test: Option<&Path>, normalize: bool) -> Result<LoadedData, Error> {
    let digest = file_digest(train)?;
    let train_ds = data::read_svmlight(train)?;
    let test_ds = test.map(data::read_svmlight).transpose()?;
    let dim = train_ds
        .dim()
        .max(test_ds.as_ref().map_or(0, |t| t.dim()));
    let mut train_ds = train_ds.widened(dim);
    let mut test_ds = test_ds.map(|t| t.widened(dim));
    let mut scale = 1.0;
    if normalize {
        let (t, s) = data::normalize_to_unit_ball(train_ds);
        train_ds = t;
        scale = s;
        if s != 1.0 {
            test_ds = test_ds.map(|t| t.scaled_down(s));
        }
    }
    Ok(LoadedData {
        train: train_ds,
        test: test_ds,
        scale,
        digest,
    })
}

/// Fills the optional trace columns of one cell.
struct CellObserver<'a> {
    reference: Option<&'a ReferenceSolution>,
    test: Option<&'a Dataset>,
    bound: Option<Box<dyn Fn(u64) -> Option<f64> + Send + Sync + 'a>>,
}

impl Observer for CellObserver<'_> {
    fn on_epoch(&mut self, record: &mut TraceRecord, w: &[f64]) {
        if let Some(r) = self.reference {
            record.primal_subopt = Some(record.primal - r.primal_ref);
            record.dual_subopt = record.dual.map(|d| r.dual_ref - d);
        }
        if let Some(test) = self.test {
            record.test_error = Some(evaluate_test_error(w, test));
        }
        if let Some(bound) = &self.bound {
            record.bound_value = bound(record.epoch);
        }
    }
}

/// Per-epoch theoretical gap overlay for an algorithm, if one applies.
fn bound_overlay<'a>(
    algo: Algorithm,
    loss: &LossSpec,
    lambda: f64,
    n: usize,
) -> Option<Box<dyn Fn(u64) -> Option<f64> + Send + Sync + 'a>> {
    if algo == Algorithm::Sgd {
        return None;
    }
    let steps = move |epoch: u64| epoch * n as u64;
    if let Some(smooth) = loss.smoothness() {
        let gamma = 1.0 / smooth;
        return Some(Box::new(move |e| Some(bounds::thm2_gap_at(n, lambda, gamma, steps(e)))));
    }
    let l = loss.lipschitz()?;
    let hinge = loss.kind() == LossKind::Hinge;
    Some(match algo {
        Algorithm::SdcaSgdInit => Box::new(move |e| bounds::thm4_gap_at(n, lambda, l, hinge, steps(e))),
        _ => Box::new(move |e| bounds::thm1_gap_at(n, lambda, l, hinge, steps(e))),
    })
}

pub fn trace_to_csv(trace: &[TraceRecord]) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.epoch,
            fmt_f64(r.primal),
            opt(r.dual),
            opt(r.gap),
            opt(r.primal_subopt),
            opt(r.dual_subopt),
            opt(r.bound_value),
            opt(r.test_error),
            fmt_f64(r.wall_seconds),
        )
        .unwrap();
    }
    out
}

pub fn cell_file_name(algo: Algorithm, schedule: Schedule, lambda: f64, seed: u64) -> String {
    format!("{}_{}_lam{}_seed{}.csv", algo.as_str(), schedule.as_str(), lambda, seed)
}

/// Solver settings for one cell of a plan.
pub fn cell_config(plan: &ExperimentPlan, algo: Algorithm, schedule: Schedule, lambda: f64, seed: u64) -> SolverConfig {
    SolverConfig {
        schedule,
        init: if algo == Algorithm::SdcaSgdInit {
            Init::ModifiedSgd
        } else {
            Init::Zero
        },
        epochs: plan.epochs,
        t0_fraction: plan.t0_fraction,
        output: plan.output,
        stop_gap: plan.stop_gap,
        seed,
        gap_every: plan.gap_every,
        ..SolverConfig::new(plan.loss, lambda)
    }
}

/// Runs one cell and returns its trace.
pub fn run_cell(
    config: &SolverConfig,
    algo: Algorithm,
    data: &LoadedData,
    reference: Option<&ReferenceSolution>,
    emit_bounds: bool,
) -> Result<Vec<TraceRecord>, Error> {
    let mut observer = CellObserver {
        reference,
        test: data.test.as_ref(),
        bound: if emit_bounds {
            bound_overlay(algo, &config.loss, config.lambda, data.train.n())
        } else {
            None
        },
    };
    let trace = match algo {
        Algorithm::Sgd => solver::run_sgd_baseline_observed(config, &data.train, &mut observer)?.trace,
        Algorithm::Sdca | Algorithm::SdcaSgdInit => {
            solver::run_observed(config, &data.train, &mut observer)?.trace
        }
    };
    Ok(trace)
}

/// What [`run_plan`] wrote.
#[derive(Debug, Clone)]
pub struct PlanReport {
    pub csv_files: Vec<PathBuf>,
    pub reference_files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub scale: f64,
}

/// Runs every `(algorithm, schedule, lambda, seed)` cell of the plan,
/// writing one CSV per cell, one reference file per lambda and
/// `manifest.txt`.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanReport, Error> {
    run_plan_with(plan, ReferenceOptions::default())
}

pub fn run_plan_with(plan: &ExperimentPlan, ref_opts: ReferenceOptions) -> Result<PlanReport, Error> {
    plan.validate()?;
    let data = load_data(&plan.train_path, plan.test_path.as_deref(), plan.normalize)?;
    fs::create_dir_all(&plan.output_dir).map_err(|e| Error::io(&plan.output_dir, e))?;

    let mut references = Vec::with_capacity(plan.lambdas.len());
    for &lambda in &plan.lambdas {
        let r = solve_reference_cached(&plan.loss, lambda, &data.train, &data.digest, &plan.output_dir, ref_opts)?;
        references.push(r);
    }

    let mut cells = Vec::new();
    for (algo, schedule) in plan.algorithm_schedules() {
        for (li, &lambda) in plan.lambdas.iter().enumerate() {
            for &seed in &plan.seeds {
                cells.push((algo, schedule, li, lambda, seed));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let csv_files = pool.install(|| {
        cells
            .par_iter()
            .map(|&(algo, schedule, li, lambda, seed)| {
                let config = cell_config(plan, algo, schedule, lambda, seed);
                let trace = run_cell(&config, algo, &data, Some(&references[li].solution), plan.emit_bounds)?;
                let path = plan.output_dir.join(cell_file_name(algo, schedule, lambda, seed));
                fs::write(&path, trace_to_csv(&trace)).map_err(|e| Error::io(&path, e))?;
                Ok(path)
            })
            .collect::<Result<Vec<_>, Error>>()
    })?;

    let manifest = plan.output_dir.join("manifest.txt");
    fs::write(&manifest, manifest_text(plan, &data, &references)).map_err(|e| Error::io(&manifest, e))?;

    Ok(PlanReport {
        csv_files,
        reference_files: references.into_iter().map(|r| r.path).collect(),
        manifest,
        scale: data.scale,
    })
}

fn manifest_text(plan: &ExperimentPlan, data: &LoadedData, references: &[CachedReference]) -> String {
    let mut out = String::new();
    writeln!(out, "# sdca experiment manifest").unwrap();
    out.push_str(&plan.to_kv());
    writeln!(out, "meta.version={}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "meta.train_sha256={}", data.digest).unwrap();
    writeln!(out, "meta.n={}", data.train.n()).unwrap();
    writeln!(out, "meta.dim={}", data.train.dim()).unwrap();
    writeln!(out, "meta.normalization_scale={}", data.scale).unwrap();
    for r in references {
        let s = &r.solution;
        let name = r.path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        writeln!(
            out,
            "meta.reference.lam{}={} gap={} epochs={} degraded={}",
            s.lambda,
            name,
            fmt_f64(s.gap_achieved),
            s.epochs,
            s.degraded
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Example, SparseVector};

    fn ds(rows: &[(&[(usize, f64)], f64)]) -> Dataset {
        Dataset::new(
            rows.iter()
                .map(|(e, y)| Example::new(SparseVector::new(e.to_vec()).unwrap(), *y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn test_error_conventions() {
        let d = ds(&[(&[(0, 1.0)], 1.0), (&[(0, -1.0)], -1.0)]);
        assert_eq!(evaluate_test_error(&[1.0], &d), 0.0);
        assert_eq!(evaluate_test_error(&[0.0], &d), 1.0);
        assert_eq!(evaluate_test_error(&[-1.0], &d), 1.0);
        // features past w are ignored
        let d = ds(&[(&[(0, 1.0), (5, 3.0)], 1.0)]);
        assert_eq!(evaluate_test_error(&[1.0], &d), 0.0);
    }

    #[test]
    fn settings_reject_unknown_keys() {
        assert!(PlanSettings::parse("bogus=1\n").is_err());
        assert!(PlanSettings::parse("loss hinge\n").is_err());
        let s = PlanSettings::parse("# c\n\nmeta.x=1\nloss=hinge\n").unwrap();
        assert_eq!(s.get("loss"), Some("hinge"));
        assert_eq!(s.get("meta.x"), None);
    }

    #[test]
    fn flags_override_file() {
        let file = PlanSettings::parse("loss=hinge\nlambda=0.1\n").unwrap();
        let mut flags = PlanSettings::new();
        flags.set("lambda", "0.5");
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.get("lambda"), Some("0.5"));
        assert_eq!(merged.get("loss"), Some("hinge"));
    }

    #[test]
    fn plan_kv_round_trip() {
        let text = "train=a.txt\ntest=b.txt\nloss=smoothed-hinge\ngamma=0.5\nlambda=0.001,0.0001\n\
                    schedule=random,cyclic\nalgo=sdca,sgd\nepochs=7\nseed=1,2,3\ngap_every=2\n\
                    stop_gap=0.000001\nemit_bounds=true\nout_dir=o\nnormalize=off\nt0_fraction=0.25\n\
                    output=final\njobs=3\n";
        let plan = PlanSettings::parse(text).unwrap().into_plan().unwrap();
        let again = PlanSettings::parse(&plan.to_kv()).unwrap().into_plan().unwrap();
        assert_eq!(plan, again);
        assert_eq!(plan.lambdas, vec![1e-3, 1e-4]);
        assert_eq!(plan.stop_gap, Some(1e-6));
    }

    #[test]
    fn plan_validation() {
        let base = "train=a\nloss=hinge\nlambda=0.1\n";
        assert!(PlanSettings::parse(base).unwrap().into_plan().is_ok());
        assert!(PlanSettings::parse("train=a\nloss=hinge\n").unwrap().into_plan().is_err());
        assert!(PlanSettings::parse(&format!("{base}epochs=0\n")).unwrap().into_plan().is_err());
        assert!(PlanSettings::parse(&format!("{base}seed=\n")).unwrap().into_plan().is_err());
        assert!(PlanSettings::parse("train=a\nloss=smoothed-hinge\ngamma=0\nlambda=1\n")
            .unwrap()
            .into_plan()
            .is_err());
    }

    #[test]
    fn sgd_runs_once_per_lambda_seed() {
        let plan = PlanSettings::parse("train=a\nloss=hinge\nlambda=0.1\nschedule=random,perm,cyclic\nalgo=sdca,sgd\n")
            .unwrap()
            .into_plan()
            .unwrap();
        assert_eq!(plan.algorithm_schedules().len(), 4);
    }

    #[test]
    fn reference_text_round_trip() {
        let r = ReferenceSolution {
            lambda: 0.01,
            loss: LossSpec::hinge(),
            w_ref: vec![0.1, -1.0 / 3.0],
            dual_ref: 0.25,
            primal_ref: 0.25 + 1e-12,
            gap_achieved: 1e-12,
            epochs: 4,
            degraded: false,
        };
        let text = r.to_text("abc");
        assert_eq!(ReferenceSolution::from_text(&text, &LossSpec::hinge(), 0.01, "abc"), Some(r));
        assert_eq!(ReferenceSolution::from_text(&text, &LossSpec::hinge(), 0.02, "abc"), None);
        assert_eq!(ReferenceSolution::from_text(&text, &LossSpec::hinge(), 0.01, "abd"), None);
    }
}
