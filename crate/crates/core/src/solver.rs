//! Stochastic dual coordinate ascent.
//!
//! The primal problem is `P(w) = (1/n) sum_i phi_i(w.x_i) + (lambda/2)||w||^2`
//! and the dual is `D(alpha) = (1/n) sum_i -phi_i*(-alpha_i) - (lambda/2)||w(alpha)||^2`
//! with `w(alpha) = (1/(lambda n)) sum_i alpha_i x_i`. Each SDCA step picks one
//! example and maximizes `D` exactly along its coordinate.
//!
//! Randomness comes from one seed split into independent ChaCha streams (see
//! [`streams`]), so a run is a pure function of `(config, dataset)`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::Dataset;
use crate::losses::{CoordinateProblem, LossError, LossSpec};

/// Incremental `w` is rebuilt from `alpha` when it drifts further than this.
pub const W_DRIFT_TOL: f64 = 1e-8;

/// Stream ids used with [`substream`].
pub mod streams {
    /// Uniform index draws of the random schedule.
    pub const INDEX: u64 = 0;
    /// Per-epoch permutations, and the single permutation of the cyclic schedule.
    pub const PERMUTATION: u64 = 1;
    /// The iterate chosen by the random output option.
    pub const OUTPUT: u64 = 2;
    /// The shuffle applied before the Modified-SGD pass.
    pub const SGD_SHUFFLE: u64 = 3;
    /// Index draws of the plain SGD baseline.
    pub const SGD_BASELINE: u64 = 4;
}

/// The generator for one independent substream of `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("example {index} has label {label}; {loss} loss needs labels in {{-1, +1}}")]
    InvalidLabel {
        index: usize,
        label: f64,
        loss: String,
    },
    #[error("dual variable {index} = {alpha} is infeasible")]
    InfeasibleDual { index: usize, alpha: f64 },
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    /// Indices drawn uniformly with replacement.
    Random,
    /// A fresh random permutation every epoch.
    Permutation,
    /// One random permutation, reused every epoch.
    Cyclic,
}

impl Schedule {
    pub fn as_str(self) -> &'static str {
        match self {
            Schedule::Random => "random",
            Schedule::Permutation => "perm",
            Schedule::Cyclic => "cyclic",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schedule {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Schedule::Random),
            "perm" | "permutation" => Ok(Schedule::Permutation),
            "cyclic" => Ok(Schedule::Cyclic),
            other => Err(SolverError::Config(format!("unknown schedule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zero,
    ModifiedSgd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputOption {
    /// Average of `alpha^(t-1)` over `t in (T0, T]`.
    Average,
    /// The iterate after a uniformly drawn step `t in (T0, T]`.
    RandomIterate,
    /// The last iterate.
    Final,
}

impl OutputOption {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputOption::Average => "average",
            OutputOption::RandomIterate => "random",
            OutputOption::Final => "final",
        }
    }
}

impl FromStr for OutputOption {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(OutputOption::Average),
            "random" => Ok(OutputOption::RandomIterate),
            "final" => Ok(OutputOption::Final),
            other => Err(SolverError::Config(format!("unknown output option {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub loss: LossSpec,
    pub lambda: f64,
    pub schedule: Schedule,
    pub init: Init,
    /// Total steps are `epochs * n` unless `max_steps` is set.
    pub epochs: u64,
    /// `T0 = floor(t0_fraction * T)` unless `t0_steps` is set.
    pub t0_fraction: f64,
    pub output: OutputOption,
    /// Stop at the first evaluation whose duality gap is at most this.
    pub stop_gap: Option<f64>,
    pub seed: u64,
    /// Evaluate the duality gap every this many epochs.
    pub gap_every: u64,
    pub max_steps: Option<u64>,
    pub t0_steps: Option<u64>,
}

impl SolverConfig {
    pub fn new(loss: LossSpec, lambda: f64) -> Self {
        Self {
            loss,
            lambda,
            schedule: Schedule::Random,
            init: Init::Zero,
            epochs: 10,
            t0_fraction: 0.5,
            output: OutputOption::Average,
            stop_gap: None,
            seed: 0,
            gap_every: 1,
            max_steps: None,
            t0_steps: None,
        }
    }

    pub fn total_steps(&self, n: usize) -> u64 {
        self.max_steps.unwrap_or(self.epochs * n as u64)
    }

    pub fn t0(&self, n: usize) -> u64 {
        self.t0_steps
            .unwrap_or_else(|| (self.t0_fraction * self.total_steps(n) as f64).floor() as u64)
    }

    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::Config(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.t0_fraction) {
            return bad(format!("t0_fraction must be in [0, 1), got {}", self.t0_fraction));
        }
        if self.gap_every == 0 {
            return bad("gap_every must be at least 1".into());
        }
        if self.max_steps == Some(0) {
            return bad("max_steps must be at least 1".into());
        }
        if let Some(g) = self.stop_gap {
            if g.is_nan() {
                return bad("stop_gap is NaN".into());
            }
        }
        if self.t0(n) >= self.total_steps(n) {
            return bad(format!(
                "T0 = {} leaves no averaging window before T = {}",
                self.t0(n),
                self.total_steps(n)
            ));
        }
        Ok(())
    }
}

/// Dual iterate and the incrementally maintained primal `w(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub alpha: Vec<f64>,
    pub w: Vec<f64>,
    /// Number of SDCA steps taken.
    pub t: u64,
}

impl SolverState {
    pub fn zeros(dataset: &Dataset) -> Self {
        Self {
            alpha: vec![0.0; dataset.n()],
            w: vec![0.0; dataset.dim()],
            t: 0,
        }
    }

    pub fn from_alpha(lambda: f64, dataset: &Dataset, alpha: Vec<f64>) -> Self {
        let w = w_of_alpha(lambda, dataset, &alpha);
        Self { alpha, w, t: 0 }
    }

    /// Largest absolute coordinate difference between `w` and `w(alpha)`.
    pub fn drift(&self, lambda: f64, dataset: &Dataset) -> f64 {
        max_abs_diff(&self.w, &w_of_alpha(lambda, dataset, &self.alpha))
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub epoch: u64,
    pub primal: f64,
    /// Absent for the SGD baseline, which has no dual iterate.
    pub dual: Option<f64>,
    pub gap: Option<f64>,
    pub primal_subopt: Option<f64>,
    pub dual_subopt: Option<f64>,
    pub bound_value: Option<f64>,
    pub test_error: Option<f64>,
    pub wall_seconds: f64,
}

impl TraceRecord {
    fn new(epoch: u64, primal: f64, dual: Option<f64>, wall_seconds: f64) -> Self {
        Self {
            epoch,
            primal,
            dual,
            gap: dual.map(|d| primal - d),
            primal_subopt: None,
            dual_subopt: None,
            bound_value: None,
            test_error: None,
            wall_seconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub index: usize,
    pub delta: f64,
    /// Exact change of the dual objective caused by this step.
    pub dual_increase: f64,
}

/// Hooks into a running solver. Both methods default to no-ops.
pub trait Observer {
    fn on_step(&mut self, _outcome: &StepOutcome, _state: &SolverState) {}

    /// Called for every trace row before it is stored; `w` is the primal
    /// point the row was evaluated at. Implementations may fill the optional
    /// columns.
    fn on_epoch(&mut self, _record: &mut TraceRecord, _w: &[f64]) {}
}

pub struct NoObserver;

impl Observer for NoObserver {}

/// `(1/n) sum phi_i(w.x_i) + (lambda/2)||w||^2`.
pub fn primal_objective(loss: &LossSpec, lambda: f64, dataset: &Dataset, w: &[f64]) -> f64 {
    assert_eq!(w.len(), dataset.dim(), "w must have length dataset.dim()");
    let n = dataset.n() as f64;
    let loss_sum: f64 = dataset
        .examples()
        .iter()
        .map(|ex| loss.eval_primal(ex.features().dot_dense(w), ex.label()))
        .sum();
    loss_sum / n + 0.5 * lambda * norm_sq(w)
}

/// `(1/n) sum -phi_i*(-alpha_i) - (lambda/2)||w(alpha)||^2`.
pub fn dual_objective(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    alpha: &[f64],
) -> Result<f64, SolverError> {
    check_len(dataset.n(), alpha.len())?;
    let w = w_of_alpha(lambda, dataset, alpha);
    dual_with_w(loss, lambda, dataset, alpha, &w)
}

fn dual_with_w(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    alpha: &[f64],
    w: &[f64],
) -> Result<f64, SolverError> {
    let n = dataset.n() as f64;
    let mut conj_sum = 0.0;
    for (index, (ex, &a)) in dataset.examples().iter().zip(alpha).enumerate() {
        conj_sum -= loss
            .eval_conjugate(a, ex.label())
            .ok_or(SolverError::InfeasibleDual { index, alpha: a })?;
    }
    Ok(conj_sum / n - 0.5 * lambda * norm_sq(w))
}

/// `(1/(lambda n)) sum alpha_i x_i`.
pub fn w_of_alpha(lambda: f64, dataset: &Dataset, alpha: &[f64]) -> Vec<f64> {
    assert_eq!(alpha.len(), dataset.n(), "alpha must have length n");
    let scale = 1.0 / (lambda * dataset.n() as f64);
    let mut w = vec![0.0; dataset.dim()];
    for (ex, &a) in dataset.examples().iter().zip(alpha) {
        if a != 0.0 {
            ex.features().add_scaled_to(a * scale, &mut w);
        }
    }
    w
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn check_len(expected: usize, got: usize) -> Result<(), SolverError> {
    if expected == got {
        Ok(())
    } else {
        Err(SolverError::LengthMismatch { expected, got })
    }
}

/// Primal, dual and gap at the consistent pair `(w(alpha), alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub w: Vec<f64>,
}

pub fn evaluate(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    alpha: &[f64],
) -> Result<Evaluation, SolverError> {
    check_len(dataset.n(), alpha.len())?;
    let w = w_of_alpha(lambda, dataset, alpha);
    let primal = primal_objective(loss, lambda, dataset, &w);
    let dual = dual_with_w(loss, lambda, dataset, alpha, &w)?;
    Ok(Evaluation {
        primal,
        dual,
        gap: primal - dual,
        w,
    })
}

/// `P(w(alpha)) - D(alpha)`, always at `w` rebuilt from `alpha`.
pub fn duality_gap(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    state: &SolverState,
) -> Result<f64, SolverError> {
    Ok(evaluate(loss, lambda, dataset, &state.alpha)?.gap)
}

/// One exact coordinate-ascent step on example `i`.
pub fn sdca_step(
    state: &mut SolverState,
    i: usize,
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
) -> Result<StepOutcome, SolverError> {
    let ex = dataset.example(i);
    let n = dataset.n() as f64;
    let lambda_n = lambda * n;
    let old = state.alpha[i];
    let problem = CoordinateProblem {
        alpha: old,
        wx: ex.features().dot_dense(&state.w),
        norm_sq: ex.norm_sq(),
        lambda_n,
        label: ex.label(),
    };
    let new = loss.coordinate_maximizer(&problem)?;
    let delta = new - old;
    let conj = |a: f64| {
        loss.eval_conjugate(a, ex.label())
            .ok_or(SolverError::InfeasibleDual { index: i, alpha: a })
    };
    let dual_increase = (conj(old)? - conj(new)?
        - delta * problem.wx
        - delta * delta * problem.norm_sq / (2.0 * lambda_n))
        / n;
    if delta != 0.0 {
        ex.features().add_scaled_to(delta / lambda_n, &mut state.w);
        state.alpha[i] = new;
    }
    state.t += 1;
    Ok(StepOutcome {
        index: i,
        delta,
        dual_increase,
    })
}

fn check_labels(loss: &LossSpec, dataset: &Dataset) -> Result<(), SolverError> {
    if loss.kind().is_classification() {
        for (index, y) in dataset.labels().enumerate() {
            if y != 1.0 && y != -1.0 {
                return Err(SolverError::InvalidLabel {
                    index,
                    label: y,
                    loss: loss.kind().to_string(),
                });
            }
        }
    }
    Ok(())
}

fn warn_if_unnormalized(dataset: &Dataset) {
    if dataset.max_norm() > 1.0 + 1e-12 {
        log::warn!(
            "max example norm is {} > 1; convergence bounds assume ||x_i|| <= 1",
            dataset.max_norm()
        );
    }
}

enum IndexSource {
    Random(ChaCha8Rng),
    Permutation {
        rng: ChaCha8Rng,
        order: Vec<usize>,
        pos: usize,
    },
    Cyclic {
        order: Vec<usize>,
        pos: usize,
    },
}

impl IndexSource {
    fn new(schedule: Schedule, n: usize, seed: u64) -> Self {
        match schedule {
            Schedule::Random => IndexSource::Random(substream(seed, streams::INDEX)),
            Schedule::Permutation => IndexSource::Permutation {
                rng: substream(seed, streams::PERMUTATION),
                order: (0..n).collect(),
                pos: 0,
            },
            Schedule::Cyclic => {
                let mut rng = substream(seed, streams::PERMUTATION);
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                IndexSource::Cyclic { order, pos: 0 }
            }
        }
    }

    fn next(&mut self, n: usize) -> usize {
        match self {
            IndexSource::Random(rng) => rng.random_range(0..n),
            IndexSource::Permutation { rng, order, pos } => {
                if *pos == 0 {
                    order.shuffle(rng);
                }
                let i = order[*pos];
                *pos = (*pos + 1) % order.len();
                i
            }
            IndexSource::Cyclic { order, pos } => {
                let i = order[*pos];
                *pos = (*pos + 1) % order.len();
                i
            }
        }
    }
}

/// Lazily accumulates `sum_{t in (T0, T]} alpha^(t-1)` without touching every
/// coordinate on every step: each coordinate remembers the first step at
/// which its current value started counting.
struct Averager {
    t0: u64,
    sum: Vec<f64>,
    since: Vec<u64>,
}

impl Averager {
    fn new(n: usize, t0: u64) -> Self {
        Self {
            t0,
            sum: vec![0.0; n],
            since: vec![t0 + 1; n],
        }
    }

    /// Coordinate `i` is about to change at step `step`; its old value is
    /// `alpha^(step-1)_i` and counts for every `t` in `[since_i, step]`.
    fn before_change(&mut self, i: usize, old: f64, step: u64) {
        let start = self.since[i];
        if step >= start {
            self.sum[i] += old * (step - start + 1) as f64;
        }
        self.since[i] = (step + 1).max(self.t0 + 1);
    }

    fn finish(mut self, alpha: &[f64], last_step: u64) -> Vec<f64> {
        let window = (last_step - self.t0) as f64;
        for (i, &a) in alpha.iter().enumerate() {
            let start = self.since[i];
            if last_step >= start {
                self.sum[i] += a * (last_step - start + 1) as f64;
            }
        }
        self.sum.iter_mut().for_each(|s| *s /= window);
        self.sum
    }
}

/// Outcome of an SDCA run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// The returned primal point, `w(alpha_out)`.
    pub w: Vec<f64>,
    /// The returned dual point selected by the output option.
    pub alpha: Vec<f64>,
    /// The output option actually applied (early stops return the final state).
    pub output: OutputOption,
    pub final_state: SolverState,
    pub trace: Vec<TraceRecord>,
    pub steps: u64,
    pub stopped_early: bool,
    /// Largest `w` drift seen at an evaluation before any rebuild.
    pub max_drift: f64,
}

impl RunResult {
    pub fn last_gap(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.gap)
    }
}

/// Runs SDCA with the schedule, initialization and output option in `config`.
pub fn run(config: &SolverConfig, dataset: &Dataset) -> Result<RunResult, SolverError> {
    run_observed(config, dataset, &mut NoObserver)
}

/// Plain SDCA: indices drawn uniformly with replacement.
pub fn run_sdca(config: &SolverConfig, dataset: &Dataset) -> Result<RunResult, SolverError> {
    let config = SolverConfig {
        schedule: Schedule::Random,
        ..config.clone()
    };
    run(&config, dataset)
}

/// SDCA-Perm: a fresh random permutation every epoch.
pub fn run_sdca_perm(config: &SolverConfig, dataset: &Dataset) -> Result<RunResult, SolverError> {
    let config = SolverConfig {
        schedule: Schedule::Permutation,
        ..config.clone()
    };
    run(&config, dataset)
}

/// Cyclic dual coordinate ascent over one permutation drawn at the start.
pub fn run_cyclic(config: &SolverConfig, dataset: &Dataset) -> Result<RunResult, SolverError> {
    let config = SolverConfig {
        schedule: Schedule::Cyclic,
        ..config.clone()
    };
    run(&config, dataset)
}

/// Two-stage SDCA. Stage 1 (a Modified-SGD pass over a seeded shuffle) runs
/// when `config.init` is [`Init::ModifiedSgd`]; with [`Init::Zero`] this is
/// exactly [`run`].
pub fn run_sdca_sgd_init(
    config: &SolverConfig,
    dataset: &Dataset,
) -> Result<RunResult, SolverError> {
    run(config, dataset)
}

/// The stage-1 dual iterate: zero, or the Modified-SGD output.
pub fn initial_alpha(config: &SolverConfig, dataset: &Dataset) -> Result<Vec<f64>, SolverError> {
    match config.init {
        Init::Zero => Ok(vec![0.0; dataset.n()]),
        Init::ModifiedSgd => {
            let mut order: Vec<usize> = (0..dataset.n()).collect();
            order.shuffle(&mut substream(config.seed, streams::SGD_SHUFFLE));
            modified_sgd_epoch(&config.loss, config.lambda, dataset, &order)
        }
    }
}

/// [`run`] with an [`Observer`] attached.
///
/// The trace always starts with an epoch-0 row for the initial state (after
/// stage 1 when warm-starting) and then has one row every `gap_every` epochs.
pub fn run_observed(
    config: &SolverConfig,
    dataset: &Dataset,
    observer: &mut dyn Observer,
) -> Result<RunResult, SolverError> {
    let n = dataset.n();
    config.validate(n)?;
    check_labels(&config.loss, dataset)?;
    warn_if_unnormalized(dataset);

    let started = Instant::now();
    let loss = &config.loss;
    let lambda = config.lambda;
    let total = config.total_steps(n);
    let t0 = config.t0(n);

    let mut state = SolverState::from_alpha(lambda, dataset, initial_alpha(config, dataset)?);
    let mut source = IndexSource::new(config.schedule, n, config.seed);
    let mut averager = (config.output == OutputOption::Average).then(|| Averager::new(n, t0));
    let random_step = (config.output == OutputOption::RandomIterate)
        .then(|| substream(config.seed, streams::OUTPUT).random_range(t0 + 1..=total));
    let mut snapshot: Option<Vec<f64>> = None;

    let mut trace = Vec::new();
    let mut max_drift = 0.0_f64;
    let mut evaluate_into_trace = |state: &mut SolverState,
                                   epoch: u64,
                                   trace: &mut Vec<TraceRecord>,
                                   observer: &mut dyn Observer|
     -> Result<f64, SolverError> {
        let eval = evaluate(loss, lambda, dataset, &state.alpha)?;
        let drift = max_abs_diff(&state.w, &eval.w);
        max_drift = max_drift.max(drift);
        if drift > W_DRIFT_TOL {
            log::debug!("epoch {epoch}: w drifted by {drift:e}; rebuilding from alpha");
            state.w.clone_from(&eval.w);
        }
        let mut record = TraceRecord::new(
            epoch,
            eval.primal,
            Some(eval.dual),
            started.elapsed().as_secs_f64(),
        );
        observer.on_epoch(&mut record, &eval.w);
        trace.push(record);
        Ok(eval.gap)
    };

    let gap0 = evaluate_into_trace(&mut state, 0, &mut trace, observer)?;
    let mut stopped_early = config.stop_gap.is_some_and(|g| gap0 <= g);
    let mut steps = 0;

    if !stopped_early {
        let n64 = n as u64;
        for step in 1..=total {
            let i = source.next(n);
            let old = state.alpha[i];
            let outcome = sdca_step(&mut state, i, loss, lambda, dataset)?;
            if outcome.delta != 0.0 {
                if let Some(avg) = averager.as_mut() {
                    avg.before_change(i, old, step);
                }
            }
            if random_step == Some(step) {
                snapshot = Some(state.alpha.clone());
            }
            observer.on_step(&outcome, &state);
            steps = step;

            if step.is_multiple_of(n64) {
                let epoch = step / n64;
                if epoch.is_multiple_of(config.gap_every) {
                    let gap = evaluate_into_trace(&mut state, epoch, &mut trace, observer)?;
                    if config.stop_gap.is_some_and(|g| gap <= g) {
                        stopped_early = step < total;
                        break;
                    }
                }
            }
        }
    }

    let (output, alpha) = if stopped_early {
        (OutputOption::Final, state.alpha.clone())
    } else {
        match config.output {
            OutputOption::Final => (OutputOption::Final, state.alpha.clone()),
            OutputOption::Average => {
                let avg = averager.take().expect("averager exists for average output");
                (OutputOption::Average, avg.finish(&state.alpha, steps))
            }
            OutputOption::RandomIterate => (
                OutputOption::RandomIterate,
                snapshot.expect("random step lies within the run"),
            ),
        }
    };
    let w = w_of_alpha(lambda, dataset, &alpha);
    Ok(RunResult {
        w,
        alpha,
        output,
        final_state: state,
        trace,
        steps,
        stopped_early,
        max_drift,
    })
}

/// One pass of Modified-SGD in the given order.
///
/// At step `t` the example `x = x_{order[t-1]}` gets the `alpha` maximizing
/// `-phi*(-alpha) - (lambda t / 2) ||w^(t-1) + alpha x / (lambda t)||^2`, where
/// `w^(t-1) = (1/(lambda (t-1))) sum_{s<t} alpha_s x_s` (zero at `t = 1`).
/// `order` must be a permutation of `0..n`.
pub fn modified_sgd_epoch(
    loss: &LossSpec,
    lambda: f64,
    dataset: &Dataset,
    order: &[usize],
) -> Result<Vec<f64>, SolverError> {
    let n = dataset.n();
    check_len(n, order.len())?;
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(SolverError::Config(
                "Modified-SGD order must be a permutation of 0..n".into(),
            ));
        }
    }
    let mut alpha = vec![0.0; n];
    // u = (1/lambda) sum_{s<=t} alpha_s x_s, so that w^(t) = u / t
    let mut u = vec![0.0; dataset.dim()];
    for (k, &i) in order.iter().enumerate() {
        let t = (k + 1) as f64;
        let ex = dataset.example(i);
        let wx = if k == 0 {
            0.0
        } else {
            ex.features().dot_dense(&u) / (t - 1.0)
        };
        let problem = CoordinateProblem {
            alpha: 0.0,
            wx,
            norm_sq: ex.norm_sq(),
            lambda_n: lambda * t,
            label: ex.label(),
        };
        let a = loss.coordinate_maximizer(&problem)?;
        alpha[i] = a;
        if a != 0.0 {
            ex.features().add_scaled_to(a / lambda, &mut u);
        }
    }
    Ok(alpha)
}

#[derive(Debug, Clone)]
pub struct SgdResult {
    pub w: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub steps: u64,
}

/// Plain SGD baseline,
/// `w^(t+1) = (1 - 1/t) w^(t) - (1/(lambda t)) phi_i'(w^(t).x_i) x_i`,
/// with `i` uniform with replacement. The trace holds primal values only.
pub fn run_sgd_baseline(config: &SolverConfig, dataset: &Dataset) -> Result<SgdResult, SolverError> {
    run_sgd_baseline_observed(config, dataset, &mut NoObserver)
}

pub fn run_sgd_baseline_observed(
    config: &SolverConfig,
    dataset: &Dataset,
    observer: &mut dyn Observer,
) -> Result<SgdResult, SolverError> {
    let n = dataset.n();
    config.validate(n)?;
    check_labels(&config.loss, dataset)?;
    warn_if_unnormalized(dataset);

    let started = Instant::now();
    let loss = &config.loss;
    let lambda = config.lambda;
    let total = config.total_steps(n);
    let mut rng = substream(config.seed, streams::SGD_BASELINE);

    // w = scale * v keeps the (1 - 1/t) shrink O(1)
    let mut v = vec![0.0; dataset.dim()];
    let mut scale = 1.0;
    let mut trace = Vec::new();
    let record_epoch = |epoch: u64, w: &[f64], trace: &mut Vec<TraceRecord>, observer: &mut dyn Observer| {
        let primal = primal_objective(loss, lambda, dataset, w);
        let mut record = TraceRecord::new(epoch, primal, None, started.elapsed().as_secs_f64());
        observer.on_epoch(&mut record, w);
        trace.push(record);
    };
    record_epoch(0, &v, &mut trace, observer);

    let n64 = n as u64;
    for t in 1..=total {
        let i = rng.random_range(0..n);
        let ex = dataset.example(i);
        let wx = scale * ex.features().dot_dense(&v);
        let g = loss.subgradient(wx, ex.label());
        let tf = t as f64;
        let shrink = 1.0 - 1.0 / tf;
        if shrink == 0.0 {
            v.iter_mut().for_each(|x| *x = 0.0);
            scale = 1.0;
        } else {
            scale *= shrink;
        }
        if g != 0.0 {
            ex.features().add_scaled_to(-g / (lambda * tf * scale), &mut v);
        }
        if scale < 1e-9 {
            v.iter_mut().for_each(|x| *x *= scale);
            scale = 1.0;
        }
        if t.is_multiple_of(n64) && (t / n64).is_multiple_of(config.gap_every) {
            let w: Vec<f64> = v.iter().map(|x| x * scale).collect();
            record_epoch(t / n64, &w, &mut trace, observer);
        }
    }
    let w = v.iter().map(|x| x * scale).collect();
    Ok(SgdResult {
        w,
        trace,
        steps: total,
    })
}
