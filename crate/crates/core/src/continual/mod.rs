//! Batch-sequential morphology optimization ("Ours") and the two
//! baselines it is compared against.
//!
//! Every algorithm works on a [`Pipeline`]: something that can roll out a
//! task variation at a parameter vector and score the trajectory. The
//! scenarios implement it; tests use small synthetic pipelines.

mod solver;
pub mod synthetic;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffsim::{Dual, Real, Trajectory};
use crate::error::{Error, Result};
use crate::scenarios::{Scenario, TaskVariation};

pub use solver::{minimize, SolveReport, SolverConfig};

pub trait Pipeline: Sync {
    type Variation: Clone + Send + Sync;

    fn dim(&self) -> usize;
    fn theta0(&self) -> &[f64];
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];

    /// Label used in error messages.
    fn variation_index(&self, variation: &Self::Variation) -> usize;

    fn rollout<S: Real>(&self, variation: &Self::Variation, theta: &[f64]) -> Result<Trajectory<S>>;
    fn task_loss<S: Real>(&self, traj: &Trajectory<S>) -> Result<S>;
    fn distill_loss<S: Real>(&self, new: &Trajectory<S>, old: &Trajectory<f64>) -> Result<S>;
}

impl Pipeline for Scenario {
    type Variation = TaskVariation;

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn theta0(&self) -> &[f64] {
        &self.spec.theta0
    }

    fn lower(&self) -> &[f64] {
        &self.spec.lower
    }

    fn upper(&self) -> &[f64] {
        &self.spec.upper
    }

    fn variation_index(&self, variation: &TaskVariation) -> usize {
        variation.index
    }

    fn rollout<S: Real>(&self, variation: &TaskVariation, theta: &[f64]) -> Result<Trajectory<S>> {
        Scenario::rollout(self, variation, theta)
    }

    fn task_loss<S: Real>(&self, traj: &Trajectory<S>) -> Result<S> {
        Scenario::task_loss(self, traj)
    }

    fn distill_loss<S: Real>(&self, new: &Trajectory<S>, old: &Trajectory<f64>) -> Result<S> {
        Scenario::distill_loss(self, new, old)
    }
}

/// Disjoint shuffle-then-chunk partition of a task set into batches of `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchSchedule<V> {
    pub batches: Vec<Vec<V>>,
    /// Number of resampled members appended to the last batch.
    pub padded: usize,
}

impl<V: Clone> BatchSchedule<V> {
    pub fn build(tasks: &[V], m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("m", "batch size must be at least 1"));
        }
        if tasks.len() < m {
            return Err(Error::config(
                "n",
                format!("{} variations cannot fill a batch of {m}", tasks.len()),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.shuffle(&mut rng);
        let mut batches: Vec<Vec<usize>> = order.chunks(m).map(|c| c.to_vec()).collect();
        let mut padded = 0;
        let last = batches.last_mut().expect("at least one batch");
        if last.len() < m {
            // pad with members not already in the short batch
            let mut pool: Vec<usize> = (0..tasks.len()).filter(|i| !last.contains(i)).collect();
            pool.shuffle(&mut rng);
            padded = m - last.len();
            last.extend(pool.into_iter().take(padded));
            log::warn!("task set of {} is not a multiple of {m}; padded last batch with {padded}", tasks.len());
        }
        Ok(BatchSchedule {
            batches: batches
                .into_iter()
                .map(|b| b.into_iter().map(|i| tasks[i].clone()).collect())
                .collect(),
            padded,
        })
    }

    pub fn single(batch: Vec<V>) -> Self {
        BatchSchedule {
            batches: vec![batch],
            padded: 0,
        }
    }
}

fn rollouts<P: Pipeline, S: Real>(
    pipeline: &P,
    theta: &[f64],
    variations: &[&P::Variation],
) -> Result<Vec<Trajectory<S>>> {
    variations
        .par_iter()
        .map(|v| {
            pipeline.rollout::<S>(v, theta).map_err(|e| Error::Rollout {
                variation: pipeline.variation_index(v),
                source: Box::new(e),
            })
        })
        .collect()
}

/// `(1/M) sum_i L(theta; B_i)`, summed in batch order.
pub fn batch_task_loss<P: Pipeline, S: Real>(pipeline: &P, theta: &[f64], batch: &[P::Variation]) -> Result<S> {
    if batch.is_empty() {
        return Err(Error::config("batch", "batch is empty"));
    }
    let refs: Vec<&P::Variation> = batch.iter().collect();
    let trajs = rollouts::<P, S>(pipeline, theta, &refs)?;
    let mut total = S::zero();
    for t in &trajs {
        total += pipeline.task_loss(t)?;
    }
    Ok(total / batch.len() as f64)
}

/// Distillation set with the `theta_{t-1}` rollouts it is compared against.
#[derive(Clone, Debug, Default)]
pub struct DistillationSet<V> {
    pub members: Vec<V>,
    pub anchors: Vec<Trajectory<f64>>,
}

impl<V> DistillationSet<V> {
    pub fn empty() -> Self {
        DistillationSet {
            members: Vec::new(),
            anchors: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl<V: Clone + Send + Sync> DistillationSet<V> {
    /// Rolls out `members` at the anchor `theta_prev`.
    pub fn anchored<P: Pipeline<Variation = V>>(pipeline: &P, theta_prev: &[f64], members: Vec<V>) -> Result<Self> {
        let refs: Vec<&V> = members.iter().collect();
        let anchors = rollouts::<P, f64>(pipeline, theta_prev, &refs)?;
        Ok(DistillationSet { members, anchors })
    }
}

/// `(1/|D|) sum_D distill(rollout(theta), anchor)`; zero for an empty set.
pub fn batch_distill_loss<P: Pipeline, S: Real>(
    pipeline: &P,
    theta: &[f64],
    set: &DistillationSet<P::Variation>,
) -> Result<S> {
    if set.is_empty() {
        return Ok(S::zero());
    }
    let refs: Vec<&P::Variation> = set.members.iter().collect();
    let trajs = rollouts::<P, S>(pipeline, theta, &refs)?;
    let mut total = S::zero();
    for (new, old) in trajs.iter().zip(&set.anchors) {
        total += pipeline.distill_loss(new, old)?;
    }
    Ok(total / set.len() as f64)
}

pub fn combined_loss<P: Pipeline, S: Real>(
    pipeline: &P,
    theta: &[f64],
    batch: &[P::Variation],
    set: &DistillationSet<P::Variation>,
    alpha: f64,
) -> Result<S> {
    if !(alpha >= 0.0) {
        return Err(Error::config("alpha", "must be non-negative"));
    }
    let task = batch_task_loss::<P, S>(pipeline, theta, batch)?;
    if alpha == 0.0 || set.is_empty() {
        return Ok(task);
    }
    Ok(task + batch_distill_loss::<P, S>(pipeline, theta, set)? * alpha)
}

/// The `d_prime` unvisited indices with the largest `|grad|`, ties to the
/// lower index, returned in ascending order.
pub fn select_dimensions(grad: &[f64], visited: &BTreeSet<usize>, d_prime: usize) -> Result<Vec<usize>> {
    let mut free: Vec<usize> = (0..grad.len()).filter(|i| !visited.contains(i)).collect();
    if free.is_empty() {
        return Err(Error::EmptyCandidate);
    }
    free.sort_by(|&a, &b| grad[b].abs().total_cmp(&grad[a].abs()).then(a.cmp(&b)));
    free.truncate(d_prime);
    free.sort_unstable();
    Ok(free)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ours,
    SimpleContinual,
    BaselineDiffhand,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ours, Algorithm::SimpleContinual, Algorithm::BaselineDiffhand];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ours => "ours",
            Algorithm::SimpleContinual => "simple_continual",
            Algorithm::BaselineDiffhand => "baseline_diffhand",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinualConfig {
    /// Weight of the distillation term.
    pub alpha: f64,
    /// Dimensions optimized per batch; `None` uses the scenario's value.
    pub d_prime: Option<usize>,
    /// Initial step scale of the inner solver (units of theta).
    pub step_scale: f64,
    /// Step scale factor applied at every restart.
    pub decay: f64,
    pub solver: SolverConfig,
}

impl Default for ContinualConfig {
    fn default() -> Self {
        ContinualConfig {
            alpha: 0.1,
            d_prime: None,
            step_scale: 0.01,
            decay: (-1.0f64).exp(),
            solver: SolverConfig::default(),
        }
    }
}

impl ContinualConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("continual.alpha", "must be finite and non-negative"));
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::config("continual.step_scale", "must be positive"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::config("continual.decay", "must be in (0, 1]"));
        }
        if self.d_prime == Some(0) {
            return Err(Error::config("continual.d_prime", "must be at least 1"));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRecord {
    /// 1-based batch index.
    pub batch: usize,
    pub theta: Vec<f64>,
    /// Objective value after the inner solve (combined loss for Ours).
    pub train_loss: f64,
    /// Projected gradient norm on the active dims after the solve.
    pub grad_norm: f64,
    pub step_scale: f64,
    pub active: Vec<usize>,
    pub iterations: usize,
    pub restarts: usize,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerRun {
    pub algorithm: Algorithm,
    pub theta: Vec<f64>,
    pub history: Vec<BatchRecord>,
    pub padded: usize,
    pub skipped_batches: usize,
}

fn check_theta0<P: Pipeline>(pipeline: &P) -> Result<Vec<f64>> {
    let theta = pipeline.theta0().to_vec();
    let (lo, hi) = (pipeline.lower(), pipeline.upper());
    if lo.len() != theta.len() || hi.len() != theta.len() || theta.len() != pipeline.dim() {
        return Err(Error::DimensionMismatch {
            expected: pipeline.dim(),
            found: theta.len(),
        });
    }
    for (i, &v) in theta.iter().enumerate() {
        if !(lo[i] <= v && v <= hi[i]) {
            return Err(Error::ParamsOutOfBounds {
                index: i,
                value: v,
                lower: lo[i],
                upper: hi[i],
            });
        }
    }
    Ok(theta)
}

fn value_and_grad<P: Pipeline>(
    pipeline: &P,
    theta: &[f64],
    batch: &[P::Variation],
    set: &DistillationSet<P::Variation>,
    alpha: f64,
) -> Result<(f64, Vec<f64>)> {
    let l = combined_loss::<P, Dual>(pipeline, theta, batch, set, alpha)?;
    let g = l.tangent_row(pipeline.dim());
    Ok((l.value(), g))
}

fn skip_record(batch: usize, theta: &[f64], step_scale: f64, restarts: usize) -> BatchRecord {
    BatchRecord {
        batch,
        theta: theta.to_vec(),
        train_loss: f64::NAN,
        grad_norm: f64::NAN,
        step_scale,
        active: Vec::new(),
        iterations: 0,
        restarts,
        skipped: true,
    }
}

/// Full-dimensional minimization of the task loss on each batch in turn,
/// starting from the previous batch's result.
fn run_sequential<P: Pipeline>(
    pipeline: &P,
    schedule: &BatchSchedule<P::Variation>,
    config: &ContinualConfig,
    algorithm: Algorithm,
) -> Result<OptimizerRun> {
    config.validate()?;
    let mut theta = check_theta0(pipeline)?;
    let all: Vec<usize> = (0..pipeline.dim()).collect();
    let empty = DistillationSet::empty();
    let mut history = Vec::new();
    let mut skipped = 0;
    for (t, batch) in schedule.batches.iter().enumerate() {
        let f = |x: &[f64]| value_and_grad(pipeline, x, batch, &empty, 0.0);
        match minimize(f, &theta, &all, pipeline.lower(), pipeline.upper(), config.step_scale, &config.solver) {
            Ok(rep) => {
                theta = rep.x;
                history.push(BatchRecord {
                    batch: t + 1,
                    theta: theta.clone(),
                    train_loss: rep.value,
                    grad_norm: rep.grad_norm,
                    step_scale: config.step_scale,
                    active: all.clone(),
                    iterations: rep.iterations,
                    restarts: 0,
                    skipped: false,
                });
            }
            Err(e) if e.is_blowup() => {
                log::warn!("{algorithm}: skipping batch {} after blowup: {e}", t + 1);
                skipped += 1;
                history.push(skip_record(t + 1, &theta, config.step_scale, 0));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OptimizerRun {
        algorithm,
        theta,
        history,
        padded: schedule.padded,
        skipped_batches: skipped,
    })
}

/// Minimizes the task loss on the single batch `B_1`.
pub fn run_baseline_diffhand<P: Pipeline>(
    pipeline: &P,
    batch: &[P::Variation],
    config: &ContinualConfig,
) -> Result<OptimizerRun> {
    let schedule = BatchSchedule::single(batch.to_vec());
    run_sequential(pipeline, &schedule, config, Algorithm::BaselineDiffhand)
}

pub fn run_simple_continual<P: Pipeline>(
    pipeline: &P,
    schedule: &BatchSchedule<P::Variation>,
    config: &ContinualConfig,
) -> Result<OptimizerRun> {
    run_sequential(pipeline, schedule, config, Algorithm::SimpleContinual)
}

/// Batch-sequential coordinate optimization of task loss plus distillation
/// against the previous batch's parameters.
///
/// `d_prime` overrides `config.d_prime`. `seed` drives the distillation
/// set sampling.
pub fn run_ours<P: Pipeline>(
    pipeline: &P,
    schedule: &BatchSchedule<P::Variation>,
    config: &ContinualConfig,
    d_prime: usize,
    seed: u64,
) -> Result<OptimizerRun> {
    config.validate()?;
    let d = pipeline.dim();
    let d_prime = config.d_prime.unwrap_or(d_prime);
    if d_prime == 0 || d_prime > d {
        return Err(Error::config("d_prime", format!("{d_prime} not in 1..={d}")));
    }
    let mut theta = check_theta0(pipeline)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visited = BTreeSet::new();
    let mut step_scale = config.step_scale;
    let mut restarts = 0;
    let mut seen: Vec<P::Variation> = Vec::new();
    let mut members: Vec<P::Variation> = Vec::new();
    let mut history = Vec::new();
    let mut skipped = 0;

    for (t, batch) in schedule.batches.iter().enumerate() {
        let outcome = (|| {
            let set = DistillationSet::anchored(pipeline, &theta, members.clone())?;
            let f = |x: &[f64]| value_and_grad(pipeline, x, batch, &set, config.alpha);
            let (_, g0) = f(&theta)?;
            let active = select_dimensions(&g0, &visited, d_prime)?;
            let rep = minimize(f, &theta, &active, pipeline.lower(), pipeline.upper(), step_scale, &config.solver)?;
            Ok::<_, Error>((active, rep))
        })();
        match outcome {
            Ok((active, rep)) => {
                theta = rep.x;
                visited.extend(active.iter().copied());
                history.push(BatchRecord {
                    batch: t + 1,
                    theta: theta.clone(),
                    train_loss: rep.value,
                    grad_norm: rep.grad_norm,
                    step_scale,
                    active,
                    iterations: rep.iterations,
                    restarts,
                    skipped: false,
                });
                if visited.len() == d {
                    visited.clear();
                    restarts += 1;
                    step_scale *= config.decay;
                }
                seen.extend(batch.iter().cloned());
                let m = batch.len();
                members = seen.choose_multiple(&mut rng, m.min(seen.len())).cloned().collect();
            }
            Err(e) if e.is_blowup() => {
                log::warn!("ours: skipping batch {} after blowup: {e}", t + 1);
                skipped += 1;
                history.push(skip_record(t + 1, &theta, step_scale, restarts));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OptimizerRun {
        algorithm: Algorithm::Ours,
        theta,
        history,
        padded: schedule.padded,
        skipped_batches: skipped,
    })
}
