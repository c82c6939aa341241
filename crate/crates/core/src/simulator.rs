//! Seeded Monte-Carlo generation of experimental runs.
//!
//! Every run prepares the tilted initial state, draws a weak outcome `k` by
//! inverse CDF over the Born weights `‖U_k|ψ⟩‖²`, applies the back-action and
//! then draws the strong outcome `l`. Runs are grouped in fixed-size chunks;
//! chunk `c` draws from its own ChaCha8 stream `(seed, c)`, so the record
//! stream is identical for any thread count or batch size.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::measurement::{
    gaussian_model, weak_outcome_operator, MeasurementOperator, RotatedDetector, StrongOutcome,
    WeakModel,
};
use crate::qubit::{apply_kraus, make_tilted_state, PureState};

/// Runs per RNG chunk.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub run_index: u64,
    pub k: i64,
    pub l: StrongOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub f_avg: f64,
    pub k_rms: f64,
    /// Tilt of the initial state away from `|↑⟩`, radians.
    pub alpha: f64,
    pub runs: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Checks every precondition and builds the weak model.
    pub fn validate(&self) -> Result<WeakModel> {
        if self.runs == 0 {
            return Err(domain("runs must be at least 1"));
        }
        if !self.alpha.is_finite() {
            return Err(domain(format!("alpha = {} is not finite", self.alpha)));
        }
        gaussian_model(self.f_avg, self.k_rms)
    }
}

/// The RNG stream owned by chunk `chunk` of a run with master seed `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Inverse-CDF sampler of weak outcomes for one fixed input state.
#[derive(Clone, Debug)]
pub struct WeakSampler {
    state: PureState,
    operators: Vec<MeasurementOperator>,
    ks: Vec<i64>,
    cumulative: Vec<f64>,
}

impl WeakSampler {
    pub fn new(model: &WeakModel, state: PureState) -> Self {
        let mut operators = Vec::with_capacity(model.len());
        let mut ks = Vec::with_capacity(model.len());
        let mut cumulative = Vec::with_capacity(model.len());
        let mut acc = 0.0;
        for o in model.outcomes() {
            let op = weak_outcome_operator(model, o.k).expect("k from the model support");
            acc += apply_kraus(&state, op).0;
            operators.push(op);
            ks.push(o.k);
            cumulative.push(acc);
        }
        Self {
            state,
            operators,
            ks,
            cumulative,
        }
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    /// Index into the model's outcome list.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty model");
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (i64, PureState) {
        let i = self.sample_index(rng);
        let (_, post) = apply_kraus(&self.state, self.operators[i]);
        (self.ks[i], post.expect("sampled outcomes have positive probability"))
    }
}

/// Draws one weak outcome and returns it with the post-measurement state.
/// Builds the cumulative table on every call; reuse a [`WeakSampler`] when the
/// input state repeats.
pub fn sample_weak_outcome<R: Rng + ?Sized>(
    state: &PureState,
    model: &WeakModel,
    rng: &mut R,
) -> (i64, PureState) {
    WeakSampler::new(model, *state).sample(rng)
}

/// Per-configuration tables shared by all chunks.
#[derive(Debug)]
struct Plan {
    sampler: WeakSampler,
    /// Probability of `l = 2` after each weak outcome.
    prob_down: Vec<f64>,
    seed: u64,
    runs: u64,
}

impl Plan {
    fn new(config: &SimConfig, model: &WeakModel) -> Self {
        let sampler = WeakSampler::new(model, make_tilted_state(config.alpha));
        let down = StrongOutcome::Down.projector();
        let prob_down = sampler
            .operators
            .iter()
            .map(|op| match apply_kraus(&sampler.state, op).1 {
                Some(post) => apply_kraus(&post, down).0,
                None => 0.0,
            })
            .collect();
        Self {
            sampler,
            prob_down,
            seed: config.seed,
            runs: config.runs,
        }
    }

    fn n_chunks(&self) -> u64 {
        self.runs.div_ceil(CHUNK_SIZE)
    }

    fn chunk(&self, c: u64) -> Vec<RunRecord> {
        let start = c * CHUNK_SIZE;
        let end = (start + CHUNK_SIZE).min(self.runs);
        let mut rng = chunk_rng(self.seed, c);
        (start..end)
            .map(|run_index| {
                let i = self.sampler.sample_index(&mut rng);
                let l = if rng.gen::<f64>() < self.prob_down[i] {
                    StrongOutcome::Down
                } else {
                    StrongOutcome::Up
                };
                RunRecord {
                    run_index,
                    k: self.sampler.ks[i],
                    l,
                }
            })
            .collect()
    }
}

/// Lazily generated records of one experiment, in run order.
///
/// Chunks are produced `batch_chunks` at a time on the rayon pool; memory is
/// bounded by `batch_chunks · CHUNK_SIZE` records.
#[derive(Debug)]
pub struct RecordStream {
    plan: Arc<Plan>,
    next_chunk: u64,
    batch_chunks: u64,
    buffer: VecDeque<RunRecord>,
}

impl RecordStream {
    /// Sets how many chunks are generated per parallel batch (at least 1).
    /// Does not change the records.
    pub fn with_batch_chunks(mut self, n: usize) -> Self {
        self.batch_chunks = n.max(1) as u64;
        self
    }

    fn refill(&mut self) {
        let end = (self.next_chunk + self.batch_chunks).min(self.plan.n_chunks());
        let plan = &self.plan;
        let chunks: Vec<Vec<RunRecord>> = (self.next_chunk..end)
            .into_par_iter()
            .map(|c| plan.chunk(c))
            .collect();
        self.next_chunk = end;
        self.buffer.extend(chunks.into_iter().flatten());
    }
}

impl Iterator for RecordStream {
    type Item = RunRecord;

    fn next(&mut self) -> Option<RunRecord> {
        if self.buffer.is_empty() && self.next_chunk < self.plan.n_chunks() {
            self.refill();
        }
        self.buffer.pop_front()
    }
}

/// Starts an experiment; records are generated as the stream is consumed.
pub fn run_experiment(config: &SimConfig) -> Result<RecordStream> {
    let model = config.validate()?;
    Ok(run_experiment_with_model(config, &model))
}

/// As [`run_experiment`], with an explicit weak model in place of the
/// Gaussian family named by `config.f_avg` / `config.k_rms`.
pub fn run_experiment_with_model(config: &SimConfig, model: &WeakModel) -> RecordStream {
    RecordStream {
        plan: Arc::new(Plan::new(config, model)),
        next_chunk: 0,
        batch_chunks: (2 * rayon::current_num_threads()) as u64,
        buffer: VecDeque::new(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub n_runs: u64,
    pub count_one: u64,
    pub prob_one: f64,
    pub stderr: f64,
}

/// Measures `n` copies of `state` with a strong detector and tallies reading 1.
pub fn calibrate_detector<R: Rng + ?Sized>(
    detector: &RotatedDetector,
    state: &PureState,
    n: u64,
    rng: &mut R,
) -> Result<CalibrationReport> {
    if n == 0 {
        return Err(domain("calibration needs at least one run"));
    }
    let p = detector.prob_one(state);
    let count_one = (0..n).filter(|_| rng.gen::<f64>() < p).count() as u64;
    let prob_one = count_one as f64 / n as f64;
    Ok(CalibrationReport {
        n_runs: n,
        count_one,
        prob_one,
        stderr: (prob_one * (1.0 - prob_one) / n as f64).sqrt(),
    })
}
