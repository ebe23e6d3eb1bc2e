//! Monte Carlo campaigns: FER sweeps, E1 occurrence profiling, leaf LLR
//! magnitude profiling and iteration accounting.
//!
//! Frames are generated from per-frame RNG substreams keyed by the master
//! seed and frame index, so frame `i` carries the same message and noise
//! for every decoder. Work is split into fixed-size batches; each batch is
//! decoded in parallel and then folded in frame order, which keeps every
//! result (including early stopping) independent of the worker count.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{channel_llrs, ChannelConfig};
use crate::code_spec::{crc_attach, encode, BitVector, CodeSpec};
use crate::error::{param, Error, Result};
use crate::flip::{oracle_decode_with, DecodeOutcome, Engine};
use crate::sc_kernel::{Free, ScDecoder};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "POLARFLIP_WORKERS";

const DEFAULT_BATCH: usize = 2048;

/// Iterations spent by a decode whose re-decodes resume at the given flip
/// leaves: `1 + sum (N - leaf) / N`.
pub fn iteration_cost(attempt_flip_indices: &[usize], n: usize) -> f64 {
    1.0 + attempt_flip_indices
        .iter()
        .map(|&leaf| (n - leaf.min(n)) as f64 / n as f64)
        .sum::<f64>()
}

/// Per-rank E1 occurrence counts from an oracle campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorProfile {
    code_id: String,
    ebn0_db: f64,
    frames_simulated: u64,
    e1_counts: Vec<u64>,
    leaf_indices: Vec<usize>,
    multi_error_frames: u64,
    zero_error_frames: u64,
}

impl ErrorProfile {
    /// `e1_counts[r]` belongs to the unfrozen rank `r` whose leaf is
    /// `leaf_indices[r]`.
    pub fn from_counts(
        code_id: String,
        ebn0_db: f64,
        frames_simulated: u64,
        e1_counts: Vec<u64>,
        leaf_indices: Vec<usize>,
        multi_error_frames: u64,
        zero_error_frames: u64,
    ) -> Self {
        assert_eq!(e1_counts.len(), leaf_indices.len(), "one leaf index per rank");
        Self { code_id, ebn0_db, frames_simulated, e1_counts, leaf_indices, multi_error_frames, zero_error_frames }
    }

    pub fn code_id(&self) -> &str {
        &self.code_id
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn frames_simulated(&self) -> u64 {
        self.frames_simulated
    }

    pub fn e1_counts(&self) -> &[u64] {
        &self.e1_counts
    }

    pub fn leaf_indices(&self) -> &[usize] {
        &self.leaf_indices
    }

    pub fn multi_error_frames(&self) -> u64 {
        self.multi_error_frames
    }

    pub fn zero_error_frames(&self) -> u64 {
        self.zero_error_frames
    }

    pub fn e1_frames(&self) -> u64 {
        self.e1_counts.iter().sum()
    }

    /// Counts as a distribution over ranks; all zero when no E1 was seen.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.e1_frames();
        self.e1_counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
            .collect()
    }

    /// Ranks by descending count, lower rank first on ties.
    pub fn ranks_by_count(&self) -> Vec<usize> {
        let mut ranks: Vec<usize> = (0..self.e1_counts.len()).collect();
        ranks.sort_by(|&a, &b| self.e1_counts[b].cmp(&self.e1_counts[a]).then(a.cmp(&b)));
        ranks
    }
}

/// One point of an FER curve.
#[derive(Clone, Debug, PartialEq)]
pub struct FerPoint {
    pub ebn0_db: f64,
    pub decoder: String,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub avg_attempts: f64,
    /// CRC passed but the message is wrong.
    pub undetected_error_frames: u64,
    /// CRC still failing after the last attempt, message wrong.
    pub tmax_exhausted_frames: u64,
}

impl FerPoint {
    /// Standard error of the FER estimate.
    pub fn std_error(&self) -> f64 {
        (self.fer * (1.0 - self.fer) / self.frames as f64).sqrt()
    }
}

/// Mean |leaf LLR| per unfrozen rank under plain SC.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrProfile {
    pub ebn0_db: f64,
    pub frames: u64,
    pub leaf_indices: Vec<usize>,
    pub mean_abs_llr: Vec<f64>,
}

impl LlrProfile {
    /// Means scaled so the largest is 1.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.mean_abs_llr.iter().copied().fold(0.0, f64::max);
        self.mean_abs_llr.iter().map(|&m| if max > 0.0 { m / max } else { 0.0 }).collect()
    }
}

/// A transmitted frame.
#[derive(Clone, Debug)]
pub struct Frame {
    /// K information bits.
    pub info: BitVector,
    /// Full input vector u (frozen zeros, information and CRC bits).
    pub u: BitVector,
    pub llrs: Vec<f64>,
}

/// Draws frame `index`: random message, CRC, encoding, BPSK, AWGN, LLRs.
pub fn generate_frame(spec: &CodeSpec, channel: &ChannelConfig, sigma: f64, index: u64) -> Result<Frame> {
    let mut rng = channel.frame_rng(index);
    let info = BitVector::new((0..spec.k()).map(|_| u8::from(rng.gen::<bool>())).collect())?;
    let word = crc_attach(&info, spec.crc_poly());
    let u = spec.embed(&word)?;
    let x = encode(&word, spec)?;
    let llrs = channel_llrs(&x, sigma, &mut rng)?.into_inner();
    Ok(Frame { info, u, llrs })
}

/// Per-frame record of a decode.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub index: u64,
    pub frame_error: bool,
    pub outcome: DecodeOutcome,
}

/// Worker pool configuration.
#[derive(Clone, Copy, Debug)]
pub struct Runner {
    workers: usize,
    batch: usize,
}

impl Default for Runner {
    fn default() -> Self {
        Self::from_env()
    }
}

impl Runner {
    /// Worker count from `POLARFLIP_WORKERS`, else the available parallelism.
    pub fn from_env() -> Self {
        let workers = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        Self::with_workers(workers)
    }

    pub fn with_workers(workers: usize) -> Self {
        Self { workers: workers.max(1), batch: DEFAULT_BATCH }
    }

    pub fn batch_size(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Parameter(format!("worker pool: {e}")))
    }

    /// Maps `job` over frames `[start, end)` in parallel, results in frame
    /// order.
    fn map_frames<T, F>(&self, pool: &rayon::ThreadPool, spec: &CodeSpec, start: u64, end: u64, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut ScDecoder, u64) -> Result<T> + Sync,
    {
        pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(|| ScDecoder::for_spec(spec), |dec, i| job(dec, i))
                .collect()
        })
    }

    fn batches(&self, frames: u64) -> impl Iterator<Item = (u64, u64)> {
        let batch = self.batch as u64;
        (0..frames.div_ceil(batch)).map(move |b| (b * batch, ((b + 1) * batch).min(frames)))
    }

    /// Decodes frames `[start, end)` and returns one record per frame.
    pub fn frame_log(&self, spec: &CodeSpec, engine: &Engine, channel: &ChannelConfig, start: u64, end: u64) -> Result<Vec<FrameRecord>> {
        engine.validate(spec)?;
        channel.validate()?;
        let sigma = channel.sigma()?;
        let pool = self.pool()?;
        self.map_frames(&pool, spec, start, end, |dec, i| {
            let f = generate_frame(spec, channel, sigma, i)?;
            let outcome = engine.decode(dec, &f.llrs, spec, &f.u)?;
            Ok(FrameRecord { index: i, frame_error: outcome.info_hat != f.info, outcome })
        })
    }

    /// FER measurement, optionally stopping once `stop_at_errors` frame
    /// errors have been seen.
    pub fn run_fer(
        &self,
        spec: &CodeSpec,
        engine: &Engine,
        channel: &ChannelConfig,
        frames: u64,
        stop_at_errors: Option<u64>,
    ) -> Result<FerPoint> {
        if frames == 0 {
            return param("frames must be positive");
        }
        engine.validate(spec)?;
        channel.validate()?;
        let sigma = channel.sigma()?;
        let pool = self.pool()?;

        let mut acc = FerAccumulator::default();
        'outer: for (start, end) in self.batches(frames) {
            let batch = self.map_frames(&pool, spec, start, end, |dec, i| {
                let f = generate_frame(spec, channel, sigma, i)?;
                let out = engine.decode(dec, &f.llrs, spec, &f.u)?;
                Ok((out.info_hat != f.info, out.crc_pass, out.attempts, out.iteration_cost))
            })?;
            for (error, crc_pass, attempts, cost) in batch {
                acc.push(error, crc_pass, attempts, cost);
                if stop_at_errors.is_some_and(|s| acc.frame_errors >= s) {
                    break 'outer;
                }
            }
        }
        Ok(acc.finish(channel.ebn0_db, engine.name()))
    }

    /// E1 occurrence profile from unlimited-genie decodes.
    pub fn profile_e1(&self, spec: &CodeSpec, channel: &ChannelConfig, frames: u64) -> Result<ErrorProfile> {
        if frames == 0 {
            return param("frames must be positive");
        }
        channel.validate()?;
        let sigma = channel.sigma()?;
        let pool = self.pool()?;
        let mut counts = vec![0u64; spec.non_frozen_count()];
        let (mut multi, mut zero) = (0u64, 0u64);
        for (start, end) in self.batches(frames) {
            let batch = self.map_frames(&pool, spec, start, end, |dec, i| {
                let f = generate_frame(spec, channel, sigma, i)?;
                let rep = oracle_decode_with(dec, &f.llrs, spec, &f.u, None)?;
                Ok((rep.error_count, rep.first_error_index))
            })?;
            for (errors, first) in batch {
                match (errors, first) {
                    (0, _) => zero += 1,
                    (1, Some(leaf)) => counts[spec.rank_of(leaf).expect("genie corrects unfrozen leaves")] += 1,
                    _ => multi += 1,
                }
            }
        }
        Ok(ErrorProfile::from_counts(
            spec.fingerprint(),
            channel.ebn0_db,
            frames,
            counts,
            spec.info_indices().to_vec(),
            multi,
            zero,
        ))
    }

    /// Mean |leaf LLR| per unfrozen rank under plain SC.
    pub fn profile_llr_magnitude(&self, spec: &CodeSpec, channel: &ChannelConfig, frames: u64) -> Result<LlrProfile> {
        if frames == 0 {
            return param("frames must be positive");
        }
        channel.validate()?;
        let sigma = channel.sigma()?;
        let pool = self.pool()?;
        let mut sums = vec![0.0f64; spec.non_frozen_count()];
        for (start, end) in self.batches(frames) {
            let batch = self.map_frames(&pool, spec, start, end, |dec, i| {
                let f = generate_frame(spec, channel, sigma, i)?;
                let r = dec.decode_with(&f.llrs, spec, &mut Free)?;
                Ok(spec.info_indices().iter().map(|&leaf| r.leaf_llrs[leaf].abs()).collect::<Vec<f64>>())
            })?;
            for mags in batch {
                for (s, m) in sums.iter_mut().zip(mags) {
                    *s += m;
                }
            }
        }
        Ok(LlrProfile {
            ebn0_db: channel.ebn0_db,
            frames,
            leaf_indices: spec.info_indices().to_vec(),
            mean_abs_llr: sums.into_iter().map(|s| s / frames as f64).collect(),
        })
    }
}

#[derive(Default)]
struct FerAccumulator {
    frames: u64,
    frame_errors: u64,
    undetected: u64,
    exhausted: u64,
    attempts: u64,
    iterations: f64,
}

impl FerAccumulator {
    fn push(&mut self, error: bool, crc_pass: bool, attempts: usize, cost: f64) {
        self.frames += 1;
        self.attempts += attempts as u64;
        self.iterations += cost;
        if error {
            self.frame_errors += 1;
            if crc_pass {
                self.undetected += 1;
            } else {
                self.exhausted += 1;
            }
        }
    }

    fn finish(self, ebn0_db: f64, decoder: &str) -> FerPoint {
        let n = self.frames as f64;
        FerPoint {
            ebn0_db,
            decoder: decoder.to_string(),
            frames: self.frames,
            frame_errors: self.frame_errors,
            fer: self.frame_errors as f64 / n,
            avg_iterations: self.iterations / n,
            avg_attempts: self.attempts as f64 / n,
            undetected_error_frames: self.undetected,
            tmax_exhausted_frames: self.exhausted,
        }
    }
}

/// [`Runner::run_fer`] with the worker count taken from the environment.
pub fn run_fer(spec: &CodeSpec, engine: &Engine, channel: &ChannelConfig, frames: u64, stop_at_errors: Option<u64>) -> Result<FerPoint> {
    Runner::from_env().run_fer(spec, engine, channel, frames, stop_at_errors)
}

pub fn profile_e1(spec: &CodeSpec, channel: &ChannelConfig, frames: u64) -> Result<ErrorProfile> {
    Runner::from_env().profile_e1(spec, channel, frames)
}

pub fn profile_llr_magnitude(spec: &CodeSpec, channel: &ChannelConfig, frames: u64) -> Result<LlrProfile> {
    Runner::from_env().profile_llr_magnitude(spec, channel, frames)
}
