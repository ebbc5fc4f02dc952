//! Monte Carlo simulation of individual slots.
//!
//! Trials are split into fixed-size shards. Shard `k` of a run draws from the
//! ChaCha8 stream `(stream_id << 32) | k` under the run's seed, so shards never
//! share random numbers and any executor that returns shard results in shard
//! order reproduces the serial estimate bit for bit.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::reliability::{CaptureMode, MixtureMode, TrafficModel};

/// Trials per shard.
pub const SHARD_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Selects an independent family of substreams.
    pub stream_id: u32,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        let c = Self { trials, seed, stream_id: 0 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_stream(self, stream_id: u32) -> Self {
        Self { stream_id, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter { name: "trials", reason: "must be at least 1" });
        }
        Ok(())
    }

    pub fn shards(&self) -> u64 {
        self.trials.div_ceil(SHARD_SIZE)
    }

    fn shard_len(&self, shard: u64) -> u64 {
        (self.trials - shard * SHARD_SIZE).min(SHARD_SIZE)
    }

    fn shard_rng(&self, shard: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.stream_id) << 32) | shard);
        rng
    }
}

/// A proportion estimate with its normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub half_width_95: f64,
    /// Trials that entered the average.
    pub trials: u64,
    /// Slots that held at least one active user.
    pub active_slots: u64,
}

impl McEstimate {
    pub fn from_counts(hits: u64, trials: u64, active_slots: u64) -> Self {
        if trials == 0 {
            return Self { value: 0.0, half_width_95: 0.0, trials: 0, active_slots };
        }
        let value = hits as f64 / trials as f64;
        Self { value, half_width_95: half_width_95(value, trials), trials, active_slots }
    }

    /// No slot held an active user, so the value is a convention, not an estimate.
    pub fn is_degenerate(&self) -> bool {
        self.active_slots == 0
    }
}

pub fn half_width_95(value: f64, trials: u64) -> f64 {
    1.96 * libm::sqrt(value * (1.0 - value) / trials as f64)
}

/// Runs shard jobs. Implementations must return results in shard order.
pub trait ShardExecutor {
    fn run<T, F>(&self, shards: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs shards one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl ShardExecutor for Serial {
    fn run<T, F>(&self, shards: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..shards).map(job).collect()
    }
}

/// One user's SNR at a uniformly drawn position in the cell.
pub fn sample_user_snr<R: Rng + ?Sized>(model: &SystemModel, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let r = model.cell().radius * libm::sqrt(u);
    // r never leaves [0, R], so the gain is always defined.
    model.snr_of_gain(model.channel_gain(r).unwrap_or(model.gain_min()))
}

/// Reference-user SINR with `n_active` users. Interferers are drawn first and
/// the reference user last.
pub fn sample_sinr<R: Rng + ?Sized>(model: &SystemModel, n_active: u32, rng: &mut R) -> f64 {
    let mut interference = 0.0;
    for _ in 1..n_active {
        interference += sample_user_snr(model, rng);
    }
    sample_user_snr(model, rng) / (interference + 1.0)
}

/// Outage indicators of one slot under both decoding rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotOutcome {
    pub active: u64,
    pub capture_outage: bool,
    pub classical_outage: bool,
}

pub fn simulate_slot<R: Rng + ?Sized>(
    model: &SystemModel,
    arrivals: &Binomial,
    threshold: f64,
    rng: &mut R,
) -> SlotOutcome {
    let active = arrivals.sample(rng);
    if active == 0 {
        return SlotOutcome { active, capture_outage: false, classical_outage: false };
    }
    let n = u32::try_from(active).unwrap_or(u32::MAX);
    let sinr = sample_sinr(model, n, rng);
    let capture_outage = sinr < threshold;
    SlotOutcome { active, capture_outage, classical_outage: active >= 2 || capture_outage }
}

fn check_common(n_active: u32, threshold: f64, mc: &McConfig) -> Result<()> {
    mc.validate()?;
    if n_active == 0 {
        return Err(Error::Domain { quantity: "n_active", value: 0.0, expected: "n_active >= 1" });
    }
    if !(threshold > 0.0) {
        return Err(Error::Domain { quantity: "threshold", value: threshold, expected: "threshold > 0" });
    }
    Ok(())
}

pub fn simulate_conditional_outage(
    model: &SystemModel,
    n_active: u32,
    threshold: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    simulate_conditional_outage_with(&Serial, model, n_active, threshold, mc)
}

pub fn simulate_conditional_outage_with<E: ShardExecutor>(
    exec: &E,
    model: &SystemModel,
    n_active: u32,
    threshold: f64,
    mc: &McConfig,
) -> Result<McEstimate> {
    check_common(n_active, threshold, mc)?;
    let hits: u64 = exec
        .run(mc.shards(), |shard| {
            let mut rng = mc.shard_rng(shard);
            (0..mc.shard_len(shard)).filter(|_| sample_sinr(model, n_active, &mut rng) < threshold).count() as u64
        })
        .into_iter()
        .sum();
    Ok(McEstimate::from_counts(hits, mc.trials, mc.trials))
}

/// Counts over a run of Bernoulli-arrival slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SlotTally {
    pub slots: u64,
    pub active_slots: u64,
    pub capture_outages: u64,
    pub classical_outages: u64,
}

impl SlotTally {
    fn add(self, o: Self) -> Self {
        Self {
            slots: self.slots + o.slots,
            active_slots: self.active_slots + o.active_slots,
            capture_outages: self.capture_outages + o.capture_outages,
            classical_outages: self.classical_outages + o.classical_outages,
        }
    }

    pub fn estimate(&self, mode: CaptureMode, mixture: MixtureMode) -> McEstimate {
        let hits = match mode {
            CaptureMode::Capture => self.capture_outages,
            CaptureMode::Classical => self.classical_outages,
        };
        if self.active_slots == 0 {
            return McEstimate::from_counts(0, 0, 0);
        }
        let trials = match mixture {
            MixtureMode::Unnormalized => self.slots,
            MixtureMode::Conditional => self.active_slots,
        };
        McEstimate::from_counts(hits, trials, self.active_slots)
    }
}

/// Simulates `mc.trials` slots and tallies both decoding rules on the same draws.
pub fn simulate_slots_with<E: ShardExecutor>(
    exec: &E,
    model: &SystemModel,
    traffic: &TrafficModel,
    threshold: f64,
    mc: &McConfig,
) -> Result<SlotTally> {
    check_common(1, threshold, mc)?;
    let arrivals = Binomial::new(u64::from(traffic.population()), traffic.activation_prob())
        .map_err(|_| Error::InvalidParameter { name: "activation_prob", reason: "must lie in [0, 1]" })?;
    Ok(exec
        .run(mc.shards(), |shard| {
            let mut rng = mc.shard_rng(shard);
            let mut t = SlotTally::default();
            for _ in 0..mc.shard_len(shard) {
                let o = simulate_slot(model, &arrivals, threshold, &mut rng);
                t.slots += 1;
                t.active_slots += u64::from(o.active > 0);
                t.capture_outages += u64::from(o.capture_outage);
                t.classical_outages += u64::from(o.classical_outage);
            }
            t
        })
        .into_iter()
        .fold(SlotTally::default(), SlotTally::add))
}

pub fn simulate_unconditional_outage(
    model: &SystemModel,
    traffic: &TrafficModel,
    threshold: f64,
    mode: CaptureMode,
    mixture: MixtureMode,
    mc: &McConfig,
) -> Result<McEstimate> {
    simulate_unconditional_outage_with(&Serial, model, traffic, threshold, mode, mixture, mc)
}

pub fn simulate_unconditional_outage_with<E: ShardExecutor>(
    exec: &E,
    model: &SystemModel,
    traffic: &TrafficModel,
    threshold: f64,
    mode: CaptureMode,
    mixture: MixtureMode,
    mc: &McConfig,
) -> Result<McEstimate> {
    Ok(simulate_slots_with(exec, model, traffic, threshold, mc)?.estimate(mode, mixture))
}

/// `mc.trials` reference-user SINR draws with `n_active` users, in shard order.
pub fn sample_conditional_sinr_with<E: ShardExecutor>(
    exec: &E,
    model: &SystemModel,
    n_active: u32,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    check_common(n_active, 1.0, mc)?;
    Ok(exec
        .run(mc.shards(), |shard| {
            let mut rng = mc.shard_rng(shard);
            (0..mc.shard_len(shard)).map(|_| sample_sinr(model, n_active, &mut rng)).collect::<Vec<f64>>()
        })
        .into_iter()
        .flatten()
        .collect())
}

pub fn sample_conditional_sinr(model: &SystemModel, n_active: u32, mc: &McConfig) -> Result<Vec<f64>> {
    sample_conditional_sinr_with(&Serial, model, n_active, mc)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
/// Sorts `samples` in place.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < samples.len() {
        // Ties form one jump of the empirical CDF.
        let x = samples[i];
        let mut j = i + 1;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}
