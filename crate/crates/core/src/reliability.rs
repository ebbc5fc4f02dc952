//! Outage probability of the reference user under Bernoulli arrivals.
//!
//! The conditional outage `P_out(n)` for `n` active users is mixed over the
//! binomial number of active users. `Classical` is slotted ALOHA without
//! capture: any collision is lost and a lone user still has to beat noise.

use alloc::vec::Vec;

use crate::aggregate::InterferencePlusNoise;
use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::montecarlo::{simulate_slots_with, McConfig, McEstimate, Serial, ShardExecutor};
use crate::quadrature::QuadratureSpec;
use crate::sinr::{conditional_sinr_cdf, sinr_support, ConditionalSinr};

/// Binomial tail mass below which the mixture is truncated.
pub const TAIL_CUTOFF: f64 = 1e-9;
/// Binomial terms smaller than this are skipped without evaluating `P_out(n)`.
pub const HEAD_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    population: u32,
    activation_prob: f64,
}

impl TrafficModel {
    pub fn new(population: u32, activation_prob: f64) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidParameter { name: "users", reason: "population must be at least 1" });
        }
        if !(0.0..=1.0).contains(&activation_prob) {
            return Err(Error::InvalidParameter { name: "pa", reason: "activation probability must lie in [0, 1]" });
        }
        Ok(Self { population, activation_prob })
    }

    pub fn population(&self) -> u32 {
        self.population
    }
    pub fn activation_prob(&self) -> f64 {
        self.activation_prob
    }

    pub fn with_population(&self, population: u32) -> Result<Self> {
        Self::new(population, self.activation_prob)
    }

    pub fn with_activation_prob(&self, activation_prob: f64) -> Result<Self> {
        Self::new(self.population, activation_prob)
    }

    /// `P[no user active]`.
    pub fn idle_prob(&self) -> f64 {
        libm::exp(f64::from(self.population) * libm::log1p(-self.activation_prob))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaptureMode {
    /// The strongest-enough user is decoded despite a collision.
    #[default]
    Capture,
    /// Collisions are destructive.
    Classical,
}

/// How empty slots enter the unconditional outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureMode {
    /// Sum over `n >= 1` weighted by the unrestricted binomial; empty slots count as no outage.
    #[default]
    Unnormalized,
    /// Same sum conditioned on at least one active user.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageQuery {
    /// Linear SINR threshold.
    pub threshold: f64,
    pub mode: CaptureMode,
    pub mixture: MixtureMode,
}

impl OutageQuery {
    pub fn new(threshold: f64, mode: CaptureMode, mixture: MixtureMode) -> Result<Self> {
        let q = Self { threshold, mode, mixture };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::InvalidParameter { name: "threshold", reason: "must be finite and positive" });
        }
        Ok(())
    }

    pub fn with_mode(self, mode: CaptureMode) -> Self {
        Self { mode, ..self }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

// Exact ln(n!) − ln(√(2π n) (n/e)^n) for small n.
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return STIRLERR_TABLE[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// `x ln(x/np) + np − x`, accurate when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * libm::log(x / np) + np - x
}

/// `P[U_a = n]`, by the saddle-point expansion so that large populations do not
/// lose precision.
pub fn binomial_pmf(traffic: &TrafficModel, n: u32) -> Result<f64> {
    let big_n = traffic.population;
    if n > big_n {
        return Err(Error::Domain { quantity: "n", value: f64::from(n), expected: "n <= population" });
    }
    let p = traffic.activation_prob;
    let q = 1.0 - p;
    let (x, nf) = (f64::from(n), f64::from(big_n));
    if p == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if q == 0.0 {
        return Ok(if n == big_n { 1.0 } else { 0.0 });
    }
    if n == 0 {
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * libm::log(q) };
        return Ok(libm::exp(lc));
    }
    if n == big_n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * libm::log(p) };
        return Ok(libm::exp(lc));
    }
    let lc = stirlerr(nf) - stirlerr(x) - stirlerr(nf - x) - bd0(x, nf * p) - bd0(nf - x, nf * q);
    let lf = libm::log(2.0 * core::f64::consts::PI) + libm::log(x) + libm::log1p(-x / nf);
    Ok(libm::exp(lc - 0.5 * lf))
}

/// `P[SINR < threshold | n_active]` under the query's decoding rule.
pub fn conditional_outage(
    model: &SystemModel,
    n_active: u32,
    query: &OutageQuery,
    spec: &QuadratureSpec,
) -> Result<f64> {
    query.validate()?;
    match query.mode {
        CaptureMode::Classical if n_active >= 2 => Ok(1.0),
        // A lone user faces only noise under either rule.
        _ => conditional_sinr_cdf(model, n_active, query.threshold, spec),
    }
}

/// Lazily evaluated capture outage `P_out(n)` for one model and threshold.
///
/// Reusing one curve across populations and activation probabilities avoids
/// recomputing the interference distributions.
#[derive(Debug, Clone)]
pub struct OutageCurve {
    model: SystemModel,
    threshold: f64,
    spec: QuadratureSpec,
    capture: Vec<Option<f64>>,
    /// `tables[j]` holds the distribution of noise plus `j + 1` interferers.
    tables: Vec<InterferencePlusNoise>,
    certain_from: u32,
}

impl OutageCurve {
    pub fn new(model: &SystemModel, threshold: f64, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        OutageQuery::new(threshold, CaptureMode::Capture, MixtureMode::Unnormalized)?;
        // Smallest n whose best possible SINR cannot reach the threshold;
        // u32::MAX stands for "no realistic n".
        let guess = 1.0 + libm::ceil((model.snr_max() / threshold - 1.0) / model.snr_min());
        let mut n = if guess.is_finite() { guess.clamp(1.0, f64::from(u32::MAX)) as u32 } else { u32::MAX };
        while n > 1 && sinr_support(model, n - 1).1 <= threshold {
            n -= 1;
        }
        while n < u32::MAX && sinr_support(model, n).1 > threshold {
            n += 1;
        }
        Ok(Self { model: *model, threshold, spec: *spec, capture: Vec::new(), tables: Vec::new(), certain_from: n })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// From this many active users on, capture outage is certain.
    pub fn certain_from(&self, mode: CaptureMode) -> u32 {
        match mode {
            CaptureMode::Capture => self.certain_from,
            CaptureMode::Classical => self.certain_from.min(2),
        }
    }

    pub fn outage(&mut self, n_active: u32, mode: CaptureMode) -> Result<f64> {
        if n_active == 0 {
            return Err(Error::Domain { quantity: "n_active", value: 0.0, expected: "n_active >= 1" });
        }
        if n_active >= self.certain_from(mode) {
            return Ok(1.0);
        }
        let i = (n_active - 1) as usize;
        if self.capture.len() <= i {
            self.capture.resize(i + 1, None);
        }
        if let Some(v) = self.capture[i] {
            return Ok(v);
        }
        let v = if n_active == 1 {
            conditional_sinr_cdf(&self.model, 1, self.threshold, &self.spec)?
        } else {
            let lambda = self.interference(n_active - 1)?.clone();
            ConditionalSinr::with_interference(&self.model, lambda, &self.spec)?.cdf(self.threshold)
        };
        self.capture[i] = Some(v);
        Ok(v)
    }

    fn interference(&mut self, interferers: u32) -> Result<&InterferencePlusNoise> {
        if self.tables.is_empty() {
            self.tables.push(InterferencePlusNoise::single(&self.model, &self.spec)?);
        }
        while self.tables.len() < interferers as usize {
            let next = self.tables[self.tables.len() - 1].add_interferer();
            self.tables.push(next);
        }
        Ok(&self.tables[interferers as usize - 1])
    }

    pub fn unconditional(&mut self, traffic: &TrafficModel, mode: CaptureMode, mixture: MixtureMode) -> Result<f64> {
        let p = traffic.activation_prob();
        if p == 0.0 {
            return match mixture {
                MixtureMode::Unnormalized => Ok(0.0),
                // Limit p → 0: the only active user is alone.
                MixtureMode::Conditional => self.outage(1, mode),
            };
        }
        let certain = self.certain_from(mode);
        let mut cum = binomial_pmf(traffic, 0)?;
        let mut sum = 0.0;
        for n in 1..=traffic.population() {
            if n >= certain {
                sum += (1.0 - cum).max(0.0);
                break;
            }
            let w = binomial_pmf(traffic, n)?;
            cum += w;
            if w >= HEAD_CUTOFF {
                sum += w * self.outage(n, mode)?;
            }
            if f64::from(n) >= f64::from(traffic.population()) * p && 1.0 - cum < TAIL_CUTOFF {
                break;
            }
        }
        let value = match mixture {
            MixtureMode::Unnormalized => sum,
            MixtureMode::Conditional => sum / (1.0 - traffic.idle_prob()),
        };
        Ok(value.clamp(0.0, 1.0))
    }
}

/// Outage averaged over the binomial number of active users.
pub fn unconditional_outage(
    model: &SystemModel,
    traffic: &TrafficModel,
    query: &OutageQuery,
    spec: &QuadratureSpec,
) -> Result<f64> {
    query.validate()?;
    OutageCurve::new(model, query.threshold, spec)?.unconditional(traffic, query.mode, query.mixture)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Users,
    /// Values in radians.
    SemiAngle,
    /// Values in metres.
    Radius,
    ActivationProb,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Users => "users",
            SweepAxis::SemiAngle => "semi_angle",
            SweepAxis::Radius => "radius",
            SweepAxis::ActivationProb => "activation_prob",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "users" => Some(SweepAxis::Users),
            "semi_angle" => Some(SweepAxis::SemiAngle),
            "radius" => Some(SweepAxis::Radius),
            "activation_prob" | "pa" => Some(SweepAxis::ActivationProb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub p_out_capture: f64,
    pub p_out_classical: f64,
    pub mc: Option<McEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub outcome: Result<SweepValues>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    /// `(param, capture, classical)` for the rows that succeeded.
    pub fn values(&self) -> Vec<(f64, f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|v| (r.param, v.p_out_capture, v.p_out_classical)))
            .collect()
    }
}

pub fn sweep(
    model: &SystemModel,
    traffic: &TrafficModel,
    query: &OutageQuery,
    axis: SweepAxis,
    values: &[f64],
    spec: &QuadratureSpec,
    mc: Option<&McConfig>,
) -> Result<SweepResult> {
    sweep_with(&Serial, model, traffic, query, axis, values, spec, mc)
}

/// Capture and classical outage per value of `axis`; the Monte Carlo column
/// follows the query's mode and mixture. A failing row does not stop the sweep.
#[allow(clippy::too_many_arguments)]
pub fn sweep_with<E: ShardExecutor>(
    exec: &E,
    model: &SystemModel,
    traffic: &TrafficModel,
    query: &OutageQuery,
    axis: SweepAxis,
    values: &[f64],
    spec: &QuadratureSpec,
    mc: Option<&McConfig>,
) -> Result<SweepResult> {
    query.validate()?;
    spec.validate()?;
    if values.is_empty() {
        return Err(Error::InvalidParameter { name: "values", reason: "sweep needs at least one value" });
    }
    if !values.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter { name: "values", reason: "sweep values must be strictly increasing" });
    }
    let shares_model = matches!(axis, SweepAxis::Users | SweepAxis::ActivationProb);
    let mut shared = if shares_model { Some(OutageCurve::new(model, query.threshold, spec)?) } else { None };

    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let outcome = (|| {
            let (m, t) = row_inputs(model, traffic, axis, v)?;
            let mut fresh;
            let curve = match shared.as_mut() {
                Some(c) => c,
                None => {
                    fresh = OutageCurve::new(&m, query.threshold, spec)?;
                    &mut fresh
                }
            };
            let p_out_capture = curve.unconditional(&t, CaptureMode::Capture, query.mixture)?;
            let p_out_classical = curve.unconditional(&t, CaptureMode::Classical, query.mixture)?;
            let mc = match mc {
                Some(c) => {
                    Some(simulate_slots_with(exec, &m, &t, query.threshold, c)?.estimate(query.mode, query.mixture))
                }
                None => None,
            };
            Ok(SweepValues { p_out_capture, p_out_classical, mc })
        })();
        rows.push(SweepRow { param: v, outcome });
    }
    Ok(SweepResult { axis, rows })
}

fn row_inputs(
    model: &SystemModel,
    traffic: &TrafficModel,
    axis: SweepAxis,
    v: f64,
) -> Result<(SystemModel, TrafficModel)> {
    match axis {
        SweepAxis::Users => {
            if !(v >= 1.0 && v <= f64::from(u32::MAX) && libm::trunc(v) == v) {
                return Err(Error::InvalidParameter { name: "users", reason: "must be a positive integer" });
            }
            Ok((*model, traffic.with_population(v as u32)?))
        }
        SweepAxis::ActivationProb => Ok((*model, traffic.with_activation_prob(v)?)),
        SweepAxis::SemiAngle => Ok((model.with_semi_angle(v)?, *traffic)),
        SweepAxis::Radius => Ok((model.with_radius(v)?, *traffic)),
    }
}
