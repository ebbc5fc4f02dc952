//! Density of the aggregate interference `γ_I = γ_1 + … + γ_n`.
//!
//! Two independent routes:
//!
//! * [`interference_pdf`] inverts `φ(t)^n` numerically. The inverse integral
//!   is sampled on the uniform frequency grid `t_k = kπ/W` matched to the
//!   exact support `[n·snr_min, n·snr_max]` of width `W`, which turns the
//!   truncated integral into a cosine series of the density on its support.
//!   The even extension behind the cosine series keeps the support edges free
//!   of jump discontinuities, so truncation error stays small right up to the
//!   edges where the single-user density jumps.
//! * [`interference_pdf_convolution`] convolves the sampled single-user
//!   density with itself on a uniform grid, trapezoid rule throughout.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::cf::UniformCf;
use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::quadrature::{log_grid, QuadratureSpec};
use crate::tabulated::{cumulative_trapezoid, trapezoid, TabulatedDistribution};

/// The frequency axis stops once `|φ(t)|^n` stays below this for [`DECAY_RUN`] samples.
pub const CF_DECAY_THRESHOLD: f64 = 1e-8;
const DECAY_RUN: usize = 64;
/// Largest mass change allowed when clipping negative ringing.
pub const RENORMALIZATION_BUDGET: f64 = 1e-2;
/// Largest CDF error estimate accepted from the convolution route.
pub const CONVOLUTION_TOLERANCE: f64 = 1e-4;

/// What the inversion did to produce its table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionDiagnostics {
    /// Cosine terms kept.
    pub terms: usize,
    /// Largest frequency sampled.
    pub t_max: f64,
    /// `|mass after clipping − 1|`.
    pub renormalization: f64,
}

fn check_count(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain { quantity: "n_interferers", value: 0.0, expected: "n_interferers >= 1" });
    }
    Ok(())
}

/// Density of the sum of `n_interferers` user SNRs by Fourier inversion.
pub fn interference_pdf(
    model: &SystemModel,
    n_interferers: u32,
    spec: &QuadratureSpec,
) -> Result<TabulatedDistribution> {
    interference_pdf_with_diagnostics(model, n_interferers, spec).map(|(d, _)| d)
}

pub fn interference_pdf_with_diagnostics(
    model: &SystemModel,
    n_interferers: u32,
    spec: &QuadratureSpec,
) -> Result<(TabulatedDistribution, InversionDiagnostics)> {
    spec.validate()?;
    check_count(n_interferers)?;
    let n = n_interferers as f64;
    let (lo, hi) = (n * model.snr_min(), n * model.snr_max());
    let width = hi - lo;
    let step = PI / width;
    let cap = spec.inversion_nodes.min(libm::floor(spec.inversion_t_max / step) as usize + 1).max(1);

    let shift = lo / width;
    let mut coeffs = Vec::with_capacity(cap);
    let mut quiet = 0;
    for (k, phi) in UniformCf::new(model, step, (cap - 1) as f64 * step, spec)?.take(cap).enumerate() {
        let phi_n = phi.powu(n_interferers);
        // e^{-j t_k lo} with t_k lo = kπ·shift, reduced mod 2π before scaling.
        let turns = libm::fmod(k as f64 * shift, 2.0);
        let (s, c) = libm::sincos(PI * turns);
        coeffs.push(2.0 / width * (phi_n * Complex64::new(c, -s)).re);
        if phi_n.norm() < CF_DECAY_THRESHOLD {
            quiet += 1;
            if quiet >= DECAY_RUN {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    coeffs[0] *= 0.5;
    let terms = coeffs.len();

    let grid = log_grid(lo, hi, spec.grid_points);
    let raw: Vec<f64> = grid.iter().map(|&x| cosine_sum(&coeffs, PI * (x - lo) / width)).collect();
    let clipped: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    let mass = trapezoid(&grid, &clipped);
    let renormalization = (mass - 1.0).abs();
    if !(renormalization < RENORMALIZATION_BUDGET) {
        return Err(Error::Renormalization { correction: renormalization, budget: RENORMALIZATION_BUDGET });
    }
    let table = TabulatedDistribution::from_pdf(grid, clipped)?;
    Ok((table, InversionDiagnostics { terms, t_max: (terms - 1) as f64 * step, renormalization }))
}

/// `Σ c_k cos(kθ)` with the cosines generated by rotation.
fn cosine_sum(coeffs: &[f64], theta: f64) -> f64 {
    const RESYNC: usize = 1024;
    let (s, c) = libm::sincos(theta);
    let step = Complex64::new(c, s);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (k, &ck) in coeffs.iter().enumerate() {
        if k % RESYNC == 0 && k > 0 {
            let (s, c) = libm::sincos(libm::fmod(k as f64 * theta, 2.0 * PI));
            rot = Complex64::new(c, s);
        }
        acc += ck * rot.re;
        rot *= step;
    }
    acc
}

/// Density of the sum of `n_interferers` user SNRs by repeated grid convolution.
pub fn interference_pdf_convolution(
    model: &SystemModel,
    n_interferers: u32,
    spec: &QuadratureSpec,
) -> Result<TabulatedDistribution> {
    spec.validate()?;
    check_count(n_interferers)?;
    let n = n_interferers as f64;
    let (a, b) = (model.snr_min(), model.snr_max());
    let grid = log_grid(n * a, n * b, spec.grid_points);
    if n_interferers == 1 {
        let pdf = grid.iter().map(|&x| power_law(model, x)).collect();
        return TabulatedDistribution::from_pdf(grid, pdf);
    }

    let fine_nodes = spec.convolution_nodes;
    let fine = convolve_power(model, n_interferers, fine_nodes);
    let coarse = convolve_power(model, n_interferers, fine_nodes / 2);

    // Richardson-style estimate of the O(h²) error from the halved grid.
    let fine_cdf = cumulative_trapezoid(&uniform_axis(n * a, n * b, fine.len()), &fine);
    let coarse_cdf = cumulative_trapezoid(&uniform_axis(n * a, n * b, coarse.len()), &coarse);
    let estimate = coarse_cdf.iter().enumerate().map(|(i, c)| (fine_cdf[2 * i] - c).abs()).fold(0.0, f64::max) / 3.0;
    if estimate > CONVOLUTION_TOLERANCE {
        return Err(Error::ConvolutionTooCoarse { estimate, tolerance: CONVOLUTION_TOLERANCE });
    }

    let h = (b - a) / fine_nodes as f64;
    let lo = n * a;
    let last = fine.len() - 1;
    let pdf = grid
        .iter()
        .map(|&x| {
            let pos = ((x - lo) / h).clamp(0.0, last as f64);
            let i = (libm::floor(pos) as usize).min(last - 1);
            let w = pos - i as f64;
            fine[i] + w * (fine[i + 1] - fine[i])
        })
        .collect();
    TabulatedDistribution::from_pdf(grid, pdf)
}

fn uniform_axis(lo: f64, hi: f64, len: usize) -> Vec<f64> {
    let h = (hi - lo) / (len - 1) as f64;
    (0..len).map(|i| lo + i as f64 * h).collect()
}

/// Single-user density without the support indicator, so grid end points
/// carry the one-sided limits.
fn power_law(model: &SystemModel, x: f64) -> f64 {
    let k = model.lambertian_order() + 3.0;
    model.snr_pdf_constant() * libm::pow(x, -(k + 1.0) / k)
}

/// `n`-fold self-convolution of the single-user density sampled at `nodes + 1`
/// points; the result lives on `[n·a, n·b]` with the same spacing.
fn convolve_power(model: &SystemModel, n: u32, nodes: usize) -> Vec<f64> {
    let (a, b) = (model.snr_min(), model.snr_max());
    let h = (b - a) / nodes as f64;
    let f: Vec<f64> = (0..=nodes).map(|j| power_law(model, a + j as f64 * h)).collect();
    let mut g = f.clone();
    for _ in 1..n {
        let len = g.len() + nodes;
        let mut next = alloc::vec![0.0; len];
        for (i, out) in next.iter_mut().enumerate() {
            let j_lo = i.saturating_sub(g.len() - 1);
            let j_hi = i.min(nodes);
            if j_hi <= j_lo {
                continue;
            }
            let interior: f64 = (j_lo + 1..j_hi).map(|j| f[j] * g[i - j]).sum();
            let ends = 0.5 * (f[j_lo] * g[i - j_lo] + f[j_hi] * g[i - j_hi]);
            *out = h * (interior + ends);
        }
        g = next;
    }
    g
}
