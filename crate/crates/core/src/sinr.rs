//! SINR of the reference user given the number of active users.
//!
//! With `n` active users the reference SINR is `γ / λ`, where `γ` is the
//! reference user's SNR and `λ = γ_I + 1` collects the `n − 1` interferers
//! plus unit noise. The density is the ratio integral
//! `f(x) = ∫ λ f_γ(xλ) dF_λ(λ)` over the positive support of `λ`; the CDF is
//! evaluated as `∫ f_γ(γ) P[λ > γ/x] dγ`, the same double integral taken in
//! the other order.

use alloc::vec::Vec;

use crate::aggregate::{InterferencePlusNoise, PANEL_POINTS, PANEL_WIDTH};
use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::quadrature::{log_grid, GaussLegendre, QuadratureSpec};
use crate::tabulated::{cumulative_trapezoid, TabulatedDistribution};

/// Support `[lo, hi]` of the SINR with `n_active` users.
pub fn sinr_support(model: &SystemModel, n_active: u32) -> (f64, f64) {
    let others = n_active.saturating_sub(1) as f64;
    let (a, b) = (model.snr_min(), model.snr_max());
    (a / (others * b + 1.0).max(1.0), b / (others * a + 1.0).max(1.0))
}

/// The reference-user SINR distribution for a fixed number of active users.
#[derive(Debug, Clone)]
pub struct ConditionalSinr {
    model: SystemModel,
    n_active: u32,
    lambda: Option<InterferencePlusNoise>,
    min_panels: usize,
    gl: GaussLegendre,
    grid_points: usize,
}

impl ConditionalSinr {
    pub fn new(model: &SystemModel, n_active: u32, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if n_active == 0 {
            return Err(Error::Domain { quantity: "n_active", value: 0.0, expected: "n_active >= 1" });
        }
        let lambda = if n_active >= 2 { Some(InterferencePlusNoise::new(model, n_active - 1, spec)?) } else { None };
        Ok(Self::assemble(model, n_active, lambda, spec))
    }

    /// Reuses an already built interference table with `n_active − 1` interferers.
    pub fn with_interference(
        model: &SystemModel,
        lambda: InterferencePlusNoise,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        spec.validate()?;
        Ok(Self::assemble(model, lambda.interferers() + 1, Some(lambda), spec))
    }

    fn assemble(
        model: &SystemModel,
        n_active: u32,
        lambda: Option<InterferencePlusNoise>,
        spec: &QuadratureSpec,
    ) -> Self {
        Self {
            model: *model,
            n_active,
            lambda,
            min_panels: (spec.lambda_nodes / PANEL_POINTS).max(2),
            gl: GaussLegendre::new(PANEL_POINTS),
            grid_points: spec.grid_points,
        }
    }

    pub fn n_active(&self) -> u32 {
        self.n_active
    }

    pub fn support(&self) -> (f64, f64) {
        sinr_support(&self.model, self.n_active)
    }

    /// Distribution of noise plus interference, when there is interference.
    pub fn interference(&self) -> Option<&InterferencePlusNoise> {
        self.lambda.as_ref()
    }

    fn panels(&self, span: f64) -> usize {
        let w = libm::ceil(span / PANEL_WIDTH);
        if w.is_finite() && w > self.min_panels as f64 {
            w as usize
        } else {
            self.min_panels
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let Some(lambda) = &self.lambda else {
            return self.model.snr_pdf(x);
        };
        if !(x > 0.0) {
            return 0.0;
        }
        let (a, b) = (self.model.snr_min(), self.model.snr_max());
        let (lo, hi) = lambda.support();
        let lam_lo = lo.max(a / x);
        let lam_hi = hi.min(b / x);
        if !(lam_hi > lam_lo) {
            return 0.0;
        }
        // Midpoint Stieltjes sum against the tabulated CDF of λ.
        let grid = lambda.grid();
        let cdf = lambda.cdf_values();
        let start = grid.partition_point(|&g| g <= lam_lo);
        let mut total = 0.0;
        let (mut l0, mut f0) = (lam_lo, lambda.cdf(lam_lo));
        for (&g, &f) in grid[start..].iter().zip(&cdf[start..]) {
            let (l1, f1) = if g >= lam_hi { (lam_hi, lambda.cdf(lam_hi)) } else { (g, f) };
            let mid = 0.5 * (l0 + l1);
            total += mid * power_law(&self.model, x * mid) * (f1 - f0);
            if g >= lam_hi {
                break;
            }
            (l0, f0) = (l1, f1);
        }
        total
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let (a, b) = (self.model.snr_min(), self.model.snr_max());
        let Some(lambda) = &self.lambda else {
            return snr_mass(&self.model, &self.gl, a, x);
        };
        let (lam_lo, lam_hi) = lambda.support();
        // Below x·λ_min the reference user always loses; above x·λ_max never.
        let sure = snr_mass(&self.model, &self.gl, a, (x * lam_lo).min(b));
        let (g_lo, g_hi) = (a.max(x * lam_lo), b.min(x * lam_hi));
        if !(g_hi > g_lo) {
            return sure.clamp(0.0, 1.0);
        }
        // Integrate in the table's own variable, where P[λ > γ/x] is smooth.
        let (v0, v1) = (lambda.offset_log(g_lo / x), lambda.offset_log(g_hi / x));
        let shift = lam_lo - a;
        let contested = self.gl.integrate_composite(
            |v| {
                let e = libm::exp(v);
                let g = x * (shift + e);
                power_law(&self.model, g) * x * e * (1.0 - lambda.cdf_at_offset_log(v))
            },
            v0,
            v1,
            self.panels(v1 - v0),
        );
        (sure + contested).clamp(0.0, 1.0)
    }

    /// PDF on a log-spaced grid over the SINR support. The CDF column is the
    /// running trapezoid of the sampled PDF, so the two columns agree exactly;
    /// [`ConditionalSinr::cdf`] is the sharper pointwise value.
    pub fn tabulate(&self) -> Result<TabulatedDistribution> {
        let (lo, hi) = self.support();
        let grid = log_grid(lo, hi, self.grid_points);
        let pdf: Vec<f64> = grid.iter().map(|&x| self.pdf(x)).collect();
        let cdf = cumulative_trapezoid(&grid, &pdf);
        TabulatedDistribution::new(grid, pdf, cdf)
    }
}

fn power_law(model: &SystemModel, x: f64) -> f64 {
    if !(model.snr_min()..=model.snr_max()).contains(&x) {
        return 0.0;
    }
    let k = model.lambertian_order() + 3.0;
    model.snr_pdf_constant() * libm::pow(x, -(k + 1.0) / k)
}

/// `∫_lo^hi f_γ` by Gauss–Legendre in `ln γ`, where the integrand is a single exponential.
fn snr_mass(model: &SystemModel, gl: &GaussLegendre, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(model.snr_min());
    let hi = hi.min(model.snr_max());
    if !(hi > lo) {
        return 0.0;
    }
    let k = model.lambertian_order() + 3.0;
    let c = model.snr_pdf_constant();
    let (u0, u1) = (libm::log(lo), libm::log(hi));
    let panels = (libm::ceil((u1 - u0) / k) as usize).max(4);
    gl.integrate_composite(|y| c * libm::exp(-y / k), u0, u1, panels)
}

/// Tabulated SINR density of the reference user with `n_active` users active.
pub fn conditional_sinr_pdf(
    model: &SystemModel,
    n_active: u32,
    spec: &QuadratureSpec,
) -> Result<TabulatedDistribution> {
    ConditionalSinr::new(model, n_active, spec)?.tabulate()
}

/// `P[SINR < threshold]` with `n_active` users active.
pub fn conditional_sinr_cdf(model: &SystemModel, n_active: u32, threshold: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::Domain { quantity: "threshold", value: threshold, expected: "threshold > 0" });
    }
    if n_active == 0 {
        return Err(Error::Domain { quantity: "n_active", value: 0.0, expected: "n_active >= 1" });
    }
    let (lo, hi) = sinr_support(model, n_active);
    if threshold <= lo {
        return Ok(0.0);
    }
    if threshold >= hi {
        return Ok(1.0);
    }
    Ok(ConditionalSinr::new(model, n_active, spec)?.cdf(threshold))
}
