//! Distribution of noise plus aggregate interference, `λ = 1 + Σ γ_i`.
//!
//! Tables are built by repeated convolution with the single-user SNR density,
//! one interferer at a time. Each table is uniform in the offset log variable
//! `v = ln(λ − λ_min + γ_min)`: far users pile up within `γ_min` of `λ_min`,
//! while at large `λ` only relative changes matter, and `v` resolves both.
//! The SNR range can span many decades for narrow beams, which a uniform
//! frequency grid cannot cover at a sensible cost.

use alloc::vec::Vec;

use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, QuadratureSpec};

/// Widest Gauss–Legendre panel, in units of the log variable.
pub(crate) const PANEL_WIDTH: f64 = 0.2;
pub(crate) const PANEL_POINTS: usize = 8;

/// Tabulated CDF of `λ = 1 + γ_I` for a fixed number of interferers.
#[derive(Debug, Clone)]
pub struct InterferencePlusNoise {
    model: SystemModel,
    interferers: u32,
    lo: f64,
    hi: f64,
    v0: f64,
    dv: f64,
    cdf: Vec<f64>,
    gl: GaussLegendre,
    min_panels: usize,
}

impl InterferencePlusNoise {
    /// `λ` with a single interferer; the table samples the closed-form CDF.
    pub fn single(model: &SystemModel, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.grid_points;
        let mut t = Self::layout(model, 1, n, (spec.lambda_nodes / PANEL_POINTS).max(1));
        let cdf = (0..n).map(|i| t.closed_form(t.lambda_node(i, n))).collect();
        t.cdf = cdf;
        t.pin_ends();
        Ok(t)
    }

    pub fn new(model: &SystemModel, interferers: u32, spec: &QuadratureSpec) -> Result<Self> {
        if interferers == 0 {
            return Err(Error::Domain { quantity: "n_interferers", value: 0.0, expected: "n_interferers >= 1" });
        }
        let mut t = Self::single(model, spec)?;
        for _ in 1..interferers {
            t = t.add_interferer();
        }
        Ok(t)
    }

    fn layout(model: &SystemModel, interferers: u32, points: usize, min_panels: usize) -> Self {
        let (a, b) = (model.snr_min(), model.snr_max());
        let n = f64::from(interferers);
        let (lo, hi) = (1.0 + n * a, 1.0 + n * b);
        let v0 = libm::log(a);
        let dv = (libm::log(hi - lo + a) - v0) / (points - 1) as f64;
        Self {
            model: *model,
            interferers,
            lo,
            hi,
            v0,
            dv,
            cdf: Vec::new(),
            gl: GaussLegendre::new(PANEL_POINTS),
            min_panels,
        }
    }

    fn pin_ends(&mut self) {
        let n = self.cdf.len();
        self.cdf[0] = 0.0;
        self.cdf[n - 1] = 1.0;
    }

    fn closed_form(&self, lambda: f64) -> f64 {
        let g = lambda - 1.0;
        if g <= 0.0 {
            0.0
        } else {
            self.model.snr_cdf_closed_form(g).unwrap_or(0.0)
        }
    }

    /// `i`-th of `n` table abscissae; the last one is pinned to the upper support.
    fn lambda_node(&self, i: usize, n: usize) -> f64 {
        if i + 1 == n {
            return self.hi;
        }
        self.lo - self.model.snr_min() + libm::exp(self.v0 + i as f64 * self.dv)
    }

    /// Table with one more interferer, by convolving with the SNR density.
    pub fn add_interferer(&self) -> Self {
        let n = self.cdf.len();
        let mut next = Self::layout(&self.model, self.interferers + 1, n, self.min_panels);
        next.cdf = (0..n).map(|i| self.convolved_cdf(next.lambda_node(i, n))).collect();
        next.pin_ends();
        next
    }

    /// `P[λ + γ ≤ z]` with `γ` a fresh SNR draw.
    fn convolved_cdf(&self, z: f64) -> f64 {
        let m = &self.model;
        let (a, b) = (m.snr_min(), m.snr_max());
        // γ small enough that λ is certainly below z − γ.
        let sure = if z - self.hi > a { m.snr_cdf_closed_form((z - self.hi).min(b)).unwrap_or(0.0) } else { 0.0 };
        let g0 = a.max(z - self.hi);
        let g1 = b.min(z - self.lo);
        if !(g1 > g0) {
            return sure.clamp(0.0, 1.0);
        }
        let k = m.lambertian_order() + 3.0;
        let c = m.snr_pdf_constant();
        let d = z - self.lo + a;
        let mid = (0.5 * d).clamp(g0, g1);
        // Below the split f varies fastest: integrate in ln γ.
        let lower = if mid > g0 {
            let (u0, u1) = (libm::log(g0), libm::log(mid));
            self.gl.integrate_composite(
                |u| {
                    let g = libm::exp(u);
                    c * libm::exp(-u / k) * self.cdf(z - g)
                },
                u0,
                u1,
                self.panels(u1 - u0),
            )
        } else {
            0.0
        };
        // Above it the table varies fastest: integrate in its own variable.
        let upper = if g1 > mid {
            // d − g1 directly: the subtraction cancels when snr_min is below one ulp of z.
            let (v0, v1) = (libm::log((z - self.lo - g1).max(0.0) + a), libm::log(d - mid));
            self.gl.integrate_composite(
                |v| {
                    let e = libm::exp(v);
                    let g = d - e;
                    c * libm::pow(g, -(k + 1.0) / k) * e * self.cdf_at_offset_log(v)
                },
                v0,
                v1,
                self.panels(v1 - v0),
            )
        } else {
            0.0
        };
        (sure + lower + upper).clamp(0.0, 1.0)
    }

    pub(crate) fn panels(&self, span: f64) -> usize {
        let by_width = libm::ceil(span / PANEL_WIDTH);
        if by_width.is_finite() && by_width > self.min_panels as f64 {
            by_width as usize
        } else {
            self.min_panels
        }
    }

    pub fn interferers(&self) -> u32 {
        self.interferers
    }

    /// `[1 + n·snr_min, 1 + n·snr_max]`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `v = ln(λ − λ_min + snr_min)`.
    pub fn offset_log(&self, lambda: f64) -> f64 {
        // Round-off can put λ a hair below λ_min when snr_min is far below one ulp of λ.
        libm::log((lambda - self.lo).max(0.0) + self.model.snr_min())
    }

    pub fn cdf(&self, lambda: f64) -> f64 {
        if lambda <= self.lo {
            return 0.0;
        }
        if lambda >= self.hi {
            return 1.0;
        }
        if self.interferers == 1 {
            return self.closed_form(lambda);
        }
        self.interpolate(self.offset_log(lambda))
    }

    /// CDF at offset-log coordinate `v`.
    pub fn cdf_at_offset_log(&self, v: f64) -> f64 {
        if self.interferers == 1 {
            return self.cdf(self.lo - self.model.snr_min() + libm::exp(v));
        }
        if v <= self.v0 {
            return 0.0;
        }
        self.interpolate(v)
    }

    fn interpolate(&self, v: f64) -> f64 {
        let n = self.cdf.len();
        let t = (v - self.v0) / self.dv;
        if !(t < (n - 1) as f64) {
            return 1.0;
        }
        let i = libm::floor(t) as usize;
        let w = t - i as f64;
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Abscissae of the table in `λ`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.cdf.len();
        (0..n).map(|i| self.lambda_node(i, n)).collect()
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::interference_pdf_convolution;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn single_interferer_is_shifted_snr() {
        let m = SystemModel::reference();
        let t = InterferencePlusNoise::single(&m, &spec()).unwrap();
        assert_eq!(t.support(), (1.0 + m.snr_min(), 1.0 + m.snr_max()));
        let g = t.grid();
        assert_eq!(g[0], t.support().0);
        assert_eq!(*g.last().unwrap(), t.support().1);
        for x in [2.0, 5.0, 30.0, 61.0] {
            assert_eq!(t.cdf(x), m.snr_cdf_closed_form(x - 1.0).unwrap());
        }
    }

    #[test]
    fn matches_uniform_grid_convolution() {
        // The uniform-grid oracle works in γ_I, here shifted by the unit noise.
        let m = SystemModel::reference();
        for n in [2u32, 3, 4] {
            let t = InterferencePlusNoise::new(&m, n, &spec()).unwrap();
            let oracle = interference_pdf_convolution(&m, n, &spec()).unwrap();
            let mut worst = 0.0f64;
            for &x in oracle.grid() {
                worst = worst.max((t.cdf(x + 1.0) - oracle.cdf_at(x)).abs());
            }
            assert!(worst < 2e-4, "n={n}: {worst}");
        }
    }

    #[test]
    fn refining_the_table_changes_little() {
        // Narrow beam: the SNR range covers almost nine decades.
        let m = SystemModel::reference().with_semi_angle(15f64.to_radians()).unwrap();
        assert!(m.snr_max() / m.snr_min() > 1e8);
        let coarse = InterferencePlusNoise::new(&m, 3, &spec()).unwrap();
        let fine = InterferencePlusNoise::new(&m, 3, &QuadratureSpec { grid_points: 8192, ..spec() }).unwrap();
        let mut worst = 0.0f64;
        for x in fine.grid().iter().step_by(7) {
            worst = worst.max((coarse.cdf(*x) - fine.cdf(*x)).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn mean_is_additive() {
        // E[λ] = 1 + n E[γ]; by parts, E[λ] = hi − ∫ F over the support.
        let m = SystemModel::reference().with_height(1.5).unwrap();
        let gl = GaussLegendre::new(32);
        let mean1 = gl.integrate_composite(
            |y| {
                let g = libm::exp(y);
                g * g * m.snr_pdf(g)
            },
            libm::log(m.snr_min()),
            libm::log(m.snr_max()),
            64,
        );
        let t = InterferencePlusNoise::new(&m, 3, &spec()).unwrap();
        let (lo, hi) = t.support();
        let integral = gl.integrate_composite(
            |v| {
                let e = libm::exp(v);
                e * t.cdf_at_offset_log(v)
            },
            t.offset_log(lo),
            t.offset_log(hi),
            2048,
        );
        let mean = hi - integral;
        let expected = 1.0 + 3.0 * mean1;
        assert!(((mean - expected) / expected).abs() < 1e-4, "{mean} vs {expected}");
    }

    #[test]
    fn snr_floor_below_machine_precision() {
        // At 1 m and 15° the far-edge SNR is ~1e-18, well under one ulp of λ.
        let m = SystemModel::reference().with_height(1.0).unwrap().with_semi_angle(15f64.to_radians()).unwrap();
        assert!(m.snr_min() < 1e-17);
        let t = InterferencePlusNoise::new(&m, 3, &spec()).unwrap();
        let c = t.cdf_values();
        assert!(c.iter().all(|v| v.is_finite()));
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_interferers_rejected() {
        assert!(InterferencePlusNoise::new(&SystemModel::reference(), 0, &spec()).is_err());
    }
}
