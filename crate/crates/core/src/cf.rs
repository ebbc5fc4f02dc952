//! Characteristic function of one user's SNR and of the interference sum.
//!
//! The defining integral `∫ e^{jtγ} f(γ) dγ` over `[snr_min, snr_max]` is
//! evaluated with a Filon-type rule: on each panel the power-law amplitude is
//! replaced by its quadratic interpolant and the oscillatory factor is
//! integrated exactly, so the cost does not grow with `t`. Panels are
//! geometric to follow the power-law head. Panel counts are doubled until two
//! successive rules agree to `rel_tol`, then the pair is Richardson-combined.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::SystemModel;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

pub type ComplexValue = Complex64;

const START_PANELS: usize = 32;
/// Rotor updates between exact re-synchronisations.
const RESYNC: usize = 256;

#[derive(Debug, Clone, Copy)]
struct Panel {
    center: f64,
    half: f64,
    /// Quadratic interpolant `a0 + a1 u + a2 u²` on `u ∈ [-1, 1]`.
    coeffs: [f64; 3],
}

#[derive(Debug, Clone)]
struct FilonRule {
    panels: Vec<Panel>,
}

impl FilonRule {
    fn new(model: &SystemModel, panels: usize) -> Self {
        let (lo, hi) = (model.snr_min(), model.snr_max());
        let c = model.snr_pdf_constant();
        let k = model.lambertian_order() + 3.0;
        let exponent = -(k + 1.0) / k;
        let amp = |x: f64| c * libm::pow(x, exponent);
        let ratio = libm::log(hi / lo);
        let edge = |i: usize| {
            if i == 0 {
                lo
            } else if i == panels {
                hi
            } else {
                lo * libm::exp(ratio * i as f64 / panels as f64)
            }
        };
        let panels = (0..panels)
            .map(|i| {
                let (x0, x2) = (edge(i), edge(i + 1));
                let center = 0.5 * (x0 + x2);
                let (g0, g1, g2) = (amp(x0), amp(center), amp(x2));
                Panel { center, half: 0.5 * (x2 - x0), coeffs: [g1, 0.5 * (g2 - g0), 0.5 * (g0 + g2) - g1] }
            })
            .collect();
        Self { panels }
    }

    fn eval(&self, t: f64) -> Complex64 {
        self.panels
            .iter()
            .map(|p| {
                let (sc, cc) = libm::sincos(t * p.center);
                let theta = t * p.half;
                let (s, c) = libm::sincos(theta);
                panel_value(p, theta, Complex64::new(c, s)) * Complex64::new(cc, sc)
            })
            .sum()
    }
}

/// `∫_{-1}^{1} u^k e^{jθu} du` for k = 0, 1, 2, returned as `(M0, Im M1, M2)`;
/// `M0` and `M2` are real and `M1` purely imaginary.
fn moments(theta: f64, rot: Complex64) -> (f64, f64, f64) {
    if theta.abs() < 1.0 {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let mut term = 1.0; // θ^n / n!
        for n in 0..24usize {
            let nf = n as f64;
            if n % 2 == 0 {
                let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
                m0 += sign * term * 2.0 / (nf + 1.0);
                m2 += sign * term * 2.0 / (nf + 3.0);
            } else {
                let sign = if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                m1 += sign * term * 2.0 / (nf + 2.0);
            }
            term *= theta / (nf + 1.0);
        }
        (m0, m1, m2)
    } else {
        let (s, c) = (rot.im, rot.re);
        let t2 = theta * theta;
        (2.0 * s / theta, 2.0 * (s - theta * c) / t2, 2.0 * ((t2 - 2.0) * s + 2.0 * theta * c) / (t2 * theta))
    }
}

/// Panel integral without the `e^{jtc}` phase factor.
#[inline]
fn panel_value(p: &Panel, theta: f64, rot: Complex64) -> Complex64 {
    let (m0, m1, m2) = moments(theta, rot);
    let [a0, a1, a2] = p.coeffs;
    Complex64::new(a0 * m0 + a2 * m2, a1 * m1) * p.half
}

/// Adaptive evaluation; returns the value and the finer panel count used.
fn adaptive_cf(model: &SystemModel, t: f64, spec: &QuadratureSpec) -> Result<(Complex64, usize)> {
    let mut panels = START_PANELS;
    let mut prev = FilonRule::new(model, panels).eval(t);
    let mut estimate = f64::INFINITY;
    loop {
        let next = 2 * panels;
        if 2 * next + 1 > spec.cf_nodes {
            return Err(Error::QuadratureNotConverged { estimate, tolerance: spec.rel_tol, nodes: 2 * panels + 1 });
        }
        let cur = FilonRule::new(model, next).eval(t);
        estimate = (cur - prev).norm();
        if estimate <= spec.rel_tol {
            return Ok((cur + (cur - prev) / 15.0, next));
        }
        panels = next;
        prev = cur;
    }
}

/// Characteristic function of a single user's SNR at frequency `t`.
pub fn single_interferer_cf(model: &SystemModel, t: f64, spec: &QuadratureSpec) -> Result<ComplexValue> {
    adaptive_cf(model, t, spec).map(|(v, _)| v)
}

/// Characteristic function of the sum of `n_interferers` i.i.d. user SNRs.
pub fn interference_cf(model: &SystemModel, t: f64, n_interferers: u32, spec: &QuadratureSpec) -> Result<ComplexValue> {
    if n_interferers == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(single_interferer_cf(model, t, spec)?.powu(n_interferers))
}

/// A Filon rule whose phase factors are advanced by complex rotation along a
/// uniform frequency grid.
#[derive(Debug, Clone)]
struct RotorRule {
    rule: FilonRule,
    center_rot: Vec<Complex64>,
    half_rot: Vec<Complex64>,
    center_step: Vec<Complex64>,
    half_step: Vec<Complex64>,
}

impl RotorRule {
    fn new(rule: FilonRule, step: f64) -> Self {
        let n = rule.panels.len();
        let unit = |x: f64| {
            let (s, c) = libm::sincos(x);
            Complex64::new(c, s)
        };
        let center_step = rule.panels.iter().map(|p| unit(step * p.center)).collect();
        let half_step = rule.panels.iter().map(|p| unit(step * p.half)).collect();
        Self {
            rule,
            center_rot: alloc::vec![Complex64::new(1.0, 0.0); n],
            half_rot: alloc::vec![Complex64::new(1.0, 0.0); n],
            center_step,
            half_step,
        }
    }

    fn resync(&mut self, t: f64) {
        for (i, p) in self.rule.panels.iter().enumerate() {
            let (s, c) = libm::sincos(t * p.center);
            self.center_rot[i] = Complex64::new(c, s);
            let (s, c) = libm::sincos(t * p.half);
            self.half_rot[i] = Complex64::new(c, s);
        }
    }

    fn eval_and_advance(&mut self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, p) in self.rule.panels.iter().enumerate() {
            acc += panel_value(p, t * p.half, self.half_rot[i]) * self.center_rot[i];
            self.center_rot[i] *= self.center_step[i];
            self.half_rot[i] *= self.half_step[i];
        }
        acc
    }
}

/// Streams `φ(k·step)` for `k = 0, 1, 2, ...`.
#[derive(Debug, Clone)]
pub(crate) struct UniformCf {
    fine: RotorRule,
    coarse: RotorRule,
    step: f64,
    k: usize,
}

impl UniformCf {
    /// Sizes the rule so that both `t = 0` and `t = t_end` meet `rel_tol`.
    pub(crate) fn new(model: &SystemModel, step: f64, t_end: f64, spec: &QuadratureSpec) -> Result<Self> {
        let (_, p0) = adaptive_cf(model, 0.0, spec)?;
        let (_, p1) = adaptive_cf(model, t_end, spec)?;
        let panels = p0.max(p1);
        Ok(Self {
            fine: RotorRule::new(FilonRule::new(model, panels), step),
            coarse: RotorRule::new(FilonRule::new(model, panels / 2), step),
            step,
            k: 0,
        })
    }
}

impl Iterator for UniformCf {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let t = self.k as f64 * self.step;
        if self.k % RESYNC == 0 {
            self.fine.resync(t);
            self.coarse.resync(t);
        }
        let fine = self.fine.eval_and_advance(t);
        let coarse = self.coarse.eval_and_advance(t);
        self.k += 1;
        Some(fine + (fine - coarse) / 15.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// Upper incomplete gamma Γ(a, z) for complex z, real non-integer a.
    /// Series around zero for small |z|, Legendre continued fraction otherwise.
    fn upper_gamma(a: f64, z: Complex64) -> Complex64 {
        if z.norm() < 3.0 {
            // Γ(a, z) = Γ(a) − Σ (−1)^k z^{a+k} / (k! (a+k))
            let gamma_a = libm::tgamma(a);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut zk = Complex64::new(1.0, 0.0);
            let mut fact = 1.0;
            for k in 0..80 {
                if k > 0 {
                    zk *= -z;
                    fact *= k as f64;
                }
                sum += zk / (fact * (a + k as f64));
            }
            Complex64::new(gamma_a, 0.0) - z.powf(a) * sum
        } else {
            // Modified Lentz on Γ(a,z) = e^{-z} z^a / (z + 1 - a - 1(1-a)/(z + 3 - a - ...))
            let tiny = 1e-300;
            let mut b = z + 1.0 - a;
            let mut c = Complex64::new(1.0 / tiny, 0.0);
            let mut d = Complex64::new(1.0, 0.0) / b;
            let mut h = d;
            for i in 1..10_000 {
                let an = -(i as f64) * (i as f64 - a);
                b += 2.0;
                d = b + d * an;
                if d.norm() < tiny {
                    d = Complex64::new(tiny, 0.0);
                }
                c = b + an / c;
                if c.norm() < tiny {
                    c = Complex64::new(tiny, 0.0);
                }
                d = Complex64::new(1.0, 0.0) / d;
                let del = d * c;
                h *= del;
                if (del - 1.0).norm() < 1e-16 {
                    break;
                }
            }
            (-z).exp() * z.powf(a) * h
        }
    }

    /// Incomplete-gamma form of the CF, including the `(−jt)^{1/(m+3)}` factor
    /// that the substitution `u = −jtγ` produces.
    fn cf_closed_form(model: &SystemModel, t: f64) -> Complex64 {
        let k = model.lambertian_order() + 3.0;
        let a = -1.0 / k;
        let c = model.snr_pdf_constant();
        let zmin = Complex64::new(0.0, -t * model.snr_min());
        let zmax = Complex64::new(0.0, -t * model.snr_max());
        Complex64::new(0.0, -t).powf(1.0 / k) * c * (upper_gamma(a, zmin) - upper_gamma(a, zmax))
    }

    /// Brute-force oracle: dense Gauss–Legendre resolving every oscillation.
    fn cf_brute(model: &SystemModel, t: f64) -> Complex64 {
        let gl = GaussLegendre::new(32);
        let (a, b) = (model.snr_min().ln(), model.snr_max().ln());
        let panels = 64 + (t.abs() * model.snr_max()) as usize;
        let re = gl.integrate_composite(|y| model.snr_pdf(y.exp()) * y.exp() * (t * y.exp()).cos(), a, b, panels);
        let im = gl.integrate_composite(|y| model.snr_pdf(y.exp()) * y.exp() * (t * y.exp()).sin(), a, b, panels);
        Complex64::new(re, im)
    }

    #[test]
    fn cf_at_zero_is_one() {
        let m = SystemModel::reference();
        let v = single_interferer_cf(&m, 0.0, &spec()).unwrap();
        assert!((v - 1.0).norm() < 1e-12, "{v}");
        assert_eq!(interference_cf(&m, 0.7, 0, &spec()).unwrap(), Complex64::new(1.0, 0.0));
        assert!((interference_cf(&m, 0.0, 5, &spec()).unwrap() - 1.0).norm() < 1e-11);
    }

    #[test]
    fn matches_incomplete_gamma_form() {
        let m = SystemModel::reference();
        for scale in [1e-2, 0.1, 0.5, 1.0, 3.0] {
            let t = scale / m.snr_min();
            let v = single_interferer_cf(&m, t, &spec()).unwrap();
            let oracle = cf_closed_form(&m, t);
            assert!((v - oracle).norm() / oracle.norm() < 1e-6, "t={t} {v} vs {oracle}");
        }
        let wide = m.with_semi_angle(20f64.to_radians()).unwrap();
        let t = 0.05 / wide.snr_min();
        let v = single_interferer_cf(&wide, t, &spec()).unwrap();
        assert!((v - cf_closed_form(&wide, t)).norm() < 1e-6);
    }

    #[test]
    fn matches_brute_force_at_high_frequency() {
        let m = SystemModel::reference();
        for t in [2.0, 37.5, 400.0, 1999.0] {
            let v = single_interferer_cf(&m, t, &spec()).unwrap();
            let b = cf_brute(&m, t);
            assert!((v - b).norm() < 1e-8, "t={t}: {v} vs {b}");
        }
    }

    #[test]
    fn uniform_stream_matches_pointwise() {
        let m = SystemModel::reference();
        let step = 0.173;
        let stream = UniformCf::new(&m, step, 1500.0 * step, &spec()).unwrap();
        for (k, v) in stream.take(1501).enumerate() {
            if k % 250 == 0 || k == 1500 {
                let p = single_interferer_cf(&m, k as f64 * step, &spec()).unwrap();
                assert!((v - p).norm() < spec().rel_tol, "k={k} {}", (v - p).norm());
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let m = SystemModel::reference();
        let tight = QuadratureSpec { cf_nodes: 65, rel_tol: 1e-12, ..spec() };
        assert!(matches!(single_interferer_cf(&m, 1.0, &tight), Err(Error::QuadratureNotConverged { .. })));
    }

    #[test]
    fn interference_cf_is_power() {
        let m = SystemModel::reference();
        let one = single_interferer_cf(&m, 0.9, &spec()).unwrap();
        let two = interference_cf(&m, 0.9, 2, &spec()).unwrap();
        assert!((two - one * one).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn conjugate_symmetry_and_bound(t in 0.0f64..500.0) {
            let m = SystemModel::reference();
            let p = single_interferer_cf(&m, t, &spec()).unwrap();
            let n = single_interferer_cf(&m, -t, &spec()).unwrap();
            prop_assert!((p - n.conj()).norm() < 1e-12);
            prop_assert!(p.norm() <= 1.0 + 1e-9);
        }
    }
}
