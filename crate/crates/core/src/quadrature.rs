//! Quadrature controls and a Gauss–Legendre rule.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Numerical controls for the analytic SINR pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Node budget for the characteristic-function integral over the SNR support.
    pub cf_nodes: usize,
    /// Hard cap on the frequency axis used by the Fourier inversion.
    pub inversion_t_max: f64,
    /// Hard cap on the number of frequency samples in the inversion.
    pub inversion_nodes: usize,
    /// Nodes for the outer integral over the shifted interference variable.
    pub lambda_nodes: usize,
    /// Abscissae per tabulated distribution.
    pub grid_points: usize,
    /// Uniform nodes per summand in the convolution oracle.
    pub convolution_nodes: usize,
    /// Target accuracy of the characteristic function.
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            cf_nodes: 4097,
            inversion_t_max: 2000.0,
            inversion_nodes: 1 << 16,
            lambda_nodes: 512,
            grid_points: 2048,
            convolution_nodes: 8192,
            rel_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("cf_nodes", self.cf_nodes),
            ("inversion_nodes", self.inversion_nodes),
            ("lambda_nodes", self.lambda_nodes),
            ("grid_points", self.grid_points),
            ("convolution_nodes", self.convolution_nodes),
        ];
        for (name, n) in counts {
            if n < 16 {
                return Err(Error::InvalidParameter { name, reason: "node counts must be at least 16" });
            }
        }
        if !(self.inversion_t_max > 0.0 && self.inversion_t_max.is_finite()) {
            return Err(Error::InvalidParameter { name: "inversion_t_max", reason: "must be finite and positive" });
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(Error::InvalidParameter { name: "rel_tol", reason: "must lie in (0, 1e-2]" });
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes mapped onto `[a, b]` paired with their scaled weights.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal panels.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + i as f64 * h;
                let hi = if i + 1 == panels { b } else { lo + h };
                self.integrate(&mut f, lo, hi)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `n` points spaced evenly in `ln x` from `lo` to `hi`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi >= lo);
    let ratio = libm::log(hi / lo);
    let mut g: Vec<f64> = (0..n).map(|i| lo * libm::exp(ratio * i as f64 / (n - 1) as f64)).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}
