//! Tabulated densities on a bounded support.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Allowed distance of the final CDF value from one.
pub const MASS_TOLERANCE: f64 = 1e-3;
/// Allowed gap between the trapezoidal mass of the PDF and the final CDF value.
pub const TRAPEZOID_TOLERANCE: f64 = 1e-6;

/// PDF and CDF of a scalar random variable sampled on an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDistribution {
    grid: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDistribution {
    /// Builds and validates a distribution from explicit PDF and CDF samples.
    pub fn new(grid: Vec<f64>, pdf: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        let d = Self { grid, pdf, cdf };
        d.validate()?;
        Ok(d)
    }

    /// Builds the CDF by cumulative trapezoid and rescales both columns so the
    /// total mass is exactly one.
    pub fn from_pdf(grid: Vec<f64>, pdf: Vec<f64>) -> Result<Self> {
        if grid.len() != pdf.len() || grid.len() < 2 {
            return Err(Error::InvalidDistribution("grid and pdf lengths differ or are < 2"));
        }
        let mut cdf = cumulative_trapezoid(&grid, &pdf);
        let mass = *cdf.last().unwrap();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidDistribution("pdf has no positive finite mass"));
        }
        let pdf = pdf.into_iter().map(|p| p / mass).collect();
        cdf.iter_mut().for_each(|c| *c /= mass);
        Self::new(grid, pdf, cdf)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if n < 2 || self.pdf.len() != n || self.cdf.len() != n {
            return Err(Error::InvalidDistribution("column lengths differ or are < 2"));
        }
        if !self.grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidDistribution("grid is not strictly increasing"));
        }
        if !self.pdf.iter().all(|&p| p >= 0.0 && p.is_finite()) {
            return Err(Error::InvalidDistribution("pdf has negative or non-finite values"));
        }
        if !self.cdf.windows(2).all(|w| w[1] >= w[0]) || self.cdf[0] < 0.0 {
            return Err(Error::InvalidDistribution("cdf is not a nondecreasing probability"));
        }
        let last = self.cdf[n - 1];
        if (last - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution("cdf does not reach one"));
        }
        if (self.trapezoid_mass() - last).abs() > TRAPEZOID_TOLERANCE {
            return Err(Error::InvalidDistribution("pdf mass disagrees with final cdf value"));
        }
        Ok(())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn pdf_values(&self) -> &[f64] {
        &self.pdf
    }
    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }
    pub fn support_lo(&self) -> f64 {
        self.grid[0]
    }
    pub fn support_hi(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn trapezoid_mass(&self) -> f64 {
        trapezoid(&self.grid, &self.pdf)
    }

    pub fn peak(&self) -> f64 {
        self.pdf.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        let xf: Vec<f64> = self.grid.iter().zip(&self.pdf).map(|(x, p)| x * p).collect();
        trapezoid(&self.grid, &xf)
    }

    /// Linear interpolation of the PDF; zero outside the support.
    pub fn pdf_at(&self, x: f64) -> f64 {
        interpolate(&self.grid, &self.pdf, x).unwrap_or(0.0)
    }

    /// Linear interpolation of the CDF; 0 below and the final value above the support.
    pub fn cdf_at(&self, x: f64) -> f64 {
        match interpolate(&self.grid, &self.cdf, x) {
            Some(v) => v,
            None if x < self.grid[0] => 0.0,
            None => self.cdf[self.cdf.len() - 1],
        }
    }

    /// Sup-norm distance between the two CDFs over the union of both grids.
    pub fn cdf_distance(&self, other: &Self) -> f64 {
        self.grid.iter().chain(other.grid.iter()).map(|&x| (self.cdf_at(x) - other.cdf_at(x)).abs()).fold(0.0, f64::max)
    }
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> Option<f64> {
    let n = grid.len();
    if !(x >= grid[0] && x <= grid[n - 1]) {
        return None;
    }
    let i = grid.partition_point(|&g| g <= x);
    if i == n {
        return Some(values[n - 1]);
    }
    let (x0, x1) = (grid[i - 1], grid[i]);
    let w = (x - x0) / (x1 - x0);
    Some(values[i - 1] + w * (values[i] - values[i - 1]))
}

pub(crate) fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2).zip(values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

pub(crate) fn cumulative_trapezoid(grid: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for (x, y) in grid.windows(2).zip(values.windows(2)) {
        acc += 0.5 * (x[1] - x[0]) * (y[0] + y[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn uniform() -> TabulatedDistribution {
        let grid: Vec<f64> = (0..=100).map(|i| 2.0 + i as f64 / 100.0).collect();
        TabulatedDistribution::from_pdf(grid, vec![1.0; 101]).unwrap()
    }

    #[test]
    fn uniform_table() {
        let d = uniform();
        assert_eq!(d.support_lo(), 2.0);
        assert_eq!(d.support_hi(), 3.0);
        assert!((d.cdf_at(2.25) - 0.25).abs() < 1e-12);
        assert!((d.mean() - 2.5).abs() < 1e-12);
        assert_eq!(d.pdf_at(1.0), 0.0);
        assert_eq!(d.cdf_at(1.0), 0.0);
        assert_eq!(d.cdf_at(4.0), 1.0);
        assert_eq!(d.cdf_distance(&d), 0.0);
    }

    #[test]
    fn rejects_broken_tables() {
        let g = vec![0.0, 1.0, 2.0];
        assert!(TabulatedDistribution::new(g.clone(), vec![0.5, 0.5, 0.5], vec![0.0, 0.5, 1.0]).is_ok());
        assert!(TabulatedDistribution::new(g.clone(), vec![0.5, -0.1, 0.5], vec![0.0, 0.5, 1.0]).is_err());
        assert!(TabulatedDistribution::new(g.clone(), vec![0.5, 0.5, 0.5], vec![0.0, 0.6, 0.5]).is_err());
        assert!(TabulatedDistribution::new(vec![0.0, 0.0, 2.0], vec![0.5; 3], vec![0.0, 0.5, 1.0]).is_err());
        assert!(TabulatedDistribution::new(g.clone(), vec![0.3, 0.3, 0.3], vec![0.0, 0.3, 0.6]).is_err());
        // mass reaches one but the pdf column disagrees with it
        assert!(TabulatedDistribution::new(g, vec![0.6, 0.6, 0.6], vec![0.0, 0.5, 1.0]).is_err());
    }
}
