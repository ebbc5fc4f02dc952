//! Indoor OWC cell geometry and the Lambertian line-of-sight channel.
//!
//! All quantities are SI: metres, square metres, watts, hertz, radians.
//! The photodetector faces straight down and every user lies on the plane
//! at distance `height` below it, so the irradiance and incidence angles
//! coincide and the channel gain depends on the radial offset alone.

use core::f64::consts::{FRAC_PI_2, LN_2, PI};

use crate::error::{Error, Result};

/// Generalized Lambertian order `m = -ln 2 / ln cos(semi_angle)`.
pub fn lambertian_order(semi_angle: f64) -> Result<f64> {
    if !(semi_angle > 0.0 && semi_angle < FRAC_PI_2) {
        return Err(Error::Domain { quantity: "semi_angle", value: semi_angle, expected: "0 < semi_angle < pi/2" });
    }
    Ok(-LN_2 / libm::log(libm::cos(semi_angle)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedTransmitter {
    semi_angle: f64,
    lambertian_order: f64,
}

impl LedTransmitter {
    /// `semi_angle` is the half-power semi-angle in radians.
    pub fn new(semi_angle: f64) -> Result<Self> {
        let lambertian_order = lambertian_order(semi_angle)?;
        Ok(Self { semi_angle, lambertian_order })
    }

    pub fn semi_angle(&self) -> f64 {
        self.semi_angle
    }

    pub fn lambertian_order(&self) -> f64 {
        self.lambertian_order
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotoDetector {
    /// Physical detector area, m².
    pub area: f64,
    /// A/W.
    pub responsivity: f64,
    /// Optical filter gain.
    pub filter_gain: f64,
    /// Refractive index of the concentrator lens.
    pub lens_refractive_index: f64,
    /// Field of view in radians.
    pub field_of_view: f64,
}

impl PhotoDetector {
    pub fn validate(&self) -> Result<()> {
        positive("area", self.area)?;
        positive("responsivity", self.responsivity)?;
        positive("filter_gain", self.filter_gain)?;
        positive("lens_refractive_index", self.lens_refractive_index)?;
        if !(self.field_of_view > 0.0 && self.field_of_view <= FRAC_PI_2) {
            return Err(Error::InvalidParameter { name: "field_of_view", reason: "must lie in (0, pi/2]" });
        }
        Ok(())
    }

    /// Optical concentrator gain for a given incidence angle; zero outside the FOV.
    pub fn concentrator_gain(&self, incidence: f64) -> f64 {
        if (0.0..=self.field_of_view).contains(&incidence) {
            let s = libm::sin(self.field_of_view);
            self.lens_refractive_index * self.lens_refractive_index / (s * s)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Radius of the coverage disk, m.
    pub radius: f64,
    /// Vertical distance from the detector to the user plane, m.
    pub height: f64,
}

impl CellGeometry {
    pub fn validate(&self) -> Result<()> {
        positive("radius", self.radius)?;
        positive("height", self.height)
    }

    /// Density of the radial offset of a user dropped uniformly on the disk.
    pub fn radial_pdf(&self, r: f64) -> f64 {
        if (0.0..=self.radius).contains(&r) {
            2.0 * r / (self.radius * self.radius)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerNoiseParams {
    /// Transmitted optical power, W.
    pub tx_optical_power: f64,
    /// Optical-to-electrical conversion coefficient (dimensionless).
    pub oe_conversion: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    /// System bandwidth, Hz.
    pub bandwidth: f64,
}

impl PowerNoiseParams {
    pub fn validate(&self) -> Result<()> {
        positive("tx_optical_power", self.tx_optical_power)?;
        positive("oe_conversion", self.oe_conversion)?;
        positive("noise_psd", self.noise_psd)?;
        positive("bandwidth", self.bandwidth)
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_psd * self.bandwidth
    }

    /// `(P_t η)² / σ²`, the factor turning a squared channel gain into an SNR.
    pub fn snr_scale(&self) -> f64 {
        let a = self.tx_optical_power * self.oe_conversion;
        a * a / self.noise_variance()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be finite and strictly positive" })
    }
}

/// A fully parameterized OWC cell together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemModel {
    led: LedTransmitter,
    pd: PhotoDetector,
    cell: CellGeometry,
    power: PowerNoiseParams,
    aggregate_factor: f64,
    snr_scale: f64,
    gain_min: f64,
    gain_max: f64,
    snr_min: f64,
    snr_max: f64,
}

impl SystemModel {
    pub const DEFAULT_SEMI_ANGLE_DEG: f64 = 60.0;
    pub const DEFAULT_FOV_DEG: f64 = 90.0;
    pub const DEFAULT_AREA: f64 = 1e-4;
    pub const DEFAULT_RESPONSIVITY: f64 = 0.4;
    pub const DEFAULT_FILTER_GAIN: f64 = 1.0;
    pub const DEFAULT_REFRACTIVE_INDEX: f64 = 1.5;
    pub const DEFAULT_TX_POWER: f64 = 30e-3;
    pub const DEFAULT_OE_CONVERSION: f64 = 0.8;
    pub const DEFAULT_NOISE_PSD: f64 = 1e-21;
    pub const DEFAULT_BANDWIDTH: f64 = 200e3;
    pub const DEFAULT_RADIUS: f64 = 3.0;
    pub const DEFAULT_HEIGHT: f64 = 2.5;

    pub fn new(led: LedTransmitter, pd: PhotoDetector, cell: CellGeometry, power: PowerNoiseParams) -> Result<Self> {
        pd.validate()?;
        cell.validate()?;
        power.validate()?;
        // The closed-form gain and SNR laws assume every user on the disk is
        // seen by the detector.
        if libm::atan2(cell.radius, cell.height) > pd.field_of_view {
            return Err(Error::InvalidParameter {
                name: "field_of_view",
                reason: "the cell edge lies outside the detector field of view",
            });
        }

        let m = led.lambertian_order();
        let l = cell.height;
        let aggregate_factor = pd.area * (m + 1.0) * pd.responsivity / (2.0 * PI)
            * pd.filter_gain
            * pd.concentrator_gain(0.0)
            * libm::pow(l, m + 1.0);
        let snr_scale = power.snr_scale();
        let half_exp = 0.5 * (m + 3.0);
        let gain_max = aggregate_factor / libm::pow(l * l, half_exp);
        let gain_min = aggregate_factor / libm::pow(cell.radius * cell.radius + l * l, half_exp);
        Ok(Self {
            led,
            pd,
            cell,
            power,
            aggregate_factor,
            snr_scale,
            gain_min,
            gain_max,
            snr_min: snr_scale * gain_min * gain_min,
            snr_max: snr_scale * gain_max * gain_max,
        })
    }

    /// The detector, power and noise values used in the numerical study this
    /// crate reproduces, with a 3 m cell under a 2.5 m ceiling and 60° LEDs.
    pub fn reference() -> Self {
        let led = LedTransmitter::new(Self::DEFAULT_SEMI_ANGLE_DEG.to_radians()).expect("default semi-angle is valid");
        let pd = PhotoDetector {
            area: Self::DEFAULT_AREA,
            responsivity: Self::DEFAULT_RESPONSIVITY,
            filter_gain: Self::DEFAULT_FILTER_GAIN,
            lens_refractive_index: Self::DEFAULT_REFRACTIVE_INDEX,
            field_of_view: Self::DEFAULT_FOV_DEG.to_radians(),
        };
        let cell = CellGeometry { radius: Self::DEFAULT_RADIUS, height: Self::DEFAULT_HEIGHT };
        let power = PowerNoiseParams {
            tx_optical_power: Self::DEFAULT_TX_POWER,
            oe_conversion: Self::DEFAULT_OE_CONVERSION,
            noise_psd: Self::DEFAULT_NOISE_PSD,
            bandwidth: Self::DEFAULT_BANDWIDTH,
        };
        Self::new(led, pd, cell, power).expect("reference parameters are valid")
    }

    /// Same cell with a different LED semi-angle (radians); `m` and `𝒳` are rebuilt.
    pub fn with_semi_angle(&self, semi_angle: f64) -> Result<Self> {
        Self::new(LedTransmitter::new(semi_angle)?, self.pd, self.cell, self.power)
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let cell = CellGeometry { radius, height: self.cell.height };
        Self::new(self.led, self.pd, cell, self.power)
    }

    pub fn with_height(&self, height: f64) -> Result<Self> {
        let cell = CellGeometry { radius: self.cell.radius, height };
        Self::new(self.led, self.pd, cell, self.power)
    }

    pub fn led(&self) -> &LedTransmitter {
        &self.led
    }
    pub fn detector(&self) -> &PhotoDetector {
        &self.pd
    }
    pub fn cell(&self) -> &CellGeometry {
        &self.cell
    }
    pub fn power(&self) -> &PowerNoiseParams {
        &self.power
    }
    pub fn lambertian_order(&self) -> f64 {
        self.led.lambertian_order()
    }
    pub fn aggregate_factor(&self) -> f64 {
        self.aggregate_factor
    }
    pub fn snr_scale(&self) -> f64 {
        self.snr_scale
    }
    pub fn gain_min(&self) -> f64 {
        self.gain_min
    }
    pub fn gain_max(&self) -> f64 {
        self.gain_max
    }
    pub fn snr_min(&self) -> f64 {
        self.snr_min
    }
    pub fn snr_max(&self) -> f64 {
        self.snr_max
    }

    /// Line-of-sight gain at horizontal offset `r` (any `r ≥ 0`), zero once the
    /// incidence angle leaves the field of view.
    pub fn los_gain(&self, r: f64) -> f64 {
        let l = self.cell.height;
        if libm::atan2(r, l) > self.pd.field_of_view {
            return 0.0;
        }
        self.aggregate_factor / libm::pow(r * r + l * l, 0.5 * (self.lambertian_order() + 3.0))
    }

    /// Channel gain of a user at radial offset `r ∈ [0, R]`.
    pub fn channel_gain(&self, r: f64) -> Result<f64> {
        if !(0.0..=self.cell.radius).contains(&r) {
            return Err(Error::Domain { quantity: "radial_distance", value: r, expected: "0 <= r <= cell radius" });
        }
        Ok(self.los_gain(r))
    }

    pub fn snr_of_gain(&self, gain: f64) -> f64 {
        self.snr_scale * gain * gain
    }

    pub fn radial_pdf(&self, r: f64) -> f64 {
        self.cell.radial_pdf(r)
    }

    /// Density of a single user's SNR; a truncated power law on `[snr_min, snr_max]`.
    pub fn snr_pdf(&self, snr: f64) -> f64 {
        if !(self.snr_min..=self.snr_max).contains(&snr) {
            return 0.0;
        }
        let k = self.lambertian_order() + 3.0;
        self.snr_pdf_constant() * libm::pow(snr, -(k + 1.0) / k)
    }

    pub(crate) fn snr_pdf_constant(&self) -> f64 {
        let k = self.lambertian_order() + 3.0;
        let r2 = self.cell.radius * self.cell.radius;
        libm::pow(self.snr_scale * self.aggregate_factor * self.aggregate_factor, 1.0 / k) / (r2 * k)
    }

    /// Antiderivative of [`snr_pdf`](Self::snr_pdf). It inverts the SNR back to
    /// `r² + L²`, which is uniform on `[L², L² + R²]`.
    pub fn snr_cdf_closed_form(&self, snr: f64) -> Result<f64> {
        if !(snr > 0.0) {
            return Err(Error::Domain { quantity: "snr", value: snr, expected: "snr > 0" });
        }
        let k = self.lambertian_order() + 3.0;
        let x2 = self.snr_scale * self.aggregate_factor * self.aggregate_factor;
        let r2 = self.cell.radius * self.cell.radius;
        let l2 = self.cell.height * self.cell.height;
        let f = (r2 + l2 - libm::pow(x2 / snr, 1.0 / k)) / r2;
        Ok(f.clamp(0.0, 1.0))
    }
}
