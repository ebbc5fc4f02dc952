//! Run configuration files.
//!
//! The format is a flat, sectioned key-value text:
//!
//! ```text
//! # comments run to the end of the line
//! [system]
//! semi_angle = 60 deg
//! fov = 90 deg, area = 1 cm2      # several assignments may share a line
//! pt = 30mW                       # the unit may touch the number
//!
//! [traffic]
//! users = 50
//! pa = 0.01
//! ```
//!
//! Every key belongs to one section and may appear once. A bare number is
//! read in SI units (linear for the threshold, degrees for angles). Absent
//! keys take their defaults, and [`Settings::echo`] prints the resolved values
//! so that each output file says exactly what produced it.
//!
//! | section | key | units | default |
//! |---|---|---|---|
//! | `system` | `semi_angle` | `deg`, `rad` | 60 deg |
//! | | `fov` | `deg`, `rad` | 90 deg |
//! | | `area` | `m2`, `cm2`, `mm2` | 1 cm2 |
//! | | `responsivity` | `A/W` | 0.4 |
//! | | `ts` (optical filter gain) | | 1 |
//! | | `zeta` (concentrator refractive index) | | 1.5 |
//! | | `eta` (optical-to-electrical coefficient) | | 0.8 |
//! | | `n0` | `W/Hz` | 1e-21 |
//! | | `bandwidth` | `Hz`, `kHz`, `MHz` | 200 kHz |
//! | | `pt` | `W`, `mW` | 30 mW |
//! | | `radius` | `m`, `cm` | 3 m |
//! | | `height` | `m`, `cm` | 2.5 m |
//! | `traffic` | `users` | | 50 |
//! | | `pa` | | 0.01 |
//! | `analysis` | `threshold` | `dB` or linear | 3 dB |
//! | | `mode` | `capture`, `classical` | capture |
//! | | `mixture` | `unnormalized` (alias `paper`), `conditional` | unnormalized |
//! | `quadrature` | `cf_nodes`, `inversion_t_max`, `inversion_nodes`, `lambda_nodes`, `grid_points`, `convolution_nodes`, `rel_tol` | | library defaults |
//! | `montecarlo` | `trials` | | 1000000 |
//! | | `seed` | | 1 |
//! | | `stream` | | 0 |
//! | `output` | `path` | file path or `-` | `-` |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use owc_capture::montecarlo::McConfig;
use owc_capture::reliability::db_to_linear;
use owc_capture::{
    CaptureMode, CellGeometry, LedTransmitter, MixtureMode, OutageQuery, PhotoDetector, PowerNoiseParams,
    QuadratureSpec, SystemModel, TrafficModel,
};

use crate::csv::num;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// SINR threshold as the user wrote it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Linear(f64),
    Decibel(f64),
}

impl Threshold {
    pub fn linear(self) -> f64 {
        match self {
            Threshold::Linear(x) => x,
            Threshold::Decibel(db) => db_to_linear(db),
        }
    }

    /// Accepts `2`, `1.995`, `3dB` or `3 dB`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        match lower.strip_suffix("db") {
            Some(num) => num.trim().parse().ok().filter(|v: &f64| v.is_finite()).map(Threshold::Decibel),
            None => s.parse().ok().map(Threshold::Linear),
        }
    }
}

/// Every run parameter, in the units the file uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub semi_angle_deg: f64,
    pub fov_deg: f64,
    pub area_m2: f64,
    pub responsivity: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
    pub oe_conversion: f64,
    pub noise_psd: f64,
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    pub radius_m: f64,
    pub height_m: f64,
    pub users: u32,
    pub activation_prob: f64,
    pub threshold: Threshold,
    pub mode: CaptureMode,
    pub mixture: MixtureMode,
    pub spec: QuadratureSpec,
    pub trials: u64,
    pub seed: u64,
    pub stream: u32,
    pub output: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            semi_angle_deg: SystemModel::DEFAULT_SEMI_ANGLE_DEG,
            fov_deg: SystemModel::DEFAULT_FOV_DEG,
            area_m2: SystemModel::DEFAULT_AREA,
            responsivity: SystemModel::DEFAULT_RESPONSIVITY,
            filter_gain: SystemModel::DEFAULT_FILTER_GAIN,
            refractive_index: SystemModel::DEFAULT_REFRACTIVE_INDEX,
            oe_conversion: SystemModel::DEFAULT_OE_CONVERSION,
            noise_psd: SystemModel::DEFAULT_NOISE_PSD,
            bandwidth_hz: SystemModel::DEFAULT_BANDWIDTH,
            tx_power_w: SystemModel::DEFAULT_TX_POWER,
            radius_m: SystemModel::DEFAULT_RADIUS,
            height_m: SystemModel::DEFAULT_HEIGHT,
            users: 50,
            activation_prob: 0.01,
            threshold: Threshold::Decibel(3.0),
            mode: CaptureMode::Capture,
            mixture: MixtureMode::Unnormalized,
            spec: QuadratureSpec::default(),
            trials: 1_000_000,
            seed: 1,
            stream: 0,
            output: None,
        }
    }
}

/// A validated configuration with the library objects built from it.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub settings: Settings,
    pub model: SystemModel,
    pub traffic: TrafficModel,
    pub query: OutageQuery,
    pub mc: McConfig,
}

impl RunConfig {
    pub fn spec(&self) -> &QuadratureSpec {
        &self.settings.spec
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_config(&text)?.resolve()?)
}

/// Parses configuration text; absent keys keep their defaults.
pub fn parse_config(text: &str) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    let mut section: Option<String> = None;
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| ConfigError::Parse { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name =
                rest.strip_suffix(']').ok_or_else(|| err(format!("unterminated section header `{content}`")))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", "))));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(sec) = section.as_deref() else {
            return Err(err("assignment outside any section".to_string()));
        };
        for assignment in content.split(',') {
            let (key, value) = assignment
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{}`", assignment.trim())))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("`{key}` has no value")));
            }
            if !seen.insert((sec.to_string(), key.to_string())) {
                return Err(err(format!("`{key}` is set twice in [{sec}]")));
            }
            assign(&mut s, sec, key, value).map_err(err)?;
        }
    }
    Ok(s)
}

const SECTIONS: [&str; 6] = ["system", "traffic", "analysis", "quadrature", "montecarlo", "output"];

fn assign(s: &mut Settings, section: &str, key: &str, value: &str) -> Result<(), String> {
    match (section, key) {
        ("system", "semi_angle") => s.semi_angle_deg = angle(value)?,
        ("system", "fov") => s.fov_deg = angle(value)?,
        ("system", "area") => s.area_m2 = quantity(value, &[("m2", 1.0), ("cm2", 1e4), ("mm2", 1e6)])?,
        ("system", "responsivity") => s.responsivity = quantity(value, &[("A/W", 1.0)])?,
        ("system", "ts") => s.filter_gain = number(value)?,
        ("system", "zeta") => s.refractive_index = number(value)?,
        ("system", "eta") => s.oe_conversion = number(value)?,
        ("system", "n0") => s.noise_psd = quantity(value, &[("W/Hz", 1.0)])?,
        ("system", "bandwidth") => s.bandwidth_hz = quantity(value, &[("Hz", 1.0), ("kHz", 1e-3), ("MHz", 1e-6)])?,
        ("system", "pt") => s.tx_power_w = quantity(value, &[("W", 1.0), ("mW", 1e3)])?,
        ("system", "radius") => s.radius_m = quantity(value, &[("m", 1.0), ("cm", 1e2)])?,
        ("system", "height") => s.height_m = quantity(value, &[("m", 1.0), ("cm", 1e2)])?,
        ("traffic", "users") => s.users = integer(value)?,
        ("traffic", "pa") => s.activation_prob = number(value)?,
        ("analysis", "threshold") => {
            s.threshold = Threshold::parse(value).ok_or(format!("cannot read threshold `{value}`"))?
        }
        ("analysis", "mode") => s.mode = parse_mode(value)?,
        ("analysis", "mixture") => s.mixture = parse_mixture(value)?,
        ("quadrature", "cf_nodes") => s.spec.cf_nodes = integer(value)?,
        ("quadrature", "inversion_t_max") => s.spec.inversion_t_max = number(value)?,
        ("quadrature", "inversion_nodes") => s.spec.inversion_nodes = integer(value)?,
        ("quadrature", "lambda_nodes") => s.spec.lambda_nodes = integer(value)?,
        ("quadrature", "grid_points") => s.spec.grid_points = integer(value)?,
        ("quadrature", "convolution_nodes") => s.spec.convolution_nodes = integer(value)?,
        ("quadrature", "rel_tol") => s.spec.rel_tol = number(value)?,
        ("montecarlo", "trials") => s.trials = integer(value)?,
        ("montecarlo", "seed") => {
            s.seed = value.parse().map_err(|_| format!("seed must be an unsigned integer, found `{value}`"))?
        }
        ("montecarlo", "stream") => s.stream = integer(value)?,
        ("output", "path") => s.output = Some(value.to_string()),
        _ => return Err(format!("unknown key `{key}` in [{section}]")),
    }
    Ok(())
}

pub fn parse_mode(value: &str) -> Result<CaptureMode, String> {
    match value {
        "capture" => Ok(CaptureMode::Capture),
        "classical" => Ok(CaptureMode::Classical),
        _ => Err(format!("mode must be `capture` or `classical`, found `{value}`")),
    }
}

pub fn parse_mixture(value: &str) -> Result<MixtureMode, String> {
    match value {
        "unnormalized" | "paper" => Ok(MixtureMode::Unnormalized),
        "conditional" => Ok(MixtureMode::Conditional),
        _ => Err(format!("mixture must be `unnormalized` or `conditional`, found `{value}`")),
    }
}

/// Splits `30mW` or `30 mW` into the number and its unit.
fn split_unit(value: &str) -> (&str, &str) {
    let cut = value
        .char_indices()
        .find(|&(i, c)| {
            c.is_ascii_alphabetic()
                && !(matches!(c, 'e' | 'E')
                    && value[..i].ends_with(|p: char| p.is_ascii_digit() || p == '.')
                    && value[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+'))
        })
        .map_or(value.len(), |(i, _)| i);
    (value[..cut].trim(), value[cut..].trim())
}

fn number(value: &str) -> Result<f64, String> {
    value.parse::<f64>().map_err(|_| format!("expected a number, found `{value}`"))
}

/// A number with an optional unit; `per_unit[i].1` is how many of that unit make one SI unit.
fn quantity(value: &str, per_unit: &[(&str, f64)]) -> Result<f64, String> {
    let (num, unit) = split_unit(value);
    let x = number(num)?;
    if unit.is_empty() {
        return Ok(x);
    }
    per_unit.iter().find(|(u, _)| *u == unit).map(|(_, scale)| x / scale).ok_or_else(|| {
        let names: Vec<&str> = per_unit.iter().map(|(u, _)| *u).collect();
        format!("unknown unit `{unit}`; expected one of {}", names.join(", "))
    })
}

/// Returns degrees.
fn angle(value: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(value);
    let x = number(num)?;
    match unit {
        "" | "deg" => Ok(x),
        "rad" => Ok(x.to_degrees()),
        _ => Err(format!("unknown angle unit `{unit}`; expected deg or rad")),
    }
}

/// Accepts `1000000` as well as `1e6`.
fn integer<T: TryFrom<u64>>(value: &str) -> Result<T, String> {
    let bad = || format!("expected a non-negative integer, found `{value}`");
    let n = match value.parse::<u64>() {
        Ok(n) => n,
        Err(_) => {
            let x = number(value).map_err(|_| bad())?;
            if !(x >= 0.0 && x.fract() == 0.0 && x <= 9_007_199_254_740_992.0) {
                return Err(bad());
            }
            x as u64
        }
    };
    T::try_from(n).map_err(|_| format!("`{value}` is too large"))
}

/// Config key that holds a library parameter.
fn key_of(name: &str) -> &str {
    match name {
        "field_of_view" => "fov",
        "filter_gain" => "ts",
        "lens_refractive_index" => "zeta",
        "oe_conversion" => "eta",
        "noise_psd" => "n0",
        "tx_optical_power" => "pt",
        "activation_prob" => "pa",
        "population" => "users",
        other => other,
    }
}

fn library_error(e: owc_capture::Error) -> ConfigError {
    match &e {
        owc_capture::Error::InvalidParameter { name, .. } => invalid(key_of(name), e.to_string()),
        owc_capture::Error::Domain { quantity, .. } => invalid(key_of(quantity), e.to_string()),
        _ => invalid("config", e.to_string()),
    }
}

impl Settings {
    /// Validates every parameter and builds the library objects.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let s = &self;
        let led =
            LedTransmitter::new(s.semi_angle_deg.to_radians()).map_err(|e| invalid("semi_angle", e.to_string()))?;
        let pd = PhotoDetector {
            area: s.area_m2,
            responsivity: s.responsivity,
            filter_gain: s.filter_gain,
            lens_refractive_index: s.refractive_index,
            field_of_view: s.fov_deg.to_radians(),
        };
        let cell = CellGeometry { radius: s.radius_m, height: s.height_m };
        let power = PowerNoiseParams {
            tx_optical_power: s.tx_power_w,
            oe_conversion: s.oe_conversion,
            noise_psd: s.noise_psd,
            bandwidth: s.bandwidth_hz,
        };
        let model = SystemModel::new(led, pd, cell, power).map_err(library_error)?;
        let traffic = TrafficModel::new(s.users, s.activation_prob).map_err(library_error)?;
        let threshold = s.threshold.linear();
        let query = OutageQuery::new(threshold, s.mode, s.mixture).map_err(|e| invalid("threshold", e.to_string()))?;
        s.spec.validate().map_err(library_error)?;
        let mc = McConfig::new(s.trials, s.seed).map_err(library_error)?.with_stream(s.stream);
        Ok(RunConfig { settings: self, model, traffic, query, mc })
    }

    /// The resolved configuration as `#` comment lines, in a form this parser reads back.
    pub fn echo(&self) -> String {
        let q = &self.spec;
        let threshold = match self.threshold {
            Threshold::Linear(x) => num(x),
            Threshold::Decibel(db) => format!("{} dB", num(db)),
        };
        let sections: [(&str, Vec<(&str, String)>); 5] = [
            (
                "system",
                vec![
                    ("semi_angle", format!("{} deg", num(self.semi_angle_deg))),
                    ("fov", format!("{} deg", num(self.fov_deg))),
                    ("area", format!("{} m2", num(self.area_m2))),
                    ("responsivity", format!("{} A/W", num(self.responsivity))),
                    ("ts", num(self.filter_gain)),
                    ("zeta", num(self.refractive_index)),
                    ("eta", num(self.oe_conversion)),
                    ("n0", format!("{} W/Hz", num(self.noise_psd))),
                    ("bandwidth", format!("{} Hz", num(self.bandwidth_hz))),
                    ("pt", format!("{} W", num(self.tx_power_w))),
                    ("radius", format!("{} m", num(self.radius_m))),
                    ("height", format!("{} m", num(self.height_m))),
                ],
            ),
            ("traffic", vec![("users", self.users.to_string()), ("pa", num(self.activation_prob))]),
            (
                "analysis",
                vec![
                    ("threshold", threshold),
                    ("mode", mode_name(self.mode).to_string()),
                    ("mixture", mixture_name(self.mixture).to_string()),
                ],
            ),
            (
                "quadrature",
                vec![
                    ("cf_nodes", q.cf_nodes.to_string()),
                    ("inversion_t_max", num(q.inversion_t_max)),
                    ("inversion_nodes", q.inversion_nodes.to_string()),
                    ("lambda_nodes", q.lambda_nodes.to_string()),
                    ("grid_points", q.grid_points.to_string()),
                    ("convolution_nodes", q.convolution_nodes.to_string()),
                    ("rel_tol", num(q.rel_tol)),
                ],
            ),
            (
                "montecarlo",
                vec![
                    ("trials", self.trials.to_string()),
                    ("seed", self.seed.to_string()),
                    ("stream", self.stream.to_string()),
                ],
            ),
        ];
        let mut out = String::new();
        for (name, keys) in sections {
            let _ = writeln!(out, "# [{name}]");
            for (k, v) in keys {
                let _ = writeln!(out, "# {k} = {v}");
            }
        }
        out
    }
}

pub fn mode_name(mode: CaptureMode) -> &'static str {
    match mode {
        CaptureMode::Capture => "capture",
        CaptureMode::Classical => "classical",
    }
}

pub fn mixture_name(mixture: MixtureMode) -> &'static str {
    match mixture {
        MixtureMode::Unnormalized => "unnormalized",
        MixtureMode::Conditional => "conditional",
    }
}
