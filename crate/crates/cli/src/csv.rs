//! Comma-separated output: `#` comment header, `.` decimals, `\n` line ends.

use std::fmt::Write as _;

use crate::config::Settings;

/// Comment header naming the tool, the command and the resolved configuration.
pub fn header(command: &str, args: &[(&str, String)], settings: &Settings) -> String {
    let mut out = format!("# owc-capture {}\n# command = {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in args {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&settings.echo());
    out
}

/// Shortest round-trip form, switching to exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// [`num`], or empty for `None`.
pub fn field(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}
