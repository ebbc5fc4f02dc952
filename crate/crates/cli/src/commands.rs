//! The four subcommands. Each returns the complete CSV text and an exit status.

use owc_capture::cf::single_interferer_cf;
use owc_capture::inversion::interference_pdf_with_diagnostics;
use owc_capture::montecarlo::{
    ks_distance, sample_conditional_sinr_with, simulate_conditional_outage_with, simulate_slots_with, McEstimate,
};
use owc_capture::quadrature::{log_grid, GaussLegendre};
use owc_capture::reliability::{conditional_outage, sweep_with, OutageCurve};
use owc_capture::sinr::{sinr_support, ConditionalSinr};
use owc_capture::{interference_pdf_convolution, CaptureMode, Error, SweepAxis, SystemModel};

use crate::config::{mixture_name, mode_name, RunConfig};
use crate::csv::{field, header, num, row};
use crate::error::{exit, CliError};
use crate::parallel::Rayon;

/// Which estimates to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RunMode {
    Analytic,
    Mc,
    Both,
}

impl RunMode {
    fn analytic(self) -> bool {
        self != RunMode::Mc
    }

    fn mc(self) -> bool {
        self != RunMode::Analytic
    }

    fn name(self) -> &'static str {
        match self {
            RunMode::Analytic => "analytic",
            RunMode::Mc => "mc",
            RunMode::Both => "both",
        }
    }
}

/// Output text plus the exit status the process should report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub text: String,
    pub status: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Self { text, status: exit::OK }
    }
}

fn check_n_active(n: u32) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n-active must be at least 1".into()));
    }
    Ok(())
}

/// Empirical CDF of sorted samples at `x`.
fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&s| s <= x) as f64 / sorted.len() as f64
}

/// Conditional SINR distribution as `x,pdf,cdf` (analytic) and/or `mc_cdf`.
pub fn cmd_cdf(cfg: &RunConfig, n_active: u32, mode: RunMode) -> Result<Report, CliError> {
    check_n_active(n_active)?;
    let args = [("n_active", n_active.to_string()), ("mode", mode.name().to_string())];
    let mut text = header("cdf", &args, &cfg.settings);
    let table =
        if mode.analytic() { Some(ConditionalSinr::new(&cfg.model, n_active, cfg.spec())?.tabulate()?) } else { None };
    let grid = match &table {
        Some(t) => t.grid().to_vec(),
        None => {
            let (lo, hi) = sinr_support(&cfg.model, n_active);
            log_grid(lo, hi, cfg.spec().grid_points)
        }
    };
    let samples = if mode.mc() {
        let mut s = sample_conditional_sinr_with(&Rayon, &cfg.model, n_active, &cfg.mc)?;
        s.sort_unstable_by(f64::total_cmp);
        Some(s)
    } else {
        None
    };
    if let (Some(t), Some(s)) = (&table, &samples) {
        let d = ks_distance(&mut s.clone(), |x| t.cdf_at(x));
        text.push_str(&format!("# mc_sup_distance = {}\n", num(d)));
    }
    let mut cols = vec!["x"];
    if table.is_some() {
        cols.extend(["pdf", "cdf"]);
    }
    if samples.is_some() {
        cols.push("mc_cdf");
    }
    text.push_str(&cols.join(","));
    text.push('\n');
    for (i, &x) in grid.iter().enumerate() {
        let mut f = vec![field(Some(x))];
        if let Some(t) = &table {
            f.push(field(Some(t.pdf_values()[i])));
            f.push(field(Some(t.cdf_values()[i])));
        }
        if let Some(s) = &samples {
            f.push(field(Some(ecdf(s, x))));
        }
        text.push_str(&row(&f));
    }
    Ok(Report::ok(text))
}

fn mc_fields(e: Option<McEstimate>) -> [String; 2] {
    [field(e.map(|e| e.value)), field(e.map(|e| e.half_width_95))]
}

/// Outage for a fixed number of active users, or averaged over Bernoulli arrivals.
pub fn cmd_outage(cfg: &RunConfig, n_active: Option<u32>, mode: RunMode) -> Result<Report, CliError> {
    let q = &cfg.query;
    let mut args = vec![("mode", mode.name().to_string())];
    if let Some(n) = n_active {
        check_n_active(n)?;
        args.push(("n_active", n.to_string()));
    }
    let mut text = header("outage", &args, &cfg.settings);
    match n_active {
        Some(n) => {
            let (capture, classical) = if mode.analytic() {
                let c = conditional_outage(&cfg.model, n, &q.with_mode(CaptureMode::Capture), cfg.spec())?;
                let k = conditional_outage(&cfg.model, n, &q.with_mode(CaptureMode::Classical), cfg.spec())?;
                (Some(c), Some(k))
            } else {
                (None, None)
            };
            let mc = if mode.mc() {
                Some(if q.mode == CaptureMode::Classical && n >= 2 {
                    McEstimate::from_counts(cfg.mc.trials, cfg.mc.trials, cfg.mc.trials)
                } else {
                    simulate_conditional_outage_with(&Rayon, &cfg.model, n, q.threshold, &cfg.mc)?
                })
            } else {
                None
            };
            text.push_str("n_active,p_out_capture,p_out_classical,mc_value,mc_ci95\n");
            let [v, w] = mc_fields(mc);
            text.push_str(&row(&[n.to_string(), field(capture), field(classical), v, w]));
        }
        None => {
            let (capture, classical) = if mode.analytic() {
                let mut curve = OutageCurve::new(&cfg.model, q.threshold, cfg.spec())?;
                (
                    Some(curve.unconditional(&cfg.traffic, CaptureMode::Capture, q.mixture)?),
                    Some(curve.unconditional(&cfg.traffic, CaptureMode::Classical, q.mixture)?),
                )
            } else {
                (None, None)
            };
            let mc = if mode.mc() {
                let tally = simulate_slots_with(&Rayon, &cfg.model, &cfg.traffic, q.threshold, &cfg.mc)?;
                let e = tally.estimate(q.mode, q.mixture);
                if e.is_degenerate() {
                    text.push_str("# mc: no slot held an active user; value reported as 0\n");
                }
                Some(e)
            } else {
                None
            };
            text.push_str("users,pa,p_out_capture,p_out_classical,mc_value,mc_ci95\n");
            let [v, w] = mc_fields(mc);
            text.push_str(&row(&[
                cfg.traffic.population().to_string(),
                field(Some(cfg.traffic.activation_prob())),
                field(capture),
                field(classical),
                v,
                w,
            ]));
        }
    }
    Ok(Report::ok(text))
}

/// Parses `--values`: a comma list of numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("cannot read sweep value `{}`", v.trim())))
        })
        .collect()
}

/// Outage along one axis. Semi-angles are given in degrees. Failed rows leave
/// their value columns empty and are followed by a `# error` comment.
pub fn cmd_sweep(cfg: &RunConfig, axis: SweepAxis, values: &[f64], mode: RunMode) -> Result<Report, CliError> {
    let list: Vec<String> = values.iter().map(|&v| num(v)).collect();
    let args = [("axis", axis.name().to_string()), ("values", list.join(",")), ("mode", mode.name().to_string())];
    let mut text = header("sweep", &args, &cfg.settings);
    let internal: Vec<f64> = match axis {
        SweepAxis::SemiAngle => values.iter().map(|v| v.to_radians()).collect(),
        _ => values.to_vec(),
    };
    let mc = mode.mc().then_some(&cfg.mc);
    let result = sweep_with(&Rayon, &cfg.model, &cfg.traffic, &cfg.query, axis, &internal, cfg.spec(), mc).map_err(
        |e| match e {
            Error::InvalidParameter { name: "values", reason } => CliError::Usage(format!("--values: {reason}")),
            other => CliError::Numerical(other),
        },
    )?;
    text.push_str("param,p_out_capture,p_out_classical,mc_value,mc_ci95\n");
    for (r, shown) in result.rows.iter().zip(values) {
        match &r.outcome {
            Ok(v) => {
                let [a, b] = mc_fields(v.mc);
                text.push_str(&row(&[
                    field(Some(*shown)),
                    field(Some(v.p_out_capture)),
                    field(Some(v.p_out_classical)),
                    a,
                    b,
                ]));
            }
            Err(e) => {
                text.push_str(&row(&[field(Some(*shown)), String::new(), String::new(), String::new(), String::new()]));
                text.push_str(&format!("# error at {} = {shown}: {e}\n", axis.name()));
            }
        }
    }
    let status = if result.failures() > 0 { exit::NUMERICAL } else { exit::OK };
    Ok(Report { text, status })
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` when the computation itself failed.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured: Some(measured), tolerance, note: None }
    }

    fn failed(name: impl Into<String>, tolerance: f64, e: impl std::fmt::Display) -> Self {
        Self { name: name.into(), measured: None, tolerance, note: Some(e.to_string()) }
    }

    pub fn passed(&self) -> bool {
        self.measured.is_some_and(|m| m < self.tolerance)
    }
}

/// Sup-distance allowed between an empirical CDF of `trials` draws and the
/// analytic one: 0.01, widened to the 95% Kolmogorov–Smirnov critical value
/// `1.36/√trials` for small runs.
pub fn ks_tolerance(trials: u64) -> f64 {
    (1.36 / (trials as f64).sqrt()).max(0.01)
}

fn closed_form_check(model: &SystemModel) -> Check {
    // Integrate the density in ln γ, where it is a single exponential.
    let gl = GaussLegendre::new(16);
    let (a, b) = (model.snr_min(), model.snr_max());
    let mut worst = 0.0f64;
    for g in log_grid(a, b, 100) {
        let numeric = gl.integrate_composite(
            |u| {
                let x = u.exp();
                x * model.snr_pdf(x)
            },
            a.ln(),
            g.ln(),
            64,
        );
        match model.snr_cdf_closed_form(g) {
            Ok(c) => worst = worst.max((c - numeric).abs()),
            Err(e) => return Check::failed("snr_cdf_closed_form_vs_quadrature", 1e-9, e),
        }
    }
    Check::new("snr_cdf_closed_form_vs_quadrature", worst, 1e-9)
}

fn single_user_check(cfg: &RunConfig) -> Check {
    let m = &cfg.model;
    let name = "single_user_sinr_cdf_vs_closed_form";
    let Ok(s) = ConditionalSinr::new(m, 1, cfg.spec()) else {
        return Check::failed(name, 1e-6, "could not build the single-user distribution");
    };
    let mut worst = 0.0f64;
    for g in log_grid(m.snr_min(), m.snr_max(), 100) {
        match m.snr_cdf_closed_form(g) {
            Ok(c) => worst = worst.max((s.cdf(g) - c).abs()),
            Err(e) => return Check::failed(name, 1e-6, e),
        }
    }
    Check::new(name, worst, 1e-6)
}

fn cf_checks(cfg: &RunConfig) -> Vec<Check> {
    let m = &cfg.model;
    let mut out = Vec::new();
    match single_interferer_cf(m, 0.0, cfg.spec()) {
        Ok(c) => out.push(Check::new("cf_at_zero", ((c.re - 1.0).powi(2) + c.im * c.im).sqrt(), 1e-12)),
        Err(e) => out.push(Check::failed("cf_at_zero", 1e-12, e)),
    }
    match interference_pdf_with_diagnostics(m, 1, cfg.spec()) {
        Ok((d, diag)) => {
            let worst =
                d.grid().iter().zip(d.pdf_values()).map(|(&x, &p)| (p - m.snr_pdf(x)).abs()).fold(0.0, f64::max);
            let peak = d.grid().iter().map(|&x| m.snr_pdf(x)).fold(0.0, f64::max);
            out.push(Check::new("inversion_renormalization_n1", diag.renormalization, 1e-2));
            out.push(Check::new("cf_round_trip_n1", worst / peak, 1e-3));
        }
        Err(Error::Renormalization { correction, budget }) => {
            out.push(Check {
                note: Some("raise inversion_t_max or inversion_nodes".into()),
                ..Check::new("inversion_renormalization_n1", correction, budget)
            });
            out.push(Check::failed("cf_round_trip_n1", 1e-3, "inversion rejected"));
        }
        Err(e) => out.push(Check::failed("cf_round_trip_n1", 1e-3, e)),
    }
    for n in [2u32, 3, 4] {
        let name = format!("inversion_vs_convolution_n{n}");
        let pair = interference_pdf_with_diagnostics(m, n, cfg.spec())
            .and_then(|(a, _)| Ok((a, interference_pdf_convolution(m, n, cfg.spec())?)));
        match pair {
            Ok((a, b)) => out.push(Check::new(name, a.cdf_distance(&b), 1e-3)),
            Err(e) => out.push(Check::failed(name, 1e-3, e)),
        }
    }
    out
}

fn mc_checks(cfg: &RunConfig) -> Vec<Check> {
    let m = &cfg.model;
    let mut out = Vec::new();
    let tol = ks_tolerance(cfg.mc.trials);
    for n in [1u32, 2, 3, 5] {
        let name = format!("mc_sinr_cdf_n{n}");
        let run = || -> Result<f64, Error> {
            let table = ConditionalSinr::new(m, n, cfg.spec())?.tabulate()?;
            let mut s = sample_conditional_sinr_with(&Rayon, m, n, &cfg.mc)?;
            Ok(ks_distance(&mut s, |x| table.cdf_at(x)))
        };
        match run() {
            Ok(d) => out.push(Check::new(name, d, tol)),
            Err(e) => out.push(Check::failed(name, tol, e)),
        }
    }
    let q = &cfg.query;
    let name = format!(
        "mc_unconditional_{}_{}_u{}_pa{}",
        mode_name(q.mode),
        mixture_name(q.mixture),
        cfg.traffic.population(),
        cfg.traffic.activation_prob()
    );
    let run = || -> Result<(f64, McEstimate), Error> {
        let analytic = OutageCurve::new(m, q.threshold, cfg.spec())?.unconditional(&cfg.traffic, q.mode, q.mixture)?;
        let e = simulate_slots_with(&Rayon, m, &cfg.traffic, q.threshold, &cfg.mc)?.estimate(q.mode, q.mixture);
        Ok((analytic, e))
    };
    match run() {
        Ok((a, e)) => out.push(Check::new(name, (a - e.value).abs(), e.half_width_95.max(0.005))),
        Err(e) => out.push(Check::failed(name, 0.005, e)),
    }
    out
}

/// Every oracle comparison, in report order.
pub fn validation_checks(cfg: &RunConfig) -> Vec<Check> {
    let mut checks = vec![closed_form_check(&cfg.model), single_user_check(cfg)];
    checks.extend(cf_checks(cfg));
    checks.extend(mc_checks(cfg));
    checks
}

/// Runs the oracle suite; the status is nonzero if any check fails.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut text = header("validate", &[], &cfg.settings);
    let checks = validation_checks(cfg);
    text.push_str("check,measured,tolerance,result\n");
    for c in &checks {
        let verdict = if c.passed() { "pass" } else { "FAIL" };
        text.push_str(&row(&[c.name.clone(), field(c.measured), format!("{:e}", c.tolerance), verdict.into()]));
        if let Some(note) = &c.note {
            text.push_str(&format!("# {}: {note}\n", c.name));
        }
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    text.push_str(&format!("# {} of {} checks passed\n", checks.len() - failed, checks.len()));
    let status = if failed == 0 { exit::OK } else { exit::VALIDATION };
    Ok(Report { text, status })
}
