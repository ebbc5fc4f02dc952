use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use owc_capture::SweepAxis;
use owc_capture_cli::commands::{cmd_cdf, cmd_outage, cmd_sweep, cmd_validate, parse_values, Report, RunMode};
use owc_capture_cli::config::{load_config, Settings, Threshold};
use owc_capture_cli::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "owc-capture",
    version,
    about = "Outage of slotted ALOHA with capture in an indoor optical wireless cell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or `-` for standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = RunMode::Analytic)]
    mode: RunMode,
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// SINR threshold, linear (`2`) or in dB (`3dB`).
    #[arg(long, global = true, value_parser = parse_threshold)]
    threshold: Option<Threshold>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Conditional SINR distribution of the reference user.
    Cdf {
        #[arg(long)]
        n_active: u32,
    },
    /// Outage for a fixed number of active users, or averaged over arrivals.
    Outage {
        #[arg(long)]
        n_active: Option<u32>,
    },
    /// Outage along one parameter axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated, strictly increasing; semi-angles in degrees.
        #[arg(long)]
        values: String,
    },
    /// Compare every analytic result against its oracle.
    Validate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Axis {
    Users,
    #[value(name = "semi_angle")]
    SemiAngle,
    Radius,
    #[value(name = "activation_prob")]
    ActivationProb,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Users => SweepAxis::Users,
            Axis::SemiAngle => SweepAxis::SemiAngle,
            Axis::Radius => SweepAxis::Radius,
            Axis::ActivationProb => SweepAxis::ActivationProb,
        }
    }
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    Threshold::parse(s).ok_or_else(|| format!("cannot read threshold `{s}`; use e.g. 2 or 3dB"))
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let mut settings = match &cli.config {
        Some(path) => load_config(path)?.settings,
        None => Settings::default(),
    };
    if let Some(s) = cli.seed {
        settings.seed = s;
    }
    if let Some(t) = cli.trials {
        settings.trials = t;
    }
    if let Some(t) = cli.threshold {
        settings.threshold = t;
    }
    if let Some(o) = &cli.out {
        settings.output = Some(o.clone());
    }
    let cfg = settings.resolve()?;
    let report = match cli.command {
        Command::Cdf { n_active } => cmd_cdf(&cfg, n_active, cli.mode)?,
        Command::Outage { n_active } => cmd_outage(&cfg, n_active, cli.mode)?,
        Command::Sweep { axis, values } => cmd_sweep(&cfg, axis.into(), &parse_values(&values)?, cli.mode)?,
        Command::Validate => cmd_validate(&cfg)?,
    };
    match cfg.settings.output.as_deref() {
        None | Some("-") => std::io::stdout().lock().write_all(report.text.as_bytes())?,
        Some(path) => std::fs::write(path, &report.text)?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => ExitCode::from(report.status),
        Err(e) => {
            eprintln!("owc-capture: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
