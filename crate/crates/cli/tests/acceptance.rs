//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use owc_capture::cf::single_interferer_cf;
use owc_capture::inversion::{interference_pdf, interference_pdf_convolution};
use owc_capture::montecarlo::{
    ks_distance, sample_conditional_sinr_with, simulate_unconditional_outage_with, McConfig,
};
use owc_capture::quadrature::log_grid;
use owc_capture::reliability::{db_to_linear, sweep, unconditional_outage, OutageCurve};
use owc_capture::sinr::ConditionalSinr;
use owc_capture::{
    conditional_sinr_cdf, CaptureMode, MixtureMode, OutageQuery, QuadratureSpec, SweepAxis, SystemModel, TrafficModel,
};
use owc_capture_cli::parallel::Rayon;

const SEED: u64 = 20_240_601;
const TRIALS: u64 = 1_000_000;

/// Geometry for the semi-angle and radius sweeps: a 1.5 m ceiling, 3 m cell, 50 users.
const FIGURE_HEIGHT: f64 = 1.5;
const FIGURE_USERS: u32 = 50;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    lines: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }

    fn within(&mut self, what: &str, start: Instant, limit: Duration) {
        let t = start.elapsed();
        let label = if what.is_empty() { "runtime".to_string() } else { format!("{what}: runtime") };
        self.check(t < limit, format!("{label} {:.2} s (limit {} s)", t.as_secs_f64(), limit.as_secs()));
    }
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn threshold() -> f64 {
    db_to_linear(3.0)
}

fn single_user_oracle() -> Verdict {
    let mut v = Verdict::new();
    let m = SystemModel::reference();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for g in log_grid(m.snr_min(), m.snr_max(), 100) {
        let a = conditional_sinr_cdf(&m, 1, g, &spec()).unwrap();
        worst = worst.max((a - m.snr_cdf_closed_form(g).unwrap()).abs());
    }
    v.check(worst < 1e-6, format!("max |Δ| over 100 thresholds = {worst:.3e} (< 1e-6)"));
    v.within("", start, Duration::from_secs(1));
    v
}

fn cf_round_trip() -> Verdict {
    let mut v = Verdict::new();
    let m = SystemModel::reference();
    let start = Instant::now();
    let c = single_interferer_cf(&m, 0.0, &spec()).unwrap();
    let err0 = ((c.re - 1.0).powi(2) + c.im * c.im).sqrt();
    v.check(err0 < 1e-12, format!("|CF(0) − 1| = {err0:.3e} (< 1e-12)"));
    let d = interference_pdf(&m, 1, &spec()).unwrap();
    let peak = d.grid().iter().map(|&x| m.snr_pdf(x)).fold(0.0, f64::max);
    let worst = d.grid().iter().zip(d.pdf_values()).map(|(&x, &p)| (p - m.snr_pdf(x)).abs()).fold(0.0, f64::max);
    v.check(worst / peak < 1e-3, format!("sup |f̂ − f| / peak = {:.3e} (< 1e-3)", worst / peak));
    v.within("", start, Duration::from_secs(5));
    v
}

fn path_agreement() -> Verdict {
    let mut v = Verdict::new();
    let m = SystemModel::reference();
    let start = Instant::now();
    for n in [2u32, 3, 4] {
        let a = interference_pdf(&m, n, &spec()).unwrap();
        let b = interference_pdf_convolution(&m, n, &spec()).unwrap();
        let d = a.cdf_distance(&b);
        v.check(d < 1e-3, format!("n = {n}: CDF sup-distance {d:.3e} (< 1e-3)"));
    }
    v.within("", start, Duration::from_secs(30));
    v
}

fn mc_conditional() -> Verdict {
    let mut v = Verdict::new();
    let m = SystemModel::reference();
    for (i, n) in [1u32, 2, 3, 5].into_iter().enumerate() {
        let start = Instant::now();
        let table = ConditionalSinr::new(&m, n, &spec()).unwrap().tabulate().unwrap();
        let mc = McConfig::new(TRIALS, SEED).unwrap().with_stream(i as u32);
        let mut s = sample_conditional_sinr_with(&Rayon, &m, n, &mc).unwrap();
        let d = ks_distance(&mut s, |x| table.cdf_at(x));
        v.check(d < 0.01, format!("n_active = {n}: sup-distance {d:.4} over {TRIALS} slots (< 0.01)"));
        v.within(&format!("n_active = {n}"), start, Duration::from_secs(60));
    }
    v
}

fn unconditional_vs_mc() -> Verdict {
    let mut v = Verdict::new();
    let m = SystemModel::reference();
    let start = Instant::now();
    let mut curve = OutageCurve::new(&m, threshold(), &spec()).unwrap();
    for (i, (u, p)) in [50u32, 500].into_iter().flat_map(|u| [0.01, 0.1, 0.3].map(|p| (u, p))).enumerate() {
        let t = TrafficModel::new(u, p).unwrap();
        let a = curve.unconditional(&t, CaptureMode::Capture, MixtureMode::Unnormalized).unwrap();
        let mc = McConfig::new(TRIALS, SEED).unwrap().with_stream(100 + i as u32);
        let e = simulate_unconditional_outage_with(
            &Rayon,
            &m,
            &t,
            threshold(),
            CaptureMode::Capture,
            MixtureMode::Unnormalized,
            &mc,
        )
        .unwrap();
        let tol = e.half_width_95.max(0.005);
        let d = (a - e.value).abs();
        v.check(d < tol, format!("U = {u}, p_a = {p}: analytic {a:.5}, MC {:.5}, |Δ| {d:.2e} (< {tol:.2e})", e.value));
    }
    v.within("", start, Duration::from_secs(120));
    v
}

const USERS: [f64; 10] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0];
const PA: [f64; 3] = [0.01, 0.1, 0.3];

/// `(capture, classical)` per users value, one series per activation probability.
fn users_sweeps() -> Vec<Vec<(f64, f64)>> {
    let m = SystemModel::reference();
    let q = OutageQuery::new(threshold(), CaptureMode::Capture, MixtureMode::Unnormalized).unwrap();
    PA.iter()
        .map(|&p| {
            let t = TrafficModel::new(1, p).unwrap();
            let r = sweep(&m, &t, &q, SweepAxis::Users, &USERS, &spec(), None).unwrap();
            assert_eq!(r.failures(), 0);
            r.values().into_iter().map(|(_, c, k)| (c, k)).collect()
        })
        .collect()
}

fn dominance(curves: &[Vec<(f64, f64)>]) -> Verdict {
    let mut v = Verdict::new();
    for (p, c) in PA.iter().zip(curves) {
        let worst = c.iter().map(|(cap, cls)| cap - cls).fold(f64::NEG_INFINITY, f64::max);
        v.check(
            c.iter().all(|(cap, cls)| cap <= cls),
            format!("p_a = {p}: capture ≤ classical on all {} rows (largest capture − classical {worst:.3e})", c.len()),
        );
    }
    v
}

fn fmt_series(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

fn figure_shapes(curves: &[Vec<(f64, f64)>]) -> Verdict {
    let mut v = Verdict::new();
    for (p, c) in PA.iter().zip(curves) {
        let ok = c.windows(2).all(|w| w[1].0 >= w[0].0);
        v.check(ok, format!("nondecreasing in U at p_a = {p}"));
    }
    let by_pa = (0..USERS.len()).all(|i| curves.windows(2).all(|w| w[1][i].0 >= w[0][i].0));
    v.check(by_pa, "nondecreasing in p_a at every U".into());

    let q = OutageQuery::new(threshold(), CaptureMode::Capture, MixtureMode::Unnormalized).unwrap();
    let t = TrafficModel::new(FIGURE_USERS, 0.01).unwrap();
    let fig = SystemModel::reference().with_height(FIGURE_HEIGHT).unwrap();
    let angles: Vec<f64> = (3..=15).map(|k| (5.0 * f64::from(k)).to_radians()).collect();
    let phi = capture_series(&fig, &t, &q, SweepAxis::SemiAngle, &angles);
    v.check(
        phi.windows(2).all(|w| w[1] < w[0]),
        format!(
            "decreasing in semi-angle 15°..75° (L = {FIGURE_HEIGHT} m, U = {FIGURE_USERS}, p_a = 0.01): {}",
            fmt_series(&phi)
        ),
    );
    let radii: Vec<f64> = (2..=10).map(|k| 0.5 * f64::from(k)).collect();
    let rad = capture_series(&fig, &t, &q, SweepAxis::Radius, &radii);
    v.check(
        rad.windows(2).all(|w| w[1] >= w[0]),
        format!(
            "nondecreasing in radius 1..5 m (L = {FIGURE_HEIGHT} m, U = {FIGURE_USERS}, p_a = 0.01): {}",
            fmt_series(&rad)
        ),
    );
    // Whether a dip at small radius is real: simulate both ends of it.
    if let Some(i) = (1..rad.len()).find(|&i| rad[i] < rad[i - 1]) {
        let low = rad[i..].iter().cloned().fold(f64::INFINITY, f64::min);
        let j = i + rad[i..].iter().position(|&x| x == low).unwrap();
        for (k, r) in [(0usize, radii[0]), (j, radii[j])] {
            let m = fig.with_radius(r).unwrap();
            let mc = McConfig::new(TRIALS, SEED).unwrap().with_stream(200 + k as u32);
            let e = simulate_unconditional_outage_with(
                &Rayon,
                &m,
                &t,
                threshold(),
                CaptureMode::Capture,
                MixtureMode::Unnormalized,
                &mc,
            )
            .unwrap();
            v.note(format!("R = {r} m: analytic {:.4}, MC {:.4} ± {:.4}", rad[k], e.value, e.half_width_95));
        }
    }
    let tall = SystemModel::reference().with_height(5.0).unwrap();
    let tall_rad = capture_series(&tall, &t, &q, SweepAxis::Radius, &radii);
    let tall_phi = capture_series(&tall, &t, &q, SweepAxis::SemiAngle, &angles);
    v.note(format!("radius series at a 5 m ceiling, for reference: {}", fmt_series(&tall_rad)));
    v.note(format!("semi-angle series at a 5 m ceiling, for reference: {}", fmt_series(&tall_phi)));
    let default_phi = capture_series(&SystemModel::reference(), &t, &q, SweepAxis::SemiAngle, &angles);
    v.note(format!("semi-angle series at the default 2.5 m ceiling, for reference: {}", fmt_series(&default_phi)));
    v
}

fn capture_series(m: &SystemModel, t: &TrafficModel, q: &OutageQuery, axis: SweepAxis, values: &[f64]) -> Vec<f64> {
    let r = sweep(m, t, q, axis, values, &spec(), None).unwrap();
    assert_eq!(r.failures(), 0);
    r.values().into_iter().map(|(_, c, _)| c).collect()
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_owc-capture")).args(["validate", "--seed", "7"]).output().expect("binary runs")
    };
    let (a, b) = (run(), run());
    v.check(
        a.status.success() && b.status.success(),
        format!("validate exit statuses {:?}, {:?}", a.status.code(), b.status.code()),
    );
    v.check(
        a.stdout == b.stdout && !a.stdout.is_empty(),
        format!("two validate runs byte-identical ({} bytes)", a.stdout.len()),
    );
    v
}

fn main() -> ExitCode {
    // Sanity: the analytic helper used by the sweeps agrees with the direct call.
    let m = SystemModel::reference();
    let q = OutageQuery::new(threshold(), CaptureMode::Capture, MixtureMode::Unnormalized).unwrap();
    let direct = unconditional_outage(&m, &TrafficModel::new(50, 0.01).unwrap(), &q, &spec()).unwrap();
    assert!(direct > 0.0 && direct < 1.0);

    let curves = users_sweeps();
    let criteria: [Criterion; 8] = [
        ("single-user SINR CDF matches the closed form", Box::new(single_user_oracle)),
        ("characteristic-function round trip", Box::new(cf_round_trip)),
        ("inversion and convolution interference paths agree", Box::new(path_agreement)),
        ("conditional SINR CDF matches simulation", Box::new(mc_conditional)),
        ("unconditional outage matches simulation", Box::new(unconditional_vs_mc)),
        ("capture never worse than classical ALOHA", Box::new(|| dominance(&curves))),
        ("qualitative curve shapes", Box::new(|| figure_shapes(&curves))),
        ("repeated validate runs are byte-identical", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let v = f();
        println!("criterion {}: {} : {title}", i + 1, if v.pass { "PASS" } else { "FAIL" });
        for l in &v.lines {
            println!("    {l}");
        }
        failed += usize::from(!v.pass);
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
