use std::sync::{LazyLock, Mutex};

use owc_capture::montecarlo::{
    half_width_95, sample_user_snr, simulate_conditional_outage, simulate_unconditional_outage, McConfig,
};
use owc_capture::reliability::{binomial_pmf, conditional_outage, db_to_linear, OutageCurve};
use owc_capture::sinr::ConditionalSinr;
use owc_capture::{
    conditional_sinr_pdf, CaptureMode, MixtureMode, OutageQuery, QuadratureSpec, SystemModel, TrafficModel,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static CURVE: LazyLock<Mutex<OutageCurve>> = LazyLock::new(|| {
    let m = SystemModel::reference();
    Mutex::new(OutageCurve::new(&m, db_to_linear(3.0), &QuadratureSpec::default()).unwrap())
});

static SINRS: LazyLock<Vec<ConditionalSinr>> = LazyLock::new(|| {
    let m = SystemModel::reference();
    (1..=5).map(|n| ConditionalSinr::new(&m, n, &QuadratureSpec::default()).unwrap()).collect()
});

fn outage(u: u32, p: f64, mode: CaptureMode) -> f64 {
    let t = TrafficModel::new(u, p).unwrap();
    CURVE.lock().unwrap().unconditional(&t, mode, MixtureMode::Unnormalized).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_sums_to_one_with_mean_up(u in 1u32..3000, p in 0.0f64..=1.0) {
        let t = TrafficModel::new(u, p).unwrap();
        let (mut mass, mut mean) = (0.0, 0.0);
        for n in 0..=u {
            let w = binomial_pmf(&t, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
            mass += w;
            mean += f64::from(n) * w;
        }
        prop_assert!((mass - 1.0).abs() < 1e-12, "mass {}", mass);
        prop_assert!((mean - f64::from(u) * p).abs() < 1e-10 * f64::from(u).max(1.0), "mean {}", mean);
    }

    #[test]
    fn outage_grows_with_load(u in 1u32..400, du in 1u32..100, p in 0.0f64..0.5, dp in 0.001f64..0.5) {
        let base = outage(u, p, CaptureMode::Capture);
        prop_assert!(outage(u + du, p, CaptureMode::Capture) >= base - 1e-12);
        prop_assert!(outage(u, p + dp, CaptureMode::Capture) >= base - 1e-12);
    }

    #[test]
    fn capture_never_worse_than_classical(u in 1u32..1000, p in 0.0f64..=1.0) {
        let capture = outage(u, p, CaptureMode::Capture);
        let classical = outage(u, p, CaptureMode::Classical);
        prop_assert!((0.0..=1.0).contains(&capture));
        prop_assert!(capture <= classical + 1e-12, "{} > {}", capture, classical);
    }

    #[test]
    fn more_interferers_never_help(x in 0.01f64..70.0) {
        for w in SINRS.windows(2) {
            prop_assert!(w[1].cdf(x) >= w[0].cdf(x) - 1e-6, "x={} n={}", x, w[0].n_active());
        }
    }

    #[test]
    fn half_width_shrinks_by_root_two_on_doubled_trials(v in 0.0f64..=1.0, trials in 1u64..1_000_000_000) {
        let a = half_width_95(v, trials);
        let b = half_width_95(v, 2 * trials);
        prop_assert!((a - b * std::f64::consts::SQRT_2).abs() <= 1e-12 * a.max(1e-300));
        prop_assert!((a - 1.96 * (v * (1.0 - v) / trials as f64).sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn sampled_snr_stays_in_support(radius in 0.1f64..8.0, height in 0.5f64..5.0, seed in any::<u64>()) {
        let m = SystemModel::reference().with_radius(radius).unwrap().with_height(height).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let g = sample_user_snr(&m, &mut rng);
            prop_assert!(g >= m.snr_min() * (1.0 - 1e-12) && g <= m.snr_max() * (1.0 + 1e-12), "{}", g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn conditional_outage_nondecreasing_in_active_users(db in 0.0f64..15.0) {
        let m = SystemModel::reference();
        let spec = QuadratureSpec::default();
        let q = OutageQuery::new(db_to_linear(db), CaptureMode::Capture, MixtureMode::Unnormalized).unwrap();
        let mut prev = 0.0;
        for n in 1..=4 {
            let v = conditional_outage(&m, n, &q, &spec).unwrap();
            prop_assert!(v >= prev - 1e-6, "n={} {} < {}", n, v, prev);
            prev = v;
        }
    }

    #[test]
    fn monte_carlo_is_reproducible(seed in any::<u64>(), stream in any::<u32>(), n in 1u32..5) {
        let m = SystemModel::reference();
        let mc = McConfig::new(70_000, seed).unwrap().with_stream(stream);
        let a = simulate_conditional_outage(&m, n, 2.0, &mc).unwrap();
        let b = simulate_conditional_outage(&m, n, 2.0, &mc).unwrap();
        prop_assert_eq!(a, b);
        let t = TrafficModel::new(30, 0.1).unwrap();
        let c = simulate_unconditional_outage(&m, &t, 2.0, CaptureMode::Capture, MixtureMode::Unnormalized, &mc).unwrap();
        let d = simulate_unconditional_outage(&m, &t, 2.0, CaptureMode::Capture, MixtureMode::Unnormalized, &mc).unwrap();
        prop_assert_eq!(c, d);
        prop_assert!((0.0..=1.0).contains(&c.value));
    }
}

#[test]
fn produced_distributions_are_valid() {
    let m = SystemModel::reference().with_height(1.5).unwrap();
    for n in 1..=3 {
        let d = conditional_sinr_pdf(&m, n, &QuadratureSpec::default()).unwrap();
        d.validate().unwrap();
        assert!(d.pdf_values().iter().all(|&p| p >= 0.0));
        assert!(d.cdf_values().windows(2).all(|w| w[1] >= w[0]));
        assert!((d.cdf_values().last().unwrap() - 1.0).abs() < 1e-3);
    }
}
