use fdx_core::profiles::barenblatt_value;
use fdx_core::RadialProfile;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn centered_power_averages_match_quadrature(dim in 1usize..=3, frac in 0.0f64..0.95, e in -3.0f64..1.0) {
        let a = frac * dim as f64;
        let sigma = 10f64.powf(e);
        let f = RadialProfile::power_law(dim, 1.0, a).unwrap();
        let exact = f.ball_average(0.0, sigma, 1e-12).unwrap();
        let numeric = f.ball_average_numeric(0.0, sigma, 1e-12).unwrap();
        prop_assert!(((exact - numeric) / exact).abs() < 1e-6, "{exact} vs {numeric}");
    }

    #[test]
    fn off_center_averages_do_not_exceed_centered(dim in 1usize..=3, frac in 0.05f64..0.9, t in 0.0f64..3.0, sigma in 0.05f64..2.0) {
        let f = RadialProfile::power_law(dim, 1.0, frac * dim as f64).unwrap();
        let centered = f.ball_average(0.0, sigma, 1e-10).unwrap();
        let off = f.ball_average(t * sigma, sigma, 1e-10).unwrap();
        prop_assert!(off <= centered * (1.0 + 1e-8), "{off} > {centered}");
    }

    #[test]
    fn critical_log_off_center_spot_check(dim in 1usize..=3, t in 0.0f64..3.0, sigma in 0.05f64..1.0) {
        let f = RadialProfile::critical_log(dim, 1.0).unwrap();
        let centered = f.ball_average(0.0, sigma, 1e-10).unwrap();
        let off = f.ball_average(t * sigma, sigma, 1e-10).unwrap();
        prop_assert!(off <= centered * (1.0 + 1e-8));
    }
}

#[test]
fn barenblatt_satisfies_fast_diffusion() {
    // residual of U_t - (U^m)'' in 1-D on a smooth region
    let (m, cb) = (0.5, 1.0);
    let u = |r: f64, t: f64| barenblatt_value(1, m, cb, t, r);
    let h = 1e-3;
    for &t in &[1.0, 1.5, 2.0] {
        for k in 0..20 {
            let r = 0.1 * k as f64;
            let ut = (u(r, t + h) - u(r, t - h)) / (2.0 * h);
            let lap = (u(r + h, t).powf(m) - 2.0 * u(r, t).powf(m) + u(r - h, t).powf(m)) / (h * h);
            assert!((ut - lap).abs() < 1e-4, "t={t} r={r}: {}", ut - lap);
        }
    }
}
