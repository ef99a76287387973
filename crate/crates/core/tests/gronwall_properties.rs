use fdx_core::gronwall::{gronwall_bound, verify_against_ode, GronwallCoeffs};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bound_is_monotone_in_time_and_coefficients(
        a1 in 0.0f64..2.0, a2 in 0.0f64..2.0, a3 in 0.0f64..2.0,
        m in 0.05f64..0.95, t in 0.01f64..0.9, dt in 0.0f64..0.09, bump in 0.0f64..1.0,
    ) {
        let c = GronwallCoeffs::new(a1, a2, a3, m, 1.0).unwrap();
        let b = gronwall_bound(&c, t).unwrap();
        prop_assert!(gronwall_bound(&c, t + dt).unwrap() >= b);
        for d in [
            GronwallCoeffs { a1: a1 + bump, ..c },
            GronwallCoeffs { a2: a2 + bump, ..c },
            GronwallCoeffs { a3: a3 + bump, ..c },
        ] {
            prop_assert!(gronwall_bound(&d, t).unwrap() >= b);
        }
    }

    #[test]
    fn ode_solution_never_exceeds_bound(a1 in 0.0f64..2.0, a2 in 0.0f64..2.0, a3 in 0.0f64..2.0, m in 0.1f64..0.95) {
        let c = GronwallCoeffs::new(a1, a2, a3, m, 1.0).unwrap();
        let r = verify_against_ode(&c, 100).unwrap();
        prop_assert!(r.max_rel_gap <= 1e-8, "{r:?}");
    }
}
