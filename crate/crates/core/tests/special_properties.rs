use fdx_core::special::{eta, psi, psi_inv, GammaFn, OrliczPsi};
use fdx_core::ProblemParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn psi_round_trip(alpha in 0.0f64..3.0, e in -8.0f64..6.0) {
        let x = 10f64.powf(e);
        let back = psi_inv(alpha, psi(alpha, x).unwrap(), 1e-14).unwrap();
        prop_assert!((back - x).abs() <= 1e-6 * x.max(1.0));
    }

    #[test]
    fn psi_increasing_and_convex(alpha in 0.0f64..3.0, x in 0.0f64..1e4, h in 1e-3f64..10.0) {
        let p = OrliczPsi::new(alpha).unwrap();
        let (a, b, c) = (p.apply(x), p.apply(x + h), p.apply(x + 2.0 * h));
        prop_assert!(b > a);
        prop_assert!(a + c >= 2.0 * b * (1.0 - 1e-12));
    }

    #[test]
    fn psi_dominates_identity(alpha in 0.0f64..3.0, x in 0.0f64..1e6) {
        prop_assert!(psi(alpha, x).unwrap() >= x);
    }

    #[test]
    fn eta_increasing(dim in 1usize..=3, a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo * (1.0 + 1e-9));
        prop_assert!(eta(dim, lo).unwrap() < eta(dim, hi).unwrap());
    }
}

#[test]
fn gamma_strictly_increasing() {
    for (n, m) in [(1, 0.5), (2, 0.5), (2, 0.8)] {
        let p = ProblemParams::new(n, m, m + 2.0 / n as f64).unwrap();
        let g = GammaFn::new(p).unwrap();
        let mut prev = g.eval(0.0).unwrap();
        for k in 1..=1000 {
            let v = g.eval(k as f64 / 1000.0).unwrap();
            assert!(v > prev, "N={n} m={m} at {k}");
            prev = v;
        }
        assert_eq!(prev, 1.0);
    }
}
