use std::sync::Arc;

use fdx_core::ulmorrey::{doubling_ratio, norm, NormKind, NormSpec, ScanGrid, ScanOptions};
use fdx_core::{Exec, Grid, GridField, RadialProfile};
use proptest::prelude::*;

fn field_strategy() -> impl Strategy<Value = GridField> {
    (1usize..=3, 12usize..40, 0.05f64..0.2).prop_flat_map(|(dim, cells, dr)| {
        proptest::collection::vec(prop_oneof![3 => Just(0.0), 5 => 0.0f64..1.0, 1 => 1.0f64..50.0], cells)
            .prop_map(move |u| GridField::new(Grid::new(dim, cells, dr).unwrap(), u).unwrap())
    })
}

/// Morrey norm with cap `radius`, scanned on the radii grid built for
/// `scan_radius >= radius` so that different caps share sample points.
fn morrey_on(f: &GridField, q: f64, alpha: f64, radius: f64, scan_radius: f64) -> f64 {
    let prof = RadialProfile::gridded(Arc::new(f.clone()));
    let spec = NormSpec::new(NormKind::morrey(q, alpha).unwrap(), radius).unwrap();
    let opts = ScanOptions { per_decade: 16, exec: Exec::Sequential, ..Default::default() };
    let mut scan_radii = opts.grid_for(&prof, scan_radius).unwrap().radii().to_vec();
    scan_radii.push(radius);
    let scan = ScanGrid::new(opts.centers_for(&prof), scan_radii).unwrap().with_exec(Exec::Sequential);
    norm(&prof, &spec, &scan).unwrap().value
}

fn morrey(f: &GridField, q: f64, alpha: f64, radius: f64) -> f64 {
    morrey_on(f, q, alpha, radius, radius)
}

fn scaled(f: &GridField, c: f64) -> GridField {
    GridField::new(*f.grid(), f.values().iter().map(|v| c * v).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_is_bounded_by_covering_number(f in field_strategy(), frac in 0.05f64..0.5) {
        let sigma = (frac * f.grid().radius()).max(f.grid().dr());
        let r = doubling_ratio(&f, sigma, 2.0, Exec::Sequential).unwrap();
        prop_assert!(r <= 3f64.powi(f.dim() as i32), "ratio {r}");
        prop_assert!(r >= 1.0 - 1e-12);
    }

    #[test]
    fn homogeneity(f in field_strategy(), c in 0.01f64..100.0, alpha in 1.0f64..3.0) {
        let a = morrey(&f, 2.0, alpha, 1.0);
        let b = morrey(&scaled(&f, c), 2.0, alpha, 1.0);
        prop_assert!((b - c * a).abs() <= 1e-10 * (c * a).max(1e-300), "{b} vs {}", c * a);
    }

    #[test]
    fn monotone_under_domination(f in field_strategy(), bump in proptest::collection::vec(0.0f64..2.0, 40)) {
        let g = GridField::new(
            *f.grid(),
            f.values().iter().zip(&bump).map(|(v, b)| v + b).collect(),
        ).unwrap();
        prop_assert!(morrey(&f, 1.5, 1.0, 1.0) <= morrey(&g, 1.5, 1.0, 1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn radius_cap_monotone(f in field_strategy(), r1 in 0.3f64..1.0, extra in 0.0f64..2.0) {
        let r2 = r1 + extra;
        prop_assert!(morrey_on(&f, 2.0, 1.0, r1, r2) <= morrey_on(&f, 2.0, 1.0, r2, r2) * (1.0 + 1e-12));
    }

    #[test]
    fn scale_equivalence(f in field_strategy(), big_r in 1.0f64..4.0, q in 1.0f64..3.0, alpha in 1.0f64..2.0) {
        let n = f.dim() as f64;
        let unit = morrey_on(&f, q, alpha, 1.0, big_r);
        let wide = morrey_on(&f, q, alpha, big_r, big_r);
        prop_assert!(unit <= wide * (1.0 + 1e-12));
        // covering B(z, sigma) by unit balls: at most (3 sigma)^N of them
        let bound = big_r.powf(n / q) * 3f64.powf(n / alpha) * 1.5;
        prop_assert!(wide <= bound * unit + 1e-300, "{wide} > {bound} * {unit}");
    }
}
