use fdx_core::profiles::barenblatt_value;
use fdx_core::solver::{simulate, simulate_field, Boundary, OutputSchedule, Probes, SolverConfig, Status};
use fdx_core::{Grid, GridField, ProblemParams, RadialProfile};
use proptest::prelude::*;

fn config(dim: usize, m: f64, p: f64, cells: usize, dr: f64) -> SolverConfig {
    let mut cfg = SolverConfig::new(ProblemParams::new(dim, m, p).unwrap(), Grid::new(dim, cells, dr).unwrap());
    cfg.t_end = 0.05;
    cfg.output = OutputSchedule::Linear { interval: 0.01 };
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solutions_stay_positive_and_above_floor(
        dim in 1usize..=3, m in 0.3f64..0.9,
        u in proptest::collection::vec(0.0f64..3.0, 30),
    ) {
        let cfg = config(dim, m, 2.0, 30, 0.1);
        let field = GridField::new(cfg.grid, u.iter().map(|v| v + cfg.u_floor).collect()).unwrap();
        let tr = simulate_field(field, &cfg, &Probes::masses(&[0.5, 1.0])).unwrap();
        let last = tr.final_field.unwrap();
        prop_assert!(last.inf() >= cfg.u_floor * (1.0 - 1e-12));
        prop_assert!(tr.sup_norm.iter().all(|s| s.is_finite() && *s > 0.0));
    }

    #[test]
    fn zero_flux_conserves_mass_without_source(
        dim in 1usize..=3, m in 0.3f64..0.9,
        u in proptest::collection::vec(0.01f64..3.0, 24),
    ) {
        let mut cfg = config(dim, m, 2.0, 24, 0.1).with_regularization(f64::INFINITY);
        cfg.boundary = Boundary::ZeroFlux;
        cfg.source_on = false;
        let field = GridField::new(cfg.grid, u).unwrap();
        let before = field.total_mass();
        let tr = simulate_field(field, &cfg, &Probes::default()).unwrap();
        let after = tr.final_field.unwrap().total_mass();
        prop_assert!(((after - before) / before).abs() < 1e-11, "{before} -> {after}");
    }

    #[test]
    fn source_only_increases_solution(dim in 1usize..=2, c in 0.1f64..1.0) {
        let cfg = config(dim, 0.5, 2.0, 16, 0.2);
        let mut off = cfg.clone();
        off.source_on = false;
        let prof = RadialProfile::power_law(dim, c, 0.5).unwrap().with_cutoff(2.0).unwrap();
        let a = simulate(&prof, &cfg, &Probes::default()).unwrap().final_field.unwrap();
        let b = simulate(&prof, &off, &Probes::default()).unwrap().final_field.unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(x >= y);
        }
    }
}

fn barenblatt_error(cells: usize) -> f64 {
    let (m, cb) = (0.5, 1.0);
    let dr = 8.0 / cells as f64;
    let params = ProblemParams::new(1, m, 3.0).unwrap();
    let mut cfg = SolverConfig::new(params, Grid::new(1, cells, dr).unwrap()).with_regularization(f64::INFINITY);
    cfg.source_on = false;
    cfg.t_end = 1.0;
    cfg.output = OutputSchedule::Linear { interval: 0.5 };
    cfg.boundary = Boundary::dirichlet(move |t, r| barenblatt_value(1, m, cb, 1.0 + t, r));
    let prof = RadialProfile::barenblatt(1, m, cb, 1.0).unwrap();
    let tr = simulate(&prof, &cfg, &Probes::default()).unwrap();
    assert_eq!(tr.status, Status::Completed);
    let f = tr.final_field.unwrap();
    let centers = f.grid().centers();
    let err = f
        .values()
        .iter()
        .zip(&centers)
        .map(|(u, r)| (u - barenblatt_value(1, m, cb, 2.0, *r)).abs())
        .fold(0.0, f64::max);
    err / 2f64.powf(-2.0 / 3.0)
}

#[test]
fn barenblatt_error_decreases_under_refinement() {
    let coarse = barenblatt_error(40);
    let fine = barenblatt_error(80);
    assert!(coarse / fine >= 3.0, "{coarse} -> {fine}");
}
