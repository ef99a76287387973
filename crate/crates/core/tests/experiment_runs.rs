use fdx_core::experiments::{decay_fit, global_nonexistence_probe};
use fdx_core::profiles::barenblatt_value;
use fdx_core::solver::{simulate, Boundary, OutputSchedule, Probes, SolverConfig};
use fdx_core::trace_estimator::estimate_trace;
use fdx_core::{Exec, Grid, ProblemParams, RadialProfile};

#[test]
fn barenblatt_sup_decays_at_the_self_similar_rate() {
    let (m, cb) = (0.5, 1.0);
    let params = ProblemParams::new(1, m, 3.0).unwrap();
    let mut cfg = SolverConfig::new(params, Grid::new(1, 160, 0.1).unwrap()).with_regularization(f64::INFINITY);
    cfg.source_on = false;
    cfg.t_end = 19.0;
    cfg.output = OutputSchedule::Geometric { t_first: 0.1, ratio: 1.2 };
    cfg.boundary = Boundary::dirichlet(move |t, r| barenblatt_value(1, m, cb, 1.0 + t, r));
    let prof = RadialProfile::barenblatt(1, m, cb, 1.0).unwrap();
    let tr = simulate(&prof, &cfg, &Probes::default()).unwrap().shifted(1.0);
    let fit = decay_fit(&tr, &params, (2.0, 20.0)).unwrap();
    assert!((fit.slope + 2.0 / 3.0).abs() < 0.03, "{}", fit.slope);
}

#[test]
fn trace_of_smooth_data_matches_initial_masses() {
    let params = ProblemParams::new(2, 0.6, 2.0).unwrap();
    let mut cfg = SolverConfig::new(params, Grid::new(2, 100, 0.05).unwrap());
    cfg.t_end = 1e-2;
    cfg.output = OutputSchedule::Geometric { t_first: 1e-5, ratio: 2.0 };
    let radii = [0.3, 0.6, 1.2, 2.4];
    let prof = RadialProfile::barenblatt(2, 0.6, 1.0, 1.0).unwrap();
    let tr = simulate(&prof, &cfg, &Probes::masses(&radii)).unwrap();
    let est = estimate_trace(&tr, Exec::Sequential).unwrap();
    for j in 0..radii.len() {
        let m0 = tr.ball_mass[0][j];
        assert!((est.masses[j] / m0 - 1.0).abs() < 1e-3, "{}: {} vs {m0}", radii[j], est.masses[j]);
    }
}

#[test]
fn floor_alone_blows_up_in_the_subcritical_regime() {
    let params = ProblemParams::new(1, 0.5, 1.5).unwrap();
    let mut cfg = SolverConfig::new(params, Grid::new(1, 16, 0.5).unwrap()).with_regularization(100.0);
    cfg.boundary = Boundary::ZeroFlux;
    cfg.output = OutputSchedule::Geometric { t_first: 1.0, ratio: 1.5 };
    // zero data regularized to the constant 1/n = 0.01: ODE blow-up at t = 2 / sqrt(0.01) = 20
    let rep = global_nonexistence_probe(&RadialProfile::zero(1).unwrap(), &cfg, &[10.0, 30.0, 100.0]).unwrap();
    assert_eq!(rep.labels.iter().map(|l| l.1).collect::<Vec<_>>(), vec![false, true, true]);
    assert_eq!(rep.first_blowup_horizon, Some(30.0));
}
