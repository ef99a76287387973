//! Subcommand execution: builds core objects from a [`RunConfig`], runs the
//! experiment and renders its CSV artifact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fdx_core::experiments::{decay_fit, threshold_sweep, SweepOptions};
use fdx_core::gronwall::check_random_draws;
use fdx_core::io::{csv_line, fmt_float};
use fdx_core::profiles::{barenblatt_value, critical_profile};
use fdx_core::solver::{simulate, Boundary, OutputSchedule, Probes, SolverConfig};
use fdx_core::trace_estimator::{estimate_trace, fit_trace_bounds};
use fdx_core::ulmorrey::{check_condition, norm, NormKind, NormSpec, ScanOptions};
use fdx_core::{Exec, Grid, RadialProfile, Regime};

use crate::config::{BoundaryName, NormName, OutputName, ProfileName, RunConfig, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Domain(#[from] fdx_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// What a subcommand produced: the CSV text, a short human summary and
/// whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub csv: String,
    pub summary: String,
    pub ok: bool,
}

pub fn build_profile(cfg: &RunConfig, c: f64) -> fdx_core::Result<RadialProfile> {
    let p = &cfg.profile;
    let dim = cfg.params.dim();
    let prof = match p.name {
        ProfileName::Zero => RadialProfile::zero(dim)?,
        ProfileName::Constant => RadialProfile::constant(dim, c)?,
        ProfileName::Power => RadialProfile::power_law(dim, c, p.a.unwrap_or(cfg.params.scaling_exponent()))?,
        ProfileName::Critical => critical_profile(&cfg.params, c)?,
        ProfileName::Barenblatt => RadialProfile::barenblatt(dim, cfg.params.m(), p.cb, p.t0)?,
    };
    match p.cutoff {
        Some(r) => prof.with_cutoff(r),
        None => Ok(prof),
    }
}

pub fn solver_config(cfg: &RunConfig) -> fdx_core::Result<SolverConfig> {
    let s = &cfg.solver;
    let cells = ((s.radius / s.dr).round() as usize).max(1);
    let grid = Grid::new(cfg.params.dim(), cells, s.dr)?;
    let mut sc = SolverConfig::new(cfg.params, grid).with_regularization(s.regularization);
    if let Some(f) = s.u_floor {
        sc.u_floor = f;
    }
    if let Some(c) = s.cap {
        sc.cap = c;
    }
    sc.dt_safety = s.dt_safety;
    sc.source_safety = s.source_safety;
    sc.u_blowup = s.u_blowup;
    sc.t_end = s.t_end;
    sc.source_on = s.source;
    sc.max_steps = s.max_steps;
    sc.boundary = match s.boundary {
        BoundaryName::ZeroFlux => Boundary::ZeroFlux,
        BoundaryName::FixedFloor => Boundary::FixedFloor,
        BoundaryName::Barenblatt => {
            let (dim, m, cb, t0) = (cfg.params.dim(), cfg.params.m(), cfg.profile.cb, cfg.profile.t0);
            Boundary::dirichlet(move |t, r| barenblatt_value(dim, m, cb, t0 + t, r))
        }
    };
    sc.output = match s.output {
        OutputName::EveryStep => OutputSchedule::EveryStep,
        OutputName::Linear => OutputSchedule::Linear { interval: s.interval },
        OutputName::Geometric => OutputSchedule::Geometric { t_first: s.t_first, ratio: s.ratio },
    };
    sc.validate()?;
    Ok(sc)
}

fn probes(cfg: &RunConfig) -> Probes {
    let p = Probes::masses(&cfg.solver.probe_radii);
    match cfg.solver.energy {
        Some((beta, sigma)) => p.with_energy(beta, sigma),
        None => p,
    }
}

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions {
        r_min: cfg.norm.r_min,
        per_decade: cfg.norm.per_decade,
        extra_centers: cfg.norm.centers.clone(),
        infinite_cap: cfg.norm.infinite_cap,
        tol: cfg.norm.tol,
        exec: Exec::default(),
    }
}

fn status_line(ok: bool) -> &'static str {
    if ok {
        "# status: Completed\n"
    } else {
        "# status: Failed\n"
    }
}

fn exponents(cfg: &RunConfig) -> Artifact {
    let p = &cfg.params;
    let e = p.exponents();
    let rows: [(&str, f64); 9] = [
        ("N", p.dim() as f64),
        ("m", p.m()),
        ("p", p.p()),
        ("theta", e.theta),
        ("theta_prime", e.theta_prime),
        ("kappa", e.kappa),
        ("p_m", e.p_m),
        ("scaling_exponent", p.scaling_exponent()),
        ("morrey_index", p.morrey_index()),
    ];
    let mut csv = csv_line(["quantity", "value"]);
    let mut summary = String::new();
    for (k, v) in rows {
        csv.push_str(&csv_line([k.to_string(), fmt_float(v)]));
        let _ = writeln!(summary, "{k} = {v}");
    }
    csv.push_str(&csv_line(["regime".to_string(), p.regime().to_string()]));
    let _ = writeln!(summary, "regime = {}", p.regime());
    csv.push_str(status_line(true));
    Artifact { csv, summary, ok: true }
}

fn norms(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let f = build_profile(cfg, cfg.profile.c)?;
    let n = &cfg.norm;
    let kind = match n.kind {
        NormName::Morrey => NormKind::morrey(n.q, n.alpha)?,
        NormName::Orlicz => NormKind::orlicz_eta_scaled(n.alpha, n.length, n.amplitude)?,
    };
    let spec = NormSpec::new(kind, n.radius)?;
    let opts = scan_options(cfg);
    let scan = opts.grid_for(&f, n.radius)?;
    let res = norm(&f, &spec, &scan)?;
    let mut csv = csv_line(["quantity", "value", "arg_center", "arg_radius"]);
    csv.push_str(&csv_line([
        "norm".to_string(),
        fmt_float(res.value),
        fmt_float(res.arg_center),
        fmt_float(res.arg_radius),
    ]));
    let mut summary = format!("norm = {} at center {} radius {}\n", res.value, res.arg_center, res.arg_radius);
    let mut comments = format!("# scan: {}\n", res.grid_resolution);
    if let Some(c) = &cfg.condition {
        let v = check_condition(&cfg.params, &f, c.t, c.delta, c.exponent, &opts)?;
        csv.push_str(&csv_line([
            "condition".to_string(),
            fmt_float(v.condition_value),
            fmt_float(v.arg_center),
            fmt_float(v.arg_radius),
        ]));
        let _ = writeln!(
            comments,
            "# verdict: regime={} delta={} T={} met={}",
            v.regime,
            fmt_float(v.delta),
            fmt_float(v.t_used),
            v.met
        );
        let _ = writeln!(summary, "{} condition = {} (delta {}): met = {}", v.regime, v.condition_value, v.delta, v.met);
    }
    csv.push_str(&comments);
    csv.push_str(status_line(true));
    Ok(Artifact { csv, summary, ok: true })
}

fn simulate_cmd(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let f = build_profile(cfg, cfg.profile.c)?;
    let sc = solver_config(cfg)?;
    let trace = simulate(&f, &sc, &probes(cfg))?;
    let summary = format!(
        "{} after {} steps, {} samples, final sup {}\n",
        trace.status,
        trace.steps,
        trace.len(),
        trace.sup_norm.last().copied().unwrap_or(f64::NAN)
    );
    Ok(Artifact { csv: trace.to_csv(), summary, ok: true })
}

fn threshold(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let sc = solver_config(cfg)?;
    let family = |c: f64| build_profile(cfg, c);
    let opts = SweepOptions {
        bisect_steps: cfg.threshold.bisect_steps,
        rule: cfg.threshold.rule,
        scan_batch: cfg.threshold.scan_batch,
        max_scans: cfg.threshold.max_scans,
        exec: Exec::default(),
    };
    let r = threshold_sweep(&family, &sc, &opts)?;
    let ok = r.consistent();
    let summary = format!(
        "bracket [{}, {}] after {} runs, horizon {}, labels consistent: {ok}\n",
        r.c_low,
        r.c_high,
        r.history.len(),
        r.horizon
    );
    Ok(Artifact { csv: r.manifest_csv(), summary, ok })
}

fn decay(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let f = build_profile(cfg, cfg.profile.c)?;
    let sc = solver_config(cfg)?;
    let trace = simulate(&f, &sc, &Probes::default())?.shifted(cfg.decay.time_shift);
    let fit = decay_fit(&trace, &cfg.params, cfg.decay.window)?;
    let mut csv = csv_line([
        "slope",
        "intercept",
        "weighted_sup",
        "log_corrected_sup",
        "samples",
        "window_start",
        "window_end",
    ]);
    csv.push_str(&csv_line([
        fmt_float(fit.slope),
        fmt_float(fit.intercept),
        fmt_float(fit.weighted_sup),
        fmt_float(fit.log_corrected_sup.unwrap_or(f64::NAN)),
        fit.samples.to_string(),
        fmt_float(cfg.decay.window.0),
        fmt_float(cfg.decay.window.1),
    ]));
    let _ = writeln!(csv, "# run: {}", trace.status);
    csv.push_str(status_line(true));
    let summary = format!(
        "slope {} over [{}, {}] ({} samples), sup t^(1/(p-1)) |u| = {}\n",
        fit.slope, cfg.decay.window.0, cfg.decay.window.1, fit.samples, fit.weighted_sup
    );
    Ok(Artifact { csv, summary, ok: true })
}

fn trace(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let f = build_profile(cfg, cfg.profile.c)?;
    let mut sc = solver_config(cfg)?;
    sc.t_end = cfg.trace.horizon;
    sc.output = OutputSchedule::Geometric { t_first: cfg.trace.t_first, ratio: cfg.trace.ratio };
    let run = simulate(&f, &sc, &Probes::masses(&cfg.trace.radii))?;
    let est = estimate_trace(&run, Exec::default())?;
    let fit = match cfg.params.regime() {
        Regime::Subcritical => None,
        _ => fit_trace_bounds(&est, &cfg.params, cfg.trace.fit_t).ok(),
    };
    let mut csv = est.to_csv(fit.as_ref());
    let _ = writeln!(csv, "# run: {}", run.status);
    let mut summary = format!(
        "{} radii, {} converged\n",
        est.radii.len(),
        est.converged.iter().filter(|c| **c).count()
    );
    if let Some(fit) = &fit {
        let _ = writeln!(csv, "# fit: slope={} expected={}", fmt_float(fit.slope), fmt_float(fit.expected_slope));
        let _ = writeln!(summary, "mass-vs-radius slope {} (expected {})", fit.slope, fit.expected_slope);
    }
    csv.push_str(status_line(true));
    Ok(Artifact { csv, summary, ok: true })
}

fn gronwall_check(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let draws = check_random_draws(cfg.seed, cfg.gronwall.draws, cfg.gronwall.rel_tol, Exec::default())?;
    let mut csv = csv_line(["a1", "a2", "a3", "m", "max_gap", "max_rel_gap", "steps", "pass"]);
    for d in &draws {
        csv.push_str(&csv_line([
            fmt_float(d.coeffs.a1),
            fmt_float(d.coeffs.a2),
            fmt_float(d.coeffs.a3),
            fmt_float(d.coeffs.m),
            fmt_float(d.report.max_gap),
            fmt_float(d.report.max_rel_gap),
            d.report.steps.to_string(),
            (d.pass as u8).to_string(),
        ]));
    }
    let passed = draws.iter().filter(|d| d.pass).count();
    let worst = draws.iter().map(|d| d.report.max_rel_gap).fold(f64::NEG_INFINITY, f64::max);
    let ok = passed == draws.len();
    let _ = writeln!(csv, "# seed: {}", cfg.seed);
    csv.push_str(status_line(ok));
    let summary = format!(
        "{passed}/{} draws within {} of the envelope (largest relative excess {worst:e})\n",
        draws.len(),
        cfg.gronwall.rel_tol
    );
    Ok(Artifact { csv, summary, ok })
}

/// Runs the configured subcommand.
pub fn dispatch(cfg: &RunConfig) -> Result<Artifact, RunError> {
    match cfg.subcommand {
        Subcommand::Exponents => Ok(exponents(cfg)),
        Subcommand::Norms => norms(cfg),
        Subcommand::Simulate => simulate_cmd(cfg),
        Subcommand::Threshold => threshold(cfg),
        Subcommand::Decay => decay(cfg),
        Subcommand::Trace => trace(cfg),
        Subcommand::GronwallCheck => gronwall_check(cfg),
    }
}

/// `--out` naming a `.csv` file is used as is; otherwise it is a directory
/// (default: the working directory) receiving `<subcommand>-<timestamp>.csv`.
pub fn output_path(out: Option<&Path>, sub: Subcommand, timestamp: &str) -> PathBuf {
    match out {
        Some(p) if p.extension().is_some_and(|e| e == "csv") => p.to_path_buf(),
        Some(dir) => dir.join(format!("{sub}-{timestamp}.csv")),
        None => PathBuf::from(format!("{sub}-{timestamp}.csv")),
    }
}

pub fn write_artifact(path: &Path, art: &Artifact) -> Result<(), RunError> {
    let io = |source| RunError::Io { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, &art.csv).map_err(io)
}
