//! Scenario drivers: blow-up threshold bisection over a data family,
//! decay-rate fits and nonexistence probes.

use crate::error::{Error, Result};
use crate::exponents::{ProblemParams, Regime};
use crate::io::{csv_line, fmt_float};
use crate::par::Exec;
use crate::profiles::RadialProfile;
use crate::solver::{simulate, Probes, SolverConfig, SolverTrace, Status};

pub const MAX_SCANS: usize = 40;
pub const DEFAULT_SCAN_BATCH: usize = 4;
pub const DEFAULT_GROWTH_FACTOR: f64 = 10.0;

/// How a finished run is labelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurvivalRule {
    /// Survival means `Completed` status.
    Status,
    /// `Completed` and, over the last decade of times, the maximum of
    /// `t^{1/(p-1)} sup u` stays below `factor` times its median.
    Bounded { factor: f64 },
}

impl Default for SurvivalRule {
    fn default() -> Self {
        SurvivalRule::Bounded { factor: DEFAULT_GROWTH_FACTOR }
    }
}

/// `max` and `median` of `t^{1/(p-1)} sup u(t)` over `[t_last / 10, t_last]`.
pub fn weighted_sup_stats(trace: &SolverTrace, p: f64) -> Option<(f64, f64)> {
    let t_last = *trace.times.last()?;
    let mut w: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.sup_norm)
        .filter(|(t, _)| **t > 0.0 && **t >= 0.1 * t_last)
        .map(|(t, s)| t.powf(1.0 / (p - 1.0)) * s)
        .collect();
    if w.is_empty() {
        return None;
    }
    w.sort_by(f64::total_cmp);
    let n = w.len();
    let median = if n % 2 == 1 { w[n / 2] } else { 0.5 * (w[n / 2 - 1] + w[n / 2]) };
    Some((w[n - 1], median))
}

impl SurvivalRule {
    pub fn survives(&self, trace: &SolverTrace, p: f64) -> bool {
        if !trace.completed() {
            return false;
        }
        match *self {
            SurvivalRule::Status => true,
            SurvivalRule::Bounded { factor } => match weighted_sup_stats(trace, p) {
                Some((max, median)) => max < factor * median,
                None => false,
            },
        }
    }
}

/// One simulation of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub c: f64,
    pub status: Status,
    pub survived: bool,
    pub final_sup: f64,
    /// Largest `t^{1/(p-1)} sup u` over the last decade (NaN if unavailable).
    pub weighted_sup_max: f64,
    pub weighted_sup_median: f64,
    pub steps: u64,
    /// Index of the scan batch or bisection step that produced this run.
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub c_low: f64,
    pub c_high: f64,
    /// The bracket found by the geometric scan, before bisection.
    pub initial_bracket: (f64, f64),
    pub history: Vec<RunRecord>,
    pub horizon: f64,
    pub config_hash: u64,
    pub rule: SurvivalRule,
}

impl ThresholdResult {
    /// True when every tested `c <= c_low` survived and every `c >= c_high` did not.
    pub fn consistent(&self) -> bool {
        self.c_low < self.c_high
            && self.history.iter().all(|r| {
                (r.c <= self.c_low && r.survived) || (r.c >= self.c_high && !r.survived)
            })
    }

    pub fn manifest_csv(&self) -> String {
        let mut out = csv_line([
            "c",
            "status",
            "t_b",
            "survived",
            "final_sup",
            "weighted_sup_max",
            "weighted_sup_median",
            "steps",
            "stage",
        ]);
        for r in &self.history {
            let (name, tb) = match r.status {
                Status::Completed => ("Completed", f64::NAN),
                Status::BlewUp(t) => ("BlewUp", t),
                Status::DtUnderflow(t) => ("DtUnderflow", t),
            };
            out.push_str(&csv_line([
                fmt_float(r.c),
                name.to_string(),
                fmt_float(tb),
                (r.survived as u8).to_string(),
                fmt_float(r.final_sup),
                fmt_float(r.weighted_sup_max),
                fmt_float(r.weighted_sup_median),
                r.steps.to_string(),
                r.stage.to_string(),
            ]));
        }
        out.push_str(&format!("# bracket: c_low={} c_high={}\n", fmt_float(self.c_low), fmt_float(self.c_high)));
        out.push_str(&format!("# horizon: {}\n# config_hash: {:016x}\n", fmt_float(self.horizon), self.config_hash));
        let status = if self.consistent() { "Completed" } else { "Inconsistent" };
        out.push_str(&format!("# status: {status}\n"));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub bisect_steps: usize,
    pub rule: SurvivalRule,
    /// Number of `2^k` values simulated concurrently while scanning.
    pub scan_batch: usize,
    pub max_scans: usize,
    pub exec: Exec,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            bisect_steps: 8,
            rule: SurvivalRule::default(),
            scan_batch: DEFAULT_SCAN_BATCH,
            max_scans: MAX_SCANS,
            exec: Exec::default(),
        }
    }
}

fn run_one<F>(family: &F, c: f64, cfg: &SolverConfig, rule: SurvivalRule, stage: usize) -> Result<RunRecord>
where
    F: Fn(f64) -> Result<RadialProfile> + Sync,
{
    let profile = family(c)?;
    let trace = simulate(&profile, cfg, &Probes::default())?;
    let p = cfg.params.p();
    let (wmax, wmed) = weighted_sup_stats(&trace, p).unwrap_or((f64::NAN, f64::NAN));
    Ok(RunRecord {
        c,
        status: trace.status,
        survived: rule.survives(&trace, p),
        final_sup: trace.sup_norm.last().copied().unwrap_or(f64::NAN),
        weighted_sup_max: wmax,
        weighted_sup_median: wmed,
        steps: trace.steps,
        stage,
    })
}

/// Locates the survival/blow-up transition of `c -> family(c)` up to
/// `cfg.t_end`: a geometric scan over `c = 2^k` (starting at `k = 0`,
/// moving up while runs survive and down while they blow up) followed by
/// `bisect_steps` arithmetic bisections.
pub fn threshold_sweep<F>(family: &F, cfg: &SolverConfig, opts: &SweepOptions) -> Result<ThresholdResult>
where
    F: Fn(f64) -> Result<RadialProfile> + Sync,
{
    if opts.bisect_steps < 4 {
        return Err(Error::InvalidParams(format!("bisect_steps = {} must be >= 4", opts.bisect_steps)));
    }
    if opts.scan_batch == 0 || opts.max_scans == 0 {
        return Err(Error::InvalidParams("scan_batch and max_scans must be >= 1".into()));
    }
    cfg.validate()?;
    let mut history = Vec::new();
    let first = run_one(family, 1.0, cfg, opts.rule, 0)?;
    let upward = first.survived;
    history.push(first);
    let mut scanned = 1;
    let mut k = 0i32;
    let mut stage = 0;
    let mut bracket = None;
    while bracket.is_none() && scanned < opts.max_scans {
        stage += 1;
        let n = opts.scan_batch.min(opts.max_scans - scanned);
        let exps: Vec<i32> = (1..=n as i32).map(|j| if upward { k + j } else { k - j }).collect();
        let runs = opts
            .exec
            .map(&exps, |&e| run_one(family, 2f64.powi(e), cfg, opts.rule, stage))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        scanned += n;
        for (e, r) in exps.iter().zip(&runs) {
            if bracket.is_none() && r.survived != upward {
                bracket = Some(if upward { (*e - 1, *e) } else { (*e, *e + 1) });
            }
        }
        k = *exps.last().unwrap_or(&k);
        history.extend(runs);
    }
    let (k_lo, k_hi) = bracket.ok_or_else(|| {
        Error::NoBracket(format!(
            "{scanned} scans of c = 2^k all {}",
            if upward { "survived" } else { "blew up" }
        ))
    })?;
    let (mut lo, mut hi) = (2f64.powi(k_lo), 2f64.powi(k_hi));
    let initial_bracket = (lo, hi);
    for s in 0..opts.bisect_steps {
        let mid = 0.5 * (lo + hi);
        let r = run_one(family, mid, cfg, opts.rule, stage + 1 + s)?;
        if r.survived {
            lo = mid;
        } else {
            hi = mid;
        }
        history.push(r);
    }
    Ok(ThresholdResult {
        c_low: lo,
        c_high: hi,
        initial_bracket,
        history,
        horizon: cfg.t_end,
        config_hash: cfg.fingerprint(),
        rule: opts.rule,
    })
}

/// One row of a threshold sensitivity table.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub cap: f64,
    pub dr: f64,
    pub c_low: f64,
    pub c_high: f64,
}

/// Repeats [`threshold_sweep`] for each configuration (typically varying the
/// regularization level and the mesh) and tabulates the brackets.
pub fn threshold_sensitivity<F>(family: &F, configs: &[SolverConfig], opts: &SweepOptions) -> Result<Vec<SensitivityRow>>
where
    F: Fn(f64) -> Result<RadialProfile> + Sync,
{
    configs
        .iter()
        .map(|cfg| {
            let r = threshold_sweep(family, cfg, opts)?;
            Ok(SensitivityRow { cap: cfg.cap, dr: cfg.grid.dr(), c_low: r.c_low, c_high: r.c_high })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope of `ln sup u` against `ln t`.
    pub slope: f64,
    pub intercept: f64,
    /// Largest `t^{1/(p-1)} sup u` in the window.
    pub weighted_sup: f64,
    /// Critical regime: largest `t^{1/(p-1)} [log(e + T/t)]^{1/(p-1)} sup u`
    /// with `T` the window end.
    pub log_corrected_sup: Option<f64>,
    pub samples: usize,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn window_samples(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 >= 10.0 * t0 * (1.0 - 1e-12)) {
        return Err(Error::EmptyWindow(format!("window [{t0}, {t1}] must have t0 > 0 and span a decade")));
    }
    let (first, last) = match (times.iter().copied().find(|t| *t > 0.0), times.last()) {
        (Some(a), Some(&b)) => (a, b),
        _ => return Err(Error::EmptyWindow("trace has no positive times".into())),
    };
    let eps = 1e-12 * t1;
    if t0 < first - eps || t1 > last + eps {
        return Err(Error::EmptyWindow(format!("window [{t0}, {t1}] outside recorded times [{first}, {last}]")));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= t0 - eps && **t <= t1 + eps && **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::EmptyWindow(format!("only {} samples in [{t0}, {t1}]", pts.len())));
    }
    Ok(pts)
}

/// Power-law fit of the sup norm over `window = (t0, t1)`, `t1 >= 10 t0`.
pub fn decay_fit(trace: &SolverTrace, params: &ProblemParams, window: (f64, f64)) -> Result<DecayFit> {
    let pts = window_samples(&trace.times, &trace.sup_norm, window)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = least_squares(&x, &y);
    let e = 1.0 / (params.p() - 1.0);
    let weighted_sup = pts.iter().fold(0.0f64, |a, (t, s)| a.max(t.powf(e) * s));
    let log_corrected_sup = (params.regime() == Regime::Critical).then(|| {
        let big_t = window.1;
        pts.iter().fold(0.0f64, |a, (t, s)| {
            a.max(t.powf(e) * (std::f64::consts::E + big_t / t).ln().powf(e) * s)
        })
    });
    Ok(DecayFit { slope, intercept, weighted_sup, log_corrected_sup, samples: pts.len() })
}

/// Slope of `ln sup u` against `ln (t_b - t)` for a run that blew up at
/// `t_b`, over `t_b - t` in `window`.
pub fn blowup_rate_fit(trace: &SolverTrace, window: (f64, f64)) -> Result<f64> {
    let tb = trace
        .blowup_time()
        .ok_or_else(|| Error::Regime(format!("run did not blow up (status {})", trace.status)))?;
    let mut pairs: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.sup_norm)
        .filter(|(t, _)| **t < tb)
        .map(|(t, s)| (tb - t, *s))
        .collect();
    pairs.reverse();
    let (s, v): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let pts = window_samples(&s, &v, window)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&x, &y).0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonexistenceReport {
    pub regime: Regime,
    /// False in the supercritical regime, where global solutions may exist.
    pub applicable: bool,
    pub status: Status,
    /// `(horizon, blew up before it)` for each horizon of the ladder.
    pub labels: Vec<(f64, bool)>,
    pub first_blowup_horizon: Option<f64>,
    /// False when a run reached the largest horizon with a sup norm that was
    /// not rising over its last decade.
    pub expectation_met: bool,
    pub notes: Vec<String>,
}

/// Runs `data` once to the largest horizon of `ladder` and labels each
/// horizon by whether blow-up occurred before it.
pub fn global_nonexistence_probe(
    data: &RadialProfile,
    cfg: &SolverConfig,
    ladder: &[f64],
) -> Result<NonexistenceReport> {
    let mut horizons: Vec<f64> = ladder.to_vec();
    horizons.sort_by(f64::total_cmp);
    let Some(&largest) = horizons.last() else {
        return Err(Error::InvalidParams("empty horizon ladder".into()));
    };
    if !(horizons[0] > 0.0 && largest.is_finite()) {
        return Err(Error::InvalidParams("horizons must be finite and > 0".into()));
    }
    let regime = cfg.params.regime();
    let applicable = regime != Regime::Supercritical;
    let run_cfg = SolverConfig { t_end: largest, boundary: cfg.boundary.clone(), ..cfg.clone() };
    let trace = simulate(data, &run_cfg, &Probes::default())?;
    let tb = trace.blowup_time();
    let labels: Vec<(f64, bool)> = horizons.iter().map(|&h| (h, tb.is_some_and(|t| t <= h))).collect();
    let first_blowup_horizon = labels.iter().find(|l| l.1).map(|l| l.0);
    let mut notes = Vec::new();
    let mut expectation_met = true;
    if !applicable {
        notes.push("not applicable regime: p > p_m admits global solutions for small data".into());
    } else if tb.is_none() {
        let rising = match decay_fit(&trace, &cfg.params, (0.1 * largest, largest)) {
            Ok(fit) => fit.slope > 0.0,
            Err(_) => false,
        };
        if !rising {
            expectation_met = false;
            notes.push(format!(
                "reached t = {largest} with status {} and a sup norm that is not rising",
                trace.status
            ));
        } else {
            notes.push(format!("no blow-up up to t = {largest}; sup norm still rising"));
        }
    }
    Ok(NonexistenceReport {
        regime,
        applicable,
        status: trace.status,
        labels,
        first_blowup_horizon,
        expectation_met,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::solver::{Boundary, OutputSchedule};

    fn reaction_cfg(p: f64, horizon: f64) -> SolverConfig {
        let params = ProblemParams::new(1, 0.5, p).unwrap();
        let mut cfg = SolverConfig::new(params, Grid::new(1, 8, 0.5).unwrap()).with_regularization(f64::INFINITY);
        cfg.boundary = Boundary::ZeroFlux;
        cfg.t_end = horizon;
        cfg.output = OutputSchedule::Linear { interval: horizon / 100.0 };
        cfg
    }

    fn synthetic(times: &[f64], sup: impl Fn(f64) -> f64, status: Status) -> SolverTrace {
        let mut csv = String::from("t,sup_norm\n");
        for &t in times {
            csv.push_str(&format!("{},{}\n", fmt_float(t), fmt_float(sup(t))));
        }
        csv.push_str(&format!("# probes:\n# status: {status}\n"));
        SolverTrace::from_csv(&csv).unwrap()
    }

    #[test]
    fn decay_fit_recovers_exact_powers() {
        let p = ProblemParams::new(1, 0.5, 3.0).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| 1e-2 * 10f64.powf(k as f64 / 20.0)).collect();
        for s in [0.5, 2.0 / 3.0, 1.3] {
            let tr = synthetic(&times, |t| 3.0 * t.powf(-s), Status::Completed);
            let fit = decay_fit(&tr, &p, (0.01, 1.0)).unwrap();
            assert!((fit.slope + s).abs() < 1e-6, "{s}: {}", fit.slope);
            assert!(fit.log_corrected_sup.is_none());
        }
        let tr = synthetic(&times, |t| t.powf(-0.5), Status::Completed);
        let fit = decay_fit(&tr, &p, (0.1, 1.0)).unwrap();
        assert!((fit.weighted_sup - 1.0).abs() < 1e-12);
        assert!(decay_fit(&tr, &p, (0.2, 1.0)).is_err());
        assert!(decay_fit(&tr, &p, (0.1, 10.0)).is_err());
        let critical = ProblemParams::new(1, 0.5, 2.5).unwrap();
        assert!(decay_fit(&tr, &critical, (0.1, 1.0)).unwrap().log_corrected_sup.is_some());
    }

    #[test]
    fn survival_rule_flags_late_growth() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
        let calm = synthetic(&times, |t| 1.0 / (1.0 + t), Status::Completed);
        let steep = synthetic(&times, |t| 1.0 / (1.0001 - t), Status::Completed);
        let rule = SurvivalRule::default();
        assert!(rule.survives(&calm, 2.0));
        assert!(!rule.survives(&steep, 2.0));
        assert!(SurvivalRule::Status.survives(&steep, 2.0));
        let blown = synthetic(&times, |t| 1.0 + t, Status::BlewUp(1.0));
        assert!(!SurvivalRule::Status.survives(&blown, 2.0));
    }

    #[test]
    fn reaction_blowup_rate() {
        let mut cfg = reaction_cfg(3.0, 4.0);
        cfg.output = OutputSchedule::EveryStep;
        let tr = simulate(&RadialProfile::constant(1, 0.5).unwrap(), &cfg, &Probes::default()).unwrap();
        let slope = blowup_rate_fit(&tr, (1e-4, 1e-2)).unwrap();
        assert!((slope + 0.5).abs() < 0.02, "{slope}");
    }

    #[test]
    fn constant_data_threshold() {
        let cfg = reaction_cfg(2.0, 1.0);
        let family = |c: f64| RadialProfile::constant(1, c);
        let opts = SweepOptions { bisect_steps: 4, rule: SurvivalRule::Status, exec: Exec::Sequential, ..Default::default() };
        let r = threshold_sweep(&family, &cfg, &opts).unwrap();
        assert!(r.c_low <= 1.0 && 1.0 <= r.c_high, "{r:?}");
        assert!(r.c_high - r.c_low <= (r.initial_bracket.1 - r.initial_bracket.0) / 16.0 * (1.0 + 1e-12));
        assert!(r.consistent());
        let again = threshold_sweep(&family, &cfg, &SweepOptions { exec: Exec::Parallel, ..opts }).unwrap();
        assert_eq!(r.manifest_csv(), again.manifest_csv());
        assert!(r.manifest_csv().ends_with("# status: Completed\n"));
    }

    #[test]
    fn sweep_errors() {
        let cfg = reaction_cfg(2.0, 1.0);
        let zero = |_c: f64| RadialProfile::constant(1, 0.0);
        let opts = SweepOptions { max_scans: 6, exec: Exec::Sequential, ..Default::default() };
        assert!(matches!(threshold_sweep(&zero, &cfg, &opts), Err(Error::NoBracket(_))));
        let few = SweepOptions { bisect_steps: 3, ..opts };
        assert!(threshold_sweep(&zero, &cfg, &few).is_err());
    }

    #[test]
    fn nonexistence_probe_on_constant_data() {
        let mut cfg = reaction_cfg(1.5, 1.0);
        cfg.output = OutputSchedule::Geometric { t_first: 1.0, ratio: 1.25 };
        let data = RadialProfile::constant(1, 0.01).unwrap();
        let rep = global_nonexistence_probe(&data, &cfg, &[100.0, 1e3, 1e4, 1e5]).unwrap();
        // u = (0.01^{-1/2} - t/2)^{-2} blows up at t = 20
        assert!(rep.applicable);
        assert_eq!(rep.first_blowup_horizon, Some(100.0));
        let tb = rep.status;
        assert!(matches!(tb, Status::BlewUp(t) if (t - 20.0).abs() < 1.0), "{tb}");
        let sup = SolverConfig { params: ProblemParams::new(1, 0.5, 3.0).unwrap(), ..cfg };
        let rep = global_nonexistence_probe(&RadialProfile::constant(1, 0.0).unwrap(), &sup, &[1.0, 10.0]).unwrap();
        assert!(!rep.applicable && rep.notes[0].starts_with("not applicable"));
    }
}
