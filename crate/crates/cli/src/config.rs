//! Flat `key = value` run configuration with dotted section keys.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use fdx_core::exponents::admissible_beta_range;
use fdx_core::experiments::{SurvivalRule, DEFAULT_GROWTH_FACTOR, DEFAULT_SCAN_BATCH, MAX_SCANS};
use fdx_core::solver::{
    DEFAULT_DT_SAFETY, DEFAULT_MAX_STEPS, DEFAULT_SOURCE_SAFETY, DEFAULT_U_BLOWUP,
};
use fdx_core::ulmorrey::{DEFAULT_INFINITE_CAP, DEFAULT_PER_DECADE, DEFAULT_QUAD_TOL};
use fdx_core::{ProblemParams, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Exponents,
    Norms,
    Simulate,
    Threshold,
    Decay,
    Trace,
    GronwallCheck,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Exponents,
        Subcommand::Norms,
        Subcommand::Simulate,
        Subcommand::Threshold,
        Subcommand::Decay,
        Subcommand::Trace,
        Subcommand::GronwallCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Exponents => "exponents",
            Subcommand::Norms => "norms",
            Subcommand::Simulate => "simulate",
            Subcommand::Threshold => "threshold",
            Subcommand::Decay => "decay",
            Subcommand::Trace => "trace",
            Subcommand::GronwallCheck => "gronwall-check",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

/// Every problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Raw key/value pairs with the line each came from (0 for command-line overrides).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut bad = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            match body.split_once('=') {
                Some((key, value)) if !key.trim().is_empty() => {
                    let key = key.trim().to_string();
                    if let Some((_, first)) = raw.entries.get(&key) {
                        bad.push(format!("line {line_no}: key `{key}` already set on line {first}"));
                    } else {
                        raw.entries.insert(key, (value.trim().to_string(), line_no));
                    }
                }
                _ => bad.push(format!("line {line_no}: expected `key = value`, found {body:?}")),
            }
        }
        if bad.is_empty() {
            Ok(raw)
        } else {
            Err(ConfigError { violations: bad })
        }
    }

    /// Applies `key=value` overrides on top of the file contents.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self, ConfigError> {
        let mut bad = Vec::new();
        for o in overrides {
            match o.as_ref().split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    self.entries.insert(k.trim().to_string(), (v.trim().to_string(), 0));
                }
                _ => bad.push(format!("--set {:?}: expected key=value", o.as_ref())),
            }
        }
        if bad.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError { violations: bad })
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }
}

/// Typed access that records every key it reads and every problem it sees.
struct Reader<'a> {
    raw: &'a RawConfig,
    used: BTreeSet<String>,
    bad: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(raw: &'a RawConfig) -> Self {
        Self { raw, used: BTreeSet::new(), bad: Vec::new() }
    }

    fn where_(&self, key: &str) -> String {
        match self.raw.entries.get(key) {
            Some((_, 0)) | None => format!("`{key}`"),
            Some((_, line)) => format!("`{key}` (line {line})"),
        }
    }

    fn fail(&mut self, key: &str, msg: impl fmt::Display) {
        let w = self.where_(key);
        self.bad.push(format!("{w}: {msg}"));
    }

    fn text(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.raw.get(key).map(str::to_string)
    }

    fn parsed<T: FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let s = self.text(key)?;
        match s.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.fail(key, format!("cannot parse {s:?} as {what}"));
                None
            }
        }
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        let v = self.parsed::<f64>(key, "a number")?;
        if v.is_nan() {
            self.fail(key, "NaN is not allowed");
            return None;
        }
        Some(v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.opt_f64(key).unwrap_or(default)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        self.parsed::<usize>(key, "a non-negative integer").unwrap_or(default)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> bool {
        self.parsed::<bool>(key, "true or false").unwrap_or(default)
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let s = self.text(key)?;
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.fail(key, format!("cannot parse {part:?} as a finite number"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> T {
        let Some(s) = self.text(key) else { return default };
        match options.iter().find(|(name, _)| *name == s) {
            Some((_, v)) => *v,
            None => {
                let names: Vec<&str> = options.iter().map(|o| o.0).collect();
                self.fail(key, format!("expected one of {}, found {s:?}", names.join(", ")));
                default
            }
        }
    }

    fn require(&mut self, key: &str, ok: bool, msg: impl fmt::Display) {
        if !ok {
            self.fail(key, msg);
        }
    }

    fn unknown_keys(&mut self) {
        let unknown: Vec<String> = self
            .raw
            .entries
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect();
        for k in unknown {
            self.fail(&k, "unknown key");
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileName {
    Zero,
    Constant,
    Power,
    Critical,
    Barenblatt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub name: ProfileName,
    pub c: f64,
    /// Power-law exponent; `None` means the sharp value `2/(p-m)`.
    pub a: Option<f64>,
    pub cutoff: Option<f64>,
    pub cb: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryName {
    ZeroFlux,
    FixedFloor,
    Barenblatt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputName {
    EveryStep,
    Linear,
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub radius: f64,
    pub dr: f64,
    pub dt_safety: f64,
    pub source_safety: f64,
    pub u_blowup: f64,
    pub regularization: f64,
    pub u_floor: Option<f64>,
    pub cap: Option<f64>,
    pub t_end: f64,
    pub boundary: BoundaryName,
    pub source: bool,
    pub output: OutputName,
    pub interval: f64,
    pub t_first: f64,
    pub ratio: f64,
    pub max_steps: u64,
    pub probe_radii: Vec<f64>,
    pub energy: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormName {
    Morrey,
    Orlicz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormOptions {
    pub kind: NormName,
    pub q: f64,
    pub alpha: f64,
    pub radius: f64,
    pub length: f64,
    pub amplitude: f64,
    pub per_decade: usize,
    pub r_min: Option<f64>,
    pub centers: Vec<f64>,
    pub infinite_cap: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOptions {
    pub t: f64,
    pub delta: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdOptions {
    pub bisect_steps: usize,
    pub rule: SurvivalRule,
    pub scan_batch: usize,
    pub max_scans: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    pub window: (f64, f64),
    pub time_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub radii: Vec<f64>,
    pub horizon: f64,
    pub t_first: f64,
    pub ratio: f64,
    pub fit_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallOptions {
    pub draws: usize,
    pub rel_tol: f64,
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: ProblemParams,
    pub profile: ProfileSpec,
    pub solver: SolverOptions,
    pub norm: NormOptions,
    pub condition: Option<ConditionOptions>,
    pub threshold: ThresholdOptions,
    pub decay: DecayOptions,
    pub trace: TraceOptions,
    pub gronwall: GronwallOptions,
    pub seed: u64,
}

pub const DEFAULT_DR: f64 = 0.02;
pub const DEFAULT_REGULARIZATION: f64 = 1e4;

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

/// Reads and validates every section; the error lists all problems at once.
/// `seed` from the command line takes precedence over a `seed` key.
pub fn parse_config(subcommand: Subcommand, raw: &RawConfig, seed: Option<u64>) -> Result<RunConfig, ConfigError> {
    let mut r = Reader::new(raw);

    let dim = r.usize_or("N", 1);
    let m = r.f64_or("m", 0.5);
    let p = r.f64_or("p", 3.0);
    r.require("N", (1..=3).contains(&dim), format!("must be 1, 2 or 3, got {dim}"));
    r.require("m", m > 0.0 && m < 1.0, format!("must lie in (0, 1), got {m}"));
    r.require("p", p > 1.0 && p.is_finite(), format!("must be finite and > 1, got {p}"));
    let params = ProblemParams::new(dim.clamp(1, 3), m.clamp(0.01, 0.99), if p > 1.0 && p.is_finite() { p } else { 3.0 })
        .expect("clamped parameters are valid");
    let theta = params.exponents().theta;

    let file_seed = r.parsed::<u64>("seed", "a non-negative integer");
    let seed = seed.or(file_seed).unwrap_or(0);

    let name = r.choice(
        "profile",
        ProfileName::Power,
        &[
            ("zero", ProfileName::Zero),
            ("constant", ProfileName::Constant),
            ("power", ProfileName::Power),
            ("critical", ProfileName::Critical),
            ("barenblatt", ProfileName::Barenblatt),
        ],
    );
    let profile = ProfileSpec {
        name,
        c: r.f64_or("c", 0.1),
        a: r.opt_f64("a"),
        cutoff: r.opt_f64("cutoff"),
        cb: r.f64_or("cb", 1.0),
        t0: r.f64_or("t0", 1.0),
    };
    r.require("c", profile.c >= 0.0 && profile.c.is_finite(), format!("must be finite and >= 0, got {}", profile.c));
    if let Some(a) = profile.a {
        r.require("a", a >= 0.0 && a < dim as f64, format!("must lie in [0, N) for local integrability, got {a}"));
    }
    if let Some(cut) = profile.cutoff {
        r.require("cutoff", positive(cut), format!("must be finite and > 0, got {cut}"));
    }
    if name == ProfileName::Barenblatt {
        r.require("cb", positive(profile.cb), format!("must be finite and > 0, got {}", profile.cb));
        r.require("t0", positive(profile.t0), format!("must be finite and > 0, got {}", profile.t0));
        r.require("profile", params.exponents().kappa > 0.0, "barenblatt needs N(m-1)+2 > 0");
    }
    if name == ProfileName::Critical && params.regime() == Regime::Subcritical {
        r.require("profile", false, "critical profile needs p >= m + 2/N");
    }

    let t_end = r.f64_or("solver.t_end", 1.0);
    r.require("solver.t_end", positive(t_end), format!("must be finite and > 0, got {t_end}"));
    let radius = r.f64_or("solver.radius", 8.0 * t_end.max(1e-300).powf(theta));
    let dr = r.f64_or("solver.dr", DEFAULT_DR);
    r.require("solver.radius", positive(radius), format!("must be finite and > 0, got {radius}"));
    r.require("solver.dr", positive(dr) && dr <= radius, format!("must lie in (0, solver.radius], got {dr}"));
    let boundary = r.choice(
        "solver.boundary",
        BoundaryName::FixedFloor,
        &[
            ("zero_flux", BoundaryName::ZeroFlux),
            ("fixed_floor", BoundaryName::FixedFloor),
            ("barenblatt", BoundaryName::Barenblatt),
        ],
    );
    let source = r.bool_or("solver.source", true);
    if boundary == BoundaryName::Barenblatt {
        r.require("solver.boundary", name == ProfileName::Barenblatt, "barenblatt boundary needs profile = barenblatt");
    }
    let output = r.choice(
        "solver.output",
        OutputName::Linear,
        &[("every_step", OutputName::EveryStep), ("linear", OutputName::Linear), ("geometric", OutputName::Geometric)],
    );
    let regularization = r.f64_or("solver.regularization", DEFAULT_REGULARIZATION);
    r.require("solver.regularization", regularization > 0.0, format!("must be > 0, got {regularization}"));
    let probe_radii = r.list("probes.radii").unwrap_or_default();
    for s in &probe_radii {
        r.require("probes.radii", positive(*s), format!("radius {s} must be > 0"));
    }
    let energy = match (r.opt_f64("probes.beta"), r.opt_f64("probes.sigma")) {
        (Some(b), Some(s)) => {
            r.require("probes.beta", b > 1.0, format!("must be > 1, got {b}"));
            r.require("probes.sigma", positive(s), format!("must be > 0, got {s}"));
            Some((b, s))
        }
        (None, None) => None,
        (Some(_), None) => {
            r.fail("probes.sigma", "required when probes.beta is set");
            None
        }
        (None, Some(_)) => {
            r.fail("probes.beta", "required when probes.sigma is set");
            None
        }
    };
    let solver = SolverOptions {
        radius,
        dr,
        dt_safety: r.f64_or("solver.dt_safety", DEFAULT_DT_SAFETY),
        source_safety: r.f64_or("solver.source_safety", DEFAULT_SOURCE_SAFETY),
        u_blowup: r.f64_or("solver.u_blowup", DEFAULT_U_BLOWUP),
        regularization,
        u_floor: r.opt_f64("solver.u_floor"),
        cap: r.opt_f64("solver.cap"),
        t_end,
        boundary,
        source,
        output,
        interval: r.f64_or("solver.output.interval", t_end / 100.0),
        t_first: r.f64_or("solver.output.t_first", t_end * 1e-3),
        ratio: r.f64_or("solver.output.ratio", 1.25),
        max_steps: r.parsed::<u64>("solver.max_steps", "a non-negative integer").unwrap_or(DEFAULT_MAX_STEPS),
        probe_radii,
        energy,
    };
    for (key, v) in [("solver.dt_safety", solver.dt_safety), ("solver.source_safety", solver.source_safety)] {
        r.require(key, v > 0.0 && v < 1.0, format!("must lie in (0, 1), got {v}"));
    }
    r.require("solver.u_blowup", solver.u_blowup > 1.0, format!("must be > 1, got {}", solver.u_blowup));
    r.require("solver.max_steps", solver.max_steps > 0, "must be > 0");
    if let Some(f) = solver.u_floor {
        r.require("solver.u_floor", f >= 0.0 && f.is_finite(), format!("must be finite and >= 0, got {f}"));
    }
    if let Some(c) = solver.cap {
        r.require("solver.cap", c > 0.0, format!("must be > 0, got {c}"));
    }
    let floor = solver.u_floor.unwrap_or(if regularization.is_finite() { 1.0 / regularization } else { 0.0 });
    if boundary == BoundaryName::FixedFloor {
        r.require("solver.boundary", floor > 0.0, "fixed_floor needs a positive floor (finite regularization or solver.u_floor)");
    }
    match output {
        OutputName::Linear => r.require("solver.output.interval", positive(solver.interval), "must be > 0"),
        OutputName::Geometric => {
            r.require("solver.output.t_first", positive(solver.t_first), "must be > 0");
            r.require("solver.output.ratio", solver.ratio > 1.0 && solver.ratio.is_finite(), "must be > 1");
        }
        OutputName::EveryStep => {}
    }

    let kind = r.choice("norm.kind", NormName::Morrey, &[("morrey", NormName::Morrey), ("orlicz", NormName::Orlicz)]);
    let norm = NormOptions {
        kind,
        q: r.f64_or("norm.q", params.morrey_index().max(1.0)),
        alpha: r.f64_or("norm.alpha", 1.0),
        radius: r.f64_or("norm.radius", f64::INFINITY),
        length: r.f64_or("norm.length", 1.0),
        amplitude: r.f64_or("norm.amplitude", 1.0),
        per_decade: r.usize_or("norm.per_decade", DEFAULT_PER_DECADE),
        r_min: r.opt_f64("norm.r_min"),
        centers: r.list("norm.centers").unwrap_or_default(),
        infinite_cap: r.f64_or("norm.infinite_cap", DEFAULT_INFINITE_CAP),
        tol: r.f64_or("norm.tol", DEFAULT_QUAD_TOL),
    };
    if kind == NormName::Morrey {
        r.require("norm.q", norm.q >= 1.0, format!("must be >= 1, got {}", norm.q));
        r.require("norm.alpha", norm.alpha >= 1.0, format!("must be >= 1 for the Morrey kind, got {}", norm.alpha));
    } else {
        r.require("norm.alpha", norm.alpha >= 0.0 && norm.alpha.is_finite(), format!("must be >= 0, got {}", norm.alpha));
        r.require("norm.length", positive(norm.length), "must be > 0");
        r.require("norm.amplitude", positive(norm.amplitude), "must be > 0");
    }
    r.require("norm.radius", norm.radius > 0.0, format!("must be > 0, got {}", norm.radius));
    r.require("norm.per_decade", norm.per_decade >= 1, "must be >= 1");
    r.require("norm.infinite_cap", positive(norm.infinite_cap), "must be > 0");
    r.require("norm.tol", positive(norm.tol), "must be > 0");
    if let Some(x) = norm.r_min {
        r.require("norm.r_min", positive(x), "must be > 0");
    }

    let condition = match r.opt_f64("condition.delta") {
        None => {
            for key in ["condition.T", "condition.exponent"] {
                if r.raw.get(key).is_some() {
                    r.used.insert(key.to_string());
                    r.fail(key, "needs condition.delta");
                }
            }
            None
        }
        Some(delta) => {
            r.require("condition.delta", delta > 0.0, format!("must be > 0, got {delta}"));
            let t = r.f64_or("condition.T", 1.0);
            r.require("condition.T", t > 0.0, format!("must be > 0, got {t}"));
            let default_exponent = match params.regime() {
                Regime::Supercritical => admissible_beta_range(&params).map(|i| 0.5 * (i.lo + i.hi)).unwrap_or(1.0),
                _ => 1.0,
            };
            let exponent = r.f64_or("condition.exponent", default_exponent);
            match params.regime() {
                Regime::Supercritical => {
                    if let Ok(range) = admissible_beta_range(&params) {
                        r.require(
                            "condition.exponent",
                            range.contains(exponent),
                            format!("beta = {exponent} outside the admissible range ({}, {})", range.lo, range.hi),
                        );
                    }
                }
                Regime::Critical => {
                    r.require("condition.exponent", exponent > 0.0, format!("alpha must be > 0, got {exponent}"));
                    r.require("condition.T", t.is_finite(), "must be finite in the critical regime");
                }
                Regime::Subcritical => {
                    r.require("condition.T", t.is_finite(), "must be finite in the subcritical regime");
                }
            }
            Some(ConditionOptions { t, delta, exponent })
        }
    };

    let rule = r.choice("threshold.rule", "bounded", &[("bounded", "bounded"), ("status", "status")]);
    let factor = r.f64_or("threshold.factor", DEFAULT_GROWTH_FACTOR);
    r.require("threshold.factor", factor > 1.0, format!("must be > 1, got {factor}"));
    let threshold = ThresholdOptions {
        bisect_steps: r.usize_or("threshold.bisect_steps", 8),
        rule: if rule == "status" { SurvivalRule::Status } else { SurvivalRule::Bounded { factor } },
        scan_batch: r.usize_or("threshold.scan_batch", DEFAULT_SCAN_BATCH),
        max_scans: r.usize_or("threshold.max_scans", MAX_SCANS),
    };
    r.require("threshold.bisect_steps", threshold.bisect_steps >= 4, "must be >= 4");
    r.require("threshold.scan_batch", threshold.scan_batch >= 1, "must be >= 1");
    r.require("threshold.max_scans", (1..=MAX_SCANS).contains(&threshold.max_scans), format!("must lie in [1, {MAX_SCANS}]"));
    if subcommand == Subcommand::Threshold {
        r.require(
            "profile",
            matches!(name, ProfileName::Constant | ProfileName::Power | ProfileName::Critical),
            "threshold needs an amplitude family: constant, power or critical",
        );
    }

    let time_shift = r.f64_or("decay.time_shift", 0.0);
    let decay = DecayOptions {
        window: (
            r.f64_or("decay.window_start", time_shift + 0.1 * t_end),
            r.f64_or("decay.window_end", time_shift + t_end),
        ),
        time_shift,
    };
    r.require("decay.time_shift", decay.time_shift >= 0.0 && decay.time_shift.is_finite(), "must be finite and >= 0");
    r.require(
        "decay.window_start",
        decay.window.0 > 0.0 && decay.window.1 >= 10.0 * decay.window.0 * (1.0 - 1e-12),
        format!("window [{}, {}] must start above 0 and span a decade", decay.window.0, decay.window.1),
    );

    let trace = TraceOptions {
        radii: r.list("trace.radii").unwrap_or_else(|| (0..12).map(|k| 0.04 * 1.5f64.powi(k)).collect()),
        horizon: r.f64_or("trace.horizon", 1e-2),
        t_first: r.f64_or("trace.t_first", 1e-5),
        ratio: r.f64_or("trace.ratio", 2.0),
        fit_t: r.f64_or("trace.T", 1.0),
    };
    r.require("trace.radii", !trace.radii.is_empty() && trace.radii.iter().all(|s| positive(*s)), "needs positive radii");
    r.require("trace.horizon", positive(trace.horizon), "must be > 0");
    r.require("trace.t_first", positive(trace.t_first) && trace.t_first < trace.horizon, "must lie in (0, trace.horizon)");
    r.require("trace.ratio", trace.ratio > 1.0 && trace.ratio.is_finite(), "must be > 1");
    r.require("trace.T", positive(trace.fit_t), "must be > 0");

    let gronwall = GronwallOptions {
        draws: r.usize_or("gronwall.draws", 1000),
        rel_tol: r.f64_or("gronwall.rel_tol", 1e-8),
    };
    r.require("gronwall.draws", gronwall.draws >= 1, "must be >= 1");
    r.require("gronwall.rel_tol", gronwall.rel_tol >= 0.0, "must be >= 0");

    r.unknown_keys();
    if !r.bad.is_empty() {
        return Err(ConfigError { violations: r.bad });
    }
    Ok(RunConfig {
        subcommand,
        params,
        profile,
        solver,
        norm,
        condition,
        threshold,
        decay,
        trace,
        gronwall,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(Subcommand::Simulate, &RawConfig::parse(text)?, None)
    }

    #[test]
    fn minimal_file() {
        let cfg = parse("N = 1\nm = 0.5\np = 3\nprofile = power\nc = 0.1\n").unwrap();
        assert_eq!(cfg.params.dim(), 1);
        assert_eq!(cfg.profile.name, ProfileName::Power);
        assert_eq!(cfg.profile.c, 0.1);
        assert_eq!(cfg.solver.radius, 8.0);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn bad_m_names_the_key() {
        let err = parse("m = 1.2\n").unwrap_err();
        assert_eq!(err.violations.len(), 1);
        assert!(err.violations[0].starts_with("`m` (line 1)"), "{err}");
    }

    #[test]
    fn all_violations_are_listed() {
        let err = parse("m = 1.2\np = 0.5\nsolver.dt_safety = 2\nwhat = 1\nprofile = blob\n").unwrap_err();
        let text = err.to_string();
        for key in ["`m`", "`p`", "`solver.dt_safety`", "`what`", "`profile`"] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = RawConfig::parse("# comment\nN = 1\njunk line\nN = 2\n").unwrap_err();
        assert_eq!(err.violations.len(), 2);
        assert!(err.violations[0].starts_with("line 3"));
        assert!(err.violations[1].contains("already set on line 2"));
    }

    #[test]
    fn overrides_and_seed_precedence() {
        let raw = RawConfig::parse("seed = 5\nc = 1\n").unwrap().with_overrides(&["c=2"]).unwrap();
        let cfg = parse_config(Subcommand::Norms, &raw, Some(9)).unwrap();
        assert_eq!(cfg.profile.c, 2.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(parse_config(Subcommand::Norms, &raw, None).unwrap().seed, 5);
    }

    #[test]
    fn condition_exponent_checked_against_regime() {
        let err = parse("condition.delta = 1\ncondition.exponent = 5\n").unwrap_err();
        assert!(err.to_string().contains("condition.exponent"));
        let ok = parse("condition.delta = 1\ncondition.T = inf\n").unwrap();
        let c = ok.condition.unwrap();
        assert!(c.t.is_infinite() && c.exponent > 1.0 && c.exponent < 1.25);
        assert!(parse("condition.T = 2\n").is_err());
    }

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.name().parse::<Subcommand>().unwrap(), s);
        }
        assert!("plot".parse::<Subcommand>().is_err());
    }
}
