//! Explicit radial finite-volume solver for `u_t = Δ(u^m) + u^p`.
//!
//! Cells are the shells `[i dr, (i + 1) dr)`. The flux through the face at
//! radius `r` is `|S^{N-1}| r^{N-1} (v_{i+1} - v_i) / dr` with `v = u^m`; the
//! face at the origin has zero area. Time stepping is forward Euler with the
//! step recomputed from the current extrema of `u` every step.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exponents::{kappa_r, ProblemParams};
use crate::field::{Grid, GridField};
use crate::geometry::unit_sphere_area;
use crate::io::{csv_line, fmt_float, parse_float};
use crate::profiles::{Gauge, RadialProfile};

pub const DEFAULT_DT_SAFETY: f64 = 0.4;
pub const DEFAULT_SOURCE_SAFETY: f64 = 0.02;
pub const DEFAULT_U_BLOWUP: f64 = 1e8;
pub const DEFAULT_U_FLOOR: f64 = 1e-4;
pub const DEFAULT_MAX_STEPS: u64 = 200_000_000;
pub const DT_UNDERFLOW_FRACTION: f64 = 1e-14;
const PROJECTION_TOL: f64 = 1e-11;

/// Outer ghost value as a function of `(t, r)`.
pub type BoundaryFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Boundary {
    /// No flux through the outer face.
    ZeroFlux,
    /// Ghost cell held at `u_floor`.
    FixedFloor,
    /// Ghost cell held at a prescribed time-dependent value.
    Dirichlet(BoundaryFn),
}

impl Boundary {
    pub fn dirichlet(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Boundary::Dirichlet(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Boundary::ZeroFlux => "zero_flux",
            Boundary::FixedFloor => "fixed_floor",
            Boundary::Dirichlet(_) => "dirichlet",
        }
    }
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// When the trace records a row (besides `t = 0`, `t_end` and blow-up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputSchedule {
    EveryStep,
    Linear { interval: f64 },
    /// `t_first * ratio^k`
    Geometric { t_first: f64, ratio: f64 },
}

impl OutputSchedule {
    /// First output time strictly after `t`, capped at `t_end`.
    pub fn next_after(&self, t: f64, t_end: f64) -> f64 {
        let next = match *self {
            OutputSchedule::EveryStep => f64::INFINITY,
            OutputSchedule::Linear { interval } => {
                let k = (t / interval * (1.0 + 1e-12)).floor() + 1.0;
                k * interval
            }
            OutputSchedule::Geometric { t_first, ratio } => {
                if t < t_first * (1.0 - 1e-12) {
                    t_first
                } else {
                    let k = ((t / t_first).ln() / ratio.ln() + 1e-9).floor() + 1.0;
                    t_first * ratio.powf(k)
                }
            }
        };
        next.min(t_end)
    }

    fn validate(&self) -> Option<String> {
        match *self {
            OutputSchedule::EveryStep => None,
            OutputSchedule::Linear { interval } if !(interval > 0.0 && interval.is_finite()) => {
                Some(format!("output interval {interval} must be > 0"))
            }
            OutputSchedule::Geometric { t_first, ratio } if !(t_first > 0.0 && ratio > 1.0) => {
                Some(format!("geometric output needs t_first > 0 and ratio > 1 (got {t_first}, {ratio})"))
            }
            _ => None,
        }
    }

    fn scaled_time(&self, s: f64) -> Self {
        match *self {
            OutputSchedule::EveryStep => OutputSchedule::EveryStep,
            OutputSchedule::Linear { interval } => OutputSchedule::Linear { interval: interval * s },
            OutputSchedule::Geometric { t_first, ratio } => OutputSchedule::Geometric { t_first: t_first * s, ratio },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub params: ProblemParams,
    pub grid: Grid,
    /// Fraction of the explicit diffusion limit `dr^2 / (2N max m u^{m-1})`.
    pub dt_safety: f64,
    /// Fraction of `1 / (2 max u^{p-1})` used as the reaction step limit.
    pub source_safety: f64,
    pub u_blowup: f64,
    /// Added to the projected data and, for `FixedFloor`, the lower clamp.
    pub u_floor: f64,
    /// Initial data are capped at this value before adding the floor.
    pub cap: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    pub source_on: bool,
    pub output: OutputSchedule,
    pub max_steps: u64,
}

impl SolverConfig {
    pub fn new(params: ProblemParams, grid: Grid) -> Self {
        Self {
            params,
            grid,
            dt_safety: DEFAULT_DT_SAFETY,
            source_safety: DEFAULT_SOURCE_SAFETY,
            u_blowup: DEFAULT_U_BLOWUP,
            u_floor: DEFAULT_U_FLOOR,
            cap: 1.0 / DEFAULT_U_FLOOR,
            t_end: 1.0,
            boundary: Boundary::FixedFloor,
            source_on: true,
            output: OutputSchedule::Linear { interval: 0.01 },
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    /// `min(mu, n) + 1/n`: cap `n`, floor `1/n`.
    pub fn with_regularization(mut self, n: f64) -> Self {
        self.cap = n;
        self.u_floor = if n.is_finite() { 1.0 / n } else { 0.0 };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.grid.dim() != self.params.dim() {
            bad.push(format!("grid dimension {} differs from N = {}", self.grid.dim(), self.params.dim()));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety < 1.0) {
            bad.push(format!("dt_safety = {} must lie in (0, 1)", self.dt_safety));
        }
        if !(self.source_safety > 0.0 && self.source_safety < 1.0) {
            bad.push(format!("source_safety = {} must lie in (0, 1)", self.source_safety));
        }
        if !(self.u_blowup > 1.0) {
            bad.push(format!("u_blowup = {} must be > 1", self.u_blowup));
        }
        if !(self.u_floor >= 0.0 && self.u_floor.is_finite()) {
            bad.push(format!("u_floor = {} must be finite and >= 0", self.u_floor));
        }
        if matches!(self.boundary, Boundary::FixedFloor) && !(self.u_floor > 0.0) {
            bad.push("fixed_floor boundary needs u_floor > 0".into());
        }
        if !(self.cap > 0.0) {
            bad.push(format!("cap = {} must be > 0", self.cap));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            bad.push(format!("t_end = {} must be finite and > 0", self.t_end));
        }
        if self.max_steps == 0 {
            bad.push("max_steps must be > 0".into());
        }
        bad.extend(self.output.validate());
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }

    /// Stable hash of every setting (the Dirichlet closure contributes its kind only).
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        let floats = [
            self.params.m(),
            self.params.p(),
            self.grid.dr(),
            self.dt_safety,
            self.source_safety,
            self.u_blowup,
            self.u_floor,
            self.cap,
            self.t_end,
        ];
        for x in floats {
            x.to_bits().hash(&mut h);
        }
        (self.params.dim(), self.grid.cells(), self.source_on, self.max_steps).hash(&mut h);
        self.boundary.name().hash(&mut h);
        format!("{:?}", self.output).hash(&mut h);
        h.finish()
    }

    fn ghost(&self, t: f64) -> Option<f64> {
        match &self.boundary {
            Boundary::ZeroFlux => None,
            Boundary::FixedFloor => Some(self.u_floor),
            Boundary::Dirichlet(f) => Some(f(t, self.grid.radius() + 0.5 * self.grid.dr()).max(0.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtLimit {
    pub dt: f64,
    pub diffusion: f64,
    pub source: f64,
    pub source_limited: bool,
}

/// Raw explicit limit `dr^2 / (2N m u_min^{m-1})` (zero when `u_min = 0`).
pub fn diffusion_limit(params: &ProblemParams, grid: &Grid, u_min: f64) -> f64 {
    if !(u_min > 0.0) {
        return 0.0;
    }
    let m = params.m();
    let dr = grid.dr();
    dr * dr / (2.0 * params.dim() as f64 * m * u_min.powf(m - 1.0))
}

/// Step size used by [`simulate`] for a field with the given extrema.
pub fn admissible_dt(cfg: &SolverConfig, u_min: f64, u_max: f64) -> DtLimit {
    let diffusion = cfg.dt_safety * diffusion_limit(&cfg.params, &cfg.grid, u_min);
    let source = if cfg.source_on && u_max > 0.0 {
        cfg.source_safety / (2.0 * u_max.powf(cfg.params.p() - 1.0))
    } else {
        f64::INFINITY
    };
    DtLimit { dt: diffusion.min(source), diffusion, source, source_limited: source < diffusion }
}

#[derive(Debug, Clone, Copy)]
enum Pow {
    Half,
    Int(i32),
    Real(f64),
}

impl Pow {
    fn new(e: f64) -> Self {
        if e == 0.5 {
            Pow::Half
        } else if e.fract() == 0.0 && e.abs() <= 16.0 {
            Pow::Int(e as i32)
        } else {
            Pow::Real(e)
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Pow::Half => x.sqrt(),
            Pow::Int(k) => x.powi(k),
            Pow::Real(e) => x.powf(e),
        }
    }
}

/// Preallocated geometry and scratch for repeated steps on one grid.
struct Stepper {
    inv_dr: f64,
    area: Vec<f64>,
    inv_vol: Vec<f64>,
    v: Vec<f64>,
    pow_m: Pow,
    pow_p: Pow,
}

impl Stepper {
    fn new(grid: &Grid, params: &ProblemParams) -> Self {
        let dim = grid.dim();
        let omega = unit_sphere_area(dim);
        let area = (0..=grid.cells())
            .map(|i| if i == 0 { 0.0 } else { omega * grid.face(i).powi(dim as i32 - 1) })
            .collect();
        let inv_vol = (0..grid.cells()).map(|i| 1.0 / grid.cell_volume(i)).collect();
        Self {
            inv_dr: 1.0 / grid.dr(),
            area,
            inv_vol,
            v: vec![0.0; grid.cells()],
            pow_m: Pow::new(params.m()),
            pow_p: Pow::new(params.p()),
        }
    }

    /// One Euler step in place; returns the new `(min, max)`.
    fn advance(&mut self, u: &mut [f64], dt: f64, ghost: Option<f64>, source: bool, floor: Option<f64>) -> Result<(f64, f64)> {
        let n = u.len();
        for (v, &x) in self.v.iter_mut().zip(u.iter()) {
            *v = self.pow_m.apply(x);
        }
        let v_ghost = ghost.map(|g| self.pow_m.apply(g));
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut flux_left = 0.0;
        for i in 0..n {
            let flux_right = if i + 1 < n {
                self.area[i + 1] * (self.v[i + 1] - self.v[i]) * self.inv_dr
            } else {
                match v_ghost {
                    Some(vg) => self.area[n] * (vg - self.v[i]) * self.inv_dr,
                    None => 0.0,
                }
            };
            let old = u[i];
            let mut new = old + dt * (flux_right - flux_left) * self.inv_vol[i];
            if source {
                new += dt * self.pow_p.apply(old);
            }
            if let Some(f) = floor {
                new = new.max(f);
            }
            if !(new >= 0.0) || new.is_nan() {
                return Err(Error::NegativeValue { cell: i, value: new });
            }
            u[i] = new;
            lo = lo.min(new);
            hi = hi.max(new);
            flux_left = flux_right;
        }
        Ok((lo, hi))
    }
}

/// Cell averages of `profile`, capped at `cap`, plus `floor`.
pub fn project_initial(profile: &RadialProfile, grid: &Grid, cap: f64, floor: f64) -> Result<GridField> {
    if profile.dim() != grid.dim() {
        return Err(Error::InvalidParams(format!(
            "profile dimension {} differs from grid dimension {}",
            profile.dim(),
            grid.dim()
        )));
    }
    let u = (0..grid.cells())
        .map(|i| {
            let mass = profile.shell_integral(&Gauge::Identity, grid.face(i), grid.face(i + 1), PROJECTION_TOL)?;
            Ok((mass / grid.cell_volume(i)).min(cap) + floor)
        })
        .collect::<Result<Vec<f64>>>()?;
    GridField::new(*grid, u)
}

/// `min(cell average of mu, n) + 1/n`.
pub fn regularize_initial(profile: &RadialProfile, n: f64, grid: &Grid) -> Result<GridField> {
    if !(n > 0.0) {
        return Err(Error::InvalidParams(format!("regularization level n = {n} must be > 0")));
    }
    project_initial(profile, grid, n, 1.0 / n)
}

fn ghost_min(u_min: f64, ghost: Option<f64>) -> f64 {
    ghost.map_or(u_min, |g| u_min.min(g))
}

/// One explicit step of size `dt` from time `t`.
pub fn step(field: &GridField, cfg: &SolverConfig, t: f64, dt: f64) -> Result<GridField> {
    cfg.validate()?;
    if field.grid() != &cfg.grid {
        return Err(Error::InvalidParams("field grid differs from the configured grid".into()));
    }
    let ghost = cfg.ghost(t);
    let bound = diffusion_limit(&cfg.params, &cfg.grid, ghost_min(field.inf(), ghost));
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::Stability { dt, bound });
    }
    let floor = matches!(cfg.boundary, Boundary::FixedFloor).then_some(cfg.u_floor);
    let mut out = field.clone();
    Stepper::new(&cfg.grid, &cfg.params).advance(out.values_mut(), dt, ghost, cfg.source_on, floor)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyProbe {
    pub beta: f64,
    pub sigma: f64,
}

/// What [`simulate`] records at each output time besides the sup norm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Probes {
    /// Radii `sigma_j` of the centered ball masses.
    pub radii: Vec<f64>,
    pub energy: Option<EnergyProbe>,
}

impl Probes {
    pub fn masses(radii: &[f64]) -> Self {
        Self { radii: radii.to_vec(), energy: None }
    }

    pub fn with_energy(mut self, beta: f64, sigma: f64) -> Self {
        self.energy = Some(EnergyProbe { beta, sigma });
        self
    }

    fn validate(&self) -> Result<()> {
        if self.radii.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParams("probe radii must be finite and > 0".into()));
        }
        if let Some(e) = self.energy {
            if !(e.beta > 1.0 && e.sigma > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "energy probe needs beta > 1 and sigma > 0 (got {}, {})",
                    e.beta, e.sigma
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Completed,
    BlewUp(f64),
    DtUnderflow(f64),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Completed => f.write_str("Completed"),
            Status::BlewUp(t) => write!(f, "BlewUp {}", fmt_float(*t)),
            Status::DtUnderflow(t) => write!(f, "DtUnderflow {}", fmt_float(*t)),
        }
    }
}

impl std::str::FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let kind = it.next().unwrap_or("");
        let time = it.next().map(|x| parse_float(x, "status time"));
        match (kind, time) {
            ("Completed", None) => Ok(Status::Completed),
            ("BlewUp", Some(t)) => Ok(Status::BlewUp(t?)),
            ("DtUnderflow", Some(t)) => Ok(Status::DtUnderflow(t?)),
            _ => Err(Error::Parse(format!("unrecognized status {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub times: Vec<f64>,
    pub sup_norm: Vec<f64>,
    pub probe_radii: Vec<f64>,
    /// `ball_mass[k][j] = int_{B(0, sigma_j)} u(t_k)`
    pub ball_mass: Vec<Vec<f64>>,
    pub energy: Option<EnergyProbe>,
    pub energy_beta: Vec<f64>,
    pub dirichlet_beta: Vec<f64>,
    pub status: Status,
    pub steps: u64,
    /// Field at the last recorded time (not serialized).
    pub final_field: Option<GridField>,
}

impl SolverTrace {
    fn empty(probes: &Probes) -> Self {
        Self {
            times: Vec::new(),
            sup_norm: Vec::new(),
            probe_radii: probes.radii.clone(),
            ball_mass: Vec::new(),
            energy: probes.energy,
            energy_beta: Vec::new(),
            dirichlet_beta: Vec::new(),
            status: Status::Completed,
            steps: 0,
            final_field: None,
        }
    }

    fn record(&mut self, t: f64, field: &GridField, m: f64) {
        self.times.push(t);
        self.sup_norm.push(field.sup());
        self.ball_mass.push(self.probe_radii.iter().map(|&s| field.mass_within(s)).collect());
        if let Some(e) = self.energy {
            let d = energy_terms(field, m, e.beta, e.sigma);
            self.energy_beta.push(d.mass_beta);
            self.dirichlet_beta.push(d.dirichlet_beta);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.status {
            Status::BlewUp(t) => Some(t),
            _ => None,
        }
    }

    pub fn completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Column `j` of the ball-mass matrix.
    pub fn mass_series(&self, j: usize) -> Vec<f64> {
        self.ball_mass.iter().map(|row| row[j]).collect()
    }

    /// Same trace with every time shifted by `t0` (e.g. to physical time for
    /// data taken from a self-similar solution at `t0`).
    pub fn shifted(&self, t0: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.times {
            *t += t0;
        }
        out.status = match self.status {
            Status::Completed => Status::Completed,
            Status::BlewUp(t) => Status::BlewUp(t + t0),
            Status::DtUnderflow(t) => Status::DtUnderflow(t + t0),
        };
        out
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["t".to_string(), "sup_norm".to_string()];
        cols.extend((0..self.probe_radii.len()).map(|j| format!("mass_sigma_{j}")));
        if self.energy.is_some() {
            cols.push("energy_beta".into());
            cols.push("dirichlet_beta".into());
        }
        csv_line(cols)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        for k in 0..self.len() {
            let mut row = vec![fmt_float(self.times[k]), fmt_float(self.sup_norm[k])];
            row.extend(self.ball_mass[k].iter().map(|&x| fmt_float(x)));
            if self.energy.is_some() {
                row.push(fmt_float(self.energy_beta[k]));
                row.push(fmt_float(self.dirichlet_beta[k]));
            }
            out.push_str(&csv_line(row));
        }
        let mut probes: Vec<String> = self
            .probe_radii
            .iter()
            .enumerate()
            .map(|(j, s)| format!("sigma_{j}={}", fmt_float(*s)))
            .collect();
        if let Some(e) = self.energy {
            probes.push(format!("beta={}", fmt_float(e.beta)));
            probes.push(format!("sigma_beta={}", fmt_float(e.sigma)));
        }
        out.push_str(&format!("# probes: {}\n", probes.join(" ")));
        out.push_str(&format!("# steps: {}\n", self.steps));
        out.push_str(&format!("# status: {}\n", self.status));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty trace file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t" || cols[1] != "sup_norm" {
            return Err(Error::Parse(format!("trace header must start with t,sup_norm: {header:?}")));
        }
        let n_mass = cols.iter().filter(|c| c.starts_with("mass_sigma_")).count();
        let has_energy = cols.contains(&"energy_beta");
        if cols.len() != 2 + n_mass + if has_energy { 2 } else { 0 } {
            return Err(Error::Parse(format!("unexpected trace columns: {header:?}")));
        }
        let mut trace = SolverTrace::empty(&Probes::default());
        let mut status = None;
        let mut radii = vec![f64::NAN; n_mass];
        let (mut beta, mut sigma_beta) = (None, None);
        for (lineno, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(s) = rest.strip_prefix("status:") {
                    status = Some(s.trim().parse::<Status>()?);
                } else if let Some(s) = rest.strip_prefix("steps:") {
                    trace.steps = s.trim().parse().map_err(|_| Error::Parse(format!("bad step count {s:?}")))?;
                } else if let Some(s) = rest.strip_prefix("probes:") {
                    for item in s.split_whitespace() {
                        let (k, v) = item
                            .split_once('=')
                            .ok_or_else(|| Error::Parse(format!("bad probe entry {item:?}")))?;
                        let v = parse_float(v, k)?;
                        if let Some(j) = k.strip_prefix("sigma_").and_then(|j| j.parse::<usize>().ok()) {
                            if j < n_mass {
                                radii[j] = v;
                            }
                        } else if k == "beta" {
                            beta = Some(v);
                        } else if k == "sigma_beta" {
                            sigma_beta = Some(v);
                        }
                    }
                }
                continue;
            }
            let vals = line
                .split(',')
                .map(|x| parse_float(x, &format!("row {}", lineno + 2)))
                .collect::<Result<Vec<f64>>>()?;
            if vals.len() != cols.len() {
                return Err(Error::Parse(format!("row {} has {} fields, expected {}", lineno + 2, vals.len(), cols.len())));
            }
            trace.times.push(vals[0]);
            trace.sup_norm.push(vals[1]);
            trace.ball_mass.push(vals[2..2 + n_mass].to_vec());
            if has_energy {
                trace.energy_beta.push(vals[2 + n_mass]);
                trace.dirichlet_beta.push(vals[3 + n_mass]);
            }
        }
        trace.status = status.ok_or_else(|| Error::Parse("missing '# status:' line".into()))?;
        trace.probe_radii = radii;
        if has_energy {
            match (beta, sigma_beta) {
                (Some(beta), Some(sigma)) => trace.energy = Some(EnergyProbe { beta, sigma }),
                _ => return Err(Error::Parse("energy columns without beta/sigma_beta probes".into())),
            }
        }
        if trace.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parse("trace times must be strictly increasing".into()));
        }
        Ok(trace)
    }
}

/// Projects `profile` with the configured cap and floor, then runs [`simulate_field`].
pub fn simulate(profile: &RadialProfile, cfg: &SolverConfig, probes: &Probes) -> Result<SolverTrace> {
    cfg.validate()?;
    let u0 = project_initial(profile, &cfg.grid, cfg.cap, cfg.u_floor)?;
    simulate_field(u0, cfg, probes)
}

/// Integrates from `initial` until `t_end`, blow-up or step failure.
pub fn simulate_field(initial: GridField, cfg: &SolverConfig, probes: &Probes) -> Result<SolverTrace> {
    cfg.validate()?;
    probes.validate()?;
    if initial.grid() != &cfg.grid {
        return Err(Error::InvalidParams("initial field grid differs from the configured grid".into()));
    }
    let m = cfg.params.m();
    let floor = matches!(cfg.boundary, Boundary::FixedFloor).then_some(cfg.u_floor);
    let every_step = cfg.output == OutputSchedule::EveryStep;
    let mut stepper = Stepper::new(&cfg.grid, &cfg.params);
    let mut trace = SolverTrace::empty(probes);
    let mut field = initial;
    let (mut lo, mut hi) = (field.inf(), field.sup());
    let mut t = 0.0;
    trace.record(t, &field, m);
    let mut next_out = cfg.output.next_after(t, cfg.t_end);
    let status = loop {
        if hi >= cfg.u_blowup {
            break Status::BlewUp(t);
        }
        if t >= cfg.t_end {
            break Status::Completed;
        }
        if trace.steps >= cfg.max_steps {
            break Status::DtUnderflow(t);
        }
        let ghost = cfg.ghost(t);
        let limit = admissible_dt(cfg, ghost_min(lo, ghost), hi);
        if !limit.source_limited && !(limit.dt >= DT_UNDERFLOW_FRACTION * cfg.t_end) {
            break Status::DtUnderflow(t);
        }
        let target = next_out;
        let (dt, landed) = if t + limit.dt >= target { (target - t, true) } else { (limit.dt, false) };
        (lo, hi) = stepper.advance(field.values_mut(), dt, ghost, cfg.source_on, floor)?;
        t = if landed { target } else { t + dt };
        trace.steps += 1;
        if hi >= cfg.u_blowup {
            trace.record(t, &field, m);
            break Status::BlewUp(t);
        }
        if landed || every_step {
            trace.record(t, &field, m);
            if landed {
                next_out = cfg.output.next_after(t, cfg.t_end);
            }
        }
    };
    trace.status = status;
    trace.final_field = Some(field);
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDiagnostics {
    pub mass_beta: f64,
    pub dirichlet_beta: f64,
}

fn energy_terms(field: &GridField, m: f64, beta: f64, sigma: f64) -> EnergyDiagnostics {
    let u = field.values();
    let n = u.len();
    let dr = field.grid().dr();
    let grad = |i: usize| -> f64 {
        if i == 0 {
            // mirror ghost u_{-1} = u_0
            (u[1] - u[0]) / (2.0 * dr)
        } else if i + 1 == n {
            (u[i] - u[i - 1]) / dr
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * dr)
        }
    };
    let e = m + beta - 3.0;
    let mass_beta = field.centered_integral(sigma, |v| if v == 0.0 { 0.0 } else { v.powf(beta) });
    let dirichlet_beta = field.centered_sum(sigma, |i| {
        let g = grad(i);
        if g == 0.0 { 0.0 } else { u[i].powf(e) * g * g }
    });
    EnergyDiagnostics { mass_beta, dirichlet_beta }
}

/// `int_{B(0,sigma)} u^beta` and the central-difference
/// `int_{B(0,sigma)} u^{m+beta-3} |grad u|^2`.
pub fn energy_diagnostics(field: &GridField, m: f64, beta: f64, sigma: f64) -> Result<EnergyDiagnostics> {
    if !(beta > 1.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be > 1")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParams(format!("sigma = {sigma} must be > 0")));
    }
    Ok(energy_terms(field, m, beta, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCheck {
    /// Smallest constant making the sup-norm bound hold on every window sample.
    pub constant: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// First sample time where `t^{1/(p-1)} sup u > 1`, if any.
    pub t_star: Option<f64>,
}

/// Measures `C` in
/// `sup u(t) <= C t^{-N/kappa_r} (sup_{s<=t} int_{B(0,R)} u(s)^r)^{2/kappa_r} + (t/R^2)^{1/(1-m)}`
/// over the recorded samples with `s^{1/(p-1)} sup u(s) <= 1`. The ball
/// integral must be a recorded probe: a mass radius for `r = 1`, the energy
/// probe for `r = beta`. Centered balls stand in for the sup over centers
/// (exact for radially nonincreasing solutions).
pub fn linfty_decay_check(trace: &SolverTrace, params: &ProblemParams, r: f64, big_r: f64) -> Result<DecayCheck> {
    let kr = kappa_r(params, r)?;
    if !kr.positive {
        return Err(Error::Domain(format!("kappa_r = {} must be > 0", kr.value)));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let series: Vec<f64> = if r == 1.0 {
        match trace.probe_radii.iter().position(|&s| close(s, big_r)) {
            Some(j) => trace.mass_series(j),
            None => return Err(Error::InvalidParams(format!("no mass probe recorded at R = {big_r}"))),
        }
    } else {
        match trace.energy {
            Some(e) if close(e.beta, r) && close(e.sigma, big_r) => trace.energy_beta.clone(),
            _ => return Err(Error::InvalidParams(format!("no u^{r} probe recorded at R = {big_r}"))),
        }
    };
    let n = params.dim() as f64;
    let m = params.m();
    let q = 1.0 / (params.p() - 1.0);
    let mut running = 0.0f64;
    let mut constant = 0.0f64;
    let mut window = (f64::NAN, f64::NAN);
    let mut samples = 0;
    let mut t_star = None;
    for k in 0..trace.len() {
        let t = trace.times[k];
        if t <= 0.0 {
            continue;
        }
        let s = trace.sup_norm[k];
        if t.powf(q) * s > 1.0 {
            t_star = Some(t);
            break;
        }
        running = running.max(series[k]);
        let base = t.powf(-n / kr.value) * running.powf(2.0 / kr.value);
        let excess = s - (t / (big_r * big_r)).powf(1.0 / (1.0 - m));
        let c = if excess <= 0.0 {
            0.0
        } else if base > 0.0 {
            excess / base
        } else {
            f64::INFINITY
        };
        constant = constant.max(c);
        if samples == 0 {
            window.0 = t;
        }
        window.1 = t;
        samples += 1;
    }
    if samples == 0 {
        return Err(Error::EmptyWindow(
            "no positive sample time with t^{1/(p-1)} sup u <= 1".into(),
        ));
    }
    Ok(DecayCheck { constant, window, samples, t_star })
}

/// Objects carrying the invariance `u_lambda(x, t) = lambda^{2/(p-m)} u(lambda x, lambda^{theta'} t)`.
pub trait ScaleCovariant: Sized {
    fn scaled(&self, lambda: f64, params: &ProblemParams) -> Result<Self>;
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!("lambda = {lambda} must be finite and > 0")));
    }
    Ok(())
}

/// `(amplitude factor, time factor)`: values multiply by `lambda^a`, times by `lambda^{-theta'}`.
fn scale_factors(lambda: f64, params: &ProblemParams) -> (f64, f64) {
    let a = params.scaling_exponent();
    let b = params.exponents().theta_prime;
    (lambda.powf(a), lambda.powf(-b))
}

impl ScaleCovariant for GridField {
    fn scaled(&self, lambda: f64, params: &ProblemParams) -> Result<Self> {
        check_lambda(lambda)?;
        let (amp, _) = scale_factors(lambda, params);
        let g = self.grid();
        let grid = Grid::new(g.dim(), g.cells(), g.dr() / lambda)?;
        GridField::new(grid, self.values().iter().map(|v| amp * v).collect())
    }
}

impl ScaleCovariant for SolverTrace {
    fn scaled(&self, lambda: f64, params: &ProblemParams) -> Result<Self> {
        check_lambda(lambda)?;
        let (amp, time) = scale_factors(lambda, params);
        let a = params.scaling_exponent();
        let n = params.dim() as f64;
        let m = params.m();
        let mass = lambda.powf(a - n);
        let mut out = self.clone();
        out.times.iter_mut().for_each(|t| *t *= time);
        out.sup_norm.iter_mut().for_each(|s| *s *= amp);
        out.probe_radii.iter_mut().for_each(|s| *s /= lambda);
        out.ball_mass.iter_mut().flatten().for_each(|x| *x *= mass);
        if let Some(e) = self.energy {
            out.energy = Some(EnergyProbe { beta: e.beta, sigma: e.sigma / lambda });
            let fe = lambda.powf(a * e.beta - n);
            let fd = lambda.powf(a * (m + e.beta - 1.0) + 2.0 - n);
            out.energy_beta.iter_mut().for_each(|x| *x *= fe);
            out.dirichlet_beta.iter_mut().for_each(|x| *x *= fd);
        }
        out.status = match self.status {
            Status::Completed => Status::Completed,
            Status::BlewUp(t) => Status::BlewUp(t * time),
            Status::DtUnderflow(t) => Status::DtUnderflow(t * time),
        };
        out.final_field = match &self.final_field {
            Some(f) => Some(f.scaled(lambda, params)?),
            None => None,
        };
        Ok(out)
    }
}

impl ScaleCovariant for SolverConfig {
    fn scaled(&self, lambda: f64, params: &ProblemParams) -> Result<Self> {
        check_lambda(lambda)?;
        let (amp, time) = scale_factors(lambda, params);
        let g = self.grid;
        let boundary = match &self.boundary {
            Boundary::Dirichlet(f) => {
                let f = Arc::clone(f);
                Boundary::dirichlet(move |t, r| amp * f(t / time, lambda * r))
            }
            b => b.clone(),
        };
        Ok(Self {
            grid: Grid::new(g.dim(), g.cells(), g.dr() / lambda)?,
            u_blowup: self.u_blowup * amp,
            u_floor: self.u_floor * amp,
            cap: self.cap * amp,
            t_end: self.t_end * time,
            output: self.output.scaled_time(time),
            boundary,
            ..self.clone()
        })
    }
}

pub fn scaling_transform<T: ScaleCovariant>(x: &T, lambda: f64, params: &ProblemParams) -> Result<T> {
    x.scaled(lambda, params)
}
