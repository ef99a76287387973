//! Sublinear Gronwall envelope and its check against the comparison ODE
//! `g' = A2 g^m + A3 g`, `g(0) = A1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub m: f64,
    pub t_max: f64,
}

impl GronwallCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64, m: f64, t_max: f64) -> Result<Self> {
        let mut bad = Vec::new();
        for (name, v) in [("A1", a1), ("A2", a2), ("A3", a3)] {
            if !(v >= 0.0 && v.is_finite()) {
                bad.push(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        if !(m > 0.0 && m < 1.0) {
            bad.push(format!("m = {m} must lie in (0, 1)"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            bad.push(format!("T = {t_max} must be finite and > 0"));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParams(bad.join("; ")));
        }
        Ok(Self { a1, a2, a3, m, t_max })
    }

    /// Envelope value without the `t in (0, T)` check.
    pub fn envelope(&self, t: f64) -> f64 {
        let k = 1.0 - self.m;
        let base = if self.a1 == 0.0 { 0.0 } else { self.a1.powf(k) };
        let inner = base + k * self.a2 * t;
        let h = if inner == 0.0 { 0.0 } else { inner.powf(1.0 / k) };
        (self.a3 * t).exp() * h
    }

    fn rhs(&self, g: f64) -> f64 {
        let g = g.max(0.0);
        let gm = if g == 0.0 { 0.0 } else { g.powf(self.m) };
        self.a2 * gm + self.a3 * g
    }
}

/// `e^{A3 t} (A1^{1-m} + (1-m) A2 t)^{1/(1-m)}` for `t in (0, T)`.
pub fn gronwall_bound(c: &GronwallCoeffs, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < c.t_max) {
        return Err(Error::Domain(format!("t = {t} outside (0, {})", c.t_max)));
    }
    Ok(c.envelope(t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeReport {
    /// `max_t (g(t) - bound(t))`
    pub max_gap: f64,
    /// `max_t (g(t) - bound(t)) / max(bound(t), 1)`
    pub max_rel_gap: f64,
    pub steps: usize,
    pub g_final: f64,
    pub bound_final: f64,
}

fn rk4_step(c: &GronwallCoeffs, g: f64, h: f64) -> f64 {
    let k1 = c.rhs(g);
    let k2 = c.rhs(g + 0.5 * h * k1);
    let k3 = c.rhs(g + 0.5 * h * k2);
    let k4 = c.rhs(g + h * k3);
    g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

const LOCAL_TOL: f64 = 1e-13;
const MIN_STEP_FRACTION: f64 = 1e-15;

/// Integrates the comparison ODE on `[0, T]` with classical RK4 under
/// step-doubling error control (at most `T / n_steps` per step) and records
/// the largest excess of the numerical solution over the envelope.
pub fn verify_against_ode(c: &GronwallCoeffs, n_steps: usize) -> Result<OdeReport> {
    if n_steps < 100 {
        return Err(Error::InvalidParams(format!("n_steps = {n_steps} must be >= 100")));
    }
    let h_max = c.t_max / n_steps as f64;
    let h_min = c.t_max * MIN_STEP_FRACTION;
    let mut t = 0.0;
    let mut g = c.a1;
    let mut h = h_max;
    let mut steps = 0;
    let mut max_gap = f64::NEG_INFINITY;
    let mut max_rel_gap = f64::NEG_INFINITY;
    while t < c.t_max {
        h = h.min(c.t_max - t).min(h_max);
        let full = rk4_step(c, g, h);
        let half = rk4_step(c, rk4_step(c, g, 0.5 * h), 0.5 * h);
        let err = (half - full).abs() / 15.0;
        if err > LOCAL_TOL * half.abs().max(1e-300) && h > h_min {
            h *= 0.5;
            continue;
        }
        if h <= h_min && err > LOCAL_TOL * half.abs().max(1e-300) {
            return Err(Error::NonConvergence { iterations: steps, residual: err });
        }
        g = half + (half - full) / 15.0;
        t += h;
        steps += 1;
        let b = c.envelope(t);
        max_gap = max_gap.max(g - b);
        max_rel_gap = max_rel_gap.max((g - b) / b.max(1.0));
        if err < 0.01 * LOCAL_TOL * half.abs() {
            h *= 2.0;
        }
    }
    Ok(OdeReport { max_gap, max_rel_gap, steps, g_final: g, bound_final: c.envelope(c.t_max) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawReport {
    pub coeffs: GronwallCoeffs,
    pub report: OdeReport,
    pub pass: bool,
}

pub const DRAW_MS: [f64; 3] = [0.3, 0.5, 0.9];

/// Seeded draws `(A1, A2, A3) in [0, 2]^3`, `m in {0.3, 0.5, 0.9}`, `T = 1`;
/// a draw passes when the ODE solution exceeds the envelope by at most
/// `rel_tol` relative.
pub fn check_random_draws(seed: u64, n: usize, rel_tol: f64, exec: Exec) -> Result<Vec<DrawReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<GronwallCoeffs> = (0..n)
        .map(|_| {
            let a1 = rng.gen_range(0.0..=2.0);
            let a2 = rng.gen_range(0.0..=2.0);
            let a3 = rng.gen_range(0.0..=2.0);
            let m = DRAW_MS[rng.gen_range(0..DRAW_MS.len())];
            GronwallCoeffs::new(a1, a2, a3, m, 1.0)
        })
        .collect::<Result<_>>()?;
    exec.map(&coeffs, |c| {
        let report = verify_against_ode(c, 200)?;
        Ok(DrawReport { coeffs: *c, report, pass: report.max_rel_gap <= rel_tol })
    })
    .into_iter()
    .collect()
}
