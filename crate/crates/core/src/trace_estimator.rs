//! Initial-trace estimation: extrapolating recorded ball masses to `t = 0`
//! and fitting their dependence on the radius.

use crate::error::{Error, Result};
use crate::exponents::{ProblemParams, Regime};
use crate::io::{csv_line, fmt_float};
use crate::par::Exec;
use crate::solver::SolverTrace;
use crate::special::log_e_plus;

pub const GAMMA_MIN: f64 = 0.3;
pub const GAMMA_MAX: f64 = 2.0;
pub const CONTRACTION: f64 = 1.5;
const MIN_SPAN: f64 = 8.0;

/// Extrapolated masses `nu(B(0, sigma_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    /// Distance of the ball centers from the origin (always 0: probes are centered).
    pub center: f64,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
    pub converged: Vec<bool>,
    /// Fitted rate `gamma` in `a + b t^gamma`, per radius.
    pub rates: Vec<f64>,
    /// True when the raw extrapolations had to be made monotone in `sigma`.
    pub monotone_adjusted: bool,
}

/// Fit of `a + b t^gamma` through three samples; `gamma` is clamped to
/// `[GAMMA_MIN, GAMMA_MAX]` when the data ask for a rate outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

pub fn fit_three(t: [f64; 3], y: [f64; 3]) -> RateFit {
    let d1 = y[1] - y[0];
    let d2 = y[2] - y[1];
    let scale = y.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if d1.abs() <= 1e-15 * scale {
        return RateFit { a: y[0], b: 0.0, gamma: 1.0 };
    }
    let ratio_of = |g: f64| (t[2].powf(g) - t[1].powf(g)) / (t[1].powf(g) - t[0].powf(g));
    let target = d2 / d1;
    // ratio_of is increasing in gamma for increasing times
    let gamma = if !(target > ratio_of(GAMMA_MIN)) {
        GAMMA_MIN
    } else if !(target < ratio_of(GAMMA_MAX)) {
        GAMMA_MAX
    } else {
        let (mut lo, mut hi) = (GAMMA_MIN, GAMMA_MAX);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ratio_of(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let b = d1 / (t[1].powf(gamma) - t[0].powf(gamma));
    RateFit { a: y[0] - b * t[0].powf(gamma), b, gamma }
}

/// Extrapolates every recorded ball mass to `t = 0` using the smallest
/// positive sample times. Requires four such times spanning a factor 8.
pub fn estimate_trace(trace: &SolverTrace, exec: Exec) -> Result<TraceEstimate> {
    let idx: Vec<usize> = (0..trace.len()).filter(|&k| trace.times[k] > 0.0).take(4).collect();
    if idx.len() < 4 {
        return Err(Error::InsufficientSamples(format!(
            "need 4 positive sample times, trace has {}",
            idx.len()
        )));
    }
    let t: Vec<f64> = idx.iter().map(|&k| trace.times[k]).collect();
    if t[3] / t[0] < MIN_SPAN * (1.0 - 1e-12) {
        return Err(Error::InsufficientSamples(format!(
            "smallest sample times span a factor {:.3}, need >= {MIN_SPAN}",
            t[3] / t[0]
        )));
    }
    if trace.probe_radii.is_empty() {
        return Err(Error::InsufficientSamples("trace records no ball masses".into()));
    }
    let per_radius = exec.map_range(trace.probe_radii.len(), |j| {
        let y: Vec<f64> = idx.iter().map(|&k| trace.ball_mass[k][j]).collect();
        let fit = fit_three([t[0], t[1], t[2]], [y[0], y[1], y[2]]);
        let d: Vec<f64> = (0..3).map(|i| (y[i + 1] - y[i]).abs()).collect();
        let negligible = d.iter().all(|&x| x <= 1e-12 * y[0].abs().max(1e-300));
        let contracting = d[1] >= CONTRACTION * d[0] && d[2] >= CONTRACTION * d[1];
        (fit.a.max(0.0), fit.gamma, negligible || contracting)
    });
    let radii = trace.probe_radii.clone();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let mut masses: Vec<f64> = per_radius.iter().map(|r| r.0).collect();
    let mut adjusted = false;
    let mut running = 0.0f64;
    for &j in &order {
        if masses[j] < running {
            masses[j] = running;
            adjusted = true;
        }
        running = masses[j];
    }
    Ok(TraceEstimate {
        center: 0.0,
        radii,
        masses,
        converged: per_radius.iter().map(|r| r.2).collect(),
        rates: per_radius.iter().map(|r| r.1).collect(),
        monotone_adjusted: adjusted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFit {
    pub regime: Regime,
    /// Least-squares slope of `ln nu` against `ln sigma`.
    pub slope: f64,
    /// `N - 2/(p-m)`.
    pub expected_slope: f64,
    /// Critical regime: RMS misfit of `ln nu` against the shape
    /// `[log(e + T^theta / sigma)]^{-N/2}` up to a constant.
    pub log_shape_residual: Option<f64>,
    pub decades: f64,
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

/// Log–log slope of the extrapolated masses against the radius, compared
/// with the mass bound shape of the supercritical or critical regime.
pub fn fit_trace_bounds(est: &TraceEstimate, params: &ProblemParams, t: f64) -> Result<TraceFit> {
    let regime = params.regime();
    if regime == Regime::Subcritical {
        return Err(Error::Regime("mass-shape fits need the critical or supercritical regime".into()));
    }
    let pts: Vec<(f64, f64)> = est
        .radii
        .iter()
        .zip(&est.masses)
        .filter(|(s, m)| **s > 0.0 && **m > 0.0)
        .map(|(s, m)| (*s, *m))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples("need two radii with positive mass".into()));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let decades = (hi / lo).log10();
    if decades < 1.5 {
        return Err(Error::InsufficientSamples(format!("radii span {decades:.2} decades, need >= 1.5")));
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, _) = least_squares(&x, &y);
    let n = params.dim() as f64;
    let log_shape_residual = if regime == Regime::Critical {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!("T = {t} must be finite and > 0")));
        }
        let l = t.powf(params.exponents().theta);
        let r: Vec<f64> = pts
            .iter()
            .map(|(s, m)| m.ln() + 0.5 * n * log_e_plus(l / s).ln())
            .collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        Some((r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / r.len() as f64).sqrt())
    } else {
        None
    };
    Ok(TraceFit {
        regime,
        slope,
        expected_slope: n - params.scaling_exponent(),
        log_shape_residual,
        decades,
    })
}

impl TraceEstimate {
    /// `sigma,nu_hat,converged,rate,fitted_slope` rows.
    pub fn to_csv(&self, fit: Option<&TraceFit>) -> String {
        let mut out = csv_line(["sigma", "nu_hat", "converged", "rate", "fitted_slope"]);
        let slope = fit.map_or(f64::NAN, |f| f.slope);
        for j in 0..self.radii.len() {
            out.push_str(&csv_line([
                fmt_float(self.radii[j]),
                fmt_float(self.masses[j]),
                (self.converged[j] as u8).to_string(),
                fmt_float(self.rates[j]),
                fmt_float(slope),
            ]));
        }
        out
    }
}
