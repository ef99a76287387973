//! Radial initial-data families and their (ball) integrals.
//!
//! Singular profiles are never sampled at the origin: integrals use closed
//! forms where they exist and otherwise quadrature in `ln r`, which turns
//! the algebraic and logarithmic singularities at `r = 0` into decaying tails.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exponents::{ProblemParams, Regime};
use crate::field::GridField;
use crate::geometry::{ball_volume, sphere_in_ball, unit_sphere_area};
use crate::quad::{integrate, integrate_from_neg_inf};
use crate::special::{log_e_plus, OrliczPsi};

/// Pointwise transform applied before integrating: `g(f(x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    Identity,
    Power(f64),
    /// `Psi_alpha(scale * f)`
    Psi { alpha: f64, scale: f64 },
}

impl Gauge {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Gauge::Identity => x,
            Gauge::Power(a) => {
                if x == 0.0 { 0.0 } else { x.powf(a) }
            }
            Gauge::Psi { alpha, scale } => {
                let y = scale * x;
                if y == 0.0 {
                    0.0
                } else if alpha == 0.0 {
                    y
                } else {
                    y * log_e_plus(y).powf(alpha)
                }
            }
        }
    }

    pub fn psi(alpha: f64, scale: f64) -> Result<Self> {
        OrliczPsi::new(alpha)?;
        Ok(Gauge::Psi { alpha, scale })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    Constant { c: f64 },
    /// `c |x|^{-a}`
    PowerLaw { c: f64, a: f64 },
    /// `c |x|^{-N} [ln(e + 1/|x|)]^{-N/2 - 1}`
    CriticalLog { c: f64 },
    /// Source-free fast diffusion self-similar solution at time `t0`.
    Barenblatt { cb: f64, t0: f64, m: f64 },
    Gridded(Arc<GridField>),
    /// `factor * inner(lambda |x|)`
    Rescaled { inner: Box<RadialProfile>, lambda: f64, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    dim: usize,
    kind: ProfileKind,
    cutoff: Option<f64>,
}

fn check_amplitude(c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!("amplitude c = {c} must be finite and >= 0")));
    }
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParams("dimension must be >= 1".into()));
    }
    Ok(())
}

impl RadialProfile {
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        check_dim(dim)?;
        check_amplitude(c)?;
        Ok(Self { dim, kind: ProfileKind::Constant { c }, cutoff: None })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::constant(dim, 0.0)
    }

    pub fn power_law(dim: usize, c: f64, a: f64) -> Result<Self> {
        check_dim(dim)?;
        check_amplitude(c)?;
        if !(a >= 0.0 && a < dim as f64) {
            return Err(Error::Integrability(format!(
                "|x|^-{a} is not locally integrable in dimension {dim}"
            )));
        }
        Ok(Self { dim, kind: ProfileKind::PowerLaw { c, a }, cutoff: None })
    }

    pub fn critical_log(dim: usize, c: f64) -> Result<Self> {
        check_dim(dim)?;
        check_amplitude(c)?;
        Ok(Self { dim, kind: ProfileKind::CriticalLog { c }, cutoff: None })
    }

    pub fn barenblatt(dim: usize, m: f64, cb: f64, t0: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidParams(format!("Barenblatt needs m in (0,1), got {m}")));
        }
        if dim as f64 * (m - 1.0) + 2.0 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "Barenblatt needs kappa = N(m-1)+2 > 0 (N = {dim}, m = {m})"
            )));
        }
        if !(cb > 0.0 && t0 > 0.0) {
            return Err(Error::InvalidParams("Barenblatt needs C_B > 0 and t0 > 0".into()));
        }
        Ok(Self { dim, kind: ProfileKind::Barenblatt { cb, t0, m }, cutoff: None })
    }

    pub fn gridded(field: Arc<GridField>) -> Self {
        Self { dim: field.dim(), kind: ProfileKind::Gridded(field), cutoff: None }
    }

    /// `x -> lambda^exponent * f(lambda x)`.
    pub fn rescaled(&self, lambda: f64, exponent: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda = {lambda} must be finite and > 0")));
        }
        let kind = ProfileKind::Rescaled {
            inner: Box::new(self.clone()),
            lambda,
            factor: lambda.powf(exponent),
        };
        Ok(Self { dim: self.dim, kind, cutoff: None })
    }

    /// Zero the profile beyond radius `r`.
    pub fn with_cutoff(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::InvalidParams(format!("cutoff {r} must be > 0")));
        }
        self.cutoff = Some(r);
        Ok(self)
    }

    /// Same family with amplitude `c`. Barenblatt, gridded and rescaled
    /// profiles have no amplitude parameter and return an error.
    pub fn with_amplitude(&self, c: f64) -> Result<Self> {
        check_amplitude(c)?;
        let kind = match self.kind {
            ProfileKind::Constant { .. } => ProfileKind::Constant { c },
            ProfileKind::PowerLaw { a, .. } => ProfileKind::PowerLaw { c, a },
            ProfileKind::CriticalLog { .. } => ProfileKind::CriticalLog { c },
            _ => {
                return Err(Error::InvalidParams(
                    "amplitude family needs a constant, power or critical profile".into(),
                ))
            }
        };
        Ok(Self { dim: self.dim, kind, cutoff: self.cutoff })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// True when the profile is radially nonincreasing.
    pub fn is_radially_decreasing(&self) -> bool {
        match &self.kind {
            ProfileKind::Gridded(f) => f.values().windows(2).all(|w| w[1] <= w[0]),
            ProfileKind::Rescaled { inner, .. } => inner.is_radially_decreasing(),
            _ => true,
        }
    }

    /// Pointwise value; singular profiles return `+inf` at `r = 0`.
    pub fn eval(&self, r: f64) -> f64 {
        if let Some(rc) = self.cutoff {
            if r > rc {
                return 0.0;
            }
        }
        match &self.kind {
            ProfileKind::Constant { c } => *c,
            ProfileKind::PowerLaw { c, a } => {
                if *c == 0.0 {
                    0.0
                } else if r == 0.0 {
                    if *a == 0.0 { *c } else { f64::INFINITY }
                } else {
                    c * r.powf(-a)
                }
            }
            ProfileKind::CriticalLog { c } => {
                if *c == 0.0 {
                    0.0
                } else if r == 0.0 {
                    f64::INFINITY
                } else {
                    c * critical_shape(self.dim, r)
                }
            }
            ProfileKind::Barenblatt { cb, t0, m } => barenblatt_value(self.dim, *m, *cb, *t0, r),
            ProfileKind::Gridded(f) => f.value_at(r),
            ProfileKind::Rescaled { inner, lambda, factor } => factor * inner.eval(lambda * r),
        }
    }

    fn check_gauge(&self, gauge: &Gauge) -> Result<()> {
        let n = self.dim as f64;
        match (&self.kind, gauge) {
            (ProfileKind::Rescaled { inner, .. }, _) => inner.check_gauge(gauge),
            (ProfileKind::PowerLaw { a, c }, Gauge::Power(q)) if *c > 0.0 && a * q >= n => {
                Err(Error::Integrability(format!("|x|^-{} not integrable near 0 in N = {}", a * q, self.dim)))
            }
            (ProfileKind::CriticalLog { c }, Gauge::Power(q)) if *c > 0.0 && *q > 1.0 => Err(
                Error::Integrability(format!("critical profile to the power {q} is not integrable")),
            ),
            (ProfileKind::CriticalLog { c }, Gauge::Psi { alpha, .. }) if *c > 0.0 && *alpha >= n / 2.0 => {
                Err(Error::Integrability(format!(
                    "Psi_{alpha} of the critical profile is not integrable (needs alpha < N/2)"
                )))
            }
            _ => Ok(()),
        }
    }

    /// `int_{r0 < |x| < r1} g(f(|x|)) dx`.
    pub fn shell_integral(&self, gauge: &Gauge, r0: f64, r1: f64, tol: f64) -> Result<f64> {
        self.shell_integral_impl(gauge, r0, r1, tol, true)
    }

    /// Same as [`shell_integral`](Self::shell_integral) but never uses a closed form.
    pub fn shell_integral_numeric(&self, gauge: &Gauge, r0: f64, r1: f64, tol: f64) -> Result<f64> {
        self.shell_integral_impl(gauge, r0, r1, tol, false)
    }

    fn shell_integral_impl(&self, gauge: &Gauge, r0: f64, r1: f64, tol: f64, closed: bool) -> Result<f64> {
        self.check_gauge(gauge)?;
        let r1 = match self.cutoff {
            Some(rc) => r1.min(rc),
            None => r1,
        };
        if !(r1 > r0) {
            return Ok(0.0);
        }
        let dim = self.dim;
        let n = dim as f64;
        let area = unit_sphere_area(dim);
        match &self.kind {
            ProfileKind::Constant { c } => {
                return Ok(gauge.apply(*c) * (ball_volume(dim, r1) - ball_volume(dim, r0)));
            }
            ProfileKind::PowerLaw { c, a } if closed => {
                let pw = match gauge {
                    Gauge::Identity => Some((*c, *a)),
                    Gauge::Power(q) => Some((c.powf(*q), a * q)),
                    _ => None,
                };
                if let Some((k, b)) = pw {
                    if k == 0.0 {
                        return Ok(0.0);
                    }
                    let e = n - b;
                    return Ok(area * k * (r1.powf(e) - r0.powf(e)) / e);
                }
            }
            ProfileKind::Gridded(f) => {
                let g = |v: f64| gauge.apply(v);
                return Ok(f.centered_integral(r1, g) - f.centered_integral(r0, g));
            }
            ProfileKind::Rescaled { inner, lambda, factor } => {
                let (g, mult) = match *gauge {
                    Gauge::Identity => (Gauge::Identity, *factor),
                    Gauge::Power(q) => (Gauge::Power(q), factor.powf(q)),
                    Gauge::Psi { alpha, scale } => (Gauge::Psi { alpha, scale: scale * factor }, 1.0),
                };
                let v = inner.shell_integral_impl(&g, lambda * r0, lambda * r1, tol, closed)?;
                return Ok(mult * v * lambda.powi(-(dim as i32)));
            }
            _ => {}
        }
        let singular = matches!(self.kind, ProfileKind::PowerLaw { .. } | ProfileKind::CriticalLog { .. });
        if singular {
            // tau = ln r: integrand g(f(e^tau)) e^{N tau}, evaluated in log space so
            // the tail tau -> -inf survives underflow of e^tau
            let h = |tau: f64| self.log_space_integrand(gauge, tau);
            let t1 = r1.ln();
            let val = if r0 > 0.0 {
                integrate(h, r0.ln(), t1, tol, 0.0)?.value
            } else {
                integrate_from_neg_inf(h, t1, tol, 0.0)?.value
            };
            Ok(area * val)
        } else {
            let h = |r: f64| gauge.apply(self.eval(r)) * r.powi(dim as i32 - 1);
            Ok(area * integrate(h, r0, r1, tol, 0.0)?.value)
        }
    }

    /// `(ln f(e^tau), ln(f(e^tau) e^{N tau}))` for the singular families; the
    /// second entry is formed analytically to avoid cancellation for large `|tau|`.
    fn log_values(&self, tau: f64) -> (f64, f64) {
        let n = self.dim as f64;
        match self.kind {
            ProfileKind::PowerLaw { c, a } => (c.ln() - a * tau, c.ln() + (n - a) * tau),
            ProfileKind::CriticalLog { c } => {
                // ln(e + e^{-tau})
                let l = if -tau > 1.0 {
                    -tau + (1.0 + tau).exp().ln_1p()
                } else {
                    (std::f64::consts::E + (-tau).exp()).ln()
                };
                let w = c.ln() - (0.5 * n + 1.0) * l.ln();
                (w - n * tau, w)
            }
            _ => {
                let lf = self.eval(tau.exp()).ln();
                (lf, lf + n * tau)
            }
        }
    }

    fn log_space_integrand(&self, gauge: &Gauge, tau: f64) -> f64 {
        let n = self.dim as f64;
        let (lf, lw) = self.log_values(tau);
        if lw == f64::NEG_INFINITY {
            return 0.0;
        }
        let v = match *gauge {
            Gauge::Identity => lw.exp(),
            Gauge::Power(q) => (q * lw + (1.0 - q) * n * tau).exp(),
            Gauge::Psi { alpha, scale } => {
                if scale == 0.0 {
                    return 0.0;
                }
                let ly = scale.ln() + lf;
                let log_term = if ly > 30.0 {
                    ly + std::f64::consts::E * (-ly).exp()
                } else {
                    (std::f64::consts::E + ly.exp()).ln()
                };
                scale * lw.exp() * log_term.powf(alpha)
            }
        };
        if v.is_finite() { v } else { 0.0 }
    }

    /// `int_{B(z, sigma)} g(f) dx` with `|z| = d`.
    pub fn ball_integral(&self, gauge: &Gauge, d: f64, sigma: f64, tol: f64) -> Result<f64> {
        self.ball_integral_impl(gauge, d, sigma, tol, true)
    }

    fn ball_integral_impl(&self, gauge: &Gauge, d: f64, sigma: f64, tol: f64, closed: bool) -> Result<f64> {
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("ball radius {sigma} must be > 0")));
        }
        let d = d.abs();
        let shell = |a: f64, b: f64| self.shell_integral_impl(gauge, a, b, tol, closed);
        if d == 0.0 {
            return shell(0.0, sigma);
        }
        if let ProfileKind::Constant { c } = self.kind {
            if self.cutoff.is_none() {
                return Ok(gauge.apply(c) * ball_volume(self.dim, sigma));
            }
        }
        if let ProfileKind::Gridded(f) = &self.kind {
            let g = |v: f64| gauge.apply(v);
            return Ok(match self.cutoff {
                Some(rc) => f.truncated(rc).ball_integral(d, sigma, g),
                None => f.ball_integral(d, sigma, g),
            });
        }
        if self.dim == 1 {
            // (d - sigma, d + sigma) for an even integrand
            return if d >= sigma {
                Ok(0.5 * shell(d - sigma, d + sigma)?)
            } else {
                Ok(shell(0.0, sigma - d)? + 0.5 * shell(sigma - d, sigma + d)?)
            };
        }
        let core = if d < sigma { shell(0.0, sigma - d)? } else { 0.0 };
        let lo = (d - sigma).abs();
        let hi = match self.cutoff {
            Some(rc) => (d + sigma).min(rc),
            None => d + sigma,
        };
        if hi <= lo {
            return Ok(core);
        }
        let dim = self.dim;
        let h = |tau: f64| {
            let r = tau.exp();
            let v = gauge.apply(self.eval(r)) * sphere_in_ball(dim, r, d, sigma) * r;
            if v.is_finite() { v } else { 0.0 }
        };
        let floor = hi * 1e-14;
        let (lens, extra) = if lo > floor {
            (integrate(h, lo.ln(), hi.ln(), tol, 0.0)?.value, 0.0)
        } else {
            // tangent to the origin: the sphere fraction inside tends to 1/2
            (integrate(h, floor.ln(), hi.ln(), tol, 0.0)?.value, 0.5 * shell(0.0, floor)?)
        };
        Ok(core + lens + extra)
    }

    /// Average of `f` over `B(z, sigma)`.
    pub fn ball_average(&self, d: f64, sigma: f64, tol: f64) -> Result<f64> {
        Ok(self.ball_integral(&Gauge::Identity, d, sigma, tol)? / ball_volume(self.dim, sigma))
    }

    /// Ball average computed by quadrature only (cross-check of the closed forms).
    pub fn ball_average_numeric(&self, d: f64, sigma: f64, tol: f64) -> Result<f64> {
        Ok(self.ball_integral_impl(&Gauge::Identity, d, sigma, tol, false)? / ball_volume(self.dim, sigma))
    }

    /// Average of `g(f)` over `B(z, sigma)`.
    pub fn gauge_average(&self, gauge: &Gauge, d: f64, sigma: f64, tol: f64) -> Result<f64> {
        Ok(self.ball_integral(gauge, d, sigma, tol)? / ball_volume(self.dim, sigma))
    }
}

/// `|x|^{-N} [ln(e + 1/|x|)]^{-N/2 - 1}`
pub fn critical_shape(dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    let l = if r < 1e-10 {
        -r.ln() + (std::f64::consts::E * r).ln_1p()
    } else {
        (std::f64::consts::E + 1.0 / r).ln()
    };
    r.powi(-(dim as i32)) * l.powf(-0.5 * n - 1.0)
}

/// `U(r, t) = t^{-N/kappa} (C_B + (1-m)/(2 m kappa) r^2 t^{-2/kappa})^{-1/(1-m)}`.
pub fn barenblatt_value(dim: usize, m: f64, cb: f64, t: f64, r: f64) -> f64 {
    let n = dim as f64;
    let kappa = n * (m - 1.0) + 2.0;
    let k = (1.0 - m) / (2.0 * m * kappa);
    t.powf(-n / kappa) * (cb + k * r * r * t.powf(-2.0 / kappa)).powf(-1.0 / (1.0 - m))
}

/// The sharp singular profile: critical-log at `p = p_m`, `c |x|^{-2/(p-m)}` above.
pub fn critical_profile(params: &ProblemParams, c: f64) -> Result<RadialProfile> {
    match params.regime() {
        Regime::Critical => RadialProfile::critical_log(params.dim(), c),
        Regime::Supercritical => RadialProfile::power_law(params.dim(), c, params.scaling_exponent()),
        Regime::Subcritical => Err(Error::Regime(
            "no sharp singular profile in the subcritical regime".into(),
        )),
    }
}
