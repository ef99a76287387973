//! Orlicz gauge `Psi_alpha`, the log-corrected weight `eta`, and the
//! implicit reparametrisation `gamma` used by the critical-case norm.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::exponents::ProblemParams;
use crate::quad::integrate_to_inf;

/// `ln(e + x)` for `x >= 0`, accurate for large `x`.
pub fn log_e_plus(x: f64) -> f64 {
    if x > 1e10 {
        x.ln() + (E / x).ln_1p()
    } else {
        (E + x).ln()
    }
}

/// `ln(e + 1/xi)` for `xi > 0` without forming `1/xi`.
fn log_e_plus_recip(xi: f64) -> f64 {
    if xi < 1e-10 {
        -xi.ln() + (E * xi).ln_1p()
    } else {
        (E + 1.0 / xi).ln()
    }
}

/// `Psi_alpha(xi) = xi [ln(e + xi)]^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrliczPsi {
    alpha: f64,
}

impl OrliczPsi {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha = {alpha} must be >= 0")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Value without the domain check; callers guarantee `xi >= 0`.
    #[inline]
    pub fn apply(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            0.0
        } else if self.alpha == 0.0 {
            xi
        } else {
            xi * log_e_plus(xi).powf(self.alpha)
        }
    }

    pub fn derivative(&self, xi: f64) -> f64 {
        if self.alpha == 0.0 {
            return 1.0;
        }
        let l = log_e_plus(xi);
        l.powf(self.alpha) + self.alpha * xi * l.powf(self.alpha - 1.0) / (E + xi)
    }

    pub fn eval(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) {
            return Err(Error::Domain(format!("Psi argument {xi} must be >= 0")));
        }
        Ok(self.apply(xi))
    }

    /// Inverse by bisection on `[0, y]` (valid since `Psi(y) >= y`) followed
    /// by one Newton step. Succeeds when `|Psi(x) - y| <= tol * max(1, y)`.
    pub fn inverse(&self, y: f64, tol: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("Psi^-1 argument {y} must be >= 0")));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance {tol} must be > 0")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if !y.is_finite() {
            return Ok(f64::INFINITY);
        }
        if self.alpha == 0.0 {
            return Ok(y);
        }
        let target = tol * y.max(1.0);
        let mut lo = 0.0;
        let mut hi = y;
        let mut iterations = 0;
        while hi - lo > 4.0 * f64::EPSILON * hi && iterations < 200 {
            let mid = 0.5 * (lo + hi);
            if self.apply(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }
        let x0 = 0.5 * (lo + hi);
        let x1 = x0 - (self.apply(x0) - y) / self.derivative(x0);
        let r0 = (self.apply(x0) - y).abs();
        let (x, r) = if x1 >= lo && x1 <= hi {
            let r1 = (self.apply(x1) - y).abs();
            if r1 < r0 { (x1, r1) } else { (x0, r0) }
        } else {
            (x0, r0)
        };
        if r <= target {
            Ok(x)
        } else {
            Err(Error::NonConvergence { iterations, residual: r })
        }
    }
}

pub fn psi(alpha: f64, xi: f64) -> Result<f64> {
    OrliczPsi::new(alpha)?.eval(xi)
}

pub fn psi_inv(alpha: f64, y: f64, tol: f64) -> Result<f64> {
    OrliczPsi::new(alpha)?.inverse(y, tol)
}

/// `eta(xi) = xi^N [ln(e + 1/xi)]^{N/2}`, with `eta(0) = 0`.
pub fn eta(dim: usize, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::Domain(format!("eta argument {xi} must be >= 0")));
    }
    Ok(eta_unchecked(dim, xi))
}

#[inline]
pub(crate) fn eta_unchecked(dim: usize, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    let n = dim as f64;
    xi.powi(dim as i32) * log_e_plus_recip(xi).powf(0.5 * n)
}

/// Integrand of `int_0^g s eta(s)^{m-1} ds` after `s = e^{-tau}`:
/// `e^{-kappa tau} [ln(e + e^tau)]^{N(m-1)/2}`.
fn gamma_integrand(kappa: f64, log_power: f64, tau: f64) -> f64 {
    let l = if tau > 1.0 {
        tau + (1.0 - tau).exp().ln_1p()
    } else {
        (E + tau.exp()).ln()
    };
    (-kappa * tau).exp() * l.powf(log_power)
}

/// `int_0^g s eta(s)^{m-1} ds` for `g in (0, 1]`.
fn eta_cumulative(params: &ProblemParams, g: f64) -> Result<f64> {
    let kappa = params.exponents().kappa;
    let lp = params.dim() as f64 * (params.m() - 1.0) / 2.0;
    let tau0 = -g.ln();
    let r = integrate_to_inf(|t| gamma_integrand(kappa, lp, t), tau0, 1e-13, 1e-300)?;
    Ok(r.value)
}

/// `C_eta = int_0^1 s eta(s)^{m-1} ds`; requires `kappa > 0`.
pub fn c_eta(params: &ProblemParams) -> Result<f64> {
    let kappa = params.exponents().kappa;
    if !(kappa > 0.0) {
        return Err(Error::Integrability(format!(
            "C_eta diverges for kappa = {kappa} <= 0"
        )));
    }
    eta_cumulative(params, 1.0)
}

const GAMMA_TABLE: usize = 1024;
/// Smallest tabulated `ln xi`; below it `gamma` is solved directly.
const GAMMA_LOG_MIN: f64 = -30.0;

/// `gamma` on `[0, 1]`, defined by `int_0^{gamma(xi)} s eta(s)^{m-1} ds = C_eta xi`.
///
/// Values come from a monotone cubic table of `ln gamma` against `ln xi`
/// (1024 nodes on `[e^-30, 1]`); below the table the implicit equation is
/// solved directly.
#[derive(Debug, Clone)]
pub struct GammaFn {
    params: ProblemParams,
    c_eta: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl GammaFn {
    pub fn new(params: ProblemParams) -> Result<Self> {
        let c = c_eta(&params)?;
        let nodes: Vec<f64> = (0..GAMMA_TABLE)
            .map(|k| GAMMA_LOG_MIN * (1.0 - k as f64 / (GAMMA_TABLE - 1) as f64))
            .collect();
        let mut values = Vec::with_capacity(GAMMA_TABLE);
        for &x in &nodes {
            values.push(solve_gamma(&params, c, x.exp())?.ln());
        }
        let slopes = pchip_slopes(&nodes, &values);
        Ok(Self { params, c_eta: c, nodes, values, slopes })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn c_eta(&self) -> f64 {
        self.c_eta
    }

    pub fn eval(&self, xi: f64) -> Result<f64> {
        check_unit(xi)?;
        if xi == 0.0 || xi == 1.0 {
            return Ok(xi);
        }
        let x = xi.ln();
        if x < GAMMA_LOG_MIN {
            return self.eval_exact(xi);
        }
        let h = self.nodes[1] - self.nodes[0];
        let k = (((x - GAMMA_LOG_MIN) / h) as usize).min(GAMMA_TABLE - 2);
        let t = (x - self.nodes[k]) / h;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let log_gamma = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        Ok(log_gamma.exp().min(1.0))
    }

    /// Direct root-find of the implicit equation, bypassing the table.
    pub fn eval_exact(&self, xi: f64) -> Result<f64> {
        check_unit(xi)?;
        solve_gamma(&self.params, self.c_eta, xi)
    }
}

pub fn gamma_fn(g: &GammaFn, xi: f64) -> Result<f64> {
    g.eval(xi)
}

fn check_unit(xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::Domain(format!("gamma argument {xi} outside [0, 1]")));
    }
    Ok(())
}

/// Safeguarded Newton in `tau = -ln gamma`.
fn solve_gamma(params: &ProblemParams, c: f64, xi: f64) -> Result<f64> {
    if xi == 0.0 {
        return Ok(0.0);
    }
    if xi == 1.0 {
        return Ok(1.0);
    }
    let kappa = params.exponents().kappa;
    let lp = params.dim() as f64 * (params.m() - 1.0) / 2.0;
    let target = c * xi;
    // G(tau) = int_tau^inf integrand, decreasing in tau
    let g = |tau: f64| -> Result<f64> {
        Ok(integrate_to_inf(|t| gamma_integrand(kappa, lp, t), tau, 1e-13, 1e-300)?.value)
    };
    let mut lo = 0.0; // G(lo) = c >= target
    let mut hi = 1.0;
    while g(hi)? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NonConvergence { iterations: 0, residual: target });
        }
    }
    let mut tau = 0.5 * (lo + hi);
    for it in 0..200 {
        let val = g(tau)? - target;
        if val > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        if val.abs() <= 1e-14 * target || hi - lo <= 1e-15 * hi.max(1.0) {
            return Ok((-tau).exp());
        }
        let deriv = -gamma_integrand(kappa, lp, tau);
        let next = tau - val / deriv;
        tau = if next > lo && next < hi && deriv != 0.0 {
            next
        } else {
            0.5 * (lo + hi)
        };
        if it == 199 {
            return Err(Error::NonConvergence { iterations: 200, residual: val });
        }
    }
    Ok((-tau).exp())
}

/// Fritsch–Butland slopes for monotone piecewise-cubic interpolation.
pub(crate) fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for k in 1..n - 1 {
        if del[k - 1] * del[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    d[0] = pchip_end(h[0], h[1], del[0], del[1]);
    d[n - 1] = pchip_end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

fn pchip_end(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // values from a 30-digit mpmath evaluation
    const LN_E_PLUS_1: f64 = 1.313_261_687_518_222_8;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(1.0, 0.0).unwrap(), 0.0);
        let xi = E * E - E;
        assert!((psi(2.0, xi).unwrap() - 4.0 * xi).abs() < 1e-13);
        assert!((4.0 * xi - 18.683098).abs() < 1e-6);
        assert!((psi(1.0, 1.0).unwrap() - LN_E_PLUS_1).abs() < 1e-15);
        assert!(psi(1.0, -1.0).is_err());
        assert!(psi(-0.5, 1.0).is_err());
    }

    #[test]
    fn psi_inv_examples() {
        let x = psi_inv(2.0, 18.683098, 1e-14).unwrap();
        assert!((x - 4.670774).abs() < 1e-6);
        assert_eq!(psi_inv(0.7, 0.0, 1e-12).unwrap(), 0.0);
        let x = psi_inv(1.0, 10.0, 1e-14).unwrap();
        assert!((x - 4.918_801_124_878_644).abs() < 1e-12, "{x}");
        assert!(psi_inv(1.0, -1.0, 1e-12).is_err());
        assert!(psi_inv(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(2, 0.0).unwrap(), 0.0);
        assert!((eta(2, 1.0).unwrap() - LN_E_PLUS_1).abs() < 1e-15);
        assert!((eta(1, 1.0).unwrap() - 1.145_976_303_209_723).abs() < 1e-14);
        assert!(eta(1, -0.1).is_err());
        // tiny arguments stay finite and positive
        let v = eta(1, 1e-300).unwrap();
        assert!(v > 0.0 && v < 1e-298);
    }

    #[test]
    fn eta_increasing() {
        for n in 1..=3 {
            let mut prev = 0.0;
            for k in 1..=1000 {
                let v = eta(n, k as f64 / 1000.0).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn c_eta_values() {
        let cases = [
            (1, 0.5, 0.597_306_743_267_805_3),
            (2, 0.5, 0.771_023_183_185_025_4),
            (2, 0.8, 0.573_622_262_374_984_1),
        ];
        for (n, m, expect) in cases {
            let p = ProblemParams::new(n, m, 2.0).unwrap();
            let c = c_eta(&p).unwrap();
            assert!(((c - expect) / expect).abs() < 1e-8, "{n} {m}: {c}");
        }
        let p = ProblemParams::new(4, 0.5, 2.0).unwrap();
        assert!(matches!(c_eta(&p), Err(Error::Integrability(_))));
    }

    #[test]
    fn c_eta_integrand_endpoint() {
        // at s = 1 the integrand is eta(1)^{m-1}
        let p = ProblemParams::new(2, 0.5, 2.0).unwrap();
        let lp = -0.5;
        let v = gamma_integrand(p.exponents().kappa, lp, 0.0);
        let expect = eta(2, 1.0).unwrap().powf(-0.5);
        assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn gamma_values() {
        let p = ProblemParams::new(2, 0.5, 1.5).unwrap();
        let g = GammaFn::new(p).unwrap();
        assert_eq!(g.eval(0.0).unwrap(), 0.0);
        assert_eq!(g.eval(1.0).unwrap(), 1.0);
        let v = g.eval_exact(0.5).unwrap();
        assert!((v - 0.544_510_957_693_803).abs() < 1e-10, "{v}");
        let v = g.eval(0.5).unwrap();
        assert!((v - 0.544_510_957_693_803).abs() < 1e-8, "{v}");
        assert!(g.eval(1.5).is_err());
        assert!(g.eval(-0.1).is_err());

        let p = ProblemParams::new(1, 0.5, 2.5).unwrap();
        let g = GammaFn::new(p).unwrap();
        assert!((g.eval(0.5).unwrap() - 0.642_697_441_766_618).abs() < 1e-8);
    }

    #[test]
    fn gamma_table_matches_exact() {
        let p = ProblemParams::new(2, 0.8, 1.8).unwrap();
        let g = GammaFn::new(p).unwrap();
        for k in 0..400 {
            let xi = if k < 200 { (k as f64 + 0.37) / 200.0 } else { 10f64.powf(-(k - 200) as f64 / 20.0 - 0.13) };
            let a = g.eval(xi).unwrap();
            let b = g.eval_exact(xi).unwrap();
            assert!(((a - b) / b).abs() < 1e-8, "{xi}: {a} vs {b}");
        }
    }

    #[test]
    fn pchip_preserves_monotone_data() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 5.0, 5.0, 6.0];
        let d = pchip_slopes(&x, &y);
        assert!(d.iter().all(|v| *v >= 0.0));
        assert_eq!(d[1], 0.0);
        assert_eq!(d[4], 0.0);
    }
}
