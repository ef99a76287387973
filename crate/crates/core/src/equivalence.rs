//! Measured constants for the two-sided comparisons satisfied by
//! `Psi_alpha`, its inverse and `gamma` over bounded sample ranges.

use crate::error::{Error, Result};
use crate::special::{eta, log_e_plus, GammaFn, OrliczPsi};

pub const PSI_INV_TOL: f64 = 1e-14;

/// Observed range of a ratio that should stay bounded above and below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

impl RatioRange {
    fn collect(ratios: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut r = RatioRange { min: f64::INFINITY, max: 0.0, samples: 0 };
        for v in ratios {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("ratio {v} is not finite and positive")));
            }
            r.min = r.min.min(v);
            r.max = r.max.max(v);
            r.samples += 1;
        }
        if r.samples == 0 {
            return Err(Error::InsufficientSamples("no sample points".into()));
        }
        Ok(r)
    }

    /// Smallest `C` with `1/C <= ratio <= C` on every sample.
    pub fn constant(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }
}

/// `n` points log-spaced on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// `Psi_alpha^{-1}(xi) / (xi [ln(e + xi)]^{-alpha})`; `xi = 0` contributes its limit 1.
pub fn psi_inverse_equivalence(alpha: f64, xis: &[f64]) -> Result<RatioRange> {
    let psi = OrliczPsi::new(alpha)?;
    let ratios = xis
        .iter()
        .map(|&xi| {
            if xi == 0.0 {
                Ok(1.0)
            } else {
                Ok(psi.inverse(xi, PSI_INV_TOL)? / (xi * log_e_plus(xi).powf(-alpha)))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    RatioRange::collect(ratios)
}

/// `Psi_alpha(k xi) / Psi_alpha(xi)`; `xi = 0` contributes its limit `k`.
pub fn psi_homogeneity(alpha: f64, k: f64, xis: &[f64]) -> Result<RatioRange> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k = {k} must be finite and > 0")));
    }
    let psi = OrliczPsi::new(alpha)?;
    RatioRange::collect(xis.iter().map(|&xi| if xi == 0.0 { k } else { psi.apply(k * xi) / psi.apply(xi) }))
}

/// Largest `Psi^{-1}(a + b) / (Psi^{-1}(a) + Psi^{-1}(b))` over all pairs
/// drawn from `values` (pairs with `a = b = 0` are skipped).
pub fn psi_inverse_subadditivity(alpha: f64, values: &[f64]) -> Result<f64> {
    let psi = OrliczPsi::new(alpha)?;
    let inv = values
        .iter()
        .map(|&v| psi.inverse(v, PSI_INV_TOL))
        .collect::<Result<Vec<f64>>>()?;
    let mut worst = 0.0f64;
    for (i, &a) in values.iter().enumerate() {
        for (j, &b) in values.iter().enumerate().skip(i) {
            let denom = inv[i] + inv[j];
            if denom == 0.0 {
                continue;
            }
            worst = worst.max(psi.inverse(a + b, PSI_INV_TOL)? / denom);
        }
    }
    Ok(worst)
}

/// `gamma(xi)^2 eta(gamma(xi))^{m-1} / xi` on the given points of `(0, 1]`.
pub fn gamma_equivalence(g: &GammaFn, xis: &[f64]) -> Result<RatioRange> {
    let m = g.params().m();
    let n = g.params().dim();
    let ratios = xis
        .iter()
        .map(|&xi| {
            if !(xi > 0.0) {
                return Err(Error::Domain(format!("xi = {xi} must be > 0")));
            }
            let gam = g.eval(xi)?;
            Ok(gam * gam * eta(n, gam)?.powf(m - 1.0) / xi)
        })
        .collect::<Result<Vec<f64>>>()?;
    RatioRange::collect(ratios)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ProblemParams;

    #[test]
    fn ranges_and_constants() {
        let r = RatioRange::collect([0.5, 2.0, 1.0]).unwrap();
        assert_eq!(r.constant(), 2.0);
        let r = RatioRange::collect([0.1, 3.0]).unwrap();
        assert!((r.constant() - 10.0).abs() < 1e-12);
        assert!(RatioRange::collect([0.0]).is_err());
        assert!(RatioRange::collect(std::iter::empty()).is_err());
        let g = log_grid(1e-2, 1e2, 5);
        assert!((g[2] - 1.0).abs() < 1e-12 && (g[4] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn alpha_zero_is_exact() {
        let xis = log_grid(1e-6, 1e6, 50);
        let r = psi_inverse_equivalence(0.0, &xis).unwrap();
        assert!((r.min - 1.0).abs() < 1e-12 && (r.max - 1.0).abs() < 1e-12);
        let h = psi_homogeneity(0.0, 3.0, &xis).unwrap();
        assert!((h.min - 3.0).abs() < 1e-12 && (h.max - 3.0).abs() < 1e-12);
        let s = psi_inverse_subadditivity(0.0, &[0.0, 1.0, 5.0]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measured_constants_are_moderate() {
        let mut xis = vec![0.0];
        xis.extend(log_grid(1e-8, 1e8, 161));
        for alpha in [0.5, 1.0, 2.0] {
            let r = psi_inverse_equivalence(alpha, &xis).unwrap();
            assert!(r.constant() <= 10.0, "{alpha}: {r:?}");
        }
        let g = GammaFn::new(ProblemParams::new(2, 0.5, 1.5).unwrap()).unwrap();
        let r = gamma_equivalence(&g, &log_grid(1e-6, 1.0, 61)).unwrap();
        assert!(r.min > 0.0 && r.max.is_finite());
        assert!(gamma_equivalence(&g, &[0.0]).is_err());
    }
}
