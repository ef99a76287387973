//! Problem parameters `(N, m, p)` and the exponents derived from them.

use crate::error::{Error, Result};

/// Default relative tolerance for deciding `p == p_m`.
pub const CRITICAL_REL_TOL: f64 = 1e-12;

/// Space dimension `N`, diffusion exponent `m` and source exponent `p`
/// for `u_t = Δu^m + u^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    dim: usize,
    m: f64,
    p: f64,
}

impl ProblemParams {
    pub fn new(dim: usize, m: f64, p: f64) -> Result<Self> {
        let mut bad = Vec::new();
        if dim < 1 {
            bad.push(format!("N = {dim} must be >= 1"));
        }
        if !(m > 0.0 && m < 1.0) {
            bad.push(format!("m = {m} must lie in (0, 1)"));
        }
        if !(p > 1.0 && p.is_finite()) {
            bad.push(format!("p = {p} must be > 1"));
        }
        if bad.is_empty() {
            Ok(Self { dim, m, p })
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same `(N, m)` with a different source exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.dim, self.m, p)
    }

    pub fn exponents(&self) -> Exponents {
        derive_exponents(self)
    }

    pub fn regime(&self) -> Regime {
        classify_regime(self, CRITICAL_REL_TOL)
    }

    /// `2 / (p - m)`, the homogeneity of the scale-invariant profile.
    pub fn scaling_exponent(&self) -> f64 {
        2.0 / (self.p - self.m)
    }

    /// `N (p - m) / 2`, the Morrey index `q` of the supercritical condition.
    pub fn morrey_index(&self) -> f64 {
        self.dim as f64 * (self.p - self.m) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    /// `m + 2/N`
    pub p_m: f64,
    /// `(p - m) / (2 (p - 1))`
    pub theta: f64,
    /// `1 / theta`
    pub theta_prime: f64,
    /// `N (m - 1) + 2`
    pub kappa: f64,
}

pub fn derive_exponents(params: &ProblemParams) -> Exponents {
    let n = params.dim as f64;
    let (m, p) = (params.m, params.p);
    Exponents {
        p_m: m + 2.0 / n,
        theta: (p - m) / (2.0 * (p - 1.0)),
        theta_prime: 2.0 * (p - 1.0) / (p - m),
        kappa: n * (m - 1.0) + 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::Subcritical => "Subcritical",
            Regime::Critical => "Critical",
            Regime::Supercritical => "Supercritical",
        };
        f.write_str(s)
    }
}

/// Critical when `|p - p_m| <= rel_tol * max(1, p_m)`.
pub fn classify_regime(params: &ProblemParams, rel_tol: f64) -> Regime {
    let p_m = derive_exponents(params).p_m;
    let diff = params.p - p_m;
    if diff.abs() <= rel_tol * p_m.max(1.0) {
        Regime::Critical
    } else if diff < 0.0 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaR {
    pub value: f64,
    pub positive: bool,
}

/// `kappa_r = N (m - 1) + 2 r`, the exponent of the L^r -> L^inf smoothing bound.
pub fn kappa_r(params: &ProblemParams, r: f64) -> Result<KappaR> {
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("r = {r} must be >= 1")));
    }
    let value = params.dim as f64 * (params.m - 1.0) + 2.0 * r;
    Ok(KappaR {
        value,
        positive: value > 0.0,
    })
}

/// Open interval `(lo, hi)`; empty when `lo >= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

/// Exponents `beta` with `1 < beta < N (p - m)/2` and `N (m - 1) + 2 beta > 0`.
pub fn admissible_beta_range(params: &ProblemParams) -> Result<OpenInterval> {
    let regime = params.regime();
    if regime != Regime::Supercritical {
        return Err(Error::Regime(format!(
            "beta range needs the supercritical regime, got {regime}"
        )));
    }
    let n = params.dim as f64;
    // kappa_beta > 0  <=>  beta > N (1 - m) / 2
    let lo = 1.0f64.max(n * (1.0 - params.m) / 2.0);
    Ok(OpenInterval {
        lo,
        hi: params.morrey_index(),
    })
}
