//! Uniform local Morrey and Orlicz–Morrey norms of radial densities.
//!
//! All data here are radial, so a ball `B(z, sigma)` is described by the
//! distance `d = |z|` of its center from the origin. Norms are maxima of a
//! weighted ball quantity over a finite [`ScanGrid`] of `(d, sigma)` pairs.

use std::fmt;

use crate::error::{Error, Result};
use crate::exponents::{admissible_beta_range, ProblemParams, Regime};
use crate::field::GridField;
use crate::par::Exec;
use crate::profiles::{Gauge, ProfileKind, RadialProfile};
use crate::special::{eta, OrliczPsi};

pub const DEFAULT_PER_DECADE: usize = 64;
pub const DEFAULT_INFINITE_CAP: f64 = 1e6;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const PSI_INV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// `sigma^{N/q} (avg |f|^alpha)^{1/alpha}`
    Morrey { q: f64, alpha: f64 },
    /// `eta(sigma / length) * Psi_alpha^{-1}(avg Psi_alpha(amplitude * f))`
    OrliczEta { alpha: f64, length: f64, amplitude: f64 },
}

impl NormKind {
    pub fn morrey(q: f64, alpha: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidParams(format!("Morrey index q = {q} must be >= 1")));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("Morrey exponent alpha = {alpha} must be >= 1")));
        }
        Ok(NormKind::Morrey { q, alpha })
    }

    pub fn orlicz_eta(alpha: f64) -> Result<Self> {
        Self::orlicz_eta_scaled(alpha, 1.0, 1.0)
    }

    pub fn orlicz_eta_scaled(alpha: f64, length: f64, amplitude: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParams(format!("Orlicz exponent alpha = {alpha} must be > 0")));
        }
        if !(length > 0.0 && length.is_finite() && amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParams("Orlicz length and amplitude must be finite and > 0".into()));
        }
        Ok(NormKind::OrliczEta { alpha, length, amplitude })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub kind: NormKind,
    /// Radius cap `R`, possibly `+inf`.
    pub radius: f64,
}

impl NormSpec {
    pub fn new(kind: NormKind, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParams(format!("radius cap R = {radius} must be > 0")));
        }
        Ok(Self { kind, radius })
    }
}

/// Sampling summary attached to a [`NormResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResolution {
    pub centers: usize,
    pub radii: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl fmt::Display for ScanResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} centers x {} radii in [{:e}, {:e}]",
            self.centers, self.radii, self.r_min, self.r_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    pub value: f64,
    /// Distance of the maximizing center from the origin.
    pub arg_center: f64,
    pub arg_radius: f64,
    pub grid_resolution: ScanResolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvabilityVerdict {
    pub regime: Regime,
    pub condition_value: f64,
    pub delta: f64,
    pub met: bool,
    pub t_used: f64,
    pub arg_center: f64,
    pub arg_radius: f64,
}

/// Finite set of `(center distance, radius)` pairs to maximize over.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    centers: Vec<f64>,
    radii: Vec<f64>,
    exec: Exec,
    tol: f64,
}

impl ScanGrid {
    pub fn new(centers: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || radii.is_empty() {
            return Err(Error::EmptyScan);
        }
        if centers.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidParams("scan centers must be finite distances >= 0".into()));
        }
        if radii.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidParams("scan radii must be finite and > 0".into()));
        }
        Ok(Self { centers, radii, exec: Exec::default(), tol: DEFAULT_QUAD_TOL })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn resolution(&self) -> ScanResolution {
        let (lo, hi) = self
            .radii
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        ScanResolution { centers: self.centers.len(), radii: self.radii.len(), r_min: lo, r_max: hi }
    }
}

/// `per_decade` log-spaced radii from `r_min` up to and including `r_max`.
pub fn log_radii(r_min: f64, r_max: f64, per_decade: usize) -> Vec<f64> {
    if !(r_max > r_min) || per_decade == 0 {
        return vec![r_max];
    }
    let decades = (r_max / r_min).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..=n)
        .map(|k| if k == n { r_max } else { (a + (b - a) * k as f64 / n as f64).exp() })
        .collect()
}

/// How to build a [`ScanGrid`] for a given profile and radius cap.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    /// Smallest radius; `None` means the grid spacing for gridded data and
    /// `1e-6 * min(R, 1)` otherwise.
    pub r_min: Option<f64>,
    pub per_decade: usize,
    pub extra_centers: Vec<f64>,
    pub infinite_cap: f64,
    pub tol: f64,
    pub exec: Exec,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            r_min: None,
            per_decade: DEFAULT_PER_DECADE,
            extra_centers: Vec::new(),
            infinite_cap: DEFAULT_INFINITE_CAP,
            tol: DEFAULT_QUAD_TOL,
            exec: Exec::default(),
        }
    }
}

impl ScanOptions {
    /// Centers: the origin (where radially decreasing data peak) plus any
    /// extra centers; for gridded data every grid face.
    pub fn centers_for(&self, f: &RadialProfile) -> Vec<f64> {
        let mut centers = match f.kind() {
            ProfileKind::Gridded(g) => (0..=g.grid().cells()).map(|i| g.grid().face(i)).collect(),
            _ => vec![0.0],
        };
        centers.extend(self.extra_centers.iter().map(|d| d.abs()));
        centers
    }

    pub fn grid_for(&self, f: &RadialProfile, radius: f64) -> Result<ScanGrid> {
        let r_max = if radius.is_finite() { radius } else { self.infinite_cap };
        let r_min = match (self.r_min, f.kind()) {
            (Some(r), _) => r,
            (None, ProfileKind::Gridded(g)) => g.grid().dr(),
            (None, _) => 1e-6 * r_max.min(1.0),
        };
        ScanGrid::new(self.centers_for(f), log_radii(r_min, r_max, self.per_decade))
            .map(|g| g.with_exec(self.exec).with_tol(self.tol))
    }
}

/// `Psi_alpha^{-1}` of the average of `Psi_alpha(f)` over `B(z, sigma)`, `|z| = d`.
pub fn orlicz_ball_average(f: &RadialProfile, alpha: f64, d: f64, sigma: f64, tol: f64) -> Result<f64> {
    scaled_orlicz_average(f, alpha, 1.0, d, sigma, tol)
}

fn scaled_orlicz_average(
    f: &RadialProfile,
    alpha: f64,
    amplitude: f64,
    d: f64,
    sigma: f64,
    tol: f64,
) -> Result<f64> {
    let psi = OrliczPsi::new(alpha)?;
    let avg = f.gauge_average(&Gauge::psi(alpha, amplitude)?, d, sigma, tol)?;
    psi.inverse(avg, PSI_INV_TOL)
}

/// The weighted ball quantity whose supremum defines the norm.
pub fn ball_quantity(f: &RadialProfile, kind: &NormKind, d: f64, sigma: f64, tol: f64) -> Result<f64> {
    match *kind {
        NormKind::Morrey { q, alpha } => {
            let n = f.dim() as f64;
            let avg = if alpha == 1.0 {
                f.ball_average(d, sigma, tol)?
            } else {
                f.gauge_average(&Gauge::Power(alpha), d, sigma, tol)?.powf(1.0 / alpha)
            };
            Ok(sigma.powf(n / q) * avg)
        }
        NormKind::OrliczEta { alpha, length, amplitude } => {
            let w = eta(f.dim(), sigma / length)?;
            Ok(w * scaled_orlicz_average(f, alpha, amplitude, d, sigma, tol)?)
        }
    }
}

/// Supremum of the ball quantity over radii beyond the scanned cap, when a
/// closed form is available. Only radially decreasing families with known
/// decay are handled; `None` means no tail information.
fn tail_sup(f: &RadialProfile, spec: &NormSpec, cap: f64, tol: f64) -> Result<Option<f64>> {
    if spec.radius <= cap {
        return Ok(None);
    }
    let n = f.dim() as f64;
    let (q, alpha) = match spec.kind {
        NormKind::Morrey { q, alpha } => (q, alpha),
        NormKind::OrliczEta { .. } => {
            return Ok(match f.kind() {
                ProfileKind::Constant { c } | ProfileKind::PowerLaw { c, .. } if f.cutoff().is_none() => {
                    Some(if *c > 0.0 { f64::INFINITY } else { 0.0 })
                }
                _ => None,
            });
        }
    };
    // sigma^e growth of the centered quantity for large sigma
    let exponent = match (f.kind(), f.cutoff()) {
        (ProfileKind::Constant { c }, None) if *c == 0.0 => return Ok(Some(0.0)),
        (ProfileKind::Constant { .. }, None) => n / q,
        (ProfileKind::PowerLaw { a, .. }, None) => n / q - a,
        (ProfileKind::Gridded(_), _) | (_, Some(_)) => n / q - n / alpha,
        _ => return Ok(None),
    };
    if exponent > 1e-12 {
        let at_cap = ball_quantity(f, &spec.kind, 0.0, cap, tol)?;
        return Ok(Some(if at_cap > 0.0 { f64::INFINITY } else { 0.0 }));
    }
    Ok(Some(ball_quantity(f, &spec.kind, 0.0, cap, tol)?))
}

/// Maximum of the ball quantity over the scan grid, restricted to radii
/// `<= spec.radius`, with the closed-form tail for infinite caps.
pub fn norm(f: &RadialProfile, spec: &NormSpec, scan: &ScanGrid) -> Result<NormResult> {
    let radii: Vec<f64> = scan.radii.iter().copied().filter(|&s| s <= spec.radius).collect();
    if radii.is_empty() {
        return Err(Error::EmptyScan);
    }
    let pairs: Vec<(f64, f64)> = scan
        .centers
        .iter()
        .flat_map(|&d| radii.iter().map(move |&s| (d, s)))
        .collect();
    let tol = scan.tol;
    let values = scan.exec.map(&pairs, |&(d, s)| ball_quantity(f, &spec.kind, d, s, tol));
    let mut best = (f64::NEG_INFINITY, 0.0, radii[0]);
    for (v, &(d, s)) in values.into_iter().zip(&pairs) {
        let v = v?;
        if v > best.0 {
            best = (v, d, s);
        }
    }
    let cap = radii.iter().copied().fold(0.0, f64::max);
    if let Some(t) = tail_sup(f, spec, cap, tol)? {
        if t > best.0 {
            best = (t, 0.0, cap);
        }
    }
    Ok(NormResult {
        value: best.0.max(0.0),
        arg_center: best.1,
        arg_radius: best.2,
        grid_resolution: scan.resolution(),
    })
}

/// `sup_z int_{B(z, sigma)} f` over the given center distances.
pub fn sup_ball_mass(f: &RadialProfile, sigma: f64, centers: &[f64], exec: Exec, tol: f64) -> Result<(f64, f64)> {
    let masses = exec.map(centers, |&d| f.ball_integral(&Gauge::Identity, d, sigma, tol));
    let mut best = (0.0, 0.0);
    for (m, &d) in masses.into_iter().zip(centers) {
        let m = m?;
        if m > best.0 {
            best = (m, d);
        }
    }
    Ok(best)
}

/// `sup_z int_{B(z, k sigma)} f / sup_z int_{B(z, sigma)} f` for a radial
/// grid field, with centers at every face. Returns 1 for the zero field.
pub fn doubling_ratio(field: &GridField, sigma: f64, k: f64, exec: Exec) -> Result<f64> {
    if !(sigma > 0.0 && k >= 1.0) {
        return Err(Error::InvalidParams(format!("need sigma > 0 and k >= 1 (got {sigma}, {k})")));
    }
    let grid = field.grid();
    let centers: Vec<f64> = (0..=grid.cells()).map(|i| grid.face(i)).collect();
    let sup_mass = |s: f64| {
        exec.map(&centers, |&d| field.ball_integral(d, s, |v| v))
            .into_iter()
            .fold(0.0f64, f64::max)
    };
    let small = sup_mass(sigma);
    let large = sup_mass(k * sigma);
    Ok(if small == 0.0 { 1.0 } else { large / small })
}

/// Evaluates the regime-appropriate smallness condition on the initial data.
///
/// * subcritical: `sup_z mu(B(z, T^theta)) / T^{theta (N - 2/(p-m))}`
/// * critical: `sup eta(sigma/T^theta) Psi^{-1}(avg Psi(T^{1/(p-1)} mu))` over `sigma < T^theta`
/// * supercritical: `|||mu|||_{N(p-m)/2, beta; T^theta}`
///
/// `beta_or_alpha` is the Orlicz exponent in the critical case and the
/// Morrey exponent in the supercritical case; it is ignored otherwise.
pub fn check_condition(
    params: &ProblemParams,
    f: &RadialProfile,
    t: f64,
    delta: f64,
    beta_or_alpha: f64,
    opts: &ScanOptions,
) -> Result<SolvabilityVerdict> {
    if f.dim() != params.dim() {
        return Err(Error::InvalidParams(format!(
            "profile dimension {} does not match N = {}",
            f.dim(),
            params.dim()
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("T = {t} must be > 0")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParams(format!("delta = {delta} must be > 0")));
    }
    let regime = params.regime();
    let theta = params.exponents().theta;
    let radius = t.powf(theta);
    if regime != Regime::Supercritical && !t.is_finite() {
        return Err(Error::Regime(format!("T must be finite in the {regime} regime")));
    }
    let (value, center, sigma) = match regime {
        Regime::Subcritical => {
            let n = params.dim() as f64;
            let centers = opts.centers_for(f);
            let (mass, d) = sup_ball_mass(f, radius, &centers, opts.exec, opts.tol)?;
            let scale = t.powf(theta * (n - params.scaling_exponent()));
            (mass / scale, d, radius)
        }
        Regime::Critical => {
            if !(beta_or_alpha > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "critical condition needs alpha > 0, got {beta_or_alpha}"
                )));
            }
            let amplitude = t.powf(1.0 / (params.p() - 1.0));
            let kind = NormKind::orlicz_eta_scaled(beta_or_alpha, radius, amplitude)?;
            let spec = NormSpec::new(kind, radius)?;
            let r = norm(f, &spec, &opts.grid_for(f, radius)?)?;
            (r.value, r.arg_center, r.arg_radius)
        }
        Regime::Supercritical => {
            let range = admissible_beta_range(params)?;
            if !range.contains(beta_or_alpha) {
                return Err(Error::InvalidParams(format!(
                    "beta = {beta_or_alpha} outside the admissible range ({}, {})",
                    range.lo, range.hi
                )));
            }
            let kind = NormKind::morrey(params.morrey_index(), beta_or_alpha)?;
            let spec = NormSpec::new(kind, radius)?;
            let r = norm(f, &spec, &opts.grid_for(f, radius)?)?;
            (r.value, r.arg_center, r.arg_radius)
        }
    };
    Ok(SolvabilityVerdict {
        regime,
        condition_value: value,
        delta,
        met: value <= delta,
        t_used: t,
        arg_center: center,
        arg_radius: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, GridField};
    use std::sync::Arc;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn orlicz_average_of_constants_and_zero() {
        let f = RadialProfile::constant(2, 3.5).unwrap();
        for &(a, d, s) in &[(0.5, 0.0, 1.0), (1.0, 2.0, 0.3), (2.0, 0.7, 5.0)] {
            let v = orlicz_ball_average(&f, a, d, s, 1e-10).unwrap();
            assert!(rel(v, 3.5) < 1e-12, "{v}");
        }
        let z = RadialProfile::zero(3).unwrap();
        assert_eq!(orlicz_ball_average(&z, 1.0, 0.5, 0.5, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn orlicz_average_power_law_1d() {
        let f = RadialProfile::power_law(1, 1.0, 0.8).unwrap();
        let v = orlicz_ball_average(&f, 1.0, 0.0, 0.1, 1e-12).unwrap();
        assert!(rel(v, 47.64842202138086) < 1e-9, "{v}");
    }

    #[test]
    fn orlicz_average_critical_2d() {
        let f = RadialProfile::critical_log(2, 1.0).unwrap();
        let v = orlicz_ball_average(&f, 0.5, 0.0, 0.5, 1e-12).unwrap();
        assert!(rel(v, 10.938429361026322) < 1e-8, "{v}");
    }

    #[test]
    fn constant_morrey_attained_at_cap() {
        let f = RadialProfile::constant(2, 1.5).unwrap();
        let spec = NormSpec::new(NormKind::morrey(2.0, 1.0).unwrap(), 3.0).unwrap();
        let scan = ScanOptions::default().grid_for(&f, 3.0).unwrap();
        let r = norm(&f, &spec, &scan).unwrap();
        assert!(rel(r.value, 1.5 * 3.0f64.powf(1.0)) < 1e-12);
        assert_eq!(r.arg_radius, 3.0);
    }

    #[test]
    fn critical_power_law_norm_is_radius_independent() {
        let f = RadialProfile::power_law(1, 2.0, 0.8).unwrap();
        let spec = NormSpec::new(NormKind::morrey(1.25, 1.0).unwrap(), f64::INFINITY).unwrap();
        let opts = ScanOptions { extra_centers: vec![0.01, 0.1, 1.0, 10.0], ..Default::default() };
        let r = norm(&f, &spec, &opts.grid_for(&f, f64::INFINITY).unwrap()).unwrap();
        assert!(rel(r.value, 10.0) < 1e-10, "{}", r.value);
        assert_eq!(r.arg_center, 0.0);
        for &s in &[1e-4, 0.3, 70.0] {
            assert!(rel(ball_quantity(&f, &spec.kind, 0.0, s, 1e-10).unwrap(), 10.0) < 1e-12);
        }
    }

    #[test]
    fn power_law_with_beta() {
        let f = RadialProfile::power_law(1, 1.0, 0.8).unwrap();
        let spec = NormSpec::new(NormKind::morrey(1.25, 1.1).unwrap(), f64::INFINITY).unwrap();
        let r = norm(&f, &spec, &ScanOptions::default().grid_for(&f, f64::INFINITY).unwrap()).unwrap();
        assert!(rel(r.value, 0.12f64.powf(-1.0 / 1.1)) < 1e-10, "{}", r.value);
        assert!(rel(r.value, 6.872392546410476) < 1e-12);
    }

    #[test]
    fn infinite_cap_detects_growth() {
        let f = RadialProfile::power_law(2, 1.0, 0.5).unwrap();
        let spec = NormSpec::new(NormKind::morrey(2.0, 1.0).unwrap(), f64::INFINITY).unwrap();
        let r = norm(&f, &spec, &ScanOptions::default().grid_for(&f, f64::INFINITY).unwrap()).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn empty_scan_is_an_error() {
        assert!(matches!(ScanGrid::new(vec![], vec![1.0]), Err(Error::EmptyScan)));
        let f = RadialProfile::constant(1, 1.0).unwrap();
        let spec = NormSpec::new(NormKind::morrey(1.0, 1.0).unwrap(), 0.5).unwrap();
        let scan = ScanGrid::new(vec![0.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(norm(&f, &spec, &scan), Err(Error::EmptyScan)));
    }

    #[test]
    fn subcritical_constant_mass() {
        let params = ProblemParams::new(1, 0.5, 2.0).unwrap();
        assert_eq!(params.regime(), Regime::Subcritical);
        let f = RadialProfile::constant(1, 0.3).unwrap();
        let opts = ScanOptions { extra_centers: vec![1.0, 5.0], ..Default::default() };
        let v = check_condition(&params, &f, 1.0, 0.7, 0.0, &opts).unwrap();
        assert!(rel(v.condition_value, 0.6) < 1e-12);
        assert!(v.met);
        let v = check_condition(&params, &f, 1.0, 0.5, 0.0, &opts).unwrap();
        assert!(!v.met);
    }

    #[test]
    fn supercritical_infinite_horizon() {
        let params = ProblemParams::new(1, 0.5, 3.0).unwrap();
        let f = RadialProfile::power_law(1, 0.5, 0.8).unwrap();
        let v = check_condition(&params, &f, f64::INFINITY, 10.0, 1.1, &ScanOptions::default()).unwrap();
        assert!(rel(v.condition_value, 0.5 * 6.872392546410476) < 1e-10);
        assert!(v.met);
        assert!(check_condition(&params, &f, 1.0, 1.0, 1.3, &ScanOptions::default()).is_err());
        assert!(check_condition(&params, &f, 1.0, 1.0, 1.0, &ScanOptions::default()).is_err());
    }

    #[test]
    fn critical_condition_checks() {
        let params = ProblemParams::new(2, 0.5, 1.5).unwrap();
        assert_eq!(params.regime(), Regime::Critical);
        let f = RadialProfile::critical_log(2, 0.01).unwrap();
        let opts = ScanOptions { per_decade: 8, ..Default::default() };
        let v = check_condition(&params, &f, 1.0, 1.0, 0.5, &opts).unwrap();
        assert!(v.condition_value > 0.0 && v.condition_value.is_finite());
        assert!(check_condition(&params, &f, 1.0, 1.0, 0.0, &opts).is_err());
        assert!(check_condition(&params, &f, f64::INFINITY, 1.0, 0.5, &opts).is_err());
        let z = RadialProfile::zero(2).unwrap();
        let v = check_condition(&params, &z, 1.0, 1e-9, 0.5, &opts).unwrap();
        assert_eq!(v.condition_value, 0.0);
        assert!(v.met);
    }

    #[test]
    fn gridded_scan_uses_faces_and_spacing() {
        let g = Grid::new(2, 10, 0.1).unwrap();
        let u: Vec<f64> = (0..10).map(|i| if i == 5 { 4.0 } else { 0.0 }).collect();
        let f = RadialProfile::gridded(Arc::new(GridField::new(g, u).unwrap()));
        let scan = ScanOptions::default().grid_for(&f, 1.0).unwrap();
        assert_eq!(scan.centers().len(), 11);
        assert!(rel(scan.resolution().r_min, 0.1) < 1e-15);
        let spec = NormSpec::new(NormKind::morrey(1.0, 1.0).unwrap(), 1.0).unwrap();
        let r = norm(&f, &spec, &scan).unwrap();
        let mass = f.ball_integral(&Gauge::Identity, 0.0, 1.0, 1e-12).unwrap();
        assert!(rel(r.value, mass / std::f64::consts::PI) < 1e-12);
        let off = ball_quantity(&f, &spec.kind, 0.55, 0.1, 1e-12).unwrap();
        assert!(off > 0.0 && off <= r.value);
    }

    #[test]
    fn sequential_and_parallel_scans_agree() {
        let f = RadialProfile::critical_log(3, 1.0).unwrap();
        let spec = NormSpec::new(NormKind::morrey(3.0, 1.0).unwrap(), 2.0).unwrap();
        let opts = ScanOptions { per_decade: 4, extra_centers: vec![0.2, 0.9], ..Default::default() };
        let s = opts.grid_for(&f, 2.0).unwrap();
        let a = norm(&f, &spec, &s.clone().with_exec(Exec::Sequential)).unwrap();
        let b = norm(&f, &spec, &s.with_exec(Exec::Parallel)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn doubling_of_constant_field() {
        let g = crate::field::Grid::new(1, 100, 0.1).unwrap();
        let f = GridField::constant(g, 2.0).unwrap();
        let r = doubling_ratio(&f, 1.0, 2.0, Exec::Sequential).unwrap();
        assert!((r - 2.0).abs() < 1e-12, "{r}");
        let zero = GridField::constant(g, 0.0).unwrap();
        assert_eq!(doubling_ratio(&zero, 1.0, 2.0, Exec::Sequential).unwrap(), 1.0);
        assert!(doubling_ratio(&f, 1.0, 0.5, Exec::Sequential).is_err());
    }
}
