//! Ball/shell measures in radial geometry, `N in {1, 2, 3}` for off-center work.

use std::f64::consts::PI;

/// Volume of the unit ball in `R^N`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / dim as f64 * unit_ball_volume(dim - 2),
    }
}

/// Surface measure of the unit sphere in `R^N` (`N |B_1|`; 2 for `N = 1`).
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

pub fn ball_volume(dim: usize, r: f64) -> f64 {
    unit_ball_volume(dim) * r.powi(dim as i32)
}

/// `|B(z, sigma) ∩ B(0, rho)|` with `|z| = d`.
pub fn lens_volume(dim: usize, d: f64, sigma: f64, rho: f64) -> f64 {
    if sigma <= 0.0 || rho <= 0.0 {
        return 0.0;
    }
    if d >= sigma + rho {
        return 0.0;
    }
    if d <= (sigma - rho).abs() {
        return ball_volume(dim, sigma.min(rho));
    }
    match dim {
        1 => {
            let lo = (d - sigma).max(-rho);
            let hi = (d + sigma).min(rho);
            (hi - lo).max(0.0)
        }
        2 => {
            let (a, b) = (sigma, rho);
            let c1 = ((d * d + a * a - b * b) / (2.0 * d * a)).clamp(-1.0, 1.0);
            let c2 = ((d * d + b * b - a * a) / (2.0 * d * b)).clamp(-1.0, 1.0);
            let k = ((-d + a + b) * (d + a - b) * (d - a + b) * (d + a + b)).max(0.0);
            a * a * c1.acos() + b * b * c2.acos() - 0.5 * k.sqrt()
        }
        3 => {
            let (a, b) = (sigma, rho);
            let s = a + b - d;
            PI * s * s * (d * d + 2.0 * d * (a + b) - 3.0 * (a - b) * (a - b)) / (12.0 * d)
        }
        _ => panic!("off-center ball geometry supports N <= 3, got {dim}"),
    }
}

/// `1 - cos` of the half-angle of the spherical cap `{|x| = r} ∩ B(z, sigma)`,
/// in product form so that small caps keep full relative precision.
fn one_minus_cos(r: f64, d: f64, sigma: f64) -> f64 {
    let v = (sigma - r + d) * (sigma + r - d) / (2.0 * r * d);
    v.clamp(0.0, 2.0)
}

/// Measure of the sphere `{|x| = r}` lying inside `B(z, sigma)`, `|z| = d`.
pub fn sphere_in_ball(dim: usize, r: f64, d: f64, sigma: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if d == 0.0 {
        return if r < sigma { unit_sphere_area(dim) * r.powi(dim as i32 - 1) } else { 0.0 };
    }
    match dim {
        1 => {
            let mut s = 0.0;
            if (r - d).abs() < sigma {
                s += 1.0;
            }
            if (r + d).abs() < sigma {
                s += 1.0;
            }
            s
        }
        2 => 4.0 * r * (0.5 * one_minus_cos(r, d, sigma)).sqrt().asin(),
        3 => 2.0 * PI * r * r * one_minus_cos(r, d, sigma),
        _ => panic!("off-center ball geometry supports N <= 3, got {dim}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn lens_is_integral_of_sphere_measure() {
        for dim in 1..=3 {
            for &(d, sigma, rho) in &[(0.3, 1.0, 0.9), (1.5, 1.0, 0.8), (0.7, 0.4, 2.0), (2.0, 1.0, 1.2)] {
                let lens = lens_volume(dim, d, sigma, rho);
                let num = integrate(|r| sphere_in_ball(dim, r, d, sigma), 0.0, rho, 1e-10, 1e-14)
                    .unwrap()
                    .value;
                assert!((lens - num).abs() < 1e-7, "N={dim} d={d}: {lens} vs {num}");
            }
        }
    }

    #[test]
    fn lens_limits() {
        for dim in 1..=3 {
            assert_eq!(lens_volume(dim, 3.0, 1.0, 1.0), 0.0);
            assert!((lens_volume(dim, 0.1, 1.0, 0.5) - ball_volume(dim, 0.5)).abs() < 1e-15);
            // continuity at tangency
            let inner = lens_volume(dim, 0.5 - 1e-9, 1.0, 0.5);
            let lens = lens_volume(dim, 0.5 + 1e-9, 1.0, 0.5);
            assert!((inner - lens).abs() < 1e-6);
        }
    }
}
