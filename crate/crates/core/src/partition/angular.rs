//! Second dyadic windows `χ^ν` and their derivative bounds.

use super::layout::norm;
use super::mollifier::mollifier;
use super::sphere::AngularGrid;
use super::windows::ring;
use crate::error::{Error, Result};
use crate::fd;
use num_complex::Complex64;

fn bump_at(grid: &AngularGrid, nu: usize, u: &[f64]) -> f64 {
    let p = grid.point(nu);
    let d = p.iter().zip(u).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    mollifier(d / grid.aperture())
}

fn unit(xi: &[f64]) -> Result<Vec<f64>> {
    let r = norm(xi);
    if r == 0.0 {
        return Err(Error::Domain("angular window is undefined at the origin".into()));
    }
    Ok(xi.iter().map(|x| x / r).collect())
}

/// `χ^ν(ξ) = φ(2^{j/2}|ξ/|ξ| - ξ^ν|) / Σ_μ φ(2^{j/2}|ξ/|ξ| - ξ^μ|)`.
pub fn angular_window(grid: &AngularGrid, nu: usize, xi: &[f64]) -> Result<f64> {
    let u = unit(xi)?;
    let num = bump_at(grid, nu, &u);
    if num == 0.0 {
        return Ok(0.0);
    }
    let den: f64 = (0..grid.len()).map(|k| bump_at(grid, k, &u)).sum();
    Ok(num / den)
}

/// All nonzero `(ν, χ^ν(ξ))` at one point.
pub fn angular_weights(grid: &AngularGrid, xi: &[f64]) -> Result<Vec<(usize, f64)>> {
    let u = unit(xi)?;
    let bumps: Vec<(usize, f64)> = (0..grid.len())
        .map(|k| (k, bump_at(grid, k, &u)))
        .filter(|(_, b)| *b > 0.0)
        .collect();
    let den: f64 = bumps.iter().map(|(_, b)| b).sum();
    Ok(bumps.into_iter().map(|(k, b)| (k, b / den)).collect())
}

/// Half-angle of the support cone of `χ^ν`: `|u - ξ^ν| <= 2·2^{-j/2}`.
pub fn support_half_angle(j: u32) -> f64 {
    2.0 * ((-(j as f64) / 2.0).exp2()).min(1.0).asin()
}

/// Angular window of a circle grid from the polar angle alone (`dim = 2`).
pub fn angular_window_2d(grid: &AngularGrid, nu: usize, theta: f64) -> f64 {
    let xi = [theta.cos(), theta.sin()];
    angular_window(grid, nu, &xi).expect("unit vector is nonzero")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeKind {
    /// Along `ξ/|ξ|`.
    Radial,
    /// Along a unit tangent of the sphere through `ξ`.
    Angular,
}

/// Largest observed derivative, in two normalizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeRatio {
    /// `max |D^k w| · |ξ|^k`.
    pub raw: f64,
    /// `raw` divided by `2^{k j/2}` for angular derivatives, unchanged for
    /// radial ones.
    pub normalized: f64,
}

fn tangent(xi: &[f64], toward: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = xi.iter().map(|x| x / norm(xi)).collect();
    let dot: f64 = u.iter().zip(toward).map(|(a, b)| a * b).sum();
    let mut t: Vec<f64> = toward.iter().zip(&u).map(|(b, a)| b - dot * a).collect();
    if norm(&t) < 1e-8 {
        // toward is parallel to ξ; pick any coordinate direction
        let k = (0..u.len()).min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap();
        let mut e = vec![0.0; u.len()];
        e[k] = 1.0;
        let d: f64 = u[k];
        t = e.iter().zip(&u).map(|(b, a)| b - d * a).collect();
    }
    let r = norm(&t);
    t.iter().map(|x| x / r).collect()
}

/// Finite-difference check of the localized window `φ_j(|ξ|) χ^ν(ξ)` against
/// the bounds `|ξ|^{-k}` (radial) and `2^{kj/2}|ξ|^{-k}` (angular).
pub fn window_derivative_check(
    grid: &AngularGrid,
    nu: usize,
    kind: DerivativeKind,
    order: u32,
    samples: &[Vec<f64>],
) -> Result<DerivativeRatio> {
    if order > 2 {
        return Err(Error::Domain(format!("derivative order {order} > 2")));
    }
    let j = grid.j;
    let w = |xi: &[f64]| -> Complex64 {
        let r = norm(xi);
        if r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(ring(j, r) * angular_window(grid, nu, xi).unwrap_or(0.0), 0.0)
    };
    let mut raw = 0.0f64;
    for xi in samples {
        let r = norm(xi);
        if r == 0.0 {
            return Err(Error::Domain("derivative sample at the origin".into()));
        }
        let (dir, scale) = match kind {
            DerivativeKind::Radial => (xi.iter().map(|x| x / r).collect::<Vec<_>>(), r),
            DerivativeKind::Angular => (tangent(xi, grid.point(nu)), r * grid.aperture()),
        };
        let d = fd::directional(&w, xi, &dir, order, fd::REL_STEP * scale)?;
        raw = raw.max(d.norm() * r.powi(order as i32));
    }
    let normalized = match kind {
        DerivativeKind::Radial => raw,
        DerivativeKind::Angular => raw / (order as f64 * j as f64 / 2.0).exp2(),
    };
    Ok(DerivativeRatio { raw, normalized })
}

#[cfg(test)]
mod tests {
    use super::super::sphere::{random_unit_vectors, sphere_grid};
    use super::*;

    #[test]
    fn partition_of_unity_on_circle_and_sphere() {
        for (dim, j) in [(2, 0), (2, 4), (2, 6), (3, 2)] {
            let g = sphere_grid(j, dim, 1.0).unwrap();
            for u in random_unit_vectors(dim, 300, 3) {
                let s: f64 = (0..g.len()).map(|k| angular_window(&g, k, &u).unwrap()).sum();
                assert!((s - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn homogeneous_of_degree_zero() {
        let g = sphere_grid(4, 2, 1.0).unwrap();
        let xi = [3.0, 1.2];
        let base = angular_window(&g, 1, &xi).unwrap();
        for lam in [0.5, 2.0, 10.0] {
            let v = angular_window(&g, 1, &[lam * xi[0], lam * xi[1]]).unwrap();
            assert!((v - base).abs() <= 1e-12);
        }
    }

    #[test]
    fn origin_is_a_domain_error() {
        let g = sphere_grid(2, 2, 1.0).unwrap();
        assert!(angular_window(&g, 0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn parallel_and_isolated_gives_one() {
        let g = AngularGrid::from_points(4, 2, 1.0, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        assert_eq!(angular_window(&g, 0, &[3.0, 0.0]).unwrap(), 1.0);
        assert_eq!(angular_window(&g, 1, &[3.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn support_cone() {
        let g = sphere_grid(4, 2, 1.0).unwrap();
        let a = support_half_angle(4) * 1.01;
        let p = g.point(0);
        let theta = p[1].atan2(p[0]) + a;
        assert_eq!(angular_window_2d(&g, 0, theta), 0.0);
    }
}
