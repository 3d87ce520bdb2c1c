//! Direction grids `{ξ^ν}` on `S^{n_i - 1}` with spacing `c · 2^{-j/2}`.

use super::layout::norm;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;

/// Directions of one subspace at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    pub j: u32,
    pub dim: usize,
    pub spacing_constant: f64,
    points: Vec<f64>,
}

/// Cardinality constant: `|grid| <= C_grid(dim) · 2^{j (dim-1)/2}` for the
/// default spacing constant.
pub fn c_grid(dim: usize) -> f64 {
    match dim {
        2 => 8.0,
        3 => 16.0,
        // cube-face lattice: (2 dim) faces of (M+1)^(dim-1) points
        _ => 2.0 * dim as f64 * (2.0 * (dim as f64).sqrt() + 2.0).powi(dim as i32 - 1),
    }
}

impl AngularGrid {
    /// Grid from explicit unit vectors (flattened). Covering is not checked.
    pub fn from_points(j: u32, dim: usize, spacing_constant: f64, points: Vec<f64>) -> Result<Self> {
        if dim < 2 || points.len() % dim != 0 {
            return Err(Error::Domain(format!("{} coordinates do not form dim-{dim} points", points.len())));
        }
        if points.chunks_exact(dim).any(|p| (norm(p) - 1.0).abs() > 1e-14) {
            return Err(Error::Domain("grid points must be unit vectors".into()));
        }
        Ok(Self { j, dim, spacing_constant, points })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, nu: usize) -> &[f64] {
        &self.points[nu * self.dim..(nu + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// `2^{-j/2}`, the covering radius and window aperture.
    pub fn aperture(&self) -> f64 {
        (-(self.j as f64) / 2.0).exp2()
    }

    /// Index of the nearest grid direction.
    pub fn nearest(&self, u: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, p) in self.iter().enumerate() {
            let d = dist(p, u);
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    /// Largest distance from any of `probes` to the grid.
    pub fn covering_radius_on(&self, probes: &[Vec<f64>]) -> f64 {
        probes.iter().map(|u| self.nearest(u).1).fold(0.0, f64::max)
    }

    /// CSV with columns `index, c1, …, c_dim`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["index".to_string()];
        header.extend((1..=self.dim).map(|k| format!("c{k}")));
        wr.write_record(&header)?;
        for (k, p) in self.iter().enumerate() {
            let mut rec = vec![k.to_string()];
            rec.extend(p.iter().map(|v| format!("{v:e}")));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Deterministic uniform random unit vectors.
pub fn random_unit_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let r = norm(&v);
            if r > 1e-3 && r <= 1.0 {
                break v.iter().map(|x| x / r).collect();
            }
        })
        .collect()
}

fn fibonacci(count: usize) -> Vec<f64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut pts = Vec::with_capacity(3 * count);
    for k in 0..count {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).sqrt();
        let a = golden * k as f64;
        pts.extend([r * a.cos(), r * a.sin(), z]);
    }
    pts
}

fn cube_faces(dim: usize, m: usize) -> Vec<f64> {
    let mut pts = Vec::new();
    let per = (m + 1).pow(dim as u32 - 1);
    for axis in 0..dim {
        for sign in [-1.0, 1.0] {
            for idx in 0..per {
                let mut v = vec![0.0; dim];
                let mut rest = idx;
                let mut skip = false;
                for (c, slot) in v.iter_mut().enumerate() {
                    if c == axis {
                        *slot = sign;
                        continue;
                    }
                    let k = rest % (m + 1);
                    rest /= m + 1;
                    *slot = -1.0 + 2.0 * k as f64 / m as f64;
                    // faces share edges; keep a boundary point only on the lowest axis
                    if slot.abs() == 1.0 && c < axis {
                        skip = true;
                    }
                }
                if skip {
                    continue;
                }
                let r = norm(&v);
                pts.extend(v.iter().map(|x| x / r));
            }
        }
    }
    pts
}

/// Builds the direction grid. `dim = 2` uses equally spaced angles,
/// `dim = 3` a spherical Fibonacci lattice, higher dimensions a normalized
/// cube-face lattice; the latter two are refined until the covering radius,
/// checked against a dense probe set, is below `2^{-j/2}`.
pub fn sphere_grid(j: u32, dim: usize, c: f64) -> Result<AngularGrid> {
    if dim < 2 {
        return Err(Error::Domain(format!("sphere grid needs dim >= 2, got {dim}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("spacing constant must be positive, got {c}")));
    }
    let target = (-(j as f64) / 2.0).exp2();
    let spacing = c * target;
    let points = match dim {
        2 => {
            let count = (2.0 * PI / spacing).ceil() as usize;
            let cover = 2.0 * (PI / (2.0 * count as f64)).sin();
            if cover > target {
                return Err(Error::Domain(format!(
                    "spacing constant {c} leaves directions uncovered at j = {j}"
                )));
            }
            (0..count)
                .flat_map(|k| {
                    let a = 2.0 * PI * k as f64 / count as f64;
                    [a.cos(), a.sin()]
                })
                .collect()
        }
        3 => {
            let mut count = (8.0 * PI / (3f64.sqrt() * spacing * spacing)).ceil() as usize;
            loop {
                let g = AngularGrid { j, dim, spacing_constant: c, points: fibonacci(count) };
                let probes = probe_set(3, count);
                if g.covering_radius_on(&probes) <= 0.9 * target {
                    break g.points;
                }
                count += count / 20 + 1;
            }
        }
        _ => {
            let mut m = ((2.0 * (dim as f64).sqrt()) / spacing).ceil().max(1.0) as usize;
            loop {
                let g = AngularGrid { j, dim, spacing_constant: c, points: cube_faces(dim, m) };
                let probes = probe_set(dim, 4 * g.len());
                if g.covering_radius_on(&probes) <= 0.9 * target {
                    break g.points;
                }
                m += 1;
            }
        }
    };
    Ok(AngularGrid { j, dim, spacing_constant: c, points })
}

fn probe_set(dim: usize, base: usize) -> Vec<Vec<f64>> {
    let count = (16 * base).min(200_000);
    let mut probes = random_unit_vectors(dim, count, 0x5eed ^ base as u64);
    if dim == 3 {
        let f = fibonacci(count);
        probes.extend(f.chunks_exact(3).map(|p| vec![-p[0], p[1], -p[2]]));
    }
    probes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_counts() {
        assert_eq!(sphere_grid(0, 2, 1.0).unwrap().len(), (2.0 * PI).ceil() as usize);
        assert_eq!(sphere_grid(0, 2, 1.0).unwrap().len(), 7);
        assert_eq!(sphere_grid(4, 2, 1.0).unwrap().len(), 26);
    }

    #[test]
    fn unit_norm_and_covering() {
        for (dim, j) in [(2, 5), (3, 2), (3, 4)] {
            let g = sphere_grid(j, dim, 1.0).unwrap();
            for p in g.iter() {
                assert!((norm(p) - 1.0).abs() <= 1e-14);
            }
            let probes = random_unit_vectors(dim, 5000, 11);
            assert!(g.covering_radius_on(&probes) <= g.aperture());
            let bound = c_grid(dim) * (j as f64 * (dim as f64 - 1.0) / 2.0).exp2();
            assert!(g.len() as f64 <= bound, "dim {dim} j {j}: {} > {bound}", g.len());
        }
    }

    #[test]
    fn four_sphere_grid_covers() {
        let g = sphere_grid(1, 4, 1.0).unwrap();
        let probes = random_unit_vectors(4, 3000, 5);
        assert!(g.covering_radius_on(&probes) <= g.aperture());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(sphere_grid(2, 1, 1.0).is_err());
        assert!(sphere_grid(2, 2, 5.0).is_err());
        assert!(sphere_grid(2, 2, -1.0).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(sphere_grid(3, 3, 1.0).unwrap(), sphere_grid(3, 3, 1.0).unwrap());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = sphere_grid(0, 2, 1.0).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,c1,c2\n"));
        assert_eq!(text.lines().count(), 8);
    }
}
