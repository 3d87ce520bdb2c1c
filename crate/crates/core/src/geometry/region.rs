//! Influence regions `Q`, `Q_ℓ`, `Q_𝒲` with tri-state membership.

use super::rect::deviation;
use crate::error::{Error, Result};
use crate::partition::{norm, random_unit_vectors, sphere_grid, AngularGrid};
use crate::phase::Phase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionKind {
    /// Scales `j_i >= k` in every subspace.
    Q { k: u32 },
    /// Scales `j_i >= k - ⌈3ℓ_i/4⌉`.
    QEll { k: u32, ell: Vec<u32> },
    /// `|x_i| > C 2^{εℓ_i}` exactly for `i ∈ W`.
    QW { w: Vec<bool>, ell: Vec<u32>, epsilon: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    /// Not in any rectangle up to `j_cap`, but close enough to the
    /// pulled-back centre that a finer rectangle could contain it.
    Unknown,
}

/// An influence region around `ȳ`.
#[derive(Debug, Clone)]
pub struct InfluenceRegion {
    pub phase: Phase,
    pub center: Vec<f64>,
    pub c_r: f64,
    pub j_cap: u32,
    pub kind: RegionKind,
    grids: Vec<Vec<(u32, AngularGrid)>>,
    probes: Vec<Vec<Vec<f64>>>,
}

/// `⌈3ℓ/4⌉`.
pub fn ell_offset(ell: u32) -> u32 {
    (3 * ell).div_ceil(4)
}

impl InfluenceRegion {
    pub fn new(phase: Phase, center: Vec<f64>, c_r: f64, j_cap: u32, kind: RegionKind) -> Result<Self> {
        let layout = phase.layout.clone();
        if center.len() != layout.n() {
            return Err(Error::Layout(format!("centre of length {} for n = {}", center.len(), layout.n())));
        }
        if !(c_r > 0.0) {
            return Err(Error::Domain(format!("C_R must be positive, got {c_r}")));
        }
        let starts: Vec<u32> = match &kind {
            RegionKind::Q { k } => vec![*k; layout.d()],
            RegionKind::QEll { k, ell } => {
                if ell.len() != layout.d() {
                    return Err(Error::Layout("one ℓ_i per subspace".into()));
                }
                ell.iter()
                    .map(|&l| {
                        k.checked_sub(ell_offset(l)).ok_or_else(|| {
                            Error::Domain(format!("k - ⌈3ℓ_i/4⌉ is negative for k = {k}, ℓ_i = {l}"))
                        })
                    })
                    .collect::<Result<_>>()?
            }
            RegionKind::QW { w, ell, epsilon, c } => {
                if w.len() != layout.d() || ell.len() != layout.d() {
                    return Err(Error::Layout("W and ℓ need one entry per subspace".into()));
                }
                let bound = 1.0 - epsilon - layout.d() as f64 / layout.n() as f64;
                if !(*epsilon > 0.0 && *epsilon < 1.0 && bound > 0.0) {
                    return Err(Error::Domain(format!("ε = {epsilon} violates 0 < ε < 1, 1 - ε - d/n > 0")));
                }
                if !(*c > 0.0) {
                    return Err(Error::Domain("sector constant must be positive".into()));
                }
                Vec::new()
            }
        };
        let mut grids = Vec::new();
        let mut probes = Vec::new();
        for (i, &dim) in layout.dims().iter().enumerate() {
            let mut g = Vec::new();
            if let Some(&s) = starts.get(i) {
                for j in s..=j_cap {
                    g.push((j, sphere_grid(j, dim, 1.0)?));
                }
            }
            grids.push(g);
            probes.push(if dim == 2 {
                (0..2048).map(|k| (TAU * k as f64 / 2048.0).sin_cos()).map(|(s, c)| vec![c, s]).collect()
            } else {
                random_unit_vectors(dim, 20_000, 0x9e37 + dim as u64)
            });
        }
        Ok(Self { phase, center, c_r, j_cap, kind, grids, probes })
    }

    /// Smallest `|ȳ_i - ∇Φ_i(x_i, u)|` over unit `u`; exact for
    /// `x·ξ + c|ξ|` blocks, sampled otherwise.
    fn min_deviation(&self, i: usize, x: &[f64], y: &[f64]) -> f64 {
        let comp = &self.phase.components[i];
        match comp.radial_speed() {
            Some(c) => {
                let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
                (norm(&d) - c.abs()).abs()
            }
            None => self.probes[i]
                .iter()
                .map(|u| deviation(comp.as_ref(), x, u, y).1)
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn block_membership(&self, i: usize, x: &[f64], y: &[f64]) -> Membership {
        let comp = &self.phase.components[i];
        // exact lower bound on |ȳ - ∇Φ| for x·ξ + c|ξ|; skips hopeless scales
        let floor = comp.radial_speed().map_or(0.0, |c| {
            let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            (norm(&d) - c.abs()).abs()
        });
        for (j, grid) in &self.grids[i] {
            let along_cap = self.c_r * (-(*j as f64)).exp2();
            let len_cap = self.c_r * (-(*j as f64) / 2.0).exp2();
            if floor > len_cap {
                continue;
            }
            for u in grid.iter() {
                let (along, len) = deviation(comp.as_ref(), x, u, y);
                if along <= along_cap && len <= len_cap {
                    return Membership::Inside;
                }
            }
        }
        let reach = self.c_r * (-((self.j_cap + 1) as f64) / 2.0).exp2();
        if self.min_deviation(i, x, y) <= reach {
            Membership::Unknown
        } else {
            Membership::Outside
        }
    }

    pub fn contains(&self, x: &[f64]) -> Membership {
        let layout = &self.phase.layout;
        let xs = layout.split(x);
        let ys = layout.split(&self.center);
        if let RegionKind::QW { w, ell, epsilon, c } = &self.kind {
            let inside = (0..layout.d()).all(|i| {
                let far = norm(xs[i]) > c * (epsilon * ell[i] as f64).exp2();
                far == w[i]
            });
            return if inside { Membership::Inside } else { Membership::Outside };
        }
        let mut unknown = false;
        for i in 0..layout.d() {
            match self.block_membership(i, xs[i], ys[i]) {
                Membership::Outside => return Membership::Outside,
                Membership::Unknown => unknown = true,
                Membership::Inside => {}
            }
        }
        if unknown {
            Membership::Unknown
        } else {
            Membership::Inside
        }
    }

    /// Membership of a single block, used when the integrand factors.
    pub fn contains_block(&self, i: usize, x_i: &[f64]) -> Membership {
        let ys = self.phase.layout.split(&self.center);
        self.block_membership(i, x_i, ys[i])
    }
}

/// Monte-Carlo estimate of a region's volume inside a box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub unknown_fraction: f64,
    pub samples: usize,
    /// Standard error above 10% of the estimate.
    pub flagged: bool,
}

const CHUNK: usize = 4096;

/// Volume of `{Inside}` within `[lo, hi]` by uniform sampling; chunks use
/// seeds derived from `seed`, so the result does not depend on threading.
pub fn region_measure(region: &InfluenceRegion, lo: &[f64], hi: &[f64], samples: usize, seed: u64) -> MeasureEstimate {
    let chunks = samples.div_ceil(CHUNK);
    let counts: Vec<(usize, usize, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(c as u64));
            let count = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0; lo.len()];
            let (mut inside, mut unknown) = (0, 0);
            for _ in 0..count {
                for (k, v) in x.iter_mut().enumerate() {
                    *v = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
                }
                match region.contains(&x) {
                    Membership::Inside => inside += 1,
                    Membership::Unknown => unknown += 1,
                    Membership::Outside => {}
                }
            }
            (inside, unknown, count)
        })
        .collect();
    let (inside, unknown, total) = counts.iter().fold((0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    let p = inside as f64 / total.max(1) as f64;
    let estimate = vol * p;
    let stderr = vol * (p * (1.0 - p) / total.max(1) as f64).sqrt();
    MeasureEstimate {
        estimate,
        stderr,
        unknown_fraction: unknown as f64 / total.max(1) as f64,
        samples: total,
        flagged: estimate == 0.0 || stderr > 0.1 * estimate,
    }
}

/// Volume of `{Inside}` by counting midpoints of a uniform grid with
/// `nodes` points per axis.
pub fn region_measure_dense(region: &InfluenceRegion, lo: &[f64], hi: &[f64], nodes: usize) -> f64 {
    let n = lo.len();
    let total = nodes.pow(n as u32);
    let inside: usize = (0..total)
        .into_par_iter()
        .map(|mut flat| {
            let mut x = vec![0.0; n];
            for k in (0..n).rev() {
                let idx = flat % nodes;
                flat /= nodes;
                x[k] = lo[k] + (hi[k] - lo[k]) * (idx as f64 + 0.5) / nodes as f64;
            }
            usize::from(region.contains(&x) == Membership::Inside)
        })
        .sum();
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    vol * inside as f64 / total as f64
}

/// Uniform random points in a box, for callers that need the raw samples.
pub fn sample_box(lo: &[f64], hi: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::SubspaceLayout;

    fn l22() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn centre_pullback_is_inside() {
        let q = InfluenceRegion::new(Phase::identity(l22()), vec![0.1, 0.2, -0.3, 0.0], 4.0, 6, RegionKind::Q { k: 3 })
            .unwrap();
        assert_eq!(q.contains(&[0.1, 0.2, -0.3, 0.0]), Membership::Inside);
        let far = 10.0 * 4.0 * (-1.5f64).exp2();
        assert_eq!(q.contains(&[0.1 + far, 0.2, -0.3, 0.0]), Membership::Outside);
    }

    #[test]
    fn wave_pullback_is_inside() {
        // ∇Φ(x, u) = x + u: x = ȳ - u lies in every rectangle with direction u
        let q = InfluenceRegion::new(Phase::wave(l22()), vec![0.0; 4], 4.0, 6, RegionKind::Q { k: 2 }).unwrap();
        assert_eq!(q.contains(&[-1.0, 0.0, 0.0, -1.0]), Membership::Inside);
    }

    #[test]
    fn unknown_near_the_cap() {
        // every admissible scale lies beyond the cap
        let q = InfluenceRegion::new(Phase::identity(l22()), vec![0.0; 4], 1.0, 4, RegionKind::Q { k: 6 }).unwrap();
        assert_eq!(q.contains(&[0.0, 0.1, 0.0, 0.0]), Membership::Unknown);
        assert_eq!(q.contains(&[0.0, 0.2, 0.0, 0.0]), Membership::Outside);
    }

    #[test]
    fn monotone_in_constant() {
        let small = InfluenceRegion::new(Phase::wave(l22()), vec![0.0; 4], 2.0, 5, RegionKind::Q { k: 2 }).unwrap();
        let big = InfluenceRegion::new(Phase::wave(l22()), vec![0.0; 4], 4.0, 5, RegionKind::Q { k: 2 }).unwrap();
        for x in sample_box(&[-2.0; 4], &[2.0; 4], 3000, 5) {
            if small.contains(&x) == Membership::Inside {
                assert_eq!(big.contains(&x), Membership::Inside);
            }
        }
    }

    #[test]
    fn empty_and_full_regions() {
        let q = InfluenceRegion::new(Phase::identity(l22()), vec![0.0; 4], 4.0, 3, RegionKind::Q { k: 9 }).unwrap();
        let m = region_measure(&q, &[-1.0; 4], &[1.0; 4], 2000, 1);
        assert_eq!(m.estimate, 0.0);
        let full = InfluenceRegion::new(Phase::identity(l22()), vec![0.0; 4], 1e3, 3, RegionKind::Q { k: 0 }).unwrap();
        let m = region_measure(&full, &[-1.0; 4], &[1.0; 4], 2000, 1);
        assert!((m.estimate - 16.0).abs() <= 2.0 * m.stderr + 1e-12);
    }

    #[test]
    fn measure_is_thread_independent_and_matches_dense() {
        let q = InfluenceRegion::new(Phase::identity(l22()), vec![0.0; 4], 4.0, 5, RegionKind::Q { k: 3 }).unwrap();
        let lo = [-1.0; 4];
        let hi = [1.0; 4];
        let a = region_measure(&q, &lo, &hi, 20_000, 9);
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| region_measure(&q, &lo, &hi, 20_000, 9));
        assert_eq!(a, b);
        let dense = region_measure_dense(&q, &lo, &hi, 24);
        assert!((a.estimate - dense).abs() < 4.0 * a.stderr + 0.05 * dense, "{a:?} vs {dense}");
    }

    #[test]
    fn sectors_partition_space() {
        let mk = |w: Vec<bool>| {
            InfluenceRegion::new(
                Phase::wave(l22()),
                vec![0.0; 4],
                4.0,
                4,
                RegionKind::QW { w, ell: vec![2, 0], epsilon: 0.2, c: 1.0 },
            )
            .unwrap()
        };
        let regions: Vec<_> = [[false, false], [true, false], [false, true], [true, true]]
            .into_iter()
            .map(|w| mk(w.to_vec()))
            .collect();
        for x in sample_box(&[-3.0; 4], &[3.0; 4], 500, 2) {
            let hits = regions.iter().filter(|r| r.contains(&x) == Membership::Inside).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn validation() {
        let qell = RegionKind::QEll { k: 1, ell: vec![2, 0] };
        assert!(InfluenceRegion::new(Phase::wave(l22()), vec![0.0; 4], 4.0, 4, qell).is_err());
        let qw = RegionKind::QW { w: vec![true, false], ell: vec![0, 0], epsilon: 0.6, c: 1.0 };
        assert!(InfluenceRegion::new(Phase::wave(l22()), vec![0.0; 4], 4.0, 4, qw).is_err());
        assert_eq!(ell_offset(2), 2);
        assert_eq!(ell_offset(4), 3);
    }
}
