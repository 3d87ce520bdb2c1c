//! Exactness of the frequency partition and structural checks of the phase
//! and symbol.

use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::error::{Error, Result};
use crate::partition::{angular_weights, c_grid, full_partition_residual, random_unit_vectors, sphere_grid};
use crate::phase::{
    euler_residual, homogeneity_residual, nondegeneracy_min_det, remainder_bound_check, window_samples,
    LinearizedRemainder, RemainderDirection,
};
use crate::symbol::{symbol_class_residual, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionParams {
    pub j_max: u32,
    pub samples: usize,
    pub tolerance: f64,
    /// Scales of the angular check, on the first subspace.
    pub angular_scales: Vec<u32>,
    pub angular_samples: usize,
    pub angular_tolerance: f64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        Self {
            j_max: 8,
            samples: 10_000,
            tolerance: 1e-10,
            angular_scales: vec![0, 2, 4, 6],
            angular_samples: 1000,
            angular_tolerance: 1e-12,
        }
    }
}

/// Radii log-spread over `[0, 2^{j_max-1}]` so every ring gets samples.
fn ball_samples(n: usize, count: usize, j_max: u32, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (j_max as f64 - 1.0).exp2();
    random_unit_vectors(n, count, seed ^ 0x5eed)
        .into_iter()
        .map(|u| {
            let r = ((1.0 + top).log2() * rng.random::<f64>()).exp2() - 1.0;
            u.iter().map(|c| c * r).collect()
        })
        .collect()
}

/// `Σ pieces = 1` over a ball, and `Σ_ν χ^ν = 1` with grid counts at each
/// angular scale.
pub fn partition_check(problem: &Problem, p: &PartitionParams, seed: u64) -> Result<Vec<EstimateReport>> {
    let layout = &problem.layout;
    let params = serde_json::json!({ "problem": problem.echo(), "params": p });
    let samples = ball_samples(layout.n(), p.samples, p.j_max, seed);
    let res = full_partition_residual(layout, &samples, p.j_max);
    let mut full = EstimateReport::new("partition", &params, seed, &["j_max", "samples", "outside", "residual"]);
    full.push(vec![p.j_max as f64, samples.len() as f64, res.outside as f64, res.residual]);
    full.check(Check::at_most("max |Σ pieces - 1|", res.residual, p.tolerance));
    if res.outside > 0 {
        full.flag(format!("{} samples fell outside the checked ball", res.outside));
    }

    let dim = layout.dims()[0];
    let cap = c_grid(dim);
    let mut ang = EstimateReport::new("angular", &params, seed, &["j", "count", "count_bound", "residual"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for &j in &p.angular_scales {
        let grid = sphere_grid(j, dim, problem.grid_constant)?;
        let mut worst = 0.0f64;
        for u in random_unit_vectors(dim, p.angular_samples, seed.wrapping_add(j as u64 + 2)) {
            let r = (j as f64 - 1.0 + 2.0 * rng.random::<f64>()).exp2();
            let xi: Vec<f64> = u.iter().map(|c| c * r).collect();
            let s: f64 = angular_weights(&grid, &xi)?.iter().map(|(_, w)| w).sum();
            worst = worst.max((s - 1.0).abs());
        }
        let bound = cap * (j as f64 * (dim as f64 - 1.0) / 2.0).exp2();
        ang.push(vec![j as f64, grid.len() as f64, bound, worst]);
        ang.check(Check::at_most(&format!("max |Σ_ν χ^ν - 1| at j = {j}"), worst, p.angular_tolerance));
        ang.check(Check::at_most(&format!("grid count at j = {j}"), grid.len() as f64, bound));
    }
    Ok(vec![full, ang])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolCheckParams {
    pub samples: usize,
    pub lambdas: Vec<f64>,
    pub homogeneity_tolerance: f64,
    pub euler_tolerance: f64,
    pub nondegeneracy_samples: usize,
    /// Floor on `|det ∂²Φ_i/∂x_i∂ξ_i|`.
    pub min_det: f64,
    /// Order of the Bessel-potential symbol under test.
    pub m: f64,
    /// `|ξ| = 2^{k/2}` for `k < 2·class_octaves`.
    pub class_octaves: u32,
    /// Allowed growth of the class residual from the inner to the outer half.
    pub class_growth: f64,
    pub remainder_scales: Vec<u32>,
    pub remainder_samples: usize,
    /// Allowed max/min of the remainder ratios across scales.
    pub remainder_plateau: f64,
    pub ray_tolerance: f64,
}

impl Default for SymbolCheckParams {
    fn default() -> Self {
        Self {
            samples: 1000,
            lambdas: vec![0.5, 2.0, 4.0],
            homogeneity_tolerance: 1e-10,
            euler_tolerance: 1e-8,
            nondegeneracy_samples: 1000,
            min_det: 1e-3,
            m: -1.0,
            class_octaves: 8,
            class_growth: 2.0,
            remainder_scales: (2..=6).collect(),
            remainder_samples: 200,
            remainder_plateau: 4.0,
            ray_tolerance: 1e-10,
        }
    }
}

fn phase_samples(problem: &Problem, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = problem.layout.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = random_unit_vectors(n, count, seed ^ 0xf00d);
    dirs.into_iter()
        .map(|u| {
            let x: Vec<f64> = (0..n).map(|_| problem.support_radius * (rng.random::<f64>() - 0.5)).collect();
            let r = (8.0 * rng.random::<f64>()).exp2();
            (x, u.iter().map(|c| c * r).collect::<Vec<f64>>())
        })
        .filter(|(_, xi)| problem.layout.block_norms(xi).iter().all(|&r| r > 1e-6))
        .collect()
}

/// Homogeneity, Euler identity, non-degeneracy, product-class residuals of a
/// Bessel-potential symbol and the linearized remainder bounds.
pub fn symbol_check(problem: &Problem, p: &SymbolCheckParams, seed: u64) -> Result<Vec<EstimateReport>> {
    if p.remainder_scales.len() < 2 {
        return Err(Error::Domain("the remainder sweep needs at least two scales".into()));
    }
    let layout = &problem.layout;
    let phase = &problem.phase;
    let params = serde_json::json!({ "problem": problem.echo(), "params": p });
    let samples = phase_samples(problem, p.samples, seed);

    let mut ph = EstimateReport::new("phase", &params, seed, &["subspace", "homogeneity", "euler", "min_det"]);
    let hom = homogeneity_residual(phase, &samples, &p.lambdas)?;
    let eul = euler_residual(phase, &samples)?;
    for i in 0..layout.d() {
        let det = nondegeneracy_min_det(phase, i, p.nondegeneracy_samples, seed.wrapping_add(i as u64), problem.support_radius)?;
        ph.push(vec![i as f64, hom, eul, det]);
        ph.check(Check::at_least(&format!("min |det| of the mixed Hessian in subspace {}", i + 1), det, p.min_det));
    }
    ph.check(Check::at_most("homogeneity residual", hom, p.homogeneity_tolerance));
    ph.check(Check::at_most("Euler identity residual", eul, p.euler_tolerance));

    let n = layout.n();
    let symbol = Symbol::bessel(layout.clone(), p.m, problem.support_radius);
    let mut cls = EstimateReport::new("symbol-class", &params, seed, &["case", "xi_order", "x_order", "inner", "outer"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    let sweep: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..2 * p.class_octaves)
        .map(|k| {
            let r = (k as f64 / 2.0).exp2();
            random_unit_vectors(n, 16, seed.wrapping_add(100 + k as u64))
                .into_iter()
                .map(|u| {
                    let x: Vec<f64> =
                        (0..n).map(|_| 0.75 * problem.support_radius * (rng.random::<f64>() - 0.5)).collect();
                    (x, u.iter().map(|c| c * r).collect::<Vec<f64>>())
                })
                .collect()
        })
        .collect();
    let unit = |k: usize| -> Vec<u32> {
        let mut v = vec![0; n];
        v[k] = 1;
        v
    };
    let second = layout.offsets()[1.min(layout.d() - 1)];
    let cases: Vec<(Vec<u32>, Vec<u32>)> = vec![
        (vec![0; n], vec![0; n]),
        (unit(0), vec![0; n]),
        (vec![0; n], unit(0)),
        (unit(0).iter().map(|v| 2 * v).collect(), vec![0; n]),
        (unit(0).iter().zip(unit(second)).map(|(a, b)| a + b).collect(), vec![0; n]),
    ];
    let half = p.class_octaves as usize;
    for (code, (alpha, beta)) in cases.iter().enumerate() {
        let per: Vec<f64> = sweep
            .iter()
            .map(|s| symbol_class_residual(&symbol, alpha, beta, s))
            .collect::<Result<_>>()?;
        let inner = per[..half].iter().fold(0.0f64, |m, v| m.max(*v));
        let outer = per[half..].iter().fold(0.0f64, |m, v| m.max(*v));
        cls.push(vec![code as f64, alpha.iter().sum::<u32>() as f64, beta.iter().sum::<u32>() as f64, inner, outer]);
        let name = format!("class residual growth for α = {alpha:?}, β = {beta:?}");
        if inner == 0.0 {
            cls.check(Check::at_most(&name, outer, 0.0));
        } else {
            cls.check(Check::at_most(&name, outer / inner, p.class_growth));
        }
    }

    let mut rem = EstimateReport::new("remainder", &params, seed, &["j", "along_1", "transverse_2", "ray"]);
    let dim = layout.dims()[0];
    let mut dir = vec![0.0; dim];
    dir[0] = 0.6;
    dir[1] = 0.8;
    let lin = LinearizedRemainder::new(phase.clone(), 0, dir.clone())?;
    for &j in &p.remainder_scales {
        let s = window_samples(&lin.direction, j, p.remainder_samples, 0.5 * problem.support_radius, seed.wrapping_add(j as u64));
        let along = remainder_bound_check(&lin, j, RemainderDirection::Along, 1, &s)?;
        let trans = remainder_bound_check(&lin, j, RemainderDirection::Transverse, 2, &s)?;
        let ray = s
            .iter()
            .flat_map(|(x, _)| {
                [0.5, 1.0, 4.0].map(|t| {
                    let xi: Vec<f64> = lin.direction.iter().map(|c| c * t * (j as f64).exp2()).collect();
                    lin.eval(x, &xi).abs()
                })
            })
            .fold(0.0f64, f64::max);
        rem.push(vec![j as f64, along, trans, ray]);
    }
    for col in ["along_1", "transverse_2"] {
        let v = rem.column(col).expect("column");
        let hi = v.iter().fold(0.0f64, |m, x| m.max(*x));
        let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        if hi == 0.0 {
            rem.check(Check::holds(&format!("{col} remainder vanishes"), true));
        } else {
            rem.check(Check::at_most(&format!("max/min of the {col} remainder ratio across scales"), hi / lo, p.remainder_plateau));
        }
    }
    let ray = rem.column("ray").expect("column").into_iter().fold(0.0f64, f64::max);
    rem.check(Check::at_most("remainder on the ray of ξ^ν", ray, p.ray_tolerance));
    Ok(vec![ph, cls, rem])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_partition_check_passes() {
        let p = PartitionParams { samples: 500, angular_samples: 100, ..Default::default() };
        for rep in partition_check(&Problem::default(), &p, 3).unwrap() {
            assert!(rep.pass(), "{:?} {:?}", rep.rows, rep.checks);
        }
    }

    #[test]
    fn ball_samples_stay_inside() {
        let top = 2f64.powi(7);
        for s in ball_samples(4, 200, 8, 1) {
            assert!(crate::partition::norm(&s) <= top + 1e-9);
        }
    }

    #[test]
    fn small_symbol_check_passes() {
        let p = SymbolCheckParams { samples: 100, nondegeneracy_samples: 100, remainder_samples: 40, ..Default::default() };
        for rep in symbol_check(&Problem::default(), &p, 3).unwrap() {
            assert!(rep.pass(), "{} {:?} {:?}", rep.experiment, rep.rows, rep.checks);
        }
    }

    #[test]
    fn perturbed_phase_is_nondegenerate() {
        let layout = crate::partition::SubspaceLayout::new(vec![2, 2]).unwrap();
        let problem = Problem::default().with_phase(crate::phase::Phase::perturbed(layout, 0.1));
        let p = SymbolCheckParams { samples: 50, nondegeneracy_samples: 200, remainder_samples: 20, ..Default::default() };
        let reps = symbol_check(&problem, &p, 4).unwrap();
        let det = reps[0].column("min_det").unwrap();
        assert!(det.iter().all(|&d| d > 0.5 && d < 2.0), "{det:?}");
    }
}
