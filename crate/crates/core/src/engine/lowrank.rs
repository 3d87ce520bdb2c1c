//! Per-direction kernel masses for two circle subspaces.
//!
//! For `Φ_i = x_i·ξ_i + c_i|ξ_i|` and a profile `s(|ξ_1|, |ξ_2|)`, the piece
//! `K^ν` at `y = 0` is `Σ_k U_k(x_1) V_k(x_2)` after interpolating `s` in
//! `|ξ_1|` at Chebyshev nodes. Each factor is a 2-D FFT over the bounding box
//! of one angular sector, so the 4-D kernel is never formed.

use super::budget::{self, complex_mb};
use super::fft;
use super::grid::{Axis, Lattice};
use crate::error::{Error, Result};
use crate::partition::{angular_window, mollifier, ring, sphere_grid, support_half_angle, SubspaceLayout};
use crate::symbol::FreqProfile;
use ndarray::{s, Array2, ArrayD, IxDyn};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Box and interpolation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowRankSetup {
    /// Radial period of the space box in units of `2^{-j}`.
    pub radial_periods: f64,
    /// Angular half-width of the space box beyond the sector, in units of `2^{-j/2}`.
    pub angular_margin: f64,
    /// Zero-padding factor.
    pub oversample: usize,
    /// Chebyshev nodes in `|ξ_1|`.
    pub rank: usize,
    pub budget_mb: u64,
}

impl Default for LowRankSetup {
    fn default() -> Self {
        Self { radial_periods: 16.0, angular_margin: 4.0, oversample: 2, rank: 12, budget_mb: 1024 }
    }
}

/// Columns `F_q(x) = Σ_ξ e^{2πi(x·ξ + c|ξ|)} φ_j(ξ) χ^0_j(ξ) g_q(|ξ|) h²` on a
/// space box centred at `-c e_1`, with `|x|²` per node and the cell area.
fn sector_fields(
    j: u32,
    speed: f64,
    grid_constant: f64,
    funcs: &[Box<dyn Fn(f64) -> f64 + '_>],
    setup: &LowRankSetup,
) -> Result<(Array2<Complex64>, Vec<f64>, f64)> {
    let grid = sphere_grid(j, 2, grid_constant)?;
    let half = support_half_angle(j);
    let lo1 = ((j as f64) - 1.0).exp2() * half.cos().max(0.0);
    let hi1 = ((j + 1) as f64).exp2();
    let hw2 = hi1 * half.sin();
    let p1 = setup.radial_periods * (-(j as f64)).exp2();
    let p2 = 2.0 * (half + setup.angular_margin * (-(j as f64) / 2.0).exp2());
    let (h1, h2) = (1.0 / p1, 1.0 / p2);
    let n1 = ((hi1 - lo1) * p1).ceil() as usize + 1;
    let n2 = (2.0 * hw2 * p2).ceil() as usize + 1;
    let (m1, m2) = (setup.oversample * n1, setup.oversample * n2);
    budget::check(complex_mb((m1 * m2 * (funcs.len() + 2)) as f64), setup.budget_mb)?;
    let layout = SubspaceLayout::new(vec![2])?;
    let freq = Lattice::new(layout.clone(), vec![Axis::new(lo1, h1, n1)?, Axis::new(-hw2, h2, n2)?])?;
    let space = Lattice::new(
        layout,
        vec![Axis::new(-speed - p1 / 2.0, p1 / m1 as f64, m1)?, Axis::new(-p2 / 2.0, p2 / m2 as f64, m2)?],
    )?;
    let mut base = Vec::with_capacity(n1 * n2);
    for a in 0..n1 {
        for b in 0..n2 {
            let xi = [freq.axes()[0].node(a), freq.axes()[1].node(b)];
            let r = xi[0].hypot(xi[1]);
            let w = ring(j, r);
            let w = if w == 0.0 { 0.0 } else { w * angular_window(&grid, 0, &xi)? };
            base.push((r, fft::cis(speed * r) * (w * h1 * h2)));
        }
    }
    let mut out = Array2::zeros((m1 * m2, funcs.len()));
    for (q, f) in funcs.iter().enumerate() {
        let g: Vec<Complex64> = base.iter().map(|(r, v)| if v.norm() == 0.0 { *v } else { v * f(*r) }).collect();
        let g = ArrayD::from_shape_vec(IxDyn(&[n1, n2]), g).expect("node count");
        let field = fft::synthesize(&g, &freq, &space)?;
        out.column_mut(q).assign(&ndarray::Array1::from_iter(field.iter().copied()));
    }
    let r2: Vec<f64> = (0..m1 * m2)
        .map(|k| {
            let x = space.node(k);
            x[0] * x[0] + x[1] * x[1]
        })
        .collect();
    Ok((out, r2, space.cell_volume()))
}

fn chebyshev_nodes(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let t = (PI * (k as f64 + 0.5) / count as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

/// Lagrange basis polynomial `k` on `nodes`, evaluated at `r` clamped to `[a, b]`.
fn lagrange(nodes: &[f64], k: usize, r: f64, a: f64, b: f64) -> f64 {
    let r = r.clamp(a, b);
    nodes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, &t)| (r - t) / (nodes[k] - t))
        .product()
}

/// `∫ |a(x)|·|K^ν_{jℓ}(x, 0)| dx` for a layout of two circles, phase speeds
/// `speeds`, profile `s` and spatial cutoff `a(x) = φ(2|x|/support_radius)`.
/// `scales` are the per-subspace ring indices `j - ℓ_i`. Every direction
/// gives the same value (the circle grids are rotation invariant), so the
/// piece along the first grid direction is evaluated.
pub fn per_direction_mass(
    layout: &SubspaceLayout,
    speeds: [f64; 2],
    profile: &FreqProfile,
    scales: [u32; 2],
    grid_constant: f64,
    support_radius: f64,
    setup: &LowRankSetup,
) -> Result<f64> {
    if layout.dims() != [2, 2] {
        return Err(Error::Unsupported(format!("per-direction masses need layout (2, 2), got {:?}", layout.dims())));
    }
    if scales.iter().any(|&j| j == 0) {
        return Err(Error::Unsupported("the low-frequency block has no directions".into()));
    }
    let (a, b) = (((scales[0] - 1) as f64).exp2(), ((scales[0] + 1) as f64).exp2());
    let nodes = chebyshev_nodes(a, b, setup.rank);
    let basis: Vec<Box<dyn Fn(f64) -> f64 + '_>> = (0..setup.rank)
        .map(|k| {
            let nodes = &nodes;
            Box::new(move |r: f64| lagrange(nodes, k, r, a, b)) as Box<dyn Fn(f64) -> f64>
        })
        .collect();
    let slices: Vec<Box<dyn Fn(f64) -> f64 + '_>> = nodes
        .iter()
        .map(|&t| Box::new(move |r: f64| profile.eval_radii(&[t, r])) as Box<dyn Fn(f64) -> f64>)
        .collect();
    let (u, r1, c1) = sector_fields(scales[0], speeds[0], grid_constant, &basis, setup)?;
    let (v, r2, c2) = sector_fields(scales[1], speeds[1], grid_constant, &slices, setup)?;
    let vt = v.t().to_owned();
    let chunk = 256;
    let mut total = 0.0;
    let mut start = 0;
    while start < u.nrows() {
        let end = (start + chunk).min(u.nrows());
        let block = u.slice(s![start..end, ..]).dot(&vt);
        for (row, k) in block.rows().into_iter().zip(start..end) {
            for (val, &q) in row.iter().zip(&r2) {
                let w = mollifier(2.0 * (r1[k] + q).sqrt() / support_radius);
                if w != 0.0 {
                    total += w * val.norm();
                }
            }
        }
        start = end;
    }
    Ok(total * c1 * c2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_basis_reproduces_profile_slices() {
        let nodes = chebyshev_nodes(8.0, 32.0, 12);
        let f = |r: f64| (1.0 + r * r + 100.0f64).powf(-0.5);
        for r in [8.5, 17.0, 31.0] {
            let v: f64 = (0..12).map(|k| lagrange(&nodes, k, r, 8.0, 32.0) * f(nodes[k])).sum();
            assert!((v - f(r)).abs() < 1e-5 * f(r));
        }
    }

    #[test]
    fn rejects_other_layouts() {
        let layout = SubspaceLayout::new(vec![3, 2]).unwrap();
        let r = per_direction_mass(&layout, [1.0, 1.0], &FreqProfile::One, [3, 3], 1.0, 4.0, &LowRankSetup::default());
        assert!(r.is_err());
    }

    #[test]
    fn box_refinement_is_stable() {
        let layout = SubspaceLayout::new(vec![2, 2]).unwrap();
        let p = FreqProfile::Bessel { m: -1.0 };
        let base = per_direction_mass(&layout, [1.0, 1.0], &p, [4, 4], 1.0, 4.0, &LowRankSetup::default()).unwrap();
        let wide = LowRankSetup { radial_periods: 24.0, angular_margin: 6.0, ..LowRankSetup::default() };
        let fine = per_direction_mass(&layout, [1.0, 1.0], &p, [4, 4], 1.0, 4.0, &wide).unwrap();
        assert!((base - fine).abs() < 5e-3 * fine, "{base} vs {fine}");
    }
}
