//! Kernel experiments: oracle agreement, L¹ decay, Lipschitz ratio and
//! tails outside influence regions.

use super::polar::{bessel, piece_kernel};
use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::lowrank::{per_direction_mass, LowRankSetup};
use crate::engine::radial::{interp_weights, radial_rule, BiRadial};
use crate::engine::{Axis, Engine, FreqGrid, KernelField, Lattice, SpaceGrid};
use crate::error::{Error, Result};
use crate::geometry::{InfluenceRegion, Membership, RegionKind};
use crate::partition::{ConeIndex, WindowSpec};
use crate::symbol::{FreqProfile, Symbol};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Direct quadrature against the FFT path on a sub-lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleParams {
    pub j: u32,
    pub freq_step: f64,
    /// Nodes per axis of the second subspace where the direct sum is taken.
    pub x2_nodes: usize,
    pub m: f64,
    pub tolerance: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { j: 4, freq_step: 0.5, x2_nodes: 4, m: -1.0, tolerance: 1e-8 }
    }
}

/// `K^ν_{j0}(·, 0)` for `ν = 0` by both paths; returns the report and the
/// FFT field.
pub fn oracle_equivalence(problem: &Problem, p: &OracleParams) -> Result<(EstimateReport, KernelField)> {
    let layout = problem.layout.clone();
    let d = layout.d();
    let engine = Engine::new(problem.phase.clone(), Symbol::bessel(layout.clone(), p.m, problem.support_radius))?;
    let spec = WindowSpec::new(p.j, ConeIndex::zero(d), Some(vec![0; d]))?;
    let window = engine.piece_window(&spec)?;
    let fgrid = FreqGrid::covering(layout.clone(), &window, p.freq_step)?;
    let half = 0.5 / p.freq_step;
    let origin = vec![-half; layout.n()];
    let conv = engine.kernel_convolutional(&window, &vec![0.0; layout.n()], &fgrid, &origin, 1)?;
    // direct sum on every node of the first subspaces and a patch of the last,
    // centred where the kernel concentrates
    let offsets = layout.offsets();
    let last = offsets[d - 1];
    let axes: Vec<Axis> = conv
        .field
        .grid
        .axes()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            if k < last {
                return Ok(a.clone());
            }
            let target = if k == last { -1.0 } else { 0.0 };
            let centre = ((target - a.origin) / a.step).round() as isize;
            let start = (centre - p.x2_nodes as isize / 2).clamp(0, (a.len - p.x2_nodes) as isize) as usize;
            Axis::new(a.node(start), a.step, p.x2_nodes)
        })
        .collect::<Result<_>>()?;
    let sub = Lattice::new(layout.clone(), axes)?;
    let direct = engine.kernel_direct(&window, &vec![0.0; layout.n()], &SpaceGrid(sub.clone()), &fgrid)?;
    let fft_sub = conv.field.restrict_to(&sub)?;
    let (linf, l2) = direct.field.relative_error(&fft_sub)?;
    let mut rep = EstimateReport::new(
        "kernel-oracle",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        0,
        &["j", "freq_nodes", "compared_nodes", "rel_linf", "rel_l2"],
    );
    rep.push(vec![p.j as f64, fgrid.len() as f64, sub.len() as f64, linf, l2]);
    rep.check(Check::at_most("relative L-infinity, direct vs FFT", linf, p.tolerance));
    Ok((rep, conv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayMode {
    PerNu,
    Summed,
}

/// `∫|K|` sweeps: per direction against `j`, or summed over directions
/// against `ℓ_1` at `j = ℓ_1 + j_offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelDecayParams {
    pub mode: DecayMode,
    pub j: Vec<u32>,
    pub ell1: Vec<u32>,
    pub j_offset: u32,
    pub m: f64,
    /// Radial frequency step of the summed kernels.
    pub dr: f64,
    /// Radial space nodes per `2^{-s}` at ring scale `s`.
    pub rho_per_scale: f64,
    /// Slope tolerance; defaults to 0.4 per direction, 0.3 summed.
    pub tolerance: Option<f64>,
    pub radial_periods: f64,
    pub angular_margin: f64,
    pub oversample: usize,
    pub rank: usize,
}

impl Default for KernelDecayParams {
    fn default() -> Self {
        let s = LowRankSetup::default();
        Self {
            mode: DecayMode::PerNu,
            j: (3..=7).collect(),
            ell1: (0..=3).collect(),
            j_offset: 4,
            m: -1.0,
            dr: 1.0 / 12.0,
            rho_per_scale: 6.0,
            tolerance: None,
            radial_periods: s.radial_periods,
            angular_margin: s.angular_margin,
            oversample: s.oversample,
            rank: s.rank,
        }
    }
}

impl KernelDecayParams {
    pub fn summed() -> Self {
        Self { mode: DecayMode::Summed, ..Self::default() }
    }
}

/// Per-axis `ρ` rule on `[0, R]` with `pts` nodes per `2^{-s}`.
fn rho_rule(scale: u32, pts: f64, rho_max: f64) -> crate::quad::Rule {
    radial_rule(2, (-(scale as f64)).exp2() / pts, rho_max)
}

/// Summed kernel `K_{jℓ}(·, 0)` at ring scales `scales`.
fn summed_kernel(problem: &Problem, scales: [u32; 2], m: f64, dr: f64, pts: [f64; 2]) -> Result<BiRadial> {
    let rho = [
        rho_rule(scales[0], pts[0], problem.support_radius),
        rho_rule(scales[1], pts[1], problem.support_radius),
    ];
    piece_kernel(&problem.layout, scales, problem.speeds()?, dr, bessel(m), rho)
}

pub fn kernel_l1_decay(problem: &Problem, p: &KernelDecayParams) -> Result<EstimateReport> {
    let speeds = problem.speeds()?;
    let dims = problem.layout.dims().to_vec();
    let echo = serde_json::json!({ "problem": problem.echo(), "params": p });
    match p.mode {
        DecayMode::PerNu => {
            let setup = LowRankSetup {
                radial_periods: p.radial_periods,
                angular_margin: p.angular_margin,
                oversample: p.oversample,
                rank: p.rank,
                budget_mb: problem.budget_mb,
            };
            let mut rep = EstimateReport::new("kernel-decay-per-nu", echo, 0, &["j", "mass"]);
            let profile = FreqProfile::Bessel { m: p.m };
            for &j in &p.j {
                let mass = per_direction_mass(
                    &problem.layout,
                    speeds,
                    &profile,
                    [j, j],
                    problem.grid_constant,
                    problem.support_radius,
                    &setup,
                )?;
                rep.push(vec![j as f64, mass]);
            }
            let target = -problem.codim() / 2.0;
            rep.fit_slope("j", "mass", target, p.tolerance.unwrap_or(0.4))?;
            Ok(rep)
        }
        DecayMode::Summed => {
            let mut rep = EstimateReport::new("kernel-decay-summed", echo, 0, &["ell1", "j", "mass"]);
            let masses: Vec<f64> = p
                .ell1
                .par_iter()
                .map(|&l| {
                    let j = l + p.j_offset;
                    let k = summed_kernel(problem, [j - l, j], p.m, p.dr, [p.rho_per_scale; 2])?;
                    Ok(k.mass(|a, b| problem.spatial(a, b)))
                })
                .collect::<Result<_>>()?;
            for (&l, &mass) in p.ell1.iter().zip(&masses) {
                rep.push(vec![l as f64, (l + p.j_offset) as f64, mass]);
            }
            let target = -(dims[0] as f64 - 1.0) / 2.0;
            rep.fit_slope("ell1", "mass", target, p.tolerance.unwrap_or(0.3))?;
            let worst = p
                .ell1
                .iter()
                .enumerate()
                .filter_map(|(a, &l)| {
                    let b = p.ell1.iter().position(|&q| q == l + 2)?;
                    Some(masses[b] / masses[a])
                })
                .fold(0.0f64, f64::max);
            rep.check(Check::at_most("mass(ell1 + 2) / mass(ell1)", worst, 1.5));
            Ok(rep)
        }
    }
}

/// `∫|K(x, y) - K(x, y')| dx` normalized by `2^j|y - y'|∏2^{-ℓ_i(n_i-1)/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzParams {
    pub j: Vec<u32>,
    pub ell: Vec<u32>,
    /// `|y - y'|` in units of `2^{-j}`.
    pub offset: f64,
    pub m: f64,
    pub dr: f64,
    /// Nodes per `2^{-s}` along the shifted subspace.
    pub rho_fine: f64,
    /// Nodes per `2^{-s}` along the other subspace.
    pub rho_coarse: f64,
    pub n_theta: usize,
    pub interp_order: usize,
    /// Allowed max/min of the normalized ratio across `j`.
    pub plateau: f64,
}

impl Default for LipschitzParams {
    fn default() -> Self {
        Self {
            j: (3..=6).collect(),
            ell: vec![0, 0],
            offset: 0.5,
            m: -1.0,
            dr: 1.0 / 12.0,
            rho_fine: 8.0,
            rho_coarse: 6.0,
            n_theta: 96,
            interp_order: 8,
            plateau: 4.0,
        }
    }
}

/// Relative size below which rows and columns of `|K|` are skipped.
const NEGLIGIBLE: f64 = 1e-12;

/// `∫ a(x)|K₀(x) - K₀(x - δe₁)| dx` for a bi-radial `K₀` on a uniform
/// midpoint `ρ_1` grid, with `x_1` in polar coordinates. Returns the
/// integral and an upper bound for the skipped part.
fn shifted_difference(problem: &Problem, k: &BiRadial, delta: f64, n_theta: usize, order: usize) -> (f64, f64) {
    let (n1, n2) = k.values.dim();
    let h1 = k.rho[0].nodes[1] - k.rho[0].nodes[0];
    let abs = k.values.mapv(|v| v.norm());
    let peak = abs.iter().fold(0.0f64, |m, v| m.max(*v));
    let row_max: Vec<f64> = abs.rows().into_iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(*v))).collect();
    let col_max: Vec<f64> = abs.columns().into_iter().map(|c| c.iter().fold(0.0f64, |m, v| m.max(*v))).collect();
    // rows whose interpolation stencil can reach a non-negligible row
    let reach = (delta / h1).ceil() as usize + order;
    let active_row: Vec<bool> = (0..n1)
        .map(|a| {
            let lo = a.saturating_sub(reach);
            let hi = (a + reach + 1).min(n1);
            row_max[lo..hi].iter().any(|&v| v > NEGLIGIBLE * peak)
        })
        .collect();
    let cols: Vec<usize> = (0..n2).filter(|&b| col_max[b] > NEGLIGIBLE * peak).collect();
    let skipped: f64 = (0..n1)
        .flat_map(|a| (0..n2).map(move |b| (a, b)))
        .filter(|&(a, b)| !active_row[a] || col_max[b] <= NEGLIGIBLE * peak)
        .map(|(a, b)| 2.0 * abs[[a, b]] * k.rho[0].weights[a] * k.rho[1].weights[b])
        .fold(0.0, |s, v| s + v);
    // θ ∈ (0, π) with the mirror image folded into the weight
    let dtheta = PI / n_theta as f64;
    let total: f64 = (0..n1)
        .into_par_iter()
        .filter(|&a| active_row[a])
        .map(|a| {
            let r1 = k.rho[0].nodes[a];
            let w1 = h1 * r1;
            let mut acc = 0.0;
            let mut row = vec![Complex64::new(0.0, 0.0); cols.len()];
            for t in 0..n_theta {
                let th = (t as f64 + 0.5) * dtheta;
                let shifted = (r1 * r1 - 2.0 * r1 * delta * th.cos() + delta * delta).sqrt();
                let stencil = interp_weights(n1, h1, shifted, order);
                row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for (idx, w) in &stencil {
                    let src = k.values.row(*idx);
                    for (slot, &b) in row.iter_mut().zip(&cols) {
                        *slot += src[b] * *w;
                    }
                }
                let here = k.values.row(a);
                for (v, &b) in row.iter().zip(&cols) {
                    let r2 = k.rho[1].nodes[b];
                    let ax = problem.spatial(r1, r2);
                    if ax != 0.0 {
                        acc += (here[b] - v).norm() * ax * k.rho[1].weights[b];
                    }
                }
            }
            acc * w1 * 2.0 * dtheta
        })
        .sum();
    (total, skipped)
}

pub fn kernel_lipschitz_ratio(problem: &Problem, p: &LipschitzParams) -> Result<EstimateReport> {
    let dims = problem.layout.dims().to_vec();
    if p.ell.len() != 2 {
        return Err(Error::Layout("ℓ needs one entry per subspace".into()));
    }
    if !(p.offset > 0.0 && p.offset <= 1.0) {
        return Err(Error::Domain(format!("offset {} must lie in (0, 1] units of 2^-j", p.offset)));
    }
    if p.offset * p.rho_fine < 1.0 {
        return Err(Error::Resolution(format!(
            "offset {} is below the radial grid step 1/{}",
            p.offset, p.rho_fine
        )));
    }
    let ell_max = *p.ell.iter().max().expect("two entries");
    let mut rep = EstimateReport::new(
        "kernel-lipschitz",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        0,
        &["j", "offset", "integral", "ratio", "skipped_bound"],
    );
    let decay: f64 = p
        .ell
        .iter()
        .zip(&dims)
        .map(|(&l, &n)| (-(l as f64) * (n as f64 - 1.0) / 2.0).exp2())
        .product();
    for &j in &p.j {
        if j < ell_max {
            return Err(Error::Domain(format!("j = {j} is below max ℓ_i = {ell_max}")));
        }
        let scales = [j - p.ell[0], j - p.ell[1]];
        let k = summed_kernel(problem, scales, p.m, p.dr, [p.rho_fine, p.rho_coarse])?;
        let delta = p.offset * (-(j as f64)).exp2();
        let (integral, skipped) = shifted_difference(problem, &k, delta, p.n_theta, p.interp_order);
        let ratio = integral / ((j as f64).exp2() * delta * decay);
        rep.push(vec![j as f64, delta, integral, ratio, skipped]);
    }
    let ratios = rep.column("ratio").expect("column");
    let hi = ratios.iter().fold(0.0f64, |m, v| m.max(*v));
    let lo = ratios.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    rep.check(Check::at_most("max/min normalized ratio across j", hi / lo, p.plateau));
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRegion {
    Q,
    QEll,
}

/// `∫_{Q^c}|K_{jℓ}(x, 0)| dx` with `Q` centred at `ȳ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelTailParams {
    pub region: TailRegion,
    pub k: u32,
    pub ell: Vec<u32>,
    pub j: Vec<u32>,
    pub j_cap: u32,
    pub n_theta: usize,
    pub m: f64,
    pub dr: f64,
    pub rho_per_scale: f64,
    pub target: f64,
    pub tolerance: f64,
}

impl Default for KernelTailParams {
    fn default() -> Self {
        Self {
            region: TailRegion::Q,
            k: 2,
            ell: vec![0, 0],
            j: (4..=7).collect(),
            j_cap: 9,
            n_theta: 720,
            m: -1.0,
            dr: 1.0 / 12.0,
            rho_per_scale: 6.0,
            target: -1.0,
            tolerance: 0.4,
        }
    }
}

impl KernelTailParams {
    pub fn q_ell() -> Self {
        Self { region: TailRegion::QEll, k: 3, ell: vec![2, 0], j: (4..=6).collect(), ..Self::default() }
    }
}

/// Angular fractions `(inside, inside or unknown)` of the circle of each radius.
fn block_fractions(region: &InfluenceRegion, i: usize, rho: &[f64], n_theta: usize) -> Vec<(f64, f64)> {
    rho.par_iter()
        .map(|&r| {
            let (mut inside, mut maybe) = (0usize, 0usize);
            for t in 0..n_theta {
                let th = 2.0 * PI * (t as f64 + 0.5) / n_theta as f64;
                match region.contains_block(i, &[r * th.cos(), r * th.sin()]) {
                    Membership::Inside => {
                        inside += 1;
                        maybe += 1;
                    }
                    Membership::Unknown => maybe += 1,
                    Membership::Outside => {}
                }
            }
            (inside as f64 / n_theta as f64, maybe as f64 / n_theta as f64)
        })
        .collect()
}

pub fn kernel_tail_outside(problem: &Problem, p: &KernelTailParams) -> Result<EstimateReport> {
    if p.ell.len() != 2 {
        return Err(Error::Layout("ℓ needs one entry per subspace".into()));
    }
    let ell_max = *p.ell.iter().max().expect("two entries");
    let kind = match p.region {
        TailRegion::Q => RegionKind::Q { k: p.k },
        TailRegion::QEll => RegionKind::QEll { k: p.k, ell: p.ell.clone() },
    };
    let threshold = match p.region {
        TailRegion::Q => (p.k + ell_max) as f64,
        TailRegion::QEll => p.k as f64 + ell_max as f64 / 4.0,
    };
    if let Some(&j) = p.j.iter().find(|&&j| (j as f64) <= threshold) {
        return Err(Error::Domain(format!("j = {j} does not exceed {threshold}")));
    }
    let region = InfluenceRegion::new(problem.phase.clone(), vec![0.0; 4], problem.c_r, p.j_cap, kind)?;
    let name = match p.region {
        TailRegion::Q => "kernel-tail",
        TailRegion::QEll => "kernel-tail-qell",
    };
    let mut rep = EstimateReport::new(
        name,
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        0,
        &["j", "total", "tail", "unknown_share"],
    );
    for &j in &p.j {
        let scales = [j - p.ell[0], j - p.ell[1]];
        let k = summed_kernel(problem, scales, p.m, p.dr, [p.rho_per_scale; 2])?;
        let f1 = block_fractions(&region, 0, &k.rho[0].nodes, p.n_theta);
        let f2 = block_fractions(&region, 1, &k.rho[1].nodes, p.n_theta);
        let (mut total, mut tail, mut unknown) = (0.0, 0.0, 0.0);
        for (a, (&r1, &w1)) in k.rho[0].nodes.iter().zip(&k.rho[0].weights).enumerate() {
            for (b, (&r2, &w2)) in k.rho[1].nodes.iter().zip(&k.rho[1].weights).enumerate() {
                let ax = problem.spatial(r1, r2);
                if ax == 0.0 {
                    continue;
                }
                let v = k.values[[a, b]].norm() * ax * w1 * w2;
                total += v;
                // unknown points count as inside, so the tail is not overstated
                tail += v * (1.0 - f2[b].1 * f1[a].1);
                unknown += v * (f1[a].1 * f2[b].1 - f1[a].0 * f2[b].0);
            }
        }
        let share = if total > 0.0 { unknown / total } else { 0.0 };
        if share > 0.05 {
            rep.flag(format!("j = {j}: {:.1}% of the mass has undecided membership", 100.0 * share));
        }
        rep.push(vec![j as f64, total, tail, share]);
    }
    match p.region {
        TailRegion::Q => {
            rep.fit_slope("j", "tail", p.target, p.tolerance)?;
        }
        TailRegion::QEll => {
            let tails = rep.column("tail").expect("column");
            let monotone = tails.windows(2).all(|w| w[1] < w[0]);
            rep.check(Check::holds("tail strictly decreasing in j", monotone));
        }
    }
    Ok(rep)
}
