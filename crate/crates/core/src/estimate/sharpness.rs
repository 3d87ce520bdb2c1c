//! Growth of `‖T_m f_α‖_{L^p}` under frequency truncation, for the wave
//! phase on two circle subspaces.
//!
//! `f̂_α(ξ) = ∏ γ_{α_i}(|ξ_i|)` and `σ = a(x) ∏ γ_{-m_i}(|ξ_i|) Ψ(ξ) φ(|ξ|/R)`, so
//! `T_m f_α` is bi-radial: `K = H_1 (g_1 ⊗ g_2 · C) H_2ᵀ` with `C = Ψ φ(|·|/R)`.
//! The smooth factor `C` is interpolated on Chebyshev panels with geometric
//! edges, which keeps the inner dimension small while `H` runs over the
//! full radial rule up to `2R`.

use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::fft::cis;
use crate::error::{Error, Result};
use crate::partition::mollifier;
use crate::quad::Rule;
use crate::symbol::{cone_cutoff, gamma};
use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessParams {
    pub p: f64,
    /// Total orders `m`, split equally over the subspaces.
    pub arms: Vec<f64>,
    /// Truncation radii `R`, a dyadic ladder.
    pub cutoffs: Vec<f64>,
    /// `a(x) = φ(2|x|/support_radius)`.
    pub support_radius: f64,
    pub rho_max: f64,
    /// Midpoint step of the `|ξ_i|` rule past 4.
    pub dr: f64,
    /// Chebyshev nodes per interpolation panel.
    pub cheb_nodes: usize,
    /// Ratio between consecutive panel edges.
    pub panel_ratio: f64,
    /// Gauss nodes per `ρ` panel.
    pub rho_order: usize,
    /// Smallest growth ratio required above the threshold.
    pub growth: f64,
    /// Largest final ratio allowed below the threshold.
    pub saturation: f64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        Self {
            p: 4.0,
            arms: vec![0.0, -0.8],
            cutoffs: vec![512.0, 1024.0, 2048.0, 4096.0],
            support_radius: 3.0,
            rho_max: 3.0,
            dr: 1.0 / 12.0,
            cheb_nodes: 24,
            panel_ratio: 2f64.powf(0.25),
            rho_order: 16,
            growth: 1.2,
            saturation: 1.05,
        }
    }
}

/// `-(n - d)(1/2 - 1/p)`.
pub fn critical_order(problem: &Problem, p: f64) -> f64 {
    -problem.codim() * (0.5 - 1.0 / p)
}

/// `α_i` from `(α_i - m_i - n_i/2 - 1/2)p = -1` at the critical block order
/// `m_i = -(n_i - 1)(1/2 - 1/p)`.
pub fn critical_alpha(n_i: usize, p: f64) -> f64 {
    let m_i = -(n_i as f64 - 1.0) * (0.5 - 1.0 / p);
    m_i + n_i as f64 / 2.0 + 0.5 - 1.0 / p
}

/// `|ξ_i|` rule on `[0, top]`: Gauss panels on `[0, 8]` weighted by `φ(r/4)`
/// plus a midpoint rule on `[4, top]` weighted by `1 - φ(r/4)`.
fn frequency_rule(top: f64, dr: f64) -> Rule {
    let low = Rule::gauss_uniform(0.0, 8.0, 0.25, 16).weighted(|r| mollifier(r / 4.0));
    let high = Rule::midpoint(4.0, top, dr).weighted(|r| 1.0 - mollifier(r / 4.0));
    low.concat(high)
}

/// Gauss panels on `[0, rho_max]`, graded towards the singular sphere `ρ = c`.
fn graded_rho_rule(c: f64, cutoff: f64, rho_max: f64, order: usize) -> Rule {
    let levels = (8.0 * cutoff).log2().ceil() as i32;
    let mut edges = vec![0.0, 0.5 * c, c, 2.0 * c, 2.5 * c, rho_max];
    for k in 2..=levels {
        let h = (-k as f64).exp2();
        edges.push(c - h);
        edges.push(c + h);
    }
    edges.retain(|&e| (0.0..=rho_max).contains(&e));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    Rule::gauss_panels(&edges, order)
}

/// Piecewise Chebyshev interpolation on panels `[e_k, e_{k+1}]`.
struct ChebPanels {
    edges: Vec<f64>,
    x: Vec<f64>,
    w: Vec<f64>,
}

impl ChebPanels {
    fn new(lo: f64, top: f64, ratio: f64, nodes: usize) -> Self {
        let mut edges = vec![lo];
        let mut e = 1.0f64.max(lo * ratio);
        while *edges.last().expect("non-empty") < top {
            edges.push(e.min(top).max(*edges.last().expect("non-empty")));
            e *= ratio;
        }
        edges.dedup();
        let x = (0..nodes).map(|k| (PI * (2 * k + 1) as f64 / (2 * nodes) as f64).cos()).collect();
        let w = (0..nodes)
            .map(|k| {
                let s = (PI * (2 * k + 1) as f64 / (2 * nodes) as f64).sin();
                if k % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        Self { edges, x, w }
    }

    fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    fn len(&self) -> usize {
        self.panels() * self.x.len()
    }

    fn nodes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.panels() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            out.extend(self.x.iter().map(|t| 0.5 * (a + b) + 0.5 * (b - a) * t));
        }
        out
    }

    /// Panel index and barycentric weights at `r`, or `None` below the first edge.
    fn basis(&self, r: f64) -> Option<(usize, Vec<f64>)> {
        if r < self.edges[0] {
            return None;
        }
        let r = r.min(*self.edges.last().expect("non-empty"));
        let k = (self.edges.partition_point(|&e| e <= r).max(1) - 1).min(self.panels() - 1);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let t = (2.0 * r - a - b) / (b - a);
        if let Some(hit) = self.x.iter().position(|&x| x == t) {
            let mut e = vec![0.0; self.x.len()];
            e[hit] = 1.0;
            return Some((k, e));
        }
        let raw: Vec<f64> = self.x.iter().zip(&self.w).map(|(x, w)| w / (t - x)).collect();
        let s: f64 = raw.iter().sum();
        Some((k, raw.into_iter().map(|v| v / s).collect()))
    }
}

/// `Hh[a, k] = Σ_r 2π r J0(2πρ_a r) w_r g(r) L_k(r)`, one row per `ρ` node.
fn projected_hankel(rho: &[f64], r: &Rule, g: &[Complex64], basis: &[Option<(usize, Vec<f64>)>], width: usize, cols: usize) -> Array2<Complex64> {
    let rows: Vec<Vec<Complex64>> = rho
        .par_iter()
        .map(|&p| {
            let mut row = vec![Complex64::new(0.0, 0.0); cols];
            for ((&q, &w), (gv, b)) in r.nodes.iter().zip(&r.weights).zip(g.iter().zip(basis)) {
                if let Some((k, l)) = b {
                    let c = gv * (TAU * q * w * puruspe::Jn(0, TAU * p * q));
                    for (slot, lv) in row[k * width..(k + 1) * width].iter_mut().zip(l) {
                        *slot += c * *lv;
                    }
                }
            }
            row
        })
        .collect();
    Array2::from_shape_fn((rho.len(), cols), |(a, k)| rows[a][k])
}

fn split(a: &Array2<Complex64>) -> (Array2<f64>, Array2<f64>) {
    (a.mapv(|v| v.re), a.mapv(|v| v.im))
}

/// `L^p` norm of `a(x)·T_m f_α` for one arm and cutoff.
fn truncated_norm(problem: &Problem, p: &SharpnessParams, m: f64, cutoff: f64, speeds: [f64; 2]) -> Result<f64> {
    let dims = problem.layout.dims();
    let alpha = [critical_alpha(dims[0], p.p), critical_alpha(dims[1], p.p)];
    let m_i = m / dims.len() as f64;
    let r = frequency_rule(2.0 * cutoff, p.dr);
    let cheb = ChebPanels::new(0.5, 2.0 * cutoff, p.panel_ratio, p.cheb_nodes);
    let nodes = cheb.nodes();
    let basis: Vec<_> = r.nodes.iter().map(|&q| cheb.basis(q)).collect();
    let rho = graded_rho_rule(speeds[0], cutoff, p.rho_max, p.rho_order);
    let hh: Vec<Array2<Complex64>> = (0..2)
        .map(|i| {
            if i == 1 && speeds[1] == speeds[0] && alpha[1] == alpha[0] {
                return None;
            }
            let g: Vec<Complex64> =
                r.nodes.iter().map(|&q| cis(speeds[i] * q) * gamma(alpha[i], q) * gamma(-m_i, q)).collect();
            Some(projected_hankel(&rho.nodes, &r, &g, &basis, p.cheb_nodes, cheb.len()))
        })
        .scan(None::<Array2<Complex64>>, |first, h| {
            let out = match h {
                Some(h) => h,
                None => first.clone().expect("first block"),
            };
            if first.is_none() {
                *first = Some(out.clone());
            }
            Some(out)
        })
        .collect();
    let c = Array2::from_shape_fn((nodes.len(), nodes.len()), |(a, b)| {
        cone_cutoff(&[nodes[a], nodes[b]]) * mollifier(nodes[a].hypot(nodes[b]) / cutoff)
    });
    let (ar, ai) = split(&hh[0]);
    let (br, bi) = split(&hh[1]);
    let (cr, ci) = (ar.dot(&c), ai.dot(&c));
    let re = cr.dot(&br.t()) - ci.dot(&bi.t());
    let im = cr.dot(&bi.t()) + ci.dot(&br.t());
    let wt: Vec<f64> = rho.nodes.iter().zip(&rho.weights).map(|(q, w)| TAU * q * w).collect();
    let mut total = 0.0;
    Zip::indexed(&re).and(&im).for_each(|(a, b), &x, &y| {
        let ax = mollifier(2.0 * rho.nodes[a].hypot(rho.nodes[b]) / p.support_radius);
        if ax != 0.0 {
            total += (Complex64::new(x, y).norm() * ax).powf(p.p) * wt[a] * wt[b];
        }
    });
    Ok(total.powf(1.0 / p.p))
}

pub fn sharpness_growth(problem: &Problem, p: &SharpnessParams) -> Result<EstimateReport> {
    if !(p.p > 2.0 && p.p.is_finite()) {
        return Err(Error::Domain(format!("the construction needs 2 < p < ∞, got p = {}", p.p)));
    }
    let speeds = problem.speeds()?;
    let dims = problem.layout.dims().to_vec();
    for &m in &p.arms {
        let m_i = m / dims.len() as f64;
        if let Some(&n_i) = dims.iter().find(|&&n| !(m_i > -(n as f64 - 1.0) && m_i <= 0.0)) {
            return Err(Error::Domain(format!("block order m_i = {m_i} must lie in (-(n_i - 1), 0] for n_i = {n_i}")));
        }
    }
    if p.cutoffs.len() < 2 || p.cutoffs.windows(2).any(|w| (w[1] / w[0] - 2.0).abs() > 1e-12) {
        return Err(Error::Domain("cutoffs must be a dyadic ladder of at least two radii".into()));
    }
    let threshold = critical_order(problem, p.p);
    let mut rep = EstimateReport::new(
        "sharpness",
        serde_json::json!({
            "problem": problem.echo(),
            "params": p,
            "threshold": threshold,
            "alpha": dims.iter().map(|&n| critical_alpha(n, p.p)).collect::<Vec<_>>(),
        }),
        0,
        &["m", "cutoff", "norm", "ratio"],
    );
    for &m in &p.arms {
        let mut ratios = Vec::new();
        let mut prev: Option<f64> = None;
        for &cutoff in &p.cutoffs {
            let v = truncated_norm(problem, p, m, cutoff, speeds)?;
            // 0 marks the first cutoff of an arm
            let ratio = prev.map_or(0.0, |q| v / q);
            if prev.is_some() {
                ratios.push(ratio);
            }
            rep.push(vec![m, cutoff, v, ratio]);
            prev = Some(v);
        }
        let norms = rep.rows.iter().filter(|r| r[0] == m).map(|r| r[2]);
        rep.check(Check::holds(&format!("finite truncated norms at m = {m}"), norms.clone().all(f64::is_finite)));
        if m > threshold {
            let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            rep.check(Check::at_least(&format!("smallest growth ratio at m = {m}"), worst, p.growth));
        } else if m < threshold {
            let last = *ratios.last().expect("two cutoffs");
            rep.check(Check::at_most(&format!("final ratio at m = {m}"), last, p.saturation));
        }
    }
    Ok(rep)
}
