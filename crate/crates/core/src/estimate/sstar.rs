//! Off-diagonal decay of the `S*S` kernel
//! `K(ξ, η) = ∫ e^{2πi(Φ(x,ξ) - Φ(x,η))} σ(x,ξ) conj σ(x,η) dx` for pairs in a
//! narrow cone.
//!
//! With `σ = a(x) s(ξ)` and a radial `a`, the integrand splits into per-block
//! phase factors and `a(x)²`, which depends only on `(|x_1|², |x_2|²)`. On a
//! midpoint grid those radii take few distinct values, so the phase factors
//! are binned by radius first.

use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::fft::cis;
use crate::engine::radial::hankel;
use crate::error::{Error, Result};
use crate::partition::{mollifier, norm};
use crate::phase::PhaseComponent;
use crate::quad::Rule;
use crate::symbol::FreqProfile;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SstarParams {
    /// `|ξ|` for every pair.
    pub xi_radius: f64,
    /// Direction of `ξ`.
    pub xi_direction: Vec<f64>,
    /// `η = ξ + δ·offset_direction`.
    pub offset_direction: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Largest allowed `|ξ/|ξ| - η/|η||`.
    pub aperture: f64,
    /// Nodes per coordinate on `[-R, R]`.
    pub nodes: usize,
    /// `R` in `a(x) = φ(2|x|/R)`.
    pub support_radius: f64,
    pub m: f64,
    /// Allowed growth of `|K|(1 + |ξ - η|)^4` over its value at the first pair.
    pub bound_factor: f64,
    /// Tolerance of the identity-phase comparison, relative to `∫|σ|²`.
    pub oracle_tolerance: f64,
}

impl Default for SstarParams {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            xi_radius: 64.0,
            xi_direction: vec![h, 0.0, h, 0.0],
            offset_direction: vec![0.0, h, 0.0, h],
            deltas: (0..10).map(|k| (4.0 * k as f64 / 9.0).exp2()).collect(),
            aperture: 0.25,
            nodes: 96,
            support_radius: 1.0,
            m: 0.0,
            bound_factor: 10.0,
            oracle_tolerance: 1e-8,
        }
    }
}

/// Radius bins of one block: `key = Σ (2k + 1 - N)²` per node, so that
/// `|x_i|² = key·(R/N)²` exactly.
struct Bins {
    keys: Vec<u64>,
    /// Bin index of every node, row-major over the block's axes.
    of_node: Vec<usize>,
    /// Node coordinates, row-major.
    coords: Vec<Vec<f64>>,
}

fn bins(dim: usize, nodes: usize, radius: f64) -> Bins {
    let total = nodes.pow(dim as u32);
    let step = 2.0 * radius / nodes as f64;
    let mut raw = Vec::with_capacity(total);
    let mut coords = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut key = 0u64;
        let mut x = vec![0.0; dim];
        for c in (0..dim).rev() {
            let k = rest % nodes;
            rest /= nodes;
            let odd = 2 * k as i64 + 1 - nodes as i64;
            key += (odd * odd) as u64;
            x[c] = -radius + (k as f64 + 0.5) * step;
        }
        raw.push(key);
        coords.push(x);
    }
    let index: BTreeMap<u64, usize> = {
        let mut uniq: Vec<u64> = raw.clone();
        uniq.sort_unstable();
        uniq.dedup();
        uniq.into_iter().enumerate().map(|(i, k)| (k, i)).collect()
    };
    let keys = index.keys().copied().collect();
    let of_node = raw.iter().map(|k| index[k]).collect();
    Bins { keys, of_node, coords }
}

/// `Σ_{x_i in bin} e^{2πi(Φ_i(x_i, ξ_i) - Φ_i(x_i, η_i))}` per radius bin.
fn binned_phase(b: &Bins, c: &Arc<dyn PhaseComponent>, xi: &[f64], eta: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); b.keys.len()];
    for (x, &k) in b.coords.iter().zip(&b.of_node) {
        out[k] += cis(c.value(x, xi) - c.value(x, eta));
    }
    out
}

/// `∫ e^{2πi(Φ(x,ξ) - Φ(x,η))} a(x)² dx` by the binned midpoint sum.
struct PairKernel {
    blocks: [Bins; 2],
    weight: Array2<f64>,
    cell: f64,
}

impl PairKernel {
    fn new(dims: [usize; 2], nodes: usize, radius: f64) -> Self {
        let b1 = bins(dims[0], nodes, radius);
        let b2 = bins(dims[1], nodes, radius);
        let unit = radius / nodes as f64;
        let weight = Array2::from_shape_fn((b1.keys.len(), b2.keys.len()), |(a, b)| {
            let r = ((b1.keys[a] + b2.keys[b]) as f64).sqrt() * unit;
            mollifier(2.0 * r / radius).powi(2)
        });
        let cell = (2.0 * radius / nodes as f64).powi((dims[0] + dims[1]) as i32);
        Self { blocks: [b1, b2], weight, cell }
    }

    fn eval(&self, comps: &[Arc<dyn PhaseComponent>], xi: [&[f64]; 2], eta: [&[f64]; 2]) -> Complex64 {
        let f1 = binned_phase(&self.blocks[0], &comps[0], xi[0], eta[0]);
        let f2 = binned_phase(&self.blocks[1], &comps[1], xi[1], eta[1]);
        let mut total = Complex64::new(0.0, 0.0);
        for (a, u) in f1.iter().enumerate() {
            let row = self.weight.row(a);
            let inner: Complex64 = row.iter().zip(&f2).map(|(w, v)| v * *w).sum();
            total += u * inner;
        }
        total * self.cell
    }
}

/// `∫_{ℝ^n} a(|x|)² e^{2πi x·ζ} dx` at `|ζ| = dist` by a radial transform.
fn radial_oracle(n: usize, radius: f64, dist: f64) -> Result<f64> {
    let rule = Rule::gauss_uniform(0.0, radius, radius / 32.0, 16);
    let h = hankel(n, &[dist], &rule)?;
    Ok((0..rule.len()).map(|b| h[[0, b]] * mollifier(2.0 * rule.nodes[b] / radius).powi(2)).sum())
}

fn unit(v: &[f64]) -> Vec<f64> {
    let r = norm(v);
    v.iter().map(|x| x / r).collect()
}

pub fn sstar_s_decay(problem: &Problem, p: &SstarParams) -> Result<EstimateReport> {
    let layout = &problem.layout;
    if layout.d() != 2 {
        return Err(Error::Unsupported(format!("the S*S kernel runs on two subspaces, got d = {}", layout.d())));
    }
    let n = layout.n();
    if p.xi_direction.len() != n || p.offset_direction.len() != n {
        return Err(Error::Layout(format!("pair directions need {n} entries")));
    }
    if p.deltas.len() < 2 {
        return Err(Error::Domain("need at least two pairs".into()));
    }
    let u = unit(&p.xi_direction);
    let v = unit(&p.offset_direction);
    let xi: Vec<f64> = u.iter().map(|c| c * p.xi_radius).collect();
    let dims = [layout.dims()[0], layout.dims()[1]];
    let kernel = PairKernel::new(dims, p.nodes, p.support_radius);
    let profile = FreqProfile::Bessel { m: p.m };
    let s = |z: &[f64]| profile.eval_radii(&layout.block_norms(z));
    let identity = crate::phase::Phase::identity(layout.clone());
    let diag = radial_oracle(n, p.support_radius, 0.0)?;
    let mut rep = EstimateReport::new(
        "sstar-s",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        0,
        &["delta", "angle", "k_abs", "k_n2", "k_n4", "identity_err"],
    );
    let split = |z: &[f64]| -> (Vec<f64>, Vec<f64>) { (z[..dims[0]].to_vec(), z[dims[0]..].to_vec()) };
    let (x1, x2) = split(&xi);
    let same = kernel.eval(&problem.phase.components, [&x1, &x2], [&x1, &x2]).norm() * s(&xi).powi(2);
    rep.check(Check::at_most("diagonal against the integral of |σ|²", (same - diag * s(&xi).powi(2)).abs() / (diag * s(&xi).powi(2)), p.oracle_tolerance));
    for &delta in &p.deltas {
        let eta: Vec<f64> = xi.iter().zip(&v).map(|(a, b)| a + delta * b).collect();
        let angle = norm(&u.iter().zip(unit(&eta)).map(|(a, b)| a - b).collect::<Vec<_>>());
        if angle > p.aperture {
            return Err(Error::Domain(format!(
                "pair at |ξ - η| = {delta} leaves the cone: |ξ/|ξ| - η/|η|| = {angle:.3} > {}",
                p.aperture
            )));
        }
        let (e1, e2) = split(&eta);
        let scale = s(&xi) * s(&eta);
        let k = kernel.eval(&problem.phase.components, [&x1, &x2], [&e1, &e2]).norm() * scale;
        let k_id = kernel.eval(&identity.components, [&x1, &x2], [&e1, &e2]).norm();
        let exact = radial_oracle(n, p.support_radius, delta)?.abs();
        let err = (k_id - exact).abs() / diag;
        rep.push(vec![delta, angle, k, k * (1.0 + delta).powi(2), k * (1.0 + delta).powi(4), err]);
    }
    let n4 = rep.column("k_n4").expect("column");
    let worst = n4.iter().fold(0.0f64, |m, v| m.max(*v));
    rep.check(Check::at_most("max |K|(1+|ξ-η|)^4 over its value at the first pair", worst / n4[0], p.bound_factor));
    let err = rep.column("identity_err").expect("column").into_iter().fold(0.0f64, f64::max);
    rep.check(Check::at_most("identity phase against the radial transform of |σ|²", err, p.oracle_tolerance));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_recover_radii() {
        let b = bins(2, 6, 1.5);
        for (x, &k) in b.coords.iter().zip(&b.of_node) {
            let r2 = x[0] * x[0] + x[1] * x[1];
            assert!((r2 - b.keys[k] as f64 * (1.5f64 / 6.0).powi(2)).abs() < 1e-13);
        }
        // 6 odd offsets per axis, symmetric: keys are sums of two of {1, 9, 25}
        assert_eq!(b.keys, vec![2, 10, 18, 26, 34, 50]);
    }

    #[test]
    fn identity_phase_matches_radial_transform() {
        let layout = crate::partition::SubspaceLayout::new(vec![2, 2]).unwrap();
        let k = PairKernel::new([2, 2], 32, 1.0);
        let id = crate::phase::Phase::identity(layout);
        let a = [1.0, 0.0];
        let b = [1.5, 0.5];
        let got = k.eval(&id.components, [&a, &a], [&b, &b]).norm();
        let dist = (2.0f64 * 0.5 * 0.5 + 2.0 * 0.5 * 0.5).sqrt();
        let want = radial_oracle(4, 1.0, dist).unwrap().abs();
        assert!((got - want).abs() < 1e-6 * radial_oracle(4, 1.0, 0.0).unwrap(), "{got} vs {want}");
    }

    #[test]
    fn pairs_outside_the_cone_are_rejected() {
        let p = SstarParams { deltas: vec![1.0, 40.0], nodes: 8, ..Default::default() };
        let err = sstar_s_decay(&Problem::default(), &p).unwrap_err();
        assert!(err.to_string().contains("leaves the cone"), "{err}");
    }
}
