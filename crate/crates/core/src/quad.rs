//! One-dimensional quadrature rules shared by the window tables and the
//! radial engines.

use gauss_quad::legendre::GaussLegendre;
use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Mutex, OnceLock};

/// Gauss–Legendre nodes and weights on [-1, 1], ascending, cached per order.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(order.max(1)).unwrap());
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.into_iter().unzip()
        })
        .clone()
}

/// A discrete rule `∫ g(r) dr ≈ Σ w_k g(r_k)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Composite Gauss–Legendre over the given panel edges.
    pub fn gauss_panels(edges: &[f64], order: usize) -> Rule {
        let (x, w) = gauss_legendre(order);
        let mut rule = Rule::default();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(&w) {
                rule.nodes.push(mid + half * xi);
                rule.weights.push(half * wi);
            }
        }
        rule
    }

    /// Composite Gauss–Legendre with panels no wider than `width`.
    pub fn gauss_uniform(a: f64, b: f64, width: f64, order: usize) -> Rule {
        let n = ((b - a) / width).ceil().max(1.0) as usize;
        let edges: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        Rule::gauss_panels(&edges, order)
    }

    /// Midpoint rule with spacing no larger than `step`. Spectrally accurate
    /// for integrands that vanish smoothly at both ends.
    pub fn midpoint(a: f64, b: f64, step: f64) -> Rule {
        let n = ((b - a) / step).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        Rule {
            nodes: (0..n).map(|k| a + (k as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Multiplies every weight by `f(node)`.
    pub fn weighted(mut self, f: impl Fn(f64) -> f64) -> Rule {
        for (r, w) in self.nodes.iter().zip(self.weights.iter_mut()) {
            *w *= f(*r);
        }
        self
    }

    pub fn concat(mut self, other: Rule) -> Rule {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
        self
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * f(*r)).sum()
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let r = Rule::gauss_uniform(0.0, 2.0, 0.5, 8);
        let v = r.integrate(|x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn midpoint_is_spectral_for_bumps() {
        let r = Rule::midpoint(-1.0, 1.0, 0.01);
        let bump = |x: f64| if x.abs() < 1.0 { (-1.0 / (1.0 - x * x)).exp() } else { 0.0 };
        let g = Rule::gauss_uniform(-1.0, 1.0, 0.01, 16).integrate(bump);
        assert!((r.integrate(bump) - g).abs() < 1e-10);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }
}
