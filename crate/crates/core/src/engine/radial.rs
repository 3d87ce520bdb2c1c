//! Bi-radial evaluation for two-subspace layouts: when the window, symbol
//! and phase depend on `ξ` only through `(|ξ_1|, |ξ_2|)`, a kernel column
//! at `y = 0` is a function of `(|x_1|, |x_2|)` and factors through radial
//! Fourier transforms `K = H_1 M H_2ᵀ`.

use crate::error::{Error, Result};
use crate::partition::SubspaceLayout;
use crate::quad::Rule;
use ndarray::{Array2, Zip};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Radial quadrature for the support of `φ_j`: Gauss panels on `[0, 2]` for
/// the low block, a midpoint rule of step `dr` on `[2^{j-1}, 2^{j+1}]`
/// otherwise.
pub fn ring_rule(j: u32, dr: f64) -> Rule {
    if j == 0 {
        Rule::gauss_uniform(0.0, 2.0, 0.25, 16)
    } else {
        Rule::midpoint(((j - 1) as f64).exp2(), ((j + 1) as f64).exp2(), dr)
    }
}

/// Surface measure of the radius-`rho` sphere in `ℝ^n`.
pub fn shell_measure(n: usize, rho: f64) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / puruspe::gamma(half) * rho.powi(n as i32 - 1)
}

/// Midpoint rule in `ρ` on `[0, rho_max]`, weights including the shell
/// measure so that it integrates radial functions over `ℝ^n`.
pub fn radial_rule(n: usize, step: f64, rho_max: f64) -> Rule {
    Rule::midpoint(0.0, rho_max, step).weighted(|r| shell_measure(n, r))
}

/// `H[a, b]` with `Σ_b H[a, b] g(r_b) ≈ ∫_{ℝ^n} g(|ξ|) e^{2πi x·ξ} dξ` at `|x| = ρ_a`.
pub fn hankel(n: usize, rho: &[f64], r: &Rule) -> Result<Array2<f64>> {
    let kernel: Box<dyn Fn(f64, f64) -> f64> = match n {
        2 => Box::new(|p, q| TAU * q * puruspe::Jn(0, TAU * p * q)),
        3 => Box::new(|p, q| {
            let z = TAU * p * q;
            if z == 0.0 {
                4.0 * PI * q * q
            } else {
                2.0 * q * z.sin() / p
            }
        }),
        n if n % 2 == 0 => {
            let order = (n / 2 - 1) as u32;
            Box::new(move |p: f64, q: f64| {
                if p == 0.0 {
                    return shell_measure(n, q);
                }
                TAU * q.powf(n as f64 / 2.0) * p.powf(1.0 - n as f64 / 2.0) * puruspe::Jn(order, TAU * p * q)
            })
        }
        _ => return Err(Error::Unsupported(format!("radial transform in odd dimension {n} > 3"))),
    };
    Ok(Array2::from_shape_fn((rho.len(), r.len()), |(a, b)| kernel(rho[a], r.nodes[b]) * r.weights[b]))
}

/// `h · m` for real `h`.
pub fn real_left(h: &Array2<f64>, m: &Array2<Complex64>) -> Array2<Complex64> {
    let re = h.dot(&m.mapv(|v| v.re));
    let im = h.dot(&m.mapv(|v| v.im));
    Zip::from(&re).and(&im).map_collect(|&a, &b| Complex64::new(a, b))
}

/// `m · hᵀ` for real `h`.
pub fn real_right_t(m: &Array2<Complex64>, h: &Array2<f64>) -> Array2<Complex64> {
    let re = m.mapv(|v| v.re).dot(&h.t());
    let im = m.mapv(|v| v.im).dot(&h.t());
    Zip::from(&re).and(&im).map_collect(|&a, &b| Complex64::new(a, b))
}

/// Samples of a bi-radial function on `ρ`-rules in each subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct BiRadial {
    pub rho: [Rule; 2],
    pub values: Array2<Complex64>,
}

fn check_two(layout: &SubspaceLayout) -> Result<()> {
    if layout.d() != 2 {
        return Err(Error::Unsupported(format!("bi-radial evaluation needs d = 2, got {}", layout.d())));
    }
    Ok(())
}

impl BiRadial {
    /// `K(ρ_1, ρ_2) = Σ_{a,b} H_1[ρ_1, r_a] M[a, b] H_2[ρ_2, r_b]`, where `M`
    /// holds the multiplier on the product of the `r` rules (weights are in
    /// the Hankel matrices).
    pub fn synthesize(layout: &SubspaceLayout, rho: [Rule; 2], r: [&Rule; 2], m: &Array2<Complex64>) -> Result<Self> {
        check_two(layout)?;
        if m.dim() != (r[0].len(), r[1].len()) {
            return Err(Error::GridMismatch(format!(
                "multiplier of shape {:?} on rules of lengths {} and {}",
                m.dim(),
                r[0].len(),
                r[1].len()
            )));
        }
        let dims = layout.dims();
        let h1 = hankel(dims[0], &rho[0].nodes, r[0])?;
        let h2 = hankel(dims[1], &rho[1].nodes, r[1])?;
        let values = real_right_t(&real_left(&h1, m), &h2);
        Ok(Self { rho, values })
    }

    /// `Σ |K|^p · a(ρ_1, ρ_2) · w_1 w_2`; with `p = 1` and `a ≡ 1` this is `∫|K|`.
    pub fn weighted_power_sum(&self, p: f64, a: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for (i, (&r1, &w1)) in self.rho[0].nodes.iter().zip(&self.rho[0].weights).enumerate() {
            for (k, (&r2, &w2)) in self.rho[1].nodes.iter().zip(&self.rho[1].weights).enumerate() {
                let av = a(r1, r2);
                if av != 0.0 {
                    total += self.values[[i, k]].norm().powf(p) * av * w1 * w2;
                }
            }
        }
        total
    }

    /// `∫ |a(x)|·|K(x)| dx`.
    pub fn mass(&self, a: impl Fn(f64, f64) -> f64) -> f64 {
        self.weighted_power_sum(1.0, |p, q| a(p, q).abs())
    }
}

/// Lagrange weights `(k, w_k)` of order `order` for the point `rho` on a
/// uniform midpoint grid `ρ_k = (k + 1/2) h` with `n` nodes, extended evenly
/// across `ρ = 0`. Nodes past the end carry zero and are dropped.
pub fn interp_weights(n: usize, h: f64, rho: f64, order: usize) -> Vec<(usize, f64)> {
    let t = rho / h - 0.5;
    let start = (t.floor() as isize) - (order as isize / 2 - 1);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(order);
    for a in 0..order as isize {
        let ka = start + a;
        let mut w = 1.0;
        for b in 0..order as isize {
            if b != a {
                let kb = start + b;
                w *= (t - kb as f64) / ((ka - kb) as f64);
            }
        }
        let k = if ka < 0 { -ka - 1 } else { ka } as usize;
        if k < n {
            match out.iter_mut().find(|(i, _)| *i == k) {
                Some(slot) => slot.1 += w,
                None => out.push((k, w)),
            }
        }
    }
    out
}

/// Lagrange interpolation of order `order` on a uniform midpoint grid
/// `ρ_k = (k + 1/2) h`, extended evenly across `ρ = 0`.
pub fn interp_uniform(values: &[Complex64], h: f64, rho: f64, order: usize) -> Complex64 {
    interp_weights(values.len(), h, rho, order)
        .into_iter()
        .map(|(k, w)| values[k] * w)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shell_measures() {
        assert!((shell_measure(2, 1.0) - TAU).abs() < 1e-12);
        assert!((shell_measure(3, 2.0) - 16.0 * PI).abs() < 1e-12);
        assert!((shell_measure(4, 1.0) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_transform_in_each_dimension() {
        // e^{-π|ξ|²} is its own Fourier transform in every dimension
        let r = Rule::gauss_uniform(0.0, 8.0, 0.25, 16);
        for n in [2, 3, 4] {
            let rho = [0.0, 0.3, 1.1];
            let h = hankel(n, &rho, &r).unwrap();
            for (a, &p) in rho.iter().enumerate() {
                let v: f64 = (0..r.len()).map(|b| h[[a, b]] * (-PI * r.nodes[b].powi(2)).exp()).sum();
                assert!((v - (-PI * p * p).exp()).abs() < 1e-12, "n {n} rho {p}: {v}");
            }
        }
        assert!(hankel(5, &[1.0], &r).is_err());
    }

    #[test]
    fn radial_rule_is_second_order() {
        // the odd extension of r·g(r) has a kink at 0
        let err = |h: f64| (radial_rule(2, h, 6.0).integrate(|r| (-PI * r * r).exp()) - 1.0).abs();
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        assert!(err(0.01) < 1e-4);
    }

    #[test]
    fn interpolation_reproduces_even_polynomials() {
        let h = 0.1;
        let vals: Vec<Complex64> = (0..40).map(|k| Complex64::new(((k as f64 + 0.5) * h).powi(2), 0.0)).collect();
        for rho in [0.0, 0.03, 0.77, 2.31] {
            let v = interp_uniform(&vals, h, rho, 8);
            assert!((v.re - rho * rho).abs() < 1e-12, "{rho}: {}", v.re);
        }
    }

    #[test]
    fn biradial_requires_two_subspaces() {
        let layout = SubspaceLayout::new(vec![2, 2, 2]).unwrap();
        let r = ring_rule(1, 0.5);
        let m = Array2::zeros((r.len(), r.len()));
        assert!(BiRadial::synthesize(&layout, [r.clone(), r.clone()], [&r, &r], &m).is_err());
    }
}
