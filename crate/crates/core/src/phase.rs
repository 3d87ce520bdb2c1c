//! Separable phases `Φ(x, ξ) = Σ_i Φ_i(x_i, ξ_i)`.

use crate::error::{Error, Result};
use crate::fd;
use crate::partition::{norm, SubspaceLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Debug;
use std::sync::Arc;

/// One block `Φ_i(x_i, ξ_i)`, positively 1-homogeneous in `ξ_i`.
pub trait PhaseComponent: Send + Sync + Debug {
    fn name(&self) -> String;

    fn value(&self, x: &[f64], xi: &[f64]) -> f64;

    /// `∇_{ξ_i} Φ_i`. The default is a Richardson-extrapolated central
    /// difference.
    fn grad_xi(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let scale = norm(xi).max(1e-300);
        let f = |v: &[f64]| self.value(x, v);
        (0..xi.len())
            .map(|k| {
                let mut alpha = vec![0; xi.len()];
                alpha[k] = 1;
                fd::partial_real(&f, xi, &alpha, &vec![scale; xi.len()]).unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// True when `Φ_i = x_i·ξ_i + ψ(ξ_i)`.
    fn translation_invariant(&self) -> bool {
        false
    }

    /// `c` when `Φ_i = x_i·ξ_i + c|ξ_i|`.
    fn radial_speed(&self) -> Option<f64> {
        None
    }
}

/// `x·ξ + |ξ|`.
#[derive(Debug, Clone, Copy)]
pub struct WavePhase;

/// `x·ξ`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityPhase;

/// `x·ξ + (1 + a sin x_1)|ξ|`; not translation invariant.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedPhase {
    pub amplitude: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PhaseComponent for WavePhase {
    fn name(&self) -> String {
        "wave".into()
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        dot(x, xi) + norm(xi)
    }
    fn grad_xi(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let r = norm(xi);
        x.iter().zip(xi).map(|(a, b)| a + b / r).collect()
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn radial_speed(&self) -> Option<f64> {
        Some(1.0)
    }
}

impl PhaseComponent for IdentityPhase {
    fn name(&self) -> String {
        "identity".into()
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        dot(x, xi)
    }
    fn grad_xi(&self, x: &[f64], _xi: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
    fn translation_invariant(&self) -> bool {
        true
    }
    fn radial_speed(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl PhaseComponent for PerturbedPhase {
    fn name(&self) -> String {
        format!("perturbed({})", self.amplitude)
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        dot(x, xi) + (1.0 + self.amplitude * x[0].sin()) * norm(xi)
    }
    fn grad_xi(&self, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let r = norm(xi);
        let c = 1.0 + self.amplitude * x[0].sin();
        x.iter().zip(xi).map(|(a, b)| a + c * b / r).collect()
    }
}

/// User-supplied block; gradients by finite differences.
#[derive(Clone)]
pub struct CustomPhase {
    pub label: String,
    pub f: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>,
}

impl Debug for CustomPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CustomPhase({})", self.label)
    }
}

impl PhaseComponent for CustomPhase {
    fn name(&self) -> String {
        self.label.clone()
    }
    fn value(&self, x: &[f64], xi: &[f64]) -> f64 {
        (self.f)(x, xi)
    }
}

/// A separable phase over a layout.
#[derive(Debug, Clone)]
pub struct Phase {
    pub layout: SubspaceLayout,
    pub components: Vec<Arc<dyn PhaseComponent>>,
}

impl Phase {
    pub fn new(layout: SubspaceLayout, components: Vec<Arc<dyn PhaseComponent>>) -> Result<Self> {
        if components.len() != layout.d() {
            return Err(Error::Layout(format!(
                "{} phase components for {} subspaces",
                components.len(),
                layout.d()
            )));
        }
        Ok(Self { layout, components })
    }

    /// The same component on every subspace.
    pub fn uniform(layout: SubspaceLayout, c: Arc<dyn PhaseComponent>) -> Self {
        let components = vec![c; layout.d()];
        Self { layout, components }
    }

    pub fn wave(layout: SubspaceLayout) -> Self {
        Self::uniform(layout, Arc::new(WavePhase))
    }

    pub fn identity(layout: SubspaceLayout) -> Self {
        Self::uniform(layout, Arc::new(IdentityPhase))
    }

    pub fn perturbed(layout: SubspaceLayout, amplitude: f64) -> Self {
        Self::uniform(layout, Arc::new(PerturbedPhase { amplitude }))
    }

    pub fn name(&self) -> String {
        self.components.iter().map(|c| c.name()).collect::<Vec<_>>().join("+")
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        for (i, b) in self.layout.split(xi).iter().enumerate() {
            if norm(b) == 0.0 {
                return Err(Error::Domain(format!("phase evaluated at xi_{} = 0", i + 1)));
            }
        }
        Ok(())
    }

    /// `Φ(x, ξ)`; every `ξ_i` must be nonzero.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        self.check_xi(xi)?;
        Ok(self.eval_unchecked(x, xi))
    }

    /// `Φ(x, ξ)` without the domain check; blocks with `ξ_i = 0` contribute
    /// their continuous extension.
    pub fn eval_unchecked(&self, x: &[f64], xi: &[f64]) -> f64 {
        let xs = self.layout.split(x);
        let ks = self.layout.split(xi);
        self.components
            .iter()
            .zip(xs.iter().zip(&ks))
            .map(|(c, (xb, kb))| if norm(kb) == 0.0 { 0.0 } else { c.value(xb, kb) })
            .sum()
    }

    /// `∇_{ξ_i} Φ_i(x_i, ξ_i)`.
    pub fn grad(&self, i: usize, x_i: &[f64], xi_i: &[f64]) -> Result<Vec<f64>> {
        if norm(xi_i) == 0.0 {
            return Err(Error::Domain(format!("gradient at xi_{} = 0", i + 1)));
        }
        Ok(self.components[i].grad_xi(x_i, xi_i))
    }

    pub fn is_translation_invariant(&self) -> bool {
        self.components.iter().all(|c| c.translation_invariant())
    }

    /// Per-subspace speeds when every block is `x_i·ξ_i + c_i|ξ_i|`.
    pub fn radial_speeds(&self) -> Option<Vec<f64>> {
        self.components.iter().map(|c| c.radial_speed()).collect()
    }
}

/// `max |Φ(x, λξ) - λΦ(x, ξ)|` over samples and scalings.
pub fn homogeneity_residual(phase: &Phase, samples: &[(Vec<f64>, Vec<f64>)], lambdas: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, xi) in samples {
        let base = phase.eval(x, xi)?;
        for &lam in lambdas {
            let scaled: Vec<f64> = xi.iter().map(|v| lam * v).collect();
            worst = worst.max((phase.eval(x, &scaled)? - lam * base).abs());
        }
    }
    Ok(worst)
}

/// `max |∇_ξ Φ · ξ - Φ|` over samples (Euler identity).
pub fn euler_residual(phase: &Phase, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (x, xi) in samples {
        let xs = phase.layout.split(x);
        let ks = phase.layout.split(xi);
        let mut g = 0.0;
        for i in 0..phase.layout.d() {
            g += dot(&phase.grad(i, xs[i], ks[i])?, ks[i]);
        }
        worst = worst.max((g - phase.eval(x, xi)?).abs());
    }
    Ok(worst)
}

/// Determinant by partial-pivot elimination.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs())).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

/// Mixed Hessian `∂²Φ_i/∂x_i∂ξ_i` by central differences of the gradient.
pub fn mixed_hessian(phase: &Phase, i: usize, x: &[f64], xi: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let h = fd::REL_STEP;
    let mut rows = vec![vec![0.0; n]; n];
    for a in 0..n {
        let diff = |s: f64| -> Result<Vec<f64>> {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[a] += s;
            xm[a] -= s;
            let gp = phase.grad(i, &xp, xi)?;
            let gm = phase.grad(i, &xm, xi)?;
            Ok(gp.iter().zip(&gm).map(|(p, m)| (p - m) / (2.0 * s)).collect())
        };
        let (d1, d2) = (diff(h)?, diff(0.5 * h)?);
        for b in 0..n {
            let v = (4.0 * d2[b] - d1[b]) / 3.0;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("mixed Hessian entry ({a},{b})")));
            }
            rows[b][a] = v;
        }
    }
    Ok(rows)
}

/// `min |det ∂²Φ_i/∂x_i∂ξ_i|` over `x_i` uniform in the ball of radius
/// `x_radius` and `ξ_i` uniform on the unit sphere.
pub fn nondegeneracy_min_det(phase: &Phase, i: usize, count: usize, seed: u64, x_radius: f64) -> Result<f64> {
    let n = phase.layout.dims()[i];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let x = loop {
            let v: Vec<f64> = (0..n).map(|_| x_radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
            if norm(&v) <= x_radius {
                break v;
            }
        };
        let xi = loop {
            let v: Vec<f64> = (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            let r = norm(&v);
            if r > 1e-3 && r <= 1.0 {
                break v.iter().map(|c| c / r).collect::<Vec<_>>();
            }
        };
        worst = worst.min(determinant(mixed_hessian(phase, i, &x, &xi)?).abs());
    }
    Ok(worst)
}

/// `Ψ_i(x_i, ξ_i) = Φ_i(x_i, ξ_i) - ∇_{ξ_i}Φ_i(x_i, ξ^ν)·ξ_i`.
#[derive(Debug, Clone)]
pub struct LinearizedRemainder {
    pub phase: Phase,
    pub subspace: usize,
    pub direction: Vec<f64>,
}

impl LinearizedRemainder {
    pub fn new(phase: Phase, subspace: usize, direction: Vec<f64>) -> Result<Self> {
        let r = norm(&direction);
        if r < 1e-12 {
            return Err(Error::Domain("linearization direction is numerically zero".into()));
        }
        let direction = direction.iter().map(|v| v / r).collect();
        Ok(Self { phase, subspace, direction })
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        let c = &self.phase.components[self.subspace];
        if norm(xi) == 0.0 {
            return 0.0;
        }
        c.value(x, xi) - dot(&c.grad_xi(x, &self.direction), xi)
    }
}

/// Orthonormal frame with first vector `e`.
pub fn frame(e: &[f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let mut basis: Vec<Vec<f64>> = vec![e.iter().map(|v| v / norm(e)).collect()];
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in &basis {
            let p = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let r = norm(&v);
        if r > 1e-8 && basis.len() < n {
            basis.push(v.iter().map(|c| c / r).collect());
        }
    }
    basis
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemainderDirection {
    /// Along `ξ^ν`; bound `2^{-k j}`.
    Along,
    /// Transverse to `ξ^ν`; bound `2^{-k j/2}`.
    Transverse,
}

/// Finite-difference derivative of `Ψ_i` in the frame aligned with `ξ^ν`,
/// divided by its bound. Returns the max ratio over `(x_i, ξ_i)` samples.
pub fn remainder_bound_check(
    rem: &LinearizedRemainder,
    j: u32,
    kind: RemainderDirection,
    order: u32,
    samples: &[(Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let basis = frame(&rem.direction);
    let dirs: Vec<&Vec<f64>> = match kind {
        RemainderDirection::Along => vec![&basis[0]],
        RemainderDirection::Transverse => basis.iter().skip(1).collect(),
    };
    let bound = match kind {
        RemainderDirection::Along => (-(order as f64) * j as f64).exp2(),
        RemainderDirection::Transverse => (-(order as f64) * j as f64 / 2.0).exp2(),
    };
    let mut worst = 0.0f64;
    for (x, xi) in samples {
        let f = |v: &[f64]| num_complex::Complex64::new(rem.eval(x, v), 0.0);
        let scale = norm(xi) * (-(j as f64) / 2.0).exp2();
        for d in &dirs {
            let val = fd::directional(&f, xi, d, order, fd::REL_STEP * scale)?;
            worst = worst.max(val.norm() / bound);
        }
    }
    Ok(worst)
}

/// Samples `(x_i, ξ_i)` with `|ξ_i| ∈ [2^{j-1}, 2^{j+1}]`, direction within
/// the support cone of `ξ^ν`, and `x_i` in a ball.
pub fn window_samples(
    direction: &[f64],
    j: u32,
    count: usize,
    x_radius: f64,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = direction.len();
    let basis = frame(direction);
    let half = crate::partition::support_half_angle(j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = (j as f64 - 1.0 + 2.0 * rng.random::<f64>()).exp2();
            let ang = half * rng.random::<f64>();
            let mut t: Vec<f64> = (1..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let tn = norm(&t).max(1e-12);
            t.iter_mut().for_each(|v| *v /= tn);
            let mut xi = vec![0.0; n];
            for k in 0..n {
                xi[k] = r * ang.cos() * basis[0][k]
                    + r * ang.sin() * (1..n).map(|b| t[b - 1] * basis[b][k]).sum::<f64>();
            }
            let x: Vec<f64> = (0..n).map(|_| x_radius * (2.0 * rng.random::<f64>() - 1.0)).collect();
            (x, xi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l22() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn wave_phase_values() {
        let p = Phase::wave(l22());
        let xi = [3.0, 4.0, 0.0, 2.0];
        assert_eq!(p.eval(&[0.0; 4], &xi).unwrap(), 7.0);
        assert_eq!(p.grad(0, &[1.0, 1.0], &[3.0, 4.0]).unwrap(), vec![1.6, 1.8]);
        let xi2: Vec<f64> = xi.iter().map(|v| 2.0 * v).collect();
        let x = [0.3, -0.1, 0.2, 0.5];
        assert!((p.eval(&x, &xi2).unwrap() - 2.0 * p.eval(&x, &xi).unwrap()).abs() < 1e-12);
        assert!(p.eval(&x, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn corrupted_phase_fails_homogeneity() {
        let bad = CustomPhase {
            label: "bad".into(),
            f: Arc::new(|x: &[f64], xi: &[f64]| dot(x, xi) + xi.iter().map(|v| v * v).sum::<f64>()),
        };
        let p = Phase::uniform(l22(), Arc::new(bad));
        let s = vec![(vec![0.0; 4], vec![1.0, 0.0, 1.0, 0.0])];
        let r = homogeneity_residual(&p, &s, &[2.0]).unwrap();
        // |ξ_i|² terms: λ² - λ = 2 per block
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn euler_identity_holds_with_fd_gradients() {
        let custom = CustomPhase {
            label: "homog".into(),
            f: Arc::new(|x: &[f64], xi: &[f64]| dot(x, xi) + (xi[0] * xi[0] + 2.0 * xi[1] * xi[1]).sqrt()),
        };
        let p = Phase::uniform(l22(), Arc::new(custom));
        let s = vec![(vec![0.1, 0.2, 0.3, 0.4], vec![1.5, -0.3, 0.2, 2.0])];
        assert!(euler_residual(&p, &s).unwrap() < 1e-8);
    }

    #[test]
    fn determinants() {
        assert!((determinant(vec![vec![2.0, 1.0], vec![1.0, 3.0]]) - 5.0).abs() < 1e-14);
        let p = Phase::wave(l22());
        let d = nondegeneracy_min_det(&p, 0, 50, 1, 1.0).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
        let id = Phase::identity(l22());
        assert!((nondegeneracy_min_det(&id, 1, 20, 1, 1.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn perturbed_phase_determinant() {
        let p = Phase::perturbed(l22(), 0.1);
        let d = nondegeneracy_min_det(&p, 0, 1000, 3, 1.0).unwrap();
        assert!(d > 0.0 && d < 2.0);
        // det = 1 + 0.1 cos(x_1) u_1 >= 0.9
        assert!(d >= 0.9 - 1e-8);
    }

    #[test]
    fn remainder_vanishes_on_ray() {
        for p in [Phase::wave(l22()), Phase::perturbed(l22(), 0.1)] {
            let rem = LinearizedRemainder::new(p, 0, vec![0.6, 0.8]).unwrap();
            for t in [0.5, 1.0, 4.0] {
                assert!(rem.eval(&[0.3, -0.2], &[0.6 * t, 0.8 * t]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn remainder_of_linear_phase_is_zero() {
        let rem = LinearizedRemainder::new(Phase::identity(l22()), 1, vec![1.0, 0.0]).unwrap();
        let s = window_samples(&[1.0, 0.0], 4, 20, 1.0, 2);
        let r = remainder_bound_check(&rem, 4, RemainderDirection::Transverse, 1, &s).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn remainder_ratios_plateau_for_wave_phase() {
        let mut along = Vec::new();
        let mut trans = Vec::new();
        for j in 2..=6 {
            let rem = LinearizedRemainder::new(Phase::wave(l22()), 0, vec![1.0, 0.0]).unwrap();
            let s = window_samples(&[1.0, 0.0], j, 200, 1.0, 9);
            along.push(remainder_bound_check(&rem, j, RemainderDirection::Along, 1, &s).unwrap());
            trans.push(remainder_bound_check(&rem, j, RemainderDirection::Transverse, 2, &s).unwrap());
        }
        for v in [&along, &trans] {
            let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            assert!(hi / lo < 4.0, "{v:?}");
        }
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(LinearizedRemainder::new(Phase::wave(l22()), 0, vec![0.0, 0.0]).is_err());
    }
}
