//! Second dyadic rectangles `R^ν_{j_i}`.

use crate::error::{Error, Result};
use crate::partition::norm;
use crate::phase::PhaseComponent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// `{x_i : |⟨ȳ_i - ∇Φ_i(x_i, ξ^ν), ξ^ν⟩| <= C 2^{-j}, |ȳ_i - ∇Φ_i(x_i, ξ^ν)| <= C 2^{-j/2}}`.
#[derive(Debug, Clone)]
pub struct InfluenceRectangle {
    pub j: u32,
    pub direction: Vec<f64>,
    pub center: Vec<f64>,
    pub c_r: f64,
    pub component: Arc<dyn PhaseComponent>,
}

/// Deviation `ȳ - ∇Φ(x, u)` split into its component along `u` and its length.
pub(crate) fn deviation(component: &dyn PhaseComponent, x: &[f64], u: &[f64], center: &[f64]) -> (f64, f64) {
    let g = component.grad_xi(x, u);
    let d: Vec<f64> = center.iter().zip(&g).map(|(a, b)| a - b).collect();
    let along: f64 = d.iter().zip(u).map(|(a, b)| a * b).sum();
    (along.abs(), norm(&d))
}

impl InfluenceRectangle {
    pub fn new(
        j: u32,
        direction: Vec<f64>,
        center: Vec<f64>,
        c_r: f64,
        component: Arc<dyn PhaseComponent>,
    ) -> Result<Self> {
        if (norm(&direction) - 1.0).abs() > 1e-12 || direction.len() != center.len() {
            return Err(Error::Domain("rectangle direction must be a unit vector matching the centre".into()));
        }
        if !(c_r > 0.0) {
            return Err(Error::Domain(format!("C_R must be positive, got {c_r}")));
        }
        Ok(Self { j, direction, center, c_r, component })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (along, len) = deviation(self.component.as_ref(), x, &self.direction, &self.center);
        along <= self.c_r * (-(self.j as f64)).exp2() && len <= self.c_r * (-(self.j as f64) / 2.0).exp2()
    }

    /// `2^{-j}·2^{-j(n_i-1)/2}`, the scaling of the rectangle volume.
    pub fn volume_scale(&self) -> f64 {
        let n = self.center.len() as f64;
        (-(self.j as f64) * (1.0 + (n - 1.0) / 2.0)).exp2()
    }

    /// Monte-Carlo volume over the cube `center_box ± half` and its standard error.
    pub fn measure(&self, box_center: &[f64], half: f64, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = box_center.len();
        let mut hits = 0usize;
        let mut x = vec![0.0; n];
        for _ in 0..samples {
            for (c, v) in box_center.iter().zip(x.iter_mut()) {
                *v = c + half * (2.0 * rng.random::<f64>() - 1.0);
            }
            if self.contains(&x) {
                hits += 1;
            }
        }
        let vol = (2.0 * half).powi(n as i32);
        let p = hits as f64 / samples as f64;
        (vol * p, vol * (p * (1.0 - p) / samples as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{IdentityPhase, WavePhase};

    #[test]
    fn identity_phase_membership() {
        let r = InfluenceRectangle::new(4, vec![1.0, 0.0], vec![0.3, -0.2], 4.0, Arc::new(IdentityPhase)).unwrap();
        assert!(r.contains(&[0.3, -0.2]));
        let off = 2.0 * 4.0 * 0.25;
        assert!(!r.contains(&[0.3, -0.2 + off]));
    }

    #[test]
    fn larger_constant_contains_smaller() {
        let small = InfluenceRectangle::new(3, vec![0.6, 0.8], vec![0.0, 0.0], 2.0, Arc::new(WavePhase)).unwrap();
        let big = InfluenceRectangle { c_r: 4.0, ..small.clone() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x = [rng.random::<f64>() * 3.0 - 2.0, rng.random::<f64>() * 3.0 - 2.0];
            if small.contains(&x) {
                assert!(big.contains(&x));
            }
        }
    }

    #[test]
    fn wave_rectangle_volume_scaling() {
        // (n_i + 1)/2 = 3/2 per unit of j: Δj = 2 divides the volume by 8
        let u = vec![1.0, 0.0];
        let r3 = InfluenceRectangle::new(3, u.clone(), vec![0.0, 0.0], 1.0, Arc::new(WavePhase)).unwrap();
        let r5 = InfluenceRectangle { j: 5, ..r3.clone() };
        let (m3, _) = r3.measure(&[-1.0, 0.0], 0.4, 200_000, 3);
        let (m5, _) = r5.measure(&[-1.0, 0.0], 0.2, 200_000, 4);
        let ratio = m3 / m5;
        assert!(ratio > 4.0 && ratio < 16.0, "{ratio}");
        assert!((m3 / r3.volume_scale() / (m5 / r5.volume_scale()) - 1.0).abs() < 0.5);
    }
}
