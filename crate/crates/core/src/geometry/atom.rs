//! Hardy atoms: supported in `B_r`, `‖a‖∞ <= |B_r|^{-1}`, mean exactly zero
//! on the discretization that carries them.

use crate::engine::radial::hankel;
use crate::engine::{FunctionField, SpaceGrid};
use crate::error::{Error, Result};
use crate::partition::norm;
use crate::quad::{compensated_sum, Rule};
use ndarray::{Array2, ArrayD};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Radial profile of the un-normalized atom, on `t = |x - ȳ|/r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomProfile {
    /// `exp(-1/(1-t²))`.
    Bump,
    /// `(1-t²)³`.
    Poly,
}

impl AtomProfile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bump" => Ok(Self::Bump),
            "poly" => Ok(Self::Poly),
            other => Err(Error::Domain(format!("unknown atom profile '{other}'"))),
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        let q = 1.0 - t * t;
        if q <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Bump => (-1.0 / q).exp(),
            Self::Poly => q * q * q,
        }
    }
}

/// `|B_r|` in `R^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    PI.powf(n as f64 / 2.0) * r.powi(n as i32) / puruspe::gamma(n as f64 / 2.0 + 1.0)
}

/// Mean-zero combination `b - c b²` with `Σ w (b - c b²) = 0`: the weighted
/// mean of `b` times the mean-one bump `b²/Σ w b²`.
fn mean_corrected(b: &[f64], w: &[f64]) -> Vec<f64> {
    let m1 = compensated_sum(b.iter().zip(w).map(|(b, w)| b * w));
    let m2 = compensated_sum(b.iter().zip(w).map(|(b, w)| b * b * w));
    let c = m1 / m2;
    b.iter().map(|b| b - c * b * b).collect()
}

/// Scales to `‖a‖∞ = |B_r|^{-1}`, then removes the leftover rounding mean
/// with a second pass.
fn normalize(mut a: Vec<f64>, w: &[f64], vol: f64) -> Vec<f64> {
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = 1.0 / (vol * peak);
    for v in a.iter_mut() {
        *v *= s;
    }
    let m1 = compensated_sum(a.iter().zip(w).map(|(a, w)| a * w));
    let m2 = compensated_sum(a.iter().zip(w).map(|(a, w)| a * a * w));
    if m2 > 0.0 {
        // same correction again; it keeps the support
        let c = m1 / m2;
        for v in a.iter_mut() {
            *v -= c * *v * *v;
        }
    }
    let limit = 1.0 / vol;
    for v in a.iter_mut() {
        *v = v.clamp(-limit, limit);
    }
    a
}

/// An atom sampled on a space lattice.
#[derive(Debug, Clone)]
pub struct HardyAtom {
    pub radius: f64,
    pub center: Vec<f64>,
    pub profile: AtomProfile,
    pub field: FunctionField,
}

impl HardyAtom {
    pub fn mean(&self) -> f64 {
        let dv = self.field.grid.cell_volume();
        compensated_sum(self.field.values.iter().map(|v| v.re * dv))
    }

    pub fn sup(&self) -> f64 {
        self.field.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn bound(&self) -> f64 {
        1.0 / ball_volume(self.center.len(), self.radius)
    }
}

/// Samples an atom of radius `r` around `center` on `grid`; `r` must span
/// at least four grid steps in every direction.
pub fn make_atom(r: f64, center: &[f64], profile: AtomProfile, grid: &SpaceGrid) -> Result<HardyAtom> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("atom radius must lie in (0, 1], got {r}")));
    }
    if center.len() != grid.layout().n() {
        return Err(Error::Layout("atom centre does not match the grid".into()));
    }
    let step = grid.axes().iter().fold(0.0f64, |m, a| m.max(a.step));
    if r < 4.0 * step {
        return Err(Error::Resolution(format!("radius {r} is below four grid steps ({step})")));
    }
    let n = grid.len();
    let b: Vec<f64> = (0..n)
        .map(|k| {
            let x = grid.node(k);
            let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
            profile.eval(norm(&d) / r)
        })
        .collect();
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::Resolution("atom support misses every grid node".into()));
    }
    let w = vec![grid.cell_volume(); n];
    let a = normalize(mean_corrected(&b, &w), &w, ball_volume(center.len(), r));
    let values = ArrayD::from_shape_vec(grid.shape(), a.into_iter().map(|v| C64::new(v, 0.0)).collect())
        .map_err(|e| Error::Layout(e.to_string()))?;
    Ok(HardyAtom {
        radius: r,
        center: center.to_vec(),
        profile,
        field: FunctionField::new(grid.clone(), values)?,
    })
}

/// A bi-radial atom `a(|x_1|, |x_2|)` on `R² × R²` centred at the origin,
/// tabulated on Gauss–Legendre nodes in each radius.
#[derive(Debug, Clone)]
pub struct BiRadialAtom {
    pub radius: f64,
    /// Radial rule on `[0, r]` with the shell factor `2πq` folded into the weights.
    pub rule: Rule,
    pub values: Array2<f64>,
}

impl BiRadialAtom {
    /// Panels of width `r/8` with `order` nodes each.
    pub fn new(r: f64, profile: AtomProfile, order: usize) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("atom radius must lie in (0, 1], got {r}")));
        }
        let plain = Rule::gauss_uniform(0.0, r, r / 8.0, order);
        let rule = plain.weighted(|q| TAU * q);
        let m = rule.len();
        let mut b = Vec::with_capacity(m * m);
        let mut w = Vec::with_capacity(m * m);
        for (q1, w1) in rule.nodes.iter().zip(&rule.weights) {
            for (q2, w2) in rule.nodes.iter().zip(&rule.weights) {
                b.push(profile.eval(q1.hypot(*q2) / r));
                w.push(w1 * w2);
            }
        }
        let a = normalize(mean_corrected(&b, &w), &w, ball_volume(4, r));
        let values = Array2::from_shape_vec((m, m), a).map_err(|e| Error::Layout(e.to_string()))?;
        Ok(Self { radius: r, rule, values })
    }

    pub fn mean(&self) -> f64 {
        let w = &self.rule.weights;
        compensated_sum(self.values.indexed_iter().map(|((a, b), v)| v * w[a] * w[b]))
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn bound(&self) -> f64 {
        1.0 / ball_volume(4, self.radius)
    }

    /// `â(ρ_1, ρ_2)` at the given radial frequencies.
    pub fn transform(&self, rho1: &[f64], rho2: &[f64]) -> Result<Array2<f64>> {
        let plain = Rule {
            nodes: self.rule.nodes.clone(),
            weights: self.rule.nodes.iter().zip(&self.rule.weights).map(|(q, w)| w / (TAU * q)).collect(),
        };
        let h1 = hankel(2, rho1, &plain)?;
        let h2 = hankel(2, rho2, &plain)?;
        Ok(h1.dot(&self.values).dot(&h2.t()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::SubspaceLayout;

    fn grid(side: f64, len: usize) -> SpaceGrid {
        SpaceGrid::cube(SubspaceLayout::new(vec![2]).unwrap(), side, len)
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-14);
        assert!((ball_volume(4, 0.5) - PI * PI / 2.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_atom_invariants() {
        let g = grid(1.0, 128);
        for profile in [AtomProfile::Bump, AtomProfile::Poly] {
            let a = make_atom(0.25, &[0.05, -0.1], profile, &g).unwrap();
            assert!(a.mean().abs() < 1e-13, "{}", a.mean());
            assert!(a.sup() <= a.bound() * (1.0 + 1e-14));
            assert!(a.sup() > 0.99 * a.bound());
            for k in 0..g.len() {
                let x = g.node(k);
                if (x[0] - 0.05).hypot(x[1] + 0.1) >= 0.25 {
                    assert_eq!(a.field.values.as_slice().unwrap()[k], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn rejects_unresolved_radius() {
        let g = grid(1.0, 16);
        assert!(matches!(make_atom(0.1, &[0.0, 0.0], AtomProfile::Bump, &g), Err(Error::Resolution(_))));
        assert!(matches!(make_atom(1.5, &[0.0, 0.0], AtomProfile::Bump, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn biradial_atom_invariants() {
        let a = BiRadialAtom::new(0.25, AtomProfile::Bump, 24).unwrap();
        assert!(a.mean().abs() < 1e-15 * a.bound() * ball_volume(4, 0.25) + 1e-17, "{}", a.mean());
        assert!(a.sup() <= a.bound() * (1.0 + 1e-14));
        // â(0, 0) is the mean
        let t = a.transform(&[0.0], &[0.0]).unwrap();
        assert!(t[[0, 0]].abs() < 1e-14);
    }

    #[test]
    fn biradial_transform_matches_direct_sum() {
        let a = BiRadialAtom::new(0.5, AtomProfile::Poly, 16).unwrap();
        let t = a.transform(&[1.3], &[0.7]).unwrap()[[0, 0]];
        // independent: 2D GL in each radius, J0 evaluated directly
        let r = &a.rule;
        let mut s = 0.0;
        for (i, (q1, w1)) in r.nodes.iter().zip(&r.weights).enumerate() {
            for (k, (q2, w2)) in r.nodes.iter().zip(&r.weights).enumerate() {
                s += w1 * w2 * a.values[[i, k]]
                    * puruspe::Jn(0, TAU * 1.3 * q1)
                    * puruspe::Jn(0, TAU * 0.7 * q2);
            }
        }
        assert!((t - s).abs() < 1e-12 * s.abs().max(1e-3));
    }
}
