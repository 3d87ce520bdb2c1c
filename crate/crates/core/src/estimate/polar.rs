//! Bi-radial kernels on two circle subspaces.

use crate::engine::fft::cis;
use crate::engine::radial::{ring_rule, BiRadial};
use crate::error::Result;
use crate::geometry::BiRadialAtom;
use crate::partition::{ring, SubspaceLayout};
use crate::quad::Rule;
use crate::symbol::FreqProfile;
use ndarray::Array2;
use num_complex::Complex64;

/// `(1 + r_1² + r_2²)^{m/2}`.
pub fn bessel(m: f64) -> impl Fn(f64, f64) -> f64 {
    let p = FreqProfile::Bessel { m };
    move |r1, r2| p.eval_radii(&[r1, r2])
}

/// `M[a, b] = φ_{s_1}(r_a) φ_{s_2}(r_b) e^{2πi·sign·(c_1 r_a + c_2 r_b)} f(a, b, r_a, r_b)`
/// on the ring rules of the two scales.
pub fn ring_multiplier(
    scales: [u32; 2],
    speeds: [f64; 2],
    sign: f64,
    dr: f64,
    f: impl Fn(usize, usize, f64, f64) -> f64,
) -> ([Rule; 2], Array2<Complex64>) {
    let r1 = ring_rule(scales[0], dr);
    let r2 = ring_rule(scales[1], dr);
    let w1: Vec<Complex64> = r1.nodes.iter().map(|&r| cis(sign * speeds[0] * r) * ring(scales[0], r)).collect();
    let w2: Vec<Complex64> = r2.nodes.iter().map(|&r| cis(sign * speeds[1] * r) * ring(scales[1], r)).collect();
    let m = Array2::from_shape_fn((r1.len(), r2.len()), |(a, b)| {
        w1[a] * w2[b] * f(a, b, r1.nodes[a], r2.nodes[b])
    });
    ([r1, r2], m)
}

/// `K_{jℓ}(x, 0)` summed over directions, for the ring scales `scales`
/// and frequency profile `s(r_1, r_2)`, sampled on the `rho` rules.
pub fn piece_kernel(
    layout: &SubspaceLayout,
    scales: [u32; 2],
    speeds: [f64; 2],
    dr: f64,
    profile: impl Fn(f64, f64) -> f64,
    rho: [Rule; 2],
) -> Result<BiRadial> {
    let (rules, m) = ring_multiplier(scales, speeds, 1.0, dr, |_, _, r1, r2| profile(r1, r2));
    BiRadial::synthesize(layout, rho, [&rules[0], &rules[1]], &m)
}

/// `Σ_{j = ℓ_M}^{j_max} T_{jℓ} a` for a bi-radial atom, with multiplier
/// `â(r_1, r_2)·s(r_1, r_2)` and phase sign `sign` (`-1` for the adjoint).
#[allow(clippy::too_many_arguments)]
pub fn atom_image(
    layout: &SubspaceLayout,
    atom: &BiRadialAtom,
    ell: [u32; 2],
    j_max: u32,
    speeds: [f64; 2],
    sign: f64,
    dr: f64,
    profile: impl Fn(f64, f64) -> f64,
    rho: [Rule; 2],
) -> Result<BiRadial> {
    let start = ell[0].max(ell[1]);
    let mut acc = None;
    for j in start..=j_max.max(start) {
        let scales = [j - ell[0], j - ell[1]];
        let ahat = atom.transform(&ring_rule(scales[0], dr).nodes, &ring_rule(scales[1], dr).nodes)?;
        let (rules, m) = ring_multiplier(scales, speeds, sign, dr, |a, b, r1, r2| ahat[[a, b]] * profile(r1, r2));
        accumulate(&mut acc, BiRadial::synthesize(layout, rho.clone(), [&rules[0], &rules[1]], &m)?);
    }
    Ok(acc.expect("at least one scale"))
}

/// Adds `b` into `a` in place.
pub fn accumulate(a: &mut Option<BiRadial>, b: BiRadial) {
    match a {
        Some(acc) => acc.values += &b.values,
        None => *a = Some(b),
    }
}
