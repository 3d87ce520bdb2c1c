//! Dyadic rings, product rings, cone windows and the assembled partition.

use super::layout::{norm, ConeIndex, SubspaceLayout, WindowSpec};
use super::mollifier::mollifier;

/// `φ_j(r)` as a function of the radius `r = |ξ|`.
pub fn ring(j: u32, r: f64) -> f64 {
    if j == 0 {
        mollifier(r)
    } else {
        let s = r * (-(j as f64)).exp2();
        mollifier(s) - mollifier(2.0 * s)
    }
}

/// `φ_j(ξ)` for a point of any dimension.
pub fn dyadic_window(j: u32, xi: &[f64]) -> f64 {
    ring(j, norm(xi))
}

/// `∏_i φ_{j-ℓ_i}(ξ_i)`; the angular index of `spec` is ignored.
pub fn product_window(layout: &SubspaceLayout, spec: &WindowSpec, xi: &[f64]) -> f64 {
    product_window_radii(&spec.scales(), &layout.block_norms(xi))
}

/// Product ring evaluated from per-subspace radii.
pub fn product_window_radii(scales: &[u32], radii: &[f64]) -> f64 {
    scales.iter().zip(radii).map(|(&j, &r)| ring(j, r)).product()
}

/// Truncated cone window `Σ_{ℓ_M <= j <= j_max} φ_{jℓ}(ξ)`.
pub fn cone_window(layout: &SubspaceLayout, cone: &ConeIndex, xi: &[f64], j_max: u32) -> f64 {
    let radii = layout.block_norms(xi);
    cone_window_radii(cone, &radii, j_max)
}

pub fn cone_window_radii(cone: &ConeIndex, radii: &[f64], j_max: u32) -> f64 {
    (cone.ell_max()..=j_max)
        .map(|j| {
            let scales: Vec<u32> = cone.ell().iter().map(|&l| j - l).collect();
            product_window_radii(&scales, radii)
        })
        .sum()
}

/// Every piece `(j, ℓ)` with `min ℓ = 0` and `j <= j_max`. The first entry is
/// the low-frequency block `j = 0, ℓ = 0`. Each tuple of per-subspace scales
/// `(j_1, …, j_d)` with `max j_i <= j_max` appears exactly once.
pub fn enumerate_pieces(d: usize, j_max: u32) -> Vec<WindowSpec> {
    let mut out = Vec::new();
    let mut scales = vec![0u32; d];
    loop {
        let j = *scales.iter().max().unwrap();
        let ell: Vec<u32> = scales.iter().map(|&s| j - s).collect();
        let cone = ConeIndex::new(ell).expect("max entry gives a zero offset");
        out.push(WindowSpec { j, cone, nu: None });
        // odometer over [0, j_max]^d
        let mut i = 0;
        loop {
            if i == d {
                out.sort_by_key(|s| (s.j, s.cone.ell().to_vec()));
                return out;
            }
            scales[i] += 1;
            if scales[i] <= j_max {
                break;
            }
            scales[i] = 0;
            i += 1;
        }
    }
}

/// Result of the full partition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionResidual {
    /// `max |Σ pieces - 1|` over samples.
    pub residual: f64,
    /// Samples outside `|ξ| <= 2^{j_max-1}`; they are excluded from the max.
    pub outside: usize,
}

/// Assembles low block + every sector piece at each sample and reports the
/// deviation from 1.
pub fn full_partition_residual(
    layout: &SubspaceLayout,
    samples: &[Vec<f64>],
    j_max: u32,
) -> PartitionResidual {
    let pieces = enumerate_pieces(layout.d(), j_max);
    let limit = (j_max as f64 - 1.0).exp2();
    let mut residual = 0.0f64;
    let mut outside = 0;
    for xi in samples {
        if norm(xi) > limit {
            outside += 1;
            continue;
        }
        let radii = layout.block_norms(xi);
        // group by scale tuple: cheaper to evaluate ring tables once
        let rings: Vec<Vec<f64>> = radii
            .iter()
            .map(|&r| (0..=j_max).map(|j| ring(j, r)).collect())
            .collect();
        let total: f64 = pieces
            .iter()
            .map(|p| {
                p.cone
                    .ell()
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| rings[i][(p.j - l) as usize])
                    .product::<f64>()
            })
            .sum();
        residual = residual.max((total - 1.0).abs());
    }
    PartitionResidual { residual, outside }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout22() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn ring_values() {
        assert_eq!(dyadic_window(0, &[0.0, 0.0]), 1.0);
        assert_eq!(ring(3, 16.0), 0.0);
        assert_eq!(ring(3, 3.9), 0.0);
        assert!((0.0..=1.0).contains(&ring(3, 5.0)));
    }

    #[test]
    fn telescoping_is_exact() {
        for k in 0..500 {
            let r = 0.37 * k as f64;
            let s: f64 = (0..=10).map(|j| ring(j, r)).sum();
            assert!((s - 1.0).abs() <= 1e-12, "r = {r}");
        }
    }

    #[test]
    fn product_window_support() {
        let l = layout22();
        let spec = WindowSpec::new(4, ConeIndex::new(vec![2, 0]).unwrap(), None).unwrap();
        assert_eq!(product_window(&l, &spec, &[16.0, 0.0, 16.0, 0.0]), 0.0);
        let spec0 = WindowSpec::new(4, ConeIndex::zero(2), None).unwrap();
        let v = product_window(&l, &spec0, &[16.0, 0.0, 0.0, 16.0]);
        assert_eq!(v, ring(4, 16.0) * ring(4, 16.0));
        assert_eq!(v, 1.0);
        assert_eq!(product_window(&l, &spec0, &[0.0, 0.0, 16.0, 0.0]), 0.0);
    }

    #[test]
    fn cone_window_behaviour() {
        let l = layout22();
        let c = ConeIndex::new(vec![1, 0]).unwrap();
        assert_eq!(cone_window(&l, &c, &[0.0; 4], 8), 0.0);
        let xi = [10.0, 0.0, 0.0, 20.0];
        assert_eq!(cone_window(&l, &c, &xi, 7), cone_window(&l, &c, &xi, 9));
    }

    #[test]
    fn enumeration_covers_each_tuple_once() {
        let p = enumerate_pieces(3, 4);
        assert_eq!(p.len(), 125);
        assert_eq!(p[0].j, 0);
        let mut seen: Vec<Vec<u32>> = p.iter().map(|s| s.scales()).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 125);
    }

    #[test]
    fn single_parameter_partition() {
        let l = SubspaceLayout::new(vec![3]).unwrap();
        let samples: Vec<Vec<f64>> =
            (0..200).map(|k| vec![0.3 * k as f64, 0.1, -0.2 * k as f64]).collect();
        let r = full_partition_residual(&l, &samples, 8);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn origin_is_covered_by_low_block() {
        let r = full_partition_residual(&layout22(), &[vec![0.0; 4]], 8);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn samples_outside_safe_zone_are_counted() {
        let r = full_partition_residual(&layout22(), &[vec![200.0, 0.0, 0.0, 0.0]], 8);
        assert_eq!(r.outside, 1);
    }
}
