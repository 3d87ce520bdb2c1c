//! The frequency partition on layout (2, 2): rings, cone pieces, direction
//! grids and angular windows, with the two exactness checks.

use mpfio::partition::*;

fn main() -> mpfio::Result<()> {
    let layout = SubspaceLayout::new(vec![2, 2])?;

    println!("mollifier φ(t):");
    for t in [0.0, 1.0, 1.25, 1.5, 1.75, 2.0] {
        println!("  φ({t}) = {:.6}", mollifier(t));
    }
    println!("rings at r = 20: {:?}", (0..7).map(|j| ring(j, 20.0)).collect::<Vec<_>>());

    // |ξ_1| = 40, |ξ_2| = 5: only cones with ℓ_1 = 0 and ℓ_2 near 3 see it
    let xi = [24.0, 32.0, 3.0, 4.0];
    for ell2 in 0..6 {
        let cone = ConeIndex::new(vec![0, ell2])?;
        println!("cone window ℓ = (0, {ell2}): {:.4}", cone_window(&layout, &cone, &xi, 10));
    }
    let pieces = enumerate_pieces(layout.d(), 8);
    let total: f64 = pieces.iter().map(|s| product_window(&layout, s, &xi)).sum();
    println!("{} pieces up to j = 8 sum to {total} at ξ", pieces.len());

    let samples: Vec<Vec<f64>> = random_unit_vectors(4, 2000, 1)
        .into_iter()
        .enumerate()
        .map(|(k, u)| u.iter().map(|c| c * (k % 128) as f64).collect())
        .collect();
    let res = full_partition_residual(&layout, &samples, 8);
    println!("partition residual over {} samples: {:.2e}", samples.len(), res.residual);

    for j in [0, 2, 4, 6] {
        let grid = sphere_grid(j, 2, 1.0)?;
        let xi1 = [(j as f64).exp2() * 0.6, (j as f64).exp2() * 0.8];
        let w = angular_weights(&grid, &xi1)?;
        let s: f64 = w.iter().map(|(_, v)| v).sum();
        println!(
            "j = {j}: {} directions (bound {}), {} windows active at ξ_1, Σ χ^ν - 1 = {:.1e}",
            grid.len(),
            c_grid(2) * (j as f64 / 2.0).exp2(),
            w.len(),
            s - 1.0
        );
    }
    Ok(())
}
