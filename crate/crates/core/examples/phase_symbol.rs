//! Phases and symbols: homogeneity, non-degeneracy, product-class residuals
//! and the linearized remainder around a direction.

use mpfio::partition::SubspaceLayout;
use mpfio::phase::*;
use mpfio::symbol::{symbol_class_residual, FreqProfile, Symbol};

fn main() -> mpfio::Result<()> {
    let layout = SubspaceLayout::new(vec![2, 2])?;
    let wave = Phase::wave(layout.clone());
    let bent = Phase::perturbed(layout.clone(), 0.1);

    let x = [0.2, -0.1, 0.4, 0.3];
    let xi = [3.0, 4.0, -1.0, 2.0];
    println!("Φ_wave(x, ξ) = {:.6}", wave.eval(&x, &xi)?);
    println!("∇_ξ1 Φ_wave = {:?}", wave.grad(0, &x[..2], &xi[..2])?);

    let samples = vec![(x.to_vec(), xi.to_vec()), (vec![0.0; 4], vec![1.0, 0.0, 0.0, 5.0])];
    for (name, p) in [("wave", &wave), ("perturbed", &bent)] {
        println!(
            "{name}: homogeneity {:.1e}, Euler {:.1e}, min det {:.4}",
            homogeneity_residual(p, &samples, &[0.5, 2.0, 8.0])?,
            euler_residual(p, &samples)?,
            nondegeneracy_min_det(p, 0, 1000, 7, 1.0)?
        );
    }

    // one ξ_1 derivative, normalized by (1+|ξ|)^m (1+|ξ_1|)^{-1}: the Bessel
    // symbol stays bounded, the product symbol does not belong to the class
    let bessel = Symbol::bessel(layout.clone(), -1.0, 4.0);
    let product = Symbol::separated(layout.clone(), FreqProfile::Product { orders: vec![-0.5, -0.5] }, 4.0);
    for k in [2, 4, 6, 8] {
        let r = (k as f64).exp2();
        let pts = vec![(vec![0.1; 4], vec![0.6 * r, 0.8 * r, 3.0, 4.0])];
        println!(
            "|ξ_1| = {r:>4}: class residual Bessel {:.4}, product {:.4}",
            symbol_class_residual(&bessel, &[1, 0, 0, 0], &[0; 4], &pts)?,
            symbol_class_residual(&product, &[1, 0, 0, 0], &[0; 4], &pts)?
        );
    }

    let rem = LinearizedRemainder::new(wave, 0, vec![0.6, 0.8])?;
    for j in 2..=6 {
        let pts = window_samples(&rem.direction, j, 100, 0.5, j as u64);
        let along = remainder_bound_check(&rem, j, RemainderDirection::Along, 1, &pts)?;
        let across = remainder_bound_check(&rem, j, RemainderDirection::Transverse, 2, &pts)?;
        println!("j = {j}: Ψ ratios along {along:.3}, transverse {across:.3}");
    }
    Ok(())
}
