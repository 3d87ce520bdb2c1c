//! Truncated `L^p` norms of `T_m f_α` for the wave phase as the frequency
//! cutoff doubles, above and below the critical order.

use mpfio::estimate::*;

fn main() -> mpfio::Result<()> {
    let problem = Problem::default();
    let p = 4.0;
    println!("critical order at p = {p}: {}", critical_order(&problem, p));
    println!("α per circle subspace: {}", critical_alpha(2, p));
    let params = SharpnessParams { arms: vec![0.0, -0.25, -0.8], cutoffs: vec![64.0, 128.0, 256.0, 512.0], ..Default::default() };
    let rep = sharpness_growth(&problem, &params)?;
    println!("{:?}", rep.columns);
    for r in &rep.rows {
        println!("  m = {:>5}  R = {:>4}  ‖·‖ = {:>9.4}  ratio {:.4}", r[0], r[1], r[2], r[3]);
    }
    Ok(())
}
