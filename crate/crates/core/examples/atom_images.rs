//! Images of bi-radial atoms under `T_ℓ` and `T*_ℓ`: uniformity in the
//! radius, decay in `ℓ_1`, and the split of the adjoint image over sectors.

use mpfio::estimate::*;

fn main() -> mpfio::Result<()> {
    let problem = Problem::default();
    let p = AtomBoundParams { radii: vec![0.5, 0.25, 0.125], ell_radius: 0.125, ..Default::default() };
    for rep in atom_image_l1(&problem, &p)? {
        println!("{} {:?}", rep.experiment, rep.columns);
        for r in &rep.rows {
            println!("  {r:?}");
        }
        for c in &rep.checks {
            println!("  {}: {:.4} ({})", c.name, c.measured, if c.pass { "pass" } else { "fail" });
        }
    }
    let rep = adjoint_tail(&problem, &AdjointTailParams::default())?;
    println!("{} {:?}", rep.experiment, rep.columns);
    for r in &rep.rows {
        println!("  {r:?}");
    }
    println!("  δ̂ = {:.3}", -rep.fit.expect("fitted").slope);
    Ok(())
}
