//! Kernel mass decay in `j` and `ℓ`, the Lipschitz ratio, and the tail
//! outside `Q`, at reduced sizes. `cargo run --release --example
//! kernel_estimates`.

use mpfio::estimate::*;

fn show(rep: &EstimateReport) {
    println!("{} {:?}", rep.experiment, rep.columns);
    for r in &rep.rows {
        println!("  {r:?}");
    }
    if let Some(f) = rep.fit {
        println!("  slope {:.3}, residual {:.3}", f.slope, f.residual);
    }
    println!("  pass: {}", rep.pass());
}

fn main() -> mpfio::Result<()> {
    let problem = Problem::default();
    show(&kernel_l1_decay(&problem, &KernelDecayParams { j: (2..=5).collect(), ..Default::default() })?);
    show(&kernel_l1_decay(&problem, &KernelDecayParams::summed())?);
    show(&kernel_lipschitz_ratio(&problem, &LipschitzParams { j: vec![3, 4], ..Default::default() })?);
    show(&kernel_tail_outside(&problem, &KernelTailParams::q_ell())?);
    Ok(())
}
