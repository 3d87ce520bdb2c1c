//! Regions of influence around `ȳ = 0` for the wave phase and a Hardy atom
//! on a grid.

use mpfio::engine::SpaceGrid;
use mpfio::geometry::*;
use mpfio::partition::SubspaceLayout;
use mpfio::phase::Phase;

fn main() -> mpfio::Result<()> {
    let layout = SubspaceLayout::new(vec![2, 2])?;
    let phase = Phase::wave(layout.clone());
    let q = InfluenceRegion::new(phase.clone(), vec![0.0; 4], 4.0, 9, RegionKind::Q { k: 6 })?;
    let q_ell = InfluenceRegion::new(phase.clone(), vec![0.0; 4], 4.0, 9, RegionKind::QEll { k: 6, ell: vec![4, 0] })?;

    // the wave front sits at |x_i| = 1
    for r in [0.2, 0.9, 1.0, 1.1, 1.6] {
        let x = [r, 0.0, 0.0, r];
        println!("|x_i| = {r}: Q {:?}, Q_ℓ {:?}", q.contains(&x), q_ell.contains(&x));
    }
    let m = region_measure(&q, &[-2.0; 4], &[2.0; 4], 20_000, 1);
    println!("|Q ∩ [-2, 2]^4| ≈ {:.4} ± {:.4} (unknown share {:.3})", m.estimate, m.stderr, m.unknown_fraction);

    let far = InfluenceRegion::new(
        phase,
        vec![0.0; 4],
        4.0,
        9,
        RegionKind::QW { w: vec![true, false], ell: vec![2, 0], epsilon: 0.2, c: 1.0 },
    )?;
    println!("sector W = {{1}} at x = (2, 0, 0.5, 0): {:?}", far.contains(&[2.0, 0.0, 0.5, 0.0]));

    let grid = SpaceGrid::cube(layout, 1.0, 32);
    let atom = make_atom(0.25, &[0.0; 4], AtomProfile::Bump, &grid)?;
    println!("atom: mean {:.1e}, sup {:.3} <= |B_r|^-1 = {:.3}", atom.mean(), atom.sup(), atom.bound());
    Ok(())
}
