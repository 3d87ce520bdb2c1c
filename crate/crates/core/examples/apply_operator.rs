//! Applying pieces, the truncated operator and its adjoint to a sampled
//! function, with Littlewood–Paley projections and an operator-norm estimate.

use mpfio::engine::{littlewood_paley_project, Engine, SpaceGrid, Window};
use mpfio::estimate::{power_iteration, random_field};
use mpfio::partition::{ConeIndex, SubspaceLayout, WindowSpec};
use mpfio::phase::Phase;
use mpfio::symbol::Symbol;

fn main() -> mpfio::Result<()> {
    let layout = SubspaceLayout::new(vec![2, 2])?;
    let engine = Engine::new(Phase::wave(layout.clone()), Symbol::bessel(layout.clone(), 0.0, 4.0))?;
    let grid = SpaceGrid::cube(layout.clone(), 4.0, 16);
    let f = random_field(&grid, 3);

    let piece = engine.apply_piece(&WindowSpec::new(1, ConeIndex::new(vec![1, 0])?, None)?, &f)?;
    println!("‖f‖ = {:.4}, ‖T_(1,(1,0)) f‖ = {:.4}", f.l2(), piece.l2());

    let (tf, lost) = engine.apply_operator(&f, 1)?;
    let (adj, _) = engine.apply_adjoint(&tf, 1)?;
    println!("‖T f‖ = {:.4}, ‖T*T f‖ = {:.4}, spectrum outside the truncation {lost:.3}", tf.l2(), adj.l2());
    println!("⟨Tf, Tf⟩ = {:.6}, ⟨T*Tf, f⟩ = {:.6}", tf.inner(&tf)?.re, adj.inner(&f)?.re);

    let g = engine.apply_adjoint_window(&Window::Ring { j: 1 }, &f)?;
    for k in 0..=3 {
        println!("‖P_{k} T*_1 f‖ / ‖f‖ = {:.3e}", littlewood_paley_project(k, &g).l2() / f.l2());
    }

    let (norm, change) = power_iteration(&engine, &Window::Truncated { j_max: 2 }, &grid, 15, 1)?;
    println!("‖T‖ ≈ {norm:.4} (last relative change {change:.1e})");
    Ok(())
}
