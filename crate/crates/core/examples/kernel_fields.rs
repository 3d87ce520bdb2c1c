//! One partial kernel `K^ν_{jℓ}(·, 0)` by FFT and by direct summation, and a
//! raster round trip.

use mpfio::engine::io::{read_raster, write_raster};
use mpfio::engine::{Engine, FreqGrid};
use mpfio::partition::{ConeIndex, SubspaceLayout, WindowSpec};
use mpfio::phase::Phase;
use mpfio::symbol::Symbol;

fn main() -> mpfio::Result<()> {
    let layout = SubspaceLayout::new(vec![2, 2])?;
    let engine = Engine::new(Phase::wave(layout.clone()), Symbol::bessel(layout.clone(), -1.0, 4.0))?;
    let spec = WindowSpec::new(3, ConeIndex::zero(2), Some(vec![0, 0]))?;
    let window = engine.piece_window(&spec)?;
    let fgrid = FreqGrid::covering(layout.clone(), &window, 0.5)?;
    let y = [0.0; 4];
    let k = engine.kernel_convolutional(&window, &y, &fgrid, &[-1.0; 4], 1)?;
    println!("{} frequency nodes, kernel on {:?} nodes, ∫|K| = {:.6}", fgrid.len(), k.field.grid.shape(), k.mass());

    let mut bytes = Vec::new();
    write_raster(&k.field, &mut bytes)?;
    let back = read_raster(bytes.as_slice())?;
    println!("raster: {} bytes, identical after reading back: {}", bytes.len(), back.values == k.field.values);

    // the runner's oracle experiment compares both paths on a patch
    let (rep, _) = mpfio::estimate::oracle_equivalence(&Default::default(), &mpfio::estimate::OracleParams { j: 3, ..Default::default() })?;
    println!("{:?}\n{:?}", rep.columns, rep.rows);
    Ok(())
}
