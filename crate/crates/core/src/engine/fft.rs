//! Multi-dimensional DFTs between dual lattices with arbitrary origins.

use super::grid::{Axis, Lattice};
use crate::error::{Error, Result};
use ndarray::{ArrayD, Axis as NdAxis, IxDyn};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

pub(crate) fn cis(turns: f64) -> Complex64 {
    let t = TAU * turns.rem_euclid(1.0);
    Complex64::new(t.cos(), t.sin())
}

/// Unnormalized in-place DFT along every axis; `inverse` selects `e^{+2πi}`.
pub fn fft_nd(data: &mut ArrayD<Complex64>, inverse: bool) {
    let mut planner = FftPlanner::new();
    for ax in 0..data.ndim() {
        let n = data.shape()[ax];
        if n < 2 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for mut lane in data.lanes_mut(NdAxis(ax)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(&buf) {
                *v = *b;
            }
        }
    }
}

/// Multiplies `data` along axis `ax` by `factors`.
pub(crate) fn scale_along(data: &mut ArrayD<Complex64>, ax: usize, factors: &[Complex64]) {
    for mut lane in data.lanes_mut(NdAxis(ax)) {
        for (v, f) in lane.iter_mut().zip(factors) {
            *v *= f;
        }
    }
}

fn check_dual(freq: &Axis, space: &Axis) -> Result<()> {
    let prod = freq.step * space.step * space.len as f64;
    if (prod - 1.0).abs() > 1e-10 || freq.len > space.len {
        return Err(Error::GridMismatch(format!(
            "frequency axis (step {}, {} nodes) is not dual to space axis (step {}, {} nodes)",
            freq.step, freq.len, space.step, space.len
        )));
    }
    Ok(())
}

/// `out(x_m) = Σ_k g(ξ_k) e^{2πi x_m·ξ_k}` for `g` on `freq` and `x_m` on
/// `space`. Each space axis must have `len >= ` the frequency length and
/// step `1/(len·h)`; extra length acts as zero padding.
pub fn synthesize(g: &ArrayD<Complex64>, freq: &Lattice, space: &Lattice) -> Result<ArrayD<Complex64>> {
    for (f, s) in freq.axes().iter().zip(space.axes()) {
        check_dual(f, s)?;
    }
    let mut work = ArrayD::<Complex64>::zeros(IxDyn(&space.shape()));
    {
        let fshape = freq.shape();
        let mut view = work.slice_each_axis_mut(|ax| ndarray::Slice::from(0..fshape[ax.axis.index()]));
        view.assign(g);
    }
    for (ax, (f, s)) in freq.axes().iter().zip(space.axes()).enumerate() {
        let pre: Vec<Complex64> = (0..s.len).map(|k| cis(s.origin * f.step * k as f64)).collect();
        scale_along(&mut work, ax, &pre);
    }
    fft_nd(&mut work, true);
    for (ax, (f, s)) in freq.axes().iter().zip(space.axes()).enumerate() {
        let post: Vec<Complex64> = (0..s.len).map(|m| cis(s.node(m) * f.origin)).collect();
        scale_along(&mut work, ax, &post);
    }
    Ok(work)
}

/// `out(ξ_k) = Σ_m f(x_m) e^{-2πi x_m·ξ_k}`; the adjoint of [`synthesize`].
pub fn analyze(f: &ArrayD<Complex64>, space: &Lattice, freq: &Lattice) -> Result<ArrayD<Complex64>> {
    for (fa, s) in freq.axes().iter().zip(space.axes()) {
        check_dual(fa, s)?;
    }
    let mut work = f.clone();
    for (ax, (fa, s)) in freq.axes().iter().zip(space.axes()).enumerate() {
        let pre: Vec<Complex64> = (0..s.len).map(|m| cis(-(m as f64) * s.step * fa.origin)).collect();
        scale_along(&mut work, ax, &pre);
    }
    fft_nd(&mut work, false);
    let fshape = freq.shape();
    let mut out = work.slice_each_axis(|ax| ndarray::Slice::from(0..fshape[ax.axis.index()])).to_owned();
    for (ax, (fa, s)) in freq.axes().iter().zip(space.axes()).enumerate() {
        let post: Vec<Complex64> = (0..fa.len).map(|k| cis(-s.origin * fa.node(k))).collect();
        scale_along(&mut out, ax, &post);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::SubspaceLayout;

    fn brute(g: &ArrayD<Complex64>, freq: &Lattice, space: &Lattice, sign: f64) -> ArrayD<Complex64> {
        let mut out = ArrayD::zeros(IxDyn(&space.shape()));
        for (m, o) in out.iter_mut().enumerate() {
            let x = space.node(m);
            for (k, v) in g.iter().enumerate() {
                let xi = freq.node(k);
                let dot: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                *o += v * cis(sign * dot);
            }
        }
        out
    }

    #[test]
    fn shifted_synthesis_matches_direct_sum() {
        let layout = SubspaceLayout::new(vec![2]).unwrap();
        let freq = Lattice::new(layout.clone(), vec![Axis::new(3.25, 0.5, 5).unwrap(), Axis::new(-1.0, 0.25, 4).unwrap()])
            .unwrap();
        let space = Lattice::new(layout, vec![Axis::new(-1.3, 2.0 / 8.0, 8).unwrap(), Axis::new(0.7, 4.0 / 6.0, 6).unwrap()])
            .unwrap();
        let g = ArrayD::from_shape_fn(IxDyn(&freq.shape()), |ix| Complex64::new(ix[0] as f64 - 1.5, (ix[1] * ix[0]) as f64));
        let fast = synthesize(&g, &freq, &space).unwrap();
        let slow = brute(&g, &freq, &space, 1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-11);
        }
        let f = ArrayD::from_shape_fn(IxDyn(&space.shape()), |ix| Complex64::new((ix[0] + 2 * ix[1]) as f64, 1.0));
        let fast = analyze(&f, &space, &freq).unwrap();
        let slow = brute(&f, &space, &freq, -1.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_dual_axes() {
        let layout = SubspaceLayout::new(vec![2]).unwrap();
        let freq = Lattice::uniform(layout.clone(), Axis::centered(4, 1.0));
        let space = Lattice::uniform(layout, Axis::centered(4, 0.5));
        let g = ArrayD::zeros(IxDyn(&[4, 4]));
        assert!(matches!(synthesize(&g, &freq, &space), Err(Error::GridMismatch(_))));
    }
}
