//! Uniform lattices in space and frequency.

use crate::error::{Error, Result};
use super::window::Window;
use crate::partition::{support_half_angle, SubspaceLayout};

/// Nodes `origin + k·step`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    pub fn new(origin: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || len == 0 || !origin.is_finite() {
            return Err(Error::Domain(format!("invalid axis: origin {origin}, step {step}, len {len}")));
        }
        Ok(Self { origin, step, len })
    }

    /// FFT-ordered symmetric axis: nodes `(k - len/2)·step`.
    pub fn centered(len: usize, step: f64) -> Self {
        Self { origin: -((len / 2) as f64) * step, step, len }
    }

    /// Axis of `len` nodes with period `len·step` centred on `center`.
    pub fn around(center: f64, step: f64, len: usize) -> Self {
        Self { origin: center - ((len / 2) as f64) * step, step, len }
    }

    pub fn node(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.step
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.node(k)).collect()
    }

    pub fn last(&self) -> f64 {
        self.node(self.len - 1)
    }

    /// `len·step`.
    pub fn period(&self) -> f64 {
        self.len as f64 * self.step
    }

    /// Axis in the dual variable with `len` nodes and step `1/(len·step_self)`.
    pub fn dual(&self, len: usize, origin: f64) -> Axis {
        Axis { origin, step: 1.0 / (len as f64 * self.step), len }
    }
}

/// Tensor lattice over `ℝ^n` split into the subspaces of a layout. Flat
/// indices are row-major with the last coordinate fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    layout: SubspaceLayout,
    axes: Vec<Axis>,
}

impl Lattice {
    pub fn new(layout: SubspaceLayout, axes: Vec<Axis>) -> Result<Self> {
        if axes.len() != layout.n() {
            return Err(Error::Layout(format!("{} axes for an n = {} layout", axes.len(), layout.n())));
        }
        Ok(Self { layout, axes })
    }

    /// Same axis in every coordinate.
    pub fn uniform(layout: SubspaceLayout, axis: Axis) -> Self {
        let axes = vec![axis; layout.n()];
        Self { layout, axes }
    }

    pub fn layout(&self) -> &SubspaceLayout {
        &self.layout
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// Axes of subspace `i`.
    pub fn block(&self, i: usize) -> &[Axis] {
        let off = self.layout.offsets()[i];
        &self.axes[off..off + self.layout.dims()[i]]
    }

    /// Number of nodes in the subspace-`i` factor.
    pub fn block_len(&self, i: usize) -> usize {
        self.block(i).iter().map(|a| a.len).product()
    }

    /// Coordinates of every node of the subspace-`i` factor, row-major.
    pub fn block_nodes(&self, i: usize) -> Vec<Vec<f64>> {
        let axes = self.block(i);
        let count = self.block_len(i);
        (0..count)
            .map(|mut flat| {
                let mut p = vec![0.0; axes.len()];
                for (c, a) in axes.iter().enumerate().rev() {
                    p[c] = a.node(flat % a.len);
                    flat /= a.len;
                }
                p
            })
            .collect()
    }

    /// Coordinates of the node with a row-major flat index.
    pub fn node(&self, mut flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.axes.len()];
        for (c, a) in self.axes.iter().enumerate().rev() {
            p[c] = a.node(flat % a.len);
            flat /= a.len;
        }
        p
    }

    /// [`Lattice::node`] into a caller buffer of length `n`.
    pub fn node_into(&self, mut flat: usize, p: &mut [f64]) {
        for (c, a) in self.axes.iter().enumerate().rev() {
            p[c] = a.node(flat % a.len);
            flat /= a.len;
        }
    }

    /// Per-block indices of a row-major flat index.
    pub fn split_index(&self, mut flat: usize, idx: &mut [usize]) {
        for i in (0..idx.len()).rev() {
            let len = self.block_len(i);
            idx[i] = flat % len;
            flat /= len;
        }
    }

    pub fn compatible(&self, other: &Lattice) -> bool {
        self.layout == other.layout
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.len == b.len
                    && (a.step - b.step).abs() <= 1e-12 * a.step
                    && (a.origin - b.origin).abs() <= 1e-12 * a.step.max(a.origin.abs())
            })
    }

    /// The frequency lattice dual to this one under the DFT, FFT-ordered
    /// so that the zero frequency sits at index `len/2`.
    pub fn dual_centered(&self) -> Lattice {
        let axes = self.axes.iter().map(|a| Axis::centered(a.len, 1.0 / a.period())).collect();
        Lattice { layout: self.layout.clone(), axes }
    }
}

/// Frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid(pub Lattice);

/// Space lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid(pub Lattice);

impl std::ops::Deref for FreqGrid {
    type Target = Lattice;
    fn deref(&self) -> &Lattice {
        &self.0
    }
}

impl std::ops::Deref for SpaceGrid {
    type Target = Lattice;
    fn deref(&self) -> &Lattice {
        &self.0
    }
}

/// Largest frequency spacing that resolves the angular windows at scale `j`:
/// a window of aperture `2^{-j/2}` on a ring of radius `2^j` varies over
/// lengths `2^{j/2}`, sampled at four nodes per length.
pub fn max_freq_step(j: u32) -> f64 {
    (j as f64 / 2.0).exp2() / 4.0
}

/// Largest space step resolving oscillation at frequency `2^{j+1}`.
pub fn max_space_step(j: u32) -> f64 {
    (-(j as f64) - 1.0).exp2()
}

impl FreqGrid {
    /// Symmetric box `[-E_i, E_i)^{n_i}` with spacing `h_i` per subspace.
    pub fn symmetric(layout: SubspaceLayout, extents: &[f64], spacings: &[f64]) -> Result<Self> {
        if extents.len() != layout.d() || spacings.len() != layout.d() {
            return Err(Error::Layout("one extent and one spacing per subspace".into()));
        }
        let mut axes = Vec::new();
        for (i, &dim) in layout.dims().iter().enumerate() {
            let len = 2 * (extents[i] / spacings[i]).ceil() as usize;
            let axis = Axis::new(-((len / 2) as f64) * spacings[i], spacings[i], len)?;
            axes.extend(std::iter::repeat(axis).take(dim));
        }
        Ok(Self(Lattice::new(layout, axes)?))
    }

    /// Smallest lattice of spacing `h` containing the support of `window`
    /// in each subspace. Directional pieces on circles get the bounding box
    /// of their annular sector; everything else a symmetric box.
    pub fn covering(layout: SubspaceLayout, window: &Window, h: f64) -> Result<Self> {
        let radii = window
            .block_support(layout.d())
            .ok_or_else(|| Error::Domain("an unbounded window has no covering grid".into()))?;
        let mut axes = Vec::new();
        for (i, &dim) in layout.dims().iter().enumerate() {
            let outer = radii[i];
            let bounds: Vec<(f64, f64)> = match (window.grid(i), window) {
                (Some(g), Window::Piece { spec, .. }) if dim == 2 => {
                    let nu = spec.nu.as_ref().expect("grid implies direction")[i];
                    let p = g.point(nu);
                    let center = p[1].atan2(p[0]);
                    let half = support_half_angle(g.j);
                    let inner = outer / 4.0;
                    let mut pts = Vec::new();
                    for k in 0..=256 {
                        let a = center - half + 2.0 * half * k as f64 / 256.0;
                        for r in [inner, outer] {
                            pts.push((r * a.cos(), r * a.sin()));
                        }
                    }
                    let lo = |f: fn(&(f64, f64)) -> f64| pts.iter().map(f).fold(f64::MAX, f64::min);
                    let hi = |f: fn(&(f64, f64)) -> f64| pts.iter().map(f).fold(f64::MIN, f64::max);
                    vec![(lo(|p| p.0), hi(|p| p.0)), (lo(|p| p.1), hi(|p| p.1))]
                }
                _ => vec![(-outer, outer); dim],
            };
            for (lo, hi) in bounds {
                let start = (lo / h).floor();
                let len = ((hi / h).ceil() - start) as usize + 1;
                axes.push(Axis::new(start * h, h, len)?);
            }
        }
        Ok(Self(Lattice::new(layout, axes)?))
    }

    /// Errors unless every step is at most `max_freq_step(j)`.
    pub fn check_resolution(&self, j: u32) -> Result<()> {
        let cap = max_freq_step(j);
        match self.axes().iter().find(|a| a.step > cap * (1.0 + 1e-12)) {
            Some(a) => Err(Error::Resolution(format!(
                "frequency step {} exceeds {cap} required at j = {j}",
                a.step
            ))),
            None => Ok(()),
        }
    }

    /// Errors unless subspace `i` covers `|ξ_i| <= 2^{j_i+1}`.
    pub fn check_extent(&self, scales: &[u32]) -> Result<()> {
        for (i, &j) in scales.iter().enumerate() {
            let need = ((j + 1) as f64).exp2();
            for a in self.block(i) {
                if a.origin > -need || a.last() < need * (1.0 - 1e-12) - a.step {
                    return Err(Error::Resolution(format!(
                        "frequency box [{}, {}] in subspace {} does not cover radius {need}",
                        a.origin,
                        a.last(),
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

impl SpaceGrid {
    /// `len` nodes per coordinate with period `side`, centred on the origin.
    pub fn cube(layout: SubspaceLayout, side: f64, len: usize) -> Self {
        Self(Lattice::uniform(layout, Axis::around(0.0, side / len as f64, len)))
    }

    pub fn check_resolution(&self, j: u32) -> Result<()> {
        let cap = max_space_step(j);
        match self.axes().iter().find(|a| a.step > cap * (1.0 + 1e-12)) {
            Some(a) => Err(Error::Resolution(format!("space step {} exceeds {cap} required at j = {j}", a.step))),
            None => Ok(()),
        }
    }
}
