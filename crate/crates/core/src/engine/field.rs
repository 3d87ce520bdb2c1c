//! Sampled functions and kernel columns.

use super::fft;
use super::grid::{Lattice, SpaceGrid};
use crate::error::{Error, Result};
use ndarray::{ArrayD, IxDyn, Slice};
use num_complex::Complex64;
use serde::Serialize;

/// Samples of `f` on a space lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionField {
    pub grid: SpaceGrid,
    pub values: ArrayD<Complex64>,
}

impl FunctionField {
    pub fn new(grid: SpaceGrid, values: ArrayD<Complex64>) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(Error::GridMismatch(format!(
                "values of shape {:?} on a grid of shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("field samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpaceGrid) -> Self {
        let values = ArrayD::zeros(IxDyn(&grid.shape()));
        Self { grid, values }
    }

    pub fn from_fn(grid: SpaceGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = ArrayD::from_shape_vec(IxDyn(&grid.shape()), (0..grid.len()).map(|k| f(&grid.node(k))).collect())
            .expect("shape matches node count");
        Self { grid, values }
    }

    /// `(Σ |f|^p · cell)^{1/p}`; `p = ∞` gives the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.cell_volume()).powf(1.0 / p)
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn l2(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// `⟨f, g⟩ = Σ f ḡ · cell`.
    pub fn inner(&self, other: &FunctionField) -> Result<Complex64> {
        if !self.grid.compatible(&other.grid) {
            return Err(Error::GridMismatch("inner product of fields on different grids".into()));
        }
        let s: Complex64 = self.values.iter().zip(other.values.iter()).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Quadrature Fourier transform `f̂(ξ_k) = Σ f(x) e^{-2πi x·ξ_k} · cell` on
    /// the centred dual lattice.
    pub fn spectrum(&self) -> (Lattice, ArrayD<Complex64>) {
        let freq = self.grid.dual_centered();
        let mut v = fft::analyze(&self.values, &self.grid, &freq).expect("dual lattice by construction");
        v.mapv_inplace(|z| z * self.grid.cell_volume());
        (freq, v)
    }

    /// `|‖f‖² - Σ|f̂|²h^n| / ‖f‖²`.
    pub fn parseval_residual(&self) -> f64 {
        let (freq, hat) = self.spectrum();
        let lhs = self.l2().powi(2);
        let rhs: f64 = hat.iter().map(|v| v.norm_sqr()).sum::<f64>() * freq.cell_volume();
        if lhs == 0.0 {
            rhs
        } else {
            (lhs - rhs).abs() / lhs
        }
    }

    pub fn scaled(&self, c: Complex64) -> FunctionField {
        FunctionField { grid: self.grid.clone(), values: self.values.mapv(|v| v * c) }
    }

    /// Restriction to the nodes of `coarse`, which must all be nodes of this grid.
    pub fn restrict_to(&self, coarse: &Lattice) -> Result<FunctionField> {
        if coarse.layout() != self.grid.layout() {
            return Err(Error::GridMismatch("restriction across layouts".into()));
        }
        let mut slices = Vec::new();
        for (c, f) in coarse.axes().iter().zip(self.grid.axes()) {
            let ratio = c.step / f.step;
            let offset = (c.origin - f.origin) / f.step;
            let (r, o) = (ratio.round(), offset.round());
            let ok = r >= 1.0
                && (ratio - r).abs() < 1e-9
                && (offset - o).abs() < 1e-9
                && o >= 0.0
                && (o as usize) + (r as usize) * (c.len - 1) < f.len;
            if !ok {
                return Err(Error::GridMismatch(format!(
                    "axis (origin {}, step {}) is not a sub-lattice of (origin {}, step {})",
                    c.origin, c.step, f.origin, f.step
                )));
            }
            let (r, o) = (r as usize, o as usize);
            slices.push(Slice::new(o as isize, Some((o + r * (c.len - 1) + 1) as isize), r as isize));
        }
        let values = self.values.slice_each_axis(|ax| slices[ax.axis.index()]).to_owned();
        Ok(FunctionField { grid: SpaceGrid(coarse.clone()), values })
    }

    /// Relative discrepancies `(L∞, L²)` against a reference on the same grid.
    pub fn relative_error(&self, reference: &FunctionField) -> Result<(f64, f64)> {
        if !self.grid.compatible(&reference.grid) {
            return Err(Error::GridMismatch("comparison of fields on different grids".into()));
        }
        let mut num_inf = 0.0f64;
        let mut den_inf = 0.0f64;
        let mut num2 = 0.0;
        let mut den2 = 0.0;
        for (a, b) in self.values.iter().zip(reference.values.iter()) {
            let d = (a - b).norm();
            num_inf = num_inf.max(d);
            den_inf = den_inf.max(b.norm());
            num2 += d * d;
            den2 += b.norm_sqr();
        }
        let rel = |n: f64, d: f64| if d == 0.0 { n } else { n / d };
        Ok((rel(num_inf, den_inf), rel(num2.sqrt(), den2.sqrt())))
    }
}

/// How a kernel column was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnginePath {
    Direct,
    Convolutional,
    Polar,
    LowRank,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelMeta {
    pub j: u32,
    pub ell: Vec<u32>,
    /// `None` when every direction is summed.
    pub nu: Option<Vec<usize>>,
    pub path: EnginePath,
}

/// One column `x ↦ K(x, y)` of a partial kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    pub y: Vec<f64>,
    pub field: FunctionField,
    pub meta: KernelMeta,
}

impl KernelField {
    /// `∫ |K(x, y)| dx` by quadrature.
    pub fn mass(&self) -> f64 {
        self.field.l1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::grid::Axis;
    use crate::partition::SubspaceLayout;

    fn grid() -> SpaceGrid {
        SpaceGrid::cube(SubspaceLayout::new(vec![2, 2]).unwrap(), 2.0, 8)
    }

    #[test]
    fn parseval_holds() {
        let f = FunctionField::from_fn(grid(), |x| {
            Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), x[0] * x[3])
        });
        assert!(f.parseval_residual() < 1e-12);
    }

    #[test]
    fn norms_of_constant() {
        let f = FunctionField::from_fn(grid(), |_| Complex64::new(2.0, 0.0));
        assert!((f.l1() - 32.0).abs() < 1e-12);
        assert!((f.l2() - (4.0f64 * 16.0).sqrt()).abs() < 1e-12);
        assert!((f.lp_norm(1.0) - f.l1()).abs() < 1e-12);
        assert_eq!(f.lp_norm(f64::INFINITY), 2.0);
    }

    #[test]
    fn restriction_picks_matching_nodes() {
        let f = FunctionField::from_fn(grid(), |x| Complex64::new(x[0] + 10.0 * x[2], 0.0));
        let coarse = Lattice::uniform(grid().layout().clone(), Axis::new(-1.0, 0.5, 4).unwrap());
        let r = f.restrict_to(&coarse).unwrap();
        for (k, v) in r.values.iter().enumerate() {
            let x = coarse.node(k);
            assert_eq!(v.re, x[0] + 10.0 * x[2]);
        }
        let bad = Lattice::uniform(grid().layout().clone(), Axis::new(-0.9, 0.5, 4).unwrap());
        assert!(f.restrict_to(&bad).is_err());
    }
}
