//! Frequency windows applied by the engine.

use crate::error::{Error, Result};
use crate::partition::{
    angular_window, cone_window_radii, mollifier, norm, ring, sphere_grid, AngularGrid, ConeIndex, SubspaceLayout,
    WindowSpec,
};

/// A frequency multiplier built from the partition.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    /// No cutoff.
    All,
    /// Sum of every piece with `j <= j_max`, equal to `∏ φ(2^{-j_max}|ξ_i|)`.
    Truncated { j_max: u32 },
    /// Isotropic Littlewood–Paley ring `φ_j(|ξ|)`.
    Ring { j: u32 },
    /// Cone window `Σ_{j <= j_max} φ_{jℓ}`.
    Cone { cone: ConeIndex, j_max: u32 },
    /// `φ_{jℓ}` or `φ_{jℓ}χ^ν`, with one direction grid per subspace.
    Piece { spec: WindowSpec, grids: Option<Vec<AngularGrid>> },
}

impl Window {
    /// Builds the piece window for `spec`, generating direction grids with
    /// spacing constant `c` when `spec.nu` is set.
    pub fn piece(layout: &SubspaceLayout, spec: WindowSpec, c: f64) -> Result<Self> {
        if spec.cone.d() != layout.d() {
            return Err(Error::Layout(format!("cone index of length {} for d = {}", spec.cone.d(), layout.d())));
        }
        let grids = match &spec.nu {
            None => None,
            Some(nu) => {
                let scales = spec.scales();
                let mut grids = Vec::with_capacity(layout.d());
                for (i, &dim) in layout.dims().iter().enumerate() {
                    let g = sphere_grid(scales[i], dim, c)?;
                    if nu[i] >= g.len() {
                        return Err(Error::Index(format!(
                            "direction {} out of range for {} directions in subspace {}",
                            nu[i],
                            g.len(),
                            i + 1
                        )));
                    }
                    grids.push(g);
                }
                Some(grids)
            }
        };
        Ok(Window::Piece { spec, grids })
    }

    /// True when the window is a product of per-subspace factors.
    pub fn is_factored(&self) -> bool {
        matches!(self, Window::All | Window::Truncated { .. } | Window::Piece { .. })
    }

    /// Factor of subspace `i` for factored windows.
    pub fn block_factor(&self, i: usize, xi_i: &[f64]) -> Option<f64> {
        match self {
            Window::All => Some(1.0),
            Window::Truncated { j_max } => Some(mollifier(norm(xi_i) * (-(*j_max as f64)).exp2())),
            Window::Piece { spec, grids } => {
                let j_i = spec.j - spec.cone.ell()[i];
                let r = ring(j_i, norm(xi_i));
                if r == 0.0 {
                    return Some(0.0);
                }
                let chi = match (grids, &spec.nu) {
                    (Some(g), Some(nu)) => angular_window(&g[i], nu[i], xi_i).unwrap_or(0.0),
                    _ => 1.0,
                };
                Some(r * chi)
            }
            _ => None,
        }
    }

    pub fn eval(&self, layout: &SubspaceLayout, xi: &[f64]) -> f64 {
        match self {
            Window::Ring { j } => ring(*j, norm(xi)),
            Window::Cone { cone, j_max } => cone_window_radii(cone, &layout.block_norms(xi), *j_max),
            _ => layout
                .split(xi)
                .iter()
                .enumerate()
                .map(|(i, b)| self.block_factor(i, b).expect("factored"))
                .product(),
        }
    }

    /// Scale governing the resolution requirement.
    pub fn scale(&self) -> Option<u32> {
        match self {
            Window::All => None,
            Window::Truncated { j_max } | Window::Cone { j_max, .. } => Some(*j_max),
            Window::Ring { j } => Some(*j),
            Window::Piece { spec, .. } => Some(spec.j),
        }
    }

    /// Radius beyond which every block of the support lies, per subspace.
    pub fn block_support(&self, d: usize) -> Option<Vec<f64>> {
        let r = |j: u32| ((j + 1) as f64).exp2();
        match self {
            Window::All => None,
            Window::Truncated { j_max } | Window::Ring { j: j_max } | Window::Cone { j_max, .. } => {
                Some(vec![r(*j_max); d])
            }
            Window::Piece { spec, .. } => Some(spec.scales().into_iter().map(r).collect()),
        }
    }

    /// Direction grid of subspace `i`, if any.
    pub fn grid(&self, i: usize) -> Option<&AngularGrid> {
        match self {
            Window::Piece { grids: Some(g), .. } => g.get(i),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::enumerate_pieces;

    #[test]
    fn truncated_equals_sum_of_pieces() {
        let layout = SubspaceLayout::new(vec![2, 2]).unwrap();
        let pieces = enumerate_pieces(2, 5);
        let trunc = Window::Truncated { j_max: 5 };
        for xi in [[3.0, 1.0, 0.2, 0.1], [40.0, -3.0, 20.0, 7.0], [0.1, 0.0, 55.0, 1.0]] {
            let s: f64 = pieces
                .iter()
                .map(|p| Window::piece(&layout, p.clone(), 1.0).unwrap().eval(&layout, &xi))
                .sum();
            assert!((s - trunc.eval(&layout, &xi)).abs() < 1e-13);
        }
    }

    #[test]
    fn directional_pieces_sum_to_piece() {
        let layout = SubspaceLayout::new(vec![2, 2]).unwrap();
        let spec = WindowSpec::new(4, ConeIndex::new(vec![0, 1]).unwrap(), None).unwrap();
        let full = Window::piece(&layout, spec.clone(), 1.0).unwrap();
        let n1 = sphere_grid(4, 2, 1.0).unwrap().len();
        let n2 = sphere_grid(3, 2, 1.0).unwrap().len();
        let xi = [9.0, 5.0, -3.0, 6.0];
        let mut s = 0.0;
        for a in 0..n1 {
            for b in 0..n2 {
                let sp = WindowSpec::new(4, spec.cone.clone(), Some(vec![a, b])).unwrap();
                s += Window::piece(&layout, sp, 1.0).unwrap().eval(&layout, &xi);
            }
        }
        assert!((s - full.eval(&layout, &xi)).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_direction() {
        let layout = SubspaceLayout::new(vec![2, 2]).unwrap();
        let spec = WindowSpec::new(2, ConeIndex::zero(2), Some(vec![100, 0])).unwrap();
        assert!(Window::piece(&layout, spec, 1.0).is_err());
    }
}
