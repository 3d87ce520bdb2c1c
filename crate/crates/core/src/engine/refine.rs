//! Self-convergence checks.

use super::field::FunctionField;
use crate::error::Result;
use serde::Serialize;

/// Relative differences between a coarse and a refined evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discrepancy {
    pub linf: f64,
    pub l2: f64,
}

/// Runs `op` at refinement levels 1 and `factor` and compares them on the
/// nodes of the coarse result, which must be nodes of the fine one.
pub fn refine_and_compare(op: impl Fn(usize) -> Result<FunctionField>, factor: usize) -> Result<Discrepancy> {
    let coarse = op(1)?;
    let fine = op(factor.max(1))?.restrict_to(&coarse.grid)?;
    let (linf, l2) = coarse.relative_error(&fine)?;
    Ok(Discrepancy { linf, l2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::grid::{Axis, Lattice, SpaceGrid};
    use crate::engine::ops::{littlewood_paley_project, Engine};
    use crate::partition::SubspaceLayout;
    use crate::phase::Phase;
    use crate::symbol::{FreqProfile, Symbol};
    use num_complex::Complex64;

    fn layout() -> SubspaceLayout {
        SubspaceLayout::new(vec![2, 2]).unwrap()
    }

    fn band_limited(level: usize) -> FunctionField {
        let len = 8 * level;
        let grid = SpaceGrid(Lattice::uniform(layout(), Axis::new(-1.0, 2.0 / len as f64, len).unwrap()));
        FunctionField::from_fn(grid, |x| {
            let t = std::f64::consts::PI * (x[0] + 2.0 * x[1] - x[2] + x[3]);
            Complex64::new(t.cos(), (2.0 * t).sin())
        })
    }

    #[test]
    fn exact_multiplier_refines_exactly() {
        let e = Engine::new(Phase::identity(layout()), Symbol::separated(layout(), FreqProfile::One, 1e3)).unwrap();
        for k in [1, 2] {
            let f = band_limited(k);
            let w = crate::partition::ring(2, 7f64.sqrt());
            let exact = FunctionField::from_fn(f.grid.clone(), |x| {
                let t = std::f64::consts::PI * (x[0] + 2.0 * x[1] - x[2] + x[3]);
                Complex64::new(0.0, w * (2.0 * t).sin())
            });
            let (linf, _) = littlewood_paley_project(2, &f).relative_error(&exact).unwrap();
            assert!(linf < 1e-12, "{linf}");
        }
        let d = refine_and_compare(|k| Ok(e.apply_operator(&band_limited(k), 5)?.0), 2).unwrap();
        assert!(d.linf <= 1e-12, "{d:?}");
        let d = refine_and_compare(|k| Ok(littlewood_paley_project(2, &band_limited(k))), 2).unwrap();
        assert!(d.linf <= 1e-12, "{d:?}");
    }
}
