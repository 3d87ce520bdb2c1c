//! Band orthogonality `P_k T*_j = 0` for `|k - j| >= 2`.

use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::{littlewood_paley_project, Engine, FunctionField, SpaceGrid, Window};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::symbol::Symbol;
use ndarray::{ArrayD, IxDyn};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrthogonalityParams {
    /// `(k, j)` pairs.
    pub pairs: Vec<(u32, u32)>,
    /// Nodes per coordinate.
    pub nodes: usize,
    /// Period of the box; `nodes / side` must resolve `2^{max(k, j) + 1}`.
    pub side: f64,
    pub m: f64,
    pub tolerance: f64,
    /// Tolerance for the identity-phase control.
    pub control_tolerance: f64,
}

impl Default for OrthogonalityParams {
    fn default() -> Self {
        Self {
            pairs: vec![(5, 2), (6, 3), (2, 6)],
            nodes: 16,
            side: 0.125,
            m: -1.0,
            tolerance: 1e-8,
            control_tolerance: 1e-12,
        }
    }
}

/// Samples with independent uniform real and imaginary parts in `[-1/2, 1/2)`.
pub fn random_field(grid: &SpaceGrid, seed: u64) -> FunctionField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> =
        (0..grid.len()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    FunctionField { grid: grid.clone(), values: ArrayD::from_shape_vec(IxDyn(&grid.shape()), v).expect("node count") }
}

/// `‖P_k T*_j f‖₂ / ‖f‖₂`, where `T*_j` is the adjoint of the ring-`j` piece.
pub fn orthogonality_defect(engine: &Engine, k: u32, j: u32, f: &FunctionField) -> Result<f64> {
    if k.abs_diff(j) < 2 {
        return Err(Error::Domain(format!("bands k = {k} and j = {j} overlap; need |k - j| >= 2")));
    }
    let norm = f.l2();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let g = engine.apply_adjoint_window(&Window::Ring { j }, f)?;
    Ok(littlewood_paley_project(k, &g).l2() / norm)
}

pub fn orthogonality(problem: &Problem, p: &OrthogonalityParams, seed: u64) -> Result<EstimateReport> {
    let layout = problem.layout.clone();
    let grid = SpaceGrid::cube(layout.clone(), p.side, p.nodes);
    let nyquist = p.nodes as f64 / (2.0 * p.side);
    let symbol = Symbol::bessel(layout.clone(), p.m, problem.support_radius);
    let engine = Engine::new(problem.phase.clone(), symbol.clone())?.with_budget(problem.budget_mb);
    let control = Engine::new(Phase::identity(layout), symbol)?;
    let f = random_field(&grid, seed);
    let mut rep = EstimateReport::new(
        "orthogonality",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        seed,
        &["k", "j", "defect", "control"],
    );
    for &(k, j) in &p.pairs {
        let top = ((k.max(j) + 1) as f64).exp2();
        if top > nyquist * (problem.layout.n() as f64).sqrt() {
            return Err(Error::Resolution(format!(
                "band 2^{} exceeds the grid's frequency range with {} nodes on side {}",
                k.max(j) + 1,
                p.nodes,
                p.side
            )));
        }
        let defect = orthogonality_defect(&engine, k, j, &f)?;
        let base = orthogonality_defect(&control, k, j, &f)?;
        rep.push(vec![k as f64, j as f64, defect, base]);
        rep.check(Check::at_most(&format!("defect at (k, j) = ({k}, {j})"), defect, p.tolerance));
        rep.check(Check::at_most(&format!("identity control at (k, j) = ({k}, {j})"), base, p.control_tolerance));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacent_bands_are_rejected() {
        let problem = Problem::default();
        let engine = Engine::new(problem.phase.clone(), Symbol::bessel(problem.layout.clone(), -1.0, 4.0)).unwrap();
        let f = random_field(&SpaceGrid::cube(problem.layout.clone(), 0.125, 8), 1);
        assert!(orthogonality_defect(&engine, 3, 3, &f).is_err());
        assert!(orthogonality_defect(&engine, 4, 3, &f).is_err());
    }

    #[test]
    fn same_band_is_not_small() {
        // the projector onto the band itself keeps a fixed share of f
        let problem = Problem::default();
        let engine = Engine::new(problem.phase.clone(), Symbol::bessel(problem.layout.clone(), 0.0, 4.0)).unwrap();
        let f = random_field(&SpaceGrid::cube(problem.layout.clone(), 0.125, 8), 2);
        let g = engine.apply_adjoint_window(&Window::Ring { j: 5 }, &f).unwrap();
        assert!(littlewood_paley_project(5, &g).l2() > 0.01 * f.l2());
    }

    #[test]
    fn small_grid_pairs() {
        let p = OrthogonalityParams { pairs: vec![(4, 1), (1, 5)], nodes: 8, ..Default::default() };
        let rep = orthogonality(&Problem::default(), &p, 5).unwrap();
        assert!(rep.pass(), "{:?}", rep.rows);
    }
}
