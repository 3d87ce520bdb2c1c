//! Power iteration for `‖T‖_{L²→L²}` on a periodic box.

use super::problem::Problem;
use super::report::{Check, EstimateReport};
use crate::engine::budget::{self, complex_mb};
use crate::engine::{Engine, FunctionField, SpaceGrid, Window};
use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::symbol::{FreqProfile, Symbol};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpnormParams {
    /// Period of the box in each coordinate.
    pub side: f64,
    /// Nodes per coordinate, one row per entry.
    pub nodes: Vec<usize>,
    pub iterations: usize,
    /// Allowed max/min of the estimates across the ladder.
    pub ladder: f64,
    /// Tolerance of the identity control around 1.
    pub control_tolerance: f64,
    /// Last-step ratio change above which the estimate is flagged.
    pub oscillation: f64,
}

impl Default for OpnormParams {
    fn default() -> Self {
        Self {
            side: 4.0,
            nodes: vec![16, 32, 48],
            iterations: 20,
            ladder: 2.0,
            control_tolerance: 1e-6,
            oscillation: 0.1,
        }
    }
}

/// `sqrt` of the top eigenvalue of `T_W*T_W` by `iterations` power steps, and
/// the relative change of the last step's Rayleigh ratio.
pub fn power_iteration(
    engine: &Engine,
    window: &Window,
    grid: &SpaceGrid,
    iterations: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if iterations < 2 {
        return Err(Error::Domain("power iteration needs at least 2 steps".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<Complex64> =
        (0..grid.len()).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let shape = ndarray::IxDyn(&grid.shape());
    let mut v = FunctionField::new(grid.clone(), ndarray::ArrayD::from_shape_vec(shape, start).expect("node count"))?;
    let mut prev = 0.0;
    let mut change = 0.0;
    for step in 0..iterations {
        let nv = v.l2();
        if nv == 0.0 {
            return Ok((0.0, 0.0));
        }
        v = v.scaled(Complex64::new(1.0 / nv, 0.0));
        let w = engine.apply_adjoint_window(window, &engine.apply(window, &v)?)?;
        let lambda = w.l2();
        if step > 0 {
            change = (lambda / prev - 1.0).abs();
        }
        prev = lambda;
        v = w;
    }
    Ok((prev.sqrt(), change))
}

/// `‖T‖` with `σ = a(x)` and the problem's phase over a refinement ladder,
/// next to the identity control that must return 1.
pub fn l2_opnorm(problem: &Problem, p: &OpnormParams, seed: u64) -> Result<EstimateReport> {
    if p.nodes.len() < 2 {
        return Err(Error::Domain("the refinement ladder needs at least two grids".into()));
    }
    let layout = problem.layout.clone();
    let engine = Engine::new(
        problem.phase.clone(),
        Symbol::separated(layout.clone(), FreqProfile::One, problem.support_radius),
    )?
    .with_budget(problem.budget_mb);
    let control = Engine::new(
        Phase::identity(layout.clone()),
        Symbol::separated(layout.clone(), FreqProfile::One, f64::INFINITY),
    )?;
    let mut rep = EstimateReport::new(
        "l2-opnorm",
        serde_json::json!({ "problem": problem.echo(), "params": p }),
        seed,
        &["nodes", "opnorm", "control", "last_change"],
    );
    for &n in &p.nodes {
        let points = (n as f64).powi(layout.n() as i32);
        budget::check(complex_mb(6.0 * points), problem.budget_mb)?;
        let grid = SpaceGrid::cube(layout.clone(), p.side, n);
        let (norm, change) = power_iteration(&engine, &Window::All, &grid, p.iterations, seed)?;
        // T*T = I for the control, so a few steps settle it
        let (unit, _) = power_iteration(&control, &Window::All, &grid, 3, seed)?;
        if change > p.oscillation {
            rep.flag(format!("power iteration at N = {n} still moves by {:.1}%", 100.0 * change));
        }
        rep.push(vec![n as f64, norm, unit, change]);
    }
    let norms = rep.column("opnorm").expect("column");
    let hi = norms.iter().fold(0.0f64, |m, v| m.max(*v));
    let lo = norms.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    rep.check(Check::at_most("max/min operator norm across the ladder", hi / lo, p.ladder));
    for (n, c) in p.nodes.iter().zip(rep.column("control").expect("column")) {
        rep.check(Check::within(&format!("identity control at N = {n}"), c, 1.0, p.control_tolerance));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_multiplier_norm_is_its_sup() {
        // identity phase with a ring window: the norm is sup φ_2 = 1
        let layout = crate::partition::SubspaceLayout::new(vec![2, 2]).unwrap();
        let engine = Engine::new(
            Phase::identity(layout.clone()),
            Symbol::separated(layout.clone(), FreqProfile::One, f64::INFINITY),
        )
        .unwrap();
        let grid = SpaceGrid::cube(layout, 4.0, 16);
        let f = FunctionField::from_fn(grid.clone(), |x| Complex64::new((-x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0));
        let g = engine.apply(&Window::Ring { j: 2 }, &f).unwrap();
        assert!(g.l2() <= f.l2() * (1.0 + 1e-12));
        let (norm, _) = power_iteration(&engine, &Window::Ring { j: 2 }, &grid, 30, 3).unwrap();
        assert!(norm <= 1.0 + 1e-12 && norm > 0.99, "{norm}");
        let (all, _) = power_iteration(&engine, &Window::All, &grid, 4, 3).unwrap();
        assert!((all - 1.0).abs() < 1e-12, "{all}");
    }

    #[test]
    fn small_ladder_is_stable() {
        let problem = Problem::default();
        let p = OpnormParams { nodes: vec![8, 12], iterations: 12, ..Default::default() };
        let rep = l2_opnorm(&problem, &p, 7).unwrap();
        assert!(rep.pass(), "{:?}", rep.checks);
        for n in rep.column("opnorm").unwrap() {
            assert!(n > 0.5 && n <= 1.0 + 1e-9, "{n}");
        }
    }
}
