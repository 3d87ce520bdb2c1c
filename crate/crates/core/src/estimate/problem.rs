//! Settings shared by every experiment.

use crate::engine::budget::DEFAULT_BUDGET_MB;
use crate::error::{Error, Result};
use crate::partition::SubspaceLayout;
use crate::phase::Phase;
use serde_json::json;

/// Layout, phase and the constants that experiments share.
#[derive(Debug, Clone)]
pub struct Problem {
    pub layout: SubspaceLayout,
    pub phase: Phase,
    /// `R` in the spatial factor `a(x) = φ(2|x|/R)`.
    pub support_radius: f64,
    /// Spacing constant of the direction grids.
    pub grid_constant: f64,
    /// Rectangle constant `C_R`.
    pub c_r: f64,
    pub budget_mb: u64,
}

impl Default for Problem {
    fn default() -> Self {
        let layout = SubspaceLayout::new(vec![2, 2]).expect("valid layout");
        Self {
            phase: Phase::wave(layout.clone()),
            layout,
            support_radius: 4.0,
            grid_constant: 1.0,
            c_r: 4.0,
            budget_mb: DEFAULT_BUDGET_MB,
        }
    }
}

impl Problem {
    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.layout = phase.layout.clone();
        self.phase = phase;
        self
    }

    /// Phase speeds `c_i` for the bi-radial experiments, which need two
    /// circle subspaces and `Φ_i = x_i·ξ_i + c_i|ξ_i|`.
    pub fn speeds(&self) -> Result<[f64; 2]> {
        if self.layout.dims() != [2, 2] {
            return Err(Error::Unsupported(format!(
                "this experiment runs on layout (2, 2), got {:?}",
                self.layout.dims()
            )));
        }
        match self.phase.radial_speeds() {
            Some(c) => Ok([c[0], c[1]]),
            None => Err(Error::Unsupported(format!(
                "phase {} is not of the form x·ξ + c|ξ| in every subspace",
                self.phase.name()
            ))),
        }
    }

    /// `a(x)` as a function of the block radii.
    pub fn spatial(&self, r1: f64, r2: f64) -> f64 {
        crate::partition::mollifier(2.0 * r1.hypot(r2) / self.support_radius)
    }

    /// `n - d`.
    pub fn codim(&self) -> f64 {
        (self.layout.n() - self.layout.d()) as f64
    }

    pub fn echo(&self) -> serde_json::Value {
        json!({
            "layout": self.layout.dims(),
            "phase": self.phase.name(),
            "support_radius": self.support_radius,
            "grid_constant": self.grid_constant,
            "c_r": self.c_r,
        })
    }
}
