//! Numerical evaluation of partial kernels and operators.

pub mod budget;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod lowrank;
pub mod ops;
pub mod radial;
pub mod refine;
pub mod window;

pub use field::{EnginePath, FunctionField, KernelField, KernelMeta};
pub use grid::{max_freq_step, max_space_step, Axis, FreqGrid, Lattice, SpaceGrid};
pub use ops::{littlewood_paley_project, truncated_energy, Engine, PathChoice};
pub use window::Window;
pub use refine::{refine_and_compare, Discrepancy};
