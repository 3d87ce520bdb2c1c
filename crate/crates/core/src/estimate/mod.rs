//! Experiments measuring the kernel, operator and atom estimates.

pub mod atoms;
pub mod checks;
pub mod kernel;
pub mod opnorm;
pub mod orthogonality;
pub mod polar;
pub mod problem;
pub mod report;
pub mod sharpness;
pub mod sstar;

pub use atoms::{adjoint_tail, atom_image_l1, AdjointTailParams, AtomBoundParams};
pub use checks::{partition_check, symbol_check, PartitionParams, SymbolCheckParams};
pub use kernel::{
    kernel_l1_decay, kernel_lipschitz_ratio, kernel_tail_outside, oracle_equivalence, DecayMode,
    KernelDecayParams, KernelTailParams, LipschitzParams, OracleParams, TailRegion,
};
pub use opnorm::{l2_opnorm, power_iteration, OpnormParams};
pub use orthogonality::{orthogonality, orthogonality_defect, random_field, OrthogonalityParams};
pub use problem::Problem;
pub use sharpness::{critical_alpha, critical_order, sharpness_growth, SharpnessParams};
pub use sstar::{sstar_s_decay, SstarParams};
pub use report::{Check, EstimateReport, Fit, MAX_FIT_RESIDUAL};
