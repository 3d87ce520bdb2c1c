//! Multi-parameter frequency partition: rings, cone windows and angular
//! windows.

pub mod angular;
pub mod layout;
pub mod mollifier;
pub mod sphere;
pub mod windows;

pub use angular::{
    angular_weights, angular_window, angular_window_2d, support_half_angle,
    window_derivative_check, DerivativeKind, DerivativeRatio,
};
pub use layout::{norm, ConeIndex, SubspaceLayout, WindowSpec};
pub use mollifier::{bump_cdf, mollifier, smooth_step};
pub use sphere::{c_grid, random_unit_vectors, sphere_grid, AngularGrid};
pub use windows::{
    cone_window, cone_window_radii, dyadic_window, enumerate_pieces, full_partition_residual,
    product_window, product_window_radii, ring, PartitionResidual,
};
