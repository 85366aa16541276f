//! Correspondence-based estimators.

pub mod algebraic;
pub mod linear;
pub mod robust;
pub mod seven_point;

pub use algebraic::{algebraic_minimization, AlgebraicFit};
pub use linear::{design_matrix, eight_point, hartley_normalize, normalized_eight_point, DesignMatrix};
pub use robust::{lemeds, ransac, RobustConfig, RobustFit};
pub use seven_point::seven_point;
