//! Block conjugate gradients for symmetric positive definite systems with several
//! right-hand sides, plus a-posteriori bounds that explain superlinear convergence.

pub mod linalg;
pub mod krylov;
pub mod bounds;
pub mod experiments;
