//! Sampling-based verification of forms, metrics and curvature on
//! parametrized submanifolds.

pub mod ambient;
pub mod curvature;
pub mod engines;
pub mod forms;
pub mod patch;
pub mod stokes;
