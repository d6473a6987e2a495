//! Conifold transitions of knot conormal bundles: construction of the
//! transition CT(N*_{k,ε}) ⊂ Ĉ and sampled verification of its geometry.
#![no_std]
extern crate alloc;

pub mod error;
pub mod fd;
pub mod conifold;
pub mod conormal;
pub mod distance;
pub mod geom;
pub mod knots;
pub mod sample;
pub mod tol;
pub mod verify;

pub use error::{GeomError, Result};
