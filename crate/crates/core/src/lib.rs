//! Two-scale toolkit for thin elastic layers with periodic perforations.
//!
//! The crate covers the whole chain from a voxelized reference cell to the
//! homogenized plate model and back:
//!
//! * [`geometry`]: reference cell, tiled layer and plate meshes.
//! * [`fem`]: trilinear hexahedra, sparse assembly, CG and eigen solvers.
//! * [`cell`]: periodic cell problems, effective tensors, Helmholtz split.
//! * [`plate`]: homogenized membrane/bending model with Newmark stepping.
//! * [`micro`]: reference solver on the layer and two-scale diagnostics.
//! * [`inequalities`]: numerical best constants for Korn, trace and
//!   extension estimates.

pub mod cell;
pub mod error;
pub mod expr;
pub mod fem;
pub mod geometry;
pub mod inequalities;
pub mod micro;
pub mod plate;

pub use error::{Error, Result};
