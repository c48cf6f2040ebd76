//! Finite-element kernels and linear algebra.

mod assembly;
mod banded;
mod dofs;
mod eigen;
mod gradient;
pub mod hex;
mod rigid;
mod solver;
mod sparse;
mod tensor;

pub use assembly::{assemble_elasticity, assemble_mass, assemble_uniform, lumped_weights, vector_block, vector_pattern};
pub use banded::BandedCholesky;
pub use dofs::{DofMap, FieldVector};
pub use eigen::{dominant_generalized, min_generalized_eigenpair, EigenOptions, EigenResult, Pencil};
pub use gradient::{gradient_decomposition, kappa_weight, GradientDecomposition};
pub use rigid::{mass_orthonormal_basis, project_out, RigidDisplacement};
pub use solver::{solve_spd, solve_spd_with, CgOptions, CgStats, Gauge};
pub use sparse::{axpy, dot, norm, CsrMatrix};
pub use tensor::{ddot, from_mandel, mandel_basis, to_mandel, ElasticityTensor4, Mat3};
