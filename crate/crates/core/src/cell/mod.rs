//! Periodic cell problems and homogenized coefficients.

mod corrector;
mod effective;
mod helmholtz;
mod problems;

pub(crate) use corrector::coefficient;
pub use corrector::reconstruct_corrector;
pub use effective::{effective_tensors, major_asymmetry, max_abs, voigt3, voigt_bound, EffectiveModel, Tensor2d};
pub use helmholtz::{helmholtz_check, helmholtz_decompose, l2_inner, HelmholtzCheck, HelmholtzSplit};
pub use problems::{
    periodic_dofs, solve_cell_bending, solve_cell_problems, solve_cell_standard, strain_field, translation_gauge,
    BasisMatrix, CellField, CellLoad, CellProblem, CellSolutionSet, IN_PLANE,
};
