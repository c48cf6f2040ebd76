//! Numerical estimates of the ε-uniform constants: Korn on the perforated
//! layer, the lateral trace bound, and the norm of the extension into the
//! holes.

mod extension;
mod korn;
mod sweep;
mod trace;

pub use extension::{extend_field, extension_norm, sym_grad_energy, ExtensionNorm, VoidExtension};
pub use korn::{clamped_solid_dofs, korn_constant, korn_operators, ConstantEstimate};
pub use sweep::{ConstantSweep, Inequality, SweepRow};
pub use trace::{trace_constant, trace_dofs, trace_operators};
