//! Homogenized plate: quasi-static membrane equation coupled to a
//! time-dependent bending equation with effective coefficients.

pub mod element;
mod loads;
mod newmark;
mod run;
mod system;

pub use loads::{compute_loads, AveragedLoad, CellAverager, LoadModel};
pub use newmark::{static_solve, NewmarkParams, PlateState, PlateStepper};
pub use run::{run_plate, step_count, MacroField, PlateRecord, PlateSnapshot, PlateTrajectory};
pub use system::{assemble_plate_system, element_matrices, PlateLayout, PlatePoint, PlateSystem, DOFS_PER_NODE, ELEM_DOFS};
