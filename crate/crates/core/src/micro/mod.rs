//! Reference solver on the thin layer and two-scale diagnostics.

mod errors;
mod moments;
mod operators;
mod presets;
mod stepper;

pub use errors::{apriori_check, two_scale_distances, two_scale_errors, AprioriTable, TwoScaleReport, TwoScaleRow};
pub use moments::{plate_moments, MomentField, MomentMode};
pub use operators::{assemble_micro, micro_dofs, micro_rhs, MicroOperators};
pub use presets::{preset_loads, PRESETS, PULSE, RAMP};
pub use stepper::{micro_step, run_micro, sample_nodal, MicroRecord, MicroState, MicroStepper, MicroTrajectory};
