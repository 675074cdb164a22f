//! Two-trajectory coupling driven towards coalescence by perturbing the noise
//! of the second copy.

mod homological;
mod policy;
mod run;
mod step;

pub use homological::{solve_homological, HomologicalSolution};
pub use policy::CouplingPolicy;
pub use run::{run_coupling, CouplingRun};
pub use step::{couple_step, couple_step_with, s_delta, Branch, CouplingRecord, StepOptions, StepOutcome};
