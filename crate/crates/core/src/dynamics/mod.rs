//! Pseudospectral complex Ginzburg–Landau dynamics on the 1-D torus: the
//! unit-time shift `S` and its noise derivative `D_η S`.

mod linearized;
mod params;
mod phi;
mod solver;
mod state;

pub use linearized::{LinearizationConfig, LinearizedOperator};
pub use params::CglParams;
pub use phi::{phi123, EtdCoefficients};
pub use solver::{CglSolver, Trajectory};
pub use state::{dist_h, norm_h, SpectralState, SpectralTransform};
