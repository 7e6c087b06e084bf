//! Point vortices: renormalized interaction energy from a Green kernel and the
//! gradient-flow dynamics of the centers.

mod config;
mod dynamics;
mod green;

pub use config::VortexConfig;
pub use dynamics::{
    force, renormalized_energy, run_trajectory, step_vortices, HaltEvent, Trajectory, VortexRecord, CLEARANCE_SPACINGS,
};
pub use green::GreenTable;
