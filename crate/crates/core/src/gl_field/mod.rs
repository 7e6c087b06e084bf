//! Ginzburg–Landau energy `E_ε` on planar complex fields, its `L²` gradient
//! flow, vortex detection and the logarithmic energy expansion.

mod complex;
mod constants;
mod energy;
mod flow;
mod relax;
mod vortices;

pub use complex::ComplexGridField;
pub use constants::{gauss_legendre, modica_mortola_c0, modica_mortola_c0_with};
pub use energy::{dirichlet_energy_in, double_well, energy_density, energy_eps};
pub use flow::{cfl_bound, flow_step, FlowRecord, FlowState, GlFlow, ENERGY_ROUNDOFF};
pub use relax::{log_expansion_fit, relax, LogExpansionFit, LogSample, RelaxOptions, RelaxOutcome};
pub use vortices::{
    boundary_degree, defect_outliers, detect_vortices, jacobian_field, rectangle_loop, winding_along, JacobianField,
    CORE_MODULUS,
};
