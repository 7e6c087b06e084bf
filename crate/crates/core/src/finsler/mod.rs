//! Double-phase Finsler fibers: the Lagrangian `Φ_x`, its Legendre map, and
//! the dual Hamiltonian obtained by inverting the Legendre map.

mod anisotropy;
mod diagnostics;
mod oracle;
mod structure;

pub use anisotropy::{rotated_metric_2d, rotated_metric_3d, AnisotropyField, ScalarProfile};
pub use diagnostics::{
    check_structure, closed_form_dual_fit, least_squares, loglog_slope, ClosedFormFit, StructureReport,
};
pub use oracle::{hamiltonian_oracle, oracle_spacing};
pub use structure::{LegendrePair, WntStructure};
