//! Polygonal vortex filaments in 3D: anisotropic length and curvature, the
//! regularized Biot–Savart field, the renormalized energy `𝒢₀` and its
//! curvature-driven motion law.

mod geometry;
mod interaction;
mod motion;

pub use geometry::{curvature, f_length, signed_curvature, Filament, FilamentSystem, VertexCurvature};
pub use interaction::{
    biot_savart, chord_distance, g0_terms, regularized_kernel_gradient, renormalized_g0, rho_cut, vertex_field,
    G0Terms,
};
pub use motion::{
    amplification, dissipation_check, effective_vertices, motion_cfl_bound, motion_step, normal_velocities,
    CollapseEvent, DissipationRecord, DissipationReport, FilamentFlow, FilamentRunOptions, SummaryRecord,
    VelocityField, MIN_EFFECTIVE_VERTICES,
};
