//! Quasilinear Dirichlet problems `−div ∂_ξH(x, Du) = f` on box grids, their
//! linearizations and Green kernels.

mod asymptotics;
mod energy;
mod operator;
mod solver;
mod stability;
pub(crate) mod stencil;

pub use asymptotics::{check_coulomb, check_log_defect, reciprocity, CoulombCheck, LogDefectCheck};
pub use energy::{central_gradient, energy};
pub(crate) use energy::{cell_hamiltonian, cell_weights};
pub use operator::{green_kernel, linearize, LinearizedOperator};
pub use solver::{dirichlet_residual, solve_dirichlet, DirichletOptions, DirichletSolution};
pub use stability::{check_stability, DirichletData, StabilityEntry, StabilityReport};
