//! Numerical core for winding-number defects in double-phase anisotropic media.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod elliptic;
pub mod error;
pub mod filament3d;
pub mod finsler;
pub mod gl_field;
pub mod grid;
pub mod linalg;
pub mod optim;
pub mod thermal;
pub mod vortex2d;

pub use error::{Result, WntError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
