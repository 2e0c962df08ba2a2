//! Rotationally symmetric spectral geometry: `λ₁(-Δ + kR)` on warped spheres,
//! PSC collars over metric paths, Schwarzschild phase-plane gluing, corner
//! smoothing, Ricci-flow eigenvalue monitoring and Bartnik-mass sequences.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bartnik;
pub mod cli;
pub mod collar;
pub mod config;
pub mod error;
pub mod flow;
pub mod geomcore;
pub mod grid;
pub mod io;
pub mod paths;
pub mod profiles;
pub mod schwarzschild;
pub mod smoothing;
pub mod spectral;
pub mod stencil;
pub mod suite;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use smoothing::Check;
