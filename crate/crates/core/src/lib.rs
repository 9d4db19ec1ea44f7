//! Multi-UAV distributed sensing over a ground grid.
//!
//! A set of UAVs hovering over a square area illuminate grid cells with OFDM
//! frames and listen to each other's echoes in half-duplex mode. Each receiver
//! reduces its echoes to per-cell sufficient statistics; a fusion center turns
//! those into RCS maps (MIMORE, MuRE) or fuses local position estimates
//! (MuPE), and a localizer snaps or refines the target position.
//!
//! The pipeline is split bottom-up:
//!
//! * [`geometry`]: grids, UAV lattice, steering vectors, bistatic paths.
//! * [`channel`]: point, per-cell and whole-area reflection matrices.
//! * [`beamforming`]: max-gain transmit and diagonally loaded MVDR receive weights.
//! * [`signal`]: OFDM frames, received symbol synthesis, data removal.
//! * [`protocol`]: illumination schedule and sensing campaign.
//! * [`estimation`]: sufficient statistics, ML RCS estimates, fusion.
//! * [`localization`]: on-grid and threshold-weighted off-grid position.
//! * [`overhead`]: uplink bit accounting per fusion scheme.
//! * [`experiments`]: Monte Carlo trials, sweeps and exports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod cache;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod localization;
pub mod map_io;
pub mod overhead;
pub mod protocol;
pub mod rng;
pub mod signal;
pub mod validation;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Cartesian position in meters; the ground plane is `z = 0`.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Dense complex column vector (steering vectors, beamformers).
pub type CVector = nalgebra::DVector<Complex64>;
/// Dense complex matrix (reflection matrices).
pub type CMatrix = nalgebra::DMatrix<Complex64>;
