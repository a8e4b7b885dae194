//! Compressed-sensing channel estimation for hybrid-beamforming mmWave MIMO.
//!
//! The channel is sparse on a `grid_n × grid_n` grid of angle pairs. Three
//! greedy estimators recover it from pilot measurements: 1-D OMP over the
//! explicit Kronecker sensing matrix, a two-stage SOMP that finds arrival
//! angles first, and 2-D OMP that works directly with the two factor
//! dictionaries. Two dense least-squares baselines sit alongside them, and
//! [`harness`] runs Monte-Carlo comparisons of all five.

pub mod channel;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
