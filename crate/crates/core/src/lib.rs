//! Decentralized multi-sensor multi-person tracking with orientation-binned
//! appearance galleries.

pub mod assignment;
pub mod cross_sensor;
pub mod error;
pub mod gallery;
pub mod metrics;
pub mod motion;
pub mod orientation;
pub mod rng;
pub mod netsim;
pub mod scenario;
pub mod types;
mod wire;
pub mod within_sensor;

pub use error::{Error, Result};
pub use gallery::{gallery_distance, BinSlot, BinnedGallery};
pub use orientation::{bin_index, fit_bins, s2t_ratio, BinBoundaries, S2TRatio};
pub use types::*;
