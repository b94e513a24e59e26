//! Spatially explicit ecological-economic model of natural pest control.
//!
//! A farm is represented by a toroidal raster of 10 m cells whose land cover
//! (cropland, hedgerow, permanent grassland) is generated from farm-size
//! scaling laws. Natural-enemy (NE) abundance follows a seasonal logistic
//! model with kernel-summed carrying capacity, pesticide mortality and winter
//! survival; the equilibrated NE field feeds a farm-level yield, profit and
//! income account. On top of this sit a quasi-Monte-Carlo calibration
//! pipeline and the scenario experiments (pesticide sweep, policy grid,
//! farm-size × hedgerow phase diagram, sensitivity runs).
//!
//! Everything is deterministic given a master seed: random streams are
//! counter-based ([`rng::StreamRng`]) and every parallel map collects results
//! by index, so outputs do not depend on the number of worker threads.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod ecology;
pub mod economics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod landscape;
pub mod model;
pub mod rng;
pub mod scenarios;
pub mod table;

pub use error::{Error, Result};
pub use exec::ExecMode;
