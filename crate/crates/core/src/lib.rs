//! Indoor positioning from color-coded LED landmarks seen by a phone camera.
//!
//! The crate covers the whole chain: camera and attitude models with a
//! synthetic forward projection, closed-form local positioning with azimuth
//! and tilt compensation, camera calibration, landmark code design, synthetic
//! frame rendering and blob-based code extraction, landmark lookup for global
//! positioning, and a seeded experiment harness.

// `!(x > 0.0)` is how validation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod camera_model;
pub mod codebook;
pub mod detection;
pub mod error;
pub mod global_positioning;
pub mod harness;
pub mod localization;

pub use error::{Error, Result};
