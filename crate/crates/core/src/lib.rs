//! Weakly supervised 3D vessel segmentation from single annotated 2D
//! maximum-intensity projections, with depth supervision.
//!
//! The crate is organised bottom-up:
//!
//! - [`voxcore`]: dense 3D grids, axis-aligned orientation transforms,
//!   intensity windowing and the `.vol`/`.json` file format.
//! - [`phantom`]: seeded synthetic vessel trees with exact ground truth.
//! - [`projection`]: maximum-intensity projections, forward/backward depth
//!   and annotations derived from 3D masks.
//! - [`depthmap`]: lifting a 2D annotation back into a partial 3D labeling.
//! - [`supervision`]: the projected + depth-masked cross-entropy objective
//!   with analytic gradients.
//! - [`optimfit`]: Adam optimisation of a smoothed voxel logit field.
//! - [`metrics`]: Dice, precision, recall, skeleton recall, mean surface
//!   distance and hole filling.
//! - [`harness`]: viewpoint-condition experiments and reports.

pub mod depthmap;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod optimfit;
pub mod phantom;
pub mod projection;
pub mod supervision;
pub mod voxcore;

pub use error::{Error, Result};
pub use voxcore::{Axis, Dims, Grid, Mask3D, OrientationTransform, Volume};
