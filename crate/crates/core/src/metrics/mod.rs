//! Segmentation metrics and hole-filling postprocessing.
//!
//! Boundaries and flood fills both use 6-connectivity; distances are in
//! voxel units.

mod fill;
mod overlap;
mod surface;

use serde::{Deserialize, Serialize};

pub use fill::fill_holes;
pub use overlap::{overlap_metrics, skeleton_recall, Overlap};
pub use surface::{boundary, msd, squared_distance_to};

use crate::error::Result;
use crate::voxcore::Mask3D;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dice: f64,
    pub precision: f64,
    pub recall: f64,
    pub skeleton_recall: f64,
    /// `None` when either mask is empty.
    pub msd: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// All metrics of `pred` against `gt` and its centerline.
pub fn evaluate(pred: &Mask3D, gt: &Mask3D, centerline: &[[usize; 3]]) -> Result<MetricsReport> {
    let o = overlap_metrics(pred, gt)?;
    let skeleton_recall = skeleton_recall(pred, centerline)?;
    let msd = if o.tp + o.fp > 0 && o.tp + o.fn_ > 0 {
        Some(msd(pred, gt)?)
    } else {
        None
    };
    Ok(MetricsReport {
        dice: o.dice,
        precision: o.precision,
        recall: o.recall,
        skeleton_recall,
        msd,
        tp: o.tp,
        fp: o.fp,
        fn_: o.fn_,
    })
}
