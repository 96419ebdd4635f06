//! Lifting a 2D annotation into a partial 3D labeling.
//!
//! For every annotated pixel the ray's forward and backward depth voxels are
//! marked. The span between them is marked as well when the intensity dip
//! along it, `mip - min(span)`, is at most `tau`. Unmarked voxels are
//! unlabeled, not background.

use crate::error::{Error, Result};
use crate::projection::{Annotation2D, Rays};
use crate::voxcore::{Axis, Grid, Mask3D, Volume};

/// Fill threshold used when none is given, on [0, 1]-windowed intensities.
pub const DEFAULT_TAU: f32 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    pub axis: Axis,
    /// `true` = known foreground.
    pub mask: Mask3D,
}

impl DepthMap {
    pub fn count(&self) -> usize {
        self.mask.count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

/// Builds the depth map of annotation `a` over intensity volume `v`.
pub fn reconstruct(a: &Annotation2D, v: &Volume, tau: f32) -> Result<DepthMap> {
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("tau must be non-negative, got {tau}")));
    }
    a.check_dims(v.dims())?;
    let rays = Rays::new(v.dims(), a.axis);
    let src = v.data();
    let mut mask = Grid::filled(v.dims(), false);
    let out = mask.data_mut();
    for r in 0..rays.count() {
        let (u, w) = rays.pixel(r);
        if !a.mask.get(u, w) {
            continue;
        }
        let at = |k| src[rays.index(u, w, k)];
        let mut peak = at(0);
        let (mut first, mut last) = (0, 0);
        for k in 1..rays.len {
            let x = at(k);
            if x > peak {
                peak = x;
                first = k;
                last = k;
            } else if x == peak {
                last = k;
            }
        }
        let floor = (first..=last).map(at).fold(f32::INFINITY, f32::min);
        let fluctuation = peak as f64 - floor as f64;
        if fluctuation <= tau as f64 {
            for k in first..=last {
                out[rays.index(u, w, k)] = true;
            }
        } else {
            out[rays.index(u, w, first)] = true;
            out[rays.index(u, w, last)] = true;
        }
    }
    Ok(DepthMap { axis: a.axis, mask })
}
