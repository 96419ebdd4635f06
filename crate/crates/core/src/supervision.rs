//! Training objective for weak supervision from projections.
//!
//! `total = alpha * term_2d + (1 - alpha) * term_depth`, where
//!
//! - `term_2d` is, per annotated view, the pixel mean of the binary
//!   cross-entropy between the projected prediction and the annotation,
//!   averaged over views;
//! - `term_depth` is the mean of `-log y` over depth-map positives (zero when
//!   there are none).
//!
//! The projection is a hard maximum, so the 2D gradient of every ray lands
//! on its first maximiser only. Voxels that are never maximisers and lie
//! outside the depth map receive no gradient at all.

use crate::depthmap::DepthMap;
use crate::error::{Error, Result};
use crate::projection::{soft_mip, Annotation2D, Rays};
use crate::voxcore::{Axis, Dims, Grid, Mask3D};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_CLAMP_EPS: f64 = 1e-7;

/// Clamped binary cross-entropy
/// `-[t log max(p, eps) + (1 - t) log max(1 - p, eps)]`.
#[inline]
pub fn bce(p: f64, t: bool, eps: f64) -> f64 {
    if t {
        -p.max(eps).ln()
    } else {
        -(1.0 - p).max(eps).ln()
    }
}

/// d bce / dp. The clamp only guards the denominator.
#[inline]
pub fn bce_grad(p: f64, t: bool, eps: f64) -> f64 {
    if t {
        -1.0 / p.max(eps)
    } else {
        1.0 / (1.0 - p).max(eps)
    }
}

#[derive(Clone, Debug)]
pub struct SupervisionBundle {
    annotations: Vec<Annotation2D>,
    depth_map: Option<DepthMap>,
    alpha: f64,
    clamp_eps: f64,
}

impl SupervisionBundle {
    /// Annotations are kept sorted by axis so that the loss does not depend
    /// on the order they were given in.
    pub fn new(
        mut annotations: Vec<Annotation2D>,
        depth_map: Option<DepthMap>,
        alpha: f64,
        clamp_eps: f64,
    ) -> Result<Self> {
        if annotations.is_empty() || annotations.len() > 3 {
            return Err(Error::Config(format!(
                "expected 1 to 3 annotated views, got {}",
                annotations.len()
            )));
        }
        annotations.sort_by_key(|a| a.axis);
        if annotations.windows(2).any(|w| w[0].axis == w[1].axis) {
            return Err(Error::Config("annotated views must use distinct axes".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if !(clamp_eps > 0.0) {
            return Err(Error::Config(format!("clamp_eps must be positive, got {clamp_eps}")));
        }
        Ok(Self {
            annotations,
            depth_map,
            alpha,
            clamp_eps,
        })
    }

    pub fn annotations(&self) -> &[Annotation2D] {
        &self.annotations
    }

    pub fn depth_map(&self) -> Option<&DepthMap> {
        self.depth_map.as_ref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn clamp_eps(&self) -> f64 {
        self.clamp_eps
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.annotations.iter().map(|a| a.axis).collect()
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        for a in &self.annotations {
            a.check_dims(dims)?;
        }
        if let Some(d) = &self.depth_map {
            if d.mask.dims() != dims {
                return Err(Error::DimsMismatch(format!(
                    "depth map {:?} vs prediction {:?}",
                    d.mask.dims().as_array(),
                    dims.as_array()
                )));
            }
        }
        Ok(())
    }
}

/// Loss breakdown and its gradient with respect to the prediction.
#[derive(Clone, Debug)]
pub struct LossValue {
    pub total: f64,
    pub term_2d: f64,
    pub term_depth: f64,
    pub gradient: Grid<f64>,
}

/// Per-view projected cross-entropy; adds `scale * d/dy` into `grad`.
fn projected_term(y: &Grid<f64>, a: &Annotation2D, eps: f64, scale: f64, grad: &mut [f64]) -> f64 {
    let rays = Rays::new(y.dims(), a.axis);
    let (peak, argmax) = soft_mip(y, a.axis);
    let n = rays.count() as f64;
    let mut sum = 0.0;
    for r in 0..rays.count() {
        let (u, v) = rays.pixel(r);
        let (m, t) = (peak.get(u, v), a.mask.get(u, v));
        sum += bce(m, t, eps);
        grad[rays.index(u, v, argmax.get(u, v))] += scale * bce_grad(m, t, eps) / n;
    }
    sum / n
}

/// Evaluates the weak-supervision objective at prediction `y`.
pub fn loss(y: &Grid<f64>, s: &SupervisionBundle) -> Result<LossValue> {
    s.check_dims(y.dims())?;
    let eps = s.clamp_eps;
    let mut gradient = Grid::filled(y.dims(), 0.0);
    let views = s.annotations.len() as f64;

    let mut term_2d = 0.0;
    for a in &s.annotations {
        term_2d += projected_term(y, a, eps, s.alpha / views, gradient.data_mut());
    }
    term_2d /= views;

    let mut term_depth = 0.0;
    if let Some(d) = s.depth_map.as_ref().filter(|d| !d.is_empty()) {
        let positives = d.count() as f64;
        let scale = (1.0 - s.alpha) / positives;
        let g = gradient.data_mut();
        for (i, (&p, _)) in y.data().iter().zip(d.mask.data()).enumerate().filter(|(_, (_, &m))| m) {
            term_depth += bce(p, true, eps);
            g[i] += scale * bce_grad(p, true, eps);
        }
        term_depth /= positives;
    }

    Ok(LossValue {
        total: s.alpha * term_2d + (1.0 - s.alpha) * term_depth,
        term_2d,
        term_depth,
        gradient,
    })
}

/// Voxelwise mean cross-entropy against a full 3D target.
pub fn loss_full3d(y: &Grid<f64>, gt: &Mask3D, eps: f64) -> Result<LossValue> {
    y.check_same_dims(gt, "prediction vs ground truth")?;
    let n = y.len() as f64;
    let mut total = 0.0;
    let grad: Vec<f64> = y
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &t)| {
            total += bce(p, t, eps);
            bce_grad(p, t, eps) / n
        })
        .collect();
    total /= n;
    Ok(LossValue {
        total,
        term_2d: 0.0,
        term_depth: 0.0,
        gradient: Grid::from_vec(y.dims(), grad)?,
    })
}
