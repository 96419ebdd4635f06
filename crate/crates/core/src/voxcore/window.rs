use super::grid::Volume;
use crate::error::{Error, Result};

/// Linear intensity window: `clamp((v - lo) / (hi - lo), 0, 1)`.
pub fn window_clip(v: &Volume, lo: f32, hi: f32) -> Result<Volume> {
    if !(lo < hi) {
        return Err(Error::InvalidWindow { lo, hi });
    }
    let (lo, width) = (lo as f64, hi as f64 - lo as f64);
    Ok(v.map(|&x| ((x as f64 - lo) / width).clamp(0.0, 1.0) as f32))
}
