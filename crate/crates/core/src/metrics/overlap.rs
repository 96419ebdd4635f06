use crate::error::{Error, Result};
use crate::voxcore::Mask3D;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overlap {
    pub dice: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Dice, precision and recall. Two empty masks score 1 on all three; a
/// ratio whose denominator vanishes otherwise scores 0.
pub fn overlap_metrics(pred: &Mask3D, gt: &Mask3D) -> Result<Overlap> {
    pred.check_same_dims(gt, "prediction vs ground truth")?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    if tp + fp + fn_ == 0 {
        return Ok(Overlap { dice: 1.0, precision: 1.0, recall: 1.0, tp, fp, fn_ });
    }
    Ok(Overlap {
        dice: ratio(2 * tp, 2 * tp + fp + fn_),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        tp,
        fp,
        fn_,
    })
}

/// Fraction of centerline voxels covered by the prediction.
pub fn skeleton_recall(pred: &Mask3D, centerline: &[[usize; 3]]) -> Result<f64> {
    if centerline.is_empty() {
        return Err(Error::UndefinedMetric("skeleton recall of an empty centerline"));
    }
    let dims = pred.dims();
    let mut hit = 0;
    for &c in centerline {
        if !dims.contains(c) {
            return Err(Error::DimsMismatch(format!("centerline voxel {c:?} outside {:?}", dims.as_array())));
        }
        hit += pred.get(c) as usize;
    }
    Ok(hit as f64 / centerline.len() as f64)
}
