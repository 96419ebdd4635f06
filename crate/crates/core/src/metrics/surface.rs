use crate::error::{Error, Result};
use crate::voxcore::{Grid, Mask3D};

/// Foreground voxels with at least one 6-neighbour in the background; the
/// outside of the volume counts as background.
pub fn boundary(m: &Mask3D) -> Mask3D {
    let dims = m.dims();
    let [nx, ny, nz] = dims.as_array();
    let d = m.data();
    Grid::from_fn(dims, |[x, y, z]| {
        let i = dims.index([x, y, z]);
        if !d[i] {
            return false;
        }
        x == 0
            || y == 0
            || z == 0
            || x + 1 == nx
            || y + 1 == ny
            || z + 1 == nz
            || !d[i - 1]
            || !d[i + 1]
            || !d[i - nx]
            || !d[i + nx]
            || !d[i - nx * ny]
            || !d[i + nx * ny]
    })
}

/// 1D lower envelope of parabolas (Felzenszwalb & Huttenlocher).
fn edt_line(f: &[f64], out: &mut [f64], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    let n = f.len();
    v.clear();
    z.clear();
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                    if s <= *z.last().expect("paired with v") {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        return;
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while k + 1 < v.len() && z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance from every voxel to the nearest
/// voxel of `features`; infinite everywhere when `features` is empty.
pub fn squared_distance_to(features: &Mask3D) -> Grid<f64> {
    let dims = features.dims();
    let mut g: Vec<f64> = features.data().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let ext = dims.as_array();
    let strides = [1, ext[0], ext[0] * ext[1]];
    let (mut v, mut z) = (Vec::new(), Vec::new());
    for axis in 0..3 {
        let n = ext[axis];
        let (mut line, mut out) = (vec![0.0; n], vec![0.0; n]);
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        for b in 0..ext[others[1]] {
            for a in 0..ext[others[0]] {
                let base = a * strides[others[0]] + b * strides[others[1]];
                for k in 0..n {
                    line[k] = g[base + k * strides[axis]];
                }
                edt_line(&line, &mut out, &mut v, &mut z);
                for k in 0..n {
                    g[base + k * strides[axis]] = out[k];
                }
            }
        }
    }
    Grid::from_vec(dims, g).expect("same length")
}

fn directed_mean(from: &Mask3D, to_sq: &Grid<f64>) -> f64 {
    let (sum, count) = from
        .data()
        .iter()
        .zip(to_sq.data())
        .filter(|(&b, _)| b)
        .fold((0.0, 0usize), |(s, c), (_, &d2)| (s + d2.sqrt(), c + 1));
    sum / count as f64
}

/// Symmetric mean surface distance between the 6-connected boundaries.
pub fn msd(pred: &Mask3D, gt: &Mask3D) -> Result<f64> {
    pred.check_same_dims(gt, "prediction vs ground truth")?;
    if pred.count() == 0 || gt.count() == 0 {
        return Err(Error::UndefinedMetric("surface distance with an empty mask"));
    }
    let (bp, bg) = (boundary(pred), boundary(gt));
    let to_g = squared_distance_to(&bg);
    let to_p = squared_distance_to(&bp);
    Ok(0.5 * (directed_mean(&bp, &to_g) + directed_mean(&bg, &to_p)))
}
