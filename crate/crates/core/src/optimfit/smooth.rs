use rayon::prelude::*;

use crate::voxcore::Grid;

/// Normalised Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut w: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Half-sample symmetric reflection (`.. b a | a b c .. | c b ..`) of an
/// out-of-range position onto `0..n`. The resulting convolution matrix is
/// symmetric.
#[inline]
pub fn reflect_index(m: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = m.rem_euclid(period) as usize;
    if r >= n {
        2 * n - 1 - r
    } else {
        r
    }
}

/// For every output position of a line of length `n`, the source positions
/// of each tap.
fn tap_table(n: usize, radius: usize) -> Vec<usize> {
    let taps = 2 * radius + 1;
    let mut table = Vec::with_capacity(n * taps);
    for i in 0..n {
        for k in 0..taps {
            table.push(reflect_index(i as isize + k as isize - radius as isize, n));
        }
    }
    table
}

/// Separable truncated Gaussian blur with reflective boundaries.
/// `sigma == 0` returns the input unchanged.
pub fn smooth(v: &Grid<f64>, sigma: f64) -> Grid<f64> {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    if sigma == 0.0 {
        return v.clone();
    }
    let w = gaussian_kernel(sigma);
    let radius = w.len() / 2;
    let [nx, ny, nz] = v.dims().as_array();
    let plane = nx * ny;

    let mut a = v.data().to_vec();
    let mut b = vec![0.0; a.len()];

    // x: within each row
    let tx = tap_table(nx, radius);
    b.par_chunks_mut(nx).zip(a.par_chunks(nx)).for_each(|(out, row)| {
        for (i, o) in out.iter_mut().enumerate() {
            let src = &tx[i * w.len()..(i + 1) * w.len()];
            *o = src.iter().zip(&w).map(|(&j, &wk)| wk * row[j]).sum();
        }
    });

    // y: rows of a slice combine as whole rows
    let ty = tap_table(ny, radius);
    a.par_chunks_mut(plane).zip(b.par_chunks(plane)).for_each(|(out, slice)| {
        for y in 0..ny {
            let dst = &mut out[y * nx..(y + 1) * nx];
            dst.fill(0.0);
            for (&j, &wk) in ty[y * w.len()..(y + 1) * w.len()].iter().zip(&w) {
                let src = &slice[j * nx..(j + 1) * nx];
                dst.iter_mut().zip(src).for_each(|(d, s)| *d += wk * s);
            }
        }
    });

    // z: slices combine as whole slices
    let tz = tap_table(nz, radius);
    let src = &a;
    b.par_chunks_mut(plane).enumerate().for_each(|(z, dst)| {
        dst.fill(0.0);
        for (&j, &wk) in tz[z * w.len()..(z + 1) * w.len()].iter().zip(&w) {
            let s = &src[j * plane..(j + 1) * plane];
            dst.iter_mut().zip(s).for_each(|(d, x)| *d += wk * x);
        }
    });

    Grid::from_vec(v.dims(), b).expect("length preserved")
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::voxcore::Dims;

    #[test]
    fn kernel_shape() {
        let w = gaussian_kernel(1.0);
        assert_eq!(w.len(), 7);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((w[3] / w[4] - 0.5f64.exp()).abs() < 1e-12);
        assert_eq!(gaussian_kernel(0.5).len(), 5);
    }

    #[test]
    fn reflection() {
        let n = 4;
        let got: Vec<usize> = (-5..9).map(|m| reflect_index(m, n)).collect();
        assert_eq!(got, vec![3, 3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0, 0]);
        assert_eq!(reflect_index(-1, 1), 0);
        assert_eq!(reflect_index(5, 1), 0);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let d = Dims::new(3, 4, 5).unwrap();
        let v = Grid::from_fn(d, |p| (p[0] * 7 + p[1] * 3 + p[2]) as f64);
        assert_eq!(smooth(&v, 0.0), v);
    }

    #[test]
    fn constants_are_preserved() {
        let d = Dims::new(5, 2, 7).unwrap();
        let v = Grid::filled(d, 0.37);
        for sigma in [0.4, 1.0, 2.5] {
            assert!(smooth(&v, sigma).data().iter().all(|&x| (x - 0.37).abs() < 1e-14));
        }
    }

    #[test]
    fn self_adjoint_on_tiny_grids() {
        // radius larger than the grid exercises repeated reflections
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = Dims::new(2, 3, 1).unwrap();
        let u = Grid::from_fn(d, |_| rng.random::<f64>());
        let v = Grid::from_fn(d, |_| rng.random::<f64>());
        let dot = |a: &Grid<f64>, b: &Grid<f64>| a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum::<f64>();
        let lhs = dot(&smooth(&u, 2.0), &v);
        let rhs = dot(&u, &smooth(&v, 2.0));
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
