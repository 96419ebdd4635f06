//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vesselmip_core::{Axis, Dims, Grid, Mask3D, Volume};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn plane(axis: Axis) -> (usize, usize) {
    match axis {
        Axis::X => (1, 2),
        Axis::Y => (0, 2),
        Axis::Z => (0, 1),
    }
}

/// Coordinates of sample `k` on the ray through pixel (u, v).
pub fn ray_point(axis: Axis, u: usize, v: usize, k: usize) -> [usize; 3] {
    let (pu, pv) = plane(axis);
    let mut p = [0; 3];
    p[axis.index()] = k;
    p[pu] = u;
    p[pv] = v;
    p
}

pub struct NaiveMip<T> {
    pub nu: usize,
    pub nv: usize,
    pub value: Vec<T>,
    pub first: Vec<usize>,
    pub last: Vec<usize>,
}

/// Triple loop over (v, u, k); images stored u-fastest.
pub fn naive_mip<T: Copy + PartialOrd>(g: &Grid<T>, axis: Axis) -> NaiveMip<T> {
    let ext = g.dims().as_array();
    let (pu, pv) = plane(axis);
    let (nu, nv, n) = (ext[pu], ext[pv], ext[axis.index()]);
    let mut out = NaiveMip { nu, nv, value: vec![], first: vec![], last: vec![] };
    for v in 0..nv {
        for u in 0..nu {
            let mut best = g.get(ray_point(axis, u, v, 0));
            for k in 1..n {
                let x = g.get(ray_point(axis, u, v, k));
                if x > best {
                    best = x;
                }
            }
            let hits: Vec<usize> = (0..n).filter(|&k| g.get(ray_point(axis, u, v, k)) == best).collect();
            out.value.push(best);
            out.first.push(hits[0]);
            out.last.push(*hits.last().unwrap());
        }
    }
    out
}

pub fn naive_annotation(m: &Mask3D, axis: Axis) -> Vec<bool> {
    let ext = m.dims().as_array();
    let (pu, pv) = plane(axis);
    let mut out = vec![];
    for v in 0..ext[pv] {
        for u in 0..ext[pu] {
            out.push((0..ext[axis.index()]).any(|k| m.get(ray_point(axis, u, v, k))));
        }
    }
    out
}

/// Volume with values on a coarse lattice so rays contain ties.
pub fn quantized_volume(rng: &mut ChaCha8Rng, dims: Dims, levels: u32) -> Volume {
    Grid::from_fn(dims, |_| rng.random_range(0..levels) as f32 / (levels - 1) as f32)
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: [usize; 3]) -> Dims {
    Dims::new(rng.random_range(1..=max[0]), rng.random_range(1..=max[1]), rng.random_range(1..=max[2])).unwrap()
}

pub fn random_mask(rng: &mut ChaCha8Rng, dims: Dims, p: f64) -> Mask3D {
    Grid::from_fn(dims, |_| rng.random_bool(p))
}

/// Blob built from a few random balls.
pub fn random_blobs(rng: &mut ChaCha8Rng, dims: Dims, count: usize) -> Mask3D {
    let ext = dims.as_array().map(|e| e as f64);
    let balls: Vec<([f64; 3], f64)> = (0..count)
        .map(|_| {
            let c = [0, 1, 2].map(|i| rng.random_range(0.0..ext[i]));
            (c, rng.random_range(1.0..3.0))
        })
        .collect();
    Grid::from_fn(dims, |p| {
        balls.iter().any(|(c, r)| (0..3).map(|i| (p[i] as f64 - c[i]).powi(2)).sum::<f64>() <= r * r)
    })
}

pub fn set_of(m: &Mask3D) -> HashSet<[usize; 3]> {
    m.foreground().into_iter().collect()
}

pub fn naive_boundary(m: &Mask3D) -> Vec<[usize; 3]> {
    let ext = m.dims().as_array();
    let mut out = vec![];
    for p in m.foreground() {
        let mut edge = false;
        for axis in 0..3 {
            for step in [-1i64, 1] {
                let q = p[axis] as i64 + step;
                if q < 0 || q >= ext[axis] as i64 {
                    edge = true;
                } else {
                    let mut n = p;
                    n[axis] = q as usize;
                    edge |= !m.get(n);
                }
            }
        }
        if edge {
            out.push(p);
        }
    }
    out
}

fn directed(a: &[[usize; 3]], b: &[[usize; 3]]) -> f64 {
    let total: f64 = a
        .iter()
        .map(|p| {
            b.iter()
                .map(|q| (0..3).map(|i| (p[i] as f64 - q[i] as f64).powi(2)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / a.len() as f64
}

/// All-pairs symmetric mean surface distance.
pub fn naive_msd(a: &Mask3D, b: &Mask3D) -> f64 {
    let (ba, bb) = (naive_boundary(a), naive_boundary(b));
    0.5 * (directed(&ba, &bb) + directed(&bb, &ba))
}

fn reflect(i: i64, n: usize) -> usize {
    let n = n as i64;
    let mut i = i.rem_euclid(2 * n);
    if i >= n {
        i = 2 * n - 1 - i;
    }
    i as usize
}

/// Direct (non-separable) truncated Gaussian convolution with symmetric
/// reflection at the borders.
pub fn naive_smooth(g: &Grid<f64>, sigma: f64) -> Grid<f64> {
    if sigma == 0.0 {
        return g.clone();
    }
    let r = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-r..=r).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / s).collect();
    let ext = g.dims().as_array();
    Grid::from_fn(g.dims(), |p| {
        let mut acc = 0.0;
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    let q = [
                        reflect(p[0] as i64 + dx, ext[0]),
                        reflect(p[1] as i64 + dy, ext[1]),
                        reflect(p[2] as i64 + dz, ext[2]),
                    ];
                    acc += w[(dx + r) as usize] * w[(dy + r) as usize] * w[(dz + r) as usize] * g.get(q);
                }
            }
        }
        acc
    })
}

/// Central difference of `f` at coordinate `i` of `y`.
pub fn central_difference(y: &Grid<f64>, i: usize, h: f64, f: impl Fn(&Grid<f64>) -> f64) -> f64 {
    let mut plus = y.clone();
    plus.data_mut()[i] += h;
    let mut minus = y.clone();
    minus.data_mut()[i] -= h;
    (f(&plus) - f(&minus)) / (2.0 * h)
}

/// Smallest gap between the two largest values over all listed rays through voxel `p`.
pub fn top_two_gap(y: &Grid<f64>, p: [usize; 3], axes: &[Axis]) -> f64 {
    let ext = y.dims().as_array();
    axes.iter()
        .map(|&a| {
            let (iu, iv) = plane(a);
            let mut vals: Vec<f64> = (0..ext[a.index()]).map(|k| y.get(ray_point(a, p[iu], p[iv], k))).collect();
            if vals.len() < 2 {
                return f64::INFINITY;
            }
            vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
            vals[0] - vals[1]
        })
        .fold(f64::INFINITY, f64::min)
}
