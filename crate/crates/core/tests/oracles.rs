mod common;

use std::collections::VecDeque;

use rand::Rng;

use common::*;
use vesselmip_core::metrics::{boundary, fill_holes, msd, squared_distance_to};
use vesselmip_core::optimfit::smooth;
use vesselmip_core::projection::{derive_annotation, mip, projection_under, soft_mip, PlaneTransform};
use vesselmip_core::voxcore::apply_transform;
use vesselmip_core::{Axis, Dims, Grid, Mask3D, OrientationTransform};

#[test]
fn mip_and_depths_match_triple_loop() {
    let mut r = rng(11);
    for _ in 0..30 {
        let dims = random_dims(&mut r, [9, 9, 9]);
        let v = quantized_volume(&mut r, dims, 3);
        for a in Axis::ALL {
            let want = naive_mip(&v, a);
            let (img, depth) = mip(&v, a);
            assert_eq!(img.data(), want.value.as_slice());
            assert_eq!(depth.z_fw.data(), want.first.as_slice());
            assert_eq!(depth.z_bw.data(), want.last.as_slice());
        }
    }
}

#[test]
fn soft_mip_routes_to_first_maximiser() {
    let mut r = rng(12);
    let dims = Dims::new(4, 5, 6).unwrap();
    let y: Grid<f64> = Grid::from_fn(dims, |_| r.random_range(0..3) as f64);
    for a in Axis::ALL {
        let want = naive_mip(&y, a);
        let (peak, arg) = soft_mip(&y, a);
        assert_eq!(peak.data(), want.value.as_slice());
        assert_eq!(arg.data(), want.first.as_slice());
    }
}

#[test]
fn annotation_matches_any_along_ray() {
    let mut r = rng(13);
    for _ in 0..20 {
        let dims = random_dims(&mut r, [8, 8, 8]);
        let m = random_mask(&mut r, dims, 0.1);
        for a in Axis::ALL {
            assert_eq!(derive_annotation(&m, a).mask.data(), naive_annotation(&m, a).as_slice());
        }
    }
}

#[test]
fn smoothing_impulse_matches_direct_convolution() {
    let dims = Dims::cube(9).unwrap();
    let mut g = Grid::filled(dims, 0.0);
    g.set([4, 4, 4], 1.0);
    let got = smooth(&g, 1.0);
    let want = naive_smooth(&g, 1.0);
    for (a, b) in got.data().iter().zip(want.data()) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!((got.get([4, 4, 4]) - want.get([4, 4, 4])).abs() < 1e-12);
}

#[test]
fn smoothing_near_borders_matches_direct_convolution() {
    let mut r = rng(14);
    for (dims, sigma) in [((3, 4, 5), 0.7), ((6, 2, 7), 1.3), ((1, 5, 2), 2.0), ((8, 8, 8), 0.4)] {
        let dims = Dims::new(dims.0, dims.1, dims.2).unwrap();
        let g: Grid<f64> = Grid::from_fn(dims, |_| r.random_range(-1.0..1.0));
        let got = smooth(&g, sigma);
        let want = naive_smooth(&g, sigma);
        for (a, b) in got.data().iter().zip(want.data()) {
            assert!((a - b).abs() < 1e-9, "{dims:?} sigma {sigma}: {a} vs {b}");
        }
    }
}

fn brute_squared_distance(features: &Mask3D) -> Grid<f64> {
    let pts = features.foreground();
    Grid::from_fn(features.dims(), |p| {
        pts.iter()
            .map(|q| (0..3).map(|i| (p[i] as f64 - q[i] as f64).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    })
}

#[test]
fn distance_transform_matches_brute_force() {
    let mut r = rng(15);
    for _ in 0..15 {
        let dims = random_dims(&mut r, [10, 10, 10]);
        let p = r.random_range(0.01..0.3);
        let m = random_mask(&mut r, dims, p);
        assert_eq!(squared_distance_to(&m), brute_squared_distance(&m));
    }
    let empty = Grid::filled(Dims::cube(3).unwrap(), false);
    assert!(squared_distance_to(&empty).data().iter().all(|d| d.is_infinite()));
}

#[test]
fn boundary_matches_neighbour_scan() {
    let mut r = rng(16);
    for _ in 0..10 {
        let dims = random_dims(&mut r, [9, 9, 9]);
        let m = random_blobs(&mut r, dims, 3);
        let mut want = naive_boundary(&m);
        let mut got = boundary(&m).foreground();
        want.sort();
        got.sort();
        assert_eq!(got, want);
    }
}

#[test]
fn surface_distance_matches_all_pairs() {
    let mut r = rng(17);
    for _ in 0..10 {
        let dims = random_dims(&mut r, [10, 10, 10]);
        let a = random_blobs(&mut r, dims, 2);
        let b = random_blobs(&mut r, dims, 2);
        if a.count() == 0 || b.count() == 0 {
            continue;
        }
        assert!((msd(&a, &b).unwrap() - naive_msd(&a, &b)).abs() < 1e-9);
    }
}

/// Outside = background reachable from the border, grown to a fixed point.
fn fill_by_growth(m: &Mask3D) -> Mask3D {
    let dims = m.dims();
    let ext = dims.as_array();
    let mut outside = Grid::from_fn(dims, |p| !m.get(p) && (0..3).any(|i| p[i] == 0 || p[i] + 1 == ext[i]));
    let mut queue: VecDeque<[usize; 3]> = outside.foreground().into();
    while let Some(p) = queue.pop_front() {
        for axis in 0..3 {
            for up in [false, true] {
                let mut q = p;
                if up && q[axis] + 1 < ext[axis] {
                    q[axis] += 1;
                } else if !up && q[axis] > 0 {
                    q[axis] -= 1;
                } else {
                    continue;
                }
                if !m.get(q) && !outside.get(q) {
                    outside.set(q, true);
                    queue.push_back(q);
                }
            }
        }
    }
    outside.map(|&o| !o)
}

#[test]
fn fill_holes_matches_border_flood() {
    let mut r = rng(18);
    for _ in 0..20 {
        let dims = random_dims(&mut r, [9, 9, 9]);
        let p = r.random_range(0.3..0.7);
        let m = random_mask(&mut r, dims, p);
        assert_eq!(fill_holes(&m), fill_by_growth(&m));
    }
}

#[test]
fn projection_under_is_the_unique_matching_plane_transform() {
    let mut r = rng(19);
    let v: Grid<f32> = Grid::from_fn(Dims::new(3, 4, 5).unwrap(), |_| r.random());
    for t in OrientationTransform::all() {
        let w = apply_transform(&v, &t);
        for a in Axis::ALL {
            let (target, _) = mip(&w, a);
            let mut matches = vec![];
            for src in Axis::ALL {
                let (img, _) = mip(&v, src);
                for bits in 0..8u8 {
                    let pt = PlaneTransform { swap: bits & 1 != 0, flip_u: bits & 2 != 0, flip_v: bits & 4 != 0 };
                    if pt.apply(&img) == target {
                        matches.push((src, pt));
                    }
                }
            }
            let (src, pt, _) = projection_under(&t, a);
            assert_eq!(matches, vec![(src, pt)], "{t:?} axis {a}");
        }
    }
}
