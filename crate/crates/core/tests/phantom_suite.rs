mod common;

use common::naive_mip;
use vesselmip_core::depthmap::{reconstruct, DEFAULT_TAU};
use vesselmip_core::metrics::overlap_metrics;
use vesselmip_core::phantom::{generate, standard_suite, PhantomConfig};
use vesselmip_core::projection::{derive_annotation, mip, Rays};
use vesselmip_core::Axis;

#[test]
fn standard_suite_shape() {
    let suite = standard_suite(20).unwrap();
    assert_eq!(suite.len(), 20);
    for (i, p) in suite.iter().enumerate() {
        assert_eq!(p.seed, i as u64);
        assert_eq!(p.gt.dims().as_array(), [64, 64, 64]);
        let fraction = p.gt.count() as f64 / p.gt.len() as f64;
        assert!((0.005..=0.10).contains(&fraction), "seed {i}: {fraction}");
        assert!(!p.centerline.is_empty());
        assert!(p.centerline.iter().all(|&c| p.gt.get(c)));
        assert!(p.intensity.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
        for q in p.gt.foreground() {
            assert!(p.intensity.get(q) >= p.config.vessel_intensity);
        }
        let (lo, hi) = p.config.branch_count;
        assert!((lo..=hi).contains(&(p.segments.len())));
    }
    for i in 0..20 {
        for j in i + 1..20 {
            assert!(overlap_metrics(&suite[i].gt, &suite[j].gt).unwrap().dice < 1.0);
        }
    }
    assert_eq!(standard_suite(1).unwrap()[0].gt, suite[0].gt);
}

#[test]
fn generation_is_deterministic() {
    let cfg = PhantomConfig::standard(32);
    let a = generate(9, &cfg).unwrap();
    let b = generate(9, &cfg).unwrap();
    assert_eq!(a.gt, b.gt);
    assert_eq!(a.centerline, b.centerline);
    let bits = |v: &vesselmip_core::Volume| v.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.intensity), bits(&b.intensity));
}

#[test]
fn noise_free_projection_support_matches_gt() {
    let cfg = PhantomConfig { noise_amplitude: 0.0, ..PhantomConfig::standard(32) };
    for seed in 0..5 {
        let p = generate(seed, &cfg).unwrap();
        for a in Axis::ALL {
            let from_gt = naive_mip(&p.gt, a);
            let from_img = naive_mip(&p.intensity, a);
            let nonzero: Vec<bool> = from_img.value.iter().map(|&x| x != 0.0).collect();
            assert_eq!(nonzero, from_gt.value);
        }
    }
}

#[test]
fn ray_maxima_land_inside_gt() {
    for p in standard_suite(5).unwrap() {
        for a in Axis::ALL {
            let (_, depth) = mip(&p.intensity, a);
            let ann = derive_annotation(&p.gt, a);
            let rays = Rays::new(p.gt.dims(), a);
            for r in 0..rays.count() {
                let (u, v) = rays.pixel(r);
                if ann.mask.get(u, v) {
                    assert!(p.gt.get(rays.voxel(u, v, depth.z_fw.get(u, v))));
                    assert!(p.gt.get(rays.voxel(u, v, depth.z_bw.get(u, v))));
                }
            }
        }
    }
}

#[test]
fn occluders_can_contaminate_depth_maps() {
    let cfg = PhantomConfig { occluder_count: 8, ..PhantomConfig::standard(32) };
    let mut contaminated = 0;
    for seed in 0..10 {
        let p = generate(seed, &cfg).unwrap();
        assert!(p.occluders.count() > 0);
        assert!(p.occluders.data().iter().zip(p.gt.data()).all(|(&o, &g)| !(o && g)));
        for a in Axis::ALL {
            let d = reconstruct(&derive_annotation(&p.gt, a), &p.intensity, DEFAULT_TAU).unwrap();
            contaminated += d.mask.data().iter().zip(p.gt.data()).filter(|(&d, &g)| d && !g).count();
        }
    }
    assert!(contaminated > 0);
}
