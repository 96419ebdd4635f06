//! Seeded synthetic vessel trees.
//!
//! A root segment is grown from a random point as a piecewise-smooth path,
//! and further branches sprout from random points of existing segments.
//! Voxels whose centres lie within a segment's radius of its path are
//! vessel voxels; they all carry exactly `vessel_intensity`, so every ray
//! through a vessel plateaus at its maximum. The background is uniform
//! noise below that level. Optional spherical occluders at vessel intensity
//! are kept out of the ground truth.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::voxcore::{Axis, Dims, Grid, Mask3D, Volume};

/// Attempts per segment before generation gives up.
pub const MAX_RETRIES: usize = 100;

/// Missing fields in JSON take the 64³ standard values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomConfig {
    pub dims: Dims,
    /// Inclusive range the number of segments is drawn from.
    pub branch_count: (usize, usize),
    pub radius_range: (f64, f64),
    /// Segment length as a fraction of the smallest extent.
    pub length_range: (f64, f64),
    pub vessel_intensity: f32,
    pub noise_amplitude: f32,
    pub occluder_count: usize,
    pub occluder_radius: (f64, f64),
    /// Standard deviation of the per-voxel direction jitter.
    pub curvature: f64,
    /// Forces a straight root running the full length of this axis.
    pub root_axis: Option<Axis>,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self::standard(64)
    }
}

impl PhantomConfig {
    /// The suite configuration on an `n`³ grid: 3 to 6 branches with radii
    /// 1.5 to 4 voxels at 64³. Below 64 the largest radius shrinks with the
    /// grid, but never under 2.
    pub fn standard(n: usize) -> Self {
        let r_max = (4.0 * n as f64 / 64.0).clamp(2.0, 4.0);
        PhantomConfig {
            dims: Dims::cube(n.max(1)).expect("positive"),
            branch_count: (3, 6),
            radius_range: (1.5f64.min(r_max), r_max),
            length_range: (0.45, 0.8),
            vessel_intensity: 0.9,
            noise_amplitude: 0.35,
            occluder_count: 0,
            occluder_radius: (2.0, 4.0),
            curvature: 0.15,
            root_axis: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let (b0, b1) = self.branch_count;
        if b0 < 1 || b0 > b1 {
            return bad(format!("branch_count {:?} must satisfy 1 <= min <= max", self.branch_count));
        }
        let (r0, r1) = self.radius_range;
        if !(r0 >= 1.0 && r0 <= r1) {
            return bad(format!("radius_range {:?} must satisfy 1 <= min <= max", self.radius_range));
        }
        let (l0, l1) = self.length_range;
        if !(l0 > 0.0 && l0 <= l1) {
            return bad(format!("length_range {:?} must be positive and ordered", self.length_range));
        }
        if !(self.vessel_intensity > 0.0 && self.vessel_intensity <= 1.0) {
            return bad(format!("vessel_intensity {} must lie in (0, 1]", self.vessel_intensity));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude < self.vessel_intensity) {
            return bad(format!(
                "noise_amplitude {} must lie in [0, vessel_intensity)",
                self.noise_amplitude
            ));
        }
        let (o0, o1) = self.occluder_radius;
        if self.occluder_count > 0 && !(o0 > 0.0 && o0 <= o1) {
            return bad(format!("occluder_radius {:?} must be positive and ordered", self.occluder_radius));
        }
        if !(self.curvature >= 0.0) {
            return bad(format!("curvature {} must be non-negative", self.curvature));
        }
        Ok(())
    }
}

/// One vessel segment: a polyline of unit-spaced points and a radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub points: Vec<[f64; 3]>,
    pub radius: f64,
}

impl Segment {
    /// Squared distance from `q` to the polyline.
    pub fn distance2(&self, q: [f64; 3]) -> f64 {
        if self.points.len() == 1 {
            return dist2(q, self.points[0]);
        }
        self.points
            .windows(2)
            .map(|w| point_segment_distance2(q, w[0], w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug)]
pub struct Phantom {
    pub seed: u64,
    pub config: PhantomConfig,
    pub intensity: Volume,
    pub gt: Mask3D,
    /// Voxels on the rasterised segment paths, sorted and unique.
    pub centerline: Vec<[usize; 3]>,
    pub occluders: Mask3D,
    pub segments: Vec<Segment>,
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn point_segment_distance2(q: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let aq = [q[0] - a[0], q[1] - a[1], q[2] - a[2]];
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 > 0.0 {
        (ab.iter().zip(&aq).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist2(q, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.map(|x| x / n)
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            return normalize(v);
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

struct Grower<'a> {
    cfg: &'a PhantomConfig,
    extents: [f64; 3],
    min_extent: f64,
}

impl Grower<'_> {
    fn inside(&self, p: [f64; 3], r: f64) -> bool {
        (0..3).all(|i| p[i] >= r + 0.5 && p[i] <= self.extents[i] - 1.5 - r)
    }

    /// Grows a jittered path from `start`; `None` if it leaves the volume.
    fn grow(&self, rng: &mut ChaCha8Rng, start: [f64; 3], dir: [f64; 3], r: f64, scale: f64) -> Option<Vec<[f64; 3]>> {
        let length = uniform(rng, self.cfg.length_range) * self.min_extent * scale;
        let steps = length.round().max(2.0) as usize;
        let (mut p, mut d) = (start, dir);
        let mut points = vec![p];
        for _ in 0..steps {
            let jitter: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            d = normalize([
                d[0] + self.cfg.curvature * jitter[0],
                d[1] + self.cfg.curvature * jitter[1],
                d[2] + self.cfg.curvature * jitter[2],
            ]);
            p = [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
            if !self.inside(p, r) {
                return None;
            }
            points.push(p);
        }
        Some(points)
    }

    fn root(&self, rng: &mut ChaCha8Rng) -> Result<Segment> {
        let (r0, r1) = self.cfg.radius_range;
        for _ in 0..MAX_RETRIES {
            let r = uniform(rng, (0.5 * (r0 + r1), r1));
            if let Some(axis) = self.cfg.root_axis {
                let mut c = [0.0; 3];
                for i in 0..3 {
                    c[i] = uniform(rng, (r + 0.5, self.extents[i] - 1.5 - r)).round();
                }
                let (a, n) = (axis.index(), self.extents[axis.index()]);
                if (0..3).any(|i| i != a && (c[i] < r + 0.5 || c[i] > self.extents[i] - 1.5 - r)) {
                    continue;
                }
                let points = (0..n as usize)
                    .map(|k| {
                        let mut p = c;
                        p[a] = k as f64;
                        p
                    })
                    .collect();
                return Ok(Segment { points, radius: r });
            }
            let mut start = [0.0; 3];
            for i in 0..3 {
                let lo = r + 0.5;
                let hi = self.extents[i] - 1.5 - r;
                if hi < lo {
                    return Err(Error::Generation(format!("radius {r} does not fit the volume")));
                }
                start[i] = uniform(rng, (lo, hi));
            }
            let dir = random_unit(rng);
            if let Some(points) = self.grow(rng, start, dir, r, 1.0) {
                return Ok(Segment { points, radius: r });
            }
        }
        Err(Error::Generation(format!("root segment failed after {MAX_RETRIES} attempts")))
    }

    fn branch(&self, rng: &mut ChaCha8Rng, tree: &[Segment]) -> Result<Segment> {
        for _ in 0..MAX_RETRIES {
            let parent = &tree[rng.random_range(0..tree.len())];
            let n = parent.points.len();
            let at = rng.random_range(n / 4..=(3 * n / 4).min(n - 1));
            let tangent = if at + 1 < n {
                normalize([
                    parent.points[at + 1][0] - parent.points[at][0],
                    parent.points[at + 1][1] - parent.points[at][1],
                    parent.points[at + 1][2] - parent.points[at][2],
                ])
            } else {
                random_unit(rng)
            };
            let side = random_unit(rng);
            let along: f64 = side.iter().zip(&tangent).map(|(a, b)| a * b).sum();
            let perp = [
                side[0] - along * tangent[0],
                side[1] - along * tangent[1],
                side[2] - along * tangent[2],
            ];
            if perp.iter().map(|x| x * x).sum::<f64>() < 1e-9 {
                continue;
            }
            let perp = normalize(perp);
            let angle = rng.random_range(35f64.to_radians()..80f64.to_radians());
            let dir = normalize([
                angle.cos() * tangent[0] + angle.sin() * perp[0],
                angle.cos() * tangent[1] + angle.sin() * perp[1],
                angle.cos() * tangent[2] + angle.sin() * perp[2],
            ]);
            let r = uniform(rng, (self.cfg.radius_range.0, parent.radius.min(self.cfg.radius_range.1)));
            let start = parent.points[at];
            if let Some(points) = self.grow(rng, start, dir, r, 0.75) {
                return Ok(Segment { points, radius: r });
            }
        }
        Err(Error::Generation(format!("branch failed after {MAX_RETRIES} attempts")))
    }
}

fn rasterize(dims: Dims, segments: &[Segment]) -> Mask3D {
    let mut gt = Grid::filled(dims, false);
    let ext = dims.as_array();
    for s in segments {
        let r2 = s.radius * s.radius;
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for i in 0..3 {
            let (mn, mx) = s
                .points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[i]), b.max(p[i])));
            lo[i] = (mn - s.radius).floor().max(0.0) as usize;
            hi[i] = ((mx + s.radius).ceil() as usize).min(ext[i] - 1);
        }
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    if s.distance2([x as f64, y as f64, z as f64]) <= r2 {
                        gt.set([x, y, z], true);
                    }
                }
            }
        }
    }
    gt
}

fn trace_centerline(dims: Dims, segments: &[Segment]) -> Vec<[usize; 3]> {
    let ext = dims.as_array();
    let mut set = BTreeSet::new();
    let mut visit = |p: [f64; 3]| {
        let v = [0, 1, 2].map(|i| (p[i].round().max(0.0) as usize).min(ext[i] - 1));
        // BTreeSet over [z, y, x] gives linear order
        set.insert([v[2], v[1], v[0]]);
    };
    for s in segments {
        visit(s.points[0]);
        for w in s.points.windows(2) {
            for k in 1..=4 {
                let t = k as f64 / 4.0;
                visit([0, 1, 2].map(|i| w[0][i] + t * (w[1][i] - w[0][i])));
            }
        }
    }
    set.into_iter().map(|[z, y, x]| [x, y, z]).collect()
}

/// Builds the phantom for `(seed, cfg)`; identical inputs give identical output.
pub fn generate(seed: u64, cfg: &PhantomConfig) -> Result<Phantom> {
    cfg.validate()?;
    let dims = cfg.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extents = dims.as_array().map(|n| n as f64);
    let grower = Grower {
        cfg,
        extents,
        min_extent: extents.iter().copied().fold(f64::INFINITY, f64::min),
    };

    let count = rng.random_range(cfg.branch_count.0..=cfg.branch_count.1);
    let mut segments = vec![grower.root(&mut rng)?];
    while segments.len() < count {
        let s = grower.branch(&mut rng, &segments)?;
        segments.push(s);
    }

    let gt = rasterize(dims, &segments);
    let centerline = trace_centerline(dims, &segments);

    let noise = cfg.noise_amplitude;
    let mut intensity = Grid::from_fn(dims, |_| if noise > 0.0 { rng.random_range(0.0..noise) } else { 0.0 });

    let mut occluders = Grid::filled(dims, false);
    for _ in 0..cfg.occluder_count {
        let r = uniform(&mut rng, cfg.occluder_radius);
        let c = [0, 1, 2].map(|i| rng.random_range(0.0..extents[i]));
        let blob = Segment {
            points: vec![c],
            radius: r,
        };
        for (i, o) in rasterize(dims, std::slice::from_ref(&blob)).data().iter().enumerate() {
            if *o && !gt.data()[i] {
                occluders.data_mut()[i] = true;
            }
        }
    }

    for ((v, &g), &o) in intensity.data_mut().iter_mut().zip(gt.data()).zip(occluders.data()) {
        if g || o {
            *v = cfg.vessel_intensity;
        }
    }

    Ok(Phantom {
        seed,
        config: cfg.clone(),
        intensity,
        gt,
        centerline,
        occluders,
        segments,
    })
}

/// Phantoms for seeds `0..n` under `cfg`, generated in parallel.
pub fn suite(n: usize, cfg: &PhantomConfig) -> Result<Vec<Phantom>> {
    (0..n as u64).into_par_iter().map(|s| generate(s, cfg)).collect()
}

/// `n` phantoms (seeds `0..n`) under [`PhantomConfig::standard`]`(64)`.
pub fn standard_suite(n: usize) -> Result<Vec<Phantom>> {
    suite(n, &PhantomConfig::standard(64))
}
