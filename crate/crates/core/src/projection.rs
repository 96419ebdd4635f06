//! Maximum-intensity projection along an image axis.
//!
//! Projecting along axis `a` yields an image over the two remaining axes in
//! increasing order (`Axis::plane_axes`): u is the lower axis, v the higher.
//! Images are stored u-fastest. The per-ray forward depth is the first index
//! attaining the maximum and the backward depth the last one; equality is
//! exact.

use std::fs;
use std::path::Path;

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::voxcore::{io::volume_paths, Axis, Dims, Grid, Mask3D, OrientationTransform, Volume};

/// Dense 2D image, u-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T> {
    nu: usize,
    nv: usize,
    data: Vec<T>,
}

pub type Image2D = Image<f32>;

impl<T> Image<T> {
    pub fn from_vec(nu: usize, nv: usize, data: Vec<T>) -> Result<Self> {
        if nu == 0 || nv == 0 || data.len() != nu * nv {
            return Err(Error::DimsMismatch(format!(
                "image {nu}x{nv} cannot hold {} values",
                data.len()
            )));
        }
        Ok(Image { nu, nv, data })
    }

    pub fn from_fn(nu: usize, nv: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nu * nv);
        for v in 0..nv {
            for u in 0..nu {
                data.push(f(u, v));
            }
        }
        Image { nu, nv, data }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Image<U> {
        Image {
            nu: self.nu,
            nv: self.nv,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Image<T> {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        self.data[u + self.nu * v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: T) {
        self.data[u + self.nu * v] = value;
    }
}

impl Image<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// How the rays along one axis are laid out in a grid's linear storage.
#[derive(Clone, Copy, Debug)]
pub struct Rays {
    pub axis: Axis,
    pub nu: usize,
    pub nv: usize,
    /// Samples per ray.
    pub len: usize,
    /// Linear-index step between consecutive samples of a ray.
    pub stride: usize,
    stride_u: usize,
    stride_v: usize,
}

impl Rays {
    pub fn new(dims: Dims, axis: Axis) -> Self {
        let (a, b) = axis.plane_axes();
        Rays {
            axis,
            nu: dims.extent(a),
            nv: dims.extent(b),
            len: dims.extent(axis),
            stride: dims.stride(axis),
            stride_u: dims.stride(a),
            stride_v: dims.stride(b),
        }
    }

    pub fn count(&self) -> usize {
        self.nu * self.nv
    }

    /// Linear index of sample `k` on the ray through pixel `(u, v)`.
    #[inline]
    pub fn index(&self, u: usize, v: usize, k: usize) -> usize {
        u * self.stride_u + v * self.stride_v + k * self.stride
    }

    /// Pixel coordinates of the ray with u-fastest number `r`.
    #[inline]
    pub fn pixel(&self, r: usize) -> (usize, usize) {
        (r % self.nu, r / self.nu)
    }

    /// Voxel coordinates of sample `k` on the ray through `(u, v)`.
    pub fn voxel(&self, u: usize, v: usize, k: usize) -> [usize; 3] {
        let (a, b) = self.axis.plane_axes();
        let mut p = [0; 3];
        p[a.index()] = u;
        p[b.index()] = v;
        p[self.axis.index()] = k;
        p
    }
}

/// Per-ray first and last maximiser indices.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImages {
    pub z_fw: Image<usize>,
    pub z_bw: Image<usize>,
}

/// Max, first argmax and last argmax of one ray.
#[inline]
fn ray_extrema<T: Copy + PartialOrd>(data: &[T], rays: &Rays, u: usize, v: usize) -> (T, usize, usize) {
    let mut best = data[rays.index(u, v, 0)];
    let (mut first, mut last) = (0, 0);
    for k in 1..rays.len {
        let x = data[rays.index(u, v, k)];
        if x > best {
            best = x;
            first = k;
            last = k;
        } else if x == best {
            last = k;
        }
    }
    (best, first, last)
}

fn project<T: Copy + PartialOrd>(grid: &Grid<T>, axis: Axis) -> (Image<T>, DepthImages) {
    let rays = Rays::new(grid.dims(), axis);
    let data = grid.data();
    let n = rays.count();
    let (mut values, mut z_fw, mut z_bw) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for v in 0..rays.nv {
        for u in 0..rays.nu {
            let (m, f, b) = ray_extrema(data, &rays, u, v);
            values.push(m);
            z_fw.push(f);
            z_bw.push(b);
        }
    }
    let image = |data| Image { nu: rays.nu, nv: rays.nv, data };
    (
        image(values),
        DepthImages {
            z_fw: Image { nu: rays.nu, nv: rays.nv, data: z_fw },
            z_bw: Image { nu: rays.nu, nv: rays.nv, data: z_bw },
        },
    )
}

/// Maximum-intensity projection with forward and backward depth.
pub fn mip(v: &Volume, axis: Axis) -> (Image2D, DepthImages) {
    project(v, axis)
}

/// Projection of a prediction: per-ray maximum and the first maximiser,
/// which is where the projected loss routes its gradient.
pub fn soft_mip<T: Copy + PartialOrd>(y: &Grid<T>, axis: Axis) -> (Image<T>, Image<usize>) {
    let (image, depth) = project(y, axis);
    (image, depth.z_fw)
}

/// Depth-modulated projections `sqrt(mip) * z_hat` with the depth normalised
/// to [0, 1] by `N - 1` (and zero when the axis has a single sample).
pub fn depth_enhanced_mip(v: &Volume, axis: Axis) -> (Image2D, Image2D) {
    let (m, depth) = mip(v, axis);
    let n = v.dims().extent(axis);
    let scale = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let encode = |z: &Image<usize>| {
        Image::from_fn(m.nu, m.nv, |u, w| {
            let intensity = (m.get(u, w) as f64).max(0.0).sqrt();
            (intensity * z.get(u, w) as f64 * scale) as f32
        })
    };
    (encode(&depth.z_fw), encode(&depth.z_bw))
}

/// Binary 2D annotation tagged with the axis it was projected along.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation2D {
    pub axis: Axis,
    pub mask: Image<bool>,
}

impl Annotation2D {
    pub fn count(&self) -> usize {
        self.mask.count()
    }

    /// Checks that the annotation covers the projection plane of `dims`.
    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        let rays = Rays::new(dims, self.axis);
        if self.mask.dims() != (rays.nu, rays.nv) {
            return Err(Error::DimsMismatch(format!(
                "annotation along {} is {:?}, volume {:?} projects to {:?}",
                self.axis,
                self.mask.dims(),
                dims.as_array(),
                (rays.nu, rays.nv)
            )));
        }
        Ok(())
    }
}

/// Annotation of a projection, obtained from the 3D mask: a pixel is
/// foreground iff its ray meets any foreground voxel.
pub fn derive_annotation(gt: &Mask3D, axis: Axis) -> Annotation2D {
    let rays = Rays::new(gt.dims(), axis);
    let data = gt.data();
    let mask = Image::from_fn(rays.nu, rays.nv, |u, v| (0..rays.len).any(|k| data[rays.index(u, v, k)]));
    Annotation2D { axis, mask }
}

/// Projects a 3D mask to 2D via `any` along the axis (the same as
/// `derive_annotation`, kept separate for rendering).
pub fn mask_projection(m: &Mask3D, axis: Axis) -> Image<bool> {
    derive_annotation(m, axis).mask
}

/// Orientation change of a projected image induced by a 3D orientation
/// transform: an optional u/v swap followed by flips of the output u and v.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlaneTransform {
    pub swap: bool,
    pub flip_u: bool,
    pub flip_v: bool,
}

impl PlaneTransform {
    pub fn apply<T: Copy>(&self, img: &Image<T>) -> Image<T> {
        let (nu, nv) = if self.swap { (img.nv, img.nu) } else { (img.nu, img.nv) };
        Image::from_fn(nu, nv, |u, v| {
            let u = if self.flip_u { nu - 1 - u } else { u };
            let v = if self.flip_v { nv - 1 - v } else { v };
            if self.swap {
                img.get(v, u)
            } else {
                img.get(u, v)
            }
        })
    }
}

/// How projecting a transformed volume along `axis` relates to projecting the
/// original. Returns the source axis, the plane transform, and whether the
/// projection axis is flipped (which mirrors depths and swaps forward with
/// backward).
pub fn projection_under(t: &OrientationTransform, axis: Axis) -> (Axis, PlaneTransform, bool) {
    let perm = t.perm();
    let flips = t.flips();
    let source = perm[axis.index()];
    let (a, b) = axis.plane_axes();
    let (sa, _) = source.plane_axes();
    // Output u comes from source axis perm[a]; swap when that is the source v.
    let swap = perm[a.index()] != sa;
    (
        source,
        PlaneTransform {
            swap,
            flip_u: flips[a.index()],
            flip_v: flips[b.index()],
        },
        flips[axis.index()],
    )
}

/// Writes a 16-bit grayscale PNG of values in [0, 1] (value x 65535, rounded).
pub fn save_png16(path: &Path, img: &Image2D) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(img.nu as u32, img.nv as u32, |u, v| {
        let x = img.get(u as usize, v as usize).clamp(0.0, 1.0) as f64;
        Luma([(x * 65535.0).round() as u16])
    });
    ensure_parent(path)?;
    buf.save(path)?;
    Ok(())
}

/// Writes a binary image as 8-bit PNG with values 0 / 255.
pub fn save_png8_mask(path: &Path, img: &Image<bool>) -> Result<()> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_fn(img.nu as u32, img.nv as u32, |u, v| Luma([if img.get(u as usize, v as usize) { 255 } else { 0 }]));
    ensure_parent(path)?;
    buf.save(path)?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct AnnotationTag {
    axis: Axis,
}

#[derive(Serialize, Deserialize)]
struct DepthSidecar {
    dims: [usize; 2],
    dtype: String,
    axis: Axis,
}

/// Saves `<stem>.png` (0/255) and `<stem>.json` = `{"axis":"x|y|z"}`.
pub fn save_annotation(stem: &Path, a: &Annotation2D) -> Result<()> {
    let (png, json) = annotation_paths(stem);
    save_png8_mask(&png, &a.mask)?;
    fs::write(json, serde_json::to_string(&AnnotationTag { axis: a.axis })?)?;
    Ok(())
}

pub fn load_annotation(stem: &Path) -> Result<Annotation2D> {
    let (png, json) = annotation_paths(stem);
    let tag: AnnotationTag = serde_json::from_str(&fs::read_to_string(json)?)
        .map_err(|e| Error::Header(format!("annotation tag: {e}")))?;
    let img = image::open(&png)?.to_luma8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0[0] >= 128).collect();
    Ok(Annotation2D {
        axis: tag.axis,
        mask: Image::from_vec(w as usize, h as usize, data)?,
    })
}

fn annotation_paths(stem: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let stem = match stem.extension().and_then(|e| e.to_str()) {
        Some("png") | Some("json") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let (_, json) = volume_paths(&stem);
    let mut png = stem.into_os_string();
    png.push(".png");
    (png.into(), json)
}

/// Depth image as raw little-endian `u32` plus a JSON sidecar.
pub fn save_depth_raw(stem: &Path, depth: &Image<usize>, axis: Axis) -> Result<()> {
    let (raw, json) = {
        let mut r = stem.as_os_str().to_owned();
        r.push(".raw");
        let mut j = stem.as_os_str().to_owned();
        j.push(".json");
        (std::path::PathBuf::from(r), std::path::PathBuf::from(j))
    };
    ensure_parent(&raw)?;
    let bytes: Vec<u8> = depth.data.iter().flat_map(|&z| (z as u32).to_le_bytes()).collect();
    fs::write(raw, bytes)?;
    let side = DepthSidecar {
        dims: [depth.nu, depth.nv],
        dtype: "u32le".into(),
        axis,
    };
    fs::write(json, serde_json::to_string(&side)?)?;
    Ok(())
}
