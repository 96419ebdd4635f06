//! `.vol` + `.json` sidecar volume files.
//!
//! The payload is raw little-endian `f32` in x-fastest order; the sidecar is
//! `{"dims":[nx,ny,nz],"order":"x-fastest","dtype":"f32le","kind":"intensity"|"mask"}`.
//! Masks are stored as 0.0 / 1.0.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{Dims, Grid, Mask3D, Volume};
use crate::error::{Error, Result};

pub const ORDER: &str = "x-fastest";
pub const DTYPE: &str = "f32le";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeKind {
    Intensity,
    Mask,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub dims: [usize; 3],
    pub order: String,
    pub dtype: String,
    pub kind: VolumeKind,
}

/// `(payload, sidecar)` paths for a stem; a trailing `.vol` or `.json` is ignored.
pub fn volume_paths(path: &Path) -> (PathBuf, PathBuf) {
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("vol") | Some("json") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    (append_ext(&stem, "vol"), append_ext(&stem, "json"))
}

fn append_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn write(path: &Path, dims: Dims, values: impl Iterator<Item = f32>, kind: VolumeKind) -> Result<()> {
    let (vol, json) = volume_paths(path);
    if let Some(parent) = vol.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let mut bytes = Vec::with_capacity(dims.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&vol, bytes)?;
    let header = Header {
        dims: dims.as_array(),
        order: ORDER.to_string(),
        dtype: DTYPE.to_string(),
        kind,
    };
    fs::write(&json, serde_json::to_string(&header)?)?;
    Ok(())
}

pub fn read_header(path: &Path) -> Result<Header> {
    let (_, json) = volume_paths(path);
    let text = fs::read_to_string(&json)?;
    let header: Header =
        serde_json::from_str(&text).map_err(|e| Error::Header(format!("{}: {e}", json.display())))?;
    if header.dtype != DTYPE {
        return Err(Error::UnsupportedDtype(header.dtype));
    }
    if header.order != ORDER {
        return Err(Error::UnsupportedDtype(format!("order {}", header.order)));
    }
    Ok(header)
}

fn read(path: &Path) -> Result<(Header, Vec<f32>)> {
    let header = read_header(path)?;
    let dims = Dims::try_from(header.dims).map_err(|e| Error::Header(e.to_string()))?;
    let (vol, _) = volume_paths(path);
    let bytes = fs::read(&vol)?;
    if bytes.len() != dims.len() * 4 {
        return Err(Error::LengthMismatch {
            dims: dims.as_array(),
            expected: dims.len(),
            found: bytes.len() / 4,
        });
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, values))
}

pub fn save_volume(path: &Path, v: &Volume) -> Result<()> {
    write(path, v.dims(), v.data().iter().copied(), VolumeKind::Intensity)
}

pub fn save_mask(path: &Path, m: &Mask3D) -> Result<()> {
    write(
        path,
        m.dims(),
        m.data().iter().map(|&b| if b { 1.0 } else { 0.0 }),
        VolumeKind::Mask,
    )
}

/// Loads either kind as scalars.
pub fn load_volume(path: &Path) -> Result<Volume> {
    let (header, values) = read(path)?;
    Grid::from_vec(Dims::try_from(header.dims)?, values)
}

/// Loads a file whose values are all 0.0 or 1.0.
pub fn load_mask(path: &Path) -> Result<Mask3D> {
    let (header, values) = read(path)?;
    let data = values
        .into_iter()
        .map(|v| match v {
            v if v == 0.0 => Ok(false),
            v if v == 1.0 => Ok(true),
            other => Err(Error::NonBinaryMask(other)),
        })
        .collect::<Result<Vec<_>>>()?;
    Grid::from_vec(Dims::try_from(header.dims)?, data)
}
