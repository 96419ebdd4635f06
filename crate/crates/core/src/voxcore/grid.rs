use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the three image axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    /// The two axes spanning the projection plane, in increasing order.
    /// They become the (u, v) axes of any image projected along `self`.
    pub fn plane_axes(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Config(format!("unknown axis {other:?}"))),
        }
    }
}

/// Extents of a 3D grid. All extents are positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 3]", into = "[usize; 3]")]
pub struct Dims([usize; 3]);

impl Dims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::try_from([nx, ny, nz])
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn nx(&self) -> usize {
        self.0[0]
    }

    pub fn ny(&self) -> usize {
        self.0[1]
    }

    pub fn nz(&self) -> usize {
        self.0[2]
    }

    pub fn extent(&self, axis: Axis) -> usize {
        self.0[axis.index()]
    }

    pub fn as_array(&self) -> [usize; 3] {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, p: [usize; 3]) -> usize {
        debug_assert!(self.contains(p), "{p:?} outside {:?}", self.0);
        p[0] + self.0[0] * (p[1] + self.0[1] * p[2])
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.0[0];
        let r = i / self.0[0];
        [x, r % self.0[1], r / self.0[1]]
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        p.iter().zip(self.0.iter()).all(|(c, n)| c < n)
    }

    /// Linear-index step between neighbours along `axis`.
    pub fn stride(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => 1,
            Axis::Y => self.0[0],
            Axis::Z => self.0[0] * self.0[1],
        }
    }
}

impl TryFrom<[usize; 3]> for Dims {
    type Error = Error;

    fn try_from(d: [usize; 3]) -> Result<Self> {
        if d.iter().any(|&n| n == 0) {
            return Err(Error::InvalidDims(d));
        }
        Ok(Dims(d))
    }
}

impl From<Dims> for [usize; 3] {
    fn from(d: Dims) -> Self {
        d.0
    }
}

/// Dense 3D grid in x-fastest order.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dims: Dims,
    data: Vec<T>,
}

/// Scalar intensity volume.
pub type Volume = Grid<f32>;
/// Binary volume: ground truth, predictions, depth maps.
pub type Mask3D = Grid<bool>;

impl<T> Grid<T> {
    pub fn from_vec(dims: Dims, data: Vec<T>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                dims: dims.as_array(),
                expected: dims.len(),
                found: data.len(),
            });
        }
        Ok(Grid { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut([usize; 3]) -> T) -> Self {
        let data = (0..dims.len()).map(|i| f(dims.coords(i))).collect();
        Grid { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            dims: self.dims,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn check_same_dims<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.dims.as_array(),
                other.dims.as_array()
            )));
        }
        Ok(())
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(dims: Dims, value: T) -> Self {
        Grid {
            dims,
            data: vec![value; dims.len()],
        }
    }
}

impl<T: Copy> Grid<T> {
    #[inline]
    pub fn get(&self, p: [usize; 3]) -> T {
        self.data[self.dims.index(p)]
    }

    #[inline]
    pub fn set(&mut self, p: [usize; 3], value: T) {
        let i = self.dims.index(p);
        self.data[i] = value;
    }
}

impl Grid<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_volume(&self) -> Volume {
        self.map(|&b| if b { 1.0 } else { 0.0 })
    }

    /// Coordinates of every foreground voxel, in linear order.
    pub fn foreground(&self) -> Vec<[usize; 3]> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| self.dims.coords(i))
            .collect()
    }
}

impl Grid<f32> {
    pub fn to_f64(&self) -> Grid<f64> {
        self.map(|&v| v as f64)
    }

    /// `value >= threshold` per voxel.
    pub fn threshold(&self, threshold: f32) -> Mask3D {
        self.map(|&v| v >= threshold)
    }
}

impl Grid<f64> {
    pub fn to_f32(&self) -> Volume {
        self.map(|&v| v as f32)
    }
}
