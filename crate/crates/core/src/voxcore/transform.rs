use serde::{Deserialize, Serialize};

use super::grid::{Axis, Dims, Grid};
use crate::error::{Error, Result};

/// Axis permutation followed by per-axis flips.
///
/// Output axis `i` is taken from input axis `perm[i]`; when `flips[i]` is set
/// the output coordinate along `i` is mirrored afterwards. A voxel at `p`
/// therefore lands at `q[i] = flip_i(p[perm[i]])` with
/// `flip_i(a) = n_i - 1 - a`, where `n_i` is the output extent along `i`.
///
/// The 6 permutations and 8 flip patterns give exactly 48 transforms, closed
/// under composition and inversion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientationTransform {
    perm: [Axis; 3],
    flips: [bool; 3],
}

impl Default for OrientationTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl OrientationTransform {
    pub fn new(perm: [Axis; 3], flips: [bool; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for a in perm {
            if std::mem::replace(&mut seen[a.index()], true) {
                return Err(Error::Config(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { perm, flips })
    }

    pub fn identity() -> Self {
        Self {
            perm: [Axis::X, Axis::Y, Axis::Z],
            flips: [false; 3],
        }
    }

    pub fn permutation(perm: [Axis; 3]) -> Result<Self> {
        Self::new(perm, [false; 3])
    }

    pub fn flip(axis: Axis) -> Self {
        let mut flips = [false; 3];
        flips[axis.index()] = true;
        Self {
            perm: [Axis::X, Axis::Y, Axis::Z],
            flips,
        }
    }

    pub fn perm(&self) -> [Axis; 3] {
        self.perm
    }

    pub fn flips(&self) -> [bool; 3] {
        self.flips
    }

    /// All 48 transforms, permutations in lexicographic order, flips as a
    /// 3-bit counter.
    pub fn all() -> Vec<Self> {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut out = Vec::with_capacity(48);
        for p in PERMS {
            for bits in 0..8u8 {
                out.push(Self {
                    perm: p.map(|i| Axis::ALL[i]),
                    flips: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0],
                });
            }
        }
        out
    }

    /// Output axis that input axis `a` is carried onto.
    pub fn image_of(&self, a: Axis) -> Axis {
        let i = self.perm.iter().position(|&p| p == a).expect("perm is a bijection");
        Axis::ALL[i]
    }

    pub fn invert(&self) -> Self {
        let mut perm = [Axis::X; 3];
        let mut flips = [false; 3];
        for (i, &src) in self.perm.iter().enumerate() {
            perm[src.index()] = Axis::ALL[i];
            flips[src.index()] = self.flips[i];
        }
        Self { perm, flips }
    }

    /// The transform equal to applying `self` first and `next` second.
    pub fn then(&self, next: &Self) -> Self {
        let mut perm = [Axis::X; 3];
        let mut flips = [false; 3];
        for k in 0..3 {
            let mid = next.perm[k].index();
            perm[k] = self.perm[mid];
            flips[k] = next.flips[k] ^ self.flips[mid];
        }
        Self { perm, flips }
    }

    pub fn map_dims(&self, dims: Dims) -> Dims {
        let d = dims.as_array();
        Dims::try_from(self.perm.map(|a| d[a.index()])).expect("permuted extents stay positive")
    }

    /// Where the voxel `p` of a grid with extents `dims` ends up.
    pub fn map_point(&self, p: [usize; 3], dims: Dims) -> [usize; 3] {
        let out = self.map_dims(dims).as_array();
        let mut q = [0; 3];
        for i in 0..3 {
            let c = p[self.perm[i].index()];
            q[i] = if self.flips[i] { out[i] - 1 - c } else { c };
        }
        q
    }

    /// Moves every voxel of `grid` to its image under the transform.
    pub fn apply<T: Copy>(&self, grid: &Grid<T>) -> Grid<T> {
        let src_dims = grid.dims();
        let out_dims = self.map_dims(src_dims);
        let n = out_dims.as_array();
        let src = grid.data();
        Grid::from_fn(out_dims, |q| {
            let mut p = [0; 3];
            for i in 0..3 {
                let c = if self.flips[i] { n[i] - 1 - q[i] } else { q[i] };
                p[self.perm[i].index()] = c;
            }
            src[src_dims.index(p)]
        })
    }
}

/// Free-function form of [`OrientationTransform::apply`].
pub fn apply_transform<T: Copy>(grid: &Grid<T>, t: &OrientationTransform) -> Grid<T> {
    t.apply(grid)
}
