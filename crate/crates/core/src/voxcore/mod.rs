//! Dense 3D grids and the primitives every other module builds on.
//!
//! Linear layout is x-fastest everywhere: `index = x + nx * (y + ny * z)`.

mod grid;
pub mod io;
mod transform;
mod window;

pub use grid::{Axis, Dims, Grid, Mask3D, Volume};
pub use transform::{apply_transform, OrientationTransform};
pub use window::window_clip;
