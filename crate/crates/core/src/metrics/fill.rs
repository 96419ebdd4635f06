use std::collections::VecDeque;

use crate::voxcore::{Grid, Mask3D};

/// Turns every background voxel that the volume border cannot reach through
/// 6-connected background into foreground.
pub fn fill_holes(pred: &Mask3D) -> Mask3D {
    let dims = pred.dims();
    let [nx, ny, nz] = dims.as_array();
    let fg = pred.data();
    let mut outside = vec![false; fg.len()];
    let mut queue = VecDeque::new();

    for i in 0..fg.len() {
        let [x, y, z] = dims.coords(i);
        let border = x == 0 || y == 0 || z == 0 || x + 1 == nx || y + 1 == ny || z + 1 == nz;
        if border && !fg[i] {
            outside[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let [x, y, z] = dims.coords(i);
        let mut visit = |j: usize| {
            if !fg[j] && !outside[j] {
                outside[j] = true;
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < nx {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - nx);
        }
        if y + 1 < ny {
            visit(i + nx);
        }
        if z > 0 {
            visit(i - nx * ny);
        }
        if z + 1 < nz {
            visit(i + nx * ny);
        }
    }
    Grid::from_vec(dims, outside.into_iter().map(|o| !o).collect()).expect("same length")
}
