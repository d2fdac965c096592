//! 2-D rasterization of the cluster, grid distance fields and bin volumes.

mod distance;
mod volume;

use serde::{Deserialize, Serialize};

use crate::medium::{ClusterModel, Window};
use crate::point::Point;

pub use distance::{any_angle_distance, grid_intrinsic_distance, DistanceField, CHAMFER_DISTORTION};
pub use volume::bin_volume;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RasterError {
    #[error("pitch {pitch} exceeds rho_prime/4 = {limit}")]
    PitchTooCoarse { pitch: f64, limit: f64 },
    #[error("source cell ({0}, {1}) is outside the mask")]
    SourceOutside(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        }
    }
}

/// Cell-centered inside/outside mask. Cell `(i, j)` has center
/// `origin + ((i + ½)h, (j + ½)h)` and is stored at `j·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    origin: Point<2>,
    pitch: f64,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
}

/// Geometry of a mask, written next to PGM exports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub origin: [f64; 2],
    pub pitch: f64,
    pub shape: [usize; 2],
}

impl RasterMask {
    pub fn from_flags(origin: Point<2>, pitch: f64, nx: usize, ny: usize, inside: Vec<bool>) -> Result<Self, RasterError> {
        if !(pitch > 0.0 && pitch.is_finite()) || nx == 0 || ny == 0 || inside.len() != nx * ny {
            return Err(RasterError::InvalidParameter(format!(
                "mask needs pitch > 0 and {nx}×{ny} flags (got pitch {pitch}, {} flags)",
                inside.len()
            )));
        }
        Ok(RasterMask {
            origin,
            pitch,
            nx,
            ny,
            inside,
        })
    }

    /// Every cell inside: the full rectangle `[origin, origin + (nx, ny)·h]`.
    pub fn full(origin: Point<2>, pitch: f64, nx: usize, ny: usize) -> Result<Self, RasterError> {
        Self::from_flags(origin, pitch, nx, ny, vec![true; nx * ny])
    }

    pub fn origin(&self) -> Point<2> {
        self.origin
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.inside.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inside.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.inside[self.index(i, j)]
    }

    pub fn flags(&self) -> &[bool] {
        &self.inside
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point<2> {
        [
            self.origin[0] + (i as f64 + 0.5) * self.pitch,
            self.origin[1] + (j as f64 + 0.5) * self.pitch,
        ]
    }

    /// Cell containing `p`, if `p` lies in the raster rectangle.
    pub fn cell_of(&self, p: &Point<2>) -> Option<(usize, usize)> {
        let fi = ((p[0] - self.origin[0]) / self.pitch).floor();
        let fj = ((p[1] - self.origin[1]) / self.pitch).floor();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// `inside_count · h²`.
    pub fn area(&self) -> f64 {
        self.inside_count() as f64 * self.pitch * self.pitch
    }

    /// Inside neighbors of a cell under the given connectivity.
    pub fn neighbors(&self, idx: usize, conn: Connectivity) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.coords(idx);
        conn.offsets().iter().filter_map(move |&(di, dj)| {
            let a = i as i64 + di;
            let b = j as i64 + dj;
            if a < 0 || b < 0 || a >= self.nx as i64 || b >= self.ny as i64 {
                return None;
            }
            let k = self.index(a as usize, b as usize);
            self.inside[k].then_some(k)
        })
    }

    /// Component label per cell (`usize::MAX` outside) and component sizes.
    pub fn components(&self, conn: Connectivity) -> (Vec<usize>, Vec<usize>) {
        let mut label = vec![usize::MAX; self.inside.len()];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.inside.len() {
            if !self.inside[start] || label[start] != usize::MAX {
                continue;
            }
            let l = sizes.len();
            let mut size = 0;
            label[start] = l;
            stack.push(start);
            while let Some(u) = stack.pop() {
                size += 1;
                for v in self.neighbors(u, conn) {
                    if label[v] == usize::MAX {
                        label[v] = l;
                        stack.push(v);
                    }
                }
            }
            sizes.push(size);
        }
        (label, sizes)
    }

    /// The mask restricted to the component containing `cell`.
    pub fn component_of(&self, cell: (usize, usize), conn: Connectivity) -> Result<Self, RasterError> {
        if !self.is_inside(cell.0, cell.1) {
            return Err(RasterError::SourceOutside(cell.0, cell.1));
        }
        let (label, _) = self.components(conn);
        let l = label[self.index(cell.0, cell.1)];
        let inside = label.iter().map(|&x| x == l).collect();
        Ok(RasterMask { inside, ..self.clone() })
    }

    /// The mask restricted to its largest component.
    pub fn largest_component(&self, conn: Connectivity) -> Self {
        let (label, sizes) = self.components(conn);
        let best = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(l, _)| l);
        let inside = label.iter().map(|&x| Some(x) == best).collect();
        RasterMask { inside, ..self.clone() }
    }

    /// Binary PGM (P5), row 0 at the top (largest `y`); inside cells white.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.nx, self.ny).into_bytes();
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                out.push(if self.is_inside(i, j) { 255 } else { 0 });
            }
        }
        out
    }

    pub fn sidecar(&self) -> MaskSidecar {
        MaskSidecar {
            origin: self.origin,
            pitch: self.pitch,
            shape: [self.nx, self.ny],
        }
    }
}

/// Cell-center membership raster of `W′` over `bbox`.
pub fn rasterize(cluster: &ClusterModel<2>, bbox: &Window<2>, h: f64) -> Result<RasterMask, RasterError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RasterError::InvalidParameter(format!("pitch must be positive, got {h}")));
    }
    let limit = cluster.rho_prime() / 4.0;
    if h > limit {
        return Err(RasterError::PitchTooCoarse { pitch: h, limit });
    }
    let nx = (bbox.side(0) / h).ceil() as usize;
    let ny = (bbox.side(1) / h).ceil() as usize;
    let origin = *bbox.lo();
    let mut mask = RasterMask::full(origin, h, nx, ny)?;
    use rayon::prelude::*;
    mask.inside
        .par_chunks_mut(nx)
        .enumerate()
        .for_each(|(j, row)| {
            for (i, cell) in row.iter_mut().enumerate() {
                let c = [origin[0] + (i as f64 + 0.5) * h, origin[1] + (j as f64 + 0.5) * h];
                *cell = cluster.contains(&c);
            }
        });
    Ok(mask)
}
