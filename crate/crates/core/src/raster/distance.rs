use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Connectivity, RasterError, RasterMask};

/// Worst-case ratio of the 8-neighbor chamfer length to the Euclidean
/// length of a straight segment, `√(4 − 2√2)`, attained at 22.5°.
pub const CHAMFER_DISTORTION: f64 = 1.082_392_200_292_393_9;

/// Grid distance per cell (∞ outside the source component).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl DistanceField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra over inside cells with axis steps `h` and diagonal steps `h√2`.
pub fn grid_intrinsic_distance(mask: &RasterMask, source: (usize, usize)) -> Result<DistanceField, RasterError> {
    if !mask.is_inside(source.0, source.1) {
        return Err(RasterError::SourceOutside(source.0, source.1));
    }
    let h = mask.pitch();
    let diag = h * std::f64::consts::SQRT_2;
    let mut d = vec![f64::INFINITY; mask.len()];
    let mut heap = BinaryHeap::new();
    let s = mask.index(source.0, source.1);
    d[s] = 0.0;
    heap.push(Entry(0.0, s));
    while let Some(Entry(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        let (ui, uj) = mask.coords(u);
        for v in mask.neighbors(u, Connectivity::Eight) {
            let (vi, vj) = mask.coords(v);
            let w = if vi != ui && vj != uj { diag } else { h };
            if du + w < d[v] {
                d[v] = du + w;
                heap.push(Entry(du + w, v));
            }
        }
    }
    let (nx, ny) = mask.shape();
    Ok(DistanceField { nx, ny, values: d })
}

/// Any-angle (Theta*) distance over inside cells.
///
/// Moves go to the 8 neighbors without cutting corners; a move is shortcut
/// to the parent's parent whenever the straight segment between their
/// centers stays in inside cells. On a convex mask every value equals the
/// Euclidean distance between cell centers.
pub fn any_angle_distance(mask: &RasterMask, source: (usize, usize)) -> Result<DistanceField, RasterError> {
    if !mask.is_inside(source.0, source.1) {
        return Err(RasterError::SourceOutside(source.0, source.1));
    }
    let h = mask.pitch();
    let mut d = vec![f64::INFINITY; mask.len()];
    let mut parent = vec![usize::MAX; mask.len()];
    let mut heap = BinaryHeap::new();
    let s = mask.index(source.0, source.1);
    d[s] = 0.0;
    parent[s] = s;
    heap.push(Entry(0.0, s));
    let span = |a: usize, b: usize| {
        let (ai, aj) = mask.coords(a);
        let (bi, bj) = mask.coords(b);
        let di = ai as f64 - bi as f64;
        let dj = aj as f64 - bj as f64;
        h * (di * di + dj * dj).sqrt()
    };
    while let Some(Entry(du, u)) = heap.pop() {
        if du > d[u] {
            continue;
        }
        let (ui, uj) = mask.coords(u);
        let p = parent[u];
        for v in mask.neighbors(u, Connectivity::Eight) {
            let (vi, vj) = mask.coords(v);
            if vi != ui && vj != uj && !(mask.is_inside(vi, uj) && mask.is_inside(ui, vj)) {
                continue;
            }
            let (cand, par) = if line_of_sight(mask, p, v) {
                (d[p] + span(p, v), p)
            } else {
                (du + span(u, v), u)
            };
            if cand < d[v] {
                d[v] = cand;
                parent[v] = par;
                heap.push(Entry(cand, v));
            }
        }
    }
    let (nx, ny) = mask.shape();
    Ok(DistanceField { nx, ny, values: d })
}

/// Whether the segment between two cell centers crosses only inside cells.
/// Passing exactly through a cell corner requires both side cells.
fn line_of_sight(mask: &RasterMask, a: usize, b: usize) -> bool {
    let (mut i, mut j) = mask.coords(a);
    let (bi, bj) = mask.coords(b);
    let di = bi as i64 - i as i64;
    let dj = bj as i64 - j as i64;
    let (ni, nj) = (di.unsigned_abs(), dj.unsigned_abs());
    let (si, sj) = (di.signum(), dj.signum());
    // Crossings of vertical lines at (2k+1)/(2ni), horizontal at (2k+1)/(2nj);
    // compared exactly in integers.
    let (mut ki, mut kj) = (0u64, 0u64);
    while ki < ni || kj < nj {
        let ord = if ki == ni {
            Ordering::Greater
        } else if kj == nj {
            Ordering::Less
        } else {
            ((2 * ki + 1) * nj).cmp(&((2 * kj + 1) * ni))
        };
        match ord {
            Ordering::Less => {
                i = (i as i64 + si) as usize;
                ki += 1;
            }
            Ordering::Greater => {
                j = (j as i64 + sj) as usize;
                kj += 1;
            }
            Ordering::Equal => {
                let a = (i as i64 + si) as usize;
                let b = (j as i64 + sj) as usize;
                if !mask.is_inside(a, j) || !mask.is_inside(i, b) {
                    return false;
                }
                i = a;
                j = b;
                ki += 1;
                kj += 1;
            }
        }
        if !mask.is_inside(i, j) {
            return false;
        }
    }
    true
}
