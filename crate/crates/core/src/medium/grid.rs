//! Uniform-cell spatial hash over a fixed point set.

use crate::point::{dist, Point};

/// Upper bound on the number of cells relative to the number of points;
/// sparse configurations with tiny radii coarsen the cell instead of
/// allocating an enormous table.
const MAX_CELLS_PER_POINT: usize = 64;
const MIN_CELL_BUDGET: usize = 1 << 16;

/// Dense CSR bucket grid. Cell side is at least the requested size, so any
/// query of radius ≤ `cell_size()` inspects at most `3^D` cells.
#[derive(Debug, Clone)]
pub struct SpatialGrid<const D: usize> {
    origin: Point<D>,
    cell: f64,
    dims: [usize; D],
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl<const D: usize> SpatialGrid<D> {
    pub fn new(points: &[Point<D>], cell_size: f64) -> Self {
        assert!(cell_size > 0.0 && cell_size.is_finite());
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for p in points {
            for k in 0..D {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if points.is_empty() {
            lo = [0.0; D];
            hi = [0.0; D];
        }
        let budget = (points.len() * MAX_CELLS_PER_POINT).max(MIN_CELL_BUDGET);
        let mut cell = cell_size;
        let dims = loop {
            let dims: [usize; D] =
                std::array::from_fn(|k| ((hi[k] - lo[k]) / cell).floor() as usize + 1);
            let total = dims.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
            match total {
                Some(t) if t <= budget => break dims,
                _ => cell *= 2.0,
            }
        };
        let ncells: usize = dims.iter().product();
        let mut grid = SpatialGrid {
            origin: lo,
            cell,
            dims,
            starts: vec![0; ncells + 1],
            items: vec![0; points.len()],
        };
        let flat: Vec<usize> = points
            .iter()
            .map(|p| grid.flat_index(&grid.cell_coords(p)).expect("point inside grid"))
            .collect();
        for &f in &flat {
            grid.starts[f + 1] += 1;
        }
        for i in 0..ncells {
            grid.starts[i + 1] += grid.starts[i];
        }
        let mut fill = grid.starts.clone();
        for (i, &f) in flat.iter().enumerate() {
            grid.items[fill[f] as usize] = i as u32;
            fill[f] += 1;
        }
        grid
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn cell_coords(&self, p: &Point<D>) -> [i64; D] {
        std::array::from_fn(|k| ((p[k] - self.origin[k]) / self.cell).floor() as i64)
    }

    fn flat_index(&self, c: &[i64; D]) -> Option<usize> {
        let mut idx = 0usize;
        for k in (0..D).rev() {
            if c[k] < 0 || c[k] as usize >= self.dims[k] {
                return None;
            }
            idx = idx * self.dims[k] + c[k] as usize;
        }
        Some(idx)
    }

    fn cell_items(&self, flat: usize) -> &[u32] {
        &self.items[self.starts[flat] as usize..self.starts[flat + 1] as usize]
    }

    /// Visits every item in the `3^D` block of cells around `p`. Covers all
    /// items within `cell_size()` of `p`.
    #[inline]
    pub fn for_each_near(&self, p: &Point<D>, mut f: impl FnMut(usize)) {
        let c = self.cell_coords(p);
        let lo: [i64; D] = std::array::from_fn(|k| (c[k] - 1).max(0));
        let hi: [i64; D] = std::array::from_fn(|k| (c[k] + 1).min(self.dims[k] as i64 - 1));
        self.for_each_in_block(&lo, &hi, |flat| {
            for &i in self.cell_items(flat) {
                f(i as usize);
            }
        });
    }

    /// Like [`for_each_near`](Self::for_each_near) but stops as soon as `f`
    /// returns `true`; returns whether it stopped.
    #[inline]
    pub fn any_near(&self, p: &Point<D>, mut f: impl FnMut(usize) -> bool) -> bool {
        let c = self.cell_coords(p);
        let lo: [i64; D] = std::array::from_fn(|k| (c[k] - 1).max(0));
        let hi: [i64; D] = std::array::from_fn(|k| (c[k] + 1).min(self.dims[k] as i64 - 1));
        let mut found = false;
        self.for_each_in_block(&lo, &hi, |flat| {
            if found {
                return;
            }
            for &i in self.cell_items(flat) {
                if f(i as usize) {
                    found = true;
                    return;
                }
            }
        });
        found
    }

    fn for_each_in_block(&self, lo: &[i64; D], hi: &[i64; D], mut f: impl FnMut(usize)) {
        if (0..D).any(|k| lo[k] > hi[k]) {
            return;
        }
        let mut c = *lo;
        loop {
            if let Some(flat) = self.flat_index(&c) {
                f(flat);
            }
            let mut k = 0;
            loop {
                if k == D {
                    return;
                }
                c[k] += 1;
                if c[k] <= hi[k] {
                    break;
                }
                c[k] = lo[k];
                k += 1;
            }
        }
    }

    /// All items at minimal distance from `p` (ties within `tol`), together
    /// with that distance. Empty when the grid holds no items.
    pub fn nearest(&self, points: &[Point<D>], p: &Point<D>, tol: f64) -> (f64, Vec<usize>) {
        if points.is_empty() {
            return (f64::INFINITY, Vec::new());
        }
        let c = self.cell_coords(p);
        // Chebyshev ring distance from p's cell to the grid box.
        let start = (0..D)
            .map(|k| {
                if c[k] < 0 {
                    -c[k]
                } else if c[k] >= self.dims[k] as i64 {
                    c[k] - self.dims[k] as i64 + 1
                } else {
                    0
                }
            })
            .max()
            .unwrap_or(0);
        let last = (0..D)
            .map(|k| c[k].abs().max((self.dims[k] as i64 - 1 - c[k]).abs()))
            .max()
            .unwrap_or(0);
        let mut best = f64::INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for r in start..=last {
            if best.is_finite() && (r - 1) as f64 * self.cell > best + tol {
                break;
            }
            let lo: [i64; D] = std::array::from_fn(|k| (c[k] - r).max(0));
            let hi: [i64; D] = std::array::from_fn(|k| (c[k] + r).min(self.dims[k] as i64 - 1));
            let mut cc = lo;
            if (0..D).any(|k| lo[k] > hi[k]) {
                continue;
            }
            loop {
                let cheb = (0..D).map(|k| (cc[k] - c[k]).abs()).max().unwrap_or(0);
                if cheb == r {
                    if let Some(flat) = self.flat_index(&cc) {
                        for &i in self.cell_items(flat) {
                            let d = dist(p, &points[i as usize]);
                            if d < best - tol {
                                best = d;
                                ties.retain(|&j| dist(p, &points[j]) <= best + tol);
                                ties.push(i as usize);
                            } else if d <= best + tol {
                                best = best.min(d);
                                ties.push(i as usize);
                            }
                        }
                    }
                }
                let mut k = 0;
                let done = loop {
                    if k == D {
                        break true;
                    }
                    cc[k] += 1;
                    if cc[k] <= hi[k] {
                        break false;
                    }
                    cc[k] = lo[k];
                    k += 1;
                };
                if done {
                    break;
                }
            }
        }
        ties.retain(|&j| dist(p, &points[j]) <= best + tol);
        ties.sort_unstable();
        (best, ties)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_nearest(points: &[[f64; 2]], p: &[f64; 2]) -> f64 {
        points
            .iter()
            .map(|q| dist(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn near_query_covers_cell_radius() {
        let pts = vec![[0.0, 0.0], [1.9, 0.0], [4.5, 0.0], [0.0, -1.99]];
        let g = SpatialGrid::new(&pts, 2.0);
        let mut seen = Vec::new();
        g.for_each_near(&[0.0, 0.0], |i| seen.push(i));
        seen.sort();
        assert!(seen.contains(&0) && seen.contains(&1) && seen.contains(&3));
    }

    proptest! {
        #[test]
        fn nearest_matches_brute_force(
            pts in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..60),
            q in (-60.0f64..60.0, -60.0f64..60.0),
            cell in 0.5f64..5.0,
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let g = SpatialGrid::new(&pts, cell);
            let p = [q.0, q.1];
            let (d, ties) = g.nearest(&pts, &p, 1e-12);
            prop_assert!((d - brute_nearest(&pts, &p)).abs() < 1e-12);
            prop_assert!(!ties.is_empty());
            for &i in &ties {
                prop_assert!((dist(&p, &pts[i]) - d).abs() <= 1e-12);
            }
        }
    }
}
