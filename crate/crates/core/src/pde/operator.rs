use super::field::{CoefficientField, FaceMean};
use crate::raster::RasterMask;

/// Five-point finite-volume form of `∇·(a∇u)` on a subset of cells, with
/// zero flux through every face that leaves the subset. Only the diagonal
/// of `a` enters: `a11` on x-faces, `a22` on y-faces.
#[derive(Debug, Clone)]
pub(crate) struct Operator {
    pub cells: Vec<usize>,
    pub slot: Vec<usize>,
    start: Vec<usize>,
    col: Vec<u32>,
    w: Vec<f64>,
    diag: Vec<f64>,
    // Fixed four-slot copy of the stencil; absent faces point at the cell
    // itself with weight 0.
    nb4: Vec<[u32; 4]>,
    w4: Vec<[f64; 4]>,
}

impl Operator {
    pub fn new(mask: &RasterMask, field: &CoefficientField, member: &[bool], scale: f64, mean: FaceMean) -> Self {
        let (nx, ny) = mask.shape();
        let mut slot = vec![usize::MAX; nx * ny];
        let mut cells = Vec::new();
        for (k, &m) in member.iter().enumerate() {
            if m {
                slot[k] = cells.len();
                cells.push(k);
            }
        }
        let h2 = mask.pitch() * mask.pitch();
        let mut start = Vec::with_capacity(cells.len() + 1);
        let mut col = Vec::new();
        let mut w = Vec::new();
        let mut diag = Vec::with_capacity(cells.len());
        start.push(0);
        for &k in &cells {
            let (i, j) = mask.coords(k);
            let a = field.at(k);
            let mut sum = 0.0;
            let nbrs = [
                (i + 1 < nx).then(|| (k + 1, 0)),
                (i > 0).then(|| (k - 1, 0)),
                (j + 1 < ny).then(|| (k + nx, 2)),
                (j > 0).then(|| (k - nx, 2)),
            ];
            for (q, comp) in nbrs.into_iter().flatten() {
                if slot[q] == usize::MAX {
                    continue;
                }
                let c = scale * mean.combine(a[comp], field.at(q)[comp]) / h2;
                col.push(slot[q] as u32);
                w.push(c);
                sum += c;
            }
            diag.push(sum);
            start.push(col.len());
        }
        let mut nb4 = Vec::with_capacity(cells.len());
        let mut w4 = Vec::with_capacity(cells.len());
        for p in 0..cells.len() {
            let mut n = [p as u32; 4];
            let mut c = [0.0; 4];
            for (s, e) in (start[p]..start[p + 1]).enumerate() {
                n[s] = col[e];
                c[s] = w[e];
            }
            nb4.push(n);
            w4.push(c);
        }
        Operator {
            cells,
            slot,
            start,
            col,
            w,
            diag,
            nb4,
            w4,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn max_diag(&self) -> f64 {
        self.diag.iter().cloned().fold(0.0, f64::max)
    }

    /// `out = L u`, written as sums of face fluxes `w (u_q − u_p)`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for p in 0..self.cells.len() {
            let up = u[p];
            let mut s = 0.0;
            for e in self.start[p]..self.start[p + 1] {
                s += self.w[e] * (u[self.col[e] as usize] - up);
            }
            out[p] = s;
        }
    }

    /// Forward Euler `out = u + dt L u`; returns `Σ out`.
    pub fn explicit_step(&self, dt: f64, u: &[f64], out: &mut [f64]) -> f64 {
        let mut total = 0.0;
        for (p, (n, w)) in self.nb4.iter().zip(&self.w4).enumerate() {
            let up = u[p];
            let flux = w[0] * (u[n[0] as usize] - up)
                + w[1] * (u[n[1] as usize] - up)
                + w[2] * (u[n[2] as usize] - up)
                + w[3] * (u[n[3] as usize] - up);
            let v = up + dt * flux;
            out[p] = v;
            total += v;
        }
        total
    }

    /// `out = u − dt L u`.
    pub fn apply_shifted(&self, dt: f64, u: &[f64], out: &mut [f64]) {
        self.apply(u, out);
        for (o, &x) in out.iter_mut().zip(u) {
            *o = x - dt * *o;
        }
    }

    /// Whether the unknowns form one component under face adjacency.
    pub fn is_connected(&self) -> bool {
        if self.cells.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = stack.pop() {
            for e in self.start[p]..self.start[p + 1] {
                let q = self.col[e] as usize;
                if !seen[q] {
                    seen[q] = true;
                    count += 1;
                    stack.push(q);
                }
            }
        }
        count == self.cells.len()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= m;
    }
}

/// Conjugate gradients for an SPD `apply` (or PSD on the mean-zero
/// subspace when `deflate`). Returns the iteration count and final
/// relative residual.
pub(crate) fn cg(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
    deflate: bool,
) -> (usize, f64) {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return (0, 0.0);
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if deflate {
        remove_mean(&mut r);
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while rr.sqrt() > rel_tol * bnorm && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if deflate {
            remove_mean(&mut r);
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
        it += 1;
    }
    if deflate {
        remove_mean(x);
    }
    (it, rr.sqrt() / bnorm)
}
