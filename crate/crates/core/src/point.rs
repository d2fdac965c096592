//! Fixed-dimension point arithmetic on plain arrays.

/// A point (or displacement) in `D`-dimensional Euclidean space.
pub type Point<const D: usize> = [f64; D];

#[inline]
pub fn zero<const D: usize>() -> Point<D> {
    [0.0; D]
}

#[inline]
pub fn add<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    std::array::from_fn(|k| a[k] + b[k])
}

#[inline]
pub fn sub<const D: usize>(a: &Point<D>, b: &Point<D>) -> Point<D> {
    std::array::from_fn(|k| a[k] - b[k])
}

#[inline]
pub fn scale<const D: usize>(a: &Point<D>, s: f64) -> Point<D> {
    std::array::from_fn(|k| a[k] * s)
}

/// `a + s * b`
#[inline]
pub fn axpy<const D: usize>(a: &Point<D>, s: f64, b: &Point<D>) -> Point<D> {
    std::array::from_fn(|k| a[k] + s * b[k])
}

#[inline]
pub fn dot<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2<const D: usize>(a: &Point<D>) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm<const D: usize>(a: &Point<D>) -> f64 {
    norm2(a).sqrt()
}

#[inline]
pub fn dist2<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist<const D: usize>(a: &Point<D>, b: &Point<D>) -> f64 {
    dist2(a, b).sqrt()
}

/// Lexicographic comparison after snapping coordinates to a `1e-12` lattice,
/// so that candidates differing only by rounding noise compare equal.
pub fn lex_cmp_snapped<const D: usize>(a: &Point<D>, b: &Point<D>) -> std::cmp::Ordering {
    const SNAP: f64 = 1e-12;
    for k in 0..D {
        let sa = (a[k] / SNAP).round();
        let sb = (b[k] / SNAP).round();
        match sa.partial_cmp(&sb) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => {
            // ω_d = 2π/d · ω_{d-2}
            2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2)
        }
    }
}

pub fn to_vec<const D: usize>(p: &Point<D>) -> Vec<f64> {
    p.to_vec()
}

/// Converts a slice of the right length into a point.
pub fn from_slice<const D: usize>(v: &[f64]) -> Option<Point<D>> {
    <[f64; D]>::try_from(v).ok()
}
