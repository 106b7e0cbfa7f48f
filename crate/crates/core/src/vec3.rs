//! Small helpers for `[f64; 3]` arithmetic.

use crate::model::Point3;

#[inline]
pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: Point3, b: Point3) -> f64 {
    let d = sub(a, b);
    dot(d, d)
}

#[inline]
pub fn dist(a: Point3, b: Point3) -> f64 {
    dist2(a, b).sqrt()
}

/// Unit vector, or `None` for (near) zero input.
pub fn normalize(a: Point3) -> Option<Point3> {
    let n = norm(a);
    if n > 1e-300 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn mean(points: impl IntoIterator<Item = Point3>) -> Option<Point3> {
    let mut acc = [0.0; 3];
    let mut n = 0usize;
    for p in points {
        acc = add(acc, p);
        n += 1;
    }
    (n > 0).then(|| scale(acc, 1.0 / n as f64))
}
