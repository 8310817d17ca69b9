//! Small helpers for `[f64; 3]` vectors.

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Unit vector along `a`, or `None` for the zero vector.
pub fn normalized(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Right-handed orthonormal pair `(e1, e2)` with `e1 x e2 = axis`.
///
/// For `axis = z` this is `(x, y)`; the choice is deterministic for every axis.
pub fn transverse_basis(axis: Vec3) -> (Vec3, Vec3) {
    let n = normalized(axis).unwrap_or([0.0, 0.0, 1.0]);
    let reference = if n[2].abs() > 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
    let e1 = normalized(sub(reference, scale(n, dot(reference, n)))).expect("non-degenerate reference");
    let e2 = cross(n, e1);
    (e1, e2)
}

pub fn is_parallel(a: Vec3, b: Vec3, tol: f64) -> bool {
    norm(cross(a, b)) <= tol * norm(a) * norm(b)
}
