/// A convex polygon as a counter-clockwise vertex list.
pub type Polygon = Vec<[f64; 2]>;

/// Clips a convex polygon to the half-plane `{p : n · (p - m) <= 0}`.
pub fn clip_halfplane(poly: &[[f64; 2]], m: [f64; 2], n: [f64; 2]) -> Polygon {
    let side = |p: &[f64; 2]| n[0] * (p[0] - m[0]) + n[1] * (p[1] - m[1]);
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (sa, sb) = (side(&a), side(&b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let t = sa / (sa - sb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Shoelace area (positive for counter-clockwise polygons).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * acc
}

/// Point-in-convex-polygon test with absolute slack `eps` on each edge.
pub fn polygon_contains(poly: &[[f64; 2]], p: [f64; 2], eps: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        cross >= -eps * len.max(f64::MIN_POSITIVE)
    })
}
