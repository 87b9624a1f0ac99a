//! Brute-force reference implementations.
//!
//! These share no code with the fast paths in this module tree: the minimum
//! circle enumerates every pair and triple, and the hull distance tests every
//! triangle and segment spanned by the input points. Both are O(n^3) or worse
//! and meant for spot checks and tests only.

use super::{Circle, GeometryError, Vec2};

fn covers(center: Vec2, radius: f64, pts: &[Vec2]) -> bool {
    let slack = 1e-9 * (1.0 + radius);
    pts.iter().all(|p| {
        let d = ((p.x - center.x).powi(2) + (p.y - center.y).powi(2)).sqrt();
        d <= radius + slack
    })
}

/// Circumcenter by Cramer's rule on the perpendicular-bisector equations.
fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Option<Vec2> {
    // 2(b-a)·x = |b|²-|a|², 2(c-a)·x = |c|²-|a|²
    let (a11, a12) = (2.0 * (b.x - a.x), 2.0 * (b.y - a.y));
    let (a21, a22) = (2.0 * (c.x - a.x), 2.0 * (c.y - a.y));
    let r1 = b.x * b.x + b.y * b.y - a.x * a.x - a.y * a.y;
    let r2 = c.x * c.x + c.y * c.y - a.x * a.x - a.y * a.y;
    let det = a11 * a22 - a12 * a21;
    if det.abs() < 1e-12 {
        return None;
    }
    Some(Vec2::new((r1 * a22 - a12 * r2) / det, (a11 * r2 - r1 * a21) / det))
}

/// Smallest covering circle among all pair-diameter circles and triple
/// circumcircles.
pub fn min_circle_brute_force(pts: &[Vec2]) -> Result<Circle, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let mut best: Option<Circle> = None;
    let mut consider = |center: Vec2, radius: f64| {
        if best.map_or(true, |b| radius < b.radius) && covers(center, radius, pts) {
            best = Some(Circle { center, radius });
        }
    };
    consider(pts[0], 0.0);
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            let center = Vec2::new((pts[i].x + pts[j].x) / 2.0, (pts[i].y + pts[j].y) / 2.0);
            let radius = ((pts[i].x - pts[j].x).powi(2) + (pts[i].y - pts[j].y).powi(2)).sqrt() / 2.0;
            consider(center, radius);
            for k in j + 1..n {
                if let Some(center) = circumcenter(pts[i], pts[j], pts[k]) {
                    let radius = ((pts[i].x - center.x).powi(2) + (pts[i].y - center.y).powi(2)).sqrt();
                    consider(center, radius);
                }
            }
        }
    }
    Ok(best.expect("some pair or point covers the set"))
}

fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    ((a.x + t * dx - p.x).powi(2) + (a.y + t * dy - p.y).powi(2)).sqrt()
}

fn in_triangle(p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> bool {
    let s = |u: Vec2, v: Vec2| (v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x);
    let (d1, d2, d3) = (s(a, b), s(b, c), s(c, a));
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Distance from `a` to conv(`pts`).
///
/// Inside iff some triangle of input points contains `a`; otherwise the
/// distance is attained on a segment between two input points.
pub fn hull_distance_brute_force(a: Vec2, pts: &[Vec2]) -> Result<f64, GeometryError> {
    if pts.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let n = pts.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        best = best.min(segment_distance(a, pts[i], pts[i]));
        for j in i + 1..n {
            best = best.min(segment_distance(a, pts[i], pts[j]));
            for k in j + 1..n {
                if in_triangle(a, pts[i], pts[j], pts[k]) {
                    let area = (pts[j].x - pts[i].x) * (pts[k].y - pts[i].y)
                        - (pts[j].y - pts[i].y) * (pts[k].x - pts[i].x);
                    // degenerate triangles only count through their segments
                    if area != 0.0 {
                        return Ok(0.0);
                    }
                }
            }
        }
    }
    Ok(best)
}
