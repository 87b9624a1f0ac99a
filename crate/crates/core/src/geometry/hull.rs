//! Convex hulls (Andrew's monotone chain) and point-to-hull queries.

use super::{GeometryError, UnitVec2, Vec2, DEDUP_EPS, EPS};

/// Convex hull of a finite point set.
///
/// Degenerate hulls keep their own variants so distance queries never have to
/// deal with zero-area polygons.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexPolygon {
    Point(Vec2),
    Segment(Vec2, Vec2),
    /// Strictly convex, counterclockwise, at least three vertices.
    Polygon(Vec<Vec2>),
}

impl ConvexPolygon {
    pub fn vertices(&self) -> Vec<Vec2> {
        match self {
            ConvexPolygon::Point(p) => vec![*p],
            ConvexPolygon::Segment(a, b) => vec![*a, *b],
            ConvexPolygon::Polygon(vs) => vs.clone(),
        }
    }

    /// True if `p` lies inside or on the boundary (exact sign tests).
    pub fn contains(&self, p: Vec2) -> bool {
        dist_to_hull(p, self) == 0.0
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

pub fn convex_hull(points: &[Vec2]) -> Result<ConvexPolygon, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }

    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() <= DEDUP_EPS && (a.y - b.y).abs() <= DEDUP_EPS);

    if pts.len() == 1 {
        return Ok(ConvexPolygon::Point(pts[0]));
    }

    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= EPS
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= EPS
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    Ok(match lower.len() {
        // every point collinear: the chains collapse onto the two extremes
        0 | 1 => ConvexPolygon::Segment(pts[0], pts[pts.len() - 1]),
        2 => ConvexPolygon::Segment(lower[0], lower[1]),
        _ => ConvexPolygon::Polygon(lower),
    })
}

fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point of the hull to `a` (`a` itself when inside).
pub fn prj_to_hull(a: Vec2, hull: &ConvexPolygon) -> Vec2 {
    match hull {
        ConvexPolygon::Point(p) => *p,
        ConvexPolygon::Segment(p, q) => closest_on_segment(a, *p, *q),
        ConvexPolygon::Polygon(vs) => {
            let n = vs.len();
            let inside = (0..n).all(|i| orient(vs[i], vs[(i + 1) % n], a) >= 0.0);
            if inside {
                return a;
            }
            let mut best = vs[0];
            let mut best_d = f64::INFINITY;
            for i in 0..n {
                let c = closest_on_segment(a, vs[i], vs[(i + 1) % n]);
                let d = (c - a).norm_squared();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        }
    }
}

/// Euclidean distance from `a` to the hull; zero inside or on the boundary.
pub fn dist_to_hull(a: Vec2, hull: &ConvexPolygon) -> f64 {
    (prj_to_hull(a, hull) - a).norm()
}

/// Unit vector from `a` toward its projection onto the hull.
pub fn uv_to_hull(a: Vec2, hull: &ConvexPolygon) -> Result<UnitVec2, GeometryError> {
    let delta = prj_to_hull(a, hull) - a;
    if delta.norm() <= EPS {
        return Err(GeometryError::PointNotOutside);
    }
    UnitVec2::new(delta).ok_or(GeometryError::PointNotOutside)
}
