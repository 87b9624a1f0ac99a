//! Minimum enclosing circle by randomized incremental construction.
//!
//! The input order is shuffled with a fixed-seed generator, so the routine is
//! randomized in the algorithmic sense while remaining a pure function.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Circle, GeometryError, Vec2};

const SHUFFLE_SEED: u64 = 0x6d63_6972_636c_6521;

/// Determinant magnitude below which a triple is treated as collinear.
const COLLINEAR_DET: f64 = 1e-12;

/// Indices (into the caller's slice) of the points that pin the circle.
///
/// Two points mean the circle has them as a diameter; three mean it is their
/// circumcircle. A single index only occurs when every input point coincides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSet {
    idx: [usize; 3],
    len: usize,
}

impl SupportSet {
    fn one(a: usize) -> Self {
        Self { idx: [a, a, a], len: 1 }
    }

    fn two(a: usize, b: usize) -> Self {
        Self { idx: [a, b, b], len: 2 }
    }

    fn three(a: usize, b: usize, c: usize) -> Self {
        Self { idx: [a, b, c], len: 3 }
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    circle: Circle,
    support: SupportSet,
}

fn diameter(pts: &[Vec2], a: usize, b: usize) -> Candidate {
    let center = (pts[a] + pts[b]) * 0.5;
    let radius = center.distance(pts[a]).max(center.distance(pts[b]));
    Candidate {
        circle: Circle::new(center, radius),
        support: SupportSet::two(a, b),
    }
}

/// Circumcircle of a triple, or the diameter circle of its two farthest points
/// when the triple is (nearly) collinear.
fn circumcircle(pts: &[Vec2], a: usize, b: usize, c: usize) -> Candidate {
    let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
    // translate to the bounding-box center for conditioning
    let ox = (pa.x.min(pb.x).min(pc.x) + pa.x.max(pb.x).max(pc.x)) / 2.0;
    let oy = (pa.y.min(pb.y).min(pc.y) + pa.y.max(pb.y).max(pc.y)) / 2.0;
    let o = Vec2::new(ox, oy);
    let (u, v, w) = (pa - o, pb - o, pc - o);
    let d = 2.0 * (u.x * (v.y - w.y) + v.x * (w.y - u.y) + w.x * (u.y - v.y));
    if d.abs() < COLLINEAR_DET {
        let pairs = [(a, b), (a, c), (b, c)];
        let (i, j) = pairs
            .into_iter()
            .max_by(|p, q| {
                let dp = pts[p.0].distance(pts[p.1]);
                let dq = pts[q.0].distance(pts[q.1]);
                dp.total_cmp(&dq)
            })
            .expect("three pairs");
        return diameter(pts, i, j);
    }
    let (su, sv, sw) = (u.norm_squared(), v.norm_squared(), w.norm_squared());
    let x = (su * (v.y - w.y) + sv * (w.y - u.y) + sw * (u.y - v.y)) / d;
    let y = (su * (w.x - v.x) + sv * (u.x - w.x) + sw * (v.x - u.x)) / d;
    let center = o + Vec2::new(x, y);
    let radius = center
        .distance(pa)
        .max(center.distance(pb))
        .max(center.distance(pc));
    Candidate {
        circle: Circle::new(center, radius),
        support: SupportSet::three(a, b, c),
    }
}

/// Smallest circle covering every point; also returns the 2 or 3 points that
/// determine it. The center always lies in the convex hull of the input.
pub fn min_enclosing_circle(points: &[Vec2]) -> Result<(Circle, SupportSet), GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(SHUFFLE_SEED));

    let mut best = Candidate {
        circle: Circle::new(points[order[0]], 0.0),
        support: SupportSet::one(order[0]),
    };
    for (i, &p) in order.iter().enumerate().skip(1) {
        if !best.circle.contains(points[p]) {
            best = with_one_boundary(points, &order[..i], p);
        }
    }
    Ok((best.circle, best.support))
}

/// Smallest circle covering `prefix` with `p` on its boundary.
fn with_one_boundary(pts: &[Vec2], prefix: &[usize], p: usize) -> Candidate {
    let mut c = Candidate {
        circle: Circle::new(pts[p], 0.0),
        support: SupportSet::one(p),
    };
    for (j, &q) in prefix.iter().enumerate() {
        if !c.circle.contains(pts[q]) {
            c = if c.support.len() == 1 {
                diameter(pts, p, q)
            } else {
                with_two_boundary(pts, &prefix[..j], p, q)
            };
        }
    }
    c
}

/// Smallest circle covering `prefix` with both `p` and `q` on its boundary.
fn with_two_boundary(pts: &[Vec2], prefix: &[usize], p: usize, q: usize) -> Candidate {
    let base = diameter(pts, p, q);
    let (pp, pq) = (pts[p], pts[q]);
    let side = |x: Vec2| (pq - pp).cross(x - pp);

    let mut left: Option<Candidate> = None;
    let mut right: Option<Candidate> = None;
    for &r in prefix {
        if base.circle.contains(pts[r]) {
            continue;
        }
        let cross = side(pts[r]);
        let cand = circumcircle(pts, p, q, r);
        let cc = side(cand.circle.center);
        if cross > 0.0 {
            if left.map_or(true, |l| cc > side(l.circle.center)) {
                left = Some(cand);
            }
        } else if cross < 0.0 {
            if right.map_or(true, |rt| cc < side(rt.circle.center)) {
                right = Some(cand);
            }
        } else if left.is_none() && right.is_none() {
            // r exactly on line pq and outside the diameter circle
            left = Some(cand);
        }
    }
    match (left, right) {
        (None, None) => base,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.circle.radius <= r.circle.radius {
                l
            } else {
                r
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::oracle;

    #[test]
    fn case1_targets() {
        let pts = [
            Vec2::new(-2.0, 0.0),
            Vec2::new(4.0, 5.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 1.0),
        ];
        let (c, s) = min_enclosing_circle(&pts).unwrap();
        assert!((c.center - Vec2::new(1.0, 2.5)).norm() < 1e-12);
        assert!((c.radius - 61f64.sqrt() / 2.0).abs() < 1e-12);
        let mut idx = s.indices().to_vec();
        idx.sort();
        assert_eq!(idx, vec![0, 1]);
        // frozen from the brute-force oracle
        let o = oracle::min_circle_brute_force(&pts).unwrap();
        assert!((o.radius - 3.905124837953327).abs() < 1e-12);
    }

    #[test]
    fn two_points_and_one_point() {
        let (c, s) = min_enclosing_circle(&[Vec2::ZERO, Vec2::new(2.0, 0.0)]).unwrap();
        assert_eq!(c.center, Vec2::new(1.0, 0.0));
        assert_eq!(c.radius, 1.0);
        assert_eq!(s.len(), 2);

        let (c, s) = min_enclosing_circle(&[Vec2::ZERO]).unwrap();
        assert_eq!(c, Circle::new(Vec2::ZERO, 0.0));
        assert_eq!(s.indices(), &[0]);
    }

    #[test]
    fn equilateral_needs_three_support_points() {
        let h = 3f64.sqrt() / 2.0;
        let pts = [Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 2.0 * h)];
        let (c, s) = min_enclosing_circle(&pts).unwrap();
        assert_eq!(s.len(), 3);
        assert!((c.radius - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_and_duplicate_inputs() {
        let pts = [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(3.0, 0.0),
        ];
        let (c, s) = min_enclosing_circle(&pts).unwrap();
        assert!((c.center - Vec2::new(1.5, 0.0)).norm() < 1e-12);
        assert!((c.radius - 1.5).abs() < 1e-12);
        assert_eq!(s.len(), 2);

        let same = [Vec2::new(4.0, 4.0); 5];
        let (c, s) = min_enclosing_circle(&same).unwrap();
        assert_eq!(c.radius, 0.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn nearly_collinear_triple_falls_back_to_diameter() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 1e-14), Vec2::new(2.0, 0.0)];
        let (c, _) = min_enclosing_circle(&pts).unwrap();
        assert!((c.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(min_enclosing_circle(&[]), Err(GeometryError::EmptyPointSet));
    }
}
