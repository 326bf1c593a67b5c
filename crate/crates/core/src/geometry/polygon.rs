use rand::Rng;
use serde::{Deserialize, Serialize};

use super::point::{Aabb, Point, Segment};
use crate::error::{Error, Result};

/// The closed half-plane `normal · x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point, offset: f64) -> Self {
        HalfPlane { normal, offset }
    }

    /// Signed violation; non-positive means inside.
    pub fn eval(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Same half-plane moved inward by `margin` (normal need not be unit length).
    pub fn inset(&self, margin: f64) -> HalfPlane {
        HalfPlane::new(self.normal, self.offset - margin * self.normal.norm())
    }
}

/// Area, centroid and bounding box of a polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub area: f64,
    pub centroid: Point,
    pub aabb: Aabb,
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates orientation and convexity. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Geometry("polygon has non-finite vertex".into()));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let area = signed_area(&vertices);
        let diag = Aabb::from_points(&vertices).map(|b| b.diagonal()).unwrap_or(0.0);
        if area <= 1e-12 * diag * diag {
            return Err(Error::Geometry("degenerate polygon (zero area)".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -1e-9 * diag * diag {
                return Err(Error::Geometry("polygon is not convex".into()));
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point>) -> Self {
        ConvexPolygon { vertices }
    }

    /// Axis-aligned rectangle with lower-left corner `min`.
    pub fn rectangle(min: Point, width: f64, height: f64) -> Result<Self> {
        ConvexPolygon::new(vec![
            min,
            Point::new(min.x + width, min.y),
            Point::new(min.x + width, min.y + height),
            Point::new(min.x, min.y + height),
        ])
    }

    pub fn square(min: Point, size: f64) -> Result<Self> {
        ConvexPolygon::rectangle(min, size, size)
    }

    /// Regular `n`-gon inscribed in the circle of `radius` around `center`,
    /// first vertex at angle zero.
    pub fn regular(n: usize, center: Point, radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Geometry("regular polygon needs n >= 3".into()));
        }
        let vertices = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                center + Point::new(t.cos(), t.sin()) * radius
            })
            .collect();
        ConvexPolygon::new(vertices)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.vertices).expect("polygon has vertices")
    }

    pub fn centroid(&self) -> Point {
        let o = self.vertices[0];
        let n = self.vertices.len();
        let mut a2 = 0.0;
        let mut c = Point::ORIGIN;
        for i in 1..n - 1 {
            let p = self.vertices[i] - o;
            let q = self.vertices[i + 1] - o;
            let cr = p.cross(q);
            a2 += cr;
            c += (p + q) * cr;
        }
        o + c / (3.0 * a2)
    }

    /// Area, centroid and bounding box; fails on polygons whose area is
    /// below `1e-12 * scale^2`.
    pub fn measures(&self, scale: f64) -> Result<Measures> {
        let area = self.area();
        if !(area > 1e-12 * scale * scale) {
            return Err(Error::Geometry(format!("degenerate polygon with area {area:e}")));
        }
        Ok(Measures { area, centroid: self.centroid(), aabb: self.aabb() })
    }

    /// `∫ ‖x − p‖² dx` over the polygon.
    pub fn second_moment(&self, p: Point) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let u = self.vertices[i] - p;
                let v = self.vertices[(i + 1) % n] - p;
                u.cross(v) / 12.0 * (u.dot(u) + u.dot(v) + v.dot(v))
            })
            .sum()
    }

    /// Interior half-planes, one per edge.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        self.edges()
            .map(|e| {
                // outward normal of a ccw edge is the clockwise perpendicular
                let d = e.b - e.a;
                let normal = Point::new(d.y, -d.x);
                HalfPlane::new(normal, normal.dot(e.a))
            })
            .collect()
    }

    /// Largest signed distance outside any edge (negative when strictly inside).
    pub fn outside_distance(&self, p: Point) -> f64 {
        self.half_planes()
            .iter()
            .map(|h| h.eval(p) / h.normal.norm())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.outside_distance(p) <= tol
    }

    /// Intersection with a half-plane; `None` when (numerically) empty.
    pub fn clip(&self, h: &HalfPlane) -> Option<ConvexPolygon> {
        clip_vertices(&self.vertices, h).map(ConvexPolygon::from_ccw_unchecked)
    }

    /// Largest `t` in `[0, 1]` such that `from + t * delta` stays inside the
    /// polygon shrunk by `margin`. Returns 0 when `from` is already outside
    /// the shrunk polygon.
    pub fn ray_limit(&self, from: Point, delta: Point, margin: f64) -> f64 {
        let mut t_max: f64 = 1.0;
        for h in self.half_planes() {
            let h = h.inset(margin);
            let start = h.eval(from);
            if start > 0.0 {
                return 0.0;
            }
            let rate = h.normal.dot(delta);
            if rate > 0.0 {
                t_max = t_max.min(-start / rate);
            }
        }
        t_max.max(0.0)
    }

    /// Uniform random point strictly inside, by rejection from the bounding box.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let bb = self.aabb();
        let tol = -1e-9 * bb.diagonal();
        loop {
            let p = Point::new(
                rng.gen_range(bb.min.x..=bb.max.x),
                rng.gen_range(bb.min.y..=bb.max.y),
            );
            if self.outside_distance(p) < tol {
                return p;
            }
        }
    }

    /// Largest centered axis-aligned box with the given aspect (width/height,
    /// may be 0 or infinite) that fits inside the polygon. The box is centered
    /// at the polygon centroid and returned as (center, half_width, half_height).
    pub fn inscribed_box(&self, aspect: f64) -> (Point, f64, f64) {
        let c = self.centroid();
        let (hx, hy) = if aspect.is_infinite() {
            (1.0, 0.0)
        } else if aspect <= 0.0 || aspect.is_nan() {
            (0.0, 1.0)
        } else {
            (aspect, 1.0)
        };
        let mut s = f64::INFINITY;
        for h in self.half_planes() {
            let room = h.offset - h.normal.dot(c);
            let reach = h.normal.x.abs() * hx + h.normal.y.abs() * hy;
            if reach > 0.0 {
                s = s.min(room / reach);
            }
        }
        (c, s * hx, s * hy)
    }

    /// Moves each vertex that lies within `tol` of one of `boundary`'s edges
    /// onto that edge.
    pub(crate) fn snap_to(&mut self, boundary: &ConvexPolygon, tol: f64) {
        for v in self.vertices.iter_mut() {
            for e in boundary.edges() {
                let d = e.b - e.a;
                let len_sq = d.norm_sq();
                let t = (*v - e.a).dot(d) / len_sq;
                if !(-1e-9..=1.0 + 1e-9).contains(&t) {
                    continue;
                }
                let foot = e.a + d * t;
                if foot.dist(*v) <= tol {
                    *v = foot;
                }
            }
        }
    }
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let o = v[0];
    let mut a2 = 0.0;
    for i in 1..n - 1 {
        a2 += (v[i] - o).cross(v[i + 1] - o);
    }
    0.5 * a2
}

/// Sutherland–Hodgman step against a single half-plane, followed by removal of
/// duplicate and collinear vertices.
pub(crate) fn clip_vertices(v: &[Point], h: &HalfPlane) -> Option<Vec<Point>> {
    let n = v.len();
    let d: Vec<f64> = v.iter().map(|&p| h.eval(p)).collect();
    if d.iter().all(|&x| x <= 0.0) {
        return Some(v.to_vec());
    }
    if d.iter().all(|&x| x >= 0.0) {
        return None;
    }
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, q) = (v[i], v[j]);
        let (dp, dq) = (d[i], d[j]);
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    cleanup(out)
}

fn cleanup(v: Vec<Point>) -> Option<Vec<Point>> {
    if v.len() < 3 {
        return None;
    }
    let diag = Aabb::from_points(&v)?.diagonal();
    let eps = 1e-12 * diag;
    let mut out: Vec<Point> = Vec::with_capacity(v.len());
    for p in v {
        if out.last().map_or(true, |q: &Point| q.dist(p) > eps) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].dist(*out.last().unwrap()) <= eps {
        out.pop();
    }
    // drop vertices where the boundary does not turn
    let mut changed = true;
    while changed && out.len() >= 3 {
        changed = false;
        let n = out.len();
        for i in 0..n {
            let a = out[(i + n - 1) % n];
            let b = out[i];
            let c = out[(i + 1) % n];
            if (b - a).cross(c - b).abs() <= 1e-14 * diag * diag {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    if out.len() < 3 || signed_area(&out) <= 1e-14 * diag * diag {
        return None;
    }
    Some(out)
}
