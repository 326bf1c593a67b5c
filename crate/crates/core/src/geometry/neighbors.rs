use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::point::{Aabb, Segment};
use super::polygon::ConvexPolygon;
use super::power::Diagram;
use crate::par;

/// Geometric adjacency between all cells of one hierarchy level.
///
/// Cells are indexed in level order: diagrams in the given order, cells in
/// diagram order. Two cells are neighbors when they own collinear edges that
/// overlap by more than the tolerance, including across diagram boundaries.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NeighborMap {
    ids: Vec<String>,
    locations: Vec<(usize, usize)>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pairs: BTreeMap<(usize, usize), Vec<Segment>>,
    adjacency: Vec<Vec<usize>>,
}

impl NeighborMap {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        if self.index.is_empty() && !self.ids.is_empty() {
            return self.ids.iter().position(|x| x == id);
        }
        self.index.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> &str {
        &self.ids[idx]
    }

    /// (diagram index, cell index) of a level-wide cell index.
    pub fn location(&self, idx: usize) -> (usize, usize) {
        self.locations[idx]
    }

    pub fn neighbors(&self, idx: usize) -> &[usize] {
        &self.adjacency[idx]
    }

    pub fn are_neighbors_idx(&self, a: usize, b: usize) -> bool {
        self.pairs.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn are_neighbors(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(x), Some(y)) => self.are_neighbors_idx(x, y),
            _ => false,
        }
    }

    pub fn shared_segments_idx(&self, a: usize, b: usize) -> &[Segment] {
        self.pairs.get(&(a.min(b), a.max(b))).map_or(&[], Vec::as_slice)
    }

    pub fn shared_segments(&self, a: &str, b: &str) -> &[Segment] {
        match (self.index_of(a), self.index_of(b)) {
            (Some(x), Some(y)) => self.shared_segments_idx(x, y),
            _ => &[],
        }
    }

    /// All adjacent pairs as ids, in canonical index order.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, &[Segment])> + '_ {
        self.pairs
            .iter()
            .map(|(&(a, b), s)| (self.ids[a].as_str(), self.ids[b].as_str(), s.as_slice()))
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Builds a map from explicit adjacency, for graph-only consumers (tests,
    /// replay of externally produced layouts).
    pub fn from_pairs(ids: Vec<String>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = ids.len();
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if a != b {
                map.insert((a.min(b), a.max(b)), Vec::new());
            }
        }
        Self::assemble(ids, (0..n).map(|i| (0, i)).collect(), map)
    }

    fn assemble(
        ids: Vec<String>,
        locations: Vec<(usize, usize)>,
        pairs: BTreeMap<(usize, usize), Vec<Segment>>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); ids.len()];
        for &(a, b) in pairs.keys() {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        NeighborMap { ids, locations, index, pairs, adjacency }
    }
}

/// Overlap of two edges if they are collinear within `line_tol` and share a
/// stretch longer than `min_len`.
pub fn edge_overlap(e1: &Segment, e2: &Segment, line_tol: f64, min_len: f64) -> Option<Segment> {
    let (r, o) = if e1.length() >= e2.length() { (e1, e2) } else { (e2, e1) };
    let len = r.length();
    if len <= min_len {
        return None;
    }
    if r.distance_to_line(o.a) > line_tol || r.distance_to_line(o.b) > line_tol {
        return None;
    }
    let u = (r.b - r.a) / len;
    let ta = (o.a - r.a).dot(u);
    let tb = (o.b - r.a).dot(u);
    let lo = ta.min(tb).max(0.0);
    let hi = ta.max(tb).min(len);
    if hi - lo > min_len {
        Some(Segment::new(r.a + u * lo, r.a + u * hi))
    } else {
        None
    }
}

/// Shared boundary stretches of two polygons.
pub fn shared_boundary(p: &ConvexPolygon, q: &ConvexPolygon, tol: f64) -> Vec<Segment> {
    let line_tol = tol * 1e-3;
    let mut out = Vec::new();
    for e1 in p.edges() {
        let b1 = Aabb::from_points(&[e1.a, e1.b]).unwrap();
        for e2 in q.edges() {
            let b2 = Aabb::from_points(&[e2.a, e2.b]).unwrap();
            if !b1.overlaps(&b2, line_tol) {
                continue;
            }
            if let Some(s) = edge_overlap(&e1, &e2, line_tol, tol) {
                out.push(s);
            }
        }
    }
    out
}

/// Default overlap tolerance for a given scale.
pub fn default_tolerance(scale: f64) -> f64 {
    1e-6 * scale
}

/// Computes the neighbor map of all cells of the given same-level diagrams.
pub fn cell_neighbors(level_diagrams: &[Diagram], tol: f64) -> NeighborMap {
    let mut ids = Vec::new();
    let mut locations = Vec::new();
    let mut polys: Vec<Option<(&ConvexPolygon, Aabb)>> = Vec::new();
    for (di, d) in level_diagrams.iter().enumerate() {
        for (ci, c) in d.cells.iter().enumerate() {
            ids.push(c.node_id.clone());
            locations.push((di, ci));
            polys.push(c.polygon.as_ref().map(|p| (p, p.aabb())));
        }
    }
    let n = ids.len();
    let rows: Vec<Vec<((usize, usize), Vec<Segment>)>> = par::map_range(n, |i| {
        let mut row = Vec::new();
        let Some((pi, bi)) = polys[i] else { return row };
        for (j, other) in polys.iter().enumerate().skip(i + 1) {
            let Some((pj, bj)) = other else { continue };
            if !bi.overlaps(bj, tol) {
                continue;
            }
            let segs = shared_boundary(pi, pj, tol);
            if !segs.is_empty() {
                row.push(((i, j), segs));
            }
        }
        row
    });
    let pairs = rows.into_iter().flatten().collect();
    NeighborMap::assemble(ids, locations, pairs)
}

/// Total length of a cell's edges lying on the line through `s`.
pub fn collinear_extent(poly: &ConvexPolygon, s: &Segment, tol: f64) -> f64 {
    let line_tol = tol * 1e-3;
    poly.edges()
        .filter(|e| s.distance_to_line(e.a) <= line_tol && s.distance_to_line(e.b) <= line_tol)
        .map(|e| e.length())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point::Point;
    use crate::geometry::power::Cell;

    fn half_squares() -> Vec<Diagram> {
        let b = ConvexPolygon::square(Point::ORIGIN, 2.0).unwrap();
        let scale = b.aabb().diagonal();
        vec![Diagram::build(
            b,
            vec![
                Cell::new("a", Point::new(0.5, 1.0), 0.0, 0.5),
                Cell::new("b", Point::new(1.5, 1.0), 0.0, 0.5),
            ],
            1,
            "root",
            scale,
        )
        .unwrap()]
    }

    #[test]
    fn halves_share_full_height() {
        let ds = half_squares();
        let nm = cell_neighbors(&ds, 1e-6);
        assert!(nm.are_neighbors("a", "b"));
        let segs = nm.shared_segments("a", "b");
        assert_eq!(segs.len(), 1);
        assert!((segs[0].length() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn corner_contact_is_not_adjacency() {
        let scale = 3.0;
        let p = ConvexPolygon::square(Point::ORIGIN, 1.0).unwrap();
        let q = ConvexPolygon::square(Point::new(1.0, 1.0), 1.0).unwrap();
        let ds = vec![
            Diagram::build(p, vec![Cell::new("a", Point::new(0.5, 0.5), 0.0, 1.0)], 1, "p", scale)
                .unwrap(),
            Diagram::build(q, vec![Cell::new("b", Point::new(1.5, 1.5), 0.0, 1.0)], 1, "q", scale)
                .unwrap(),
        ];
        let nm = cell_neighbors(&ds, 1e-6 * scale);
        assert!(!nm.are_neighbors("a", "b"));
    }
}
