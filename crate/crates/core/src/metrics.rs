//! Evaluation of a finished layout: preserved constraints, area error,
//! aspect ratio and graph distances of unrealized constraints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Diagram, NeighborMap, Point};
use crate::par;
use crate::similarity::Constraint;

/// Count and fraction of constraints whose cells are neighbors. The fraction
/// is 1 when there are no constraints.
pub fn preserved_constraints(nm: &NeighborMap, constraints: &[Constraint]) -> (usize, f64) {
    let n = constraints.iter().filter(|c| nm.are_neighbors(&c.a, &c.b)).count();
    let frac = if constraints.is_empty() { 1.0 } else { n as f64 / constraints.len() as f64 };
    (n, frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaAspect {
    pub avg_area_error: f64,
    pub avg_aspect_ratio: f64,
    /// Leaves without a polygon; each counts as area error 1.
    pub empty_cells: usize,
}

/// Mean relative area error against the weight-proportional target and mean
/// bounding-box width/height over the given leaf diagrams.
pub fn area_and_aspect(leaf_diagrams: &[Diagram]) -> AreaAspect {
    let mut err = 0.0;
    let mut aspect = 0.0;
    let mut n = 0usize;
    let mut shaped = 0usize;
    let mut empty = 0usize;
    for d in leaf_diagrams {
        let avail = d.boundary_area();
        for c in &d.cells {
            n += 1;
            match &c.polygon {
                Some(p) => {
                    let target = c.target_area_fraction * avail;
                    err += (p.area() - target).abs() / target;
                    let bb = p.aabb();
                    aspect += bb.width() / bb.height();
                    shaped += 1;
                }
                None => {
                    err += 1.0;
                    empty += 1;
                }
            }
        }
    }
    AreaAspect {
        avg_area_error: if n == 0 { 0.0 } else { err / n as f64 },
        avg_aspect_ratio: if shaped == 0 { 0.0 } else { aspect / shaped as f64 },
        empty_cells: empty,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: usize,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then(o.g.cmp(&self.g)).then(o.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Unit-cost shortest path on the neighbor graph. `h_unit` converts the
/// Euclidean distance between node positions into a lower bound on hops.
pub fn a_star(nm: &NeighborMap, pos: &[Point], h_unit: f64, from: usize, to: usize) -> Option<usize> {
    let h = |k: usize| if h_unit > 0.0 { pos[k].dist(pos[to]) / h_unit } else { 0.0 };
    let mut best = vec![usize::MAX; nm.len()];
    let mut heap = BinaryHeap::new();
    best[from] = 0;
    heap.push(Open { f: h(from), g: 0, node: from });
    while let Some(Open { g, node, .. }) = heap.pop() {
        if node == to {
            return Some(g);
        }
        if g > best[node] {
            continue;
        }
        for &n in nm.neighbors(node) {
            let g2 = g + 1;
            if g2 < best[n] {
                best[n] = g2;
                heap.push(Open { f: g2 as f64 + h(n), g: g2, node: n });
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    /// Hop count per constraint; `None` when unreachable.
    pub lengths: Vec<Option<usize>>,
    /// Lower median, with unreachable pairs counted as infinitely long.
    pub median: Option<f64>,
    pub max: usize,
    pub unreachable: usize,
}

/// Cell centroids in neighbor-map order (site for empty cells).
fn positions(leaf_diagrams: &[Diagram], nm: &NeighborMap) -> Vec<Point> {
    (0..nm.len())
        .map(|k| {
            let (d, c) = nm.location(k);
            let cell = &leaf_diagrams[d].cells[c];
            cell.polygon.as_ref().map_or(cell.site, |p| p.centroid())
        })
        .collect()
}

pub fn constraint_path_stats(
    leaf_diagrams: &[Diagram],
    nm: &NeighborMap,
    constraints: &[Constraint],
) -> Result<PathStats> {
    let pos = positions(leaf_diagrams, nm);
    let h_unit = nm.pairs().fold(0.0, |m: f64, (a, b, _)| {
        let (a, b) = (nm.index_of(a).unwrap(), nm.index_of(b).unwrap());
        m.max(pos[a].dist(pos[b]))
    });
    let mut ends = Vec::with_capacity(constraints.len());
    for c in constraints {
        match (nm.index_of(&c.a), nm.index_of(&c.b)) {
            (Some(a), Some(b)) => ends.push((a, b)),
            _ => {
                return Err(Error::Validation(format!(
                    "constraint ({}, {}) references a cell missing from the layout",
                    c.a, c.b
                )))
            }
        }
    }
    let lengths = par::map_slice(&ends, |&(a, b)| a_star(nm, &pos, h_unit, a, b));
    let mut sorted: Vec<f64> = lengths.iter().map(|l| l.map_or(f64::INFINITY, |x| x as f64)).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2]).filter(|m| m.is_finite())
    };
    Ok(PathStats {
        max: lengths.iter().flatten().copied().max().unwrap_or(0),
        unreachable: lengths.iter().filter(|l| l.is_none()).count(),
        median,
        lengths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintOutcome {
    pub a: String,
    pub b: String,
    pub similarity: f64,
    pub bin: usize,
    pub realized: bool,
    pub path_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: usize,
    pub constraints_total: usize,
    pub constraints_preserved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub level: usize,
    pub constraints_total: usize,
    pub constraints_preserved: usize,
    pub preserved_fraction: f64,
    pub avg_area_error: f64,
    pub avg_aspect_ratio: f64,
    pub median_path_distance: Option<f64>,
    pub max_path_distance: usize,
    pub unreachable_constraints: usize,
    pub empty_leaf_cells: usize,
    pub levels: Vec<LevelSummary>,
    pub per_constraint: Vec<ConstraintOutcome>,
}

impl MetricsReport {
    pub fn compute(
        level: usize,
        leaf_diagrams: &[Diagram],
        nm: &NeighborMap,
        constraints: &[Constraint],
        levels: Vec<LevelSummary>,
    ) -> Result<Self> {
        let (preserved, fraction) = preserved_constraints(nm, constraints);
        let aa = area_and_aspect(leaf_diagrams);
        let paths = constraint_path_stats(leaf_diagrams, nm, constraints)?;
        let per_constraint = constraints
            .iter()
            .zip(&paths.lengths)
            .map(|(c, &len)| ConstraintOutcome {
                a: c.a.clone(),
                b: c.b.clone(),
                similarity: c.similarity,
                bin: c.bin,
                realized: nm.are_neighbors(&c.a, &c.b),
                path_length: len,
            })
            .collect();
        Ok(MetricsReport {
            level,
            constraints_total: constraints.len(),
            constraints_preserved: preserved,
            preserved_fraction: fraction,
            avg_area_error: aa.avg_area_error,
            avg_aspect_ratio: aa.avg_aspect_ratio,
            median_path_distance: paths.median,
            max_path_distance: paths.max,
            unreachable_constraints: paths.unreachable,
            empty_leaf_cells: aa.empty_cells,
            levels,
            per_constraint,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table_header() -> &'static str {
        "level | constraints | preserved | area err | aspect | median dist | max dist"
    }

    /// One row in the layout of the results table.
    pub fn table_row(&self) -> String {
        format!(
            "{} | {} | {} ({:.2}%) | {:.2} | {:.2} | {} | {}",
            self.level,
            self.constraints_total,
            self.constraints_preserved,
            100.0 * self.preserved_fraction,
            self.avg_area_error,
            self.avg_aspect_ratio,
            self.median_path_distance.map_or("inf".to_string(), |m| format!("{m}")),
            self.max_path_distance
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Cell, ConvexPolygon};

    fn strip(n: usize) -> (Vec<Diagram>, NeighborMap) {
        let b = ConvexPolygon::rectangle(Point::ORIGIN, n as f64, 1.0).unwrap();
        let scale = b.aabb().diagonal();
        let cells = (0..n)
            .map(|k| Cell::new(format!("c{k}"), Point::new(k as f64 + 0.5, 0.5), 0.0, 1.0 / n as f64))
            .collect();
        let d = Diagram::build(b, cells, 1, "r", scale).unwrap();
        let nm = crate::geometry::cell_neighbors(std::slice::from_ref(&d), 1e-6 * scale);
        (vec![d], nm)
    }

    #[test]
    fn all_adjacent_and_vacuous() {
        let (_, nm) = strip(2);
        assert_eq!(preserved_constraints(&nm, &[Constraint::new("c0", "c1", 1.0, 1)]), (1, 1.0));
        assert_eq!(preserved_constraints(&nm, &[]), (0, 1.0));
    }

    #[test]
    fn exact_cells_have_zero_error() {
        let (ds, _) = strip(4);
        let aa = area_and_aspect(&ds);
        assert!(aa.avg_area_error < 1e-12);
        assert!((aa.avg_aspect_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_path_is_three() {
        let (ds, nm) = strip(4);
        let cs = [Constraint::new("c0", "c3", 1.0, 1), Constraint::new("c1", "c2", 1.0, 1)];
        let p = constraint_path_stats(&ds, &nm, &cs).unwrap();
        assert_eq!(p.lengths, vec![Some(3), Some(1)]);
        assert_eq!(p.max, 3);
        assert_eq!(p.median, Some(1.0));
    }

    #[test]
    fn missing_endpoint_is_an_error() {
        let (ds, nm) = strip(2);
        assert!(constraint_path_stats(&ds, &nm, &[Constraint::new("c0", "zz", 1.0, 1)]).is_err());
    }

    #[test]
    fn unreachable_is_reported() {
        let nm = NeighborMap::from_pairs(vec!["a".into(), "b".into(), "c".into()], [(0, 1)]);
        let pos = [Point::ORIGIN, Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert_eq!(a_star(&nm, &pos, 1.0, 0, 2), None);
        assert_eq!(a_star(&nm, &pos, 1.0, 0, 1), Some(1));
    }
}
