//! Additively weighted power diagrams clipped to a convex boundary.
//!
//! A cell is `{ x : ‖x−p_i‖² − w_i ≤ ‖x−p_j‖² − w_j  ∀ j }`. Every pairwise
//! condition is a half-plane bounded by the radical axis of the two sites, so
//! each cell is the boundary polygon clipped by at most `n − 1` half-planes.

use serde::{Deserialize, Serialize};

use super::point::Point;
use super::polygon::{clip_vertices, ConvexPolygon, HalfPlane};
use crate::error::{Error, Result};
use crate::par;

/// One site of a power diagram together with the node it represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub node_id: String,
    pub site: Point,
    pub weight: f64,
    /// Share of the owning diagram's boundary area this cell should cover.
    pub target_area_fraction: f64,
    pub polygon: Option<ConvexPolygon>,
}

impl Cell {
    pub fn new(node_id: impl Into<String>, site: Point, weight: f64, target: f64) -> Self {
        Cell {
            node_id: node_id.into(),
            site,
            weight,
            target_area_fraction: target,
            polygon: None,
        }
    }

    pub fn area(&self) -> f64 {
        self.polygon.as_ref().map_or(0.0, |p| p.area())
    }

    /// Radius of the disc with the same area.
    pub fn equivalent_radius(&self) -> f64 {
        (self.area() / std::f64::consts::PI).sqrt()
    }
}

/// All cells partitioning one parent boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    pub boundary: ConvexPolygon,
    pub cells: Vec<Cell>,
    pub level: usize,
    pub parent_node: String,
    /// Global length scale (diagonal of the root boundary's bounding box).
    pub scale: f64,
}

impl Diagram {
    /// Builds the diagram and computes every cell polygon.
    pub fn build(
        boundary: ConvexPolygon,
        cells: Vec<Cell>,
        level: usize,
        parent_node: impl Into<String>,
        scale: f64,
    ) -> Result<Self> {
        let mut d = Diagram { boundary, cells, level, parent_node: parent_node.into(), scale };
        d.recompute()?;
        Ok(d)
    }

    /// Recomputes all polygons from the current sites and weights.
    pub fn recompute(&mut self) -> Result<()> {
        let sites: Vec<(Point, f64)> = self.cells.iter().map(|c| (c.site, c.weight)).collect();
        let polys = power_cells(&sites, &self.boundary, self.scale)?;
        for (c, p) in self.cells.iter_mut().zip(polys) {
            c.polygon = p;
        }
        Ok(())
    }

    pub fn boundary_area(&self) -> f64 {
        self.boundary.area()
    }

    pub fn cell_index(&self, node_id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.node_id == node_id)
    }

    pub fn areas(&self) -> Vec<f64> {
        self.cells.iter().map(Cell::area).collect()
    }

    pub fn mean_pairwise_site_distance(&self) -> f64 {
        let n = self.cells.len();
        if n < 2 {
            return self.boundary.aabb().diagonal() * 0.5;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                sum += self.cells[i].site.dist(self.cells[j].site);
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }

    /// Sites closer than this are treated as coincident.
    pub fn coincidence_tol(&self) -> f64 {
        1e-12 * self.scale
    }
}

/// Radical-axis half-plane of site `i` against site `j`, written around the
/// midpoint so that the `(i, j)` and `(j, i)` planes are exact negations.
fn radical_half_plane(pi: Point, wi: f64, pj: Point, wj: f64) -> HalfPlane {
    let n = pj - pi;
    let mid = (pi + pj) * 0.5;
    HalfPlane::new(n, n.dot(mid) + 0.5 * (wi - wj))
}

/// Computes the clipped cell of every site. `None` marks an empty cell.
///
/// Fails when two sites coincide or a site lies outside the boundary.
pub fn power_cells(
    sites: &[(Point, f64)],
    boundary: &ConvexPolygon,
    scale: f64,
) -> Result<Vec<Option<ConvexPolygon>>> {
    if sites.is_empty() {
        return Err(Error::Geometry("power diagram needs at least one site".into()));
    }
    let inside_tol = 1e-9 * scale;
    for (k, &(p, w)) in sites.iter().enumerate() {
        if !p.is_finite() || !w.is_finite() {
            return Err(Error::Numeric(format!("site {k} has non-finite position or weight")));
        }
        if boundary.outside_distance(p) > inside_tol {
            return Err(Error::Geometry(format!("site {k} at ({}, {}) lies outside the boundary", p.x, p.y)));
        }
    }
    let coincide = 1e-12 * scale;
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if sites[i].0.dist(sites[j].0) <= coincide {
                return Err(Error::Geometry(format!("sites {i} and {j} coincide")));
            }
        }
    }
    let w_max = sites.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let snap_tol = 1e-9 * scale;
    Ok(par::map_range(sites.len(), |i| {
        let mut cp = ConvexPolygon::from_ccw_unchecked(cell_vertices(i, sites, boundary, w_max)?);
        cp.snap_to(boundary, snap_tol);
        Some(cp)
    }))
}

fn cell_vertices(
    i: usize,
    sites: &[(Point, f64)],
    boundary: &ConvexPolygon,
    w_max: f64,
) -> Option<Vec<Point>> {
    let (pi, wi) = sites[i];
    let mut order: Vec<(f64, usize)> = sites
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, s)| (pi.dist(s.0), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut poly = boundary.vertices().to_vec();
    for (d, j) in order {
        // Every point of the current polygon is within `r` of p_i, so its power
        // w.r.t. p_i is at most r² − w_i while its power w.r.t. any site at
        // distance ≥ d is at least (d − r)² − w_max. Sites are visited by
        // increasing distance, hence no later site can cut either.
        let r = poly.iter().map(|v| v.dist(pi)).fold(0.0, f64::max);
        if d > r && (d - r) * (d - r) - w_max >= r * r - wi {
            break;
        }
        let (pj, wj) = sites[j];
        poly = clip_vertices(&poly, &radical_half_plane(pi, wi, pj, wj))?;
    }
    Some(poly)
}

/// Convenience wrapper returning a full [`Diagram`] for anonymous sites.
pub fn power_diagram(
    sites: &[(Point, f64)],
    boundary: &ConvexPolygon,
    scale: f64,
) -> Result<Diagram> {
    let n = sites.len();
    let cells = sites
        .iter()
        .enumerate()
        .map(|(k, &(p, w))| Cell::new(format!("s{k}"), p, w, 1.0 / n.max(1) as f64))
        .collect();
    Diagram::build(boundary.clone(), cells, 0, "", scale)
}
