//! Initial placement of a diagram's children: projection, CVT construction,
//! optimal matching, constraint-driven swapping and the two baselines.

pub mod hungarian;
pub mod mds;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::neighbors::{cell_neighbors, default_tolerance};
use crate::geometry::relax::{lloyd_step, max_displacement};
use crate::geometry::{Cell, ConvexPolygon, Diagram, Point};
use crate::seeding;
use crate::similarity::Constraint;

pub use hungarian::min_cost_assignment;
pub use mds::mds_project;

/// Lloyd stops once no site moves more than this fraction of the scale.
pub const CVT_TOLERANCE: f64 = 1e-4;
pub const CVT_MAX_ITER: usize = 500;
pub const DEFAULT_SWAP_PASSES: usize = 20;
/// Share of the inscribed box used by the projection baseline.
pub const PROJ_MARGIN: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedPositions {
    pub node_ids: Vec<String>,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    MatchSwap,
    RandomCvt,
    ProjScale,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::MatchSwap => "match_swap",
            Strategy::RandomCvt => "random_cvt",
            Strategy::ProjScale => "proj_scale",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "match_swap" => Ok(Strategy::MatchSwap),
            "random_cvt" => Ok(Strategy::RandomCvt),
            "proj_scale" => Ok(Strategy::ProjScale),
            _ => Err(format!("unknown init strategy '{s}' (match_swap, random_cvt, proj_scale)")),
        }
    }
}

/// Bijection between a diagram's nodes and the cells of a CVT:
/// node `node_ids[i]` sits in CVT cell `cells[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub node_ids: Vec<String>,
    pub cells: Vec<usize>,
    pub strategy: Strategy,
}

impl Assignment {
    pub fn cell_of(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|x| x == id).map(|i| self.cells[i])
    }

    /// Site position of every node, in node order.
    pub fn sites(&self, cvt: &Diagram) -> Vec<Point> {
        self.cells.iter().map(|&k| cvt.cells[k].site).collect()
    }
}

/// Centroidal tessellation with `n` equal-weight cells from seeded random sites.
pub fn build_cvt(boundary: &ConvexPolygon, n: usize, seed: u64, scale: f64) -> Result<Diagram> {
    if n == 0 {
        return invalid("a CVT needs at least one cell");
    }
    let mut rng = seeding::rng(seed, &[0xC57]);
    let tol = 1e-9 * scale;
    let mut sites: Vec<Point> = Vec::with_capacity(n);
    while sites.len() < n {
        let p = boundary.sample_interior(&mut rng);
        if sites.iter().all(|q| q.dist(p) > tol) {
            sites.push(p);
        }
    }
    let cells = sites
        .into_iter()
        .enumerate()
        .map(|(k, p)| Cell::new(format!("cvt{k}"), p, 0.0, 1.0 / n as f64))
        .collect();
    let mut d = Diagram::build(boundary.clone(), cells, 0, "", scale)?;
    for _ in 0..CVT_MAX_ITER {
        let next = lloyd_step(&d, &mut rng)?;
        let moved = max_displacement(&d, &next);
        d = next;
        if moved < CVT_TOLERANCE * scale {
            break;
        }
    }
    Ok(d)
}

/// Uniform scale + translation of `points` so that their bounding box fits
/// `fill` times the largest centered box of the same aspect inside `boundary`.
pub fn fit_to_boundary(points: &[Point], boundary: &ConvexPolygon, fill: f64) -> Vec<Point> {
    let Some(bb) = crate::geometry::Aabb::from_points(points) else {
        return Vec::new();
    };
    let (w, h) = (bb.width(), bb.height());
    let aspect = if h > 0.0 { w / h } else if w > 0.0 { f64::INFINITY } else { 1.0 };
    let (center, hw, hh) = boundary.inscribed_box(aspect);
    let mut s = f64::INFINITY;
    if w > 0.0 {
        s = s.min(2.0 * hw * fill / w);
    }
    if h > 0.0 {
        s = s.min(2.0 * hh * fill / h);
    }
    if !s.is_finite() {
        s = 0.0;
    }
    let c = bb.center();
    points.iter().map(|&p| center + (p - c) * s).collect()
}

/// Exact minimum-cost matching of projected positions (fitted into the
/// boundary) to CVT centroids, with squared-distance costs.
pub fn match_assignment(positions: &ProjectedPositions, cvt: &Diagram) -> Result<Assignment> {
    let n = positions.points.len();
    if n != cvt.cells.len() {
        return invalid(format!("{n} positions but {} CVT cells", cvt.cells.len()));
    }
    let fitted = fit_to_boundary(&positions.points, &cvt.boundary, 1.0);
    let centroids: Vec<Point> = cvt
        .cells
        .iter()
        .map(|c| c.polygon.as_ref().map_or(c.site, |p| p.centroid()))
        .collect();
    let cost: Vec<Vec<f64>> = fitted
        .iter()
        .map(|p| centroids.iter().map(|c| p.dist_sq(*c)).collect())
        .collect();
    Ok(Assignment {
        node_ids: positions.node_ids.clone(),
        cells: min_cost_assignment(&cost),
        strategy: Strategy::MatchSwap,
    })
}

/// Constraint endpoints local to this assignment, as node-index pairs.
fn local_pairs(assignment: &Assignment, constraints: &[Constraint]) -> Vec<(usize, usize)> {
    let index: HashMap<&str, usize> =
        assignment.node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    constraints
        .iter()
        .filter_map(|c| Some((*index.get(c.a.as_str())?, *index.get(c.b.as_str())?)))
        .collect()
}

fn cvt_adjacency(cvt: &Diagram) -> Vec<Vec<bool>> {
    let n = cvt.cells.len();
    let nm = cell_neighbors(std::slice::from_ref(cvt), default_tolerance(cvt.scale));
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for &j in nm.neighbors(i) {
            adj[i][j] = true;
        }
    }
    adj
}

/// Number of constraints whose endpoints occupy adjacent CVT cells.
pub fn realized_count(assignment: &Assignment, constraints: &[Constraint], cvt: &Diagram) -> usize {
    let adj = cvt_adjacency(cvt);
    local_pairs(assignment, constraints)
        .iter()
        .filter(|&&(i, j)| adj[assignment.cells[i]][assignment.cells[j]])
        .count()
}

/// Greedy pairwise swapping; see [`swap_improve_traced`].
pub fn swap_improve(
    assignment: &Assignment,
    constraints: &[Constraint],
    cvt: &Diagram,
    max_passes: usize,
) -> Assignment {
    swap_improve_traced(assignment, constraints, cvt, max_passes).0
}

/// Swaps the cells of two nodes whenever that strictly increases the number
/// of constraints realized as CVT neighbors. Pairs are visited in canonical
/// order; passes repeat until one makes no swap or `max_passes` elapse.
/// Also returns the realized count before the first and after every accepted swap.
pub fn swap_improve_traced(
    assignment: &Assignment,
    constraints: &[Constraint],
    cvt: &Diagram,
    max_passes: usize,
) -> (Assignment, Vec<usize>) {
    let mut out = assignment.clone();
    let pairs = local_pairs(assignment, constraints);
    let n = out.cells.len();
    let adj = cvt_adjacency(cvt);
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, &(i, j)) in pairs.iter().enumerate() {
        incident[i].push(k);
        incident[j].push(k);
    }
    let realized = |cells: &[usize], k: usize| {
        let (i, j) = pairs[k];
        adj[cells[i]][cells[j]] as usize
    };
    let mut count: usize = (0..pairs.len()).map(|k| realized(&out.cells, k)).sum();
    let mut history = vec![count];
    if pairs.is_empty() {
        return (out, history);
    }
    for _ in 0..max_passes {
        let mut swapped = false;
        for i in 0..n {
            for j in i + 1..n {
                if incident[i].is_empty() && incident[j].is_empty() {
                    continue;
                }
                let mut touched: Vec<usize> = incident[i].iter().chain(&incident[j]).copied().collect();
                touched.sort_unstable();
                touched.dedup();
                let before: usize = touched.iter().map(|&k| realized(&out.cells, k)).sum();
                out.cells.swap(i, j);
                let after: usize = touched.iter().map(|&k| realized(&out.cells, k)).sum();
                if after > before {
                    count = count + after - before;
                    history.push(count);
                    swapped = true;
                } else {
                    out.cells.swap(i, j);
                }
            }
        }
        if !swapped {
            break;
        }
    }
    (out, history)
}

/// Baseline: fit the projection into 90% of the inscribed box and use the
/// points directly as sites. Points that still fall outside are pulled
/// towards the boundary centroid.
pub fn proj_scale_init(positions: &ProjectedPositions, boundary: &ConvexPolygon, scale: f64) -> Vec<Point> {
    let fitted = fit_to_boundary(&positions.points, boundary, PROJ_MARGIN);
    let margin = 1e-3 * scale;
    let c = boundary.centroid();
    let coincide = 1e-9 * scale;
    let mut out: Vec<Point> = Vec::with_capacity(fitted.len());
    for (k, &p) in fitted.iter().enumerate() {
        let mut q = pull_inside(boundary, c, p, margin);
        // identical projections would give coincident sites; spread them on
        // a small golden-angle spiral
        let mut turn = 0;
        while out.iter().any(|o| o.dist(q) <= coincide) {
            turn += 1;
            let a = (k + turn) as f64 * 2.399_963_229_728_653;
            let r = 1e-4 * scale * (turn as f64).sqrt();
            q = pull_inside(boundary, c, p + Point::new(a.cos(), a.sin()) * r, margin);
        }
        out.push(q);
    }
    out
}

fn pull_inside(boundary: &ConvexPolygon, c: Point, p: Point, margin: f64) -> Point {
    if boundary.outside_distance(p) < -margin {
        return p;
    }
    c + (p - c) * boundary.ray_limit(c, p - c, margin)
}

/// Baseline: uniformly random bijection of nodes to CVT cells.
pub fn random_assignment(node_ids: &[String], cvt: &Diagram, seed: u64) -> Result<Assignment> {
    if node_ids.len() != cvt.cells.len() {
        return invalid(format!("{} nodes but {} CVT cells", node_ids.len(), cvt.cells.len()));
    }
    let mut cells: Vec<usize> = (0..node_ids.len()).collect();
    cells.shuffle(&mut seeding::rng(seed, &[0x5A4D]));
    Ok(Assignment { node_ids: node_ids.to_vec(), cells, strategy: Strategy::RandomCvt })
}
