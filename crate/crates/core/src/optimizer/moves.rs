//! Per-cell movement rules.

use crate::geometry::neighbors::collinear_extent;
use crate::geometry::{Cell, ConvexPolygon, Point, Segment};

use super::{ConstraintIndex, LevelState, OptimizerConfig};

/// Moves `from` towards `to`, stopping at the boundary shrunk by `margin`.
/// A site already inside the margin band may only move away from the wall.
pub fn clamp_move(boundary: &ConvexPolygon, from: Point, to: Point, margin: f64) -> Point {
    if boundary.outside_distance(to) <= -margin {
        return to;
    }
    let t = boundary.ray_limit(from, to - from, margin);
    if t > 0.0 {
        return from + (to - from) * t;
    }
    if boundary.outside_distance(to) <= boundary.outside_distance(from) {
        to
    } else {
        from
    }
}

/// Site `step` of the way to its cell centroid; `None` for an empty cell.
pub fn centroid_target(cell: &Cell, boundary: &ConvexPolygon, step: f64, margin: f64) -> Option<Point> {
    let c = cell.polygon.as_ref()?.centroid();
    Some(clamp_move(boundary, cell.site, cell.site + (c - cell.site) * step, margin))
}

/// Straight move towards the target site, never closer than
/// `k_min · (r_c + r_t)`. `None` when already inside that floor.
pub fn move_toward(
    cell: &Cell,
    target: &Cell,
    boundary: &ConvexPolygon,
    step: f64,
    cfg: &OptimizerConfig,
    scale: f64,
) -> Option<Point> {
    let gap = target.site - cell.site;
    let d = gap.norm();
    let floor = cfg.k_min * (cell.equivalent_radius() + target.equivalent_radius());
    if d <= floor || d == 0.0 {
        return None;
    }
    let advance = (step * d).min(d - floor);
    let to = cell.site + gap * (advance / d);
    Some(clamp_move(boundary, cell.site, to, cfg.boundary_margin * scale))
}

/// Move parallel to `edge` by `step` of the along-edge offset between the
/// two sites; the distance to the edge's line is unchanged (up to clamping).
pub fn move_orthogonal(
    cell: &Cell,
    target: &Cell,
    edge: &Segment,
    boundary: &ConvexPolygon,
    step: f64,
    cfg: &OptimizerConfig,
    scale: f64,
) -> Option<Point> {
    let u = edge.direction();
    let along = (target.site - cell.site).dot(u);
    if along == 0.0 {
        return None;
    }
    let to = cell.site + u * (step * along);
    Some(clamp_move(boundary, cell.site, to, cfg.boundary_margin * scale))
}

/// True when the shared stretch covers at least half of the smaller of the
/// two cells' extents along the shared line.
pub fn aligned(c: &ConvexPolygon, t: &ConvexPolygon, shared: &[Segment], tol: f64) -> bool {
    let Some(longest) = longest(shared) else { return false };
    let overlap: f64 = shared
        .iter()
        .filter(|s| longest.distance_to_line(s.a) <= tol && longest.distance_to_line(s.b) <= tol)
        .map(Segment::length)
        .sum();
    let extent = collinear_extent(c, longest, tol).min(collinear_extent(t, longest, tol));
    overlap >= 0.5 * extent
}

pub(crate) fn longest(segs: &[Segment]) -> Option<&Segment> {
    segs.iter().max_by(|a, b| a.length().total_cmp(&b.length()))
}

/// Number of `t`'s current neighbors that hold a constraint to it, and
/// whether that covers all of its neighbors.
fn saturation(state: &LevelState, idx: &ConstraintIndex, t: usize) -> (usize, bool) {
    let nbrs = state.neighbor_map.neighbors(t);
    let constrained = nbrs.iter().filter(|&&n| idx.constrained(t, n)).count();
    (constrained, constrained == nbrs.len())
}

/// One neighborhood-preserving step for level cell `me`: the first actionable
/// constraint moves the site; otherwise it relaxes towards its centroid.
pub fn neighborhood_step(
    state: &LevelState,
    idx: &ConstraintIndex,
    me: usize,
    step: f64,
    cfg: &OptimizerConfig,
) -> Option<Point> {
    let (di, ci) = state.neighbor_map.location(me);
    let diagram = &state.diagrams[di];
    let cell = &diagram.cells[ci];
    let boundary = &diagram.boundary;
    let scale = diagram.scale;
    let poly = cell.polygon.as_ref()?;
    let tol = crate::geometry::neighbors::default_tolerance(scale);

    let cell_at = |k: usize| {
        let (d, c) = state.neighbor_map.location(k);
        (d, &state.diagrams[d].cells[c])
    };
    let mut order: Vec<(usize, f64, f64)> = idx
        .partners(me)
        .iter()
        .map(|&(t, s)| (t, s, cell.site.dist(cell_at(t).1.site)))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)).then(a.0.cmp(&b.0)));

    // a move blocked by the parent wall counts as no move
    let moved = |p: Option<Point>| p.filter(|p| p.dist(cell.site) > 1e-9 * scale);
    for (t, _, dist) in order {
        let (tdi, target) = cell_at(t);
        let Some(tpoly) = target.polygon.as_ref() else { continue };
        let (count, all) = saturation(state, idx, t);
        if count >= cfg.max_neighbor_count && all {
            continue;
        }
        if !state.neighbor_map.are_neighbors_idx(me, t) {
            if let Some(p) = moved(move_toward(cell, target, boundary, step, cfg, scale)) {
                return Some(p);
            }
            continue;
        }
        let shared = state.neighbor_map.shared_segments_idx(me, t);
        if tdi != di && !aligned(poly, tpoly, shared, tol * 1e-3) {
            let edge = longest(shared).expect("neighbors share a segment");
            if let Some(p) = moved(move_orthogonal(cell, target, edge, boundary, step, cfg, scale)) {
                return Some(p);
            }
            continue;
        }
        let band = cfg.k_max * (cell.equivalent_radius() + target.equivalent_radius());
        if dist > band {
            if let Some(p) = moved(move_toward(cell, target, boundary, step, cfg, scale)) {
                return Some(p);
            }
        }
    }
    centroid_target(cell, boundary, step, cfg.boundary_margin * scale)
}
