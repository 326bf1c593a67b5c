use rand::Rng;

use super::point::Point;
use super::power::Diagram;
use crate::error::Result;

/// Default step size of the area-driven weight update.
pub const DEFAULT_ADAPT_RATE: f64 = 0.7;

/// Random interior point of the boundary that does not coincide with any of
/// the diagram's sites.
pub(crate) fn reseed_point<R: Rng + ?Sized>(d: &Diagram, rng: &mut R) -> Point {
    let tol = d.coincidence_tol() * 1e3;
    loop {
        let p = d.boundary.sample_interior(rng);
        if d.cells.iter().all(|c| c.site.dist(p) > tol) {
            return p;
        }
    }
}

/// One Lloyd iteration: every site jumps to its cell centroid; sites of
/// empty cells are re-seeded at random interior points.
pub fn lloyd_step<R: Rng + ?Sized>(diagram: &Diagram, rng: &mut R) -> Result<Diagram> {
    let mut next = diagram.clone();
    for k in 0..next.cells.len() {
        let target = match &next.cells[k].polygon {
            Some(p) => p.centroid(),
            None => reseed_point(&next, rng),
        };
        next.cells[k].site = target;
    }
    next.recompute()?;
    Ok(next)
}

/// Largest site displacement between two versions of a diagram.
pub fn max_displacement(a: &Diagram, b: &Diagram) -> f64 {
    a.cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| x.site.dist(y.site))
        .fold(0.0, f64::max)
}

/// Raises the weight of cell `k` by `0.1 · spread²`, and at least far enough
/// that its own site is strictly inside its power cell.
fn bump_weight(d: &mut Diagram, k: usize, spread: f64) {
    let pk = d.cells[k].site;
    let own = d
        .cells
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, c)| c.weight - c.site.dist_sq(pk))
        .fold(f64::NEG_INFINITY, f64::max);
    let s2 = spread * spread;
    d.cells[k].weight = (d.cells[k].weight.max(0.0) + 0.1 * s2).max(own + 0.01 * s2);
}

/// `dA_i/dw_i` of every cell: each shared edge of length `L` with a site at
/// distance `d` contributes `L / 2d`.
fn area_sensitivity(d: &Diagram) -> Vec<f64> {
    let nm = super::neighbors::cell_neighbors(std::slice::from_ref(d), super::neighbors::default_tolerance(d.scale));
    let mut s = vec![0.0; d.cells.len()];
    for (a, b, segs) in nm.pairs() {
        let (i, j) = (nm.index_of(a).unwrap(), nm.index_of(b).unwrap());
        let len: f64 = segs.iter().map(|g| g.length()).sum();
        let g = len / (2.0 * d.cells[i].site.dist(d.cells[j].site));
        s[i] += g;
        s[j] += g;
    }
    s
}

/// Moves every weight towards its target area.
///
/// `w_i += rate · (t_i·A − A_i) / max(π, dA_i/dw_i)`: a step in squared
/// equivalent radius, shortened where crowded sites make the area react
/// faster than an isolated disk would. Afterwards all weights are shifted so
/// the minimum is non-negative. Cells that end up empty get a weight bump; if
/// that does not make them reappear their site is re-seeded.
pub fn adapt_weights<R: Rng + ?Sized>(diagram: &Diagram, rate: f64, rng: &mut R) -> Result<Diagram> {
    let mut next = diagram.clone();
    let total = next.boundary_area();
    let areas = next.areas();
    let sens = area_sensitivity(&next);
    for ((c, a), s) in next.cells.iter_mut().zip(&areas).zip(&sens) {
        c.weight += rate * (c.target_area_fraction * total - a) / s.max(std::f64::consts::PI);
    }
    let min_w = next.cells.iter().map(|c| c.weight).fold(f64::INFINITY, f64::min);
    if min_w < 0.0 {
        for c in next.cells.iter_mut() {
            c.weight -= min_w;
        }
    }
    next.recompute()?;

    let spread = next.mean_pairwise_site_distance();
    let empty: Vec<usize> = (0..next.cells.len()).filter(|&k| next.cells[k].polygon.is_none()).collect();
    if !empty.is_empty() {
        for &k in &empty {
            bump_weight(&mut next, k, spread);
        }
        next.recompute()?;
        for _ in 0..8 {
            let still: Vec<usize> =
                (0..next.cells.len()).filter(|&k| next.cells[k].polygon.is_none()).collect();
            if still.is_empty() {
                break;
            }
            for k in still {
                next.cells[k].site = reseed_point(&next, rng);
                bump_weight(&mut next, k, spread);
            }
            next.recompute()?;
        }
    }
    Ok(next)
}
