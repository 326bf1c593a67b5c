use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simmap_core::geometry::neighbors::default_tolerance;
use simmap_core::geometry::{cell_neighbors, ConvexPolygon, Point};
use simmap_core::layout_init::hungarian::assignment_cost;
use simmap_core::layout_init::{
    build_cvt, min_cost_assignment, proj_scale_init, random_assignment, realized_count, swap_improve, Assignment,
    ProjectedPositions, Strategy,
};
use simmap_core::similarity::Constraint;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn hungarian_matches_all_720_permutations() {
    let perms = permutations(6);
    assert_eq!(perms.len(), 720);
    for seed in 0..50 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cost: Vec<Vec<f64>> = (0..6).map(|_| (0..6).map(|_| r.gen_range(0.0..100.0)).collect()).collect();
        let best = perms
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let got = assignment_cost(&cost, &min_cost_assignment(&cost));
        assert!((got - best).abs() <= 1e-9 * best, "seed {seed}: {got} vs {best}");
    }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("n{k}")).collect()
}

#[test]
fn swap_realizes_pair_on_four_cells() {
    let sq = ConvexPolygon::square(Point::ORIGIN, 1.0).unwrap();
    let cvt = build_cvt(&sq, 4, 3, 2f64.sqrt()).unwrap();
    let nm = cell_neighbors(std::slice::from_ref(&cvt), default_tolerance(cvt.scale));
    let (c0, c1) = (0..4)
        .flat_map(|a| (a + 1..4).map(move |b| (a, b)))
        .find(|&(a, b)| !nm.are_neighbors_idx(a, b))
        .expect("a four-cell CVT has a non-adjacent (diagonal) pair");
    let rest: Vec<usize> = (0..4).filter(|&k| k != c0 && k != c1).collect();
    let names = ids(4);
    let start = Assignment { node_ids: names.clone(), cells: vec![c0, c1, rest[0], rest[1]], strategy: Strategy::MatchSwap };
    let cs = vec![Constraint::new("n0", "n1", 0.9, 1)];
    assert_eq!(realized_count(&start, &cs, &cvt), 0);
    let best = permutations(4)
        .into_iter()
        .map(|cells| realized_count(&Assignment { cells, ..start.clone() }, &cs, &cvt))
        .max()
        .unwrap();
    assert_eq!(best, 1);
    assert_eq!(realized_count(&swap_improve(&start, &cs, &cvt, 20), &cs, &cvt), 1);
    assert_eq!(swap_improve(&start, &[], &cvt, 20), start);
}

fn pairwise(ps: &[Point]) -> Vec<f64> {
    ps.iter().enumerate().flat_map(|(i, p)| ps[i + 1..].iter().map(move |q| p.dist(*q))).collect()
}

#[test]
fn proj_scale_is_a_similarity_transform() {
    let sq = ConvexPolygon::square(Point::ORIGIN, 100.0).unwrap();
    let pts = vec![Point::new(0.1, 0.2), Point::new(0.4, 0.9), Point::new(0.8, 0.3), Point::new(0.5, 0.5)];
    let pos = ProjectedPositions { node_ids: ids(4), points: pts.clone() };
    let out = proj_scale_init(&pos, &sq, sq.aabb().diagonal());
    let (a, b) = (pairwise(&pts), pairwise(&out));
    let k = b[0] / a[0];
    for (x, y) in a.iter().zip(&b) {
        assert!((y / x - k).abs() < 1e-9 * k);
    }
}

#[test]
fn proj_scale_outlier_compresses_the_rest() {
    let sq = ConvexPolygon::square(Point::ORIGIN, 100.0).unwrap();
    let cluster = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.3, 0.6), Point::new(0.7, 0.2)];
    let scale = sq.aabb().diagonal();
    let min_of = |ps: &[Point]| pairwise(ps).into_iter().fold(f64::INFINITY, f64::min);
    let base = proj_scale_init(&ProjectedPositions { node_ids: ids(4), points: cluster.clone() }, &sq, scale);
    let mut with = cluster.clone();
    with.push(Point::new(100.0, 100.0));
    let squeezed = proj_scale_init(&ProjectedPositions { node_ids: ids(5), points: with }, &sq, scale);
    // the bounding box grows from 1 to 100 per side
    let ratio = min_of(&squeezed[..4]) / min_of(&base);
    assert!((ratio - 0.01).abs() < 1e-9, "ratio {ratio}");
}

#[test]
fn random_assignment_is_uniform() {
    let sq = ConvexPolygon::square(Point::ORIGIN, 1.0).unwrap();
    let cvt = build_cvt(&sq, 10, 1, 2f64.sqrt()).unwrap();
    let names = ids(10);
    let mut hits: HashMap<(usize, usize), usize> = HashMap::new();
    for seed in 0..1000 {
        let a = random_assignment(&names, &cvt, seed).unwrap();
        for (node, &cell) in a.cells.iter().enumerate() {
            *hits.entry((node, cell)).or_default() += 1;
        }
    }
    let mut chi2 = 0.0;
    for node in 0..10 {
        for cell in 0..10 {
            let f = hits.get(&(node, cell)).copied().unwrap_or(0) as f64;
            assert!((f / 1000.0 - 0.1).abs() <= 0.03, "node {node} cell {cell}: {f}");
            chi2 += (f - 100.0).powi(2) / 100.0;
        }
    }
    // 81 degrees of freedom for a 10x10 table with fixed margins; p = 0.001 at ~126
    assert!(chi2 < 126.0, "chi2 {chi2}");
}
