use std::collections::{BTreeMap, BTreeSet};

use simmap_core::geometry::{Cell, ConvexPolygon, Diagram, Point};
use simmap_core::optimizer::moves::centroid_target;
use simmap_core::optimizer::{build_level_queue, neighborhood_step, ConstraintIndex, LevelState, OptimizerConfig};
use simmap_core::pipeline::{layout_treemap, LayoutEvent, RunConfig};
use simmap_core::similarity::{extract_level_constraints, Constraint};
use simmap_core::tree::preprocess;

#[test]
fn level_queue_partitions_every_depth() {
    let t = preprocess(
        r#"{"name": "r", "children": [
            {"name": "A", "children": [
                {"name": "a1", "children": [{"name": "x"}, {"name": "y"}]},
                {"name": "a2"}]},
            {"name": "B"},
            {"name": "C", "children": [{"name": "c1", "children": [{"name": "z"}]}]}]}"#,
    )
    .unwrap();
    assert_eq!(t.depth(), 3);
    let queue = build_level_queue(&t);
    assert_eq!(queue.iter().map(|l| l.level).collect::<Vec<_>>(), vec![1, 2, 3]);
    for lg in &queue {
        let mut seen = BTreeSet::new();
        for g in &lg.groups {
            for &c in &g.children {
                assert!(seen.insert(c), "node {c} listed twice at level {}", lg.level);
                assert_eq!(t.node(c).parent, Some(g.parent));
            }
        }
        assert_eq!(seen, t.level(lg.level).into_iter().collect::<BTreeSet<_>>(), "level {}", lg.level);
    }
}

fn level(sites: &[(&str, f64, f64)], constraints: Vec<Constraint>) -> LevelState {
    let b = ConvexPolygon::square(Point::ORIGIN, 100.0).unwrap();
    let cells = sites
        .iter()
        .map(|&(id, x, y)| Cell::new(id, Point::new(x, y), 0.0, 1.0 / sites.len() as f64))
        .collect();
    let d = Diagram::build(b, cells, 1, "root", 100.0 * 2f64.sqrt()).unwrap();
    LevelState::new(1, vec![d], constraints, 150)
}

fn step(state: &LevelState, id: &str) -> (Option<Point>, Option<Point>, Point) {
    let cfg = OptimizerConfig::default();
    let idx = ConstraintIndex::new(&state.neighbor_map, &state.constraints);
    let me = state.neighbor_map.index_of(id).unwrap();
    let d = &state.diagrams[0];
    let cell = &d.cells[d.cell_index(id).unwrap()];
    (
        neighborhood_step(state, &idx, me, 0.5, &cfg),
        centroid_target(cell, &d.boundary, 0.5, cfg.boundary_margin * d.scale),
        cell.site,
    )
}

#[test]
fn fulfilled_constraint_relaxes_to_centroid() {
    let s = level(&[("a", 25.0, 40.0), ("b", 75.0, 50.0)], vec![Constraint::new("a", "b", 0.9, 1)]);
    assert!(s.neighbor_map.are_neighbors("a", "b"));
    let (got, centroid, _) = step(&s, "a");
    assert_eq!(got, centroid);
}

#[test]
fn separated_pair_moves_closer() {
    let s = level(
        &[("a", 10.0, 50.0), ("m", 50.0, 50.0), ("b", 90.0, 50.0)],
        vec![Constraint::new("a", "b", 0.9, 1)],
    );
    assert!(!s.neighbor_map.are_neighbors("a", "b"));
    let (got, centroid, from) = step(&s, "a");
    let got = got.unwrap();
    let b = Point::new(90.0, 50.0);
    assert!(got.dist(b) < from.dist(b));
    assert_ne!(Some(got), centroid);
}

/// A centre cell ringed by six petals, plus a far cell `m` constrained to
/// the centre.
fn flower(constrained_petals: usize) -> LevelState {
    let mut sites = vec![("c", 40.0, 50.0)];
    let names = ["p0", "p1", "p2", "p3", "p4", "p5"];
    for (k, name) in names.iter().enumerate() {
        let a = k as f64 * std::f64::consts::PI / 3.0;
        sites.push((name, 40.0 + 10.0 * a.cos(), 50.0 + 10.0 * a.sin()));
    }
    sites.push(("m", 90.0, 50.0));
    let mut cs: Vec<Constraint> = names[..constrained_petals].iter().map(|p| Constraint::new("c", p, 0.9, 1)).collect();
    cs.push(Constraint::new("c", "m", 0.9, 1));
    level(&sites, cs)
}

#[test]
fn saturated_target_is_skipped() {
    let s = flower(6);
    let c = s.neighbor_map.index_of("c").unwrap();
    assert_eq!(s.neighbor_map.neighbors(c).len(), 6);
    assert!(!s.neighbor_map.are_neighbors("c", "m"));
    let (got, centroid, _) = step(&s, "m");
    assert_eq!(got, centroid);

    // one unconstrained petal lifts the saturation: m heads for the centre
    let s = flower(5);
    let (got, centroid, from) = step(&s, "m");
    let got = got.unwrap();
    assert_ne!(Some(got), centroid);
    assert!(got.dist(Point::new(40.0, 50.0)) < from.dist(Point::new(40.0, 50.0)));
}

#[test]
fn cross_parent_pair_becomes_adjacent_and_cells_grow_late() {
    let doc = r#"{"name": "r", "children": [
        {"name": "P", "children": [{"name": "p1", "weight": 3}, {"name": "p2"}, {"name": "p3", "weight": 2}, {"name": "p4"}]},
        {"name": "Q", "children": [{"name": "q1", "weight": 2}, {"name": "q2"}, {"name": "q3", "weight": 3}, {"name": "q4"}]}],
        "pairs": [["p1", "q1", 0.95]]}"#;
    let tree = preprocess(doc).unwrap();
    let cs = extract_level_constraints(&tree, RunConfig::default().sim).unwrap();
    assert_eq!(cs[&2].len(), 1);
    let mut found = false;
    for seed in 0..40 {
        let cfg = RunConfig { seed, ..RunConfig::default() };
        let start = cfg.optimizer.growth_start(cfg.optimizer.max_iter);
        let mut init_adjacent = None;
        let mut first_adjacent = None;
        let mut weights: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        layout_treemap(&tree, &cs, &cfg, &mut |e| match e {
            LayoutEvent::Initialized(s) if s.level == 2 => {
                init_adjacent = Some(s.neighbor_map.are_neighbors("p1", "q1"));
                weights.insert(0, s.weights());
            }
            LayoutEvent::Iteration(s) if s.level == 2 => {
                if first_adjacent.is_none() && s.neighbor_map.are_neighbors("p1", "q1") {
                    first_adjacent = Some(s.iter);
                }
                weights.insert(s.iter, s.weights());
            }
            _ => {}
        })
        .unwrap();
        if init_adjacent != Some(false) {
            continue;
        }
        found = true;
        assert!(first_adjacent.is_some(), "seed {seed}: p1 and q1 never met");
        // weights stay put until the growth window opens
        for it in 0..=start {
            assert_eq!(weights[&it], weights[&0], "seed {seed}, iteration {it}");
        }
        assert_ne!(weights[&(start + 1)], weights[&0]);
        break;
    }
    assert!(found, "no seed starts with p1 and q1 apart");
}
