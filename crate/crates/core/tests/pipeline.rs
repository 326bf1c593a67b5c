use simmap_core::pipeline::{compare, replay_trace, run_tree, BoundarySpec, Method, RunConfig};
use simmap_core::synth::{gen_synthetic, SynthKind, SynthParams};
use simmap_core::tree::preprocess;
use simmap_core::Error;

fn two_level() -> simmap_core::tree::Tree {
    preprocess(&gen_synthetic(SynthKind::TwoLevel, &SynthParams::default(), 5).unwrap().to_json()).unwrap()
}

#[test]
fn trace_replay_reproduces_metrics() {
    let tree = two_level();
    for boundary in [BoundarySpec::Square, BoundarySpec::Regular(7), BoundarySpec::Circle(64)] {
        let cfg = RunConfig { emit_trace: true, boundary, seed: 3, ..RunConfig::default() };
        let art = run_tree(&tree, &cfg).unwrap();
        let (tm, report) = replay_trace(&tree, &art.constraints, art.trace.as_deref().unwrap()).unwrap();
        assert_eq!(report.to_json(), art.report.to_json(), "{boundary:?}");
        assert_eq!(tm.render(&tree, &cfg.render), art.svg);
    }
}

#[test]
fn truncated_trace_is_rejected() {
    let tree = two_level();
    let art = run_tree(&tree, &RunConfig { emit_trace: true, ..RunConfig::default() }).unwrap();
    let header: String = art.trace.unwrap().lines().next().unwrap().to_string();
    assert!(matches!(replay_trace(&tree, &art.constraints, &header), Err(Error::Validation(_))));
    assert!(matches!(replay_trace(&tree, &art.constraints, "{"), Err(Error::Validation(_))));
}

#[test]
fn compare_single_method_equals_plain_run() {
    let tree = two_level();
    let cmp = compare(&tree, &RunConfig::default(), &[Method::NeighborOptim], &[11]).unwrap();
    let plain = run_tree(&tree, &RunConfig { seed: 11, ..RunConfig::default() }.with_method(Method::NeighborOptim)).unwrap();
    assert_eq!(cmp.rows.len(), 1);
    assert_eq!(cmp.rows[0].reports[0], plain.report);
    assert_eq!(cmp.rows[0].preserved.stdev, 0.0);
}

#[test]
fn compare_reports_every_method() {
    let tree = two_level();
    let cmp = compare(&tree, &RunConfig::default(), &Method::ALL, &[0, 1]).unwrap();
    assert_eq!(cmp.rows.iter().map(|r| r.method).collect::<Vec<_>>(), Method::ALL);
    assert_eq!(cmp.table().lines().count(), 5);
    assert!(matches!(compare(&tree, &RunConfig::default(), &[], &[0]), Err(Error::Config(_))));
    assert!(matches!(compare(&tree, &RunConfig::default(), &Method::ALL, &[]), Err(Error::Config(_))));
}

#[test]
fn runs_repeat_exactly() {
    let tree = two_level();
    let cfg = RunConfig { emit_trace: true, ..RunConfig::default() };
    let (a, b) = (run_tree(&tree, &cfg).unwrap(), run_tree(&tree, &cfg).unwrap());
    assert_eq!(a.svg, b.svg);
    assert_eq!(a.report.to_json(), b.report.to_json());
    assert_eq!(a.trace, b.trace);
}

#[cfg(feature = "parallel")]
#[test]
fn thread_count_does_not_change_output() {
    let tree = preprocess(&gen_synthetic(SynthKind::Dense, &SynthParams::default(), 1).unwrap().to_json()).unwrap();
    let cfg = RunConfig { emit_trace: true, ..RunConfig::default() };
    let in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_tree(&tree, &cfg).unwrap())
    };
    let (one, four) = (in_pool(1), in_pool(4));
    assert_eq!(one.svg, four.svg);
    assert_eq!(one.trace, four.trace);
}
