use std::path::Path;
use std::process::{Command, Output};

fn simmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simmap"))
        .args(args)
        .env_remove("SIMMAP_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = simmap(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn shoelace(d: &str) -> f64 {
    let nums: Vec<f64> = d
        .split(|c: char| c == 'M' || c == 'L' || c == 'Z' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    let pts: Vec<(f64, f64)> = nums.chunks(2).map(|c| (c[0], c[1])).collect();
    let n = pts.len();
    ((0..n).map(|i| pts[i].0 * pts[(i + 1) % n].1 - pts[(i + 1) % n].0 * pts[i].1).sum::<f64>() / 2.0).abs()
}

const MINIMAL: &str = r#"{"name": "root", "children": [{"name": "a", "weight": 1}, {"name": "b", "weight": 3}]}"#;

#[test]
fn minimal_tree_gives_weighted_cells() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", MINIMAL);
    let prefix = dir.path().join("out");
    ok(&["--input", &input, "--out", prefix.to_str().unwrap()]);
    let svg = std::fs::read_to_string(dir.path().join("out.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let area = |id: &str| {
        let n = doc
            .descendants()
            .find(|n| n.has_tag_name("path") && n.attribute("data-id") == Some(id))
            .unwrap_or_else(|| panic!("no cell {id}"));
        shoelace(n.attribute("d").unwrap())
    };
    let ratio = area("b") / area("a");
    assert!((ratio - 3.0).abs() / 3.0 < 0.05, "ratio {ratio}");
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["constraints_total"], 0);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = String::from_utf8(ok(&["--gen", "two_level", "--seed", "4"]).stdout).unwrap();
    let input = write(dir.path(), "d.json", &data);
    for run in ["x", "y"] {
        let prefix = dir.path().join(run);
        ok(&["--input", &input, "--seed", "9", "--show-unrealized", "--emit-trace", "--out", prefix.to_str().unwrap()]);
    }
    for suffix in ["svg", "metrics.json", "trace.ndjson"] {
        let a = std::fs::read(dir.path().join(format!("x.{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("y.{suffix}"))).unwrap();
        assert!(a == b, "{suffix} differs");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let data = String::from_utf8(ok(&["--gen", "m_n", "--seed", "1"]).stdout).unwrap();
    let input = write(dir.path(), "d.json", &data);
    let run = |env: Option<&str>, args: &[&str], prefix: &str| {
        let p = dir.path().join(prefix);
        let mut c = Command::new(env!("CARGO_BIN_EXE_simmap"));
        c.args(["--input", &input, "--out", p.to_str().unwrap()]).args(args).env_remove("SIMMAP_SEED");
        if let Some(v) = env {
            c.env("SIMMAP_SEED", v);
        }
        assert!(c.output().unwrap().status.success());
        std::fs::read(dir.path().join(format!("{prefix}.svg"))).unwrap()
    };
    assert_eq!(run(Some("21"), &[], "env"), run(None, &["--seed", "21"], "flag"));
}

#[test]
fn generated_m_n_has_eleven_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let data = String::from_utf8(ok(&["--gen", "m_n", "--seed", "42"]).stdout).unwrap();
    let input = write(dir.path(), "mn.json", &data);
    let prefix = dir.path().join("mn");
    ok(&["--input", &input, "--emit-constraints", "--out", prefix.to_str().unwrap()]);
    let cs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mn.constraints.json")).unwrap()).unwrap();
    let leaf = cs.as_array().unwrap().iter().filter(|c| c["level"] == 1).count();
    assert_eq!(leaf, 11, "{cs}");
}

#[test]
fn compare_table_has_a_row_per_method() {
    let out = ok(&["--gen", "two_level", "--compare", "random_cvt,proj_scale,match_swap,neighbor_optim", "--seeds", "0..2"]);
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).map(|l| l.split(" | ").next().unwrap()).collect();
    assert_eq!(rows, ["random_cvt", "proj_scale", "match_swap", "neighbor_optim"]);
}

#[test]
fn single_compare_matches_plain_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let data = String::from_utf8(ok(&["--gen", "two_level", "--seed", "2"]).stdout).unwrap();
    let input = write(dir.path(), "d.json", &data);
    let cmp = dir.path().join("cmp");
    ok(&["--input", &input, "--compare", "match_swap", "--seeds", "6", "--out", cmp.to_str().unwrap()]);
    let plain = dir.path().join("plain");
    ok(&["--input", &input, "--init", "match_swap", "--optimizer", "lloyd", "--seed", "6", "--out", plain.to_str().unwrap()]);
    let c: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cmp.compare.json")).unwrap()).unwrap();
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("plain.metrics.json")).unwrap()).unwrap();
    assert_eq!(c["rows"][0]["reports"][0], m);
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simmap(&["--bogus"]).status.code(), Some(1));
    assert_eq!(simmap(&["--gen", "m_n", "--compare", ""]).status.code(), Some(1));
    assert_eq!(simmap(&["--seeds", "0..3", "--input", "x.json"]).status.code(), Some(1));
    assert_eq!(simmap(&["--input", dir.path().join("missing.json").to_str().unwrap()]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.json", r#"{"name": "r", "children": [{"name": "a", "weight": -1}]}"#);
    assert_eq!(simmap(&["--input", &bad]).status.code(), Some(2));
    let malformed = write(dir.path(), "m.json", "{ not json");
    assert_eq!(simmap(&["--input", &malformed]).status.code(), Some(2));
    assert_eq!(simmap(&["--help"]).status.code(), Some(0));
}

#[test]
fn toml_config_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", MINIMAL);
    let cfg = write(dir.path(), "c.toml", "seed = 5\nboundary = \"square\"\n[optimizer]\nmax_iter = 20\n");
    let a = dir.path().join("a");
    ok(&["--config", &cfg, "--input", &input, "--out", a.to_str().unwrap()]);
    let b = dir.path().join("b");
    ok(&["--config", &cfg, "--input", &input, "--boundary", "regular:6", "--out", b.to_str().unwrap()]);
    let svg_a = std::fs::read_to_string(dir.path().join("a.svg")).unwrap();
    let svg_b = std::fs::read_to_string(dir.path().join("b.svg")).unwrap();
    assert_ne!(svg_a, svg_b);
    let bad = write(dir.path(), "bad.toml", "no_such_key = 1\n");
    assert_eq!(simmap(&["--config", &bad, "--input", &input]).status.code(), Some(1));
}
