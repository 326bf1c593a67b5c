use simmap_core::pipeline::{run_tree, RunConfig};
use simmap_core::render::colors::{rgb_to_hsv, MAX_OFFSET, TABLEAU10};
use simmap_core::render::{assign_colors, GLYPH_CAP};
use simmap_core::tree::preprocess;

fn hsv(hex: &str) -> (f64, f64, f64) {
    let v = u32::from_str_radix(&hex[1..], 16).unwrap();
    rgb_to_hsv([(v >> 16) as u8, (v >> 8) as u8, v as u8])
}

#[test]
fn first_level_follows_tableau10_and_children_stay_close() {
    let t = preprocess(
        r##"{"name": "r", "children": [
            {"name": "a", "children": [{"name": "a1"}, {"name": "a2"}, {"name": "a3", "color": "#FF0000"}]},
            {"name": "b", "children": [{"name": "b1"}]},
            {"name": "c", "children": [{"name": "c1"}]}]}"##,
    )
    .unwrap();
    for seed in 0..20 {
        let colors = assign_colors(&t, seed);
        // published Tableau 10 palette
        assert_eq!([&colors["a"], &colors["b"], &colors["c"]], ["#4E79A7", "#F28E2B", "#E15759"]);
        assert_eq!(&TABLEAU10[..3], ["#4E79A7", "#F28E2B", "#E15759"]);
        assert_eq!(colors["a3"], "#FF0000");
        for (child, parent) in [("a1", "a"), ("a2", "a"), ("b1", "b"), ("c1", "c")] {
            let (h0, s0, v0) = hsv(&colors[parent]);
            let (h1, s1, v1) = hsv(&colors[child]);
            // 8-bit channels quantize hue and the offsets by up to ~1/255
            assert!((h1 - h0).abs() < 2.0, "{child}: hue {h0} -> {h1}");
            assert!((s1 - s0).abs() <= MAX_OFFSET + 0.01 && (v1 - v0).abs() <= MAX_OFFSET + 0.01, "{child}");
        }
    }
}

fn svg_of(doc: &str, show_unrealized: bool) -> (String, simmap_core::metrics::MetricsReport) {
    let mut cfg = RunConfig::default();
    cfg.render.show_unrealized = show_unrealized;
    let art = run_tree(&preprocess(doc).unwrap(), &cfg).unwrap();
    (art.svg, art.report)
}

fn classed<'a>(doc: &'a roxmltree::Document<'a>, tag: &'a str, class: &'a str) -> Vec<roxmltree::Node<'a, 'a>> {
    doc.descendants()
        .filter(|n| n.has_tag_name(tag) && n.attribute("class").is_some_and(|c| c.split(' ').any(|x| x == class)))
        .collect()
}

#[test]
fn no_constraints_no_glyphs() {
    let (svg, rep) = svg_of(r#"{"name": "r", "children": [{"name": "a"}, {"name": "b", "weight": 2}, {"name": "c"}]}"#, true);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(rep.constraints_total, 0);
    assert!(classed(&doc, "path", "glyph").is_empty());
    assert!(classed(&doc, "line", "unrealized").is_empty());
    assert_eq!(classed(&doc, "path", "cell").len(), 3);
}

fn path_points(d: &str) -> Vec<(f64, f64)> {
    let nums: Vec<f64> = d
        .split(|c: char| c == 'M' || c == 'L' || c == 'Z' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().unwrap())
        .collect();
    nums.chunks(2).map(|c| (c[0], c[1])).collect()
}

#[test]
fn one_strong_constraint_draws_two_strong_tabs() {
    let (svg, rep) = svg_of(r#"{"name": "r", "children": [{"name": "a"}, {"name": "b"}], "pairs": [["a", "b", 0.9]]}"#, true);
    assert_eq!((rep.constraints_total, rep.constraints_preserved), (1, 1));
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let tabs = classed(&doc, "path", "glyph");
    assert_eq!(tabs.len(), 2);
    for tab in tabs {
        assert!(tab.attribute("class").unwrap().contains("glyph-a-b"));
        let p = path_points(tab.attribute("d").unwrap());
        assert_eq!(p.len(), 4);
        let dist = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        let mid = |a: (f64, f64), b: (f64, f64)| ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        // depth over outer width is independent of edge length and shrinking
        let ratio = dist(mid(p[0], p[1]), mid(p[2], p[3])) / dist(p[2], p[3]);
        let strong = RunConfig::default().render.glyph_sizes[0];
        assert!((ratio - strong / GLYPH_CAP).abs() < 1e-3, "ratio {ratio}");
    }
}
