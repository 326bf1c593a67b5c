//! SVG output: filled leaf cells, depth-scaled outlines, interlocking glyphs
//! on realized constraints, optional unrealized links and markers, labels.

pub mod colors;

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Diagram, NeighborMap, Point, Segment};
use crate::similarity::Constraint;
use crate::tree::Tree;

pub use colors::assign_colors;

/// Glyphs may not span more than this share of their shared segment.
pub const GLYPH_CAP: f64 = 0.4;
pub const STROKE_DECAY: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    pub width: f64,
    pub height: f64,
    pub show_unrealized: bool,
    pub show_disconnect_icon: bool,
    /// Minimum cell area, as a share of the root area, for a label.
    pub label_min_area: f64,
    pub seed: u64,
    pub stroke_base: f64,
    /// Intrusion depths (strong, medium, weak) as shares of the shared edge.
    pub glyph_sizes: [f64; 3],
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 800.0,
            height: 800.0,
            show_unrealized: false,
            show_disconnect_icon: false,
            label_min_area: 0.01,
            seed: 0,
            stroke_base: 4.0,
            glyph_sizes: [0.3, 0.2, 0.12],
        }
    }
}

impl RenderOptions {
    pub fn validate(&self) -> Result<()> {
        let [a, b, c] = self.glyph_sizes;
        if !(a > b && b > c && c > 0.0) {
            return Err(Error::Config("glyph sizes must be strictly decreasing and positive".into()));
        }
        if !(self.stroke_base > 0.0) {
            return Err(Error::Config("stroke_base must be positive".into()));
        }
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(Error::Config("output size must be positive".into()));
        }
        Ok(())
    }

    fn glyph_depth(&self, bin: usize) -> f64 {
        let k = match bin {
            0 => 0,
            1 | 2 => 1,
            _ => 2,
        };
        self.glyph_sizes[k].min(GLYPH_CAP)
    }
}

/// Class-safe form of a node id.
pub fn class_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

struct View {
    min: Point,
    max_y: f64,
    s: f64,
    off: Point,
}

impl View {
    fn new(root: &ConvexPolygon, w: f64, h: f64) -> Self {
        let bb = root.aabb();
        let s = (w / (bb.width() * 1.04)).min(h / (bb.height() * 1.04));
        let off = Point::new((w - bb.width() * s) / 2.0, (h - bb.height() * s) / 2.0);
        View { min: bb.min, max_y: bb.max.y, s, off }
    }

    fn map(&self, p: Point) -> Point {
        Point::new((p.x - self.min.x) * self.s + self.off.x, (self.max_y - p.y) * self.s + self.off.y)
    }

    fn path(&self, pts: &[Point]) -> String {
        let mut d = String::new();
        for (k, p) in pts.iter().enumerate() {
            let q = self.map(*p);
            let _ = write!(d, "{}{} {} ", if k == 0 { "M" } else { "L" }, num(q.x), num(q.y));
        }
        d.push('Z');
        d
    }

    fn points(&self, pts: &[Point]) -> String {
        pts.iter()
            .map(|p| {
                let q = self.map(*p);
                format!("{},{}", num(q.x), num(q.y))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The pair of mirrored trapezoid tabs on a shared segment: the first
/// intrudes into `b`, the second into `a`. Shrinks until both stay inside
/// their host cells.
pub fn glyph_tabs(
    seg: &Segment,
    a: &ConvexPolygon,
    b: &ConvexPolygon,
    depth_share: f64,
    tol: f64,
) -> Option<([Point; 4], [Point; 4])> {
    let len = seg.length();
    let u = seg.direction();
    let mut n = u.perp();
    if (b.centroid() - seg.midpoint()).dot(n) < 0.0 {
        n = -n;
    }
    let mid = seg.midpoint();
    let mut k = 1.0;
    for _ in 0..40 {
        let depth = depth_share * len * k;
        let base = 0.3 * GLYPH_CAP * len * k;
        let top = 0.5 * GLYPH_CAP * len * k;
        let tab = |dir: Point| {
            [
                mid - u * base,
                mid + u * base,
                mid + u * top + dir * depth,
                mid - u * top + dir * depth,
            ]
        };
        let into_b = tab(n);
        let into_a = tab(-n);
        if into_b.iter().all(|&p| b.contains(p, tol)) && into_a.iter().all(|&p| a.contains(p, tol)) {
            return Some((into_b, into_a));
        }
        k *= 0.8;
    }
    None
}

/// Serializes the treemap. `levels[k]` holds the diagrams of depth `k + 1`;
/// constraints and the neighbor map belong to the leaf level.
pub fn render_svg(
    levels: &[Vec<Diagram>],
    root: &ConvexPolygon,
    tree: &Tree,
    constraints: &[Constraint],
    nm: &NeighborMap,
    opts: &RenderOptions,
) -> String {
    let view = View::new(root, opts.width, opts.height);
    let colors = assign_colors(tree, opts.seed);
    let root_area = root.area();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(opts.width),
        num(opts.height),
        num(opts.width),
        num(opts.height)
    );
    let Some(leaves) = levels.last() else {
        let _ = writeln!(
            svg,
            r##"<path class="cell cell-{}" data-id="{}" d="{}" fill="{}"/>"##,
            class_id(&tree.node(tree.root()).id),
            escape(&tree.node(tree.root()).id),
            view.path(root.vertices()),
            colors[&tree.node(tree.root()).id]
        );
        svg.push_str("</svg>\n");
        return svg;
    };

    svg.push_str("<g class=\"cells\">\n");
    for d in leaves {
        for c in &d.cells {
            let path = c.polygon.as_ref().map_or(String::new(), |p| view.path(p.vertices()));
            let _ = writeln!(
                svg,
                r#"<path class="cell cell-{}" data-id="{}" d="{}" fill="{}" stroke="none"/>"#,
                class_id(&c.node_id),
                escape(&c.node_id),
                path,
                colors[&c.node_id]
            );
        }
    }
    svg.push_str("</g>\n<g class=\"outlines\" fill=\"none\" stroke=\"#FFFFFF\" stroke-linejoin=\"round\">\n");
    let _ = writeln!(
        svg,
        r#"<polygon class="outline level-0" points="{}" stroke-width="{}"/>"#,
        view.points(root.vertices()),
        num(opts.stroke_base / STROKE_DECAY)
    );
    for (k, level) in levels.iter().enumerate().rev() {
        let width = opts.stroke_base * STROKE_DECAY.powi(k as i32);
        for d in level {
            for c in d.cells.iter().filter_map(|c| c.polygon.as_ref()) {
                let _ = writeln!(
                    svg,
                    r#"<polygon class="outline level-{}" points="{}" stroke-width="{}"/>"#,
                    k + 1,
                    view.points(c.vertices()),
                    num(width)
                );
            }
        }
    }
    svg.push_str("</g>\n");

    let cell_of = |id: &str| {
        nm.index_of(id).and_then(|k| {
            let (d, c) = nm.location(k);
            let cell = &leaves[d].cells[c];
            cell.polygon.as_ref().map(|p| (cell, p))
        })
    };
    let tol = 1e-9 * root.aabb().diagonal();
    let mut unrealized: Vec<&Constraint> = Vec::new();
    svg.push_str("<g class=\"glyphs\" stroke=\"#FFFFFF\">\n");
    for c in constraints {
        let segs = nm.shared_segments(&c.a, &c.b);
        let Some(seg) = crate::optimizer::moves::longest(segs) else {
            unrealized.push(c);
            continue;
        };
        let (Some((_, pa)), Some((_, pb))) = (cell_of(&c.a), cell_of(&c.b)) else { continue };
        let tabs = glyph_tabs(seg, pa, pb, opts.glyph_depth(c.bin), tol);
        let (into_b, into_a) = tabs.unwrap_or_else(|| {
            // degenerate sliver: collapse the tab onto the edge
            let m = seg.midpoint();
            ([m; 4], [m; 4])
        });
        let class = format!("glyph glyph-{}-{}", class_id(&c.a), class_id(&c.b));
        for (tab, fill_id) in [(into_b, &c.a), (into_a, &c.b)] {
            let _ = writeln!(
                svg,
                r#"<path class="{class}" data-a="{}" data-b="{}" d="{}" fill="{}" stroke-width="{}"/>"#,
                escape(&c.a),
                escape(&c.b),
                view.path(&tab),
                colors[fill_id],
                num(opts.stroke_base * STROKE_DECAY.powi(levels.len() as i32))
            );
        }
    }
    svg.push_str("</g>\n");

    if opts.show_unrealized {
        svg.push_str("<g class=\"unrealized-links\" stroke=\"#D62728\" stroke-dasharray=\"6 4\" fill=\"none\">\n");
        for c in &unrealized {
            let (Some((_, pa)), Some((_, pb))) = (cell_of(&c.a), cell_of(&c.b)) else { continue };
            let (p, q) = (view.map(pa.centroid()), view.map(pb.centroid()));
            let _ = writeln!(
                svg,
                r#"<line class="unrealized unrealized-{}-{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="1.5"/>"#,
                class_id(&c.a),
                class_id(&c.b),
                num(p.x),
                num(p.y),
                num(q.x),
                num(q.y)
            );
        }
        svg.push_str("</g>\n");
    }

    if opts.show_disconnect_icon {
        let mut owners: Vec<&str> = unrealized.iter().flat_map(|c| [c.a.as_str(), c.b.as_str()]).collect();
        owners.sort_unstable();
        owners.dedup();
        svg.push_str("<g class=\"disconnect-markers\" stroke=\"#D62728\" fill=\"none\">\n");
        for id in owners {
            let Some((_, p)) = cell_of(id) else { continue };
            let q = view.map(p.centroid());
            let r = 5.0;
            let _ = writeln!(
                svg,
                r#"<path class="disconnect disconnect-{}" d="M{} {} L{} {} M{} {} L{} {}" stroke-width="2"/>"#,
                class_id(id),
                num(q.x - r),
                num(q.y - r),
                num(q.x + r),
                num(q.y + r),
                num(q.x - r),
                num(q.y + r),
                num(q.x + r),
                num(q.y - r)
            );
        }
        svg.push_str("</g>\n");
    }

    svg.push_str("<g class=\"labels\" text-anchor=\"middle\" dominant-baseline=\"middle\" fill=\"#222222\">\n");
    let names: HashMap<&str, &str> = tree.nodes().iter().map(|n| (n.id.as_str(), n.name.as_str())).collect();
    let mut seen = HashSet::new();
    for d in leaves {
        for c in &d.cells {
            let Some(p) = &c.polygon else { continue };
            if p.area() < opts.label_min_area * root_area || !seen.insert(&c.node_id) {
                continue;
            }
            let q = view.map(p.centroid());
            let px_area = p.area() * view.s * view.s;
            let size = (0.12 * px_area.sqrt()).clamp(6.0, 32.0);
            let _ = writeln!(
                svg,
                r#"<text class="label label-{}" x="{}" y="{}" font-size="{}">{}</text>"#,
                class_id(&c.node_id),
                num(q.x),
                num(q.y),
                num(size),
                escape(names.get(c.node_id.as_str()).copied().unwrap_or(&c.node_id))
            );
        }
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}
