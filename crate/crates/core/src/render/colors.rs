//! Node colors: categorical palette on the first level, small seeded
//! saturation/value perturbations below.

use std::collections::HashMap;

use rand::Rng;

use crate::seeding;
use crate::tree::{parse_hex_color, Tree};

pub const TABLEAU10: [&str; 10] = [
    "#4E79A7", "#F28E2B", "#E15759", "#76B7B2", "#59A14F", "#EDC948", "#B07AA1", "#FF9DA7", "#9C755F",
    "#BAB0AC",
];

pub const TABLEAU20: [&str; 20] = [
    "#4E79A7", "#A0CBE8", "#F28E2B", "#FFBE7D", "#59A14F", "#8CD17D", "#B6992D", "#F1CE63", "#499894",
    "#86BCB6", "#E15759", "#FF9D9A", "#79706E", "#BAB0AC", "#D37295", "#FABFD2", "#B07AA1", "#D4A6C8",
    "#9D7660", "#D7B5A6",
];

/// Largest saturation/value offset applied per depth step.
pub const MAX_OFFSET: f64 = 0.08;

const ROOT_COLOR: &str = "#DDDDDD";

pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    (h, s, max)
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = (h / 60.0).rem_euclid(6.0);
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| ((t + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

pub fn to_hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02X}{g:02X}{b:02X}")
}

/// Fill color of every node, keyed by id.
pub fn assign_colors(tree: &Tree, seed: u64) -> HashMap<String, String> {
    let mut out: HashMap<String, String> = HashMap::new();
    // pre-order guarantees parents are colored before children
    for (i, n) in tree.nodes().iter().enumerate() {
        let color = if let Some(c) = &n.color {
            c.clone()
        } else if n.depth == 0 {
            ROOT_COLOR.to_string()
        } else if n.depth == 1 {
            let siblings = &tree.node(tree.root()).children;
            let k = siblings.iter().position(|&c| c == i).unwrap();
            if siblings.len() <= TABLEAU10.len() {
                TABLEAU10[k].to_string()
            } else {
                TABLEAU20[k % TABLEAU20.len()].to_string()
            }
        } else {
            let parent = &out[&tree.node(n.parent.unwrap()).id];
            if n.is_virtual {
                parent.clone()
            } else {
                let (h, s, v) = rgb_to_hsv(parse_hex_color(parent).expect("colors are validated"));
                let mut rng = seeding::rng(seed, &[i as u64, 0xC010]);
                let ds = rng.gen_range(-MAX_OFFSET..=MAX_OFFSET);
                let dv = rng.gen_range(-MAX_OFFSET..=MAX_OFFSET);
                to_hex(hsv_to_rgb(h, (s + ds).clamp(0.0, 1.0), (v + dv).clamp(0.0, 1.0)))
            }
        };
        out.insert(n.id.clone(), color);
    }
    out
}
