//! Regenerable synthetic datasets in the tree input format.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding;
use crate::tree::{Document, NodeDoc, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// `m` parents, `n` leaves; ring-plus-chords constraint graph. With one
    /// parent the root holds the leaves directly.
    MN,
    /// Like `MN` with several parents so that constraints cross parents.
    TwoLevel,
    /// Feature vectors with a near-complete similarity matrix.
    Dense,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::MN => "m_n",
            SynthKind::TwoLevel => "two_level",
            SynthKind::Dense => "dense",
        }
    }

    fn tag(self) -> u64 {
        match self {
            SynthKind::MN => 0x5E01,
            SynthKind::TwoLevel => 0x5E02,
            SynthKind::Dense => 0x5E03,
        }
    }
}

impl std::str::FromStr for SynthKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "m_n" | "m-n" => Ok(SynthKind::MN),
            "two_level" | "two-level" => Ok(SynthKind::TwoLevel),
            "dense" => Ok(SynthKind::Dense),
            _ => Err(format!("unknown dataset kind '{s}' (m_n, two_level, dense)")),
        }
    }
}

/// Unset fields take per-kind defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub leaves: Option<usize>,
    pub parents: Option<usize>,
    /// Exact number of leaf constraints (graph kinds only).
    pub constraints: Option<usize>,
    /// Fraction of all leaf pairs that become constraints (graph kinds) or
    /// probability of a nonzero feature entry (dense).
    pub density: Option<f64>,
    /// Omits the low-similarity pairs that never survive binning but shape
    /// the projection.
    pub no_background: bool,
}

pub const DIMENSION: usize = 6;

struct Resolved {
    leaves: usize,
    parents: usize,
    constraints: usize,
    density: f64,
}

fn resolve(kind: SynthKind, p: &SynthParams) -> Result<Resolved> {
    let (leaves, parents) = match kind {
        SynthKind::MN => (p.leaves.unwrap_or(10), p.parents.unwrap_or(1)),
        SynthKind::TwoLevel => (p.leaves.unwrap_or(17), p.parents.unwrap_or(5)),
        SynthKind::Dense => (p.leaves.unwrap_or(30), p.parents.unwrap_or(3)),
    };
    if !(2..=200).contains(&leaves) {
        return Err(Error::Config(format!("leaf count {leaves} outside 2..=200")));
    }
    if parents == 0 || parents > leaves {
        return Err(Error::Config(format!("parent count {parents} must lie in 1..={leaves}")));
    }
    if let Some(d) = p.density {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::Config(format!("density {d} outside [0, 1]")));
        }
    }
    let max_pairs = leaves * (leaves - 1) / 2;
    let constraints = match (kind, p.constraints, p.density) {
        (SynthKind::Dense, Some(_), _) => {
            return Err(Error::Config("dense datasets take a density, not a constraint count".into()))
        }
        (_, Some(_), Some(_)) => return Err(Error::Config("give either a constraint count or a density".into())),
        (_, Some(c), None) => c,
        (_, None, Some(d)) => (d * max_pairs as f64).round() as usize,
        (SynthKind::MN, None, None) => 11,
        (SynthKind::TwoLevel, None, None) => 24,
        (SynthKind::Dense, None, None) => 0,
    };
    if constraints > max_pairs {
        return Err(Error::Config(format!("{constraints} constraints exceed the {max_pairs} leaf pairs")));
    }
    Ok(Resolved { leaves, parents, constraints, density: p.density.unwrap_or(0.5) })
}

/// Random sizes >= 1 summing to `n`.
fn split(n: usize, parts: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let s = c - prev;
            prev = c;
            s
        })
        .collect()
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// The first `count` edges of a ring over `n` nodes followed by random chords.
fn ring_plus_chords(n: usize, count: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut ring: Vec<(usize, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let e = (i.min((i + 1) % n), i.max((i + 1) % n));
        if !ring.contains(&e) {
            ring.push(e);
        }
    }
    let mut chords: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|e| !ring.contains(e))
        .collect();
    chords.shuffle(rng);
    ring.into_iter().chain(chords).take(count).collect()
}

/// Generates a dataset document. The same kind, parameters and seed always
/// give the same document.
pub fn gen_synthetic(kind: SynthKind, params: &SynthParams, seed: u64) -> Result<Document> {
    let r = resolve(kind, params)?;
    let mut rng = seeding::rng(seed, &[kind.tag()]);
    let sizes = split(r.leaves, r.parents, &mut rng);
    let leaf_id = |k: usize| format!("L{k:03}");
    let mut k = 0;
    let mut parents = Vec::new();
    for (pi, &s) in sizes.iter().enumerate() {
        let mut children = Vec::new();
        for _ in 0..s {
            let similarity = (kind == SynthKind::Dense).then(|| {
                (0..DIMENSION)
                    .map(|_| if rng.gen_bool(r.density) { round3(rng.gen_range(0.1..1.0)) } else { 0.0 })
                    .collect()
            });
            children.push(NodeDoc {
                name: leaf_id(k),
                id: None,
                weight: Some(round3(rng.gen_range(1.0..4.0))),
                similarity,
                color: None,
                children: Vec::new(),
            });
            k += 1;
        }
        parents.push(NodeDoc {
            name: format!("P{pi}"),
            id: None,
            weight: None,
            similarity: None,
            color: None,
            children,
        });
    }
    let pairs = (kind != SynthKind::Dense).then(|| {
        let edges = ring_plus_chords(r.leaves, r.constraints, &mut rng);
        let mut pairs: Vec<Pair> = edges
            .iter()
            .map(|&(a, b)| Pair(leaf_id(a), leaf_id(b), round3(rng.gen_range(0.8..=1.0))))
            .collect();
        if !params.no_background {
            for a in 0..r.leaves {
                for b in a + 1..r.leaves {
                    if !edges.contains(&(a, b)) && rng.gen_bool(0.3) {
                        pairs.push(Pair(leaf_id(a), leaf_id(b), round3(rng.gen_range(0.05..0.55))));
                    }
                }
            }
        }
        pairs
    });
    let children = if parents.len() == 1 && kind == SynthKind::MN {
        parents.pop().map(|p| p.children).unwrap_or_default()
    } else {
        parents
    };
    Ok(Document {
        root: NodeDoc {
            name: format!("synthetic-{}", kind.name()),
            id: None,
            weight: None,
            similarity: None,
            color: None,
            children,
        },
        pairs,
    })
}
