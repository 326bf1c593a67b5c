//! Pairwise similarities per level and their reduction to binned constraints.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::par;
use crate::tree::{NodeIdx, Tree};

/// Number of similarity bins. Fixed.
pub const BINS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    #[default]
    Cosine,
    Jaccard,
    #[serde(alias = "binary_equality")]
    BinaryEquality,
}

impl std::str::FromStr for SimKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cosine" => Ok(SimKind::Cosine),
            "jaccard" => Ok(SimKind::Jaccard),
            "binary-equality" | "binary_equality" => Ok(SimKind::BinaryEquality),
            _ => Err(format!("unknown similarity kind '{s}' (cosine, jaccard, binary-equality)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub level: usize,
    pub node_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Undirected similarity link between two same-depth nodes (`a < b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub a: String,
    pub b: String,
    pub similarity: f64,
    pub bin: usize,
    pub level: usize,
}

impl Constraint {
    pub fn new(a: &str, b: &str, similarity: f64, level: usize) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Constraint {
            a: a.to_string(),
            b: b.to_string(),
            similarity,
            bin: bin_of(similarity).unwrap_or(BINS - 1),
            level,
        }
    }

    pub fn other(&self, id: &str) -> Option<&str> {
        if self.a == id {
            Some(&self.b)
        } else if self.b == id {
            Some(&self.a)
        } else {
            None
        }
    }
}

fn is_binary(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0 || x == 1.0)
}

pub fn compute_similarity(u: &[f64], v: &[f64], kind: SimKind) -> Result<f64> {
    if u.len() != v.len() {
        return invalid(format!("similarity dimension mismatch: {} vs {}", u.len(), v.len()));
    }
    if u.is_empty() {
        return invalid("similarity vectors must be non-empty");
    }
    match kind {
        SimKind::Cosine => {
            let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nu == 0.0 || nv == 0.0 {
                return Ok(0.0);
            }
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            Ok((dot / (nu * nv)).clamp(0.0, 1.0))
        }
        SimKind::Jaccard | SimKind::BinaryEquality => {
            if !is_binary(u) || !is_binary(v) {
                return invalid(format!("{kind:?} similarity needs binary vectors"));
            }
            if kind == SimKind::BinaryEquality {
                return Ok(if u == v { 1.0 } else { 0.0 });
            }
            let inter = u.iter().zip(v).filter(|(a, b)| **a == 1.0 && **b == 1.0).count();
            let union = u.iter().zip(v).filter(|(a, b)| **a == 1.0 || **b == 1.0).count();
            Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
        }
    }
}

/// Similarity matrix over the given same-depth nodes. Uses lifted explicit
/// pairs in pair mode, feature vectors otherwise; all zeros when the tree has
/// no similarity data.
pub fn pairwise_matrix(tree: &Tree, nodes: &[NodeIdx], kind: SimKind) -> Result<SimilarityMatrix> {
    let n = nodes.len();
    let level = nodes.first().map_or(0, |&i| tree.node(i).depth);
    if nodes.iter().any(|&i| tree.node(i).depth != level) {
        return invalid("pairwise matrix over nodes of different depths");
    }
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = if tree.is_pair_mode() {
                tree.lifted_similarity(nodes[i], nodes[j])
            } else {
                match (&tree.node(nodes[i]).sim_vector, &tree.node(nodes[j]).sim_vector) {
                    (Some(u), Some(v)) => compute_similarity(u, v, kind)?,
                    _ => 0.0,
                }
            };
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    Ok(SimilarityMatrix {
        level,
        node_ids: nodes.iter().map(|&i| tree.node(i).id.clone()).collect(),
        values,
    })
}

/// Bin index of a similarity; `None` for zero (no relation).
pub fn bin_of(s: f64) -> Option<usize> {
    if !(s > 0.0) {
        return None;
    }
    Some(if s >= 0.8 {
        0
    } else if s >= 0.6 {
        1
    } else if s >= 0.4 {
        2
    } else if s >= 0.2 {
        3
    } else {
        4
    })
}

/// Per node, keeps the partners in the bins before its first empty bin
/// (strongest first); the union over nodes forms the constraint set.
pub fn bin_and_filter(matrix: &SimilarityMatrix) -> Vec<Constraint> {
    let n = matrix.len();
    let mut keep: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        let mut counts = [0usize; BINS];
        for j in 0..n {
            if j != i {
                if let Some(b) = bin_of(matrix.values[i][j]) {
                    counts[b] += 1;
                }
            }
        }
        let stop = counts.iter().position(|&c| c == 0).unwrap_or(BINS);
        for j in 0..n {
            if j == i {
                continue;
            }
            if let Some(b) = bin_of(matrix.values[i][j]) {
                if b < stop {
                    keep.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    let mut out: Vec<Constraint> = keep
        .into_iter()
        .map(|(i, j)| {
            Constraint::new(&matrix.node_ids[i], &matrix.node_ids[j], matrix.values[i][j], matrix.level)
        })
        .collect();
    sort_canonical(&mut out);
    out
}

pub fn sort_canonical(cs: &mut [Constraint]) {
    cs.sort_by(|x, y| (x.level, &x.a, &x.b).cmp(&(y.level, &y.a, &y.b)));
}

/// Constraints of every level 1..=D. Levels without constraints are omitted.
pub fn extract_level_constraints(tree: &Tree, kind: SimKind) -> Result<BTreeMap<usize, Vec<Constraint>>> {
    let depth = tree.depth();
    let per_level = par::map_range(depth, |k| {
        let nodes = tree.level(k + 1);
        pairwise_matrix(tree, &nodes, kind).map(|m| (k + 1, bin_and_filter(&m)))
    });
    let mut out = BTreeMap::new();
    for r in per_level {
        let (level, cs) = r?;
        if !cs.is_empty() {
            out.insert(level, cs);
        }
    }
    Ok(out)
}
