//! Input hierarchy: parsing, validation, virtual-node expansion and bottom-up
//! propagation of weights and similarity features.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Index of a node inside a [`Tree`].
pub type NodeIdx = usize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeNode {
    pub id: String,
    pub name: String,
    pub children: Vec<NodeIdx>,
    pub parent: Option<NodeIdx>,
    pub weight: f64,
    pub sim_vector: Option<Vec<f64>>,
    pub is_virtual: bool,
    pub depth: usize,
    pub color: Option<String>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A leaf-to-leaf similarity given explicitly instead of via feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub String, pub String, pub f64);

/// Validated hierarchy. Nodes are stored in pre-order (document order).
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
    index: HashMap<String, NodeIdx>,
    root: NodeIdx,
    uniform_depth: usize,
    sim_dimension: Option<usize>,
    explicit_pairs: Option<Vec<Pair>>,
    /// Pair similarities lifted to every level, keyed by canonical (a < b) index.
    lifted: BTreeMap<(NodeIdx, NodeIdx), f64>,
}

/// One node of the input document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub similarity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeDoc>,
}

/// The whole input document: the root node plus optional explicit pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Document {
    #[serde(flatten)]
    pub root: NodeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<Pair>>,
}

impl Document {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

/// Parses and validates a JSON hierarchy document.
pub fn parse_tree(text: &str) -> Result<Tree> {
    let doc: Document = serde_json::from_str(text)?;
    Tree::from_document(&doc)
}

/// Raw node description for [`Tree::from_nodes`].
#[derive(Debug, Clone, Default)]
pub struct NodeSpec {
    pub id: String,
    pub name: String,
    pub children: Vec<String>,
    pub weight: Option<f64>,
    pub similarity: Option<Vec<f64>>,
    pub color: Option<String>,
}

impl Tree {
    pub fn from_document(doc: &Document) -> Result<Tree> {
        let mut specs = Vec::new();
        flatten(&doc.root, &mut specs);
        Tree::from_nodes(specs, doc.pairs.clone())
    }

    /// Builds a tree from a flat node list. The first node must be the root.
    pub fn from_nodes(specs: Vec<NodeSpec>, pairs: Option<Vec<Pair>>) -> Result<Tree> {
        if specs.is_empty() {
            return invalid("empty document");
        }
        let mut spec_index: HashMap<&str, usize> = HashMap::new();
        for (k, s) in specs.iter().enumerate() {
            if s.id.is_empty() {
                return invalid("node with empty id");
            }
            if spec_index.insert(s.id.as_str(), k).is_some() {
                return invalid(format!("duplicate id '{}'", s.id));
            }
        }
        let mut parent_of: Vec<Option<usize>> = vec![None; specs.len()];
        for (k, s) in specs.iter().enumerate() {
            for c in &s.children {
                let Some(&ci) = spec_index.get(c.as_str()) else {
                    return invalid(format!("node '{}' references unknown child '{c}'", s.id));
                };
                if let Some(p) = parent_of[ci] {
                    return invalid(format!(
                        "node '{c}' has multiple parents ('{}' and '{}')",
                        specs[p].id, s.id
                    ));
                }
                parent_of[ci] = Some(k);
            }
        }
        if parent_of[0].is_some() {
            return invalid(format!("cycle through root '{}'", specs[0].id));
        }
        if let Some(k) = (1..specs.len()).find(|&k| parent_of[k].is_none()) {
            return invalid(format!("node '{}' has no parent (second root)", specs[k].id));
        }

        // pre-order walk from the root; anything not reached sits on a cycle
        let mut nodes: Vec<TreeNode> = Vec::with_capacity(specs.len());
        let mut new_index = vec![usize::MAX; specs.len()];
        let mut stack = vec![(0usize, None::<NodeIdx>, 0usize)];
        while let Some((k, parent, depth)) = stack.pop() {
            let s = &specs[k];
            let idx = nodes.len();
            new_index[k] = idx;
            nodes.push(TreeNode {
                id: s.id.clone(),
                name: s.name.clone(),
                children: Vec::new(),
                parent,
                weight: s.weight.unwrap_or(1.0),
                sim_vector: s.similarity.clone(),
                is_virtual: false,
                depth,
                color: s.color.clone(),
            });
            if let Some(p) = parent {
                nodes[p].children.push(idx);
            }
            for c in s.children.iter().rev() {
                stack.push((spec_index[c.as_str()], Some(idx), depth + 1));
            }
        }
        if nodes.len() != specs.len() {
            let k = new_index.iter().position(|&x| x == usize::MAX).unwrap();
            return invalid(format!("cycle involving node '{}'", specs[k].id));
        }

        let index = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let mut tree = Tree {
            nodes,
            index,
            root: 0,
            uniform_depth: 0,
            sim_dimension: None,
            explicit_pairs: None,
            lifted: BTreeMap::new(),
        };
        tree.uniform_depth = tree.nodes.iter().map(|n| n.depth).max().unwrap_or(0);
        tree.validate_attributes(pairs)?;
        Ok(tree)
    }

    fn validate_attributes(&mut self, pairs: Option<Vec<Pair>>) -> Result<()> {
        for n in &self.nodes {
            if !n.weight.is_finite() {
                return invalid(format!("node '{}' has non-finite weight", n.id));
            }
            if let Some(c) = &n.color {
                if parse_hex_color(c).is_none() {
                    return invalid(format!("node '{}' has malformed color '{c}'", n.id));
                }
            }
        }
        let leaves: Vec<NodeIdx> = self.leaves().collect();
        let with_vec = leaves.iter().filter(|&&l| self.nodes[l].sim_vector.is_some()).count();
        if with_vec > 0 {
            if with_vec != leaves.len() {
                return invalid("similarity vectors must be given on every leaf or on none");
            }
            let d = self.nodes[leaves[0]].sim_vector.as_ref().unwrap().len();
            if d == 0 {
                return invalid("similarity vectors must be non-empty");
            }
            for &l in &leaves {
                let v = self.nodes[l].sim_vector.as_ref().unwrap();
                if v.len() != d {
                    return invalid(format!(
                        "similarity dimension mismatch: leaf '{}' has {} entries, expected {d}",
                        self.nodes[l].id,
                        v.len()
                    ));
                }
                if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                    return invalid(format!(
                        "similarity value {x} of leaf '{}' outside [0, 1]",
                        self.nodes[l].id
                    ));
                }
            }
            self.sim_dimension = Some(d);
        }
        if let Some(pairs) = pairs {
            if with_vec > 0 {
                return invalid("both similarity vectors and explicit pairs given");
            }
            let mut seen = HashSet::new();
            for Pair(a, b, s) in &pairs {
                for id in [a, b] {
                    match self.index.get(id) {
                        Some(&i) if self.nodes[i].is_leaf() => {}
                        Some(_) => return invalid(format!("pair references non-leaf '{id}'")),
                        None => return invalid(format!("pair references unknown node '{id}'")),
                    }
                }
                if a == b {
                    return invalid(format!("pair relates '{a}' to itself"));
                }
                if !(0.0..=1.0).contains(s) {
                    return invalid(format!("pair similarity {s} outside [0, 1]"));
                }
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                if !seen.insert(key) {
                    return invalid(format!("pair ({a}, {b}) listed twice"));
                }
            }
            self.explicit_pairs = Some(pairs);
        }
        // internal vectors are derived, never read from input
        for i in 0..self.nodes.len() {
            if !self.nodes[i].is_leaf() {
                self.nodes[i].sim_vector = None;
            }
        }
        Ok(())
    }

    pub fn root(&self) -> NodeIdx {
        self.root
    }

    pub fn node(&self, idx: NodeIdx) -> &TreeNode {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<NodeIdx> {
        self.index.get(id).copied()
    }

    /// Largest leaf depth (the common leaf depth once [`uniform_depth`] ran).
    pub fn depth(&self) -> usize {
        self.uniform_depth
    }

    pub fn sim_dimension(&self) -> Option<usize> {
        self.sim_dimension
    }

    pub fn explicit_pairs(&self) -> Option<&[Pair]> {
        self.explicit_pairs.as_deref()
    }

    pub fn is_pair_mode(&self) -> bool {
        self.explicit_pairs.is_some()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf())
    }

    /// Nodes at the given depth, in document order.
    pub fn level(&self, depth: usize) -> Vec<NodeIdx> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].depth == depth).collect()
    }

    /// Lifted pair similarity between two same-depth nodes (pair mode only).
    pub fn lifted_similarity(&self, a: NodeIdx, b: NodeIdx) -> f64 {
        self.lifted.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub fn ancestor_at(&self, mut idx: NodeIdx, depth: usize) -> NodeIdx {
        while self.nodes[idx].depth > depth {
            idx = self.nodes[idx].parent.expect("non-root node has a parent");
        }
        idx
    }

    /// Rebuilds the tree from a node list in arbitrary order (pre-order is
    /// restored by walking from `root`).
    fn rebuild(&self, nodes: Vec<TreeNode>, root: NodeIdx) -> Tree {
        let mut out: Vec<TreeNode> = Vec::with_capacity(nodes.len());
        let mut stack = vec![(root, None::<NodeIdx>, 0usize)];
        while let Some((k, parent, depth)) = stack.pop() {
            let mut n = nodes[k].clone();
            let kids = std::mem::take(&mut n.children);
            n.parent = parent;
            n.depth = depth;
            let idx = out.len();
            out.push(n);
            if let Some(p) = parent {
                out[p].children.push(idx);
            }
            for &c in kids.iter().rev() {
                stack.push((c, Some(idx), depth + 1));
            }
        }
        let index = out.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let uniform_depth = out.iter().map(|n| n.depth).max().unwrap_or(0);
        Tree {
            nodes: out,
            index,
            root: 0,
            uniform_depth,
            sim_dimension: self.sim_dimension,
            explicit_pairs: self.explicit_pairs.clone(),
            lifted: BTreeMap::new(),
        }
    }
}

fn flatten(doc: &NodeDoc, out: &mut Vec<NodeSpec>) {
    let id = doc.id.clone().unwrap_or_else(|| doc.name.clone());
    out.push(NodeSpec {
        id,
        name: doc.name.clone(),
        children: doc
            .children
            .iter()
            .map(|c| c.id.clone().unwrap_or_else(|| c.name.clone()))
            .collect(),
        weight: doc.weight,
        similarity: doc.similarity.clone(),
        color: doc.color.clone(),
    });
    for c in &doc.children {
        flatten(c, out);
    }
}

pub(crate) fn parse_hex_color(s: &str) -> Option<[u8; 3]> {
    let h = s.strip_prefix('#')?;
    if h.len() != 6 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let v = u32::from_str_radix(h, 16).ok()?;
    Some([(v >> 16) as u8, (v >> 8) as u8, v as u8])
}

/// Inserts chains of virtual nodes above shallow leaves so that every leaf
/// sits at the maximum leaf depth. The original leaf keeps its id and data;
/// chain members are named `<id>__v<k>`.
pub fn uniform_depth(tree: &Tree) -> Tree {
    let depth = tree.depth();
    let mut nodes: Vec<TreeNode> = tree.nodes.clone();
    let mut taken: HashSet<String> = nodes.iter().map(|n| n.id.clone()).collect();
    let shallow: Vec<NodeIdx> = tree
        .leaves()
        .filter(|&l| tree.nodes[l].depth < depth && l != tree.root)
        .collect();
    for leaf in shallow {
        let missing = depth - tree.nodes[leaf].depth;
        let parent = tree.nodes[leaf].parent.unwrap();
        let mut upper = parent;
        let mut slot = nodes[parent].children.iter().position(|&c| c == leaf).unwrap();
        for k in 1..=missing {
            let mut id = format!("{}__v{k}", tree.nodes[leaf].id);
            while taken.contains(&id) {
                id.push('_');
            }
            taken.insert(id.clone());
            let v = TreeNode {
                id,
                name: format!("{} (virtual)", tree.nodes[leaf].name),
                children: Vec::new(),
                parent: Some(upper),
                weight: tree.nodes[leaf].weight,
                sim_vector: tree.nodes[leaf].sim_vector.clone(),
                is_virtual: true,
                depth: 0,
                color: None,
            };
            let vi = nodes.len();
            nodes.push(v);
            nodes[upper].children[slot] = vi;
            nodes[vi].children.push(leaf);
            upper = vi;
            slot = 0;
        }
    }
    let mut out = tree.rebuild(nodes, tree.root);
    out.lifted = BTreeMap::new();
    out
}

/// Bottom-up aggregation: weights are summed, similarity vectors averaged,
/// explicit pair similarities lifted by maximum to every ancestor level.
pub fn propagate_attributes(tree: &Tree) -> Result<Tree> {
    let mut out = tree.clone();
    for l in out.leaves().collect::<Vec<_>>() {
        let w = out.nodes[l].weight;
        if !(w > 0.0) {
            return Err(Error::Validation(format!(
                "leaf '{}' has non-positive weight {w}",
                out.nodes[l].id
            )));
        }
    }
    // reverse pre-order visits children before parents
    for i in (0..out.nodes.len()).rev() {
        if out.nodes[i].is_leaf() {
            continue;
        }
        let kids = out.nodes[i].children.clone();
        out.nodes[i].weight = kids.iter().map(|&c| out.nodes[c].weight).sum();
        if out.sim_dimension.is_some() {
            let d = out.sim_dimension.unwrap();
            let mut mean = vec![0.0; d];
            for &c in &kids {
                let v = out.nodes[c].sim_vector.as_ref().expect("children carry vectors");
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x;
                }
            }
            let k = kids.len() as f64;
            mean.iter_mut().for_each(|m| *m /= k);
            out.nodes[i].sim_vector = Some(mean);
        }
    }
    out.lifted.clear();
    if let Some(pairs) = out.explicit_pairs.clone() {
        for Pair(a, b, s) in &pairs {
            if *s <= 0.0 {
                continue;
            }
            let (mut x, mut y) = (out.index[a], out.index[b]);
            if out.nodes[x].depth != out.nodes[y].depth {
                return invalid(format!("pair ({a}, {b}) spans different depths; expand the tree first"));
            }
            while x != y {
                let key = (x.min(y), x.max(y));
                let e = out.lifted.entry(key).or_insert(0.0);
                *e = e.max(*s);
                match (out.nodes[x].parent, out.nodes[y].parent) {
                    (Some(px), Some(py)) => {
                        x = px;
                        y = py;
                    }
                    _ => break,
                }
            }
        }
    }
    Ok(out)
}

/// Parse, expand to uniform depth and propagate in one go.
pub fn preprocess(text: &str) -> Result<Tree> {
    propagate_attributes(&uniform_depth(&parse_tree(text)?))
}
