//! Level-wise, round-robin layout optimization.

pub mod moves;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::neighbors::{cell_neighbors, default_tolerance};
use crate::geometry::relax::adapt_weights;
use crate::geometry::{Diagram, NeighborMap, Point};
use crate::seeding;
use crate::similarity::Constraint;
use crate::tree::{NodeIdx, Tree};

pub use moves::{move_orthogonal, move_toward, neighborhood_step};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMode {
    /// Constraint-driven moves with centroid fallback.
    #[default]
    Neighborhood,
    /// Every cell relaxes towards its centroid; constraints are ignored.
    Lloyd,
}

impl std::str::FromStr for OptimizerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "neighborhood" => Ok(OptimizerMode::Neighborhood),
            "lloyd" => Ok(OptimizerMode::Lloyd),
            _ => Err(format!("unknown optimizer mode '{s}' (neighborhood, lloyd)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    pub growth_start_fraction: f64,
    pub max_neighbor_count: usize,
    pub step_fraction: f64,
    pub k_min: f64,
    pub k_max: f64,
    /// Inset of the parent boundary for site moves, as a fraction of scale.
    pub boundary_margin: f64,
    pub adapt_rate: f64,
    /// Per-iteration decay of the step once growth has started.
    pub step_decay: f64,
    pub mode: OptimizerMode,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iter: 150,
            growth_start_fraction: 0.8,
            max_neighbor_count: 6,
            step_fraction: 0.5,
            k_min: 0.9,
            k_max: 1.3,
            boundary_margin: 1e-3,
            adapt_rate: crate::geometry::DEFAULT_ADAPT_RATE,
            step_decay: 0.95,
            mode: OptimizerMode::Neighborhood,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.k_min > 0.0 && self.k_min < self.k_max) {
            return bad("distance band needs 0 < k_min < k_max");
        }
        if !(self.growth_start_fraction > 0.0 && self.growth_start_fraction < 1.0) {
            return bad("growth_start_fraction must lie in (0, 1)");
        }
        if !(self.step_fraction > 0.0 && self.step_fraction <= 1.0) {
            return bad("step_fraction must lie in (0, 1]");
        }
        if !(self.adapt_rate > 0.0 && self.adapt_rate <= 1.0) {
            return bad("adapt_rate must lie in (0, 1]");
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return bad("step_decay must lie in (0, 1]");
        }
        if !(self.boundary_margin >= 0.0 && self.boundary_margin < 0.1) {
            return bad("boundary_margin must lie in [0, 0.1)");
        }
        if self.max_neighbor_count == 0 {
            return bad("max_neighbor_count must be positive");
        }
        Ok(())
    }

    /// First iteration with weight growth.
    pub fn growth_start(&self, max_iter: usize) -> usize {
        (self.growth_start_fraction * max_iter as f64).ceil() as usize
    }

    pub fn step_at(&self, iter: usize, growth_start: usize) -> f64 {
        if iter < growth_start {
            self.step_fraction
        } else {
            self.step_fraction * self.step_decay.powi((iter - growth_start + 1) as i32)
        }
    }
}

/// One parent with its children, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub parent: NodeIdx,
    pub children: Vec<NodeIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelGroups {
    pub level: usize,
    pub groups: Vec<Group>,
}

/// Levels 1..=D top-down; each level lists every parent of that level's nodes.
pub fn build_level_queue(tree: &Tree) -> Vec<LevelGroups> {
    (1..=tree.depth())
        .map(|level| LevelGroups {
            level,
            groups: tree
                .level(level - 1)
                .into_iter()
                .filter(|&p| !tree.node(p).is_leaf())
                .map(|p| Group { parent: p, children: tree.node(p).children.clone() })
                .collect(),
        })
        .collect()
}

/// All diagrams of one level plus their joint neighbor map.
#[derive(Debug, Clone)]
pub struct LevelState {
    pub level: usize,
    pub diagrams: Vec<Diagram>,
    pub constraints: Vec<Constraint>,
    pub neighbor_map: NeighborMap,
    pub iter: usize,
    pub max_iter: usize,
}

impl LevelState {
    pub fn new(level: usize, diagrams: Vec<Diagram>, constraints: Vec<Constraint>, max_iter: usize) -> Self {
        let mut s = LevelState {
            level,
            diagrams,
            constraints,
            neighbor_map: NeighborMap::default(),
            iter: 0,
            max_iter,
        };
        s.refresh_neighbors();
        s
    }

    pub fn scale(&self) -> f64 {
        self.diagrams.first().map_or(1.0, |d| d.scale)
    }

    pub fn refresh_neighbors(&mut self) {
        self.neighbor_map = cell_neighbors(&self.diagrams, default_tolerance(self.scale()));
    }

    pub fn realized_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| self.neighbor_map.are_neighbors(&c.a, &c.b))
            .count()
    }

    pub fn sites(&self) -> Vec<Point> {
        self.diagrams.iter().flat_map(|d| d.cells.iter().map(|c| c.site)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.diagrams.iter().flat_map(|d| d.cells.iter().map(|c| c.weight)).collect()
    }
}

/// Constraints keyed by level-wide cell index.
#[derive(Debug, Clone, Default)]
pub struct ConstraintIndex {
    partners: Vec<Vec<(usize, f64)>>,
}

impl ConstraintIndex {
    pub fn new(nm: &NeighborMap, constraints: &[Constraint]) -> Self {
        let mut partners = vec![Vec::new(); nm.len()];
        for c in constraints {
            if let (Some(a), Some(b)) = (nm.index_of(&c.a), nm.index_of(&c.b)) {
                partners[a].push((b, c.similarity));
                partners[b].push((a, c.similarity));
            }
        }
        for p in &mut partners {
            p.sort_by(|x, y| x.0.cmp(&y.0));
        }
        ConstraintIndex { partners }
    }

    pub fn partners(&self, idx: usize) -> &[(usize, f64)] {
        &self.partners[idx]
    }

    pub fn constrained(&self, a: usize, b: usize) -> bool {
        self.partners[a].binary_search_by(|x| x.0.cmp(&b)).is_ok()
    }
}

fn apply_move(d: &mut Diagram, ci: usize, p: Point) -> Result<()> {
    if p == d.cells[ci].site {
        return Ok(());
    }
    let tol = d.coincidence_tol() * 1e3;
    if d.cells.iter().enumerate().any(|(k, c)| k != ci && c.site.dist(p) <= tol) {
        return Ok(());
    }
    d.cells[ci].site = p;
    d.recompute()
}

/// Runs `max_iter` sweeps over the level: neighbor update, one move per cell
/// in round-robin diagram order, and weight growth in the last iterations.
/// `observer` sees the state after every iteration.
pub fn optimize_level(
    mut state: LevelState,
    cfg: &OptimizerConfig,
    seed: u64,
    observer: &mut dyn FnMut(&LevelState),
) -> Result<LevelState> {
    cfg.validate()?;
    let idx = ConstraintIndex::new(&state.neighbor_map, &state.constraints);
    let start = cfg.growth_start(state.max_iter);
    let mut rngs: Vec<_> = (0..state.diagrams.len())
        .map(|di| seeding::rng(seed, &[state.level as u64, di as u64, 0x6A0]))
        .collect();
    let mut offsets = Vec::with_capacity(state.diagrams.len());
    let mut total = 0;
    for d in &state.diagrams {
        offsets.push(total);
        total += d.cells.len();
    }
    for iter in 0..state.max_iter {
        state.iter = iter;
        let step = cfg.step_at(iter, start);
        for di in 0..state.diagrams.len() {
            for ci in 0..state.diagrams[di].cells.len() {
                let target = match cfg.mode {
                    OptimizerMode::Neighborhood => {
                        neighborhood_step(&state, &idx, offsets[di] + ci, step, cfg)
                    }
                    OptimizerMode::Lloyd => {
                        let d = &state.diagrams[di];
                        moves::centroid_target(&d.cells[ci], &d.boundary, step, cfg.boundary_margin * d.scale)
                    }
                };
                if let Some(p) = target {
                    apply_move(&mut state.diagrams[di], ci, p)?;
                }
            }
        }
        if iter >= start {
            for (d, rng) in state.diagrams.iter_mut().zip(rngs.iter_mut()) {
                *d = adapt_weights(d, cfg.adapt_rate, rng)?;
            }
        }
        state.refresh_neighbors();
        state.iter = iter + 1;
        observer(&state);
    }
    Ok(state)
}
