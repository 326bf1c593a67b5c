//! End-to-end composition: preprocess, constraints, per-level initialization
//! and optimization, metrics, rendering, trace and comparison sweeps.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, ConvexPolygon, Diagram, NeighborMap, Point};
use crate::layout_init::{
    build_cvt, match_assignment, mds_project, proj_scale_init, random_assignment, swap_improve, Strategy,
    DEFAULT_SWAP_PASSES,
};
use crate::metrics::{LevelSummary, MetricsReport};
use crate::optimizer::{build_level_queue, optimize_level, Group, LevelState, OptimizerConfig, OptimizerMode};
use crate::par;
use crate::render::{render_svg, RenderOptions};
use crate::seeding;
use crate::similarity::{extract_level_constraints, pairwise_matrix, Constraint, SimKind};
use crate::tree::{preprocess, Tree};

/// Shape of the root boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BoundarySpec {
    Square,
    Regular(usize),
    Circle(usize),
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec::Regular(64)
    }
}

impl std::str::FromStr for BoundarySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let count = |v: &str| -> std::result::Result<usize, String> {
            match v.parse::<usize>() {
                Ok(n) if (3..=4096).contains(&n) => Ok(n),
                _ => Err(format!("polygon vertex count '{v}' must be an integer in 3..=4096")),
            }
        };
        match s.split_once(':') {
            None if s == "square" => Ok(BoundarySpec::Square),
            None if s == "circle" => Ok(BoundarySpec::Circle(64)),
            Some(("regular", n)) => Ok(BoundarySpec::Regular(count(n)?)),
            Some(("circle", n)) => Ok(BoundarySpec::Circle(count(n)?)),
            _ => Err(format!("unknown boundary '{s}' (square, regular:N, circle:K)")),
        }
    }
}

impl TryFrom<String> for BoundarySpec {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<BoundarySpec> for String {
    fn from(b: BoundarySpec) -> String {
        match b {
            BoundarySpec::Square => "square".into(),
            BoundarySpec::Regular(n) => format!("regular:{n}"),
            BoundarySpec::Circle(k) => format!("circle:{k}"),
        }
    }
}

impl BoundarySpec {
    /// Polygon of the given width (side length or circumscribed diameter).
    pub fn polygon(self, size: f64) -> Result<ConvexPolygon> {
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::Config(format!("boundary size {size} must be positive")));
        }
        match self {
            BoundarySpec::Square => ConvexPolygon::square(Point::ORIGIN, size),
            BoundarySpec::Regular(n) | BoundarySpec::Circle(n) => {
                let c = Point::new(size / 2.0, size / 2.0);
                // start at the top so that even polygons have a flat base
                let verts = (0..n)
                    .map(|k| {
                        let t = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * k as f64 / n as f64;
                        c + Point::new(t.cos(), t.sin()) * (size / 2.0)
                    })
                    .collect();
                ConvexPolygon::new(verts)
            }
        }
    }
}

/// One column of the results table: initialization plus optimizer mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RandomCvt,
    ProjScale,
    MatchSwap,
    NeighborOptim,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::RandomCvt, Method::ProjScale, Method::MatchSwap, Method::NeighborOptim];

    pub fn strategy(self) -> Strategy {
        match self {
            Method::RandomCvt => Strategy::RandomCvt,
            Method::ProjScale => Strategy::ProjScale,
            Method::MatchSwap | Method::NeighborOptim => Strategy::MatchSwap,
        }
    }

    pub fn mode(self) -> OptimizerMode {
        match self {
            Method::NeighborOptim => OptimizerMode::Neighborhood,
            _ => OptimizerMode::Lloyd,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::RandomCvt => "random_cvt",
            Method::ProjScale => "proj_scale",
            Method::MatchSwap => "match_swap",
            Method::NeighborOptim => "neighbor_optim",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (random_cvt, proj_scale, match_swap, neighbor_optim)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Output path prefix; artifacts get `.svg`, `.metrics.json`, ... appended.
    pub out: PathBuf,
    pub boundary: BoundarySpec,
    pub size: f64,
    pub init: Strategy,
    pub sim: SimKind,
    pub seed: u64,
    pub swap_passes: usize,
    pub optimizer: OptimizerConfig,
    pub render: RenderOptions,
    pub emit_constraints: bool,
    pub emit_geometry: bool,
    pub emit_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out: PathBuf::from("treemap"),
            boundary: BoundarySpec::default(),
            size: 1000.0,
            init: Strategy::MatchSwap,
            sim: SimKind::Cosine,
            seed: 0,
            swap_passes: DEFAULT_SWAP_PASSES,
            optimizer: OptimizerConfig::default(),
            render: RenderOptions::default(),
            emit_constraints: false,
            emit_geometry: false,
            emit_trace: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.render.validate()?;
        if !(self.size > 0.0 && self.size.is_finite()) {
            return Err(Error::Config("size must be positive".into()));
        }
        if self.optimizer.max_iter == 0 {
            return Err(Error::Config("iteration count must be positive".into()));
        }
        Ok(())
    }

    pub fn with_method(&self, m: Method) -> RunConfig {
        let mut c = self.clone();
        c.init = m.strategy();
        c.optimizer.mode = m.mode();
        c
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelLayout {
    pub level: usize,
    pub diagrams: Vec<Diagram>,
    pub constraints: Vec<Constraint>,
    #[serde(skip)]
    pub neighbor_map: NeighborMap,
    /// Constraints realized right after initialization.
    pub init_realized: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Treemap {
    pub scale: f64,
    pub root: ConvexPolygon,
    pub levels: Vec<LevelLayout>,
}

impl Treemap {
    pub fn leaf_level(&self) -> Option<&LevelLayout> {
        self.levels.last()
    }

    pub fn report(&self) -> Result<MetricsReport> {
        let summaries = self
            .levels
            .iter()
            .map(|l| LevelSummary {
                level: l.level,
                constraints_total: l.constraints.len(),
                constraints_preserved: l
                    .constraints
                    .iter()
                    .filter(|c| l.neighbor_map.are_neighbors(&c.a, &c.b))
                    .count(),
            })
            .collect();
        match self.leaf_level() {
            Some(l) => MetricsReport::compute(l.level, &l.diagrams, &l.neighbor_map, &l.constraints, summaries),
            None => MetricsReport::compute(0, &[], &NeighborMap::default(), &[], summaries),
        }
    }

    pub fn render(&self, tree: &Tree, opts: &RenderOptions) -> String {
        let levels: Vec<Vec<Diagram>> = self.levels.iter().map(|l| l.diagrams.clone()).collect();
        let empty = NeighborMap::default();
        let (cs, nm) = self.leaf_level().map_or((&[][..], &empty), |l| (&l.constraints[..], &l.neighbor_map));
        render_svg(&levels, &self.root, tree, cs, nm, opts)
    }
}

/// Progress notifications from [`layout_treemap`].
pub enum LayoutEvent<'a> {
    Initialized(&'a LevelState),
    Iteration(&'a LevelState),
}

/// Initial sites of one diagram's children.
fn initial_sites(
    tree: &Tree,
    group: &Group,
    boundary: &ConvexPolygon,
    constraints: &[Constraint],
    cfg: &RunConfig,
    seed: u64,
    scale: f64,
) -> Result<Vec<Point>> {
    let ids: Vec<String> = group.children.iter().map(|&c| tree.node(c).id.clone()).collect();
    let n = ids.len();
    match cfg.init {
        Strategy::RandomCvt => {
            let cvt = build_cvt(boundary, n, seed, scale)?;
            Ok(random_assignment(&ids, &cvt, seed)?.sites(&cvt))
        }
        Strategy::MatchSwap => {
            let cvt = build_cvt(boundary, n, seed, scale)?;
            let pos = mds_project(&pairwise_matrix(tree, &group.children, cfg.sim)?);
            let a = match_assignment(&pos, &cvt)?;
            Ok(swap_improve(&a, constraints, &cvt, cfg.swap_passes).sites(&cvt))
        }
        Strategy::ProjScale => {
            let pos = mds_project(&pairwise_matrix(tree, &group.children, cfg.sim)?);
            Ok(proj_scale_init(&pos, boundary, scale))
        }
    }
}

/// Lays out every level top-down.
pub fn layout_treemap(
    tree: &Tree,
    constraints: &BTreeMap<usize, Vec<Constraint>>,
    cfg: &RunConfig,
    events: &mut dyn FnMut(LayoutEvent<'_>),
) -> Result<Treemap> {
    cfg.validate()?;
    let root = cfg.boundary.polygon(cfg.size)?;
    let scale = root.aabb().diagonal();
    let mut boundaries: HashMap<String, ConvexPolygon> = HashMap::new();
    boundaries.insert(tree.node(tree.root()).id.clone(), root.clone());
    let mut levels = Vec::new();
    for lg in build_level_queue(tree) {
        let level_constraints = constraints.get(&lg.level).cloned().unwrap_or_default();
        let jobs: Vec<(usize, &Group)> = lg.groups.iter().enumerate().collect();
        let diagrams = par::map_jobs(&jobs, |&(gi, g)| -> Result<Diagram> {
            let parent = &tree.node(g.parent).id;
            let boundary = boundaries.get(parent).ok_or_else(|| {
                Error::Geometry(format!("cell of '{parent}' vanished; its children cannot be placed"))
            })?;
            let seed = seeding::derive(cfg.seed, &[lg.level as u64, gi as u64]);
            let sites = initial_sites(tree, g, boundary, &level_constraints, cfg, seed, scale)?;
            let pw = tree.node(g.parent).weight;
            let cells = g
                .children
                .iter()
                .zip(sites)
                .map(|(&c, p)| Cell::new(tree.node(c).id.clone(), p, 0.0, tree.node(c).weight / pw))
                .collect();
            Diagram::build(boundary.clone(), cells, lg.level, parent.clone(), scale)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let state = LevelState::new(lg.level, diagrams, level_constraints, cfg.optimizer.max_iter);
        let init_realized = state.realized_count();
        events(LayoutEvent::Initialized(&state));
        let state = optimize_level(state, &cfg.optimizer, cfg.seed, &mut |s| events(LayoutEvent::Iteration(s)))?;
        for d in &state.diagrams {
            for c in &d.cells {
                if let Some(p) = &c.polygon {
                    boundaries.insert(c.node_id.clone(), p.clone());
                }
            }
        }
        levels.push(LevelLayout {
            level: lg.level,
            diagrams: state.diagrams,
            constraints: state.constraints,
            neighbor_map: state.neighbor_map,
            init_realized,
        });
    }
    Ok(Treemap { scale, root, levels })
}

/// One line of the iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceRecord {
    Header {
        seed: u64,
        strategy: Strategy,
        mode: OptimizerMode,
        depth: usize,
        scale: f64,
        boundary: ConvexPolygon,
    },
    Init {
        level: usize,
        ids: Vec<String>,
        sites: Vec<Point>,
        weights: Vec<f64>,
        realized: usize,
    },
    Iteration {
        level: usize,
        iter: usize,
        sites: Vec<Point>,
        weights: Vec<f64>,
        realized: usize,
    },
}

fn push_record(out: &mut String, r: &TraceRecord) {
    out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
    out.push('\n');
}

/// Everything a run produces, in memory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub constraints: BTreeMap<usize, Vec<Constraint>>,
    pub treemap: Treemap,
    pub report: MetricsReport,
    pub svg: String,
    pub trace: Option<String>,
}

impl RunArtifacts {
    pub fn constraints_json(&self) -> String {
        let all: Vec<&Constraint> = self.constraints.values().flatten().collect();
        serde_json::to_string_pretty(&all).expect("constraints serialize")
    }

    pub fn geometry_json(&self) -> String {
        serde_json::to_string_pretty(&self.treemap).expect("geometry serializes")
    }
}

pub fn run_tree(tree: &Tree, cfg: &RunConfig) -> Result<RunArtifacts> {
    let constraints = extract_level_constraints(tree, cfg.sim)?;
    let root = cfg.boundary.polygon(cfg.size)?;
    let mut trace = cfg.emit_trace.then(String::new);
    if let Some(t) = trace.as_mut() {
        push_record(
            t,
            &TraceRecord::Header {
                seed: cfg.seed,
                strategy: cfg.init,
                mode: cfg.optimizer.mode,
                depth: tree.depth(),
                scale: root.aabb().diagonal(),
                boundary: root,
            },
        );
    }
    let treemap = layout_treemap(tree, &constraints, cfg, &mut |e| {
        let Some(t) = trace.as_mut() else { return };
        let r = match e {
            LayoutEvent::Initialized(s) => TraceRecord::Init {
                level: s.level,
                ids: s.diagrams.iter().flat_map(|d| d.cells.iter().map(|c| c.node_id.clone())).collect(),
                sites: s.sites(),
                weights: s.weights(),
                realized: s.realized_count(),
            },
            LayoutEvent::Iteration(s) => TraceRecord::Iteration {
                level: s.level,
                iter: s.iter,
                sites: s.sites(),
                weights: s.weights(),
                realized: s.realized_count(),
            },
        };
        push_record(t, &r);
    })?;
    let report = treemap.report()?;
    let svg = treemap.render(tree, &cfg.render);
    Ok(RunArtifacts { constraints, treemap, report, svg, trace })
}

/// Rebuilds the final geometry from a trace and recomputes the metrics.
pub fn replay_trace(tree: &Tree, constraints: &BTreeMap<usize, Vec<Constraint>>, trace: &str) -> Result<(Treemap, MetricsReport)> {
    let mut header = None;
    let mut last: BTreeMap<usize, (Vec<Point>, Vec<f64>)> = BTreeMap::new();
    for (k, line) in trace.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: TraceRecord = serde_json::from_str(line)
            .map_err(|e| Error::Validation(format!("trace line {}: {e}", k + 1)))?;
        match rec {
            TraceRecord::Header { scale, boundary, .. } => header = Some((scale, boundary)),
            TraceRecord::Init { level, sites, weights, .. } | TraceRecord::Iteration { level, sites, weights, .. } => {
                last.insert(level, (sites, weights));
            }
        }
    }
    let (scale, root) = header.ok_or_else(|| Error::Validation("trace has no header".into()))?;
    let mut boundaries: HashMap<String, ConvexPolygon> = HashMap::new();
    boundaries.insert(tree.node(tree.root()).id.clone(), root.clone());
    let mut levels = Vec::new();
    for lg in build_level_queue(tree) {
        let (sites, weights) = last
            .get(&lg.level)
            .ok_or_else(|| Error::Validation(format!("trace lacks level {}", lg.level)))?;
        let mut k = 0;
        let mut diagrams = Vec::new();
        for g in &lg.groups {
            let parent = &tree.node(g.parent).id;
            let boundary = boundaries
                .get(parent)
                .ok_or_else(|| Error::Geometry(format!("cell of '{parent}' is empty in the trace")))?;
            let pw = tree.node(g.parent).weight;
            let mut cells = Vec::new();
            for &c in &g.children {
                let (Some(&p), Some(&w)) = (sites.get(k), weights.get(k)) else {
                    return Err(Error::Validation(format!("trace level {} has too few sites", lg.level)));
                };
                cells.push(Cell::new(tree.node(c).id.clone(), p, w, tree.node(c).weight / pw));
                k += 1;
            }
            diagrams.push(Diagram::build(boundary.clone(), cells, lg.level, parent.clone(), scale)?);
        }
        for d in &diagrams {
            for c in &d.cells {
                if let Some(p) = &c.polygon {
                    boundaries.insert(c.node_id.clone(), p.clone());
                }
            }
        }
        let state = LevelState::new(lg.level, diagrams, constraints.get(&lg.level).cloned().unwrap_or_default(), 0);
        levels.push(LevelLayout {
            level: lg.level,
            diagrams: state.diagrams,
            constraints: state.constraints,
            neighbor_map: state.neighbor_map,
            init_realized: 0,
        });
    }
    let treemap = Treemap { scale, root, levels };
    let report = treemap.report()?;
    Ok((treemap, report))
}

/// Output file name for a prefix and suffix such as `svg` or `metrics.json`.
pub fn artifact_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Reads the configured input, runs the pipeline and writes all artifacts.
pub fn run(cfg: &RunConfig) -> Result<(RunArtifacts, Vec<PathBuf>)> {
    cfg.validate()?;
    let input = cfg.input.as_ref().ok_or_else(|| Error::Config("no input file given".into()))?;
    let tree = preprocess(&std::fs::read_to_string(input)?)?;
    let art = run_tree(&tree, cfg)?;
    let mut written = Vec::new();
    let mut write = |suffix: &str, text: &str| -> Result<()> {
        let p = artifact_path(&cfg.out, suffix);
        std::fs::write(&p, text)?;
        written.push(p);
        Ok(())
    };
    write("svg", &art.svg)?;
    write("metrics.json", &art.report.to_json())?;
    if let Some(t) = &art.trace {
        write("trace.ndjson", t)?;
    }
    if cfg.emit_constraints {
        write("constraints.json", &art.constraints_json())?;
    }
    if cfg.emit_geometry {
        write("geometry.json", &art.geometry_json())?;
    }
    Ok((art, written))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stdev: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() < 2 {
            0.0
        } else {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        };
        Stat { mean, stdev: var.sqrt() }
    }
}

impl std::fmt::Display for Stat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.stdev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub constraints_total: usize,
    pub preserved: Stat,
    pub preserved_fraction: Stat,
    pub avg_area_error: Stat,
    pub avg_aspect_ratio: Stat,
    pub max_path_distance: Stat,
    pub reports: Vec<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "method | constraints | preserved | preserved % | area err | aspect | max dist");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{} | {} | {} | {:.2} ± {:.2} | {:.3} ± {:.3} | {} | {}",
                r.method.name(),
                r.constraints_total,
                r.preserved,
                100.0 * r.preserved_fraction.mean,
                100.0 * r.preserved_fraction.stdev,
                r.avg_area_error.mean,
                r.avg_area_error.stdev,
                r.avg_aspect_ratio,
                r.max_path_distance
            );
        }
        s
    }
}

/// Runs every (method, seed) pair, concurrently, and aggregates per method.
pub fn compare(tree: &Tree, cfg: &RunConfig, methods: &[Method], seeds: &[u64]) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::Config("compare needs at least one method".into()));
    }
    if seeds.is_empty() {
        return Err(Error::Config("compare needs at least one seed".into()));
    }
    let jobs: Vec<(Method, u64)> = methods.iter().flat_map(|&m| seeds.iter().map(move |&s| (m, s))).collect();
    let results = par::map_jobs(&jobs, |&(m, s)| {
        let mut c = cfg.with_method(m);
        c.seed = s;
        c.emit_trace = false;
        run_tree(tree, &c).map(|a| a.report)
    });
    let mut reports = results.into_iter();
    let mut rows = Vec::new();
    for &m in methods {
        let rs: Vec<MetricsReport> = reports.by_ref().take(seeds.len()).collect::<Result<_>>()?;
        let col = |f: &dyn Fn(&MetricsReport) -> f64| Stat::of(&rs.iter().map(f).collect::<Vec<_>>());
        rows.push(ComparisonRow {
            method: m,
            constraints_total: rs[0].constraints_total,
            preserved: col(&|r| r.constraints_preserved as f64),
            preserved_fraction: col(&|r| r.preserved_fraction),
            avg_area_error: col(&|r| r.avg_area_error),
            avg_aspect_ratio: col(&|r| r.avg_aspect_ratio),
            max_path_distance: col(&|r| r.max_path_distance as f64),
            reports: rs,
        });
    }
    Ok(Comparison { seeds: seeds.to_vec(), rows })
}
