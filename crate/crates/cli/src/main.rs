//! `simmap`: lay out a similarity-annotated hierarchy as a neighborhood-preserving
//! Voronoi treemap, compare initialization strategies, or generate synthetic data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use simmap_core::error::Category;
use simmap_core::layout_init::Strategy;
use simmap_core::metrics::MetricsReport;
use simmap_core::optimizer::OptimizerMode;
use simmap_core::pipeline::{artifact_path, compare, run, BoundarySpec, Method, RunConfig};
use simmap_core::similarity::SimKind;
use simmap_core::synth::{gen_synthetic, SynthKind, SynthParams};
use simmap_core::tree::preprocess;
use simmap_core::Error;

#[derive(Debug, Parser)]
#[command(name = "simmap", version, about)]
struct Cli {
    /// Hierarchy document (JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// random_cvt | match_swap | proj_scale
    #[arg(long)]
    init: Option<Strategy>,
    /// neighborhood | lloyd
    #[arg(long)]
    optimizer: Option<OptimizerMode>,
    /// cosine | jaccard | binary-equality
    #[arg(long)]
    sim: Option<SimKind>,
    #[arg(long, env = "SIMMAP_SEED")]
    seed: Option<u64>,
    /// Optimization iterations per level [default: 150]
    #[arg(long)]
    iters: Option<usize>,
    /// Neighbor count that saturates a constrained cell [default: 6]
    #[arg(long)]
    max_neighbors: Option<usize>,
    /// square | regular:N | circle:K [default: regular:64]
    #[arg(long)]
    boundary: Option<BoundarySpec>,
    /// Width of the root boundary [default: 1000]
    #[arg(long)]
    size: Option<f64>,
    #[arg(long)]
    emit_trace: bool,
    #[arg(long)]
    emit_constraints: bool,
    #[arg(long)]
    emit_geometry: bool,
    /// Draw dashed links for constraints that are not realized.
    #[arg(long)]
    show_unrealized: bool,
    /// Mark cells that have unrealized constraints.
    #[arg(long)]
    show_disconnect: bool,
    /// Comma-separated methods: random_cvt, proj_scale, match_swap, neighbor_optim
    #[arg(long, value_delimiter = ',')]
    compare: Option<Vec<Method>>,
    /// Seeds for --compare: a list (1,2,3) or a half-open range (0..10)
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
    /// Generate a synthetic dataset: m_n | two_level | dense
    #[arg(long)]
    gen: Option<SynthKind>,
    #[arg(long)]
    leaves: Option<usize>,
    #[arg(long)]
    parents: Option<usize>,
    #[arg(long)]
    constraints: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    /// Omit low-similarity background pairs from generated data.
    #[arg(long)]
    no_background: bool,
}

#[derive(Debug, Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let bad = |_| format!("invalid seed list '{s}'");
    let v: Vec<u64> = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(bad)?..b.trim().parse().map_err(bad)?).collect(),
        None => s.split(',').map(|x| x.trim().parse().map_err(bad)).collect::<Result<_, _>>()?,
    };
    if v.is_empty() {
        return Err(format!("seed list '{s}' is empty"));
    }
    Ok(Seeds(v))
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {}", p.display(), e.message())))?,
        None => RunConfig::default(),
    };
    if let Some(v) = &cli.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.init {
        cfg.init = v;
    }
    if let Some(v) = cli.optimizer {
        cfg.optimizer.mode = v;
    }
    if let Some(v) = cli.sim {
        cfg.sim = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.iters {
        cfg.optimizer.max_iter = v;
    }
    if let Some(v) = cli.max_neighbors {
        cfg.optimizer.max_neighbor_count = v;
    }
    if let Some(v) = cli.boundary {
        cfg.boundary = v;
    }
    if let Some(v) = cli.size {
        cfg.size = v;
    }
    cfg.emit_trace |= cli.emit_trace;
    cfg.emit_constraints |= cli.emit_constraints;
    cfg.emit_geometry |= cli.emit_geometry;
    cfg.render.show_unrealized |= cli.show_unrealized;
    cfg.render.show_disconnect_icon |= cli.show_disconnect;
    cfg.render.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn synth_params(cli: &Cli) -> SynthParams {
    SynthParams {
        leaves: cli.leaves,
        parents: cli.parents,
        constraints: cli.constraints,
        density: cli.density,
        no_background: cli.no_background,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let cfg = load_config(&cli)?;
    if cli.gen.is_none() && (cli.leaves.is_some() || cli.parents.is_some() || cli.constraints.is_some() || cli.density.is_some())
    {
        return Err(Error::Config("dataset parameters need --gen".into()));
    }
    if cli.seeds.is_some() && cli.compare.is_none() {
        return Err(Error::Config("--seeds needs --compare".into()));
    }

    if let Some(methods) = &cli.compare {
        let tree = match (cli.gen, &cfg.input) {
            (Some(kind), None) => preprocess(&gen_synthetic(kind, &synth_params(&cli), cfg.seed)?.to_json())?,
            (None, Some(p)) => preprocess(&std::fs::read_to_string(p)?)?,
            (Some(_), Some(_)) => return Err(Error::Config("--gen and --input are exclusive".into())),
            (None, None) => return Err(Error::Config("--compare needs --input or --gen".into())),
        };
        let seeds = cli.seeds.map_or_else(|| vec![cfg.seed], |s| s.0);
        let table = compare(&tree, &cfg, methods, &seeds)?;
        print!("{}", table.table());
        if cli.out.is_some() {
            let p = artifact_path(&cfg.out, "compare.json");
            std::fs::write(&p, serde_json::to_string_pretty(&table).map_err(Error::Json)?)?;
            eprintln!("wrote {}", p.display());
        }
        return Ok(());
    }

    if let Some(kind) = cli.gen {
        if cfg.input.is_some() {
            return Err(Error::Config("--gen and --input are exclusive".into()));
        }
        let doc = gen_synthetic(kind, &synth_params(&cli), cfg.seed)?.to_json();
        match &cli.out {
            Some(_) => {
                let p = artifact_path(&cfg.out, "json");
                std::fs::write(&p, doc)?;
                eprintln!("wrote {}", p.display());
            }
            None => println!("{doc}"),
        }
        return Ok(());
    }

    if cfg.input.is_none() {
        return Err(Error::Config("--input is required (or use --gen)".into()));
    }
    let (art, written) = run(&cfg)?;
    println!("{}", MetricsReport::table_header());
    println!("{}", art.report.table_row());
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simmap: {e}");
            ExitCode::from(match e.category() {
                Category::Usage => 1,
                Category::Input => 2,
                Category::Runtime => 3,
            })
        }
    }
}
