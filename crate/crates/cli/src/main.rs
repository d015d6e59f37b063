use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use trajclust::evaluation::{evaluate, write_report_csv};
use trajclust::geojson::cluster_collections;
use trajclust::hac::{agglomerate, distance_matrix_from_model, Linkage, DEFAULT_MAX_N};
use trajclust::modularity::{build_hierarchy, modularity, HierarchyParams};
use trajclust::network::{grid_network, load_network};
use trajclust::partition::{read_labels_csv, write_assignment_csv};
use trajclust::similarity::{SimilarityModel, SimilarityScheme};
use trajclust::synth::{generate, planted_grid, Corridors, GeneratorParams};
use trajclust::trajectory::load_trajectories;
use trajclust::{Partition, SimilarityGraph, TrajectorySet};

/// Cluster network-constrained trajectories by modularity on a TF-IDF
/// similarity graph.
#[derive(Parser)]
#[command(name = "trajclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Build the cluster hierarchy.
    Cluster(ClusterArgs),
    /// Agglomerative baseline on 1 − similarity.
    Hac(HacArgs),
    /// Overlap, inertia and (optionally) ARI for assignment files.
    Evaluate(EvaluateArgs),
    /// Write a seeded synthetic dataset.
    Generate(GenerateArgs),
    /// One GeoJSON feature collection per cluster.
    ExportGeojson(GeojsonArgs),
    /// Dump the similarity graph as CSV.
    Graph(GraphArgs),
    /// Re-run the command recorded in a run.json.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct DataArgs {
    #[arg(long)]
    nodes: PathBuf,
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    trajectories: PathBuf,
    /// Reject trajectories whose consecutive segments are not adjacent.
    #[arg(long)]
    strict_connectivity: bool,
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct SimilarityArgs {
    #[arg(long, default_value = "spatial", value_parser = parse_scheme)]
    weighting: SimilarityScheme,
    /// Drop graph edges whose similarity does not exceed this value.
    #[arg(long, default_value_t = 0.0, value_parser = parse_unit)]
    sim_floor: f64,
}

#[derive(Args, Serialize, Deserialize)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(2..))]
    null_replicates: u32,
    #[arg(long, default_value_t = 2.0)]
    z: f64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    min_size: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct HacArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[arg(long, value_parser = parse_linkage)]
    linkage: Linkage,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    /// Largest trajectory count accepted for the dense distance matrix.
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Assignment CSV (`traj_id,cluster_id`); repeat to compare methods.
    #[arg(long, required = true)]
    assignment: Vec<PathBuf>,
    /// Reference labels (`traj_id,<label>`) for the adjusted Rand index.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Planted corridors; 0 gives independent random routes.
    #[arg(long, default_value_t = 0)]
    corridors: usize,
    #[arg(long, default_value_t = 0.0, value_parser = parse_unit)]
    deviation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this network instead of the built-in grid.
    #[arg(long, requires = "edges")]
    nodes: Option<PathBuf>,
    #[arg(long, requires = "nodes")]
    edges: Option<PathBuf>,
    /// Columns of the built-in grid.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(2..), conflicts_with = "nodes")]
    cols: u32,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct GeojsonArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct GraphArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    similarity: SimilarityArgs,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    /// A run.json written by an earlier invocation.
    #[arg(long)]
    run: PathBuf,
    /// Where to write the outputs this time.
    #[arg(long)]
    out: PathBuf,
}

fn parse_scheme(s: &str) -> std::result::Result<SimilarityScheme, String> {
    s.parse().map_err(|e: trajclust::Error| e.to_string())
}

fn parse_linkage(s: &str) -> std::result::Result<Linkage, String> {
    s.parse().map_err(|e: trajclust::Error| e.to_string())
}

fn parse_unit(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

/// Files written by the current run; removed again unless the run finishes.
struct Outputs {
    written: Vec<PathBuf>,
    created_dir: Option<PathBuf>,
    done: bool,
}

impl Outputs {
    fn new() -> Self {
        Outputs {
            written: Vec::new(),
            created_dir: None,
            done: false,
        }
    }

    fn dir(&mut self, dir: &Path) -> Result<()> {
        if !dir.exists() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            self.created_dir = Some(dir.to_path_buf());
        }
        Ok(())
    }

    fn file(&mut self, path: PathBuf) -> PathBuf {
        self.written.push(path.clone());
        path
    }

    fn json(&mut self, path: PathBuf, value: &serde_json::Value) -> Result<()> {
        let path = self.file(path);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.done {
            return;
        }
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if let Some(d) = &self.created_dir {
            let _ = fs::remove_dir_all(d);
        }
    }
}

fn load(data: &DataArgs) -> Result<TrajectorySet> {
    let net = Arc::new(load_network(&data.nodes, &data.edges)?);
    let ts = load_trajectories(&data.trajectories, net, data.strict_connectivity)?;
    let report = ts.report();
    eprintln!(
        "loaded {} trajectories over {} distinct segments ({} gaps)",
        report.trajectories, report.distinct_segments, report.gaps
    );
    Ok(ts)
}

fn similarity_graph(ts: &TrajectorySet, sim: &SimilarityArgs) -> Result<(SimilarityModel, SimilarityGraph)> {
    let model = SimilarityModel::new(ts, sim.weighting)?;
    let g = model.graph(sim.sim_floor);
    eprintln!("similarity graph: {} nodes, {} edges", g.node_count(), g.edge_count());
    Ok((model, g))
}

/// `run.json` for directory outputs, `<file>.run.json` for single files.
fn run_record_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("run.json")
    } else {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".run.json");
        out.with_file_name(name)
    }
}

fn record(outputs: &mut Outputs, command: &Command, out: &Path, is_dir: bool) -> Result<()> {
    let value = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "run": serde_json::to_value(command)?,
    });
    outputs.json(run_record_path(out, is_dir), &value)
}

fn parent_dir(outputs: &mut Outputs, file: &Path) -> Result<()> {
    match file.parent() {
        Some(p) if !p.as_os_str().is_empty() => outputs.dir(p),
        _ => Ok(()),
    }
}

fn cluster(args: &ClusterArgs, outputs: &mut Outputs) -> Result<()> {
    let ts = load(&args.data)?;
    let (_, g) = similarity_graph(&ts, &args.similarity)?;
    let params = HierarchyParams {
        replicates: args.null_replicates as usize,
        z: args.z,
        seed: args.seed,
        min_size: args.min_size as usize,
    };
    let h = build_hierarchy(&g, &params)?;
    let ids = ts.ids();
    outputs.dir(&args.out)?;
    outputs.json(args.out.join("hierarchy.json"), &h.to_json(&ids))?;

    let mut per_level = Vec::new();
    for level in 0..h.level_count() {
        let p = h.flatten_by_level(level);
        let path = outputs.file(args.out.join(format!("assignment_level_{level}.csv")));
        write_assignment_csv(&path, &ids, &p)?;
        let q = if g.edge_count() > 0 { Some(modularity(&g, &p)?) } else { None };
        per_level.push(json!({"level": level, "clusters": p.k(), "modularity": q}));
    }
    let top = if h.level_count() > 1 && g.edge_count() > 0 {
        Some(modularity(&g, &h.flatten_by_level(1))?)
    } else {
        None
    };
    let summary = json!({
        "trajectories": ts.len(),
        "graph_edges": g.edge_count(),
        "top_level_modularity": top,
        "levels": h.level_count(),
        "leaves": h.leaf_count(),
        "per_level": per_level,
    });
    outputs.json(args.out.join("summary.json"), &summary)?;
    eprintln!("{} levels, {} leaf clusters", h.level_count(), h.leaf_count());
    Ok(())
}

fn hac(args: &HacArgs, outputs: &mut Outputs) -> Result<()> {
    let ts = load(&args.data)?;
    let model = SimilarityModel::new(&ts, args.similarity.weighting)?;
    let d = if args.similarity.sim_floor > 0.0 {
        let n = ts.len();
        if n > args.max_n {
            return Err(trajclust::Error::TooLarge { n, cap: args.max_n }.into());
        }
        let mut d = trajclust::hac::CondensedMatrix::filled(n, 1.0);
        for (i, j, w) in model.graph(args.similarity.sim_floor).edges() {
            d.set(i, j, 1.0 - w);
        }
        d
    } else {
        distance_matrix_from_model(&model, args.max_n)?
    };
    let dendrogram = agglomerate(&d, args.linkage)?;
    let p = dendrogram.cut(args.k as usize)?;
    outputs.dir(&args.out)?;
    let path = outputs.file(args.out.join("dendrogram.csv"));
    dendrogram.write_csv(&path)?;
    let path = outputs.file(args.out.join("assignment.csv"));
    write_assignment_csv(&path, &ts.ids(), &p)?;
    Ok(())
}

/// Second header column of a two-column label file.
fn label_column(path: &Path) -> Result<String> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut header = String::new();
    BufReader::new(file).read_line(&mut header)?;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() != 2 || cols[0] != "traj_id" {
        bail!("{}: expected a `traj_id,<label>` header", path.display());
    }
    Ok(cols[1].to_string())
}

fn read_assignment(path: &Path, ids: &[String]) -> Result<Partition> {
    let column = label_column(path)?;
    Ok(read_labels_csv(path, &column, ids)?)
}

fn method_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn evaluate_cmd(args: &EvaluateArgs, outputs: &mut Outputs) -> Result<()> {
    let ts = load(&args.data)?;
    let ids = ts.ids();
    let truth = args.labels.as_deref().map(|p| read_assignment(p, &ids)).transpose()?;
    let mut reports = Vec::new();
    for path in &args.assignment {
        let p = read_assignment(path, &ids)?;
        reports.push(evaluate(&method_name(path), &p, &ts, truth.as_ref())?);
    }
    parent_dir(outputs, &args.out)?;
    let path = outputs.file(args.out.clone());
    write_report_csv(&path, &reports)?;
    Ok(())
}

fn generate_cmd(args: &GenerateArgs, outputs: &mut Outputs) -> Result<()> {
    let (net, corridors) = match (&args.nodes, &args.edges) {
        (Some(n), Some(e)) => {
            let corridors = if args.corridors == 0 {
                Corridors::None
            } else {
                Corridors::Random(args.corridors)
            };
            (load_network(n, e)?, corridors)
        }
        _ if args.corridors == 0 => (grid_network(10, args.cols as usize, 100.0)?, Corridors::None),
        _ => {
            let (net, c) = planted_grid(args.corridors, args.cols as usize, 100.0)?;
            (net, Corridors::Explicit(c))
        }
    };
    let params = GeneratorParams {
        n: args.n as usize,
        corridors,
        deviation_prob: args.deviation,
        seed: args.seed,
    };
    let generated = generate(Arc::new(net), &params)?;
    outputs.dir(&args.out)?;
    for name in ["nodes.csv", "edges.csv", "trajectories.csv", "labels.csv"] {
        outputs.file(args.out.join(name));
    }
    generated.write_dataset(&args.out)?;
    eprintln!("wrote {} trajectories to {}", generated.trajectories.len(), args.out.display());
    Ok(())
}

fn geojson_cmd(args: &GeojsonArgs, outputs: &mut Outputs) -> Result<()> {
    let ts = load(&args.data)?;
    let p = read_assignment(&args.assignment, &ts.ids())?;
    let collections = cluster_collections(&ts, &p)?;
    outputs.dir(&args.out)?;
    let width = collections.len().to_string().len();
    for (c, fc) in collections.iter().enumerate() {
        outputs.json(args.out.join(format!("cluster_{c:0width$}.geojson")), fc)?;
    }
    Ok(())
}

fn graph_cmd(args: &GraphArgs, outputs: &mut Outputs) -> Result<()> {
    let ts = load(&args.data)?;
    let (_, g) = similarity_graph(&ts, &args.similarity)?;
    parent_dir(outputs, &args.out)?;
    let path = outputs.file(args.out.clone());
    g.write_csv(&path)?;
    Ok(())
}

fn replay(args: &ReplayArgs) -> Result<Command> {
    let text = fs::read_to_string(&args.run).with_context(|| format!("reading {}", args.run.display()))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let run = value
        .get_mut("run")
        .map(serde_json::Value::take)
        .context("run.json has no `run` entry")?;
    let mut command: Command = serde_json::from_value(run).context("unrecognised run.json")?;
    let out = args.out.clone();
    match &mut command {
        Command::Cluster(a) => a.out = out,
        Command::Hac(a) => a.out = out,
        Command::Evaluate(a) => a.out = out,
        Command::Generate(a) => a.out = out,
        Command::ExportGeojson(a) => a.out = out,
        Command::Graph(a) => a.out = out,
        Command::Replay(_) => unreachable!("replay is never recorded"),
    }
    Ok(command)
}

fn execute(command: &Command) -> Result<()> {
    let mut outputs = Outputs::new();
    let (out, is_dir) = match command {
        Command::Cluster(a) => {
            cluster(a, &mut outputs)?;
            (&a.out, true)
        }
        Command::Hac(a) => {
            hac(a, &mut outputs)?;
            (&a.out, true)
        }
        Command::Evaluate(a) => {
            evaluate_cmd(a, &mut outputs)?;
            (&a.out, false)
        }
        Command::Generate(a) => {
            generate_cmd(a, &mut outputs)?;
            (&a.out, true)
        }
        Command::ExportGeojson(a) => {
            geojson_cmd(a, &mut outputs)?;
            (&a.out, true)
        }
        Command::Graph(a) => {
            graph_cmd(a, &mut outputs)?;
            (&a.out, false)
        }
        Command::Replay(a) => return execute(&replay(a)?),
    };
    record(&mut outputs, command, out, is_dir)?;
    outputs.done = true;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
