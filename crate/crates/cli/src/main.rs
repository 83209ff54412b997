use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commtopo::io::{align_labels, read_diagram_csv, read_embedding_csv, read_labels_csv};
use commtopo::pipeline::{embed, load_dataset};
use commtopo::svg::{barcode_svg, diagram_svg, scatter_svg};
use commtopo::{
    generate_planted_partition, grid_search, modularity, nmi, run_pipeline, Error, GridSpec,
    InputSource, Partition, PlantedPartitionSpec, Result, RunConfig, Tau,
};

#[derive(Parser)]
#[command(name = "commtopo", version, about = "Topological community detection on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a graph in the plane and write embedding.csv.
    Embed(RunArgs),
    /// Run the full pipeline: embedding, density, ToMATo, Louvain, metrics and plots.
    Cluster(RunArgs),
    /// Score two labelings of the same graph against each other.
    Compare(CompareArgs),
    /// Search (sigma, tau, k) for the best NMI against ground truth.
    Grid(GridArgs),
    /// Write a planted-partition benchmark as network.dat and community.dat.
    Generate(GenerateArgs),
    /// Re-render SVG plots from previously written CSV files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long, conflicts_with_all = ["lfr_dir", "planted"])]
    input: Option<PathBuf>,
    /// Ground-truth labels for --input, one `node community` pair per line.
    #[arg(long, requires = "input")]
    labels: Option<PathBuf>,
    /// Directory with LFR network.dat and community.dat.
    #[arg(long, conflicts_with = "planted")]
    lfr_dir: Option<PathBuf>,
    /// Generate the graph: `n=250,c=5,p_in=0.3,mu=0.05,seed=42`.
    #[arg(long)]
    planted: Option<String>,
    /// Restrict to the largest connected component.
    #[arg(long)]
    largest_component: bool,
}

#[derive(Args)]
struct MethodArgs {
    /// Embedding method.
    #[arg(long, default_value = "spectral")]
    method: String,
    /// Scale embedding rows to unit length (spectral only; default on for spectral).
    #[arg(long, overrides_with = "no_normalize")]
    normalize: bool,
    #[arg(long, overrides_with = "normalize")]
    no_normalize: bool,
    /// Seed for the spring layout.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed for Louvain's node order.
    #[arg(long, default_value_t = 0)]
    louvain_seed: u64,
    /// Spring layout iterations.
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Spring layout initial temperature.
    #[arg(long, default_value_t = 0.1)]
    temperature: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Re-run a persisted config.json; source and method flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// KDE bandwidth.
    #[arg(long, default_value_t = commtopo::pipeline::DEFAULT_SIGMA)]
    sigma: f64,
    /// Neighbors per node in the k-NN graph.
    #[arg(long, default_value_t = commtopo::pipeline::DEFAULT_K)]
    k: usize,
    /// Merge threshold: a number, `inf`, or `auto`.
    #[arg(long, default_value = "auto")]
    tau: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    method: MethodArgs,
    /// Comma-separated bandwidths.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
    /// Comma-separated thresholds (numbers, `inf` or `auto`).
    #[arg(long, value_delimiter = ',')]
    tau: Vec<String>,
    /// Comma-separated neighbor counts.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Graph the labelings refer to.
    #[arg(long)]
    input: PathBuf,
    /// First labeling (`node_id,cluster` CSV).
    #[arg(long)]
    a: PathBuf,
    /// Second labeling (`node_id,cluster` CSV).
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: usize,
    #[arg(long)]
    p_in: f64,
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    /// embedding.csv from a previous run.
    #[arg(long)]
    embedding: PathBuf,
    /// One or more `node_id,cluster` CSVs; each gets its own scatter.
    #[arg(long, num_args = 1..)]
    labels: Vec<PathBuf>,
    /// diagram.csv from a previous run.
    #[arg(long)]
    diagram: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn parse_planted(spec: &str) -> Result<PlantedPartitionSpec> {
    let mut out = PlantedPartitionSpec {
        n: 0,
        c: 0,
        p_in: 0.0,
        mu: 0.0,
        seed: 0,
    };
    let bad = |msg: String| Error::Config(format!("--planted: {msg}"));
    let mut seen = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got {part:?}")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{key}={v} is not a number")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| bad(format!("{key}={v} is not an integer")));
        match key {
            "n" => out.n = int(value)? as usize,
            "c" => out.c = int(value)? as usize,
            "p_in" => out.p_in = num(value)?,
            "mu" => out.mu = num(value)?,
            "seed" => out.seed = int(value)?,
            _ => return Err(bad(format!("unknown key {key:?}"))),
        }
        seen.push(key);
    }
    for key in ["n", "c", "p_in", "mu"] {
        if !seen.contains(&key) {
            return Err(bad(format!("missing {key}")));
        }
    }
    Ok(out)
}

fn source(args: &SourceArgs) -> Result<InputSource> {
    if let Some(path) = &args.input {
        return Ok(InputSource::EdgeList {
            path: path.clone(),
            labels: args.labels.clone(),
        });
    }
    if let Some(dir) = &args.lfr_dir {
        return Ok(InputSource::Lfr { dir: dir.clone() });
    }
    if let Some(spec) = &args.planted {
        return Ok(InputSource::Planted(parse_planted(spec)?));
    }
    Err(Error::Config(
        "no input: pass --input, --lfr-dir or --planted".to_string(),
    ))
}

fn base_config(src: &SourceArgs, m: &MethodArgs) -> Result<RunConfig> {
    let mut config = RunConfig::new(source(src)?);
    config.largest_component = src.largest_component;
    config.method = m.method.clone();
    config.normalize = match (m.normalize, m.no_normalize) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    config.seed = m.seed;
    config.louvain_seed = m.louvain_seed;
    config.iterations = m.iterations;
    config.initial_temperature = m.temperature;
    Ok(config)
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    if let Some(path) = &args.config {
        return RunConfig::from_json(&read(path)?);
    }
    let mut config = base_config(&args.source, &args.method)?;
    config.sigma = args.sigma;
    config.k = args.k;
    config.tau = args.tau.parse()?;
    Ok(config)
}

fn cmd_embed(args: &RunArgs) -> Result<()> {
    let config = run_config(args)?;
    let data = load_dataset(&config.input, config.largest_component)?;
    let emb = embed(&data.graph, &config)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("config.json"), config.to_json()?)?;
    fs::write(
        args.out.join("embedding.csv"),
        commtopo::io::embedding_csv(&emb, data.graph.node_ids()),
    )?;
    if emb.degenerate {
        eprintln!("warning: repeated eigenvalue, the embedding axes are not unique");
    }
    println!("embedded {} nodes with {}", emb.len(), emb.method);
    Ok(())
}

fn cmd_cluster(args: &RunArgs) -> Result<()> {
    let config = run_config(args)?;
    let out = run_pipeline(&config, &args.out)?;
    let r = &out.report;
    if r.params.degenerate_embedding {
        eprintln!("warning: repeated eigenvalue, the embedding axes are not unique");
    }
    println!(
        "tomato: {} clusters, modularity {:.4}{}",
        r.tomato_clusters,
        r.modularity_tomato,
        r.nmi_vs_truth_tomato.map(|v| format!(", NMI vs truth {v:.4}")).unwrap_or_default()
    );
    println!(
        "louvain: {} communities, modularity {:.4}{}",
        r.louvain_communities,
        r.modularity_louvain,
        r.nmi_vs_truth_louvain.map(|v| format!(", NMI vs truth {v:.4}")).unwrap_or_default()
    );
    println!("tau = {} ({})", r.params.tau_value, r.params.tau);
    println!("wrote {} files to {}", out.files.len(), args.out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let (g, _) = commtopo::parse_edge_list(&read(&args.input)?, &Default::default())?;
    let ids = g.node_ids();
    let load = |p: &Path| -> Result<Partition> {
        let (from, labels) = read_labels_csv(&read(p)?)?;
        Ok(Partition::new(&align_labels(&from, &labels, ids)?))
    };
    let (a, b) = (load(&args.a)?, load(&args.b)?);
    let report = serde_json::json!({
        "nmi": nmi(&a, &b)?,
        "modularity_a": modularity(&g, &a)?,
        "modularity_b": modularity(&g, &b)?,
        "communities_a": a.community_count(),
        "communities_b": b.community_count(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_grid(args: &GridArgs) -> Result<()> {
    let base = base_config(&args.source, &args.method)?;
    let mut grid = GridSpec::default();
    if !args.sigma.is_empty() {
        grid.sigmas = args.sigma.clone();
    }
    if !args.tau.is_empty() {
        grid.taus = args.tau.iter().map(|t| t.parse()).collect::<Result<Vec<Tau>>>()?;
    }
    if !args.k.is_empty() {
        grid.ks = args.k.clone();
    }
    let result = grid_search(&base, &grid)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("grid.csv"), result.to_csv())?;
    fs::write(args.out.join("best_config.json"), result.best_config(&base).to_json()?)?;
    let best = result.best_row();
    println!(
        "best: sigma={} tau={} k={} -> {} clusters, NMI {:.4} (louvain {:.4})",
        best.sigma,
        best.tau,
        best.k,
        best.cluster_count,
        best.nmi_vs_truth,
        result.louvain_nmi_vs_truth
    );
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = PlantedPartitionSpec {
        n: args.n,
        c: args.c,
        p_in: args.p_in,
        mu: args.mu,
        seed: args.seed,
    };
    let (g, truth) = generate_planted_partition(&spec)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("network.dat"), g.to_lfr_network())?;
    fs::write(args.out.join("community.dat"), truth.to_lfr_community(&g))?;
    println!("{} nodes, {} edges", g.node_count(), g.edge_count());
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let (ids, coords) = read_embedding_csv(&read(&args.embedding)?)?;
    fs::create_dir_all(&args.out)?;
    for path in &args.labels {
        let (from, labels) = read_labels_csv(&read(path)?)?;
        let labels = align_labels(&from, &labels, &ids)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("labels");
        let svg = scatter_svg(&coords, &labels, stem)?;
        fs::write(args.out.join(format!("scatter_{stem}.svg")), svg)?;
    }
    if let Some(path) = &args.diagram {
        let d = read_diagram_csv(&read(path)?, &ids)?;
        fs::write(args.out.join("diagram.svg"), diagram_svg(&d))?;
        fs::write(args.out.join("barcode.svg"), barcode_svg(&d))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Embed(a) => cmd_embed(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
