//! End-to-end runs: load → embed → density → k-NN → ToMATo → Louvain → metrics,
//! plus the supervised (sigma, tau, k) grid search.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::{kde_density, DensityField};
use crate::embedding::{EmbedOptions, EmbedderRegistry, Embedding};
use crate::error::{Error, Result};
use crate::generate::{generate_planted_partition, PlantedPartitionSpec};
use crate::graph::{largest_component, parse_edge_list, parse_labels, Graph, GroundTruth, ParseOptions};
use crate::io;
use crate::knn::{knn_graph, NeighborhoodGraph};
use crate::louvain::louvain;
use crate::metrics::{modularity, nmi, Partition};
use crate::svg::emit_svg_plots;
use crate::tomato::{auto_tau, tomato_cluster, Clustering, PersistenceDiagram, TomatoParams};

/// Name of the rule behind `tau = auto`, recorded in metrics output.
pub const AUTO_TAU_RULE: &str =
    "midpoint of the largest multiplicative gap between consecutive finite prominences of the tau=inf diagram";

/// Merge threshold: a fixed value (possibly `inf`) or read off the diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    Value(f64),
    Auto,
}

impl Tau {
    /// Sort key putting `auto` before every fixed value.
    fn cmp_key(&self, other: &Tau) -> Ordering {
        match (self, other) {
            (Tau::Auto, Tau::Auto) => Ordering::Equal,
            (Tau::Auto, _) => Ordering::Less,
            (_, Tau::Auto) => Ordering::Greater,
            (Tau::Value(a), Tau::Value(b)) => a.total_cmp(b),
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Auto => f.write_str("auto"),
            Tau::Value(v) if *v == f64::INFINITY => f.write_str("inf"),
            Tau::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Tau> {
        let t = match s.trim() {
            "auto" => Tau::Auto,
            "inf" | "+inf" | "infinity" => Tau::Value(f64::INFINITY),
            other => Tau::Value(
                other
                    .parse()
                    .map_err(|_| Error::Config(format!("tau {other:?} is neither a number nor `auto`")))?,
            ),
        };
        if let Tau::Value(v) = t {
            TomatoParams::new(v).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(t)
    }
}

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tau::Value(v) if v.is_finite() => s.serialize_f64(*v),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Tau, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => TomatoParams::new(v)
                .map(|p| Tau::Value(p.tau))
                .map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSource {
    EdgeList {
        path: PathBuf,
        labels: Option<PathBuf>,
    },
    /// Directory holding LFR `network.dat` and, optionally, `community.dat`.
    Lfr { dir: PathBuf },
    Planted(PlantedPartitionSpec),
}

/// Everything needed to reproduce a run. Persisted as `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputSource,
    #[serde(default)]
    pub largest_component: bool,
    pub method: String,
    /// `None` uses the method's default (on for spectral, off for spring).
    #[serde(default)]
    pub normalize: Option<bool>,
    pub sigma: f64,
    pub k: usize,
    pub tau: Tau,
    /// Seed of the spring layout's initialization.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub louvain_seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_temperature")]
    pub initial_temperature: f64,
}

fn default_iterations() -> usize {
    EmbedOptions::default().iterations
}

fn default_temperature() -> f64 {
    EmbedOptions::default().initial_temperature
}

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_SIGMA: f64 = 0.5;

impl RunConfig {
    pub fn new(input: InputSource) -> RunConfig {
        RunConfig {
            input,
            largest_component: false,
            method: "spectral".to_string(),
            normalize: None,
            sigma: DEFAULT_SIGMA,
            k: DEFAULT_K,
            tau: Tau::Auto,
            seed: 0,
            louvain_seed: 0,
            iterations: default_iterations(),
            initial_temperature: default_temperature(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad run config: {e}")))
    }
}

/// Graph plus optional ground truth, after any largest-component restriction.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub truth: Option<GroundTruth>,
    pub dropped_nodes: usize,
}

pub fn load_dataset(input: &InputSource, restrict_to_largest: bool) -> Result<Dataset> {
    let read = |p: &Path| {
        fs::read_to_string(p)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display())))
    };
    let (graph, truth) = match input {
        InputSource::EdgeList { path, labels } => {
            let (g, _) = parse_edge_list(&read(path)?, &ParseOptions::default())?;
            let truth = labels.as_ref().map(|l| parse_labels(&read(l)?, &g)).transpose()?;
            (g, truth)
        }
        InputSource::Lfr { dir } => {
            let (g, _) = parse_edge_list(&read(&dir.join("network.dat"))?, &ParseOptions::default())?;
            let community = dir.join("community.dat");
            let truth = if community.exists() {
                Some(parse_labels(&read(&community)?, &g)?)
            } else {
                None
            };
            (g, truth)
        }
        InputSource::Planted(spec) => {
            let (g, t) = generate_planted_partition(spec)?;
            (g, Some(t))
        }
    };
    if !restrict_to_largest {
        return Ok(Dataset {
            graph,
            truth,
            dropped_nodes: 0,
        });
    }
    let n = graph.node_count();
    let (sub, map) = largest_component(&graph);
    let truth = truth.map(|t| t.restrict(&map));
    Ok(Dataset {
        dropped_nodes: n - sub.node_count(),
        graph: sub,
        truth,
    })
}

/// Embeds `g` with the method named in `config`.
pub fn embed(g: &Graph, config: &RunConfig) -> Result<Embedding> {
    let registry = EmbedderRegistry::with_defaults();
    let embedder = registry.get(&config.method)?;
    let normalize = config.normalize.unwrap_or(embedder.default_normalize());
    if normalize && !embedder.supports_normalize() {
        return Err(Error::Config(format!(
            "method {:?} does not support row normalization",
            config.method
        )));
    }
    embedder.embed(
        g,
        &EmbedOptions {
            normalize,
            seed: config.seed,
            iterations: config.iterations,
            initial_temperature: config.initial_temperature,
        },
    )
}

fn resolve_tau(tau: Tau, ng: &NeighborhoodGraph, density: &DensityField) -> Result<f64> {
    match tau {
        Tau::Value(v) => Ok(v),
        Tau::Auto => auto_tau(ng, density),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub method: String,
    pub normalized: bool,
    pub degenerate_embedding: bool,
    pub sigma: f64,
    pub k: usize,
    pub tau: Tau,
    /// The threshold actually applied (equal to `tau` unless `tau = auto`).
    pub tau_value: f64,
    pub tau_rule: Option<String>,
    pub seed: u64,
    pub louvain_seed: u64,
    pub nmi_normalization: String,
}

/// Per-run metrics document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nmi_vs_truth_tomato: Option<f64>,
    pub nmi_vs_truth_louvain: Option<f64>,
    pub nmi_tomato_louvain: f64,
    pub modularity_tomato: f64,
    pub modularity_louvain: f64,
    pub tomato_clusters: usize,
    pub louvain_communities: usize,
    pub truth_communities: Option<usize>,
    pub node_count: usize,
    pub edge_count: usize,
    pub dropped_nodes: usize,
    pub params: ReportParams,
}

/// In-memory result of [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MetricsReport,
    pub embedding: Embedding,
    pub tomato: Clustering,
    pub louvain: Partition,
    pub diagram: PersistenceDiagram,
    pub files: Vec<PathBuf>,
}

/// Runs the full pipeline and writes every artifact into `out_dir`:
/// `config.json`, `embedding.csv`, `density.csv`, `knn.txt`, `clustering.csv`,
/// `louvain.csv`, `diagram.csv`, `barcode.csv`, `metrics.json` and four SVGs.
pub fn run_pipeline(config: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    let data = load_dataset(&config.input, config.largest_component)?;
    let g = &data.graph;
    let ids = g.node_ids();

    let emb = embed(g, config)?;
    let density = kde_density(&emb, config.sigma)?;
    let ng = knn_graph(&emb, config.k)?;
    let tau_value = resolve_tau(config.tau, &ng, &density)?;
    let (tomato, diagram) = tomato_cluster(&ng, &density, &TomatoParams::new(tau_value)?)?;
    let louvain_part = louvain(g, config.louvain_seed)?;

    let tomato_part = Partition::from(&tomato);
    let truth = data.truth.as_ref().map(Partition::from);
    let vs_truth = |p: &Partition| truth.as_ref().map(|t| nmi(p, t)).transpose();
    let report = MetricsReport {
        nmi_vs_truth_tomato: vs_truth(&tomato_part)?,
        nmi_vs_truth_louvain: vs_truth(&louvain_part)?,
        nmi_tomato_louvain: nmi(&tomato_part, &louvain_part)?,
        modularity_tomato: modularity(g, &tomato_part)?,
        modularity_louvain: modularity(g, &louvain_part)?,
        tomato_clusters: tomato.cluster_count(),
        louvain_communities: louvain_part.community_count(),
        truth_communities: truth.as_ref().map(Partition::community_count),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        dropped_nodes: data.dropped_nodes,
        params: ReportParams {
            method: emb.method.clone(),
            normalized: emb.normalized,
            degenerate_embedding: emb.degenerate,
            sigma: config.sigma,
            k: config.k,
            tau: config.tau,
            tau_value,
            tau_rule: matches!(config.tau, Tau::Auto).then(|| AUTO_TAU_RULE.to_string()),
            seed: config.seed,
            louvain_seed: config.louvain_seed,
            nmi_normalization: "arithmetic mean of entropies".to_string(),
        },
    };

    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, body)?;
        files.push(path);
        Ok(())
    };
    write("config.json", config.to_json()?)?;
    write("embedding.csv", io::embedding_csv(&emb, ids))?;
    write("density.csv", io::density_csv(&density, ids))?;
    write("knn.txt", io::neighborhood_edge_list(&ng, ids))?;
    write("clustering.csv", io::labels_csv(&tomato.labels, ids))?;
    write("louvain.csv", io::labels_csv(louvain_part.labels(), ids))?;
    write("diagram.csv", diagram.to_csv(ids))?;
    write("barcode.csv", diagram.to_barcode_csv(ids))?;
    write("metrics.json", serde_json::to_string_pretty(&report)? + "\n")?;
    files.extend(emit_svg_plots(
        &emb,
        ("tomato", &tomato.labels),
        ("louvain", louvain_part.labels()),
        &diagram,
        out_dir,
    )?);

    Ok(RunOutput {
        report,
        embedding: emb,
        tomato,
        louvain: louvain_part,
        diagram,
        files,
    })
}

/// Parameter grids for [`grid_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub sigmas: Vec<f64>,
    pub taus: Vec<Tau>,
    pub ks: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            sigmas: vec![0.1, 0.25, 0.5, 1.0],
            taus: vec![Tau::Auto, Tau::Value(0.05), Tau::Value(0.1), Tau::Value(0.5)],
            ks: vec![4, 6, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub sigma: f64,
    pub tau: Tau,
    pub tau_value: f64,
    pub k: usize,
    pub cluster_count: usize,
    pub nmi_vs_truth: f64,
    pub runtime_ms: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    /// Rows in grid order: sigma-major, then tau, then k.
    pub rows: Vec<GridRow>,
    pub best: usize,
    pub louvain_nmi_vs_truth: f64,
}

impl GridResult {
    pub fn best_row(&self) -> &GridRow {
        &self.rows[self.best]
    }

    /// Table without timings, so it is reproducible byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,tau,tau_value,k,cluster_count,nmi_vs_truth,best\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.sigma,
                r.tau,
                crate::tomato::fmt_real(r.tau_value),
                r.k,
                r.cluster_count,
                crate::tomato::fmt_real(r.nmi_vs_truth),
                u8::from(r.best)
            ));
        }
        out
    }

    /// `base` with sigma, tau and k replaced by the best row's values.
    pub fn best_config(&self, base: &RunConfig) -> RunConfig {
        let b = self.best_row();
        RunConfig {
            sigma: b.sigma,
            tau: b.tau,
            k: b.k,
            ..base.clone()
        }
    }
}

/// Evaluates every (sigma, tau, k) on one shared embedding and flags the row
/// with the highest NMI against ground truth; ties go to the
/// lexicographically smallest (sigma, tau, k) with `auto` ordered first.
pub fn grid_search(base: &RunConfig, grid: &GridSpec) -> Result<GridResult> {
    if grid.sigmas.is_empty() || grid.taus.is_empty() || grid.ks.is_empty() {
        return Err(Error::Config("grid search needs non-empty sigma, tau and k grids".to_string()));
    }
    let data = load_dataset(&base.input, base.largest_component)?;
    let truth = data
        .truth
        .as_ref()
        .map(Partition::from)
        .ok_or_else(|| Error::Config("grid search needs ground-truth labels".to_string()))?;
    let emb = embed(&data.graph, base)?;
    let louvain_nmi = nmi(&louvain(&data.graph, base.louvain_seed)?, &truth)?;

    let cells: Vec<(usize, usize)> = (0..grid.sigmas.len())
        .flat_map(|s| (0..grid.ks.len()).map(move |k| (s, k)))
        .collect();
    let evaluated: Vec<Result<Vec<GridRow>>> = cells
        .par_iter()
        .map(|&(si, ki)| {
            let start = Instant::now();
            let sigma = grid.sigmas[si];
            let k = grid.ks[ki];
            let density = kde_density(&emb, sigma)?;
            let ng = knn_graph(&emb, k)?;
            let shared_ms = start.elapsed().as_secs_f64() * 1e3;
            grid.taus
                .iter()
                .map(|&tau| {
                    let t0 = Instant::now();
                    let tau_value = resolve_tau(tau, &ng, &density)?;
                    let (c, _) = tomato_cluster(&ng, &density, &TomatoParams::new(tau_value)?)?;
                    let score = nmi(&Partition::from(&c), &truth)?;
                    Ok(GridRow {
                        sigma,
                        tau,
                        tau_value,
                        k,
                        cluster_count: c.cluster_count(),
                        nmi_vs_truth: score,
                        runtime_ms: shared_ms + t0.elapsed().as_secs_f64() * 1e3,
                        best: false,
                    })
                })
                .collect()
        })
        .collect();

    // reassemble in grid order: sigma, tau, k
    let mut by_cell = Vec::with_capacity(cells.len());
    for rows in evaluated {
        by_cell.push(rows?);
    }
    let mut rows = Vec::with_capacity(by_cell.len() * grid.taus.len());
    for sigma_cells in by_cell.chunks(grid.ks.len()) {
        for ti in 0..grid.taus.len() {
            rows.extend(sigma_cells.iter().map(|cell| cell[ti].clone()));
        }
    }

    let better = |a: &GridRow, b: &GridRow| -> bool {
        match a.nmi_vs_truth.total_cmp(&b.nmi_vs_truth) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => {
                a.sigma
                    .total_cmp(&b.sigma)
                    .then(a.tau.cmp_key(&b.tau))
                    .then(a.k.cmp(&b.k))
                    == Ordering::Less
            }
        }
    };
    let mut best = 0;
    for i in 1..rows.len() {
        if better(&rows[i], &rows[best]) {
            best = i;
        }
    }
    rows[best].best = true;
    Ok(GridResult {
        rows,
        best,
        louvain_nmi_vs_truth: louvain_nmi,
    })
}
