//! Community detection by projecting a graph into the plane, estimating a
//! density field over the projected nodes, and extracting the persistent
//! density modes with ToMATo.
//!
//! The pipeline is:
//!
//! ```text
//! Graph ──embed──▶ Embedding ──kde──▶ DensityField ─┐
//!                      └──────knn──▶ NeighborhoodGraph ─┴─tomato─▶ Clustering + PersistenceDiagram
//! ```
//!
//! Louvain modularity optimization is provided as a baseline, together with
//! normalized mutual information and modularity for scoring partitions.
//! Embedding methods are looked up by name through [`embedding::EmbedderRegistry`].

pub mod density;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod knn;
pub mod louvain;
pub mod metrics;
pub mod pipeline;
pub mod svg;
pub mod tomato;

pub use density::{kde_density, DensityField};
pub use embedding::{
    laplacian_eigenpairs, spectral_embed, spring_embed, Embedder, EmbedderRegistry, Embedding,
    EmbedOptions, SpectralBasis,
};
pub use error::{Error, Result};
pub use generate::{generate_planted_partition, PlantedPartitionSpec};
pub use graph::{largest_component, parse_edge_list, parse_labels, Graph, GroundTruth, ParseOptions};
pub use knn::{knn_graph, NeighborhoodGraph};
pub use louvain::louvain;
pub use metrics::{modularity, nmi, Partition};
pub use pipeline::{
    grid_search, run_pipeline, GridResult, GridSpec, InputSource, MetricsReport, RunConfig, Tau,
};
pub use tomato::{diagram_prominence_gap, tomato_cluster, Clustering, PersistenceDiagram, TomatoParams};
