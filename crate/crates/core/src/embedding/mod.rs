//! Projection of graph nodes into the plane.
//!
//! Each projection method implements [`Embedder`] and is registered by name
//! in an [`EmbedderRegistry`]; the pipeline and the CLI select one at run
//! time from the `method` string.

pub mod eigen;
mod spectral;
mod spring;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use eigen::{laplacian_eigenpairs, laplacian_eigenpairs_with, EigenSolver, SpectralBasis};
pub use spectral::{spectral_embed, spectral_embed_with, SpectralEmbedder};
pub use spring::{spring_embed, spring_embed_traced, SpringEmbedder, SpringStep};

/// Node coordinates in the plane, one row per node, plus how they were made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub coords: Vec<[f64; 2]>,
    pub method: String,
    pub normalized: bool,
    /// Seed of the layout's random initialization (spring only).
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    /// The eigenvalues behind the spectral columns were repeated, so the
    /// coordinates are one arbitrary basis of the eigenspace.
    pub degenerate: bool,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Rescales every nonzero row to unit Euclidean norm; zero rows stay zero.
    pub fn normalize_rows(&mut self) {
        for row in &mut self.coords {
            let r = row[0].hypot(row[1]);
            if r > 0.0 {
                row[0] /= r;
                row[1] /= r;
            }
        }
        self.normalized = true;
    }
}

/// Parameters shared by all embedders; each uses the ones that apply to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedOptions {
    pub normalize: bool,
    pub seed: u64,
    pub iterations: usize,
    pub initial_temperature: f64,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            normalize: false,
            seed: 0,
            iterations: spring::DEFAULT_ITERATIONS,
            initial_temperature: spring::DEFAULT_TEMPERATURE,
        }
    }
}

/// A graph projection method.
pub trait Embedder: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether row normalization may be requested for this method.
    fn supports_normalize(&self) -> bool;

    /// Normalization applied when the caller does not choose.
    fn default_normalize(&self) -> bool {
        false
    }

    fn embed(&self, g: &Graph, opts: &EmbedOptions) -> Result<Embedding>;
}

/// Embedders keyed by name.
#[derive(Default)]
pub struct EmbedderRegistry {
    entries: BTreeMap<&'static str, Box<dyn Embedder>>,
}

impl EmbedderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding `spectral` and `spring`.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(Box::new(SpectralEmbedder));
        r.register(Box::new(SpringEmbedder));
        r
    }

    /// Adds an embedder, replacing any previous one with the same name.
    pub fn register(&mut self, embedder: Box<dyn Embedder>) {
        self.entries.insert(embedder.name(), embedder);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Embedder> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Config(format!(
                "unknown embedding method {name:?} (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal;

    impl Embedder for Diagonal {
        fn name(&self) -> &'static str {
            "diagonal"
        }
        fn supports_normalize(&self) -> bool {
            false
        }
        fn embed(&self, g: &Graph, _: &EmbedOptions) -> Result<Embedding> {
            Ok(Embedding {
                coords: (0..g.node_count()).map(|i| [i as f64, i as f64]).collect(),
                method: "diagonal".into(),
                normalized: false,
                seed: None,
                iterations: None,
                degenerate: false,
            })
        }
    }

    #[test]
    fn registry_lookup() {
        let mut r = EmbedderRegistry::with_defaults();
        assert_eq!(r.names(), ["spectral", "spring"]);
        assert!(r.get("spectral").unwrap().default_normalize());
        assert!(!r.get("spring").unwrap().supports_normalize());
        let err = r.get("umap").err().unwrap();
        assert!(err.to_string().contains("spectral, spring"));

        r.register(Box::new(Diagonal));
        let g = Graph::from_edges(3, [(0, 1)]).unwrap().0;
        let e = r.get("diagonal").unwrap().embed(&g, &EmbedOptions::default()).unwrap();
        assert_eq!(e.coords[2], [2.0, 2.0]);
    }

    #[test]
    fn normalize_rows_keeps_zero_rows() {
        let mut e = Diagonal.embed(&Graph::from_edges(3, []).unwrap().0, &EmbedOptions::default()).unwrap();
        e.coords[1] = [3.0, -4.0];
        e.normalize_rows();
        assert_eq!(e.coords[0], [0.0, 0.0]);
        assert!((e.coords[1][0] - 0.6).abs() < 1e-15 && (e.coords[1][1] + 0.8).abs() < 1e-15);
        assert!(e.normalized);
    }
}
