use crate::error::Result;
use crate::graph::Graph;

use super::eigen::{laplacian_eigenpairs_with, EigenSolver};
use super::{EmbedOptions, Embedder, Embedding};

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1.0)
}

/// Coordinates from the eigenvectors of the 2nd and 3rd smallest Laplacian
/// eigenvalues, optionally row-normalized onto the unit circle.
pub fn spectral_embed(g: &Graph, normalize: bool) -> Result<Embedding> {
    spectral_embed_with(g, normalize, EigenSolver::Auto)
}

pub fn spectral_embed_with(g: &Graph, normalize: bool, solver: EigenSolver) -> Result<Embedding> {
    let n = g.node_count();
    // one extra pair tells whether u3 sits in a repeated eigenspace
    let basis = laplacian_eigenpairs_with(g, n.min(4), solver)?;
    let lambda = &basis.eigenvalues;
    let degenerate = nearly_equal(lambda[1], lambda[2])
        || (lambda.len() > 3 && nearly_equal(lambda[2], lambda[3]));
    let (u2, u3) = (&basis.eigenvectors[1], &basis.eigenvectors[2]);
    let mut emb = Embedding {
        coords: u2.iter().zip(u3).map(|(&x, &y)| [x, y]).collect(),
        method: "spectral".to_string(),
        normalized: false,
        seed: None,
        iterations: None,
        degenerate,
    };
    if normalize {
        emb.normalize_rows();
    }
    Ok(emb)
}

pub struct SpectralEmbedder;

impl Embedder for SpectralEmbedder {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn supports_normalize(&self) -> bool {
        true
    }

    fn default_normalize(&self) -> bool {
        true
    }

    fn embed(&self, g: &Graph, opts: &EmbedOptions) -> Result<Embedding> {
        spectral_embed(g, opts.normalize)
    }
}
