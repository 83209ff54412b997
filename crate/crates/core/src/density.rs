//! Gaussian kernel density over embedded nodes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

/// Per-node density `rho` and the bandwidth that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub rho: Vec<f64>,
    pub sigma: f64,
}

impl DensityField {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// `rho_i = sum_j exp(-|z_i - z_j|^2 / (2 sigma^2))`, summing over every `j`
/// including `i` itself and with no normalizing constant, so `1 <= rho_i <= n`.
pub fn kde_density(emb: &Embedding, sigma: f64) -> Result<DensityField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Param(format!("bandwidth sigma={sigma} must be positive")));
    }
    if emb.is_empty() {
        return Err(Error::Input("density of an empty embedding".to_string()));
    }
    if let Some(i) = emb.coords.iter().position(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Input(format!("embedding row {i} is not finite")));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let pts = &emb.coords;
    let rho = pts
        .par_iter()
        .map(|p| {
            pts.iter()
                .map(|q| {
                    let dx = p[0] - q[0];
                    let dy = p[1] - q[1];
                    (-(dx * dx + dy * dy) * inv).exp()
                })
                .sum()
        })
        .collect();
    Ok(DensityField { rho, sigma })
}
