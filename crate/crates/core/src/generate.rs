//! Planted-partition benchmark graphs with a target mixing fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroundTruth};

/// Parameters of a degree-homogeneous planted partition.
///
/// `mu` is the expected fraction of a node's edges that leave its community;
/// the inter-community probability is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantedPartitionSpec {
    pub n: usize,
    pub c: usize,
    pub p_in: f64,
    pub mu: f64,
    pub seed: u64,
}

impl PlantedPartitionSpec {
    /// Community sizes: `n / c`, the first `n % c` communities one larger.
    pub fn sizes(&self) -> Vec<usize> {
        (0..self.c)
            .map(|i| self.n / self.c + usize::from(i < self.n % self.c))
            .collect()
    }

    /// Inter-community edge probability giving an expected mixing fraction of `mu`:
    /// `p_out (n - s) / (p_in (s - 1) + p_out (n - s)) = mu` with mean size `s = n / c`.
    pub fn p_out(&self) -> Result<f64> {
        let bad = |msg: String| Err(Error::Param(msg));
        if self.n == 0 || self.c == 0 || self.c > self.n {
            return bad(format!("need 1 <= c <= n, got n={} c={}", self.n, self.c));
        }
        if !(0.0..=1.0).contains(&self.p_in) {
            return bad(format!("p_in={} outside [0, 1]", self.p_in));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu={} outside [0, 1]", self.mu));
        }
        if self.mu == 0.0 {
            return Ok(0.0);
        }
        let s = self.n as f64 / self.c as f64;
        let internal = self.p_in * (s - 1.0);
        let outside = self.n as f64 - s;
        if internal <= 0.0 || outside <= 0.0 || self.mu >= 1.0 {
            return bad(format!(
                "mixing fraction mu={} is unreachable with p_in={} and {} communities",
                self.mu, self.p_in, self.c
            ));
        }
        let p_out = self.mu * internal / ((1.0 - self.mu) * outside);
        if p_out > 1.0 {
            return bad(format!("implied p_out={p_out:.4} exceeds 1"));
        }
        Ok(p_out)
    }
}

/// Samples a planted-partition graph. Communities are contiguous index blocks.
pub fn generate_planted_partition(spec: &PlantedPartitionSpec) -> Result<(Graph, GroundTruth)> {
    let p_out = spec.p_out()?;
    let mut labels = Vec::with_capacity(spec.n);
    for (c, size) in spec.sizes().into_iter().enumerate() {
        labels.extend(std::iter::repeat_n(c, size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            let p = if labels[i] == labels[j] { spec.p_in } else { p_out };
            // always draw so the stream position does not depend on p
            let u: f64 = rng.gen();
            if u < p {
                edges.push((i, j));
            }
        }
    }
    let (g, _) = Graph::from_edges(spec.n, edges)?;
    Ok((g, GroundTruth::from_raw(&labels)))
}

/// Fraction of edges joining different communities.
pub fn inter_community_fraction(g: &Graph, truth: &GroundTruth) -> f64 {
    if g.edge_count() == 0 {
        return 0.0;
    }
    let l = truth.labels();
    let inter = g.edges().iter().filter(|&&(a, b)| l[a] != l[b]).count();
    inter as f64 / g.edge_count() as f64
}
