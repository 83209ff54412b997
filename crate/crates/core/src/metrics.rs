//! Partition comparison (NMI) and Newman–Girvan modularity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonicalize, Graph, GroundTruth};
use crate::tomato::Clustering;

/// Hard partition of nodes, labels canonicalized to `0..c` by first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: &[usize]) -> Partition {
        Partition {
            labels: canonicalize(labels),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

impl From<&GroundTruth> for Partition {
    fn from(gt: &GroundTruth) -> Self {
        Partition::new(gt.labels())
    }
}

impl From<&Clustering> for Partition {
    fn from(c: &Clustering) -> Self {
        Partition::new(&c.labels)
    }
}

/// `Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`, evaluated per
/// community as `sum_c [L_c/m - (D_c/2m)^2]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    if p.len() != g.node_count() {
        return Err(Error::Input(format!(
            "partition covers {} nodes, graph has {}",
            p.len(),
            g.node_count()
        )));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::Input("modularity is undefined without edges".to_string()));
    }
    let c = p.community_count();
    let mut internal = vec![0usize; c];
    let mut degree = vec![0usize; c];
    let l = p.labels();
    for &(a, b) in g.edges() {
        if l[a] == l[b] {
            internal[l[a]] += 1;
        }
    }
    for (i, &ci) in l.iter().enumerate() {
        degree[ci] += g.degree(i);
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&lc, &dc)| {
            let share = dc as f64 / (2.0 * m);
            lc as f64 / m - share * share
        })
        .sum())
}

/// Normalized mutual information `2 I(A;B) / (H(A) + H(B))` with natural logs.
///
/// Two single-cluster partitions score 1; exactly one single-cluster
/// partition scores 0. The result is clamped to `[0, 1]`.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "partitions differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::Input("cannot compare empty partitions".to_string()));
    }
    let count = |p: &Partition| {
        let mut c = vec![0u64; p.community_count()];
        p.labels().iter().for_each(|&l| c[l] += 1);
        c
    };
    let (ca, cb) = (count(a), count(b));
    let mut joint: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_insert(0) += 1;
    }
    let total = n as u64;
    let nf = n as f64;
    // H = sum p ln(N / n_c): same rounding path as the mutual information terms
    let entropy = |c: &[u64]| -> f64 {
        c.iter()
            .map(|&k| (k as f64 / nf) * (total as f64 / k as f64).ln())
            .sum()
    };
    let (ha, hb) = (entropy(&ca), entropy(&cb));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &k)| {
            let ratio = (total as u128 * k as u128) as f64 / (ca[x] as u128 * cb[y] as u128) as f64;
            (k as f64 / nf) * ratio.ln()
        })
        .sum();
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}
