//! Persistence-based mode clustering (ToMATo).
//!
//! Nodes are swept in decreasing density. A node with no denser neighbor
//! founds a cluster and becomes its mode; any other node joins the cluster
//! of its densest neighbor (a discrete gradient step). When a node touches
//! several clusters, the one whose mode is lower is absorbed into the other
//! if its prominence so far (mode density minus the current level) is below
//! `tau`. Absorptions are recorded in a persistence diagram.
//!
//! Throughout, `i ≻ j` means `rho[i] > rho[j]`, or equal densities and `i < j`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::knn::NeighborhoodGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomatoParams {
    /// Merge threshold in density units; `f64::INFINITY` merges every
    /// cluster within a connected component.
    pub tau: f64,
}

impl TomatoParams {
    pub fn new(tau: f64) -> Result<TomatoParams> {
        if tau.is_nan() || tau < 0.0 {
            return Err(Error::Param(format!("tau={tau} must be non-negative")));
        }
        Ok(TomatoParams { tau })
    }
}

/// One density mode: born at its own density, dead at the level where it was
/// absorbed, or `-inf` if it survived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub mode: usize,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    pub fn is_survivor(&self) -> bool {
        self.death == f64::NEG_INFINITY
    }

    /// `birth - death`; `+inf` for survivors.
    pub fn prominence(&self) -> f64 {
        self.birth - self.death
    }
}

/// Points in the order their modes were born (decreasing density).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    pub fn survivors(&self) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(|p| p.is_survivor())
    }

    pub fn finite(&self) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(|p| !p.is_survivor())
    }

    /// Indices into `points` sorted by prominence, largest first (ties by birth order).
    pub fn by_prominence(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            self.points[b]
                .prominence()
                .total_cmp(&self.points[a].prominence())
                .then(a.cmp(&b))
        });
        idx
    }

    /// CSV `mode_node,birth,death`, survivors written with a `-inf` death.
    pub fn to_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("mode_node,birth,death\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", ids[p.mode], fmt_real(p.birth), fmt_real(p.death));
        }
        out
    }

    /// Barcode CSV: the same intervals sorted by prominence, largest first.
    pub fn to_barcode_csv(&self, ids: &[String]) -> String {
        let mut out = String::from("mode_node,birth,death,prominence\n");
        for i in self.by_prominence() {
            let p = &self.points[i];
            let _ = writeln!(
                out,
                "{},{},{},{}",
                ids[p.mode],
                fmt_real(p.birth),
                fmt_real(p.death),
                fmt_real(p.prominence())
            );
        }
        out
    }
}

/// 17 significant digits; infinities as `inf` / `-inf`.
pub(crate) fn fmt_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Hard assignment of nodes to clusters `0..c`, numbered by decreasing mode density.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    /// Mode node of each cluster, indexed by label.
    pub mode_nodes: Vec<usize>,
}

impl Clustering {
    /// Reserved label for unassigned points; the sweep itself never emits it.
    pub const NOISE: usize = usize::MAX;

    pub fn cluster_count(&self) -> usize {
        self.mode_nodes.len()
    }
}

/// Total order ≻ as a sort key: denser first, then smaller index.
fn sweep_order(rho: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    order
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    while parent[x] != root {
        let next = parent[x];
        parent[x] = root;
        x = next;
    }
    root
}

/// Runs the ToMATo sweep and returns the clusters surviving at `params.tau`
/// together with the persistence diagram of every mode.
pub fn tomato_cluster(
    ng: &NeighborhoodGraph,
    density: &DensityField,
    params: &TomatoParams,
) -> Result<(Clustering, PersistenceDiagram)> {
    let n = ng.node_count();
    let rho = &density.rho;
    if rho.len() != n {
        return Err(Error::Input(format!(
            "neighborhood graph has {n} nodes but density has {}",
            rho.len()
        )));
    }
    if let Some(i) = rho.iter().position(|r| !r.is_finite()) {
        return Err(Error::Input(format!("density at node {i} is not finite")));
    }
    let tau = TomatoParams::new(params.tau)?.tau;

    let order = sweep_order(rho);
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }

    const UNSEEN: usize = usize::MAX;
    // roots are always mode nodes: the lower mode's root is hung under the higher one
    let mut parent = vec![UNSEEN; n];
    let mut death = vec![f64::NEG_INFINITY; n];
    let mut modes = Vec::new();
    let mut higher: Vec<usize> = Vec::new();

    for &i in &order {
        higher.clear();
        higher.extend(ng.neighbors(i).iter().copied().filter(|&j| rank[j] < rank[i]));
        if higher.is_empty() {
            parent[i] = i;
            modes.push(i);
            continue;
        }
        higher.sort_unstable_by_key(|&j| rank[j]);
        let up = find(&mut parent, higher[0]);
        parent[i] = up;
        for &j in &higher[1..] {
            let rj = find(&mut parent, j);
            let ri = find(&mut parent, i);
            if rj == ri {
                continue;
            }
            let (keep, absorb) = if rank[ri] < rank[rj] { (ri, rj) } else { (rj, ri) };
            if rho[absorb] < rho[i] + tau {
                parent[absorb] = keep;
                death[absorb] = rho[i];
            }
        }
    }

    let points = modes
        .iter()
        .map(|&m| DiagramPoint {
            mode: m,
            birth: rho[m],
            death: death[m],
        })
        .collect();

    // modes are in ≻ order, so survivors come out numbered by decreasing density
    let mut label_of_root = vec![usize::MAX; n];
    let mut mode_nodes = Vec::new();
    for &m in &modes {
        if parent[m] == m {
            label_of_root[m] = mode_nodes.len();
            mode_nodes.push(m);
        }
    }
    let labels = (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            label_of_root[r]
        })
        .collect();

    Ok((Clustering { labels, mode_nodes }, PersistenceDiagram { points }))
}

/// Prominences sorted in decreasing order (`+inf` first) and a threshold read
/// off the diagram: the midpoint of the largest multiplicative gap between
/// consecutive finite prominences, or 0 with fewer than two finite ones.
pub fn diagram_prominence_gap(d: &PersistenceDiagram) -> Result<(Vec<f64>, f64)> {
    if d.points.is_empty() {
        return Err(Error::Input("persistence diagram is empty".to_string()));
    }
    let mut prom: Vec<f64> = d.points.iter().map(DiagramPoint::prominence).collect();
    prom.sort_by(|a, b| b.total_cmp(a));
    let finite: Vec<f64> = prom.iter().copied().filter(|p| p.is_finite()).collect();
    if finite.len() < 2 {
        return Ok((prom, 0.0));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, w) in finite.windows(2).enumerate() {
        let ratio = if w[1] > 0.0 {
            w[0] / w[1]
        } else if w[0] > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > best.1 {
            best = (i, ratio);
        }
    }
    let tau = 0.5 * (finite[best.0] + finite[best.0 + 1]);
    Ok((prom, tau))
}

/// The threshold [`diagram_prominence_gap`] reads off the full (`tau = inf`) diagram.
pub fn auto_tau(ng: &NeighborhoodGraph, density: &DensityField) -> Result<f64> {
    let (_, diagram) = tomato_cluster(ng, density, &TomatoParams { tau: f64::INFINITY })?;
    diagram_prominence_gap(&diagram).map(|(_, tau)| tau)
}
