//! Symmetric k-nearest-neighbor graphs over embedded points.

use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::embedding::Embedding;
use crate::error::{Error, Result};

/// Above this many points the grid-bucket search replaces brute force.
pub const BRUTE_FORCE_LIMIT: usize = 50_000;

/// Undirected neighborhood graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodGraph {
    k: usize,
    adjacency: Vec<Vec<usize>>,
}

impl NeighborhoodGraph {
    /// Union-symmetrizes directed neighbor lists; self references are dropped.
    pub fn from_directed(k: usize, lists: Vec<Vec<usize>>) -> NeighborhoodGraph {
        let n = lists.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, list) in lists.into_iter().enumerate() {
            for j in list {
                if j != i {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        for row in &mut adjacency {
            row.sort_unstable();
            row.dedup();
        }
        NeighborhoodGraph { k, adjacency }
    }

    /// Neighborhood graph from an explicit undirected edge list (`k` recorded as 0).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> NeighborhoodGraph {
        let mut lists = vec![Vec::new(); n];
        for &(a, b) in edges {
            lists[a].push(b);
        }
        NeighborhoodGraph::from_directed(0, lists)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Canonical `(min, max)` edge list, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnSearch {
    Auto,
    BruteForce,
    Grid,
}

/// Directed k-NN by Euclidean distance (ties to the smaller index), then
/// symmetrized by union.
pub fn knn_graph(emb: &Embedding, k: usize) -> Result<NeighborhoodGraph> {
    knn_graph_with(emb, k, KnnSearch::Auto)
}

pub fn knn_graph_with(emb: &Embedding, k: usize, search: KnnSearch) -> Result<NeighborhoodGraph> {
    let n = emb.len();
    if k == 0 || k >= n {
        return Err(Error::Param(format!("k={k} must lie in 1..={}", n.saturating_sub(1))));
    }
    if emb.coords.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::Input("embedding has non-finite coordinates".to_string()));
    }
    let grid = match search {
        KnnSearch::Auto => n > BRUTE_FORCE_LIMIT,
        KnnSearch::BruteForce => false,
        KnnSearch::Grid => true,
    };
    let lists = if grid {
        grid_knn(&emb.coords, k)
    } else {
        brute_knn(&emb.coords, k)
    };
    Ok(NeighborhoodGraph::from_directed(k, lists))
}

fn dist2(p: [f64; 2], q: [f64; 2]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    dx * dx + dy * dy
}

/// `(squared distance, index)` with a total order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn brute_knn(pts: &[[f64; 2]], k: usize) -> Vec<Vec<usize>> {
    pts.par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut cand: Vec<Candidate> = pts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, &q)| Candidate(dist2(p, q), j))
                .collect();
            cand.select_nth_unstable(k - 1);
            cand.truncate(k);
            cand.sort_unstable();
            cand.into_iter().map(|c| c.1).collect()
        })
        .collect()
}

/// Exact k-NN through a uniform bucket grid: rings of cells are scanned
/// outward until the k-th best distance is provably below anything unseen.
fn grid_knn(pts: &[[f64; 2]], k: usize) -> Vec<Vec<usize>> {
    let n = pts.len();
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in pts {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
    // about 2k points per cell on average
    let cells_wanted = (n as f64 / (2.0 * k as f64)).max(1.0);
    let h = ((span[0] * span[1]) / cells_wanted)
        .sqrt()
        .max(span[0].max(span[1]) / cells_wanted);
    let dims = [
        ((span[0] / h).floor() as usize + 1).max(1),
        ((span[1] / h).floor() as usize + 1).max(1),
    ];
    let cell_of = |p: [f64; 2]| -> (usize, usize) {
        let cx = (((p[0] - lo[0]) / h).floor() as usize).min(dims[0] - 1);
        let cy = (((p[1] - lo[1]) / h).floor() as usize).min(dims[1] - 1);
        (cx, cy)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); dims[0] * dims[1]];
    for (i, &p) in pts.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        buckets[cy * dims[0] + cx].push(i);
    }
    let max_ring = dims[0].max(dims[1]);

    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = pts[i];
            let (cx, cy) = cell_of(p);
            let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
            for r in 0..=max_ring {
                let (x0, x1) = (cx as isize - r as isize, cx as isize + r as isize);
                let (y0, y1) = (cy as isize - r as isize, cy as isize + r as isize);
                for (x, y) in ring_cells(x0, x1, y0, y1) {
                    if x < 0 || y < 0 || x >= dims[0] as isize || y >= dims[1] as isize {
                        continue;
                    }
                    for &j in &buckets[y as usize * dims[0] + x as usize] {
                        if j == i {
                            continue;
                        }
                        let c = Candidate(dist2(p, pts[j]), j);
                        if heap.len() < k {
                            heap.push(c);
                        } else if c < *heap.peek().expect("heap holds k items") {
                            heap.pop();
                            heap.push(c);
                        }
                    }
                }
                if heap.len() == k {
                    // everything outside rings 0..=r lies at least r*h away
                    let safe = r as f64 * h * (1.0 - 1e-9);
                    if heap.peek().expect("non-empty").0 < safe * safe {
                        break;
                    }
                }
            }
            let mut out = heap.into_sorted_vec();
            out.truncate(k);
            out.into_iter().map(|c| c.1).collect()
        })
        .collect()
}

/// Cells on the boundary of the square `[x0, x1] x [y0, y1]`, each once.
fn ring_cells(x0: isize, x1: isize, y0: isize, y1: isize) -> impl Iterator<Item = (isize, isize)> {
    let rows = (x0..=x1).flat_map(move |x| {
        let bottom = std::iter::once((x, y0));
        let top = (y1 != y0).then_some((x, y1));
        bottom.chain(top)
    });
    let sides = (y0 + 1..y1).flat_map(move |y| {
        let left = std::iter::once((x0, y));
        let right = (x1 != x0).then_some((x1, y));
        left.chain(right)
    });
    rows.chain(sides)
}
