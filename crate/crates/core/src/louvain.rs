//! Two-phase Louvain modularity maximization.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::{modularity, Partition};

/// Weighted graph of one Louvain level. `loops[i]` is the weight of edges
/// folded inside node `i`; they count twice towards its strength.
#[derive(Debug, Clone)]
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    strength: Vec<f64>,
    two_m: f64,
}

impl Level {
    fn from_graph(g: &Graph) -> Level {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|i| g.neighbors(i).iter().map(|&j| (j, 1.0)).collect())
            .collect();
        let n = adj.len();
        Level::new(adj, vec![0.0; n])
    }

    fn new(adj: Vec<Vec<(usize, f64)>>, loops: Vec<f64>) -> Level {
        let strength: Vec<f64> = adj
            .iter()
            .zip(&loops)
            .map(|(row, l)| row.iter().map(|e| e.1).sum::<f64>() + 2.0 * l)
            .collect();
        let two_m = strength.iter().sum();
        Level {
            adj,
            loops,
            strength,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Modularity of `comm` on this weighted graph.
    fn modularity(&self, comm: &[usize]) -> f64 {
        let c = comm.iter().max().map_or(0, |m| m + 1);
        let mut inside = vec![0.0; c];
        let mut tot = vec![0.0; c];
        for i in 0..self.len() {
            tot[comm[i]] += self.strength[i];
            inside[comm[i]] += 2.0 * self.loops[i];
            for &(j, w) in &self.adj[i] {
                if comm[j] == comm[i] {
                    inside[comm[i]] += w;
                }
            }
        }
        inside
            .iter()
            .zip(&tot)
            .map(|(a, t)| a / self.two_m - (t / self.two_m).powi(2))
            .sum()
    }

    /// Local moving phase. Returns community per node (renumbered `0..c`) and
    /// whether anything moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut link = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;

        loop {
            let mut moved = false;
            for &i in &order {
                let ki = self.strength[i];
                let old = comm[i];
                touched.clear();
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if link[c] == 0.0 {
                        touched.push(c);
                    }
                    link[c] += w;
                }
                tot[old] -= ki;
                let gain = |c: usize, link_c: f64| link_c - tot[c] * ki / self.two_m;
                let stay = gain(old, link[old]);
                touched.sort_unstable();
                let mut best = old;
                let mut best_gain = f64::NEG_INFINITY;
                for &c in &touched {
                    if c == old {
                        continue;
                    }
                    let g = gain(c, link[c]);
                    if g > best_gain {
                        best_gain = g;
                        best = c;
                    }
                }
                if best == old || best_gain <= stay + 1e-12 * ki.max(1.0) {
                    best = old;
                }
                tot[best] += ki;
                if best != old {
                    comm[i] = best;
                    moved = true;
                }
                for &c in &touched {
                    link[c] = 0.0;
                }
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        let renumbered = crate::graph::canonicalize(&comm);
        (renumbered, any_move)
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let c = comm.iter().max().map_or(0, |m| m + 1);
        let mut loops = vec![0.0; c];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); c];
        for i in 0..self.len() {
            let ci = comm[i];
            loops[ci] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each internal edge is seen from both ends
                    loops[ci] += 0.5 * w;
                } else {
                    *rows[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = rows.into_iter().map(|r| r.into_iter().collect()).collect();
        Level::new(adj, loops)
    }
}

/// Flat partition after each aggregation, with the modularity measured on the
/// aggregated graph (singleton partition) and on the original graph.
#[derive(Debug, Clone)]
pub struct LouvainLevel {
    pub partition: Partition,
    pub modularity: f64,
    pub supergraph_modularity: f64,
}

/// Louvain community detection, deterministic given `seed`.
pub fn louvain(g: &Graph, seed: u64) -> Result<Partition> {
    let levels = louvain_levels(g, seed)?;
    Ok(levels
        .into_iter()
        .last()
        .map(|l| l.partition)
        .unwrap_or_else(|| Partition::new(&(0..g.node_count()).collect::<Vec<_>>())))
}

/// Runs Louvain and returns every level it produced. Modularity is asserted
/// non-decreasing from one level to the next.
pub fn louvain_levels(g: &Graph, seed: u64) -> Result<Vec<LouvainLevel>> {
    if g.edge_count() == 0 {
        return Err(Error::Input("Louvain needs at least one edge".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(g);
    let mut flat: Vec<usize> = (0..g.node_count()).collect();
    let mut previous = modularity(g, &Partition::new(&flat))?;
    let mut out = Vec::new();
    loop {
        let (comm, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        for f in flat.iter_mut() {
            *f = comm[*f];
        }
        level = level.aggregate(&comm);
        let partition = Partition::new(&flat);
        let q = modularity(g, &partition)?;
        let singletons: Vec<usize> = (0..level.len()).collect();
        let super_q = level.modularity(&singletons);
        if q < previous - 1e-12 {
            return Err(Error::Numerical(format!(
                "Louvain modularity decreased from {previous} to {q}"
            )));
        }
        previous = q;
        out.push(LouvainLevel {
            partition,
            modularity: q,
            supergraph_modularity: super_q,
        });
    }
    Ok(out)
}
