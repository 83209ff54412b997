//! Simple undirected graphs, edge-list / LFR ingestion and ground-truth labels.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected simple graph with dense `0..n` node indices.
///
/// External identifiers from the input file are kept in `node_ids` so that
/// every output can report them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    node_ids: Vec<String>,
    id_index: HashMap<String, usize>,
}

/// What was dropped while coercing the input to a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes named `0..n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<(Graph, DropReport)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let ids = (0..n).map(|i| i.to_string()).collect();
        Graph::with_ids(ids, edges)
    }

    /// Builds a graph whose node `i` carries external id `node_ids[i]`.
    /// Self-loops and repeated pairs are dropped and counted.
    pub fn with_ids<I>(node_ids: Vec<String>, edges: I) -> Result<(Graph, DropReport)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = node_ids.len();
        let mut report = DropReport::default();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Input(format!(
                    "edge ({a}, {b}) has an endpoint outside 0..{n}"
                )));
            }
            if a == b {
                report.self_loops += 1;
                continue;
            }
            if !set.insert((a.min(b), a.max(b))) {
                report.duplicates += 1;
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for row in &mut adjacency {
            row.sort_unstable();
        }
        let mut id_index = HashMap::with_capacity(n);
        for (i, id) in node_ids.iter().enumerate() {
            if id_index.insert(id.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate node id {id:?}")));
            }
        }
        Ok((
            Graph {
                adjacency,
                edges,
                node_ids,
                id_index,
            },
            report,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor indices of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.node_ids[i]
    }

    /// Dense index of an external id. Integer ids are matched numerically,
    /// so `"007"` finds node `"7"`.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied().or_else(|| {
            id.parse::<u64>()
                .ok()
                .and_then(|v| self.id_index.get(&v.to_string()).copied())
        })
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Connected component id of every node (components numbered in order of
    /// their smallest node) and the component count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (comp, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }

    /// Canonical edge list: one `u v` line per edge, sorted by `(min, max)`
    /// dense index, written with external ids.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{} {}", self.node_ids[a], self.node_ids[b]);
        }
        out
    }

    /// LFR `network.dat` form: every edge listed in both directions, tab separated.
    pub fn to_lfr_network(&self) -> String {
        let mut lines: Vec<(usize, usize)> = self
            .edges
            .iter()
            .flat_map(|&(a, b)| [(a, b), (b, a)])
            .collect();
        lines.sort_unstable();
        let mut out = String::new();
        for (a, b) in lines {
            let _ = writeln!(out, "{}\t{}", self.node_ids[a], self.node_ids[b]);
        }
        out
    }

    /// Induced subgraph on `keep` (ascending dense indices); ids are carried over.
    pub fn induced(&self, keep: &[usize]) -> (Graph, Vec<Option<usize>>) {
        let mut map = vec![None; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = Some(new);
        }
        let ids = keep.iter().map(|&i| self.node_ids[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((map[a]?, map[b]?)));
        let (g, _) = Graph::with_ids(ids, edges).expect("induced subgraph of a valid graph");
        (g, map)
    }
}

/// Node indexing convention of an integer edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indexing {
    /// 1-indexed iff no token `0` appears and token `1` does.
    #[default]
    Auto,
    Zero,
    One,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub comment_prefix: String,
    pub indexing: Indexing,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            comment_prefix: "#".to_string(),
            indexing: Indexing::Auto,
        }
    }
}

fn content_lines<'a>(
    text: &'a str,
    comment_prefix: &'a str,
) -> impl Iterator<Item = (usize, Vec<&'a str>)> + 'a {
    text.lines().enumerate().filter_map(move |(i, line)| {
        let line = line.trim();
        if line.is_empty() || (!comment_prefix.is_empty() && line.starts_with(comment_prefix)) {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

/// Parses a whitespace-separated edge list into a simple graph.
///
/// When every token is a non-negative integer, ids are positions: node
/// `id - offset` where the offset comes from `options.indexing`, and `n` is
/// one past the largest index. Otherwise ids are arbitrary strings assigned
/// dense indices in sorted order, so line order never matters.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<(Graph, DropReport)> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for (line_no, tokens) in content_lines(text, &options.comment_prefix) {
        if !(2..=3).contains(&tokens.len()) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 2 or 3 tokens, found {}", tokens.len()),
            });
        }
        pairs.push((tokens[0], tokens[1]));
    }
    if pairs.is_empty() {
        return Err(Error::Input("edge list is empty".to_string()));
    }

    let numeric: Option<Vec<(u64, u64)>> = pairs
        .iter()
        .map(|(a, b)| Some((a.parse::<u64>().ok()?, b.parse::<u64>().ok()?)))
        .collect();

    match numeric {
        Some(nums) => {
            let one_indexed = match options.indexing {
                Indexing::Zero => false,
                Indexing::One => true,
                Indexing::Auto => {
                    let any = |v: u64| nums.iter().any(|&(a, b)| a == v || b == v);
                    !any(0) && any(1)
                }
            };
            let offset = u64::from(one_indexed);
            if one_indexed && nums.iter().any(|&(a, b)| a == 0 || b == 0) {
                return Err(Error::Input(
                    "node 0 present in a 1-indexed edge list".to_string(),
                ));
            }
            let max = nums.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
            let n = usize::try_from(max - offset + 1)
                .map_err(|_| Error::Input(format!("node id {max} too large")))?;
            let ids = (0..n as u64).map(|i| (i + offset).to_string()).collect();
            let edges = nums
                .into_iter()
                .map(|(a, b)| ((a - offset) as usize, (b - offset) as usize));
            Graph::with_ids(ids, edges)
        }
        None => {
            if options.indexing != Indexing::Auto {
                return Err(Error::Input(
                    "explicit 0/1 indexing requires integer node ids".to_string(),
                ));
            }
            let names: BTreeSet<&str> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            let index: HashMap<&str, usize> =
                names.iter().enumerate().map(|(i, &s)| (s, i)).collect();
            let ids = names.iter().map(|s| s.to_string()).collect();
            let edges: Vec<_> = pairs.iter().map(|(a, b)| (index[a], index[b])).collect();
            Graph::with_ids(ids, edges)
        }
    }
}

/// Ground-truth community label per node, canonicalized to `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    labels: Vec<usize>,
}

impl GroundTruth {
    /// Canonicalizes arbitrary label values: ids are renumbered in order of
    /// first appearance along the node index.
    pub fn from_raw<T: Eq + std::hash::Hash + Clone>(raw: &[T]) -> GroundTruth {
        GroundTruth {
            labels: canonicalize(raw),
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
        self.labels.iter().max().map_or(0, |&m| m + 1)
    }

    /// Keeps the labels of nodes retained by an old→new index map.
    pub fn restrict(&self, map: &[Option<usize>]) -> GroundTruth {
        let kept = map.iter().filter(|m| m.is_some()).count();
        let mut raw = vec![0; kept];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                raw[*new] = self.labels[old];
            }
        }
        GroundTruth::from_raw(&raw)
    }

    /// `community.dat` form: `node<TAB>community`, communities 1-based.
    pub fn to_lfr_community(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}", g.node_id(i), l + 1);
        }
        out
    }
}

pub(crate) fn canonicalize<T: Eq + std::hash::Hash + Clone>(raw: &[T]) -> Vec<usize> {
    let mut seen: HashMap<T, usize> = HashMap::new();
    raw.iter()
        .map(|v| {
            let next = seen.len();
            *seen.entry(v.clone()).or_insert(next)
        })
        .collect()
}

/// Parses `node label` lines (LFR `community.dat`) against the nodes of `g`.
pub fn parse_labels(text: &str, g: &Graph) -> Result<GroundTruth> {
    let mut raw: Vec<Option<i64>> = vec![None; g.node_count()];
    for (line_no, tokens) in content_lines(text, "#") {
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `node label`, found {} tokens", tokens.len()),
            });
        }
        let node = g.index_of(tokens[0]).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("unknown node {}", tokens[0]),
        })?;
        let label: i64 = tokens[1].parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("label {:?} is not an integer", tokens[1]),
        })?;
        match raw[node] {
            Some(prev) if prev != label => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("node {} labeled twice ({prev} and {label})", tokens[0]),
                })
            }
            _ => raw[node] = Some(label),
        }
    }
    let labels: Vec<i64> = raw
        .iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Input(format!("node {} unlabeled", g.node_id(i)))))
        .collect::<Result<_>>()?;
    Ok(GroundTruth::from_raw(&labels))
}

/// Induced subgraph on the largest connected component, ties going to the
/// component that contains the smallest node index, plus the old→new map.
pub fn largest_component(g: &Graph) -> (Graph, Vec<Option<usize>>) {
    let (comp, count) = g.components();
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    // components are numbered by smallest member, so the first maximum wins ties
    let best = (0..count).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
    let keep: Vec<usize> = (0..g.node_count()).filter(|&i| comp[i] == best).collect();
    g.induced(&keep)
}
