//! Undirected communication graphs and seeded generators.
//!
//! Experiment-facing generators ([`gen_erdos_renyi`], [`gen_random_regular`])
//! only return connected graphs: a disconnected draw is discarded and redrawn
//! from the next derived seed, up to [`MAX_REDRAWS`] draws in total.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Cap on discarded draws before a generator gives up.
pub const MAX_REDRAWS: u32 = 1000;

/// Simple undirected graph on agents `0..n`.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from unordered pairs, rejecting self-loops, duplicate
    /// pairs and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("graph needs at least one vertex"));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::param(format!("edge ({a},{b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::param(format!("self-loop at vertex {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!("duplicate edge {:?}", w[0])));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in &normalized {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: normalized,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.neighbors[i].binary_search(&j).is_ok()
    }

    /// True iff a breadth-first search from vertex 0 reaches every vertex.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == self.n
    }

    /// Relabels vertices: vertex `perm[k]` of `self` becomes vertex `k`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![usize::MAX; self.n];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        Graph::new(
            self.n,
            self.edges.iter().map(|&(a, b)| (inverse[a], inverse[b])),
        )
    }

    /// Edge-list text: header `n <count>`, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (a, b) in &self.edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::param("empty edge list"))?;
        let n = header
            .strip_prefix("n ")
            .and_then(|c| c.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::param(format!("bad edge-list header {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => return Err(Error::param(format!("bad edge line {line:?}"))),
            }
        }
        Graph::new(n, edges)
    }
}

/// Erdős–Rényi G(n, p), redrawn until connected.
pub fn gen_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("Erdős–Rényi graph needs n >= 2"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param(format!("edge probability {p} not in (0, 1]")));
    }
    for attempt in 0..MAX_REDRAWS {
        let mut rng = rng::stream(rng::derive_seed(seed, u64::from(attempt)));
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Connectivity {
        attempts: MAX_REDRAWS,
    })
}

/// Uniform-ish random d-regular graph by the pairing (configuration) model.
///
/// Matchings with self-loops or repeated pairs are rejected, as are
/// disconnected results.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n < 2 || d == 0 || d >= n || (n * d) % 2 != 0 {
        return Err(Error::param(format!(
            "no simple {d}-regular graph on {n} vertices (need 0 < d < n, n*d even)"
        )));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut simple_draws = 0;
    for attempt in 0..MAX_REDRAWS {
        let mut rng = rng::stream(rng::derive_seed(seed, u64::from(attempt)));
        stubs.shuffle(&mut rng);
        let mut pairs: Vec<(usize, usize)> = stubs
            .chunks_exact(2)
            .map(|c| (c[0].min(c[1]), c[0].max(c[1])))
            .collect();
        if pairs.iter().any(|(a, b)| a == b) {
            continue;
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        simple_draws += 1;
        let g = Graph::new(n, pairs)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    if simple_draws == 0 {
        Err(Error::Generation(format!(
            "no simple pairing found for n = {n}, d = {d} in {MAX_REDRAWS} draws"
        )))
    } else {
        Err(Error::Connectivity {
            attempts: MAX_REDRAWS,
        })
    }
}

/// Path 0 – 1 – … – (n−1).
pub fn gen_path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("path graph needs n >= 2"));
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

pub fn gen_complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::param("complete graph needs n >= 2"));
    }
    Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
}
