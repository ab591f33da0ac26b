//! Independent reference implementations used only by tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A walk found by brute force: nodes, total weight, level after each node.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    pub nodes: Vec<usize>,
    pub duration: f64,
    pub levels: Vec<usize>,
}

pub struct Graph {
    pub n: usize,
    /// `adj[u]` holds `(v, w)` pairs.
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            adj[u].push((v, w));
        }
        Graph { n, adj }
    }
}

fn step(genes: &[u8], s: usize, d: usize, level: usize, v: usize, strict: bool) -> Option<usize> {
    if v == s || v == d {
        return Some(level);
    }
    let g = genes[v] as usize;
    if g == level + 1 {
        Some(level + 1)
    } else if strict && g > level + 1 {
        None
    } else {
        Some(level)
    }
}

struct Search<'a> {
    graph: &'a Graph,
    genes: &'a [u8],
    s: usize,
    d: usize,
    t: usize,
    strict: bool,
    max_edges: usize,
    seen: Vec<Vec<bool>>,
    nodes: Vec<usize>,
    levels: Vec<usize>,
    best: Option<Walk>,
}

impl Search<'_> {
    fn better(&self, duration: f64) -> bool {
        match &self.best {
            None => true,
            Some(b) => duration < b.duration || (duration == b.duration && self.nodes < b.nodes),
        }
    }

    fn dfs(&mut self, u: usize, level: usize, duration: f64) {
        if u == self.d && level == self.t {
            if self.better(duration) {
                self.best = Some(Walk {
                    nodes: self.nodes.clone(),
                    duration,
                    levels: self.levels.clone(),
                });
            }
            return;
        }
        if self.nodes.len() > self.max_edges {
            return;
        }
        if let Some(b) = &self.best {
            if duration > b.duration {
                return;
            }
        }
        for i in 0..self.graph.adj[u].len() {
            let (v, w) = self.graph.adj[u][i];
            let Some(next) = step(self.genes, self.s, self.d, level, v, self.strict) else {
                continue;
            };
            if self.seen[v][next] {
                continue;
            }
            self.seen[v][next] = true;
            self.nodes.push(v);
            self.levels.push(next);
            self.dfs(v, next, duration + w);
            self.nodes.pop();
            self.levels.pop();
            self.seen[v][next] = false;
        }
    }
}

/// Enumerates every walk from `s` to `d` of at most `n * (t + 1)` edges that
/// never repeats a (node, level) pair and returns the shortest, ties going to
/// the smallest node sequence.
pub fn brute_force_route(
    graph: &Graph,
    genes: &[u8],
    s: usize,
    d: usize,
    t: usize,
    strict: bool,
) -> Option<Walk> {
    let mut search = Search {
        graph,
        genes,
        s,
        d,
        t,
        strict,
        max_edges: graph.n * (t + 1),
        seen: vec![vec![false; t + 1]; graph.n],
        nodes: vec![s],
        levels: vec![0],
        best: None,
    };
    search.seen[s][0] = true;
    search.dfs(s, 0, 0.0);
    search.best
}

/// Random digraph with integer weights in `lo..=hi`, independent of the
/// library's generator.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64, lo: u32, hi: u32) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(lo..=hi) as f64));
            }
        }
    }
    edges
}

pub fn random_genes(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..=t as u8)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain Dijkstra over `graph` from `s`, used to cross-check `T = 0`.
pub fn dijkstra(graph: &Graph, s: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.n];
    let mut done = vec![false; graph.n];
    dist[s] = 0.0;
    for _ in 0..graph.n {
        let Some(u) = (0..graph.n)
            .filter(|&u| !done[u] && dist[u].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for &(v, w) in &graph.adj[u] {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
    dist
}

/// All-pairs plain distances.
pub fn distance_matrix(graph: &Graph) -> Vec<Vec<f64>> {
    (0..graph.n).map(|s| dijkstra(graph, s)).collect()
}

/// Cheapest total length of a walk `s -> v1 -> ... -> vk -> t` through `k`
/// distinct nodes outside `{s, t}`, or `None` if there is none.
pub fn min_ordered_visit(dist: &[Vec<f64>], s: usize, t: usize, k: usize) -> Option<f64> {
    let n = dist.len();
    let inner: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    // rest[j][v]: cheapest finish from v with j more stops, repeats allowed.
    let mut rest = vec![vec![f64::INFINITY; n]; k + 1];
    for v in 0..n {
        rest[0][v] = dist[v][t];
    }
    for j in 1..=k {
        for v in 0..n {
            rest[j][v] = inner
                .iter()
                .map(|&w| dist[v][w] + rest[j - 1][w])
                .fold(f64::INFINITY, f64::min);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn go(
        dist: &[Vec<f64>],
        rest: &[Vec<f64>],
        inner: &[usize],
        used: &mut Vec<bool>,
        at: usize,
        left: usize,
        so_far: f64,
        best: &mut f64,
    ) {
        if so_far + rest[left][at] >= *best {
            return;
        }
        if left == 0 {
            *best = so_far + rest[0][at];
            return;
        }
        for &w in inner {
            if !used[w] && dist[at][w].is_finite() {
                used[w] = true;
                go(dist, rest, inner, used, w, left - 1, so_far + dist[at][w], best);
                used[w] = false;
            }
        }
    }

    let mut best = f64::INFINITY;
    let mut used = vec![false; n];
    go(dist, &rest, &inner, &mut used, s, k, 0.0, &mut best);
    best.is_finite().then_some(best)
}
