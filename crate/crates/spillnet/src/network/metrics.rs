use super::SpilloverNetwork;
use crate::error::{Error, Result};
use crate::stats::pearson;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// Per-vertex and network-level centrality metrics of one window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CentralityReport {
    pub window_end: crate::windows::Month,
    pub vertices: Vec<String>,
    pub out_degree: Vec<usize>,
    pub in_degree: Vec<usize>,
    pub harmonic: Vec<f64>,
    pub mean_degree_centrality: f64,
    pub mean_harmonic_centrality: f64,
    pub out_centralization: f64,
    pub in_centralization: f64,
    pub density: f64,
    pub degree_correlation: Option<f64>,
}

/// Out- and in-degrees per vertex.
pub fn degrees(g: &SpilloverNetwork) -> (Vec<usize>, Vec<usize>) {
    let n = g.n_vertices();
    let mut out = vec![0usize; n];
    let mut in_ = vec![0usize; n];
    for &(o, i) in &g.edges {
        out[o] += 1;
        in_[i] += 1;
    }
    (out, in_)
}

/// Harmonic centrality per vertex: sum of reciprocal directed shortest-path
/// distances over reachable vertices (outgoing orientation by default; the
/// incoming variant transposes the graph). Unreachable vertices contribute
/// zero.
pub fn harmonic_centrality(g: &SpilloverNetwork, direction: Direction) -> Vec<f64> {
    let n = g.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for &(o, i) in &g.edges {
        match direction {
            Direction::Out => adj[o].push(i),
            Direction::In => adj[i].push(o),
        }
    }
    let mut scores = vec![0.0; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for start in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[start] = 0;
        queue.clear();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        // reciprocal distances summed in vertex order so the result is
        // independent of BFS discovery order
        scores[start] = (0..n)
            .filter(|&v| v != start && dist[v] != usize::MAX)
            .map(|v| 1.0 / dist[v] as f64)
            .sum();
    }
    scores
}

/// Standardized average degree: sum of out-degrees over |V|(|V|-1); equals
/// the directed density.
pub fn mean_degree_centrality(g: &SpilloverNetwork) -> f64 {
    let n = g.n_vertices();
    assert!(n >= 2);
    g.n_edges() as f64 / (n * (n - 1)) as f64
}

pub fn mean_harmonic_centrality(g: &SpilloverNetwork, direction: Direction) -> f64 {
    let n = g.n_vertices();
    assert!(n >= 1);
    harmonic_centrality(g, direction).iter().sum::<f64>() / n as f64
}

/// Degree centralization with the printed (n-2)(n-1) denominator; for
/// directed stars the value exceeds one, which is kept as printed.
pub fn degree_centralization(g: &SpilloverNetwork, direction: Direction) -> f64 {
    let n = g.n_vertices();
    assert!(n >= 3);
    let (out, in_) = degrees(g);
    let deg = match direction {
        Direction::Out => out,
        Direction::In => in_,
    };
    let max = *deg.iter().max().unwrap() as f64;
    let sum: f64 = deg.iter().map(|&d| max - d as f64).sum();
    sum / ((n - 2) * (n - 1)) as f64
}

/// Pearson correlation between per-vertex out- and in-degrees; undefined
/// when either degree sequence has no variance.
pub fn degree_correlation(g: &SpilloverNetwork) -> Option<f64> {
    let (out, in_) = degrees(g);
    let out_f: Vec<f64> = out.iter().map(|&v| v as f64).collect();
    let in_f: Vec<f64> = in_.iter().map(|&v| v as f64).collect();
    pearson(&out_f, &in_f)
}

/// Multi-step survival ratio: the fraction of the edges of window t-s that
/// survive in every window up to t.
pub fn survival_ratio(networks: &[SpilloverNetwork], t: usize, s: usize) -> Result<f64> {
    if s > t || t >= networks.len() {
        return Err(Error::Validation(format!(
            "survival ratio needs 0 <= t-s and t < number of networks (t={t}, s={s})"
        )));
    }
    let base = &networks[t - s];
    if base.n_edges() == 0 {
        return Err(Error::StatisticUndefined(format!(
            "survival ratio undefined: window {} has no edges",
            base.window_end
        )));
    }
    let mut surviving = base.edge_ids();
    for net in &networks[t - s + 1..=t] {
        let ids = net.edge_ids();
        surviving.retain(|e| ids.contains(e));
    }
    Ok(surviving.len() as f64 / base.n_edges() as f64)
}

/// All per-window metrics in one pass.
pub fn centrality_report(g: &SpilloverNetwork, harmonic_direction: Direction) -> CentralityReport {
    let (out_degree, in_degree) = degrees(g);
    let harmonic = harmonic_centrality(g, harmonic_direction);
    let n = g.n_vertices();
    CentralityReport {
        window_end: g.window_end,
        vertices: g.vertices.clone(),
        mean_degree_centrality: mean_degree_centrality(g),
        mean_harmonic_centrality: harmonic.iter().sum::<f64>() / n as f64,
        out_centralization: degree_centralization(g, Direction::Out),
        in_centralization: degree_centralization(g, Direction::In),
        density: mean_degree_centrality(g),
        degree_correlation: degree_correlation(g),
        out_degree,
        in_degree,
        harmonic,
    }
}
