//! Directed spillover graphs and their metrics: degrees, harmonic
//! centrality, centralizations, survival ratios, degree correlations, and
//! HAC trend tests on per-market centrality series.

mod metrics;
mod trend;

pub use metrics::{
    centrality_report, degree_centralization, degree_correlation, degrees, harmonic_centrality,
    mean_degree_centrality, mean_harmonic_centrality, survival_ratio, CentralityReport, Direction,
};
pub use trend::{hac_trend_test, TrendTest};

use crate::windows::Month;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Directed graph of significant causalities for one rolling window.
/// Vertices are market ids in sorted order; edges are ordered index pairs
/// (out, in) with loops excluded by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpilloverNetwork {
    pub window_end: Month,
    pub vertices: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

impl SpilloverNetwork {
    pub fn new(window_end: Month, mut vertices: Vec<String>) -> Self {
        vertices.sort();
        SpilloverNetwork {
            window_end,
            vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub fn add_edge(&mut self, out: usize, in_: usize) {
        assert!(out != in_, "loops are not representable");
        assert!(out < self.vertices.len() && in_ < self.vertices.len());
        self.edges.insert((out, in_));
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, out: usize, in_: usize) -> bool {
        self.edges.contains(&(out, in_))
    }

    /// Out-neighbor adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(o, i) in &self.edges {
            adj[o].push(i);
        }
        adj
    }

    /// Edge set keyed by market ids (stable across vertex reindexing).
    pub fn edge_ids(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|&(o, i)| (self.vertices[o].clone(), self.vertices[i].clone()))
            .collect()
    }
}
