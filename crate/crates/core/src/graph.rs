//! Bipartite graphs stored as adjacency bit rows on both sides.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) is outside a {2} x {3} bipartite graph")]
    EdgeOutOfRange(usize, usize, usize, usize),
    #[error("left indices in graph files are 1-based; found 0")]
    ZeroLeftIndex,
}

/// Bipartite graph with `left` vertices `0..left` and `right` vertices
/// `0..right`. Rows and columns are kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    rows: Vec<FixedBitSet>,
    cols: Vec<FixedBitSet>,
}

impl BipartiteGraph {
    pub fn new(left: usize, right: usize) -> Self {
        BipartiteGraph {
            rows: vec![FixedBitSet::with_capacity(right); left],
            cols: vec![FixedBitSet::with_capacity(left); right],
        }
    }

    pub fn from_edges(
        left: usize,
        right: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = BipartiteGraph::new(left, right);
        for (u, v) in edges {
            if u >= left || v >= right {
                return Err(GraphError::EdgeOutOfRange(u, v, left, right));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// `K_{m,n}`.
    pub fn complete(left: usize, right: usize) -> Self {
        let mut g = BipartiteGraph::new(left, right);
        for u in 0..left {
            g.rows[u].insert_range(..);
        }
        for v in 0..right {
            g.cols[v].insert_range(..);
        }
        g
    }

    /// Each of the `left * right` possible edges present independently with
    /// probability `num / den`, drawn row by row.
    pub fn random(left: usize, right: usize, num: u64, den: u64, rng: &mut SplitMix64) -> Self {
        let mut g = BipartiteGraph::new(left, right);
        for u in 0..left {
            for v in 0..right {
                if rng.chance(num, den) {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.rows[u].insert(v);
        self.cols[v].insert(u);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.rows[u].set(v, false);
        self.cols[v].set(u, false);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.rows.len() && self.rows[u].contains(v)
    }

    pub fn left_len(&self) -> usize {
        self.rows.len()
    }

    pub fn right_len(&self) -> usize {
        self.cols.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_edgeless(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    /// Right neighbours of left vertex `u`.
    pub fn row(&self, u: usize) -> &FixedBitSet {
        &self.rows[u]
    }

    /// Left neighbours of right vertex `v`.
    pub fn col(&self, v: usize) -> &FixedBitSet {
        &self.cols[v]
    }

    pub fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }

    pub fn cols(&self) -> &[FixedBitSet] {
        &self.cols
    }

    pub fn left_degree(&self, u: usize) -> usize {
        self.rows[u].count_ones(..)
    }

    pub fn right_degree(&self, v: usize) -> usize {
        self.cols[v].count_ones(..)
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, r)| r.ones().map(move |v| (u, v)))
    }

    /// Swaps the two sides.
    pub fn transpose(&self) -> Self {
        BipartiteGraph { rows: self.cols.clone(), cols: self.rows.clone() }
    }

    pub fn nonisolated_left(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_clear()).count()
    }

    pub fn nonisolated_right(&self) -> usize {
        self.cols.iter().filter(|c| !c.is_clear()).count()
    }
}

/// JSON form of a plain bipartite graph: left indices 1-based, right 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<(usize, usize)>,
}

impl From<&BipartiteGraph> for GraphFile {
    fn from(g: &BipartiteGraph) -> Self {
        GraphFile {
            left: g.left_len(),
            right: g.right_len(),
            edges: g.edges().map(|(u, v)| (u + 1, v)).collect(),
        }
    }
}

impl TryFrom<GraphFile> for BipartiteGraph {
    type Error = GraphError;

    fn try_from(f: GraphFile) -> Result<Self, Self::Error> {
        let mut edges = Vec::with_capacity(f.edges.len());
        for (i, j) in f.edges {
            if i == 0 {
                return Err(GraphError::ZeroLeftIndex);
            }
            edges.push((i - 1, j));
        }
        BipartiteGraph::from_edges(f.left, f.right, edges)
    }
}
