//! Binary expansions of dilation coefficients and the digit graph joining
//! each coefficient to the powers of two in its expansion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::BipartiteGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigitError {
    #[error("coefficient is zero")]
    Zero,
    #[error("coefficient #{position} is zero")]
    ZeroCoefficient { position: usize },
    #[error("empty coefficient list")]
    NoCoefficients,
    #[error("digit graph JSON is inconsistent: {0}")]
    Inconsistent(String),
}

/// `lambda = sign * sum_{j in digits} 2^j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitExpansion {
    pub lambda: i64,
    pub sign: i8,
    pub digits: Vec<u32>,
}

impl DigitExpansion {
    pub fn magnitude(&self) -> u64 {
        self.lambda.unsigned_abs()
    }

    /// `sign * sum 2^j`, recomputed from the digits.
    pub fn reconstruct(&self) -> i128 {
        let m: i128 = self.digits.iter().map(|&j| 1i128 << j).sum();
        self.sign as i128 * m
    }
}

pub fn binary_expansion(lambda: i64) -> Result<DigitExpansion, DigitError> {
    if lambda == 0 {
        return Err(DigitError::Zero);
    }
    let mag = lambda.unsigned_abs();
    let digits = (0..64).filter(|&j| mag >> j & 1 == 1).collect();
    Ok(DigitExpansion { lambda, sign: if lambda > 0 { 1 } else { -1 }, digits })
}

fn check_nonzero(lambdas: &[i64]) -> Result<(), DigitError> {
    if lambdas.is_empty() {
        return Err(DigitError::NoCoefficients);
    }
    if let Some(pos) = lambdas.iter().position(|&l| l == 0) {
        return Err(DigitError::ZeroCoefficient { position: pos + 1 });
    }
    Ok(())
}

/// `max_i floor(log2 |lambda_i|)`.
pub fn max_exponent(lambdas: &[i64]) -> Result<u32, DigitError> {
    check_nonzero(lambdas)?;
    Ok(lambdas.iter().map(|l| 63 - l.unsigned_abs().leading_zeros()).max().unwrap())
}

/// Digit graph of a coefficient tuple. Left vertex `i` is the `i`-th
/// coefficient (0-based internally); right vertex `j` stands for `2^j`,
/// `0 <= j <= r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitGraph {
    expansions: Vec<DigitExpansion>,
    r: u32,
    graph: BipartiteGraph,
}

pub fn build_digit_graph(lambdas: &[i64]) -> Result<DigitGraph, DigitError> {
    let r = max_exponent(lambdas)?;
    let expansions = lambdas
        .iter()
        .map(|&l| binary_expansion(l))
        .collect::<Result<Vec<_>, _>>()?;
    let mut graph = BipartiteGraph::new(lambdas.len(), r as usize + 1);
    for (i, e) in expansions.iter().enumerate() {
        for &j in &e.digits {
            graph.add_edge(i, j as usize);
        }
    }
    Ok(DigitGraph { expansions, r, graph })
}

impl DigitGraph {
    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn expansions(&self) -> &[DigitExpansion] {
        &self.expansions
    }

    pub fn lambdas(&self) -> Vec<i64> {
        self.expansions.iter().map(|e| e.lambda).collect()
    }

    /// Number of coefficients.
    pub fn h(&self) -> usize {
        self.expansions.len()
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `sum_{v in right} 2^v`.
    pub fn gamma(right: &[usize]) -> u64 {
        right.iter().map(|&v| 1u64 << v).sum()
    }
}

/// JSON form: `{"lambdas": [...], "r": r, "edges": [[i, j], ...]}` with `i`
/// 1-based and `j` 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitGraphFile {
    pub lambdas: Vec<i64>,
    pub r: u32,
    pub edges: Vec<(usize, usize)>,
}

impl From<&DigitGraph> for DigitGraphFile {
    fn from(g: &DigitGraph) -> Self {
        DigitGraphFile {
            lambdas: g.lambdas(),
            r: g.r,
            edges: g.graph.edges().map(|(i, j)| (i + 1, j)).collect(),
        }
    }
}

impl TryFrom<DigitGraphFile> for DigitGraph {
    type Error = DigitError;

    /// Rebuilds the graph from the coefficients and checks the stored `r` and
    /// edges against it.
    fn try_from(f: DigitGraphFile) -> Result<Self, Self::Error> {
        let g = build_digit_graph(&f.lambdas)?;
        if g.r != f.r {
            return Err(DigitError::Inconsistent(format!("r = {} but coefficients give {}", f.r, g.r)));
        }
        let mut edges = f.edges.clone();
        edges.sort_unstable();
        if edges != DigitGraphFile::from(&g).edges {
            return Err(DigitError::Inconsistent("edges do not match binary expansions".into()));
        }
        Ok(g)
    }
}
