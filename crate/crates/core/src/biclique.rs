//! Edge-disjoint biclique partitions of bipartite graphs.
//!
//! The objective throughout is the total vertex weight
//! `sum_i (|X_i| + |Y_i|)`, counted with multiplicity across bicliques. The
//! number of bicliques is not minimized.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::DigitGraph;
use crate::graph::BipartiteGraph;
use crate::rng::{fmix, trial_seed};

/// Hard ceiling for the exact solver; residual edge sets are `u64` masks.
pub const EXACT_HARD_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("graph has no edges")]
    Edgeless,
    #[error("greedy time budget of {budget:?} exhausted after {elapsed:?}")]
    TimeBudget { budget: Duration, elapsed: Duration },
    #[error("graph has {edges} edges, above the exact-solver limit of {max_edges}")]
    TooManyEdges { edges: usize, max_edges: usize },
    #[error("invalid decomposition: {0}")]
    Invalid(String),
    #[error("unknown algorithm {0:?} (expected star-rows, star-cols, greedy or exact)")]
    UnknownAlgo(String),
}

/// Complete bipartite subgraph `left x right`; both parts sorted, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Biclique {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Biclique {
    pub fn new(mut left: Vec<usize>, mut right: Vec<usize>) -> Self {
        left.sort_unstable();
        left.dedup();
        right.sort_unstable();
        right.dedup();
        Biclique { left, right }
    }

    pub fn weight(&self) -> u64 {
        (self.left.len() + self.right.len()) as u64
    }

    pub fn edge_count(&self) -> usize {
        self.left.len() * self.right.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left
            .iter()
            .flat_map(move |&u| self.right.iter().map(move |&v| (u, v)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Decomposition {
    pub bicliques: Vec<Biclique>,
    pub weight: u64,
    /// `gamma_j = sum_{v in Y_j} 2^v` per biclique; empty unless the host is a
    /// digit graph.
    pub gammas: Vec<u64>,
}

impl Decomposition {
    pub fn new(bicliques: Vec<Biclique>) -> Self {
        let weight = bicliques.iter().map(Biclique::weight).sum();
        Decomposition { bicliques, weight, gammas: Vec::new() }
    }

    /// Attaches the grouped coefficients `gamma_j` of a digit-graph host.
    pub fn with_gammas(mut self) -> Self {
        self.gammas = self.bicliques.iter().map(|b| DigitGraph::gamma(&b.right)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.bicliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bicliques.is_empty()
    }

    /// `sum_i |X_i|`.
    pub fn left_weight(&self) -> u64 {
        self.bicliques.iter().map(|b| b.left.len() as u64).sum()
    }

    /// `sum_i |Y_i|`.
    pub fn right_weight(&self) -> u64 {
        self.bicliques.iter().map(|b| b.right.len() as u64).sum()
    }

    /// `(k_j, l_j)`: positive and negative coefficients among the left part
    /// of each biclique.
    pub fn sign_split(&self, host: &DigitGraph) -> Vec<(usize, usize)> {
        let exps = host.expansions();
        self.bicliques
            .iter()
            .map(|b| {
                let pos = b.left.iter().filter(|&&i| exps[i].sign > 0).count();
                (pos, b.left.len() - pos)
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct BicliqueRepr {
    left: Vec<usize>,
    right: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct DecompositionRepr {
    bicliques: Vec<BicliqueRepr>,
    weight: u64,
    #[serde(default)]
    gammas: Vec<u64>,
}

/// JSON: `{"bicliques": [{"left": [i], "right": [j]}], "weight": w,
/// "gammas": [g]}` with left indices 1-based and right indices 0-based.
impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DecompositionRepr {
            bicliques: self
                .bicliques
                .iter()
                .map(|b| BicliqueRepr {
                    left: b.left.iter().map(|u| u + 1).collect(),
                    right: b.right.clone(),
                })
                .collect(),
            weight: self.weight,
            gammas: self.gammas.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = DecompositionRepr::deserialize(d)?;
        let mut bicliques = Vec::with_capacity(repr.bicliques.len());
        for b in repr.bicliques {
            if b.left.contains(&0) {
                return Err(serde::de::Error::custom("left indices are 1-based"));
            }
            bicliques.push(Biclique {
                left: b.left.into_iter().map(|u| u - 1).collect(),
                right: b.right,
            });
        }
        Ok(Decomposition { bicliques, weight: repr.weight, gammas: repr.gammas })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Rows,
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    StarRows,
    StarCols,
    Greedy,
    Exact,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::StarRows, Algo::StarCols, Algo::Greedy, Algo::Exact];

    pub fn name(self) -> &'static str {
        match self {
            Algo::StarRows => "star-rows",
            Algo::StarCols => "star-cols",
            Algo::Greedy => "greedy",
            Algo::Exact => "exact",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = DecompError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| DecompError::UnknownAlgo(s.to_string()))
    }
}

/// One star per nonisolated vertex on the chosen side.
pub fn star_decomposition(
    g: &BipartiteGraph,
    orientation: Orientation,
) -> Result<Decomposition, DecompError> {
    if g.is_edgeless() {
        return Err(DecompError::Edgeless);
    }
    let bicliques = match orientation {
        Orientation::Rows => (0..g.left_len())
            .filter(|&u| g.left_degree(u) > 0)
            .map(|u| Biclique { left: vec![u], right: g.row(u).ones().collect() })
            .collect(),
        Orientation::Columns => (0..g.right_len())
            .filter(|&v| g.right_degree(v) > 0)
            .map(|v| Biclique { left: g.col(v).ones().collect(), right: vec![v] })
            .collect(),
    };
    Ok(Decomposition::new(bicliques))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyParams {
    /// Largest seed subset grown by the beam search.
    pub max_q: usize,
    pub beam_width: usize,
    pub time_budget: Option<Duration>,
    /// Extra passes with seeded tie-breaking; the lightest result wins.
    pub restarts: u32,
    pub seed: u64,
}

impl Default for GreedyParams {
    fn default() -> Self {
        GreedyParams { max_q: 4, beam_width: 32, time_budget: None, restarts: 0, seed: 0 }
    }
}

/// Candidate biclique found on one side of the residual graph: `seeds` on the
/// searched side, `common` their common neighbourhood on the other.
#[derive(Clone)]
struct Candidate {
    seeds: FixedBitSet,
    common: FixedBitSet,
    transposed: bool,
    s: u64,
    c: u64,
}

impl Candidate {
    fn new(seeds: FixedBitSet, common: FixedBitSet, transposed: bool) -> Self {
        let s = seeds.count_ones(..) as u64;
        let c = common.count_ones(..) as u64;
        Candidate { seeds, common, transposed, s, c }
    }

    /// Compares `s c / (s + c)` exactly.
    fn cmp_score(&self, other: &Self) -> Ordering {
        let lhs = (self.s * self.c) as u128 * (other.s + other.c) as u128;
        let rhs = (other.s * other.c) as u128 * (self.s + self.c) as u128;
        lhs.cmp(&rhs)
    }

    fn to_biclique(&self) -> Biclique {
        let (left, right) = if self.transposed {
            (&self.common, &self.seeds)
        } else {
            (&self.seeds, &self.common)
        };
        Biclique { left: left.ones().collect(), right: right.ones().collect() }
    }
}

/// Tie-break between equal scores: lexicographic on the canonical biclique,
/// or a seeded hash of it on restart passes.
fn prefer(a: &Candidate, b: &Candidate, salt: Option<u64>) -> bool {
    match a.cmp_score(b) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => {
            let (ba, bb) = (a.to_biclique(), b.to_biclique());
            match salt {
                None => ba < bb,
                Some(salt) => {
                    let key = |x: &Biclique| {
                        x.left
                            .iter()
                            .chain([usize::MAX].iter())
                            .chain(x.right.iter())
                            .fold(salt, |h, &v| fmix(h ^ v as u64))
                    };
                    (key(&ba), &ba) < (key(&bb), &bb)
                }
            }
        }
    }
}

/// `{w : common is a subset of rows[w]}`, the widest seed set for `common`.
fn closure(common: &FixedBitSet, rows: &[FixedBitSet], cols: &[FixedBitSet]) -> FixedBitSet {
    let mut wide = FixedBitSet::with_capacity(rows.len());
    if let Some(c0) = common.ones().next() {
        for w in cols[c0].ones() {
            if common.is_subset(&rows[w]) {
                wide.insert(w);
            }
        }
    }
    wide
}

struct BeamState {
    last: usize,
    common: FixedBitSet,
    wide: FixedBitSet,
}

impl BeamState {
    fn candidate(&self, transposed: bool) -> Candidate {
        Candidate::new(self.wide.clone(), self.common.clone(), transposed)
    }
}

/// Beam search over seed subsets of size at most `max_q` on the side whose
/// adjacency rows are `rows`. Each seed set is widened to every vertex adjacent
/// to all of its common neighbourhood, so candidates are maximal bicliques.
fn best_on_side(
    rows: &[FixedBitSet],
    cols: &[FixedBitSet],
    stars: &[FixedBitSet],
    params: &GreedyParams,
    transposed: bool,
    salt: Option<u64>,
    best: &mut Option<Candidate>,
) {
    let width = params.beam_width.max(1);
    let mut consider = |state: &BeamState| {
        let s = state.wide.count_ones(..) as u64;
        let c = state.common.count_ones(..) as u64;
        let beats = match best.as_ref() {
            None => true,
            Some(b) => {
                let (e, w) = ((s * c) as u128, (s + c) as u128);
                let (be, bw) = ((b.s * b.c) as u128, (b.s + b.c) as u128);
                e * bw > be * w || (e * bw == be * w && prefer(&state.candidate(transposed), b, salt))
            }
        };
        if beats {
            *best = Some(state.candidate(transposed));
        }
    };

    // Widened stars, one per distinct nonempty row, ranked by score with
    // vertex order breaking ties.
    let degree: Vec<u64> = rows.iter().map(|r| r.count_ones(..) as u64).collect();
    let mut ranked: Vec<(u64, u64, usize)> = Vec::new();
    for u in 0..rows.len() {
        if degree[u] == 0 {
            continue;
        }
        // rows[u] is a subset of rows[w] for every w in stars[u]; equal
        // degrees mean equal rows, which give the same widened star.
        if stars[u].ones().take_while(|&w| w < u).any(|w| degree[w] == degree[u]) {
            continue;
        }
        ranked.push((stars[u].count_ones(..) as u64, degree[u], u));
    }
    let star_order = |a: &(u64, u64, usize), b: &(u64, u64, usize)| {
        let lhs = (a.0 * a.1) as u128 * (b.0 + b.1) as u128;
        let rhs = (b.0 * b.1) as u128 * (a.0 + a.1) as u128;
        rhs.cmp(&lhs).then(a.2.cmp(&b.2))
    };
    if ranked.len() > width {
        ranked.select_nth_unstable_by(width, star_order);
        ranked.truncate(width);
    }
    ranked.sort_unstable_by(star_order);
    let mut beam: Vec<BeamState> = ranked
        .iter()
        .map(|&(_, _, u)| BeamState { last: u, common: rows[u].clone(), wide: stars[u].clone() })
        .collect();
    // The top-ranked star dominates every other star on score; lexicographic
    // ties among equal scores are settled by `consider`.
    for st in &beam {
        consider(st);
    }

    for _level in 2..=params.max_q {
        // All seed sets at one level have the same size, so the raw score
        // ranks extensions by the size of the shared neighbourhood alone.
        let mut ext: Vec<(usize, usize, usize)> = Vec::new();
        for (k, st) in beam.iter().enumerate() {
            for (v, row) in rows.iter().enumerate().skip(st.last + 1) {
                if st.wide.contains(v) {
                    continue;
                }
                let shared = st.common.intersection_count(row);
                if shared > 0 {
                    ext.push((shared, k, v));
                }
            }
        }
        if ext.is_empty() {
            break;
        }
        let order = |a: &(usize, usize, usize), b: &(usize, usize, usize)| {
            b.0.cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2)))
        };
        // Duplicates of a shared neighbourhood are skipped below, so look past
        // the first `width` entries; the full sort is the rare fallback.
        let head = 4 * width;
        if ext.len() > head {
            ext.select_nth_unstable_by(head, order);
            ext[..head].sort_unstable_by(order);
        } else {
            ext.sort_unstable_by(order);
        }
        let mut next: Vec<BeamState> = Vec::with_capacity(width);
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        for pos in 0..ext.len() {
            if next.len() == width {
                break;
            }
            if pos == head {
                ext[head..].sort_unstable_by(order);
            }
            let (_, k, v) = ext[pos];
            let mut common = beam[k].common.clone();
            common.intersect_with(&rows[v]);
            if !seen.insert(common.clone()) {
                continue;
            }
            let wide = closure(&common, rows, cols);
            let state = BeamState { last: v, common, wide };
            consider(&state);
            next.push(state);
        }
        beam = next;
    }
}

/// Updates the widened stars `stars[u] = closure(rows[u])` after the rows in
/// `touched` lost edges. Other rows are unchanged, so their closures can only
/// lose members of `touched`.
fn refresh_stars(
    stars: &mut [FixedBitSet],
    rows: &[FixedBitSet],
    cols: &[FixedBitSet],
    touched: &[usize],
) {
    for (u, wide) in stars.iter_mut().enumerate() {
        if touched.binary_search(&u).is_ok() {
            *wide = closure(&rows[u], rows, cols);
        } else {
            for &w in touched {
                if wide.contains(w) && !rows[u].is_subset(&rows[w]) {
                    wide.set(w, false);
                }
            }
        }
    }
}

fn greedy_pass(
    g: &BipartiteGraph,
    params: &GreedyParams,
    salt: Option<u64>,
    start: Instant,
) -> Result<Decomposition, DecompError> {
    let mut residual = g.clone();
    let mut bicliques = Vec::new();
    let mut left_stars: Vec<FixedBitSet> =
        g.rows().iter().map(|row| closure(row, g.rows(), g.cols())).collect();
    let mut right_stars: Vec<FixedBitSet> =
        g.cols().iter().map(|col| closure(col, g.cols(), g.rows())).collect();
    while !residual.is_edgeless() {
        if let Some(budget) = params.time_budget {
            let elapsed = start.elapsed();
            if elapsed > budget {
                return Err(DecompError::TimeBudget { budget, elapsed });
            }
        }
        let mut best: Option<Candidate> = None;
        let (rows, cols) = (residual.rows(), residual.cols());
        best_on_side(rows, cols, &left_stars, params, false, salt, &mut best);
        best_on_side(cols, rows, &right_stars, params, true, salt, &mut best);
        let chosen = best.expect("residual graph has an edge").to_biclique();
        for (u, v) in chosen.edges() {
            residual.remove_edge(u, v);
        }
        refresh_stars(&mut left_stars, residual.rows(), residual.cols(), &chosen.left);
        refresh_stars(&mut right_stars, residual.cols(), residual.rows(), &chosen.right);
        bicliques.push(chosen);
    }
    Ok(Decomposition::new(bicliques))
}

/// Repeatedly extracts the densest biclique (edges per unit weight) found by
/// beam search from either side of the residual graph, then keeps the
/// lightest of the result and the two star baselines.
pub fn greedy_decomposition(
    g: &BipartiteGraph,
    params: &GreedyParams,
) -> Result<Decomposition, DecompError> {
    if g.is_edgeless() {
        return Err(DecompError::Edgeless);
    }
    let start = Instant::now();
    let mut best = greedy_pass(g, params, None, start)?;
    for k in 0..params.restarts {
        let salt = trial_seed(params.seed, k as u64);
        let d = greedy_pass(g, params, Some(salt), start)?;
        if d.weight < best.weight {
            best = d;
        }
    }
    for orientation in [Orientation::Rows, Orientation::Columns] {
        let stars = star_decomposition(g, orientation)?;
        if stars.weight < best.weight {
            best = stars;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_edges: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        ExactLimits { max_edges: 12 }
    }
}

struct ExactSearch {
    /// Edges in lexicographic order; bit `k` of a mask is `edges[k]`.
    edges: Vec<(usize, usize)>,
    /// `edge_id[u][v]` over compacted vertex indices.
    edge_id: Vec<Vec<Option<u32>>>,
    left_of: Vec<usize>,
    right_of: Vec<usize>,
    best_weight: u64,
    best: Vec<(u64, u64)>,
    stack: Vec<(u64, u64)>,
}

impl ExactSearch {
    fn lower_bound(&self, residual: u64) -> u64 {
        if residual == 0 {
            return 0;
        }
        let mut ldeg = vec![0u64; self.left_of.len()];
        let mut rdeg = vec![0u64; self.right_of.len()];
        let mut bits = residual;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let (u, v) = self.edges[k];
            ldeg[u] += 1;
            rdeg[v] += 1;
        }
        // Each vertex with a residual edge appears in some biclique.
        let touched = ldeg.iter().chain(&rdeg).filter(|&&d| d > 0).count() as u64;
        // A biclique with s <= max right degree left vertices and c <= max
        // left degree right vertices covers at most s c edges for s + c weight.
        let dl = *ldeg.iter().max().unwrap();
        let dr = *rdeg.iter().max().unwrap();
        let e = residual.count_ones() as u64;
        let density = (e * (dl + dr)).div_ceil(dl * dr);
        touched.max(density)
    }

    fn search(&mut self, residual: u64, weight: u64) {
        if residual == 0 {
            if weight < self.best_weight {
                self.best_weight = weight;
                self.best = self.stack.clone();
            }
            return;
        }
        if weight + self.lower_bound(residual) >= self.best_weight {
            return;
        }
        let k = residual.trailing_zeros() as usize;
        let (u, v) = self.edges[k];
        let has = |a: usize, b: usize| {
            self.edge_id[a][b].is_some_and(|id| residual >> id & 1 == 1)
        };
        let others: Vec<usize> =
            (0..self.right_of.len()).filter(|&b| b != v && has(u, b)).collect();

        let mut options: Vec<(u64, u64)> = Vec::new();
        for tmask in 0u64..(1 << others.len()) {
            let mut ys = vec![v];
            ys.extend((0..others.len()).filter(|&t| tmask >> t & 1 == 1).map(|t| others[t]));
            let partners: Vec<usize> = (0..self.left_of.len())
                .filter(|&a| a != u && ys.iter().all(|&b| has(a, b)))
                .collect();
            for xmask in 0u64..(1 << partners.len()) {
                let mut xs = vec![u];
                xs.extend(
                    (0..partners.len()).filter(|&t| xmask >> t & 1 == 1).map(|t| partners[t]),
                );
                let mut mask = 0u64;
                for &a in &xs {
                    for &b in &ys {
                        mask |= 1 << self.edge_id[a][b].unwrap();
                    }
                }
                options.push((mask, (xs.len() + ys.len()) as u64));
            }
        }
        // Larger bicliques first to tighten the incumbent early.
        options.sort_by(|a, b| b.0.count_ones().cmp(&a.0.count_ones()).then(a.1.cmp(&b.1)));
        for (mask, w) in options {
            self.stack.push((mask, w));
            self.search(residual & !mask, weight + w);
            self.stack.pop();
        }
    }
}

/// Minimum-weight biclique partition by exhaustive branch and bound: branch on
/// the first uncovered edge over every biclique of the residual graph that
/// contains it.
pub fn exact_min_weight_decomposition(
    g: &BipartiteGraph,
    limits: &ExactLimits,
) -> Result<Decomposition, DecompError> {
    if g.is_edgeless() {
        return Err(DecompError::Edgeless);
    }
    let edges_total = g.edge_count();
    let max_edges = limits.max_edges.min(EXACT_HARD_LIMIT);
    if edges_total > max_edges {
        return Err(DecompError::TooManyEdges { edges: edges_total, max_edges });
    }

    let left_of: Vec<usize> = (0..g.left_len()).filter(|&u| g.left_degree(u) > 0).collect();
    let right_of: Vec<usize> = (0..g.right_len()).filter(|&v| g.right_degree(v) > 0).collect();
    let mut left_idx = vec![usize::MAX; g.left_len()];
    for (k, &u) in left_of.iter().enumerate() {
        left_idx[u] = k;
    }
    let mut right_idx = vec![usize::MAX; g.right_len()];
    for (k, &v) in right_of.iter().enumerate() {
        right_idx[v] = k;
    }
    let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (left_idx[u], right_idx[v])).collect();
    let mut edge_id = vec![vec![None; right_of.len()]; left_of.len()];
    for (k, &(a, b)) in edges.iter().enumerate() {
        edge_id[a][b] = Some(k as u32);
    }

    let incumbent = [Orientation::Rows, Orientation::Columns]
        .into_iter()
        .map(|o| star_decomposition(g, o))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min_by_key(|d| d.weight)
        .unwrap();

    let mut search = ExactSearch {
        edges,
        edge_id,
        left_of,
        right_of,
        best_weight: incumbent.weight + 1,
        best: Vec::new(),
        stack: Vec::new(),
    };
    let full = if edges_total == 64 { u64::MAX } else { (1u64 << edges_total) - 1 };
    search.search(full, 0);

    if search.best.is_empty() {
        return Ok(incumbent);
    }
    let bicliques = search
        .best
        .iter()
        .map(|&(mask, _)| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut bits = mask;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let (a, b) = search.edges[k];
                left.push(search.left_of[a]);
                right.push(search.right_of[b]);
            }
            Biclique::new(left, right)
        })
        .collect();
    Ok(Decomposition::new(bicliques))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverParams {
    pub greedy: GreedyParams,
    pub exact: ExactLimits,
}

/// Runs one solver on a plain bipartite graph.
pub fn decompose(
    g: &BipartiteGraph,
    algo: Algo,
    params: &SolverParams,
) -> Result<Decomposition, DecompError> {
    match algo {
        Algo::StarRows => star_decomposition(g, Orientation::Rows),
        Algo::StarCols => star_decomposition(g, Orientation::Columns),
        Algo::Greedy => greedy_decomposition(g, &params.greedy),
        Algo::Exact => exact_min_weight_decomposition(g, &params.exact),
    }
}

/// Runs one solver on a digit graph and attaches the `gamma_j` values.
pub fn decompose_digits(
    g: &DigitGraph,
    algo: Algo,
    params: &SolverParams,
) -> Result<Decomposition, DecompError> {
    decompose(g.graph(), algo, params).map(Decomposition::with_gammas)
}

/// Host of a decomposition under validation.
#[derive(Debug, Clone, Copy)]
pub enum Host<'a> {
    Plain(&'a BipartiteGraph),
    Digits(&'a DigitGraph),
}

impl<'a> From<&'a BipartiteGraph> for Host<'a> {
    fn from(g: &'a BipartiteGraph) -> Self {
        Host::Plain(g)
    }
}

impl<'a> From<&'a DigitGraph> for Host<'a> {
    fn from(g: &'a DigitGraph) -> Self {
        Host::Digits(g)
    }
}

impl Host<'_> {
    pub fn graph(&self) -> &BipartiteGraph {
        match self {
            Host::Plain(g) => g,
            Host::Digits(d) => d.graph(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Every host edge covered exactly once and nothing else covered.
    pub is_partition: bool,
    /// Every part is nonempty, in range, sorted, and spans only host edges.
    pub parts_are_bicliques: bool,
    /// Weight recomputed from the parts.
    pub weight: u64,
    pub weight_matches: bool,
    pub uncovered_edges: usize,
    pub repeated_edges: usize,
    pub foreign_pairs: usize,
    /// Digit hosts only: `sum_{j : i in X_j} gamma_j = |lambda_i|` for all i.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<bool>,
    /// Digit hosts only: stored gammas, if any, equal the recomputed ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gammas_match: Option<bool>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.is_partition
            && self.parts_are_bicliques
            && self.weight_matches
            && self.reconstruction != Some(false)
            && self.gammas_match != Some(false)
    }
}

pub fn validate_decomposition<'a>(host: impl Into<Host<'a>>, d: &Decomposition) -> ValidationReport {
    let host = host.into();
    let g = host.graph();
    let (m, n) = (g.left_len(), g.right_len());
    let mut cover = vec![0u32; m * n];
    let mut parts_ok = true;
    let mut foreign = 0usize;
    let mut weight = 0u64;
    for b in &d.bicliques {
        weight += b.weight();
        let sorted = |xs: &[usize]| xs.windows(2).all(|w| w[0] < w[1]);
        if b.left.is_empty() || b.right.is_empty() || !sorted(&b.left) || !sorted(&b.right) {
            parts_ok = false;
        }
        for &u in &b.left {
            for &v in &b.right {
                if u >= m || v >= n || !g.has_edge(u, v) {
                    parts_ok = false;
                    foreign += 1;
                } else {
                    cover[u * n + v] += 1;
                }
            }
        }
    }
    let mut uncovered = 0usize;
    let mut repeated = 0usize;
    for (u, v) in g.edges() {
        match cover[u * n + v] {
            0 => uncovered += 1,
            1 => {}
            _ => repeated += 1,
        }
    }

    let (reconstruction, gammas_match) = match host {
        Host::Plain(_) => (None, None),
        Host::Digits(dg) => {
            let in_range = d.bicliques.iter().all(|b| b.right.iter().all(|&v| v < 64));
            let gammas: Vec<u128> = d
                .bicliques
                .iter()
                .map(|b| b.right.iter().filter(|&&v| v < 128).map(|&v| 1u128 << v).sum())
                .collect();
            let mut totals = vec![0u128; dg.h()];
            for (b, &gamma) in d.bicliques.iter().zip(&gammas) {
                for &u in b.left.iter().filter(|&&u| u < dg.h()) {
                    totals[u] += gamma;
                }
            }
            let rebuilt = in_range
                && dg
                    .expansions()
                    .iter()
                    .zip(&totals)
                    .all(|(e, &t)| t == e.magnitude() as u128);
            let stored = d.gammas.is_empty()
                || (d.gammas.len() == gammas.len()
                    && d.gammas.iter().zip(&gammas).all(|(&s, &c)| s as u128 == c));
            (Some(rebuilt), Some(stored))
        }
    };

    ValidationReport {
        is_partition: uncovered == 0 && repeated == 0 && foreign == 0,
        parts_are_bicliques: parts_ok,
        weight,
        weight_matches: weight == d.weight,
        uncovered_edges: uncovered,
        repeated_edges: repeated,
        foreign_pairs: foreign,
        reconstruction,
        gammas_match,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuzaBudget {
    pub m: u64,
    pub n: u64,
    /// `3 m n / ln m` with `m >= n`.
    pub budget: f64,
    /// `n >= 10 (ln m)^2`; necessary only, the threshold `n_0` is unknown.
    pub applicable: bool,
}

pub fn tuza_budget(m: u64, n: u64) -> Result<TuzaBudget, DecompError> {
    let (m, n) = if m >= n { (m, n) } else { (n, m) };
    if m < 2 || n < 1 {
        return Err(DecompError::Invalid(format!(
            "budget needs parts of sizes m >= 2 and n >= 1, got {m} and {n}"
        )));
    }
    let ln_m = (m as f64).ln();
    Ok(TuzaBudget {
        m,
        n,
        budget: 3.0 * m as f64 * n as f64 / ln_m,
        applicable: n as f64 >= 10.0 * ln_m * ln_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digits::build_digit_graph;
    use crate::rng::SplitMix64;

    fn c6() -> DigitGraph {
        build_digit_graph(&[3, 5, 6]).unwrap()
    }

    #[test]
    fn star_examples() {
        let g = c6();
        let rows = star_decomposition(g.graph(), Orientation::Rows).unwrap();
        assert_eq!((rows.len(), rows.weight), (3, 9));
        let cols = star_decomposition(g.graph(), Orientation::Columns).unwrap().with_gammas();
        assert_eq!(cols.weight, 9);
        let lefts: Vec<_> = cols.bicliques.iter().map(|b| b.left.clone()).collect();
        assert_eq!(lefts, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(cols.gammas, vec![1, 2, 4]);

        let single = BipartiteGraph::complete(1, 1);
        assert_eq!(star_decomposition(&single, Orientation::Rows).unwrap().weight, 2);
        assert_eq!(
            star_decomposition(&BipartiteGraph::new(2, 2), Orientation::Rows),
            Err(DecompError::Edgeless)
        );
    }

    #[test]
    fn star_weight_is_centers_plus_edges() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let g = BipartiteGraph::random(6, 7, 1, 3, &mut rng);
            if g.is_edgeless() {
                continue;
            }
            let rows = star_decomposition(&g, Orientation::Rows).unwrap();
            assert_eq!(rows.weight as usize, g.nonisolated_left() + g.edge_count());
            let cols = star_decomposition(&g, Orientation::Columns).unwrap();
            assert_eq!(cols.weight as usize, g.nonisolated_right() + g.edge_count());
        }
    }

    #[test]
    fn greedy_examples() {
        let p = GreedyParams::default();
        let d = greedy_decomposition(&BipartiteGraph::complete(3, 3), &p).unwrap();
        assert_eq!((d.len(), d.weight), (1, 6));
        assert_eq!(greedy_decomposition(c6().graph(), &p).unwrap().weight, 9);
        let k44 = build_digit_graph(&[15, 15, 15, 15]).unwrap();
        let d = greedy_decomposition(k44.graph(), &p).unwrap();
        assert_eq!((d.len(), d.weight), (1, 8));
        // Closure lifts a 4-seed search to the full K_{16,16}.
        let k16 = build_digit_graph(&[65535; 16]).unwrap();
        let d = greedy_decomposition(k16.graph(), &p).unwrap();
        assert_eq!((d.len(), d.weight), (1, 32));
    }

    #[test]
    fn greedy_is_deterministic_and_beats_stars() {
        let mut rng = SplitMix64::new(11);
        let g = BipartiteGraph::random(25, 20, 1, 2, &mut rng);
        let p = GreedyParams::default();
        let a = greedy_decomposition(&g, &p).unwrap();
        let b = greedy_decomposition(&g, &p).unwrap();
        assert_eq!(a, b);
        assert!(validate_decomposition(&g, &a).is_valid());
        let rows = star_decomposition(&g, Orientation::Rows).unwrap().weight;
        let cols = star_decomposition(&g, Orientation::Columns).unwrap().weight;
        assert!(a.weight <= rows.min(cols));

        let restarts = GreedyParams { restarts: 3, seed: 9, ..p };
        let c = greedy_decomposition(&g, &restarts).unwrap();
        assert!(c.weight <= a.weight);
        assert_eq!(c, greedy_decomposition(&g, &restarts).unwrap());
    }

    #[test]
    fn greedy_time_budget_errors() {
        let mut rng = SplitMix64::new(3);
        let g = BipartiteGraph::random(60, 60, 1, 2, &mut rng);
        let p = GreedyParams { time_budget: Some(Duration::ZERO), ..Default::default() };
        assert!(matches!(greedy_decomposition(&g, &p), Err(DecompError::TimeBudget { .. })));
    }

    #[test]
    fn exact_examples() {
        let lim = ExactLimits::default();
        assert_eq!(exact_min_weight_decomposition(&BipartiteGraph::complete(2, 2), &lim).unwrap().weight, 4);
        let path = BipartiteGraph::from_edges(1, 2, [(0, 0), (0, 1)]).unwrap();
        assert_eq!(exact_min_weight_decomposition(&path, &lim).unwrap().weight, 3);
        let d = exact_min_weight_decomposition(c6().graph(), &lim).unwrap();
        assert_eq!(d.weight, 9);
        assert!(validate_decomposition(&c6(), &d.with_gammas()).is_valid());
        let big = BipartiteGraph::complete(4, 4);
        assert_eq!(
            exact_min_weight_decomposition(&big, &lim),
            Err(DecompError::TooManyEdges { edges: 16, max_edges: 12 })
        );
        let wide = ExactLimits { max_edges: 16 };
        assert_eq!(exact_min_weight_decomposition(&big, &wide).unwrap().weight, 8);
    }

    #[test]
    fn exact_beats_greedy_where_greedy_is_suboptimal() {
        // Two K_{2,2} blocks sharing a column pair plus a pendant edge.
        let g = BipartiteGraph::from_edges(
            3,
            3,
            [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 1), (2, 2)],
        )
        .unwrap();
        let exact = exact_min_weight_decomposition(&g, &ExactLimits::default()).unwrap();
        let greedy = greedy_decomposition(&g, &GreedyParams::default()).unwrap();
        assert!(validate_decomposition(&g, &exact).is_valid());
        assert!(exact.weight <= greedy.weight);
    }

    #[test]
    fn validation_reports_violations() {
        let g = c6();
        let cols = star_decomposition(g.graph(), Orientation::Columns).unwrap().with_gammas();
        let report = validate_decomposition(&g, &cols);
        assert!(report.is_valid());
        assert_eq!(report.reconstruction, Some(true));

        let mut overlap = cols.clone();
        overlap.bicliques.push(Biclique::new(vec![0], vec![0]));
        overlap.weight += 2;
        overlap.gammas.push(1);
        let report = validate_decomposition(&g, &overlap);
        assert!(!report.is_partition);
        assert_eq!(report.repeated_edges, 1);
        assert_eq!(report.reconstruction, Some(false));

        let mut missing = cols.clone();
        missing.bicliques[0] = Biclique::new(vec![0], vec![0]);
        let report = validate_decomposition(g.graph(), &missing);
        assert!(!report.is_partition);
        assert!(!report.weight_matches);
        assert_eq!(report.uncovered_edges, 1);

        let bogus = Decomposition::new(vec![Biclique::new(vec![0, 1], vec![0, 1])]);
        let report = validate_decomposition(g.graph(), &bogus);
        assert!(!report.parts_are_bicliques);
    }

    #[test]
    fn decomposition_json_shape() {
        let d = star_decomposition(c6().graph(), Orientation::Columns).unwrap().with_gammas();
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(
            text,
            r#"{"bicliques":[{"left":[1,2],"right":[0]},{"left":[1,3],"right":[1]},{"left":[2,3],"right":[2]}],"weight":9,"gammas":[1,2,4]}"#
        );
        let back: Decomposition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn sign_split_counts_left_signs() {
        let g = build_digit_graph(&[3, -5, 6]).unwrap();
        let cols = star_decomposition(g.graph(), Orientation::Columns).unwrap();
        assert_eq!(cols.sign_split(&g), vec![(1, 1), (2, 0), (1, 1)]);
    }

    #[test]
    fn tuza_examples() {
        let t = tuza_budget(400, 400).unwrap();
        assert!((t.budget - 480_000.0 / 400f64.ln()).abs() < 1e-9);
        assert!((t.budget - 80_113.96).abs() < 0.01);
        assert!(t.applicable);
        assert!(!tuza_budget(400, 20).unwrap().applicable);
        assert_eq!(tuza_budget(20, 400).unwrap().m, 400);
        let t = tuza_budget(2, 2).unwrap();
        assert!((t.budget - 17.312).abs() < 1e-3);
        assert!(tuza_budget(1, 1).is_err());
    }

    #[test]
    fn algo_names_round_trip() {
        for a in Algo::ALL {
            assert_eq!(a.name().parse::<Algo>().unwrap(), a);
        }
        assert!("nosuch".parse::<Algo>().is_err());
    }
}
