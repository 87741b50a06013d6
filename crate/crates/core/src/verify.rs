//! Empirical checks of the sumset inequalities behind the dilate bounds.
//!
//! Every inequality has the shape `lhs <= base * K^E / divisor` with integer
//! `lhs`, `base`, `divisor` and a rational doubling constant `K >= 1`. Integer
//! exponents are compared exactly in big-integer arithmetic; fractional ones in
//! log space, with any apparent violation confirmed exactly before it is
//! reported.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biclique::SolverParams;
use crate::exponents::{exponent_report, Exponent, ExponentError};
use crate::rng::{trial_seed, SplitMix64};
use crate::sets::{DoublingMode, GapSpec, IntSet, Rational, SetArith, SetError};

/// Relative tolerance of the log-space comparison.
pub const LOG_TOLERANCE: f64 = 1e-9;

/// Largest integer exponent compared in exact arithmetic.
const EXACT_EXPONENT_LIMIT: u64 = 1 << 16;

/// Trials evaluated per parallel batch; records are emitted batch by batch in
/// trial order.
const BATCH: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("exhaustive run would need {needed} instances (limit {limit})")]
    TooManyInstances { needed: u128, limit: u64 },
    #[error("the doubling bound needs |A| >= 2 (got {0})")]
    Degenerate(usize),
    #[error("random generator could not draw {size} distinct elements from [0, {universe}]")]
    Exhausted { size: usize, universe: u32 },
    #[error("trial log: {0}")]
    Log(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Ruzsa,
    Plunnecke,
    Corollary5,
    Prop6,
    Dilates,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Ruzsa, Suite::Plunnecke, Suite::Corollary5, Suite::Prop6, Suite::Dilates];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ruzsa => "ruzsa",
            Suite::Plunnecke => "plunnecke",
            Suite::Corollary5 => "corollary5",
            Suite::Prop6 => "prop6",
            Suite::Dilates => "dilates",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| VerifyError::Config(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    /// Sets are drawn from `{0, ..., universe}`.
    pub universe: u32,
    pub max_set_size: usize,
    pub max_h: usize,
    pub lambda_max: u32,
    pub trials: u64,
    pub seed: u64,
    pub exhaustive: bool,
    /// Plunnecke: `l, m <= max_fold`. Corollary 5: `p1 + p2 <= max_fold`.
    pub max_fold: u32,
    /// Number of sets `q` in the multi-set suite.
    pub max_sets: usize,
    /// Multi-set suite: `k_i + l_i <= max_pair_fold`.
    pub max_pair_fold: u32,
    /// Refuse exhaustive runs larger than this.
    pub max_instances: u64,
    /// Cardinality cap for every intermediate sumset.
    pub cap: usize,
    /// Edge limit of the exact solver in the dilates suite.
    pub exact_max_edges: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            universe: 40,
            max_set_size: 6,
            max_h: 2,
            lambda_max: 7,
            trials: 10_000,
            seed: 0,
            exhaustive: false,
            max_fold: 3,
            max_sets: 3,
            max_pair_fold: 2,
            max_instances: 100_000_000,
            cap: crate::sets::DEFAULT_CAP,
            exact_max_edges: 12,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |m: String| Err(VerifyError::Config(m));
        if self.universe == 0 || self.universe > 1_000_000 {
            return bad(format!("universe must be in 1..=1000000 (got {})", self.universe));
        }
        if self.max_set_size < 2 || self.max_set_size as u64 > self.universe as u64 + 1 {
            return bad(format!(
                "max_set_size must be in 2..={} (got {})",
                self.universe as u64 + 1,
                self.max_set_size
            ));
        }
        if self.max_set_size > 64 {
            return bad(format!("max_set_size must be at most 64 (got {})", self.max_set_size));
        }
        if !(1..=16).contains(&self.max_h) {
            return bad(format!("max_h must be in 1..=16 (got {})", self.max_h));
        }
        if self.lambda_max == 0 || self.lambda_max > 1 << 30 {
            return bad(format!("lambda_max must be in 1..=2^30 (got {})", self.lambda_max));
        }
        if !self.exhaustive && self.trials == 0 {
            return bad("trials must be at least 1 unless exhaustive".into());
        }
        if self.max_fold == 0 || self.max_fold > 8 {
            return bad(format!("max_fold must be in 1..=8 (got {})", self.max_fold));
        }
        if !(1..=6).contains(&self.max_sets) {
            return bad(format!("max_sets must be in 1..=6 (got {})", self.max_sets));
        }
        if self.max_pair_fold > 6 {
            return bad(format!("max_pair_fold must be at most 6 (got {})", self.max_pair_fold));
        }
        if self.cap == 0 {
            return bad("cap must be positive".into());
        }
        Ok(())
    }

    fn solver_params(&self) -> SolverParams {
        let mut p = SolverParams::default();
        p.exact.max_edges = self.exact_max_edges;
        p
    }
}

/// Inputs of one check. Field names follow the inequality being checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Instance {
    /// `|X + Y| <= |X + Z| |Z + Y| / |Z|`.
    Ruzsa { x: IntSet, y: IntSet, z: IntSet },
    /// `|lA - mA| <= K^{l+m} |A|`.
    Plunnecke { a: IntSet, l: u32, m: u32 },
    /// `|B + p1 A - p2 A| <= K^{p1+p2+1} |B + A|`.
    Corollary5 { b: IntSet, a: IntSet, p1: u32, p2: u32 },
    /// `|C + sum (k_i A_i - l_i A_i)| <= |C + A_1 + ... + A_q| K^{q + sum (k_i + l_i)}`,
    /// with `C = {0}` when absent and `K` the largest doubling constant.
    Prop6 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<IntSet>,
        sets: Vec<IntSet>,
        k: Vec<u32>,
        l: Vec<u32>,
    },
    /// `|lambda_1 . A + ... + lambda_h . A| <= K^E |A|` for each bound `E`.
    Dilates { a: IntSet, lambdas: Vec<i64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub suite: Suite,
    pub trial: u64,
    /// Seed of the trial's generator, `trial_seed(config.seed, trial)`.
    pub seed: u64,
    pub instance: Instance,
    /// Which exponent bound was checked; dilates suite only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    pub exponent: Exponent,
    pub doubling: Rational,
    pub lhs_size: u64,
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

/// `lhs <= base * K^exponent / divisor`.
#[derive(Debug, Clone, Copy)]
struct Inequality {
    lhs: u64,
    base: u64,
    divisor: u64,
    k: Rational,
    exponent: Exponent,
}

struct Judged {
    lhs_log: f64,
    rhs_log: f64,
    slack: f64,
    verdict: Verdict,
}

/// `lhs * divisor * den^e <= base * num^e`.
fn exact_holds(q: &Inequality, e: u64) -> bool {
    let (num, den) = (q.k.numer(), q.k.denom());
    if num == den {
        return q.lhs as u128 * q.divisor as u128 <= q.base as u128;
    }
    let e = u32::try_from(e).expect("exponent within exact limit");
    let left = BigUint::from(q.lhs) * BigUint::from(q.divisor) * BigUint::from(den).pow(e);
    let right = BigUint::from(q.base) * BigUint::from(num).pow(e);
    left <= right
}

fn judge(q: &Inequality) -> Judged {
    let lhs_log = (q.lhs as f64).ln();
    let rhs_log =
        (q.base as f64).ln() - (q.divisor as f64).ln() + q.exponent.as_f64() * q.k.ln();
    let slack = rhs_log - lhs_log;
    let tol = LOG_TOLERANCE * rhs_log.abs().max(1.0);

    let verdict = match q.exponent.as_integer() {
        Some(e) if e <= EXACT_EXPONENT_LIMIT => {
            if exact_holds(q, e) {
                Verdict::Holds
            } else {
                Verdict::Violated
            }
        }
        _ if slack >= -tol => Verdict::Holds,
        _ => {
            // K >= 1, so K^floor(E) <= K^E <= K^ceil(E).
            let x = q.exponent.as_f64();
            let (lo, hi) = (x.floor(), x.ceil());
            if hi <= EXACT_EXPONENT_LIMIT as f64 && lo >= 0.0 {
                if exact_holds(q, lo as u64) {
                    Verdict::Holds
                } else if !exact_holds(q, hi as u64) {
                    Verdict::Violated
                } else {
                    Verdict::Indeterminate
                }
            } else {
                Verdict::Indeterminate
            }
        }
    };
    Judged { lhs_log, rhs_log, slack, verdict }
}

fn size(s: &IntSet) -> u64 {
    s.len() as u64
}

fn record(
    suite: Suite,
    trial: u64,
    seed: u64,
    instance: Instance,
    bound: Option<String>,
    q: Inequality,
) -> TrialRecord {
    let j = judge(&q);
    TrialRecord {
        suite,
        trial,
        seed,
        instance,
        bound,
        exponent: q.exponent,
        doubling: q.k,
        lhs_size: q.lhs,
        lhs_log: j.lhs_log,
        rhs_log: j.rhs_log,
        slack: j.slack,
        verdict: j.verdict,
    }
}

/// Checks `|lambda_1 . a + ... + lambda_h . a| <= K^exponent |a|` with
/// `K = |a + a| / |a|`.
pub fn check_dilate_bound(
    a: &IntSet,
    lambdas: &[i64],
    exponent: Exponent,
) -> Result<TrialRecord, VerifyError> {
    check_dilate_with(&SetArith::default(), a, lambdas, exponent, None)
}

fn check_dilate_with(
    arith: &SetArith,
    a: &IntSet,
    lambdas: &[i64],
    exponent: Exponent,
    bound: Option<String>,
) -> Result<TrialRecord, VerifyError> {
    if a.len() < 2 {
        return Err(VerifyError::Degenerate(a.len()));
    }
    let s = arith.dilate_sum(lambdas, a)?;
    let k = arith.doubling_constant(a, DoublingMode::Sum)?;
    let q = Inequality { lhs: size(&s), base: size(a), divisor: 1, k, exponent };
    let inst = Instance::Dilates { a: a.clone(), lambdas: lambdas.to_vec() };
    Ok(record(Suite::Dilates, 0, 0, inst, bound, q))
}

/// `kA - lA`, with `0A - 0A = {0}`.
fn fold_or_zero(arith: &SetArith, k: u32, l: u32, a: &IntSet) -> Result<IntSet, SetError> {
    if k + l == 0 {
        Ok(IntSet::singleton(0))
    } else {
        arith.signed_fold(k, l, a)
    }
}

fn doubling(arith: &SetArith, a: &IntSet) -> Result<Rational, SetError> {
    arith.doubling_constant(a, DoublingMode::Sum)
}

/// Bounds checked by the dilates suite for one coefficient tuple.
type BoundList = Vec<(String, Exponent)>;

fn dilate_bounds(lambdas: &[i64], params: &SolverParams) -> Result<BoundList, VerifyError> {
    Ok(exponent_report(lambdas, params)?.guaranteed_bounds())
}

/// Evaluates one instance. `bounds` supplies precomputed dilate exponents.
fn evaluate(
    suite: Suite,
    arith: &SetArith,
    params: &SolverParams,
    trial: u64,
    seed: u64,
    inst: Instance,
    bounds: Option<&BoundList>,
) -> Result<Vec<TrialRecord>, VerifyError> {
    let one = |inst: Instance, q: Inequality| Ok(vec![record(suite, trial, seed, inst, None, q)]);
    match &inst {
        Instance::Ruzsa { x, y, z } => {
            let lhs = size(&arith.sumset(x, y)?);
            let base = size(&arith.sumset(x, z)?) * size(&arith.sumset(z, y)?);
            let k = Rational::new(1, 1).unwrap();
            let q = Inequality { lhs, base, divisor: size(z), k, exponent: Exponent::Exact(0) };
            one(inst, q)
        }
        Instance::Plunnecke { a, l, m } => {
            let lhs = size(&arith.signed_fold(*l, *m, a)?);
            let k = doubling(arith, a)?;
            let (base, e) = (size(a), Exponent::Exact((*l + *m) as u64));
            one(inst, Inequality { lhs, base, divisor: 1, k, exponent: e })
        }
        Instance::Corollary5 { b, a, p1, p2 } => {
            let lhs = size(&arith.sumset(b, &fold_or_zero(arith, *p1, *p2, a)?)?);
            let base = size(&arith.sumset(b, a)?);
            let k = doubling(arith, a)?;
            let e = Exponent::Exact((*p1 + *p2 + 1) as u64);
            one(inst, Inequality { lhs, base, divisor: 1, k, exponent: e })
        }
        Instance::Prop6 { c, sets, k, l } => {
            let zero = IntSet::singleton(0);
            let mut left = c.clone().unwrap_or_else(|| zero.clone());
            let mut right = left.clone();
            let mut kmax = Rational::new(1, 1).unwrap();
            let mut e = sets.len() as u64;
            for ((a, &ki), &li) in sets.iter().zip(k).zip(l) {
                left = arith.sumset(&left, &fold_or_zero(arith, ki, li, a)?)?;
                right = arith.sumset(&right, a)?;
                kmax = kmax.max(doubling(arith, a)?);
                e += (ki + li) as u64;
            }
            let q = Inequality {
                lhs: size(&left),
                base: size(&right),
                divisor: 1,
                k: kmax,
                exponent: Exponent::Exact(e),
            };
            one(inst, q)
        }
        Instance::Dilates { a, lambdas } => {
            let owned;
            let bounds = match bounds {
                Some(b) => b,
                None => {
                    owned = dilate_bounds(lambdas, params)?;
                    &owned
                }
            };
            let s = size(&arith.dilate_sum(lambdas, a)?);
            let k = doubling(arith, a)?;
            Ok(bounds
                .iter()
                .map(|(label, e)| {
                    let q = Inequality { lhs: s, base: size(a), divisor: 1, k, exponent: *e };
                    record(suite, trial, seed, inst.clone(), Some(label.clone()), q)
                })
                .collect())
        }
    }
}

/// Binomial coefficients `C(n, k)` for `n <= rows`, `k <= cols`, saturating.
struct Binomials {
    cols: usize,
    table: Vec<u128>,
}

impl Binomials {
    fn new(rows: usize, cols: usize) -> Self {
        let mut table = vec![0u128; (rows + 1) * (cols + 1)];
        for n in 0..=rows {
            table[n * (cols + 1)] = 1;
            for k in 1..=cols.min(n) {
                let above = table[(n - 1) * (cols + 1) + k];
                let diag = table[(n - 1) * (cols + 1) + k - 1];
                table[n * (cols + 1) + k] = above.saturating_add(diag);
            }
        }
        Binomials { cols, table }
    }

    fn get(&self, n: usize, k: usize) -> u128 {
        if k > n || k > self.cols {
            0
        } else {
            self.table[n * (self.cols + 1) + k]
        }
    }
}

/// Subsets of `{0..n-1}` of sizes `2..=max`, ordered by size, then
/// lexicographically.
struct SubsetRanks {
    n: usize,
    max: usize,
    binom: Binomials,
}

impl SubsetRanks {
    fn new(universe: u32, max: usize) -> Self {
        let n = universe as usize + 1;
        SubsetRanks { n, max, binom: Binomials::new(n, max) }
    }

    fn count(&self) -> u128 {
        (2..=self.max).map(|s| self.binom.get(self.n, s)).fold(0u128, u128::saturating_add)
    }

    fn unrank(&self, mut rank: u128) -> IntSet {
        let mut s = 2;
        loop {
            let c = self.binom.get(self.n, s);
            if rank < c {
                break;
            }
            rank -= c;
            s += 1;
        }
        let mut out = Vec::with_capacity(s);
        let mut next = 0;
        for slot in 0..s {
            let rest = s - slot - 1;
            loop {
                let c = self.binom.get(self.n - next - 1, rest);
                if rank < c {
                    out.push(next as i64);
                    next += 1;
                    break;
                }
                rank -= c;
                next += 1;
            }
        }
        IntSet::new(out)
    }
}

/// Pairs `(x, y)` of nonnegative integers in lexicographic order.
fn pairs(filter: impl Fn(u32, u32) -> bool, bound: u32) -> Vec<(u32, u32)> {
    (0..=bound)
        .flat_map(|x| (0..=bound).map(move |y| (x, y)))
        .filter(|&(x, y)| filter(x, y))
        .collect()
}

fn plunnecke_pairs(cfg: &VerifyConfig) -> Vec<(u32, u32)> {
    pairs(|l, m| l + m >= 1, cfg.max_fold)
}

fn corollary_pairs(cfg: &VerifyConfig) -> Vec<(u32, u32)> {
    let f = cfg.max_fold;
    pairs(|p, q| p + q <= f, f)
}

fn prop6_pairs(cfg: &VerifyConfig) -> Vec<(u32, u32)> {
    let f = cfg.max_pair_fold;
    pairs(|k, l| k + l <= f, f)
}

/// Nonzero coefficients in `[-lambda_max, lambda_max]`, ascending.
fn coefficient_values(cfg: &VerifyConfig) -> Vec<i64> {
    let m = cfg.lambda_max as i64;
    (-m..=m).filter(|&x| x != 0).collect()
}

/// Exhaustive instance space: a sequence of mixed-radix blocks, each
/// enumerated most significant digit first.
struct Layout {
    blocks: Vec<Vec<u128>>,
    sizes: Vec<u128>,
}

impl Layout {
    fn new(blocks: Vec<Vec<u128>>) -> Self {
        let sizes = blocks
            .iter()
            .map(|b| b.iter().fold(1u128, |acc, &r| acc.saturating_mul(r)))
            .collect();
        Layout { blocks, sizes }
    }

    fn total(&self) -> u128 {
        self.sizes.iter().fold(0u128, |acc, &s| acc.saturating_add(s))
    }

    fn decode(&self, mut t: u128) -> (usize, Vec<u128>) {
        let mut block = 0;
        while t >= self.sizes[block] {
            t -= self.sizes[block];
            block += 1;
        }
        let radices = &self.blocks[block];
        let mut digits = vec![0u128; radices.len()];
        for (d, &r) in digits.iter_mut().zip(radices).rev() {
            *d = t % r;
            t /= r;
        }
        (block, digits)
    }
}

/// Deterministic instances of one suite.
pub struct InstanceGenerator {
    suite: Suite,
    cfg: VerifyConfig,
    subsets: Option<SubsetRanks>,
    layout: Option<Layout>,
    coefficients: Vec<i64>,
}

impl InstanceGenerator {
    pub fn new(suite: Suite, cfg: &VerifyConfig) -> Result<Self, VerifyError> {
        cfg.validate()?;
        let coefficients = coefficient_values(cfg);
        let (subsets, layout) = if cfg.exhaustive {
            let subsets = SubsetRanks::new(cfg.universe, cfg.max_set_size);
            let n = subsets.count();
            let pn = |v: Vec<(u32, u32)>| v.len() as u128;
            let blocks = match suite {
                Suite::Ruzsa => vec![vec![n, n, n]],
                Suite::Plunnecke => vec![vec![n, pn(plunnecke_pairs(cfg))]],
                Suite::Corollary5 => vec![vec![n, n, pn(corollary_pairs(cfg))]],
                Suite::Prop6 => {
                    let p = pn(prop6_pairs(cfg));
                    (1..=cfg.max_sets)
                        .map(|q| [vec![n; q], vec![p; q]].concat())
                        .collect()
                }
                Suite::Dilates => (1..=cfg.max_h)
                    .map(|h| [vec![n], vec![coefficients.len() as u128; h]].concat())
                    .collect(),
            };
            let layout = Layout::new(blocks);
            if layout.total() > cfg.max_instances as u128 {
                return Err(VerifyError::TooManyInstances {
                    needed: layout.total(),
                    limit: cfg.max_instances,
                });
            }
            (Some(subsets), Some(layout))
        } else {
            (None, None)
        };
        Ok(InstanceGenerator { suite, cfg: cfg.clone(), subsets, layout, coefficients })
    }

    /// Number of instances the suite visits.
    pub fn len(&self) -> u64 {
        match &self.layout {
            Some(l) => l.total() as u64,
            None => self.cfg.trials,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn seed_of(&self, t: u64) -> u64 {
        trial_seed(self.cfg.seed, t)
    }

    /// Instance `t`; depends only on the suite, the config and `t`.
    pub fn instance(&self, t: u64) -> Result<Instance, VerifyError> {
        match (&self.layout, &self.subsets) {
            (Some(layout), Some(subsets)) => Ok(self.exhaustive(layout, subsets, t)),
            _ => self.random(&mut SplitMix64::new(self.seed_of(t))),
        }
    }

    /// All instances in order.
    pub fn iter(&self) -> impl Iterator<Item = Result<Instance, VerifyError>> + '_ {
        (0..self.len()).map(|t| self.instance(t))
    }

    fn exhaustive(&self, layout: &Layout, subsets: &SubsetRanks, t: u64) -> Instance {
        let (block, d) = layout.decode(t as u128);
        let set = |i: usize| subsets.unrank(d[i]);
        match self.suite {
            Suite::Ruzsa => Instance::Ruzsa { x: set(0), y: set(1), z: set(2) },
            Suite::Plunnecke => {
                let (l, m) = plunnecke_pairs(&self.cfg)[d[1] as usize];
                Instance::Plunnecke { a: set(0), l, m }
            }
            Suite::Corollary5 => {
                let (p1, p2) = corollary_pairs(&self.cfg)[d[2] as usize];
                Instance::Corollary5 { b: set(0), a: set(1), p1, p2 }
            }
            Suite::Prop6 => {
                let q = block + 1;
                let table = prop6_pairs(&self.cfg);
                let (k, l) = d[q..].iter().map(|&i| table[i as usize]).unzip();
                Instance::Prop6 { c: None, sets: (0..q).map(set).collect(), k, l }
            }
            Suite::Dilates => Instance::Dilates {
                a: set(0),
                lambdas: d[1..].iter().map(|&i| self.coefficients[i as usize]).collect(),
            },
        }
    }

    /// Size uniform in `[min, max_set_size]`, elements distinct and uniform
    /// in `[0, universe]`, drawn by rejection.
    fn random_set(&self, rng: &mut SplitMix64, min: usize) -> Result<IntSet, VerifyError> {
        let size = rng.range_inclusive(min as i64, self.cfg.max_set_size as i64) as usize;
        let mut elems: Vec<i64> = Vec::with_capacity(size);
        let mut draws = 0u64;
        while elems.len() < size {
            draws += 1;
            if draws > 1_000_000 {
                return Err(VerifyError::Exhausted { size, universe: self.cfg.universe });
            }
            let x = rng.range_inclusive(0, self.cfg.universe as i64);
            if !elems.contains(&x) {
                elems.push(x);
            }
        }
        Ok(IntSet::new(elems))
    }

    fn random_pair(&self, rng: &mut SplitMix64, table: &[(u32, u32)]) -> (u32, u32) {
        table[rng.below(table.len() as u64) as usize]
    }

    fn random(&self, rng: &mut SplitMix64) -> Result<Instance, VerifyError> {
        Ok(match self.suite {
            Suite::Ruzsa => Instance::Ruzsa {
                x: self.random_set(rng, 2)?,
                y: self.random_set(rng, 2)?,
                z: self.random_set(rng, 2)?,
            },
            Suite::Plunnecke => {
                let a = self.random_set(rng, 2)?;
                let (l, m) = self.random_pair(rng, &plunnecke_pairs(&self.cfg));
                Instance::Plunnecke { a, l, m }
            }
            Suite::Corollary5 => {
                let b = self.random_set(rng, 2)?;
                let a = self.random_set(rng, 2)?;
                let (p1, p2) = self.random_pair(rng, &corollary_pairs(&self.cfg));
                Instance::Corollary5 { b, a, p1, p2 }
            }
            Suite::Prop6 => {
                let q = rng.range_inclusive(1, self.cfg.max_sets as i64) as usize;
                let c = if rng.chance(1, 2) { Some(self.random_set(rng, 1)?) } else { None };
                let table = prop6_pairs(&self.cfg);
                let mut sets = Vec::with_capacity(q);
                let (mut k, mut l) = (Vec::with_capacity(q), Vec::with_capacity(q));
                for _ in 0..q {
                    sets.push(self.random_set(rng, 2)?);
                    let (ki, li) = self.random_pair(rng, &table);
                    k.push(ki);
                    l.push(li);
                }
                Instance::Prop6 { c, sets, k, l }
            }
            Suite::Dilates => {
                let a = self.random_set(rng, 2)?;
                let h = rng.range_inclusive(1, self.cfg.max_h as i64) as usize;
                let n = self.coefficients.len() as u64;
                let lambdas = (0..h).map(|_| self.coefficients[rng.below(n) as usize]).collect();
                Instance::Dilates { a, lambdas }
            }
        })
    }

    /// Dilate exponents for every coefficient tuple of an exhaustive run, in
    /// block order; `None` when there are too many tuples to cache.
    fn tuple_bounds(&self) -> Result<Option<Vec<Vec<BoundList>>>, VerifyError> {
        if self.suite != Suite::Dilates || self.layout.is_none() {
            return Ok(None);
        }
        let n = self.coefficients.len() as u128;
        let total: u128 = (1..=self.cfg.max_h as u32).map(|h| n.saturating_pow(h)).sum();
        if total > 1 << 16 {
            return Ok(None);
        }
        let params = self.cfg.solver_params();
        (1..=self.cfg.max_h as u32)
            .map(|h| {
                (0..n.pow(h))
                    .into_par_iter()
                    .map(|rank| {
                        let mut r = rank;
                        let mut tuple = vec![0i64; h as usize];
                        for slot in tuple.iter_mut().rev() {
                            *slot = self.coefficients[(r % n) as usize];
                            r /= n;
                        }
                        dilate_bounds(&tuple, &params)
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

/// Rank of the coefficient tuple inside its exhaustive block.
fn tuple_rank(coefficients: &[i64], lambdas: &[i64]) -> usize {
    let n = coefficients.len();
    lambdas.iter().fold(0, |acc, l| {
        acc * n + coefficients.binary_search(l).expect("coefficient from the enumeration")
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: VerifyConfig,
    /// Generated instances.
    pub instances: u64,
    /// Checked inequalities; the dilates suite checks several per instance.
    pub trials: u64,
    pub holds: u64,
    pub violated: u64,
    pub indeterminate: u64,
    pub min_slack: Option<f64>,
    pub violations: Vec<TrialRecord>,
}

impl SuiteReport {
    pub fn is_clean(&self) -> bool {
        self.violated == 0
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport, VerifyError> {
    run_suite_with(suite, cfg, |_| Ok(()))
}

/// Runs a suite, handing every record to `sink` in trial order. Trials are
/// evaluated in parallel; the report does not depend on scheduling.
pub fn run_suite_with(
    suite: Suite,
    cfg: &VerifyConfig,
    mut sink: impl FnMut(&TrialRecord) -> Result<(), VerifyError>,
) -> Result<SuiteReport, VerifyError> {
    let gen = InstanceGenerator::new(suite, cfg)?;
    let cached = gen.tuple_bounds()?;
    let arith = SetArith::with_cap(cfg.cap);
    let params = cfg.solver_params();
    let mut report = SuiteReport {
        suite,
        config: cfg.clone(),
        instances: gen.len(),
        trials: 0,
        holds: 0,
        violated: 0,
        indeterminate: 0,
        min_slack: None,
        violations: Vec::new(),
    };

    let total = gen.len();
    let mut start = 0;
    while start < total {
        let end = (start + BATCH).min(total);
        let batch: Vec<Result<Vec<TrialRecord>, VerifyError>> = (start..end)
            .into_par_iter()
            .map(|t| {
                let inst = gen.instance(t)?;
                let bounds = match (&cached, &inst) {
                    (Some(c), Instance::Dilates { lambdas, .. }) => {
                        Some(&c[lambdas.len() - 1][tuple_rank(&gen.coefficients, lambdas)])
                    }
                    _ => None,
                };
                evaluate(suite, &arith, &params, t, gen.seed_of(t), inst, bounds)
            })
            .collect();
        for records in batch {
            for rec in records? {
                sink(&rec)?;
                report.trials += 1;
                match rec.verdict {
                    Verdict::Holds => report.holds += 1,
                    Verdict::Violated => report.violated += 1,
                    Verdict::Indeterminate => report.indeterminate += 1,
                }
                report.min_slack = Some(report.min_slack.map_or(rec.slack, |m| m.min(rec.slack)));
                if rec.verdict == Verdict::Violated {
                    report.violations.push(rec);
                }
            }
        }
        start = end;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDilateCheck {
    pub lambdas: Vec<i64>,
    /// `|lambda_1 . P + ... + lambda_h . P|`.
    pub lhs: u64,
    /// `(sum |lambda_i|)^k |P|`.
    pub rhs: u128,
    pub holds: bool,
    /// The bound is claimed for proper progressions only.
    pub applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub spec: GapSpec,
    pub elements: IntSet,
    pub size: u64,
    pub proper: bool,
    pub doubled_size: u64,
    /// `prod (2 L_i - 1)`.
    pub doubled_bound: u128,
    pub doubling: Rational,
    /// `K <= 2^k`, compared exactly.
    pub doubling_holds: bool,
    pub dilate: Option<GapDilateCheck>,
}

/// Enumerates a progression and checks its doubling and, with `lambdas`, the
/// dilate-sum bound `|sum lambda_i . P| <= (sum |lambda_i|)^k |P|`.
pub fn check_gap(
    arith: &SetArith,
    spec: &GapSpec,
    lambdas: Option<&[i64]>,
) -> Result<GapCheck, VerifyError> {
    let (p, proper) = arith.gap_generate(spec)?;
    let doubled = arith.sumset(&p, &p)?;
    let k = spec.dimension() as u32;
    let doubling = Rational::new(doubled.len() as u64, p.len() as u64).expect("nonempty");
    let doubling_holds = k < 64
        && doubling.numer() as u128 <= (doubling.denom() as u128) << k;
    let dilate = match lambdas {
        None => None,
        Some(ls) => {
            let s = arith.dilate_sum(ls, &p)?;
            let total = ls.iter().map(|l| l.unsigned_abs() as u128).sum::<u128>();
            let rhs = total
                .checked_pow(k)
                .and_then(|x| x.checked_mul(p.len() as u128))
                .ok_or(SetError::Overflow("dilate bound"))?;
            Some(GapDilateCheck {
                lambdas: ls.to_vec(),
                lhs: s.len() as u64,
                rhs,
                holds: s.len() as u128 <= rhs,
                applicable: proper,
            })
        }
    };
    Ok(GapCheck {
        spec: spec.clone(),
        size: p.len() as u64,
        elements: p,
        proper,
        doubled_size: doubled.len() as u64,
        doubled_bound: spec.doubled_size_bound().ok_or(SetError::Overflow("doubled bound"))?,
        doubling,
        doubling_holds,
        dilate,
    })
}
