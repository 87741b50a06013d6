//! Exact arithmetic on finite sets of integers.
//!
//! Every operation is overflow-checked and bounded by a cardinality cap, so a
//! runaway h-fold sumset fails with [`SetError::CapExceeded`] instead of
//! exhausting memory.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default bound on the cardinality of any computed set.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Largest value range handled by the dense accumulation buffer.
const DENSE_RANGE_LIMIT: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("operation requires a nonempty set")]
    Empty,
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("result would hold {size} elements, above the cap of {cap}")]
    CapExceeded { size: u128, cap: usize },
    #[error("dilation coefficient must be nonzero")]
    ZeroDilate,
    #[error("empty coefficient list")]
    NoCoefficients,
    #[error("signed fold needs at least one copy (k + l >= 1)")]
    EmptyFold,
    #[error("invalid progression: {0}")]
    InvalidGap(String),
}

/// A finite set of 64-bit integers stored as a strictly increasing sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<i64>", into = "Vec<i64>")]
pub struct IntSet {
    elems: Vec<i64>,
}

impl IntSet {
    /// Builds a set from arbitrary values, sorting and removing duplicates.
    pub fn new(mut values: Vec<i64>) -> Self {
        values.sort_unstable();
        values.dedup();
        IntSet { elems: values }
    }

    pub fn singleton(x: i64) -> Self {
        IntSet { elems: vec![x] }
    }

    /// The interval `{lo, ..., hi}`; empty when `lo > hi`.
    pub fn interval(lo: i64, hi: i64) -> Self {
        if lo > hi {
            return IntSet::default();
        }
        IntSet { elems: (lo..=hi).collect() }
    }

    /// Wraps a vector the caller guarantees is strictly increasing.
    fn from_sorted(elems: Vec<i64>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        IntSet { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, i64> {
        self.elems.iter()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<i64> {
        self.elems.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.elems.last().copied()
    }

    fn nonempty(&self) -> Result<(), SetError> {
        if self.elems.is_empty() {
            Err(SetError::Empty)
        } else {
            Ok(())
        }
    }
}

impl From<Vec<i64>> for IntSet {
    fn from(values: Vec<i64>) -> Self {
        IntSet::new(values)
    }
}

impl From<IntSet> for Vec<i64> {
    fn from(set: IntSet) -> Self {
        set.elems
    }
}

impl FromIterator<i64> for IntSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        IntSet::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a IntSet {
    type Item = &'a i64;
    type IntoIter = std::slice::Iter<'a, i64>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, x) in self.elems.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

/// A nonnegative rational in lowest terms with a positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct Rational {
    numer: u64,
    denom: u64,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    numer: u64,
    denom: u64,
}

impl TryFrom<RationalRepr> for Rational {
    type Error = String;

    fn try_from(r: RationalRepr) -> Result<Self, Self::Error> {
        Rational::new(r.numer, r.denom).ok_or_else(|| "zero denominator".to_string())
    }
}

impl From<Rational> for RationalRepr {
    fn from(r: Rational) -> Self {
        RationalRepr { numer: r.numer, denom: r.denom }
    }
}

impl Rational {
    /// Returns `None` when `denom == 0`.
    pub fn new(numer: u64, denom: u64) -> Option<Self> {
        if denom == 0 {
            return None;
        }
        let g = numer.gcd(&denom);
        Some(Rational { numer: numer / g, denom: denom / g })
    }

    pub fn numer(&self) -> u64 {
        self.numer
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn to_f64(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    /// Natural logarithm, computed as a difference of logs to keep precision
    /// for large numerators and denominators.
    pub fn ln(&self) -> f64 {
        (self.numer as f64).ln() - (self.denom as f64).ln()
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numer as u128 * other.denom as u128;
        let rhs = other.numer as u128 * self.denom as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

/// Which self-combination defines the doubling constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoublingMode {
    #[default]
    Sum,
    Difference,
}

/// How [`SetArith::sumset_with`] materializes a sumset. Both routes are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumsetStrategy {
    /// Choose per call from the sizes and value range of the operands.
    Auto,
    /// k-way merge of the shifted copies `a + y`, `y` in `b`.
    Merge,
    /// Bitmap over the value range `[min a + min b, max a + max b]`.
    Dense,
}

/// Set arithmetic bounded by a cardinality cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetArith {
    pub cap: usize,
}

impl Default for SetArith {
    fn default() -> Self {
        SetArith { cap: DEFAULT_CAP }
    }
}

impl SetArith {
    pub fn with_cap(cap: usize) -> Self {
        SetArith { cap }
    }

    fn check_cap(&self, size: u128) -> Result<(), SetError> {
        if size > self.cap as u128 {
            Err(SetError::CapExceeded { size, cap: self.cap })
        } else {
            Ok(())
        }
    }

    pub fn sumset(&self, a: &IntSet, b: &IntSet) -> Result<IntSet, SetError> {
        self.sumset_with(a, b, SumsetStrategy::Auto)
    }

    pub fn sumset_with(
        &self,
        a: &IntSet,
        b: &IntSet,
        strategy: SumsetStrategy,
    ) -> Result<IntSet, SetError> {
        a.nonempty()?;
        b.nonempty()?;
        // The extreme sums bound every other sum, so checking them rules out
        // overflow everywhere.
        let lo = a.elems[0]
            .checked_add(b.elems[0])
            .ok_or(SetError::Overflow("sumset"))?;
        let hi = a.elems[a.len() - 1]
            .checked_add(b.elems[b.len() - 1])
            .ok_or(SetError::Overflow("sumset"))?;
        // |A + B| >= max(|A|, |B|), and the range bounds it from above.
        self.check_cap(a.len().max(b.len()) as u128)?;
        let range = (hi as i128 - lo as i128 + 1) as u128;
        let pairs = a.len() as u128 * b.len() as u128;

        let strategy = match strategy {
            SumsetStrategy::Auto => {
                if range <= DENSE_RANGE_LIMIT as u128 && range <= 4 * pairs {
                    SumsetStrategy::Dense
                } else {
                    SumsetStrategy::Merge
                }
            }
            s => s,
        };
        match strategy {
            SumsetStrategy::Dense if range <= DENSE_RANGE_LIMIT as u128 => {
                self.sumset_dense(a, b, lo, range as usize)
            }
            _ => self.sumset_merge(a, b),
        }
    }

    fn sumset_dense(
        &self,
        a: &IntSet,
        b: &IntSet,
        lo: i64,
        range: usize,
    ) -> Result<IntSet, SetError> {
        let mut seen = FixedBitSet::with_capacity(range);
        for &x in &a.elems {
            let base = x as i128 - lo as i128;
            for &y in &b.elems {
                seen.insert((base + y as i128) as usize);
            }
        }
        let count = seen.count_ones(..);
        self.check_cap(count as u128)?;
        let out = seen
            .ones()
            .map(|k| (lo as i128 + k as i128) as i64)
            .collect();
        Ok(IntSet::from_sorted(out))
    }

    fn sumset_merge(&self, a: &IntSet, b: &IntSet) -> Result<IntSet, SetError> {
        // Merge the |small| shifted copies of the larger operand.
        let (big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        let mut heap: BinaryHeap<Reverse<(i64, usize, usize)>> = small
            .elems
            .iter()
            .enumerate()
            .map(|(k, &y)| Reverse((big.elems[0] + y, k, 0)))
            .collect();
        let mut out: Vec<i64> = Vec::with_capacity(big.len());
        while let Some(Reverse((s, k, pos))) = heap.pop() {
            if out.last() != Some(&s) {
                if out.len() >= self.cap {
                    return Err(SetError::CapExceeded {
                        size: out.len() as u128 + 1,
                        cap: self.cap,
                    });
                }
                out.push(s);
            }
            if pos + 1 < big.len() {
                heap.push(Reverse((big.elems[pos + 1] + small.elems[k], k, pos + 1)));
            }
        }
        Ok(IntSet::from_sorted(out))
    }

    /// `lambda . a = {lambda * x : x in a}`.
    pub fn dilate(&self, lambda: i64, a: &IntSet) -> Result<IntSet, SetError> {
        if lambda == 0 {
            return Err(SetError::ZeroDilate);
        }
        a.nonempty()?;
        let mut out = a
            .elems
            .iter()
            .map(|&x| x.checked_mul(lambda).ok_or(SetError::Overflow("dilate")))
            .collect::<Result<Vec<_>, _>>()?;
        if lambda < 0 {
            out.reverse();
        }
        Ok(IntSet::from_sorted(out))
    }

    /// `lambda_1 . a + ... + lambda_h . a`.
    pub fn dilate_sum(&self, lambdas: &[i64], a: &IntSet) -> Result<IntSet, SetError> {
        let (first, rest) = lambdas.split_first().ok_or(SetError::NoCoefficients)?;
        let mut acc = self.dilate(*first, a)?;
        for &lambda in rest {
            let d = self.dilate(lambda, a)?;
            acc = self.sumset(&acc, &d)?;
        }
        Ok(acc)
    }

    /// `kA - lA`: the sum of `k` copies of `a` and `l` copies of `-a`.
    pub fn signed_fold(&self, k: u32, l: u32, a: &IntSet) -> Result<IntSet, SetError> {
        if k == 0 && l == 0 {
            return Err(SetError::EmptyFold);
        }
        a.nonempty()?;
        let pos = self.fold(k, a)?;
        let neg = match l {
            0 => None,
            _ => self.fold(l, &self.dilate(-1, a)?)?,
        };
        match (pos, neg) {
            (Some(p), Some(n)) => self.sumset(&p, &n),
            (Some(p), None) => Ok(p),
            (None, Some(n)) => Ok(n),
            (None, None) => unreachable!(),
        }
    }

    /// h-fold sumset; `None` for `h = 0`.
    fn fold(&self, h: u32, a: &IntSet) -> Result<Option<IntSet>, SetError> {
        if h == 0 {
            return Ok(None);
        }
        let mut acc = a.clone();
        for _ in 1..h {
            acc = self.sumset(&acc, a)?;
        }
        Ok(Some(acc))
    }

    /// `|a + a| / |a|` or `|a - a| / |a|`.
    pub fn doubling_constant(&self, a: &IntSet, mode: DoublingMode) -> Result<Rational, SetError> {
        a.nonempty()?;
        let doubled = match mode {
            DoublingMode::Sum => self.sumset(a, a)?,
            DoublingMode::Difference => self.signed_fold(1, 1, a)?,
        };
        Ok(Rational::new(doubled.len() as u64, a.len() as u64).expect("nonempty set"))
    }

    /// Enumerates the progression and reports whether it is proper.
    pub fn gap_generate(&self, spec: &GapSpec) -> Result<(IntSet, bool), SetError> {
        spec.validate()?;
        let product = spec
            .lengths
            .iter()
            .try_fold(1u128, |acc, &l| acc.checked_mul(l as u128))
            .ok_or(SetError::Overflow("progression size"))?;
        self.check_cap(product)?;

        let k = spec.diffs.len();
        let mut counters = vec![0u64; k];
        let mut out = Vec::with_capacity(product as usize);
        'outer: loop {
            let mut x = spec.base;
            for (c, &d) in counters.iter().zip(&spec.diffs) {
                let step = (*c as i64)
                    .checked_mul(d)
                    .ok_or(SetError::Overflow("progression element"))?;
                x = x.checked_add(step).ok_or(SetError::Overflow("progression element"))?;
            }
            out.push(x);
            for pos in (0..k).rev() {
                counters[pos] += 1;
                if counters[pos] < spec.lengths[pos] {
                    continue 'outer;
                }
                counters[pos] = 0;
            }
            break;
        }
        let set = IntSet::new(out);
        let proper = set.len() as u128 == product;
        Ok((set, proper))
    }
}

/// `{base + x_1 d_1 + ... + x_k d_k : 0 <= x_i < L_i}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSpec {
    pub base: i64,
    pub diffs: Vec<i64>,
    pub lengths: Vec<u64>,
}

impl GapSpec {
    pub fn dimension(&self) -> usize {
        self.diffs.len()
    }

    pub fn validate(&self) -> Result<(), SetError> {
        if self.diffs.is_empty() {
            return Err(SetError::InvalidGap("at least one dimension is required".into()));
        }
        if self.diffs.len() != self.lengths.len() {
            return Err(SetError::InvalidGap(format!(
                "{} differences but {} lengths",
                self.diffs.len(),
                self.lengths.len()
            )));
        }
        if let Some(pos) = self.lengths.iter().position(|&l| l == 0) {
            return Err(SetError::InvalidGap(format!("length #{} is zero", pos + 1)));
        }
        if self.lengths.iter().any(|&l| l > i64::MAX as u64) {
            return Err(SetError::InvalidGap("length out of range".into()));
        }
        Ok(())
    }

    /// `prod_i (2 L_i - 1)`, the size of `P + P` for a proper progression.
    pub fn doubled_size_bound(&self) -> Option<u128> {
        self.lengths
            .iter()
            .try_fold(1u128, |acc, &l| acc.checked_mul(2 * l as u128 - 1))
    }
}

pub fn sumset(a: &IntSet, b: &IntSet) -> Result<IntSet, SetError> {
    SetArith::default().sumset(a, b)
}

pub fn dilate(lambda: i64, a: &IntSet) -> Result<IntSet, SetError> {
    SetArith::default().dilate(lambda, a)
}

pub fn dilate_sum(lambdas: &[i64], a: &IntSet) -> Result<IntSet, SetError> {
    SetArith::default().dilate_sum(lambdas, a)
}

pub fn signed_fold(k: u32, l: u32, a: &IntSet) -> Result<IntSet, SetError> {
    SetArith::default().signed_fold(k, l, a)
}

pub fn doubling_constant(a: &IntSet, mode: DoublingMode) -> Result<Rational, SetError> {
    SetArith::default().doubling_constant(a, mode)
}

pub fn gap_generate(spec: &GapSpec) -> Result<(IntSet, bool), SetError> {
    SetArith::default().gap_generate(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[i64]) -> IntSet {
        IntSet::new(v.to_vec())
    }

    /// Pairwise enumeration, independent of both sumset routes.
    fn naive_sumset(a: &IntSet, b: &IntSet) -> IntSet {
        a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect()
    }

    #[test]
    fn sumset_examples() {
        assert_eq!(sumset(&set(&[0, 1]), &set(&[0, 2])).unwrap(), set(&[0, 1, 2, 3]));
        assert_eq!(sumset(&set(&[5]), &set(&[0])).unwrap(), set(&[5]));
        assert_eq!(sumset(&set(&[0, 1, 2]), &set(&[0, 1, 2])).unwrap(), set(&[0, 1, 2, 3, 4]));
    }

    #[test]
    fn sumset_errors() {
        assert_eq!(sumset(&IntSet::default(), &set(&[1])), Err(SetError::Empty));
        assert_eq!(
            sumset(&set(&[i64::MAX]), &set(&[1])),
            Err(SetError::Overflow("sumset"))
        );
        let arith = SetArith::with_cap(4);
        assert!(matches!(
            arith.sumset(&set(&[0, 1, 2]), &set(&[0, 10])),
            Err(SetError::CapExceeded { .. })
        ));
        assert!(matches!(
            arith.sumset_with(&set(&[0, 1, 2]), &set(&[0, 10]), SumsetStrategy::Dense),
            Err(SetError::CapExceeded { .. })
        ));
    }

    #[test]
    fn sumset_handles_extreme_values() {
        let a = set(&[i64::MIN, 0]);
        let b = set(&[0, i64::MAX]);
        let s = sumset(&a, &b).unwrap();
        assert_eq!(s, set(&[i64::MIN, -1, 0, i64::MAX]));
    }

    #[test]
    fn dilate_examples() {
        assert_eq!(dilate(2, &set(&[0, 1, 5])).unwrap(), set(&[0, 2, 10]));
        assert_eq!(dilate(1, &set(&[3, 7])).unwrap(), set(&[3, 7]));
        assert_eq!(dilate(-1, &set(&[0, 1, 2])).unwrap(), set(&[-2, -1, 0]));
        assert_eq!(dilate(0, &set(&[1])), Err(SetError::ZeroDilate));
        assert_eq!(dilate(2, &set(&[i64::MAX])), Err(SetError::Overflow("dilate")));
    }

    #[test]
    fn dilate_sum_examples() {
        assert_eq!(dilate_sum(&[1, 2], &set(&[0, 1])).unwrap(), set(&[0, 1, 2, 3]));
        assert_eq!(dilate_sum(&[1, -1], &set(&[0, 1])).unwrap(), set(&[-1, 0, 1]));
        assert_eq!(dilate_sum(&[3], &set(&[0, 1])).unwrap(), set(&[0, 3]));
        assert_eq!(dilate_sum(&[], &set(&[0, 1])), Err(SetError::NoCoefficients));
        assert_eq!(dilate_sum(&[1, 0], &set(&[0, 1])), Err(SetError::ZeroDilate));
    }

    #[test]
    fn signed_fold_examples() {
        assert_eq!(signed_fold(2, 0, &set(&[0, 1])).unwrap(), set(&[0, 1, 2]));
        assert_eq!(signed_fold(1, 1, &set(&[0, 1])).unwrap(), set(&[-1, 0, 1]));
        assert_eq!(signed_fold(1, 0, &set(&[4])).unwrap(), set(&[4]));
        assert_eq!(signed_fold(0, 2, &set(&[0, 1])).unwrap(), set(&[-2, -1, 0]));
        assert_eq!(signed_fold(0, 0, &set(&[0, 1])), Err(SetError::EmptyFold));
    }

    #[test]
    fn doubling_examples() {
        let k = doubling_constant(&set(&[0, 1, 2]), DoublingMode::Sum).unwrap();
        assert_eq!((k.numer(), k.denom()), (5, 3));
        let k = doubling_constant(&set(&[7]), DoublingMode::Sum).unwrap();
        assert_eq!((k.numer(), k.denom()), (1, 1));
        let k = doubling_constant(&set(&[0, 1]), DoublingMode::Difference).unwrap();
        assert_eq!((k.numer(), k.denom()), (3, 2));
        assert_eq!(doubling_constant(&IntSet::default(), DoublingMode::Sum), Err(SetError::Empty));
    }

    #[test]
    fn rational_lowest_terms() {
        let r = Rational::new(10, 4).unwrap();
        assert_eq!((r.numer(), r.denom()), (5, 2));
        assert_eq!(Rational::new(0, 7).unwrap().denom(), 1);
        assert!(Rational::new(1, 0).is_none());
        assert!(Rational::new(5, 3).unwrap() > Rational::new(3, 2).unwrap());
        assert_eq!(Rational::new(25, 9).unwrap().to_string(), "25/9");
    }

    #[test]
    fn gap_examples() {
        let spec = GapSpec { base: 0, diffs: vec![1, 10], lengths: vec![3, 3] };
        let (p, proper) = gap_generate(&spec).unwrap();
        assert_eq!(p, set(&[0, 1, 2, 10, 11, 12, 20, 21, 22]));
        assert!(proper);

        let spec = GapSpec { base: 0, diffs: vec![1, 2], lengths: vec![3, 3] };
        let (p, proper) = gap_generate(&spec).unwrap();
        assert_eq!(p.len(), 7);
        assert!(!proper);

        let spec = GapSpec { base: 5, diffs: vec![1], lengths: vec![1] };
        assert_eq!(gap_generate(&spec).unwrap(), (set(&[5]), true));
    }

    #[test]
    fn gap_errors() {
        let bad = GapSpec { base: 0, diffs: vec![1, 2], lengths: vec![3] };
        assert!(matches!(gap_generate(&bad), Err(SetError::InvalidGap(_))));
        let bad = GapSpec { base: 0, diffs: vec![1], lengths: vec![0] };
        assert!(matches!(gap_generate(&bad), Err(SetError::InvalidGap(_))));
        let big = GapSpec { base: 0, diffs: vec![1, 1000], lengths: vec![1000, 1000] };
        assert!(matches!(
            SetArith::with_cap(1000).gap_generate(&big),
            Err(SetError::CapExceeded { .. })
        ));
        let over = GapSpec { base: i64::MAX - 1, diffs: vec![1], lengths: vec![3] };
        assert!(matches!(gap_generate(&over), Err(SetError::Overflow(_))));
    }

    #[test]
    fn json_shapes() {
        let s: IntSet = serde_json::from_str("[3,1,2,1]").unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,2,3]");
        let spec: GapSpec =
            serde_json::from_str(r#"{"base":0,"diffs":[1,10],"lengths":[3,3]}"#).unwrap();
        assert_eq!(spec.doubled_size_bound(), Some(25));
    }

    fn small_set() -> impl Strategy<Value = IntSet> {
        proptest::collection::vec(-60i64..60, 1..12).prop_map(IntSet::new)
    }

    fn sparse_set() -> impl Strategy<Value = IntSet> {
        proptest::collection::vec(-1_000_000_000i64..1_000_000_000, 1..12).prop_map(IntSet::new)
    }

    proptest! {
        #[test]
        fn sumset_routes_agree_with_enumeration(a in small_set(), b in sparse_set()) {
            let naive = naive_sumset(&a, &b);
            let arith = SetArith::default();
            prop_assert_eq!(&arith.sumset_with(&a, &b, SumsetStrategy::Merge).unwrap(), &naive);
            prop_assert_eq!(&arith.sumset_with(&a, &a, SumsetStrategy::Dense).unwrap(), &naive_sumset(&a, &a));
            prop_assert_eq!(&arith.sumset(&a, &b).unwrap(), &naive);
        }

        #[test]
        fn sumset_commutes_and_grows(a in small_set(), b in small_set()) {
            let ab = sumset(&a, &b).unwrap();
            prop_assert_eq!(&ab, &sumset(&b, &a).unwrap());
            prop_assert!(ab.len() >= a.len().max(b.len()));
            prop_assert!(ab.len() >= a.len() + b.len() - 1);
        }

        #[test]
        fn dilate_preserves_size(a in small_set(), lambda in -9i64..9) {
            prop_assume!(lambda != 0);
            prop_assert_eq!(dilate(lambda, &a).unwrap().len(), a.len());
        }

        #[test]
        fn dilate_sum_is_permutation_invariant(
            a in small_set(),
            lambdas in proptest::collection::vec(prop_oneof![-7i64..=-1, 1i64..=7], 1..4),
        ) {
            let mut reversed = lambdas.clone();
            reversed.reverse();
            let mut rotated = lambdas.clone();
            rotated.rotate_left(1);
            let s = dilate_sum(&lambdas, &a).unwrap();
            prop_assert_eq!(&s, &dilate_sum(&reversed, &a).unwrap());
            prop_assert_eq!(&s, &dilate_sum(&rotated, &a).unwrap());
        }

        #[test]
        fn doubling_lower_bound(a in small_set()) {
            prop_assume!(a.len() >= 2);
            let k = doubling_constant(&a, DoublingMode::Sum).unwrap();
            let floor = Rational::new(2 * a.len() as u64 - 1, a.len() as u64).unwrap();
            prop_assert!(k >= floor);
        }

        #[test]
        fn proper_gap_doubling_and_dilates(
            base in -20i64..20,
            d1 in 1i64..4,
            l1 in 2u64..5,
            l2 in 2u64..4,
            lambdas in proptest::collection::vec(1i64..5, 1..4),
        ) {
            // d2 beyond the span of the first axis keeps the progression proper
            let d2 = d1 * (2 * l1 as i64) + 1;
            let spec = GapSpec { base, diffs: vec![d1, d2], lengths: vec![l1, l2] };
            let (p, proper) = gap_generate(&spec).unwrap();
            prop_assert!(proper);
            let k = doubling_constant(&p, DoublingMode::Sum).unwrap();
            prop_assert!(k <= Rational::new(4, 1).unwrap());
            let s = dilate_sum(&lambdas, &p).unwrap();
            let total: i64 = lambdas.iter().sum();
            prop_assert!(s.len() as i64 <= total * total * p.len() as i64);
        }
    }
}
