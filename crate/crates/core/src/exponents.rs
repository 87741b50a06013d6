//! Exponent bounds `E` with `|lambda_1 . A + ... + lambda_h . A| <= K^E |A|`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biclique::{
    decompose, validate_decomposition, Algo, Biclique, DecompError, Decomposition, SolverParams,
};
use crate::digits::{build_digit_graph, max_exponent, DigitError, DigitGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error(transparent)]
    Digits(#[from] DigitError),
    #[error(transparent)]
    Solver(#[from] DecompError),
    #[error("decomposition does not partition the digit graph of this tuple")]
    InvalidDecomposition,
    #[error("main-theorem exponent needs r >= 1, h >= 1 and r + h >= 3 (got r = {r}, h = {h})")]
    MainTheoremRange { r: u64, h: u64 },
    #[error("exponent overflows 64 bits")]
    Overflow,
}

/// An exponent value; integer-valued bounds stay exact so comparisons between
/// them never depend on rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Exact(u64),
    Approx(f64),
}

impl Exponent {
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Exact(n) => n as f64,
            Exponent::Approx(x) => x,
        }
    }

    /// The exponent as an integer, when it is one.
    pub fn as_integer(self) -> Option<u64> {
        match self {
            Exponent::Exact(n) => Some(n),
            Exponent::Approx(x) if x.fract() == 0.0 && (0.0..1.8e19).contains(&x) => Some(x as u64),
            Exponent::Approx(_) => None,
        }
    }

    /// Total order: exact when both sides are integers, else on `f64`.
    pub fn total_cmp(self, other: Exponent) -> Ordering {
        match (self, other) {
            (Exponent::Exact(a), Exponent::Exact(b)) => a.cmp(&b),
            (a, b) => a.as_f64().total_cmp(&b.as_f64()),
        }
    }
}

impl From<u64> for Exponent {
    fn from(n: u64) -> Self {
        Exponent::Exact(n)
    }
}

impl From<f64> for Exponent {
    fn from(x: f64) -> Self {
        Exponent::Approx(x)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Exact(n) => write!(f, "{n}"),
            Exponent::Approx(x) => write!(f, "{x:.6}"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Exponent::Exact(n) => s.serialize_u64(n),
            Exponent::Approx(x) => s.serialize_f64(x),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative number")
            }
            fn visit_u64<E: serde::de::Error>(self, n: u64) -> Result<Exponent, E> {
                Ok(Exponent::Exact(n))
            }
            fn visit_i64<E: serde::de::Error>(self, n: i64) -> Result<Exponent, E> {
                u64::try_from(n).map(Exponent::Exact).map_err(E::custom)
            }
            fn visit_f64<E: serde::de::Error>(self, x: f64) -> Result<Exponent, E> {
                Ok(Exponent::Approx(x))
            }
        }
        d.deserialize_any(Visitor)
    }
}

/// `sum_i |lambda_i|`, from `lambda_i . A` being a subset of `lambda_i A`.
pub fn plunnecke_exponent(lambdas: &[i64]) -> Result<Exponent, ExponentError> {
    max_exponent(lambdas)?;
    let total = lambdas
        .iter()
        .try_fold(0u64, |acc, l| acc.checked_add(l.unsigned_abs()));
    Ok(match total {
        Some(t) => Exponent::Exact(t),
        None => Exponent::Approx(lambdas.iter().map(|l| l.unsigned_abs() as f64).sum()),
    })
}

/// `7 + 12 sum_i log2(1 + |lambda_i|)`.
pub fn bukh_exponent(lambdas: &[i64]) -> Result<f64, ExponentError> {
    max_exponent(lambdas)?;
    let logs: f64 = lambdas.iter().map(|l| (1.0 + l.unsigned_abs() as f64).log2()).sum();
    Ok(7.0 + 12.0 * logs)
}

/// `7 + 10 r + 2 sum_i popcount(|lambda_i|)`.
pub fn binbound_exponent(lambdas: &[i64]) -> Result<u64, ExponentError> {
    let r = max_exponent(lambdas)? as u64;
    let digits: u64 = lambdas.iter().map(|l| l.unsigned_abs().count_ones() as u64).sum();
    Ok(7 + 10 * r + 2 * digits)
}

fn chain_exponent(r: u32, weight: u64) -> Result<u64, ExponentError> {
    weight
        .checked_mul(2)
        .and_then(|w| w.checked_add(7 + 10 * r as u64))
        .ok_or(ExponentError::Overflow)
}

fn checked_valid(g: &DigitGraph, d: &Decomposition) -> Result<(), ExponentError> {
    if validate_decomposition(g, d).is_valid() {
        Ok(())
    } else {
        Err(ExponentError::InvalidDecomposition)
    }
}

/// `7 + 10 r + 2 sum_i (|X_i| + |Y_i|)` for a biclique partition of the digit
/// graph of `lambdas`.
pub fn decomposition_exponent(lambdas: &[i64], d: &Decomposition) -> Result<u64, ExponentError> {
    let g = build_digit_graph(lambdas)?;
    checked_valid(&g, d)?;
    chain_exponent(g.r(), d.weight)
}

/// `7 + 10 r + 2 sum_i |Y_i| + q + sum_i |X_i|`: the same chain with the
/// sign-split overhead `q + sum (k_i + l_i)` kept instead of relaxed to
/// `2 sum |X_i|`. Never larger than [`decomposition_exponent`].
pub fn sharp_decomposition_exponent(
    lambdas: &[i64],
    d: &Decomposition,
) -> Result<u64, ExponentError> {
    let g = build_digit_graph(lambdas)?;
    checked_valid(&g, d)?;
    sharp_chain(g.r(), d)
}

fn sharp_chain(r: u32, d: &Decomposition) -> Result<u64, ExponentError> {
    let overhead = (d.len() as u64)
        .checked_add(d.left_weight())
        .ok_or(ExponentError::Overflow)?;
    d.right_weight()
        .checked_mul(2)
        .and_then(|y| y.checked_add(overhead))
        .and_then(|x| x.checked_add(7 + 10 * r as u64))
        .ok_or(ExponentError::Overflow)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremBound {
    /// `7 r h / ln(r + h)`.
    pub value: f64,
    /// `min{r+1, h} >= 10 (ln max{r+1, h})^2`.
    pub applicable: bool,
    /// The bound also assumes `r` and `h` are sufficiently large, which no
    /// finite check can confirm.
    pub asymptotic_only: bool,
}

pub fn main_theorem_exponent(r: u64, h: u64) -> Result<MainTheoremBound, ExponentError> {
    if r == 0 || h == 0 || r + h < 3 {
        return Err(ExponentError::MainTheoremRange { r, h });
    }
    let (rf, hf) = (r as f64, h as f64);
    let big = (rf + 1.0).max(hf);
    let small = (rf + 1.0).min(hf);
    Ok(MainTheoremBound {
        value: 7.0 * rf * hf / (rf + hf).ln(),
        applicable: small >= 10.0 * big.ln() * big.ln(),
        asymptotic_only: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionBound {
    pub algo: Algo,
    pub weight: u64,
    pub q: usize,
    pub exponent: u64,
    pub sharp_exponent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub lambdas: Vec<i64>,
    pub r: u32,
    pub h: usize,
    pub plunnecke: Exponent,
    pub bukh: f64,
    pub binbound: u64,
    /// Keyed by solver name.
    pub decomposition_exponents: BTreeMap<String, u64>,
    pub decompositions: Vec<DecompositionBound>,
    /// Solvers not run, with the reason.
    #[serde(default)]
    pub skipped: BTreeMap<String, String>,
    /// Absent when `r = 0` or `r + h < 3`.
    pub main_theorem: Option<MainTheoremBound>,
    /// `min{r+1, h} >= 10 (ln max{r+1, h})^2`, evaluated even when `r = 0`.
    pub size_condition: bool,
    pub best: String,
    pub best_exponent: Exponent,
    /// Lightest decomposition found, with `gamma_j` attached.
    pub decomposition: Decomposition,
}

impl ExponentReport {
    /// Every bound in the report that a theorem guarantees for all sets, in
    /// a fixed order: plunnecke, bukh, binbound, then one per solver.
    pub fn guaranteed_bounds(&self) -> Vec<(String, Exponent)> {
        let mut out = vec![
            ("plunnecke".to_string(), self.plunnecke),
            ("bukh".to_string(), Exponent::Approx(self.bukh)),
            ("binbound".to_string(), Exponent::Exact(self.binbound)),
        ];
        for d in &self.decompositions {
            out.push((format!("decomposition/{}", d.algo), Exponent::Exact(d.exponent)));
        }
        out
    }

    pub const CSV_HEADER: [&'static str; 15] = [
        "lambdas",
        "r",
        "h",
        "plunnecke",
        "bukh",
        "binbound",
        "star_rows",
        "star_cols",
        "greedy",
        "exact",
        "main_theorem",
        "main_applicable",
        "best",
        "best_exponent",
        "best_weight",
    ];

    /// One CSV row matching [`Self::CSV_HEADER`]; lambdas are space-separated
    /// and missing values are empty.
    pub fn csv_row(&self) -> Vec<String> {
        let lambdas = self.lambdas.iter().map(i64::to_string).collect::<Vec<_>>().join(" ");
        let dec = |algo: Algo| {
            self.decomposition_exponents.get(algo.name()).map_or(String::new(), u64::to_string)
        };
        vec![
            lambdas,
            self.r.to_string(),
            self.h.to_string(),
            self.plunnecke.to_string(),
            format!("{:.6}", self.bukh),
            self.binbound.to_string(),
            dec(Algo::StarRows),
            dec(Algo::StarCols),
            dec(Algo::Greedy),
            dec(Algo::Exact),
            self.main_theorem.map_or(String::new(), |m| format!("{:.6}", m.value)),
            self.main_theorem.map_or(String::new(), |m| m.applicable.to_string()),
            self.best.clone(),
            self.best_exponent.to_string(),
            self.decomposition.weight.to_string(),
        ]
    }
}

/// Positions sorted by `(|lambda|, position)`. The digit graph only depends on
/// the magnitudes, so decomposing in this order makes every solver's output a
/// function of the multiset of magnitudes.
fn canonical_order(lambdas: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by_key(|&i| (lambdas[i].unsigned_abs(), i));
    order
}

fn remap_left(d: Decomposition, order: &[usize]) -> Decomposition {
    let bicliques = d
        .bicliques
        .into_iter()
        .map(|b| Biclique::new(b.left.into_iter().map(|i| order[i]).collect(), b.right))
        .collect();
    Decomposition { bicliques, ..d }
}

/// Runs every solver on the digit graph of `lambdas` and collects all bounds.
/// The exact solver is skipped when the graph exceeds its edge limit.
pub fn exponent_report(
    lambdas: &[i64],
    params: &SolverParams,
) -> Result<ExponentReport, ExponentError> {
    let graph = build_digit_graph(lambdas)?;
    let order = canonical_order(lambdas);
    let canonical: Vec<i64> = order.iter().map(|&i| lambdas[i].unsigned_abs() as i64).collect();
    let canonical_graph = build_digit_graph(&canonical)?;
    let r = graph.r();
    let h = lambdas.len();

    let mut decompositions = Vec::new();
    let mut skipped = BTreeMap::new();
    let mut lightest: Option<Decomposition> = None;
    for algo in Algo::ALL {
        let d = match decompose(canonical_graph.graph(), algo, params) {
            Ok(d) => remap_left(d, &order).with_gammas(),
            Err(e @ DecompError::TooManyEdges { .. }) if algo == Algo::Exact => {
                skipped.insert(algo.name().to_string(), e.to_string());
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        checked_valid(&graph, &d)?;
        decompositions.push(DecompositionBound {
            algo,
            weight: d.weight,
            q: d.len(),
            exponent: chain_exponent(r, d.weight)?,
            sharp_exponent: sharp_chain(r, &d)?,
        });
        if lightest.as_ref().is_none_or(|l| d.weight < l.weight) {
            lightest = Some(d);
        }
    }

    let main_theorem = main_theorem_exponent(r as u64, h as u64).ok();
    let size_condition = {
        let (a, b) = ((r as f64 + 1.0), h as f64);
        let big = a.max(b);
        a.min(b) >= 10.0 * big.ln() * big.ln()
    };
    let mut report = ExponentReport {
        lambdas: lambdas.to_vec(),
        r,
        h,
        plunnecke: plunnecke_exponent(lambdas)?,
        bukh: bukh_exponent(lambdas)?,
        binbound: binbound_exponent(lambdas)?,
        decomposition_exponents: decompositions
            .iter()
            .map(|d| (d.algo.name().to_string(), d.exponent))
            .collect(),
        decompositions,
        skipped,
        main_theorem,
        size_condition,
        best: String::new(),
        best_exponent: Exponent::Exact(0),
        decomposition: lightest.expect("star solvers always succeed on a nonempty tuple"),
    };

    let mut candidates = report.guaranteed_bounds();
    if let Some(m) = main_theorem.filter(|m| m.applicable) {
        candidates.push(("main-theorem".to_string(), Exponent::Approx(m.value)));
    }
    // First minimum wins, so ties resolve in the fixed candidate order.
    let (label, value) = candidates
        .into_iter()
        .reduce(|best, c| if c.1.total_cmp(best.1) == Ordering::Less { c } else { best })
        .unwrap();
    report.best = label;
    report.best_exponent = value;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::{star_decomposition, Orientation};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0)
    }

    #[test]
    fn plunnecke_examples() {
        assert_eq!(plunnecke_exponent(&[3, 5, 6]).unwrap(), Exponent::Exact(14));
        assert_eq!(plunnecke_exponent(&[1, 1]).unwrap(), Exponent::Exact(2));
        assert_eq!(plunnecke_exponent(&[-7, 2]).unwrap(), Exponent::Exact(9));
        assert!(plunnecke_exponent(&[]).is_err());
        assert!(matches!(plunnecke_exponent(&[i64::MIN, i64::MIN]).unwrap(), Exponent::Approx(_)));
    }

    #[test]
    fn bukh_examples() {
        assert!(close(bukh_exponent(&[1]).unwrap(), 19.0, 1e-12));
        let expected = 7.0 + 12.0 * (4f64.log2() + 6f64.log2() + 7f64.log2());
        assert!(close(bukh_exponent(&[3, 5, 6]).unwrap(), expected, 1e-12));
        assert!(close(expected, 95.7077, 1e-5));
        assert!(close(bukh_exponent(&[15; 16]).unwrap(), 775.0, 1e-12));
        assert!(close(bukh_exponent(&[65535; 16]).unwrap(), 3079.0, 1e-12));
    }

    #[test]
    fn binbound_examples() {
        assert_eq!(binbound_exponent(&[3, 5, 6]).unwrap(), 39);
        assert_eq!(binbound_exponent(&[1]).unwrap(), 9);
        assert_eq!(binbound_exponent(&[1 << 15]).unwrap(), 159);
        assert_eq!(binbound_exponent(&[65535; 16]).unwrap(), 669);
    }

    #[test]
    fn decomposition_exponent_examples() {
        let g = build_digit_graph(&[3, 5, 6]).unwrap();
        for o in [Orientation::Rows, Orientation::Columns] {
            let d = star_decomposition(g.graph(), o).unwrap();
            assert_eq!(decomposition_exponent(&[3, 5, 6], &d).unwrap(), 45);
        }
        let whole = Decomposition::new(vec![Biclique::new((0..16).collect(), (0..16).collect())]);
        assert_eq!(decomposition_exponent(&[65535; 16], &whole).unwrap(), 221);
        let single = Decomposition::new(vec![Biclique::new(vec![0], vec![0])]);
        assert_eq!(decomposition_exponent(&[1], &single).unwrap(), 11);
        assert_eq!(decomposition_exponent(&[3], &single), Err(ExponentError::InvalidDecomposition));
    }

    #[test]
    fn sharp_exponent_never_exceeds_relaxed() {
        let whole = Decomposition::new(vec![Biclique::new((0..16).collect(), (0..16).collect())]);
        // 7 + 150 + 32 + 1 + 16
        assert_eq!(sharp_decomposition_exponent(&[65535; 16], &whole).unwrap(), 206);
        let g = build_digit_graph(&[3, 5, 6]).unwrap();
        let d = star_decomposition(g.graph(), Orientation::Columns).unwrap();
        assert_eq!(sharp_decomposition_exponent(&[3, 5, 6], &d).unwrap(), 7 + 20 + 6 + 3 + 6);
    }

    #[test]
    fn main_theorem_examples() {
        let m = main_theorem_exponent(2, 3).unwrap();
        assert!(close(m.value, 42.0 / 5f64.ln(), 1e-12) && close(m.value, 26.096, 1e-4));
        assert!(!m.applicable);
        let m = main_theorem_exponent(999, 1000).unwrap();
        assert!(close(m.value, 6_993_000.0 / 1999f64.ln(), 1e-12));
        assert!(close(m.value, 920_083.0, 1e-5));
        assert!(m.applicable);
        let m = main_theorem_exponent(15, 16).unwrap();
        assert!(close(m.value, 489.23, 1e-4));
        assert!(!m.applicable);
        assert!(main_theorem_exponent(1, 1).is_err());
        assert!(main_theorem_exponent(0, 5).is_err());
    }

    #[test]
    fn report_examples() {
        let p = SolverParams::default();
        let rep = exponent_report(&[3, 5, 6], &p).unwrap();
        assert_eq!(rep.best, "plunnecke");
        assert_eq!(rep.best_exponent, Exponent::Exact(14));
        assert_eq!(rep.binbound, 39);
        assert_eq!(rep.decomposition_exponents.values().copied().collect::<Vec<_>>(), vec![45; 4]);

        let rep = exponent_report(&[65535; 16], &p).unwrap();
        assert_eq!(rep.plunnecke, Exponent::Exact(1_048_560));
        assert_eq!(rep.binbound, 669);
        assert_eq!(rep.decomposition_exponents["greedy"], 221);
        assert!(rep.skipped.contains_key("exact"));
        assert_eq!(rep.best, "decomposition/greedy");
        assert_eq!(rep.best_exponent, Exponent::Exact(221));
        assert_eq!(rep.decomposition.gammas, vec![65535]);
        let m = rep.main_theorem.unwrap();
        assert!(close(m.value, 489.23, 1e-4) && !m.applicable && !rep.size_condition);

        let rep = exponent_report(&[1], &p).unwrap();
        assert_eq!(rep.best, "plunnecke");
        assert_eq!(rep.best_exponent, Exponent::Exact(1));
        assert!(rep.main_theorem.is_none());
    }

    #[test]
    fn report_json_round_trip() {
        let rep = exponent_report(&[3, -5, 6, 12], &SolverParams::default()).unwrap();
        let text = serde_json::to_string(&rep).unwrap();
        let back: ExponentReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(rep.csv_row().len(), ExponentReport::CSV_HEADER.len());
    }

    #[test]
    fn exponent_ordering_is_exact_on_integers() {
        let big = Exponent::Exact(u64::MAX);
        let near = Exponent::Exact(u64::MAX - 1);
        assert_eq!(near.total_cmp(big), Ordering::Less);
        assert_eq!(Exponent::Approx(2.5).total_cmp(Exponent::Exact(3)), Ordering::Less);
        assert_eq!(Exponent::Approx(4.0).as_integer(), Some(4));
        assert_eq!(Exponent::Approx(4.5).as_integer(), None);
    }
}
