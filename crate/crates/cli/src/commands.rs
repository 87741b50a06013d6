use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use serde::Serialize;

use dilate_core::biclique::{
    decompose as run_solver, tuza_budget, validate_decomposition, DecompError, GreedyParams,
    ValidationReport,
};
use dilate_core::digits::{DigitError, DigitGraphFile};
use dilate_core::exponents::{
    binbound_exponent, bukh_exponent, exponent_report, main_theorem_exponent, plunnecke_exponent,
    Exponent, ExponentError, ExponentReport, MainTheoremBound,
};
use dilate_core::graph::GraphFile;
use dilate_core::sets::{GapSpec, SetArith, SetError};
use dilate_core::verify::{check_gap, run_suite_with, Suite, VerifyConfig, VerifyError};
use dilate_core::{build_digit_graph, Algo, BipartiteGraph, Decomposition, DigitGraph, SolverParams};

use crate::args::{
    parse_list, AlgoArg, BoundsArgs, CoefficientArgs, DecomposeArgs, Format, GapArgs, Method,
    SolverArgs, VerifyArgs,
};
use crate::render::{truncated_list, Palette, Table};
use crate::{Failure, EXIT_LIMIT, EXIT_USAGE, EXIT_VIOLATION};

/// Computation limits map to [`EXIT_LIMIT`]; everything else is a usage or
/// input error.
pub fn exit_code_of(e: &anyhow::Error) -> u8 {
    fn set_limit(e: &SetError) -> bool {
        matches!(e, SetError::CapExceeded { .. } | SetError::Overflow(_))
    }
    fn decomp_limit(e: &DecompError) -> bool {
        matches!(e, DecompError::TimeBudget { .. } | DecompError::TooManyEdges { .. })
    }
    fn exponent_limit(e: &ExponentError) -> bool {
        match e {
            ExponentError::Solver(d) => decomp_limit(d),
            ExponentError::Overflow => true,
            _ => false,
        }
    }
    for cause in e.chain() {
        let limit = if let Some(x) = cause.downcast_ref::<SetError>() {
            set_limit(x)
        } else if let Some(x) = cause.downcast_ref::<DecompError>() {
            decomp_limit(x)
        } else if let Some(x) = cause.downcast_ref::<ExponentError>() {
            exponent_limit(x)
        } else if let Some(x) = cause.downcast_ref::<VerifyError>() {
            match x {
                VerifyError::TooManyInstances { .. } => true,
                VerifyError::Set(s) => set_limit(s),
                VerifyError::Exponent(x) => exponent_limit(x),
                _ => false,
            }
        } else {
            false
        };
        if limit {
            return EXIT_LIMIT;
        }
    }
    EXIT_USAGE
}

fn usage(e: anyhow::Error) -> Failure {
    Failure { code: EXIT_USAGE, error: e }
}

fn coefficients(c: &CoefficientArgs) -> Result<Vec<i64>, Failure> {
    let text = c.lambdas.as_deref().ok_or_else(|| usage(anyhow!("--lambdas is required")))?;
    let one = parse_list::<i64>(text, "coefficient").map_err(usage)?;
    if c.repeat == 0 {
        return Err(usage(anyhow!("--repeat must be at least 1")));
    }
    let all: Vec<i64> = one.iter().copied().cycle().take(one.len() * c.repeat).collect();
    if let Some(pos) = all.iter().position(|&l| l == 0) {
        return Err(usage(DigitError::ZeroCoefficient { position: pos + 1 }.into()));
    }
    Ok(all)
}

fn solver_params(s: &SolverArgs) -> Result<SolverParams, Failure> {
    if s.max_q == 0 || s.beam_width == 0 {
        return Err(usage(anyhow!("--max-q and --beam-width must be positive")));
    }
    let time_budget = match s.time_budget {
        None => None,
        Some(t) if t.is_finite() && t > 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(usage(anyhow!("--time-budget must be positive (got {t})"))),
    };
    let mut p = SolverParams {
        greedy: GreedyParams {
            max_q: s.max_q,
            beam_width: s.beam_width,
            time_budget,
            restarts: s.restarts,
            seed: s.seed,
        },
        ..SolverParams::default()
    };
    p.exact.max_edges = s.max_edges;
    Ok(p)
}

fn algo(a: AlgoArg) -> Algo {
    match a {
        AlgoArg::StarRows => Algo::StarRows,
        AlgoArg::StarCols => Algo::StarCols,
        AlgoArg::Greedy => Algo::Greedy,
        AlgoArg::Exact => Algo::Exact,
    }
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T, format: Format) -> anyhow::Result<String> {
    let mut s = match format {
        Format::Jsonl => serde_json::to_string(value)?,
        _ => serde_json::to_string_pretty(value)?,
    };
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn palette(output: &Option<PathBuf>) -> Palette {
    Palette::detect(output.is_none())
}

#[derive(Serialize)]
struct MethodOutput {
    lambdas: Vec<i64>,
    method: String,
    label: String,
    exponent: Exponent,
    #[serde(skip_serializing_if = "Option::is_none")]
    main_theorem: Option<MainTheoremBound>,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Plunnecke => "plunnecke",
        Method::Bukh => "bukh",
        Method::Binbound => "binbound",
        Method::Decomposition => "decomposition",
        Method::MainTheorem => "main-theorem",
    }
}

fn single_method(lambdas: &[i64], m: Method, p: &SolverParams) -> Result<MethodOutput, Failure> {
    let (label, exponent, main) = match m {
        Method::Plunnecke => ("plunnecke".into(), plunnecke_exponent(lambdas)?, None),
        Method::Bukh => ("bukh".into(), Exponent::Approx(bukh_exponent(lambdas)?), None),
        Method::Binbound => ("binbound".into(), Exponent::Exact(binbound_exponent(lambdas)?), None),
        Method::Decomposition => {
            let rep = exponent_report(lambdas, p)?;
            let best = rep
                .decompositions
                .iter()
                .min_by_key(|d| d.exponent)
                .expect("star solvers always run");
            (format!("decomposition/{}", best.algo), Exponent::Exact(best.exponent), None)
        }
        Method::MainTheorem => {
            let g = build_digit_graph(lambdas)?;
            let mt = main_theorem_exponent(g.r() as u64, g.h() as u64)?;
            ("main-theorem".into(), Exponent::Approx(mt.value), Some(mt))
        }
    };
    Ok(MethodOutput {
        lambdas: lambdas.to_vec(),
        method: method_name(m).into(),
        label,
        exponent,
        main_theorem: main,
    })
}

fn bounds_table(rep: &ExponentReport, pal: &Palette) -> String {
    let mut t = Table::default();
    let lambdas = truncated_list(&rep.lambdas, 24);
    t.row(["lambdas".to_string(), format!("{lambdas}  (r = {}, h = {})", rep.r, rep.h)]);
    t.row([pal.bold("bound"), pal.bold("exponent")]);
    let mark = |label: &str, value: String| {
        if label == rep.best {
            pal.good(&format!("{value}  *"))
        } else {
            value
        }
    };
    for (label, e) in rep.guaranteed_bounds() {
        let extra = rep
            .decompositions
            .iter()
            .find(|d| label == format!("decomposition/{}", d.algo))
            .map(|d| format!("  (weight {}, q {}, sharp {})", d.weight, d.q, d.sharp_exponent))
            .unwrap_or_default();
        t.row([label.clone(), mark(&label, format!("{e}{extra}"))]);
    }
    for (name, why) in &rep.skipped {
        t.row([format!("decomposition/{name}"), format!("skipped: {why}")]);
    }
    match rep.main_theorem {
        Some(m) => {
            let note = if m.applicable {
                "size condition holds; needs r, h sufficiently large"
            } else {
                "not applicable: size condition fails"
            };
            t.row(["main-theorem".to_string(), mark("main-theorem", format!("{:.6}  ({note})", m.value))]);
        }
        None => {
            t.row(["main-theorem", "undefined for r = 0 or r + h < 3"]);
        }
    }
    t.row(["best".to_string(), pal.bold(&format!("{} = {}", rep.best, rep.best_exponent))]);
    t.render()
}

pub fn bounds(a: &BoundsArgs) -> Result<u8, Failure> {
    let lambdas = coefficients(&a.coefficients)?;
    let params = solver_params(&a.solver)?;
    let out = a.output.as_deref();
    if let Some(m) = a.method {
        let r = single_method(&lambdas, m, &params)?;
        let text = match a.format {
            Format::Json | Format::Jsonl => json(&r, a.format)?,
            Format::Csv => csv_text(
                &["lambdas", "method", "label", "exponent"],
                &[vec![
                    truncated_list(&r.lambdas, usize::MAX),
                    r.method.clone(),
                    r.label.clone(),
                    r.exponent.to_string(),
                ]],
            )?,
            Format::Table => {
                let mut t = Table::default();
                t.row(["lambdas".to_string(), truncated_list(&r.lambdas, 24)]);
                t.row([r.label.clone(), r.exponent.to_string()]);
                if let Some(mt) = r.main_theorem {
                    t.row(["applicable".to_string(), mt.applicable.to_string()]);
                }
                t.render()
            }
        };
        emit(out, &text)?;
        return Ok(0);
    }
    let rep = exponent_report(&lambdas, &params)?;
    let text = match a.format {
        Format::Json | Format::Jsonl => json(&rep, a.format)?,
        Format::Csv => csv_text(&ExponentReport::CSV_HEADER, &[rep.csv_row()])?,
        Format::Table => bounds_table(&rep, &palette(&a.output)),
    };
    emit(out, &text)?;
    Ok(0)
}

enum Source {
    Digits(DigitGraph),
    Plain(BipartiteGraph),
}

fn read_graph(path: &Path) -> anyhow::Result<Source> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("lambdas").is_some() {
        let f: DigitGraphFile = serde_json::from_value(value)?;
        Ok(Source::Digits(DigitGraph::try_from(f)?))
    } else {
        let f: GraphFile = serde_json::from_value(value)?;
        Ok(Source::Plain(BipartiteGraph::try_from(f)?))
    }
}

#[derive(Serialize)]
struct DecomposeSummary {
    algo: Algo,
    left: usize,
    right: usize,
    edges: usize,
    weight: u64,
    q: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    gammas: Vec<u64>,
    /// `7 + 10 r + 2 weight`, digit graphs only.
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent: Option<u64>,
    valid: bool,
    validation: ValidationReport,
    decomposition: Decomposition,
}

pub fn decompose(a: &DecomposeArgs) -> Result<u8, Failure> {
    let params = solver_params(&a.solver)?;
    let source = match (&a.graph, &a.coefficients.lambdas) {
        (Some(path), _) => read_graph(path).map_err(usage)?,
        (None, Some(_)) => Source::Digits(build_digit_graph(&coefficients(&a.coefficients)?)?),
        (None, None) => return Err(usage(anyhow!("give either --lambdas or --graph"))),
    };
    let algo = algo(a.algo);
    let g = match &source {
        Source::Digits(d) => d.graph(),
        Source::Plain(g) => g,
    };
    let mut d = run_solver(g, algo, &params)?;
    let (validation, exponent) = match &source {
        Source::Digits(dg) => {
            d = d.with_gammas();
            let v = validate_decomposition(dg, &d);
            (v, Some(7 + 10 * dg.r() as u64 + 2 * d.weight))
        }
        Source::Plain(g) => (validate_decomposition(g, &d), None),
    };
    if let Some(path) = &a.output {
        emit(Some(path), &json(&d, Format::Json)?)?;
    }
    let summary = DecomposeSummary {
        algo,
        left: g.left_len(),
        right: g.right_len(),
        edges: g.edge_count(),
        weight: d.weight,
        q: d.len(),
        gammas: d.gammas.clone(),
        exponent,
        valid: validation.is_valid(),
        validation,
        decomposition: d,
    };
    let text = match a.format {
        Format::Json | Format::Jsonl => json(&summary, a.format)?,
        Format::Csv => csv_text(
            &["algo", "left", "right", "edges", "weight", "q", "valid"],
            &[vec![
                algo.to_string(),
                summary.left.to_string(),
                summary.right.to_string(),
                summary.edges.to_string(),
                summary.weight.to_string(),
                summary.q.to_string(),
                summary.valid.to_string(),
            ]],
        )?,
        Format::Table => {
            let pal = Palette::detect(true);
            let mut t = Table::default();
            t.row(["algo".to_string(), algo.to_string()]);
            t.row([
                "graph".to_string(),
                format!("{} x {}, {} edges", summary.left, summary.right, summary.edges),
            ]);
            t.row(["weight".to_string(), pal.bold(&summary.weight.to_string())]);
            t.row(["q".to_string(), summary.q.to_string()]);
            if !summary.gammas.is_empty() {
                t.row(["gammas".to_string(), truncated_list(&summary.gammas, 24)]);
            }
            if let Some(e) = exponent {
                t.row(["exponent".to_string(), e.to_string()]);
            }
            if let Ok(b) = tuza_budget(summary.left as u64, summary.right as u64) {
                t.row(["tuza budget".to_string(), format!("{:.2}", b.budget)]);
            }
            let verdict = if summary.valid { pal.good("valid") } else { pal.bad("INVALID") };
            t.row(["validation".to_string(), verdict]);
            t.render()
        }
    };
    emit(None, &text)?;
    Ok(if summary.valid { 0 } else { EXIT_VIOLATION })
}

fn verify_config(a: &VerifyArgs) -> VerifyConfig {
    let mut c = VerifyConfig::default();
    macro_rules! take {
        ($($field:ident <- $flag:ident),*) => {
            $(if let Some(v) = a.$flag { c.$field = v; })*
        };
    }
    take!(
        universe <- universe,
        max_set_size <- max_set_size,
        max_h <- max_h,
        lambda_max <- lambda_max,
        trials <- trials,
        seed <- seed,
        max_fold <- max_fold,
        max_sets <- max_sets,
        max_pair_fold <- max_pair_fold,
        max_instances <- max_instances,
        cap <- cap,
        exact_max_edges <- max_edges
    );
    c.exhaustive = a.exhaustive;
    c
}

pub fn verify(a: &VerifyArgs) -> Result<u8, Failure> {
    let suite: Suite = a.suite.parse().map_err(|e: VerifyError| usage(e.into()))?;
    let cfg = verify_config(a);
    cfg.validate().map_err(|e| usage(e.into()))?;

    let mut log = match &a.log {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display())).map_err(usage)?,
        )),
        None => None,
    };
    let mut stream: Option<Box<dyn Write>> = match (a.format, &a.output) {
        (Format::Jsonl, Some(p)) => Some(Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display())).map_err(usage)?,
        ))),
        (Format::Jsonl, None) => Some(Box::new(BufWriter::new(std::io::stdout().lock()))),
        _ => None,
    };
    let io = |e: std::io::Error| VerifyError::Log(e.to_string());
    let report = run_suite_with(suite, &cfg, |rec| {
        let line = serde_json::to_string(rec).map_err(|e| VerifyError::Log(e.to_string()))?;
        if let Some(w) = log.as_mut() {
            writeln!(w, "{line}").map_err(io)?;
        }
        if let Some(w) = stream.as_mut() {
            writeln!(w, "{line}").map_err(io)?;
        }
        Ok(())
    })?;
    if let Some(mut w) = log {
        w.flush().context("flushing trial log")?;
    }
    if let Some(mut w) = stream {
        w.flush()?;
    }

    let pal = palette(&a.output);
    match a.format {
        Format::Jsonl => {}
        Format::Json => emit(a.output.as_deref(), &json(&report, a.format)?)?,
        Format::Csv => emit(
            a.output.as_deref(),
            &csv_text(
                &["suite", "instances", "trials", "holds", "violated", "indeterminate", "min_slack"],
                &[vec![
                    suite.to_string(),
                    report.instances.to_string(),
                    report.trials.to_string(),
                    report.holds.to_string(),
                    report.violated.to_string(),
                    report.indeterminate.to_string(),
                    report.min_slack.map_or(String::new(), |s| s.to_string()),
                ]],
            )?,
        )?,
        Format::Table => {
            let mut t = Table::default();
            let mode = if cfg.exhaustive { "exhaustive" } else { "random" };
            t.row(["suite".to_string(), format!("{suite} ({mode}, seed {})", cfg.seed)]);
            t.row(["instances".to_string(), report.instances.to_string()]);
            t.row(["checks".to_string(), report.trials.to_string()]);
            t.row(["holds".to_string(), report.holds.to_string()]);
            let v = report.violated.to_string();
            t.row(["violated".to_string(), if report.violated == 0 { pal.good(&v) } else { pal.bad(&v) }]);
            t.row(["indeterminate".to_string(), report.indeterminate.to_string()]);
            t.row([
                "min slack".to_string(),
                report.min_slack.map_or("-".to_string(), |s| format!("{s:.9}")),
            ]);
            emit(a.output.as_deref(), &t.render())?;
        }
    }
    Ok(if report.is_clean() { 0 } else { EXIT_VIOLATION })
}

pub fn gap(a: &GapArgs) -> Result<u8, Failure> {
    let spec = GapSpec {
        base: a.base,
        diffs: parse_list(&a.diffs, "difference").map_err(usage)?,
        lengths: parse_list(&a.lengths, "length").map_err(usage)?,
    };
    spec.validate().map_err(|e| usage(e.into()))?;
    let lambdas = match &a.lambdas {
        Some(text) => {
            let l: Vec<i64> = parse_list(text, "coefficient").map_err(usage)?;
            if let Some(pos) = l.iter().position(|&x| x == 0) {
                return Err(usage(DigitError::ZeroCoefficient { position: pos + 1 }.into()));
            }
            Some(l)
        }
        None => None,
    };
    let arith = match a.cap {
        Some(0) => bail_usage("--cap must be positive")?,
        Some(c) => SetArith::with_cap(c),
        None => SetArith::default(),
    };
    let check = check_gap(&arith, &spec, lambdas.as_deref())?;
    let violated = (check.proper && !check.doubling_holds)
        || check.dilate.as_ref().is_some_and(|d| d.applicable && !d.holds);

    let text = match a.format {
        Format::Json | Format::Jsonl => json(&check, a.format)?,
        Format::Csv => csv_text(
            &["size", "proper", "doubled_size", "doubling", "doubling_holds", "dilate_lhs", "dilate_rhs", "dilate_holds"],
            &[vec![
                check.size.to_string(),
                check.proper.to_string(),
                check.doubled_size.to_string(),
                check.doubling.to_string(),
                check.doubling_holds.to_string(),
                check.dilate.as_ref().map_or(String::new(), |d| d.lhs.to_string()),
                check.dilate.as_ref().map_or(String::new(), |d| d.rhs.to_string()),
                check.dilate.as_ref().map_or(String::new(), |d| d.holds.to_string()),
            ]],
        )?,
        Format::Table => {
            let pal = palette(&a.output);
            let k = spec.dimension();
            let mut t = Table::default();
            t.row(["elements".to_string(), truncated_list(check.elements.as_slice(), 32)]);
            t.row(["size".to_string(), check.size.to_string()]);
            t.row(["proper".to_string(), check.proper.to_string()]);
            t.row([
                "|P+P|".to_string(),
                format!("{} (at most {})", check.doubled_size, check.doubled_bound),
            ]);
            t.row([
                "K".to_string(),
                format!("{} <= 2^{k}: {}", check.doubling, pal.verdict(check.doubling_holds)),
            ]);
            if let Some(d) = &check.dilate {
                let total: u64 = d.lambdas.iter().map(|l| l.unsigned_abs()).sum();
                let note = if d.applicable { "" } else { "  (not proper; bound not claimed)" };
                t.row([
                    "dilate sum".to_string(),
                    format!("{} <= {total}^{k} * {} = {}: {}{note}", d.lhs, check.size, d.rhs, pal.verdict(d.holds)),
                ]);
            }
            t.render()
        }
    };
    emit(a.output.as_deref(), &text)?;
    Ok(if violated { EXIT_VIOLATION } else { 0 })
}

fn bail_usage<T>(msg: &str) -> Result<T, Failure> {
    Err(usage(anyhow!("{msg}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_map_to_exit_two() {
        let e: anyhow::Error = DecompError::TooManyEdges { edges: 6, max_edges: 2 }.into();
        assert_eq!(exit_code_of(&e), EXIT_LIMIT);
        let e: anyhow::Error = VerifyError::Set(SetError::CapExceeded { size: 9, cap: 1 }).into();
        assert_eq!(exit_code_of(&e), EXIT_LIMIT);
        let e: anyhow::Error = DigitError::ZeroCoefficient { position: 1 }.into();
        assert_eq!(exit_code_of(&e), EXIT_USAGE);
        let e = anyhow!("plain");
        assert_eq!(exit_code_of(&e), EXIT_USAGE);
    }

    #[test]
    fn repeat_expands_the_whole_list() {
        let c = CoefficientArgs { lambdas: Some("1,-2".into()), repeat: 3 };
        assert_eq!(coefficients(&c).unwrap(), vec![1, -2, 1, -2, 1, -2]);
        let c = CoefficientArgs { lambdas: Some("0,2".into()), repeat: 1 };
        let f = coefficients(&c).unwrap_err();
        assert!(f.error.to_string().contains("#1"));
    }
}
