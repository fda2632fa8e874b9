//! Command-line front end.
//!
//! Every command produces a [`Report`]: the recorded inputs, the computed
//! outputs, a list of named PASS/FAIL checks and a fixed-column table used
//! for CSV output. Exit codes: 0 all checks pass, 1 a check failed, 2 invalid
//! input or a violated validity gate, 3 numeric failure.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    dependent_msq_bracket, exponential_quantile, gumbel_quantile, headline_bound,
    independent_msq_bracket, l_alpha, lower_bound_certificate, LowerBoundCertificate, MaxQuery,
};
use crate::covariance::{
    best_of_random_orderings, decompose, eigen_bounds, natural_ordering, CovarianceMatrix,
};
use crate::error::{Error, Result};
use crate::gaussian::inequality_grid;
use crate::montecarlo::{
    certify_hi_inequality, certify_lower_bound, certify_upper_bounds, gumbel_coupling_test,
    SimulationPlan, Target, Verdict,
};
use crate::process::{stationary_lower_bound, stride_sweep, window_covariance, WoldModel};
use crate::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// How variables are ordered before the sequential decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingArg {
    Natural,
    /// Natural order plus `K` seeded random orderings; keep the largest
    /// threshold.
    BestOf(usize),
}

impl FromStr for OrderingArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "natural" {
            return Ok(OrderingArg::Natural);
        }
        s.strip_prefix("best-of:")
            .and_then(|k| k.parse().ok())
            .map(OrderingArg::BestOf)
            .ok_or_else(|| format!("expected `natural` or `best-of:K`, got {s:?}"))
    }
}

impl fmt::Display for OrderingArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingArg::Natural => write!(f, "natural"),
            OrderingArg::BestOf(k) => write!(f, "best-of:{k}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "maxbound",
    version,
    about = "Bounds on the maximum of dependent Gaussian variables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Treat regime warnings and invalid scan points as failures.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Omit the timestamp so identical runs give byte-identical reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower-bound certificate from a covariance file or eigenvalue pair.
    Bound(BoundArgs),
    /// M_n^2 brackets over a probability grid.
    Bracket(BracketArgs),
    /// Monte Carlo certification of the bounds for one target.
    Certify(CertifyArgs),
    /// Certificate thresholds across n or alpha.
    Scan(ScanArgs),
    /// Lower bound for a stationary process, optionally sweeping the stride.
    ProcessBound(ProcessBoundArgs),
    /// Grid sweeps of the tail inversion inequalities and the Mills bracket.
    InequalityGrid(GridArgs),
}

/// Comma-separated list of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

impl FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("invalid number {t:?}"))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(FloatList)
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Covariance file (one row per line).
    #[arg(long, conflicts_with_all = ["lambda_min", "lambda_max"])]
    pub cov: Option<PathBuf>,
    #[arg(long, default_value = "natural")]
    pub ordering: OrderingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[arg(long)]
    pub n: u64,
    /// Comma-separated probabilities (default 0.05, 0.10, ..., 0.95).
    #[arg(long)]
    pub probs: Option<FloatList>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Covariance file; without --cov or --process the target is n i.i.d.
    /// standard normals.
    #[arg(long, conflicts_with = "process")]
    pub cov: Option<PathBuf>,
    /// Process spec file; the target is a window of n consecutive values.
    #[arg(long)]
    pub process: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub reps: u64,
    /// Thresholds A for the union-bound check.
    #[arg(long, default_value = "2,2.5,3")]
    pub thresholds: FloatList,
    #[arg(long, default_value = "natural")]
    pub ordering: OrderingArg,
    /// A for the product-inequality check (requires --hi-b).
    #[arg(long, requires = "hi_b", allow_hyphen_values = true)]
    pub hi_a: Option<f64>,
    /// B <= 0 for the product-inequality check.
    #[arg(long, requires = "hi_a", allow_hyphen_values = true)]
    pub hi_b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    N,
    Alpha,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub over: ScanAxis,
    /// Comma-separated values of the scanned quantity.
    #[arg(long)]
    pub values: FloatList,
    /// Fixed n when scanning alpha.
    #[arg(long)]
    pub n: Option<u64>,
    /// Fixed alpha when scanning n.
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct ProcessBoundArgs {
    #[arg(long)]
    pub process: PathBuf,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    /// Also evaluate every stride 1..=K and report the best.
    #[arg(long)]
    pub sweep: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub verdict: Verdict,
}

impl Check {
    fn new(check: impl Into<String>, verdict: Verdict) -> Self {
        Check {
            check: check.into(),
            verdict,
        }
    }
}

/// Fixed-column table emitted for `--format csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub library_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub outputs: Value,
    pub verdicts: Vec<Check>,
    pub passed: bool,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    fn new(command: &'static str, inputs: Value, outputs: Value, table: Table) -> Self {
        Report {
            command,
            library_version: VERSION,
            timestamp: None,
            seed: None,
            inputs,
            outputs,
            verdicts: Vec::new(),
            passed: true,
            table,
        }
    }

    fn with_checks(mut self, checks: Vec<Check>) -> Self {
        self.passed = checks.iter().all(|c| c.verdict.passed());
        self.verdicts = checks;
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.table.header).map_err(io)?;
        for row in &self.table.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable value")
}

fn cert_row(table: &mut Table, label: &str, c: &LowerBoundCertificate) {
    table.push(vec![
        label.to_string(),
        c.n.to_string(),
        num(c.alpha),
        num(c.l_alpha),
        num(c.sigma),
        num(c.tau),
        num(c.threshold),
        num(c.guaranteed_tail),
    ]);
}

const CERT_COLUMNS: [&str; 8] = [
    "source",
    "n",
    "alpha",
    "l_alpha",
    "sigma",
    "tau",
    "threshold",
    "guaranteed_tail",
];

fn sigma_tau_for(
    c: &CovarianceMatrix,
    ordering: OrderingArg,
    seed: u64,
    alpha: f64,
) -> Result<(Vec<usize>, f64, f64)> {
    match ordering {
        OrderingArg::Natural => {
            let order = natural_ordering(c.dim());
            let (s, t) = decompose(c, &order)?.sigma_tau();
            Ok((order, s, t))
        }
        OrderingArg::BestOf(k) => {
            let choice = best_of_random_orderings(c, k, seed, alpha)?;
            Ok((choice.ordering, choice.sigma, choice.tau))
        }
    }
}

fn run_bound(args: &BoundArgs) -> Result<Report> {
    let mut table = Table::new(&CERT_COLUMNS);
    if let Some(path) = &args.cov {
        let c = CovarianceMatrix::read_file(path)?;
        let n = c.dim() as u64;
        if let Some(given) = args.n {
            if given != n {
                return Err(Error::Domain(format!(
                    "--n {given} does not match the covariance dimension {n}"
                )));
            }
        }
        let (ordering, sigma, tau) = sigma_tau_for(&c, args.ordering, args.seed, args.alpha)?;
        let sequential = lower_bound_certificate(n, args.alpha, sigma, tau)?;
        let (lmin, lmax) = eigen_bounds(&c)?;
        let eigen = lower_bound_certificate(n, args.alpha, lmin.sqrt(), lmax.sqrt())?;
        cert_row(&mut table, "sequential", &sequential);
        cert_row(&mut table, "eigenvalue", &eigen);
        let inputs = json!({
            "cov": path.display().to_string(),
            "n": n,
            "alpha": args.alpha,
            "ordering": args.ordering.to_string(),
        });
        let outputs = json!({
            "ordering": ordering,
            "lambda_min": lmin,
            "lambda_max": lmax,
            "certificate": sequential,
            "eigenvalue_certificate": eigen,
        });
        let mut report = Report::new("bound", inputs, outputs, table);
        if matches!(args.ordering, OrderingArg::BestOf(_)) {
            report.seed = Some(args.seed);
        }
        return Ok(report);
    }

    let (n, lmin, lmax) = match (args.n, args.lambda_min, args.lambda_max) {
        (Some(n), Some(lo), Some(hi)) => (n, lo, hi),
        _ => {
            return Err(Error::Domain(
                "bound needs either --cov FILE or all of --n, --lambda-min, --lambda-max".into(),
            ))
        }
    };
    let cert = if args.alpha == 0.25 {
        headline_bound(n, lmin, lmax)?
    } else {
        if !(lmin > 0.0 && lmax >= lmin) {
            return Err(Error::Domain(format!(
                "need 0 < lambda_min <= lambda_max, got {lmin}, {lmax}"
            )));
        }
        lower_bound_certificate(n, args.alpha, lmin.sqrt(), lmax.sqrt())?
    };
    cert_row(&mut table, "eigenvalue", &cert);
    let inputs = json!({
        "n": n,
        "alpha": args.alpha,
        "lambda_min": lmin,
        "lambda_max": lmax,
    });
    let outputs = json!({ "certificate": cert });
    Ok(Report::new("bound", inputs, outputs, table))
}

fn default_probs() -> Vec<f64> {
    (1..=19).map(|i| f64::from(i) * 0.05).collect()
}

fn run_bracket(args: &BracketArgs, strict: bool) -> Result<Report> {
    let q = MaxQuery::new(args.n)?;
    let probs = args
        .probs
        .clone()
        .map(|l| l.0)
        .unwrap_or_else(default_probs);
    let mut table = Table::new(&[
        "p",
        "gumbel",
        "msq_lower",
        "msq_upper",
        "regime_ok",
        "exponential",
        "dependent_msq_upper",
    ]);
    let mut rows = Vec::new();
    let mut regime_failures = 0;
    for &p in &probs {
        let g = gumbel_quantile(p)?;
        let e = exponential_quantile(p)?;
        let (lower, upper, regime_ok) = match independent_msq_bracket(&q, g) {
            Ok(b) => (b.msq_lower, Some(b.msq_upper), b.regime_ok),
            Err(Error::Domain(_)) => (None, None, false),
            Err(err) => return Err(err),
        };
        let dependent = dependent_msq_bracket(&q, e)?;
        if !regime_ok {
            regime_failures += 1;
        }
        table.push(vec![
            num(p),
            num(g),
            opt_num(lower),
            opt_num(upper),
            regime_ok.to_string(),
            num(e),
            num(dependent.msq_upper),
        ]);
        rows.push(json!({
            "p": p,
            "gumbel": g,
            "msq_lower": lower,
            "msq_upper": upper,
            "regime_ok": regime_ok,
            "exponential": e,
            "dependent_msq_upper": dependent.msq_upper,
        }));
    }
    let inputs = json!({ "n": args.n, "probs": probs });
    let outputs = json!({ "level": q.level, "rows": rows });
    let mut checks = Vec::new();
    if strict {
        checks.push(Check::new(
            "regime M_n >= 2 at every p",
            Verdict::from_pass(regime_failures == 0),
        ));
    }
    Ok(Report::new("bracket", inputs, outputs, table).with_checks(checks))
}

fn run_certify(args: &CertifyArgs) -> Result<Report> {
    let (target_desc, c, iid) = match (&args.cov, &args.process) {
        (Some(path), None) => {
            let c = CovarianceMatrix::read_file(path)?;
            if let Some(n) = args.n {
                if n != c.dim() as u64 {
                    return Err(Error::Domain(format!(
                        "--n {n} does not match the covariance dimension {}",
                        c.dim()
                    )));
                }
            }
            (
                json!({ "kind": "covariance", "path": path.display().to_string() }),
                c,
                false,
            )
        }
        (None, Some(path)) => {
            let n = args
                .n
                .ok_or_else(|| Error::Domain("--process needs --n (window length)".into()))?;
            let model = WoldModel::read_file(path)?;
            let c = window_covariance(&model, n as usize, 1)?;
            (
                json!({ "kind": "process", "path": path.display().to_string(), "model": model }),
                c,
                false,
            )
        }
        _ => {
            let n = args
                .n
                .ok_or_else(|| Error::Domain("i.i.d. target needs --n".into()))?;
            (
                json!({ "kind": "iid" }),
                CovarianceMatrix::identity(n as usize)?,
                true,
            )
        }
    };
    let n = c.dim() as u64;
    // gates first, before any sampling
    let (ordering, sigma, tau) = sigma_tau_for(&c, args.ordering, args.seed, args.alpha)?;
    let cert = lower_bound_certificate(n, args.alpha, sigma, tau)?;
    if let Some(b) = args.hi_b {
        if b > 0.0 {
            return Err(Error::Domain(format!(
                "the product inequality requires B <= 0, got {b}"
            )));
        }
    }

    let plan = SimulationPlan::new(args.seed, args.reps, Target::Covariance(c.clone()))
        .with_thresholds(args.thresholds.0.clone());
    let lower = certify_lower_bound(&cert, &plan)?;
    let upper = certify_upper_bounds(&plan)?;

    let mut checks = vec![Check::new("lower bound", lower.verdict)];
    let mut table = Table::new(&[
        "check",
        "threshold",
        "bound",
        "hits",
        "replications",
        "point",
        "ci_low",
        "ci_high",
        "verdict",
    ]);
    let est_row =
        |table: &mut Table, check: &str, bound: f64, e: &crate::TailEstimate, v: Verdict| {
            table.push(vec![
                check.to_string(),
                num(e.threshold),
                num(bound),
                e.hits.to_string(),
                e.replications.to_string(),
                num(e.point),
                num(e.ci_low),
                num(e.ci_high),
                format!("{v:?}").to_uppercase(),
            ]);
        };
    est_row(
        &mut table,
        "lower",
        cert.guaranteed_tail,
        &lower.estimate,
        lower.verdict,
    );
    for row in &upper.rows {
        checks.push(Check::new(
            format!("union bound at A={}", row.threshold),
            row.verdict,
        ));
        est_row(&mut table, "union", row.bound, &row.estimate, row.verdict);
    }

    let mut outputs = json!({
        "ordering": ordering,
        "lower_bound": lower,
        "upper_bounds": upper,
    });
    if iid {
        let coupling = gumbel_coupling_test(n, args.seed, args.reps)?;
        checks.push(Check::new("gumbel coupling", coupling.verdict));
        outputs["gumbel_coupling"] = to_value(&coupling);
    }
    if let (Some(a), Some(b)) = (args.hi_a, args.hi_b) {
        let hi = certify_hi_inequality(&c, &ordering, &plan, a, b)?;
        checks.push(Check::new("product inequality", hi.verdict));
        est_row(&mut table, "product", hi.rhs_exact, &hi.lhs, hi.verdict);
        outputs["product_inequality"] = to_value(&hi);
    }

    let inputs = json!({
        "target": target_desc,
        "n": n,
        "alpha": args.alpha,
        "replications": args.reps,
        "thresholds": args.thresholds.0,
        "ordering": args.ordering.to_string(),
        "hi_a": args.hi_a,
        "hi_b": args.hi_b,
    });
    let mut report = Report::new("certify", inputs, outputs, table).with_checks(checks);
    report.seed = Some(args.seed);
    Ok(report)
}

fn run_scan(args: &ScanArgs, strict: bool) -> Result<Report> {
    if args.values.0.is_empty() {
        return Err(Error::Domain("scan needs at least one value".into()));
    }
    let mut table = Table::new(&[
        "n",
        "alpha",
        "n_plus_l",
        "valid",
        "threshold",
        "guaranteed_tail",
    ]);
    let mut rows = Vec::new();
    let mut invalid = 0;
    for &value in &args.values.0 {
        let (n, alpha) = match args.over {
            ScanAxis::N => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Domain(format!(
                        "n must be a positive integer, got {value}"
                    )));
                }
                (value as u64, args.alpha)
            }
            ScanAxis::Alpha => {
                let n = args
                    .n
                    .ok_or_else(|| Error::Domain("scanning alpha needs --n".into()))?;
                (n, value)
            }
        };
        let n_plus_l = MaxQuery::new(n)?.level + l_alpha(alpha)?;
        let cert = match lower_bound_certificate(n, alpha, args.sigma, args.tau) {
            Ok(c) => Some(c),
            Err(Error::Validity(_)) => None,
            Err(e) => return Err(e),
        };
        if cert.is_none() {
            invalid += 1;
        }
        let threshold = cert.map(|c| c.threshold);
        let tail = cert.map(|c| c.guaranteed_tail);
        table.push(vec![
            n.to_string(),
            num(alpha),
            num(n_plus_l),
            cert.is_some().to_string(),
            opt_num(threshold),
            opt_num(tail),
        ]);
        rows.push(json!({
            "n": n,
            "alpha": alpha,
            "n_plus_l": n_plus_l,
            "valid": cert.is_some(),
            "threshold": threshold,
            "guaranteed_tail": tail,
        }));
    }
    let inputs = json!({
        "over": args.over,
        "values": args.values.0,
        "n": args.n,
        "alpha": args.alpha,
        "sigma": args.sigma,
        "tau": args.tau,
    });
    let mut checks = Vec::new();
    if strict {
        checks.push(Check::new(
            "validity gate at every point",
            Verdict::from_pass(invalid == 0),
        ));
    }
    Ok(Report::new("scan", inputs, json!({ "rows": rows }), table).with_checks(checks))
}

fn run_process_bound(args: &ProcessBoundArgs) -> Result<Report> {
    let model = WoldModel::read_file(&args.process)?;
    let mut table = Table::new(&["stride", "subsample_count", "sigma", "tau", "threshold"]);
    let mut outputs = json!({ "model": model });
    match &args.sweep {
        None => {
            let s = stationary_lower_bound(&model, args.n, args.k, args.alpha)?;
            table.push(vec![
                s.stride.to_string(),
                s.subsample_count.to_string(),
                num(s.certificate.sigma),
                num(s.certificate.tau),
                num(s.certificate.threshold),
            ]);
            outputs["certificate"] = to_value(&s);
        }
        Some(max_k) => {
            let max_k = *max_k;
            if max_k == 0 {
                return Err(Error::Domain("--sweep needs K >= 1".into()));
            }
            let sweep = stride_sweep(&model, args.n, 1..=max_k, args.alpha)?;
            let best = sweep.best_stride.ok_or_else(|| {
                Error::Validity(format!(
                    "requires N + L_alpha >= 6 for floor(n/k) subsampled variables; no stride in 1..={max_k} passes at n={}",
                    args.n
                ))
            })?;
            for p in &sweep.points {
                let (count, sigma, tau) =
                    match stationary_lower_bound(&model, args.n, p.stride, args.alpha) {
                        Ok(s) => (
                            s.subsample_count.to_string(),
                            num(s.certificate.sigma),
                            num(s.certificate.tau),
                        ),
                        Err(_) => (
                            (args.n / p.stride).to_string(),
                            String::new(),
                            String::new(),
                        ),
                    };
                table.push(vec![
                    p.stride.to_string(),
                    count,
                    sigma,
                    tau,
                    opt_num(p.threshold),
                ]);
            }
            outputs["certificate"] =
                to_value(&stationary_lower_bound(&model, args.n, best, args.alpha)?);
            outputs["sweep"] = to_value(&sweep);
        }
    }
    let inputs = json!({
        "process": args.process.display().to_string(),
        "n": args.n,
        "k": args.k,
        "alpha": args.alpha,
        "sweep": args.sweep,
    });
    Ok(Report::new("process-bound", inputs, outputs, table))
}

fn run_grid(args: &GridArgs) -> Result<Report> {
    let report = inequality_grid(args.step, args.tol)?;
    let mut table = Table::new(&["inequality", "points", "violations", "min_margin"]);
    table.push(vec![
        "v_minus_log_v_le_x2".into(),
        report.lower_points.to_string(),
        report.lower_violations.len().to_string(),
        num(report.lower_min_margin),
    ]);
    table.push(vec![
        "x2_le_upper_inversion".into(),
        report.upper_points.to_string(),
        report.upper_violations.len().to_string(),
        num(report.upper_min_margin),
    ]);
    table.push(vec![
        "mills_bracket".into(),
        report.mills_points.to_string(),
        report.mills_violations.len().to_string(),
        String::new(),
    ]);
    let checks = vec![
        Check::new(
            "V - log V <= x^2 on [2, 40]",
            Verdict::from_pass(report.lower_violations.is_empty()),
        ),
        Check::new(
            "x^2 <= V - log V + log V / V on [1, 40]",
            Verdict::from_pass(report.upper_violations.is_empty()),
        ),
        Check::new(
            "Mills bracket on [1, 40]",
            Verdict::from_pass(report.mills_violations.is_empty()),
        ),
    ];
    let inputs = json!({ "step": args.step, "tol": args.tol });
    Ok(Report::new("inequality-grid", inputs, to_value(&report), table).with_checks(checks))
}

/// Executes the command and returns its report (timestamp included unless
/// suppressed).
pub fn execute(cli: &Cli) -> Result<Report> {
    let mut report = match &cli.command {
        Command::Bound(a) => run_bound(a),
        Command::Bracket(a) => run_bracket(a, cli.strict),
        Command::Certify(a) => run_certify(a),
        Command::Scan(a) => run_scan(a, cli.strict),
        Command::ProcessBound(a) => run_process_bound(a),
        Command::InequalityGrid(a) => run_grid(a),
    }?;
    if !cli.no_timestamp {
        report.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    Ok(report)
}

/// Runs the command, writes the report, and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let outcome = execute(cli).and_then(|report| {
        let text = report.render(cli.format)?;
        match &cli.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(report.passed)
    });
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
