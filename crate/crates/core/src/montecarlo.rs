//! Seeded Monte Carlo certification of the bounds.
//!
//! Replication `i` of a plan with seed `s` draws from its own ChaCha8
//! stream: the key is `ChaCha8Rng::seed_from_u64(s)` and the stream id is
//! `i`. Every replication is therefore reproducible in isolation, and results
//! are collected by index, so estimates do not depend on the number of
//! threads or their scheduling.
//!
//! Normal variates are produced by the inverse-CDF transform of open-interval
//! uniforms (53-bit mantissa, offset by half an ulp).

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    gumbel_cdf, normal_coupling_sandwich, union_upper_tail, LowerBoundCertificate,
};
use crate::covariance::{decompose, natural_ordering, CovarianceMatrix};
use crate::error::{domain, Error, Result};
use crate::gaussian::{lower_tail, quantile_open, upper_tail};
use crate::process::WoldModel;

/// Two-sided 95% standard normal quantile used by the Wilson interval.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Smallest replication count accepted for a certification run.
pub const MIN_CERTIFY_REPLICATIONS: u64 = 100;

/// Asymptotic Kolmogorov critical value `sqrt(-ln(alpha/2) / 2)` at 1%.
pub const KS_CRITICAL_1PCT: f64 = 1.627_623_630_718_729_3;

/// Tolerance for the algebraic coupling sandwich.
pub const SANDWICH_TOL: f64 = 1e-12;

/// The random vectors a plan draws maxima from.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// A zero-mean Gaussian vector with this covariance.
    Covariance(CovarianceMatrix),
    /// `length` consecutive values of a stationary process.
    Process { model: WoldModel, length: usize },
}

impl Target {
    pub fn iid(n: usize) -> Result<Self> {
        Ok(Target::Covariance(CovarianceMatrix::identity(n)?))
    }

    /// Number of variables whose maximum is taken.
    pub fn len(&self) -> usize {
        match self {
            Target::Covariance(c) => c.dim(),
            Target::Process { length, .. } => *length,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub seed: u64,
    pub replications: u64,
    pub target: Target,
    pub thresholds: Vec<f64>,
}

impl SimulationPlan {
    pub fn new(seed: u64, replications: u64, target: Target) -> Self {
        SimulationPlan {
            seed,
            replications,
            target,
            thresholds: Vec::new(),
        }
    }

    pub fn with_thresholds(mut self, thresholds: Vec<f64>) -> Self {
        self.thresholds = thresholds;
        self
    }

    fn check_certifiable(&self) -> Result<()> {
        if self.replications < MIN_CERTIFY_REPLICATIONS {
            return domain(format!(
                "certification needs at least {MIN_CERTIFY_REPLICATIONS} replications, got {}",
                self.replications
            ));
        }
        Ok(())
    }
}

/// The generator for replication `index` of a plan seeded with `seed`.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on the open interval (0, 1).
pub fn uniform_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn standard_normal(rng: &mut impl RngCore) -> f64 {
    quantile_open(uniform_open(rng))
}

/// Runs `f` once per replication, in parallel, returning results in
/// replication order.
pub fn replicate<T, F>(seed: u64, replications: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..replications)
        .into_par_iter()
        .map(|i| f(&mut replication_rng(seed, i)))
        .collect()
}

/// Lower-triangular matrix-vector product `L z` written into `out`.
fn lower_times(l: &nalgebra::DMatrix<f64>, z: &[f64], out: &mut [f64]) {
    let dim = z.len();
    for (i, slot) in out.iter_mut().enumerate().take(dim) {
        let mut s = 0.0;
        for (k, zk) in z.iter().enumerate().take(i + 1) {
            s += l[(i, k)] * zk;
        }
        *slot = s;
    }
}

/// One draw of `c` through its natural-order triangular factor.
fn draw_vector(l: &nalgebra::DMatrix<f64>, rng: &mut ChaCha8Rng, z: &mut [f64], x: &mut [f64]) {
    for zi in z.iter_mut() {
        *zi = standard_normal(rng);
    }
    lower_times(l, z, x);
}

/// Consecutive values `X_0..X_{length-1}` of a Wold process.
pub fn sample_path(model: &WoldModel, length: usize, rng: &mut impl RngCore) -> Vec<f64> {
    let order = model.psi().len();
    let sd = model.innovation_sd();
    let z: Vec<f64> = (0..length + order).map(|_| standard_normal(rng)).collect();
    (0..length)
        .map(|i| {
            // z[order + i] is Z_i
            let mut s = z[order + i];
            for (j, psi) in model.psi().iter().enumerate() {
                s += psi * z[order + i - j - 1];
            }
            sd * s
        })
        .collect()
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Sampled vectors of `c`, one per replication (row-major by replication).
pub fn sample_vectors(c: &CovarianceMatrix, seed: u64, replications: u64) -> Result<Vec<Vec<f64>>> {
    let l = decompose(c, &natural_ordering(c.dim()))?.lower_factor;
    let dim = c.dim();
    Ok(replicate(seed, replications, |rng| {
        let mut z = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        draw_vector(&l, rng, &mut z, &mut x);
        x
    }))
}

/// The maximum of each replication's draw from `plan.target`.
pub fn sample_max(plan: &SimulationPlan) -> Result<Vec<f64>> {
    match &plan.target {
        Target::Covariance(c) => {
            let l = decompose(c, &natural_ordering(c.dim()))?.lower_factor;
            let dim = c.dim();
            Ok(replicate(plan.seed, plan.replications, |rng| {
                let mut z = vec![0.0; dim];
                let mut x = vec![0.0; dim];
                draw_vector(&l, rng, &mut z, &mut x);
                max_of(&x)
            }))
        }
        Target::Process { model, length } => {
            if *length == 0 {
                return domain("process window length must be at least 1");
            }
            Ok(replicate(plan.seed, plan.replications, |rng| {
                max_of(&sample_path(model, *length, rng))
            }))
        }
    }
}

/// Empirical tail probability with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub hits: u64,
    pub replications: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval always contains p; clamp rounding at the edges
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

pub fn tail_estimate_from_counts(threshold: f64, hits: u64, replications: u64) -> TailEstimate {
    let (ci_low, ci_high) = wilson_interval(hits, replications, WILSON_Z);
    TailEstimate {
        threshold,
        hits,
        replications,
        point: hits as f64 / replications as f64,
        ci_low,
        ci_high,
    }
}

/// Estimate of `Pr{M >= threshold}` from sampled maxima.
pub fn estimate_tail(samples: &[f64], threshold: f64) -> Result<TailEstimate> {
    if samples.is_empty() {
        return domain("tail estimate needs at least one sample");
    }
    let hits = samples.iter().filter(|&&m| m >= threshold).count() as u64;
    Ok(tail_estimate_from_counts(
        threshold,
        hits,
        samples.len() as u64,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    /// `Pass` only if every verdict passes.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        Verdict::from_pass(verdicts.into_iter().all(Verdict::passed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub certificate: LowerBoundCertificate,
    pub estimate: TailEstimate,
    /// `point - guaranteed_tail`.
    pub slack: f64,
    pub verdict: Verdict,
}

/// Checks `Pr{M_n >= threshold} >= guaranteed_tail` by simulation; fails only
/// if the whole Wilson interval lies below the guarantee.
pub fn certify_lower_bound(
    cert: &LowerBoundCertificate,
    plan: &SimulationPlan,
) -> Result<LowerBoundReport> {
    plan.check_certifiable()?;
    if cert.n != plan.target.len() as u64 {
        return domain(format!(
            "certificate is for n={} but the target has {} variables",
            cert.n,
            plan.target.len()
        ));
    }
    let samples = sample_max(plan)?;
    let estimate = estimate_tail(&samples, cert.threshold)?;
    Ok(LowerBoundReport {
        certificate: *cert,
        estimate,
        slack: estimate.point - cert.guaranteed_tail,
        verdict: Verdict::from_pass(estimate.ci_high >= cert.guaranteed_tail),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundRow {
    pub threshold: f64,
    pub bound: f64,
    pub estimate: TailEstimate,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBoundReport {
    pub n: u64,
    pub rows: Vec<UpperBoundRow>,
    pub verdict: Verdict,
}

fn check_unit_marginals(target: &Target) -> Result<()> {
    match target {
        Target::Covariance(c) => {
            for i in 0..c.dim() {
                if (c.get(i, i) - 1.0).abs() > 1e-9 {
                    return domain(format!(
                        "union bound check needs unit variances; C[{i},{i}] = {}",
                        c.get(i, i)
                    ));
                }
            }
            Ok(())
        }
        // the retained process variance is 1 - truncation_tail <= 1, which
        // only makes the union bound more conservative
        Target::Process { .. } => Ok(()),
    }
}

/// Checks `Pr{M_n >= A} <= min(1, n (1 - Phi(A)))` for each `A` in
/// `plan.thresholds`; fails only if the Wilson interval lies above the bound.
pub fn certify_upper_bounds(plan: &SimulationPlan) -> Result<UpperBoundReport> {
    plan.check_certifiable()?;
    check_unit_marginals(&plan.target)?;
    let n = plan.target.len() as u64;
    let samples = sample_max(plan)?;
    let mut rows = Vec::with_capacity(plan.thresholds.len());
    for &a in &plan.thresholds {
        let single = if a.is_finite() {
            upper_tail(a)
        } else if a < 0.0 {
            1.0
        } else {
            0.0
        };
        let bound = union_upper_tail(n, single)?;
        let estimate = estimate_tail(&samples, a)?;
        rows.push(UpperBoundRow {
            threshold: a,
            bound,
            estimate,
            verdict: Verdict::from_pass(estimate.ci_low <= bound),
        });
    }
    let verdict = Verdict::all(rows.iter().map(|r| r.verdict));
    Ok(UpperBoundReport { n, rows, verdict })
}

/// Kolmogorov–Smirnov statistic of `samples` against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return domain("KS statistic needs at least one sample");
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN in KS sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: u64,
    pub replications: u64,
    pub ks_statistic: f64,
    pub ks_critical: f64,
    pub sandwich_checked: u64,
    pub sandwich_violations: u64,
    pub verdict: Verdict,
}

/// Transforms maxima of `n` i.i.d. standard normals by
/// `G = -ln(-n ln Phi(M_n))`, tests `G` against the standard Gumbel law at
/// the 1% level, and checks `G <= -ln(n (1 - Phi(M_n))) <= G + exp(-G)/n`
/// on every sample.
pub fn gumbel_coupling_test(n: u64, seed: u64, replications: u64) -> Result<CouplingReport> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let plan = SimulationPlan::new(seed, replications, Target::iid(n as usize)?);
    plan.check_certifiable()?;
    // i.i.d. maxima need no factorization
    let maxima = replicate(seed, replications, |rng| {
        (0..n)
            .map(|_| standard_normal(rng))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let mut transformed = Vec::with_capacity(maxima.len());
    let mut violations = 0;
    for &m in &maxima {
        let s = normal_coupling_sandwich(m, n)?;
        if !s.holds(SANDWICH_TOL) {
            violations += 1;
        }
        transformed.push(s.gumbel);
    }
    let ks = ks_statistic(&transformed, gumbel_cdf)?;
    let critical = KS_CRITICAL_1PCT / (replications as f64).sqrt();
    Ok(CouplingReport {
        n,
        replications,
        ks_statistic: ks,
        ks_critical: critical,
        sandwich_checked: maxima.len() as u64,
        sandwich_violations: violations,
        verdict: Verdict::from_pass(ks < critical && violations == 0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HiInequalityReport {
    pub a: f64,
    pub b: f64,
    /// Estimate of `Pr{M_n >= A + B}`.
    pub lhs: TailEstimate,
    /// Estimate of `Pr{max_i R_i >= A}`.
    pub max_residual: TailEstimate,
    /// Per-position estimates of `Pr{E_i >= B}` (ordering positions).
    pub condmean_hits: Vec<u64>,
    /// Simulated right side: product of the two empirical factors.
    pub rhs_empirical: f64,
    /// Exact right side `(1 - prod_i Phi(A / sigma_i)) * min_i Phi(-B / tau_i)`,
    /// using independence of the innovations `R_i`.
    pub rhs_exact: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

/// Exact right side of `Pr{M_n >= A + B} >= Pr{max R_i >= A} min_i Pr{E_i >= B}`.
pub fn hi_rhs_exact(residual_vars: &[f64], condmean_vars: &[f64], a: f64, b: f64) -> f64 {
    let none_exceed: f64 = residual_vars
        .iter()
        .map(|v| lower_tail(a / v.sqrt()))
        .product();
    let min_cond = condmean_vars
        .iter()
        .map(|&t2| {
            if t2 > 0.0 {
                lower_tail(-b / t2.sqrt())
            } else if b <= 0.0 {
                1.0
            } else {
                0.0
            }
        })
        .fold(1.0, f64::min);
    (1.0 - none_exceed) * min_cond
}

/// Simulates the decomposition `X_i = E_i + R_i` of `c` under `ordering`
/// and checks the product inequality for `B <= 0`. Fails only when the
/// Wilson interval of the left side lies entirely below the exact right
/// side.
pub fn certify_hi_inequality(
    c: &CovarianceMatrix,
    ordering: &[usize],
    plan: &SimulationPlan,
    a: f64,
    b: f64,
) -> Result<HiInequalityReport> {
    if !(b <= 0.0) {
        return domain(format!("the product inequality requires B <= 0, got {b}"));
    }
    if !a.is_finite() {
        return domain(format!("A must be finite, got {a}"));
    }
    plan.check_certifiable()?;
    let d = decompose(c, ordering)?;
    let dim = c.dim();
    let l = &d.lower_factor;

    struct Outcome {
        max_hit: bool,
        residual_hit: bool,
        cond_hits: Vec<bool>,
    }
    let outcomes = replicate(plan.seed, plan.replications, |rng| {
        let z: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
        let mut max_x = f64::NEG_INFINITY;
        let mut max_r = f64::NEG_INFINITY;
        let mut cond_hits = Vec::with_capacity(dim);
        for i in 0..dim {
            let e: f64 = (0..i).map(|k| l[(i, k)] * z[k]).sum();
            let r = l[(i, i)] * z[i];
            max_x = max_x.max(e + r);
            max_r = max_r.max(r);
            cond_hits.push(e >= b);
        }
        Outcome {
            max_hit: max_x >= a + b,
            residual_hit: max_r >= a,
            cond_hits,
        }
    });

    let reps = plan.replications;
    let lhs_hits = outcomes.iter().filter(|o| o.max_hit).count() as u64;
    let res_hits = outcomes.iter().filter(|o| o.residual_hit).count() as u64;
    let mut condmean_hits = vec![0u64; dim];
    for o in &outcomes {
        for (slot, &hit) in condmean_hits.iter_mut().zip(&o.cond_hits) {
            *slot += u64::from(hit);
        }
    }
    let lhs = tail_estimate_from_counts(a + b, lhs_hits, reps);
    let max_residual = tail_estimate_from_counts(a, res_hits, reps);
    let min_cond = condmean_hits.iter().copied().min().unwrap_or(reps) as f64 / reps as f64;
    let rhs_exact = hi_rhs_exact(&d.residual_vars, &d.condmean_vars, a, b);
    Ok(HiInequalityReport {
        a,
        b,
        lhs,
        max_residual,
        condmean_hits,
        rhs_empirical: max_residual.point * min_cond,
        rhs_exact,
        slack: lhs.point - rhs_exact,
        verdict: Verdict::from_pass(lhs.ci_high >= rhs_exact),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedMaxRow {
    pub n: u64,
    pub replications: u64,
    /// Median of `M_n / sqrt(2 ln n)`.
    pub median: f64,
}

/// Medians of `M_n / sqrt(2 ln n)` for process paths of each length in
/// `lengths`. Each length uses the seed `seed ^ length` so rows can be
/// reproduced independently.
pub fn normalized_max_medians(
    model: &WoldModel,
    lengths: &[u64],
    seed: u64,
    replications: u64,
) -> Result<Vec<NormalizedMaxRow>> {
    lengths
        .iter()
        .map(|&n| {
            if n < 2 {
                return domain("normalized maxima need n >= 2");
            }
            let plan = SimulationPlan::new(
                seed ^ n,
                replications,
                Target::Process {
                    model: model.clone(),
                    length: n as usize,
                },
            );
            let scale = (2.0 * (n as f64).ln()).sqrt();
            let mut ratios: Vec<f64> = sample_max(&plan)?.iter().map(|m| m / scale).collect();
            Ok(NormalizedMaxRow {
                n,
                replications,
                median: median(&mut ratios),
            })
        })
        .collect()
}

/// Median (mean of the middle pair for even lengths). Sorts in place.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
