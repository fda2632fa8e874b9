//! Stationary Gaussian processes in moving-average (Wold) form
//! `X_i = sigma (Z_i + sum_j psi_j Z_{i-j})` with unit marginal variance,
//! and the lower bound obtained from stride-`k` subsampling.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::{lower_bound_certificate, min_valid_n, LowerBoundCertificate};
use crate::covariance::CovarianceMatrix;
use crate::error::{domain, Error, Result};

/// Largest window dimension `n` accepted by [`window_covariance`].
pub const MAX_WINDOW_DIM: usize = 4096;
/// Largest span `n * k` accepted by [`window_covariance`].
pub const MAX_WINDOW_SPAN: usize = 10_000_000;

/// A truncated Wold representation. The implicit leading coefficient is
/// `psi_0 = 1`; `truncation_tail` is the variance `sigma^2 sum_{j>K} psi_j^2`
/// dropped by the truncation, so the retained process has variance
/// `1 - truncation_tail`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WoldModel {
    innovation_sd: f64,
    psi: Vec<f64>,
    truncation_tail: f64,
}

impl WoldModel {
    /// AR(1) with coefficient `rho`: `psi_j = rho^j`, innovation variance
    /// `1 - rho^2`, truncated at the first `K` whose discarded variance
    /// `rho^(2(K+1))` is at most `tail_tol`.
    pub fn ar1(rho: f64, tail_tol: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return domain(format!(
                "AR(1) coefficient must satisfy |rho| < 1 for a stationary unit-variance process, got {rho}"
            ));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return domain(format!("tail tolerance must lie in (0, 1), got {tail_tol}"));
        }
        let innovation_var = 1.0 - rho * rho;
        let mut psi = Vec::new();
        let mut coef = 1.0;
        let mut tail = rho * rho;
        while tail > tail_tol {
            coef *= rho;
            psi.push(coef);
            tail *= rho * rho;
        }
        Ok(WoldModel {
            innovation_sd: innovation_var.sqrt(),
            psi,
            truncation_tail: tail,
        })
    }

    /// A finite moving average with the given `psi_1..psi_K`, scaled to unit
    /// variance. Nothing is truncated.
    pub fn from_psi(psi: Vec<f64>) -> Result<Self> {
        if psi.iter().any(|p| !p.is_finite()) {
            return domain("psi coefficients must be finite");
        }
        let energy: f64 = 1.0 + psi.iter().map(|p| p * p).sum::<f64>();
        Ok(WoldModel {
            innovation_sd: energy.recip().sqrt(),
            psi,
            truncation_tail: 0.0,
        })
    }

    pub fn innovation_sd(&self) -> f64 {
        self.innovation_sd
    }

    pub fn innovation_var(&self) -> f64 {
        self.innovation_sd * self.innovation_sd
    }

    /// `psi_1..psi_K`.
    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn truncation_tail(&self) -> f64 {
        self.truncation_tail
    }

    /// `psi_j` with `psi_0 = 1` and zero past the truncation.
    pub fn coefficient(&self, j: usize) -> f64 {
        match j {
            0 => 1.0,
            _ => self.psi.get(j - 1).copied().unwrap_or(0.0),
        }
    }

    /// Autocovariance of the retained process at lag `h`.
    pub fn autocovariance(&self, h: usize) -> f64 {
        let order = self.psi.len();
        if h > order {
            return 0.0;
        }
        let s: f64 = (0..=order - h)
            .map(|j| self.coefficient(j) * self.coefficient(j + h))
            .sum();
        self.innovation_var() * s
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        text.parse::<ProcessSpec>()?.build()
    }
}

/// Key-value description of a model:
///
/// ```text
/// kind = ar1
/// rho = 0.9
/// tail_tol = 1e-8
/// ```
///
/// or `kind = psi-list` with `psi = 0.5, 0.25, 0.125` (commas or spaces).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessSpec {
    Ar1 { rho: f64, tail_tol: f64 },
    PsiList { psi: Vec<f64> },
}

/// Truncation tolerance used when an `ar1` spec omits `tail_tol`.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

impl ProcessSpec {
    pub fn build(&self) -> Result<WoldModel> {
        match self {
            ProcessSpec::Ar1 { rho, tail_tol } => WoldModel::ar1(*rho, *tail_tol),
            ProcessSpec::PsiList { psi } => WoldModel::from_psi(psi.clone()),
        }
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessSpec::Ar1 { rho, tail_tol } => {
                writeln!(f, "kind = ar1")?;
                writeln!(f, "rho = {rho:?}")?;
                writeln!(f, "tail_tol = {tail_tol:?}")
            }
            ProcessSpec::PsiList { psi } => {
                writeln!(f, "kind = psi-list")?;
                let list: Vec<String> = psi.iter().map(|p| format!("{p:?}")).collect();
                writeln!(f, "psi = {}", list.join(", "))
            }
        }
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: invalid number {value:?}")))
}

impl FromStr for ProcessSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut rho = None;
        let mut tail_tol = None;
        let mut psi = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => kind = Some(value.to_string()),
                "rho" => rho = Some(parse_number(key, value)?),
                "tail_tol" => tail_tol = Some(parse_number(key, value)?),
                "psi" => {
                    psi = Some(
                        value
                            .split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|t| !t.is_empty())
                            .map(|t| parse_number(key, t))
                            .collect::<Result<Vec<f64>>>()?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        match kind.as_deref() {
            Some("ar1") => Ok(ProcessSpec::Ar1 {
                rho: rho.ok_or_else(|| Error::Parse("ar1 model requires rho".into()))?,
                tail_tol: tail_tol.unwrap_or(DEFAULT_TAIL_TOL),
            }),
            Some("psi-list") => Ok(ProcessSpec::PsiList {
                psi: psi.ok_or_else(|| Error::Parse("psi-list model requires psi".into()))?,
            }),
            Some(other) => Err(Error::Parse(format!(
                "unknown kind {other:?}; expected ar1 or psi-list"
            ))),
            None => Err(Error::Parse("process spec requires kind".into())),
        }
    }
}

/// Innovation variance of the stride-`k` subsampled series,
/// `sigma^2 (1 + sum_{j=1}^{k-1} psi_j^2) = 1 - sigma^2 sum_{j>=k} psi_j^2`.
pub fn subsample_residual_variance(m: &WoldModel, k: usize) -> Result<f64> {
    if k == 0 {
        return domain("stride k must be at least 1");
    }
    let head: f64 = m.psi.iter().take(k - 1).map(|p| p * p).sum();
    Ok(m.innovation_var() * (1.0 + head))
}

/// Covariance of `(X_k, X_2k, ..., X_nk)`: Toeplitz with entries
/// `gamma(|i - j| k)`.
pub fn window_covariance(m: &WoldModel, n: usize, k: usize) -> Result<CovarianceMatrix> {
    if n == 0 || k == 0 {
        return domain("window length n and stride k must be at least 1");
    }
    if n > MAX_WINDOW_DIM || n.saturating_mul(k) > MAX_WINDOW_SPAN {
        return Err(Error::Resource(format!(
            "window n={n}, k={k} exceeds caps n <= {MAX_WINDOW_DIM}, n*k <= {MAX_WINDOW_SPAN}"
        )));
    }
    let acf: Vec<f64> = (0..n).map(|h| m.autocovariance(h * k)).collect();
    CovarianceMatrix::toeplitz(&acf)
}

/// Lower bound for the maximum of `n` consecutive process values obtained
/// from the `floor(n / k)` stride-`k` subsampled values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryCertificate {
    pub n: u64,
    pub stride: u64,
    pub subsample_count: u64,
    /// Certificate for the subsampled maximum; it also bounds `M_n` since
    /// `M_n >= max_i X_{ik}`.
    pub certificate: LowerBoundCertificate,
}

/// Certificate with `sigma^2 = subsample_residual_variance(m, k)` and
/// `tau^2 = 1 - sigma^2` over `floor(n / k)` variables.
pub fn stationary_lower_bound(
    m: &WoldModel,
    n: u64,
    k: u64,
    alpha: f64,
) -> Result<StationaryCertificate> {
    if k == 0 {
        return domain("stride k must be at least 1");
    }
    let count = n / k;
    let needed = min_valid_n(alpha)?;
    if count < needed {
        let largest = n / needed;
        let hint = if largest >= 1 {
            format!("largest usable k is {largest}")
        } else {
            format!("no stride is usable; n must be at least {needed}")
        };
        return Err(Error::Validity(format!(
            "requires N + L_alpha >= 6 for the floor(n/k) = {count} subsampled variables \
             (needs at least {needed} at alpha={alpha}); {hint}"
        )));
    }
    let sigma2 = subsample_residual_variance(m, k as usize)?;
    let tau2 = (1.0 - sigma2).max(0.0);
    let certificate = lower_bound_certificate(count, alpha, sigma2.sqrt(), tau2.sqrt())?;
    Ok(StationaryCertificate {
        n,
        stride: k,
        subsample_count: count,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StridePoint {
    pub stride: u64,
    /// `None` when the validity gate fails at this stride.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrideSweep {
    pub points: Vec<StridePoint>,
    pub best_stride: Option<u64>,
    pub best_threshold: Option<f64>,
}

/// [`stationary_lower_bound`] thresholds over `strides`, with the argmax
/// (first one on ties).
pub fn stride_sweep(
    m: &WoldModel,
    n: u64,
    strides: impl IntoIterator<Item = u64>,
    alpha: f64,
) -> Result<StrideSweep> {
    let mut points = Vec::new();
    let mut best: Option<(u64, f64)> = None;
    for k in strides {
        let threshold = match stationary_lower_bound(m, n, k, alpha) {
            Ok(c) => Some(c.certificate.threshold),
            Err(Error::Validity(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(t) = threshold {
            if best.is_none_or(|(_, b)| t > b) {
                best = Some((k, t));
            }
        }
        points.push(StridePoint {
            stride: k,
            threshold,
        });
    }
    Ok(StrideSweep {
        points,
        best_stride: best.map(|b| b.0),
        best_threshold: best.map(|b| b.1),
    })
}
