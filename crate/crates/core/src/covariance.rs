//! Covariance matrices and their sequential conditional decomposition.
//!
//! For an ordering `pi`, the lower factor `L` of `P C P^T = L L^T` splits
//! each variable into an innovation `R_i` (variance `L_ii^2`) and the
//! conditional mean `E_i` on its predecessors (variance `sum_{k<i} L_ik^2`).

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde::Serialize;

use crate::bounds::lower_bound_certificate;
use crate::error::{domain, Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-12;
const EIGEN_MAX_ITER: usize = 10_000;

/// A validated symmetric positive-definite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates shape, finiteness, symmetry (relative to the largest entry)
    /// and positive definiteness. Near-singular matrices are rejected, never
    /// regularized.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || entries.ncols() != dim {
            return Err(Error::Parse(format!(
                "covariance must be a non-empty square matrix, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("covariance entries must be finite".into()));
        }
        let scale = entries.amax();
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Parse(format!(
                        "covariance is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        let c = CovarianceMatrix { entries };
        cholesky(&c.entries)?;
        Ok(c)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {dim}",
                i + 1,
                row.len()
            )));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    /// Unit variances with common correlation `rho`.
    pub fn equicorrelated(dim: usize, rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(
            dim,
            dim,
            |i, j| if i == j { 1.0 } else { rho },
        ))
    }

    /// Symmetric Toeplitz matrix with first row `acf` (lag 0 first).
    pub fn toeplitz(acf: &[f64]) -> Result<Self> {
        let dim = acf.len();
        Self::new(DMatrix::from_fn(dim, dim, |i, j| acf[i.abs_diff(j)]))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Reads the whitespace-separated text format from a file.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    /// One row per line, entries separated by single spaces, shortest
    /// round-trip representation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

impl FromStr for CovarianceMatrix {
    type Err = Error;

    /// Parses one matrix row per line; blank lines and lines starting with
    /// `#` are skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| {
                        Error::Parse(format!("line {}: invalid number {tok:?}", lineno + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("covariance file contains no rows".into()));
        }
        Self::from_rows(&rows)
    }
}

/// Lower triangular `L` with `a = L L^T`, failing at the first pivot below
/// `dim * 1e-12 * max diagonal`.
fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = a.nrows();
    let max_diag = a.diagonal().amax();
    let tolerance = dim as f64 * PIVOT_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..dim {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > tolerance) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: pivot,
                tolerance,
            });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..dim {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Checks that `ordering` is a permutation of `0..dim`.
pub fn validate_ordering(ordering: &[usize], dim: usize) -> Result<()> {
    if ordering.len() != dim {
        return domain(format!(
            "ordering has {} entries, expected {dim}",
            ordering.len()
        ));
    }
    let mut seen = vec![false; dim];
    for &i in ordering {
        if i >= dim || std::mem::replace(&mut seen[i], true) {
            return domain(format!("ordering is not a permutation of 0..{dim}"));
        }
    }
    Ok(())
}

pub fn natural_ordering(dim: usize) -> Vec<usize> {
    (0..dim).collect()
}

/// Residual and conditional-mean variances of each variable given its
/// predecessors under a fixed ordering. Per-index vectors are in ordering
/// position: entry `i` describes variable `ordering[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDecomposition {
    pub ordering: Vec<usize>,
    pub residual_vars: Vec<f64>,
    pub condmean_vars: Vec<f64>,
    pub lower_factor: DMatrix<f64>,
}

impl ConditionalDecomposition {
    pub fn min_residual_var(&self) -> f64 {
        self.residual_vars
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_condmean_var(&self) -> f64 {
        self.condmean_vars.iter().copied().fold(0.0, f64::max)
    }

    /// `(sigma, tau)` in standard-deviation units.
    pub fn sigma_tau(&self) -> (f64, f64) {
        (
            self.min_residual_var().sqrt(),
            self.max_condmean_var().sqrt(),
        )
    }
}

fn permuted(c: &CovarianceMatrix, ordering: &[usize]) -> DMatrix<f64> {
    let dim = c.dim();
    DMatrix::from_fn(dim, dim, |i, j| c.entries[(ordering[i], ordering[j])])
}

/// Sequential conditional decomposition of `c` under `ordering`.
pub fn decompose(c: &CovarianceMatrix, ordering: &[usize]) -> Result<ConditionalDecomposition> {
    validate_ordering(ordering, c.dim())?;
    let pc = permuted(c, ordering);
    let l = cholesky(&pc)?;

    let scale = c.entries.amax();
    let err = (&pc - &l * l.transpose()).amax();
    if err > 1e-10 * scale {
        return Err(Error::Numeric(format!(
            "factor reconstruction error {err:e} exceeds 1e-10 * {scale}"
        )));
    }

    let dim = c.dim();
    let residual_vars = (0..dim).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let condmean_vars = (0..dim)
        .map(|i| (0..i).map(|k| l[(i, k)] * l[(i, k)]).sum())
        .collect();
    Ok(ConditionalDecomposition {
        ordering: ordering.to_vec(),
        residual_vars,
        condmean_vars,
        lower_factor: l,
    })
}

/// `(sqrt(min_i sigma_i^2), sqrt(max_i tau_i^2))` under `ordering`.
pub fn sigma_tau(c: &CovarianceMatrix, ordering: &[usize]) -> Result<(f64, f64)> {
    Ok(decompose(c, ordering)?.sigma_tau())
}

/// Smallest and largest eigenvalue of `c`.
pub fn eigen_bounds(c: &CovarianceMatrix) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::try_new(c.entries.clone(), f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(
        || {
            Error::Numeric(format!(
                "symmetric eigenvalue iteration did not converge in {EIGEN_MAX_ITER} sweeps"
            ))
        },
    )?;
    Ok((eig.eigenvalues.min(), eig.eigenvalues.max()))
}

/// `1 / (C^{-1})_ii`: the residual variance of each variable given all of
/// the others.
pub fn precision_residuals(c: &CovarianceMatrix) -> Result<Vec<f64>> {
    let l = cholesky(&c.entries)?;
    let dim = c.dim();
    // rows of L^{-1}; (C^{-1})_ii = sum_k (L^{-1})_{ki}^2
    let mut inv = DMatrix::<f64>::identity(dim, dim);
    for col in 0..dim {
        for i in 0..dim {
            let mut s = inv[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    Ok((0..dim)
        .map(|i| 1.0 / inv.column(i).norm_squared())
        .collect())
}

/// Result of searching over orderings for the largest certificate threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingChoice {
    pub ordering: Vec<usize>,
    pub sigma: f64,
    pub tau: f64,
    pub threshold: f64,
    /// Number of orderings evaluated, natural order included.
    pub candidates: usize,
}

/// Evaluates the natural order plus `k` seeded random orderings and keeps the
/// one whose lower-bound certificate at `alpha` has the largest threshold.
/// Ties keep the earlier candidate.
pub fn best_of_random_orderings(
    c: &CovarianceMatrix,
    k: usize,
    seed: u64,
    alpha: f64,
) -> Result<OrderingChoice> {
    let dim = c.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidate = natural_ordering(dim);
    let mut best: Option<OrderingChoice> = None;
    for round in 0..=k {
        if round > 0 {
            candidate.shuffle(&mut rng);
        }
        let (sigma, tau) = sigma_tau(c, &candidate)?;
        let cert = lower_bound_certificate(dim as u64, alpha, sigma, tau)?;
        if best.as_ref().is_none_or(|b| cert.threshold > b.threshold) {
            best = Some(OrderingChoice {
                ordering: candidate.clone(),
                sigma,
                tau,
                threshold: cert.threshold,
                candidates: k + 1,
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}
