//! Standard-normal evaluation and the log-tail coordinate
//! `V = -2 log(1 - Phi(x)) - log(2 pi)` with its two inversion bounds.
//!
//! Upper tails are evaluated through `erfc` for moderate arguments and
//! through the Laplace continued fraction for the Mills ratio beyond
//! [`FAR_TAIL_CUT`], always in the log domain, so `V` stays finite well past
//! the point where `1 - Phi(x)` underflows (x ~ 38).

use std::f64::consts::FRAC_1_SQRT_2;

use libm::erfc;
use serde::Serialize;
use statrs::function::erf::erfc_inv;

use crate::error::{domain, Result};

/// `log(2 pi)`.
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Above this abscissa the log tail is taken from the Mills-ratio continued
/// fraction instead of `ln(erfc)`.
pub const FAR_TAIL_CUT: f64 = 8.0;

const MILLS_CF_DEPTH: u32 = 64;

fn check_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        domain(format!("{what} must be finite, got {x}"))
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x - 0.5 * LN_2PI).exp()
}

/// `1 - Phi(x)` without validation. Accurate in relative terms for the
/// upper tail; underflows to zero near x = 38.6.
pub(crate) fn upper_tail(x: f64) -> f64 {
    if x >= FAR_TAIL_CUT {
        log_upper_tail(x).exp()
    } else {
        0.5 * erfc(x * FRAC_1_SQRT_2)
    }
}

/// `Phi(x)` without validation.
pub(crate) fn lower_tail(x: f64) -> f64 {
    upper_tail(-x)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)` by backward evaluation of
/// `1 / (x + 1 / (x + 2 / (x + 3 / (x + ...))))`. Only used for large `x`,
/// where 64 levels are far beyond double precision.
fn mills_ratio_cf(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=MILLS_CF_DEPTH).rev() {
        t = x + f64::from(k) / t;
    }
    1.0 / t
}

/// `ln(1 - Phi(x))` without validation.
pub(crate) fn log_upper_tail(x: f64) -> f64 {
    if x >= FAR_TAIL_CUT {
        -0.5 * x * x - 0.5 * LN_2PI + mills_ratio_cf(x).ln()
    } else if x > -1.0 {
        (0.5 * erfc(x * FRAC_1_SQRT_2)).ln()
    } else {
        // 1 - Phi(x) = 1 - Phi(-|x|), close to one
        (-lower_tail(x)).ln_1p()
    }
}

/// Standard normal distribution function `Phi(x)`.
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    check_finite(x, "x")?;
    Ok(lower_tail(x))
}

/// Upper tail `1 - Phi(x)`, computed directly rather than by subtraction.
pub fn std_normal_tail(x: f64) -> Result<f64> {
    check_finite(x, "x")?;
    Ok(upper_tail(x))
}

/// `ln(1 - Phi(x))`, finite for every finite `x`.
pub fn std_normal_log_tail(x: f64) -> Result<f64> {
    check_finite(x, "x")?;
    Ok(log_upper_tail(x))
}

/// Quantile for `p` strictly inside (0, 1), no validation.
///
/// Starts from the `erfc_inv` estimate and applies one Newton step against
/// the shipped distribution function so that `cdf(quantile(p))` reproduces
/// `p` with this crate's own `Phi`.
pub(crate) fn quantile_open(p: f64) -> f64 {
    let x0 = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    let density = std_normal_pdf(x0);
    if density == 0.0 || !x0.is_finite() {
        return x0;
    }
    let residual = if p < 0.5 {
        lower_tail(x0) - p
    } else {
        (1.0 - p) - upper_tail(x0)
    };
    x0 - residual / density
}

/// Inverse of the standard normal distribution function.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("quantile requires 0 < p < 1, got {p}"));
    }
    Ok(quantile_open(p))
}

/// The log-tail coordinate `V(x) = -2 ln(1 - Phi(x)) - ln(2 pi)`.
pub fn tail_v(x: f64) -> Result<f64> {
    Ok(-2.0 * std_normal_log_tail(x)? - LN_2PI)
}

fn check_v(v: f64) -> Result<()> {
    if v.is_finite() && v > 1.0 {
        Ok(())
    } else {
        domain(format!("inversion requires finite V > 1, got {v}"))
    }
}

/// Lower bound `V - ln V` for `x^2`, valid when `V = tail_v(x)` and `x >= 2`.
pub fn invert_v_lower(v: f64) -> Result<f64> {
    check_v(v)?;
    Ok(v - v.ln())
}

/// Upper bound `V - ln V + ln V / V` for `x^2`, valid when `V = tail_v(x)`
/// and `x >= 1`.
pub fn invert_v_upper(v: f64) -> Result<f64> {
    check_v(v)?;
    let lv = v.ln();
    Ok(v - lv + lv / v)
}

/// Abramowitz–Stegun bracket on `1 - Phi(x)` for `x >= 1`:
/// `phi(x)/x (1 - 1/x^2) <= 1 - Phi(x) <= phi(x)/x (1 - 1/x^2 + 3/x^4)`.
pub fn mills_bracket(x: f64) -> Result<(f64, f64)> {
    check_finite(x, "x")?;
    if x < 1.0 {
        return domain(format!("Mills bracket requires x >= 1, got {x}"));
    }
    let base = std_normal_pdf(x) / x;
    let inv2 = 1.0 / (x * x);
    Ok((base * (1.0 - inv2), base * (1.0 - inv2 + 3.0 * inv2 * inv2)))
}

/// [`mills_bracket`] in the log domain, usable where the bracket itself
/// underflows. The lower end is `-inf` at `x = 1`.
pub fn log_mills_bracket(x: f64) -> Result<(f64, f64)> {
    check_finite(x, "x")?;
    if x < 1.0 {
        return domain(format!("Mills bracket requires x >= 1, got {x}"));
    }
    let log_base = -0.5 * x * x - 0.5 * LN_2PI - x.ln();
    let inv2 = 1.0 / (x * x);
    Ok((
        log_base + (-inv2).ln_1p(),
        log_base + (3.0 * inv2 * inv2 - inv2).ln_1p(),
    ))
}

/// A standard-normal abscissa together with `y = x^2` and its `V` value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

impl TailPoint {
    pub fn at(x: f64) -> Result<Self> {
        Ok(TailPoint {
            x,
            y: x * x,
            v: tail_v(x)?,
        })
    }

    /// `[sqrt(V - ln V), sqrt(V - ln V + ln V / V)]`, the bracket the
    /// inversion bounds place on `x` (meaningful for `x >= 2`).
    pub fn x_bracket(&self) -> Result<(f64, f64)> {
        Ok((
            invert_v_lower(self.v)?.sqrt(),
            invert_v_upper(self.v)?.sqrt(),
        ))
    }
}

/// Outcome of sweeping the inversion inequalities and the Mills bracket over
/// evenly spaced abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityGridReport {
    pub step: f64,
    pub rel_tolerance: f64,
    pub lower_points: usize,
    pub lower_violations: Vec<f64>,
    /// Smallest `(x^2 - (V - ln V)) / x^2` seen on the lower grid.
    pub lower_min_margin: f64,
    pub upper_points: usize,
    pub upper_violations: Vec<f64>,
    /// Smallest `((V - ln V + ln V / V) - x^2) / x^2` seen on the upper grid.
    pub upper_min_margin: f64,
    pub mills_points: usize,
    pub mills_violations: Vec<f64>,
}

impl InequalityGridReport {
    pub fn total_violations(&self) -> usize {
        self.lower_violations.len() + self.upper_violations.len() + self.mills_violations.len()
    }
}

fn grid(start: f64, stop: f64, step: f64) -> impl Iterator<Item = f64> {
    let count = ((stop - start) / step).round() as usize;
    (0..=count).map(move |i| start + step * i as f64)
}

/// Sweeps `V - ln V <= x^2` on `[2, 40]`, `x^2 <= V - ln V + ln V / V` on
/// `[1, 40]` with spacing `step`, and the Mills bracket on `[1, 40]` with
/// spacing `10 * step`. An inversion point is a violation only when the
/// inequality fails by more than `rel_tolerance * x^2`.
pub fn inequality_grid(step: f64, rel_tolerance: f64) -> Result<InequalityGridReport> {
    if !(step > 0.0 && step.is_finite()) {
        return domain(format!("grid step must be positive, got {step}"));
    }
    let mut report = InequalityGridReport {
        step,
        rel_tolerance,
        lower_points: 0,
        lower_violations: Vec::new(),
        lower_min_margin: f64::INFINITY,
        upper_points: 0,
        upper_violations: Vec::new(),
        upper_min_margin: f64::INFINITY,
        mills_points: 0,
        mills_violations: Vec::new(),
    };
    for x in grid(1.0, 40.0, step) {
        let point = TailPoint::at(x)?;
        let upper = invert_v_upper(point.v)?;
        let margin = (upper - point.y) / point.y;
        report.upper_points += 1;
        report.upper_min_margin = report.upper_min_margin.min(margin);
        if margin < -rel_tolerance {
            report.upper_violations.push(x);
        }
        if x >= 2.0 - 1e-12 {
            let lower = invert_v_lower(point.v)?;
            let margin = (point.y - lower) / point.y;
            report.lower_points += 1;
            report.lower_min_margin = report.lower_min_margin.min(margin);
            if margin < -rel_tolerance {
                report.lower_violations.push(x);
            }
        }
    }
    for x in grid(1.0, 40.0, 10.0 * step) {
        let (lo, hi) = log_mills_bracket(x)?;
        let lt = log_upper_tail(x);
        report.mills_points += 1;
        // the bracket is tighter than rel_tolerance far out, so compare logs
        // at a few ulps of slack
        let slack = 1e-13 * hi.abs().max(1.0);
        if lt < lo - slack || lt > hi + slack {
            report.mills_violations.push(x);
        }
    }
    Ok(report)
}
