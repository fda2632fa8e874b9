//! Distributional bounds on the maximum `M_n` of `n` Gaussian variables.
//!
//! Upper bounds hold for any dependence structure (union bound and the
//! exponential coupling); the two-sided bracket on `M_n^2` is for
//! independent variables; the lower-bound certificate covers arbitrary
//! zero-mean Gaussian vectors through their residual (`sigma`) and
//! conditional-mean (`tau`) standard deviations.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaussian::{self, invert_v_upper, LN_2PI};

/// Smallest value of `N + L_alpha` for which the lower bound is asserted.
pub const LOWER_BOUND_GATE: f64 = 6.0;

/// Number of variables together with its centering term `N = ln(n^2 / 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxQuery {
    pub n: u64,
    pub level: f64,
}

impl MaxQuery {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return domain("n must be at least 1");
        }
        Ok(MaxQuery {
            n,
            level: 2.0 * (n as f64).ln() - LN_2PI,
        })
    }
}

fn check_open_probability(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        domain(format!("{what} must lie in (0, 1), got {p}"))
    }
}

/// `min(1, n * single_tail)`: an upper bound on `Pr{M_n >= A}` given the
/// common marginal tail `1 - F(A)`, whatever the dependence.
pub fn union_upper_tail(n: u64, single_tail: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&single_tail) {
        return domain(format!(
            "tail probability must lie in [0, 1], got {single_tail}"
        ));
    }
    Ok((n as f64 * single_tail).min(1.0))
}

/// `p`-quantile of the standard Gumbel law, `-ln(-ln p)`.
pub fn gumbel_quantile(p: f64) -> Result<f64> {
    check_open_probability(p, "p")?;
    Ok(-(-p.ln()).ln())
}

/// Standard Gumbel distribution function `exp(-exp(-g))`.
pub fn gumbel_cdf(g: f64) -> f64 {
    (-(-g).exp()).exp()
}

/// `p`-quantile of the unit exponential law, `-ln(1 - p)`.
pub fn exponential_quantile(p: f64) -> Result<f64> {
    check_open_probability(p, "p")?;
    Ok(-(-p).ln_1p())
}

/// `-ln(-n ln F(m))` for a generic marginal distribution function.
///
/// When `m` is the maximum of `n` independent draws from `F` the result is
/// standard Gumbel.
pub fn gumbel_transform_of_max<F>(m: f64, n: u64, cdf_single: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let f = cdf_single(m);
    if !(f > 0.0 && f < 1.0) {
        return domain(format!("F(m) must lie strictly inside (0, 1), got {f}"));
    }
    Ok(-(-(n as f64) * f.ln()).ln())
}

/// The three members of the coupling sandwich
/// `G <= -ln(n (1 - F(M_n))) <= G + exp(-G) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingSandwich {
    pub gumbel: f64,
    pub middle: f64,
    pub upper: f64,
}

impl CouplingSandwich {
    /// Whether both inequalities hold up to `tol` (absolute).
    pub fn holds(&self, tol: f64) -> bool {
        self.gumbel <= self.middle + tol && self.middle <= self.upper + tol
    }
}

/// Gumbel transform and sandwich for a maximum of `n` standard normals,
/// computed from `ln(1 - Phi(m))` so that it stays accurate in the far tail.
pub fn normal_coupling_sandwich(m: f64, n: u64) -> Result<CouplingSandwich> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let log_tail = gaussian::std_normal_log_tail(m)?;
    // ln Phi(m) = ln(1 - tail)
    let log_cdf = (-log_tail.exp()).ln_1p();
    if !(log_cdf < 0.0) {
        return domain(format!("Phi({m}) rounds to 1; transform undefined"));
    }
    if !log_cdf.is_finite() {
        return domain(format!("Phi({m}) underflows; transform undefined"));
    }
    let nf = n as f64;
    let gumbel = -(-nf * log_cdf).ln();
    let middle = -nf.ln() - log_tail;
    let upper = gumbel + (-gumbel).exp() / nf;
    Ok(CouplingSandwich {
        gumbel,
        middle,
        upper,
    })
}

/// Bracket on `M_n^2` at a given coupling value (Gumbel `g` or exponential
/// `e`). `regime_ok` records whether the applicability condition of the
/// bracket holds at that coupling value; brackets outside the regime are
/// still returned but are not certified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileBracket {
    pub coupling_value: f64,
    pub msq_lower: Option<f64>,
    pub msq_upper: f64,
    pub regime_ok: bool,
}

/// Two-sided bracket on `M_n^2` for `n` independent unit Gaussians at Gumbel
/// value `g`:
/// `(N + 2g) - ln(N + 2g) <= M_n^2 <= W - ln W + ln W / W`
/// with `W = N + 2g + 2 exp(-g) / n`.
///
/// `regime_ok` is set when the `M_n` corresponding to `g` is at least 2.
pub fn independent_msq_bracket(q: &MaxQuery, g: f64) -> Result<QuantileBracket> {
    if !g.is_finite() {
        return domain(format!("coupling value must be finite, got {g}"));
    }
    let base = q.level + 2.0 * g;
    if base <= 1.0 {
        return domain(format!("bracket requires N + 2g > 1, got {base}"));
    }
    let nf = q.n as f64;
    let lower = base - base.ln();
    let upper = invert_v_upper(base + 2.0 * (-g).exp() / nf)?;
    // g is increasing in M_n, so M_n >= 2 iff g >= G(2)
    let g_at_two = -(-nf * gaussian::lower_tail(2.0).ln()).ln();
    Ok(QuantileBracket {
        coupling_value: g,
        msq_lower: Some(lower),
        msq_upper: upper,
        regime_ok: g >= g_at_two,
    })
}

/// `max(1, V - ln V + ln V / V)` at `V = N + 2e`: an upper bound on `M_n^2`
/// (read as `M_n <= sqrt(.)`) for unit Gaussians under any dependence.
pub fn dependent_msq_upper(q: &MaxQuery, e: f64) -> Result<f64> {
    if !(e >= 0.0 && e.is_finite()) {
        return domain(format!(
            "exponential value must be finite and >= 0, got {e}"
        ));
    }
    let v = q.level + 2.0 * e;
    if v <= 1.0 {
        return Ok(1.0);
    }
    Ok(invert_v_upper(v)?.max(1.0))
}

/// [`dependent_msq_upper`] packaged as a one-sided [`QuantileBracket`];
/// `regime_ok` is false when `N + 2e <= 1` and the clamp at 1 is active.
pub fn dependent_msq_bracket(q: &MaxQuery, e: f64) -> Result<QuantileBracket> {
    let upper = dependent_msq_upper(q, e)?;
    Ok(QuantileBracket {
        coupling_value: e,
        msq_lower: None,
        msq_upper: upper,
        regime_ok: q.level + 2.0 * e > 1.0,
    })
}

/// `L_alpha = -2 ln(-ln alpha)`.
pub fn l_alpha(alpha: f64) -> Result<f64> {
    check_open_probability(alpha, "alpha")?;
    Ok(-2.0 * (-alpha.ln()).ln())
}

/// Smallest `n` for which `N + L_alpha >= 6`.
pub fn min_valid_n(alpha: f64) -> Result<u64> {
    let l = l_alpha(alpha)?;
    // N + L >= 6  <=>  n >= sqrt(2 pi exp(6 - L))
    let approx = (0.5 * (LN_2PI + LOWER_BOUND_GATE - l))
        .exp()
        .floor()
        .max(1.0) as u64;
    let mut n = approx.saturating_sub(1).max(1);
    while MaxQuery::new(n)?.level + l < LOWER_BOUND_GATE {
        n += 1;
    }
    Ok(n)
}

/// A guaranteed lower tail probability for `M_n`:
/// `Pr{M_n >= threshold} >= guaranteed_tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub n: u64,
    pub alpha: f64,
    pub l_alpha: f64,
    pub sigma: f64,
    pub tau: f64,
    pub threshold: f64,
    pub guaranteed_tail: f64,
}

/// Builds the lower-bound certificate
/// `Pr{M_n >= sigma sqrt(N + L - ln(N + L)) + tau Phi^{-1}(alpha)} >= 1 - 2 alpha`,
/// where `sigma^2` bounds every residual variance from below and `tau^2`
/// every conditional-mean variance from above.
pub fn lower_bound_certificate(
    n: u64,
    alpha: f64,
    sigma: f64,
    tau: f64,
) -> Result<LowerBoundCertificate> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return domain(format!(
            "alpha must lie in (0, 1/2) for a non-vacuous guarantee, got {alpha}"
        ));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return domain(format!("tau must be non-negative and finite, got {tau}"));
    }
    let q = MaxQuery::new(n)?;
    let l = l_alpha(alpha)?;
    let s = q.level + l;
    if s < LOWER_BOUND_GATE {
        return Err(Error::Validity(format!(
            "requires N + L_alpha >= 6 (got {s:.4} at n={n}); smallest valid n at alpha={alpha} is {}",
            min_valid_n(alpha)?
        )));
    }
    let threshold = sigma * (s - s.ln()).sqrt() + tau * gaussian::quantile_open(alpha);
    Ok(LowerBoundCertificate {
        n,
        alpha,
        l_alpha: l,
        sigma,
        tau,
        threshold,
        guaranteed_tail: 1.0 - 2.0 * alpha,
    })
}

/// The median-level certificate in eigenvalue form: `alpha = 1/4`,
/// `sigma = sqrt(lambda_min)`, `tau = sqrt(lambda_max)`.
pub fn headline_bound(n: u64, lambda_min: f64, lambda_max: f64) -> Result<LowerBoundCertificate> {
    if !(lambda_min > 0.0 && lambda_min.is_finite()) {
        return domain(format!("lambda_min must be positive, got {lambda_min}"));
    }
    if !(lambda_max >= lambda_min && lambda_max.is_finite()) {
        return domain(format!(
            "lambda_max must be finite and >= lambda_min, got {lambda_max}"
        ));
    }
    lower_bound_certificate(n, 0.25, lambda_min.sqrt(), lambda_max.sqrt())
}

/// The rounded display form
/// `sqrt(lambda_min) (2 ln n - 2.5 - ln(2 ln n - 2.5))^(1/2) - 0.68 sqrt(lambda_max)`.
pub fn rounded_headline_threshold(n: u64, lambda_min: f64, lambda_max: f64) -> f64 {
    let s = 2.0 * (n as f64).ln() - 2.5;
    lambda_min.sqrt() * (s - s.ln()).sqrt() - 0.68 * lambda_max.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn query_level() {
        let q = MaxQuery::new(100).unwrap();
        assert_relative_eq!(q.level, 7.372_463_305_566_837, max_relative = 1e-14);
        assert!(MaxQuery::new(0).is_err());
    }

    #[test]
    fn union_tail() {
        assert_eq!(union_upper_tail(10, 0.0).unwrap(), 0.0);
        assert_eq!(union_upper_tail(100, 0.02275).unwrap(), 1.0);
        assert_relative_eq!(
            union_upper_tail(100, 1e-4).unwrap(),
            0.01,
            max_relative = 1e-14
        );
        assert!(union_upper_tail(3, 1.5).is_err());
        assert!(union_upper_tail(3, -0.1).is_err());
    }

    #[test]
    fn gumbel_and_exponential_quantiles() {
        assert!(gumbel_quantile((-1.0f64).exp()).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            gumbel_quantile(0.5).unwrap(),
            0.366_512_920_581_664_3,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            gumbel_quantile(0.75).unwrap(),
            1.245_899_323_707_238,
            max_relative = 1e-14
        );
        assert!(gumbel_quantile(0.0).is_err());
        assert!(gumbel_quantile(1.0).is_err());

        assert_relative_eq!(
            exponential_quantile(1.0 - (-1.0f64).exp()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            exponential_quantile(0.5).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            exponential_quantile(0.95).unwrap(),
            2.995_732_273_553_991,
            max_relative = 1e-14
        );
        assert!(exponential_quantile(0.0).is_err());
    }

    #[test]
    fn gumbel_transform_examples() {
        let n = 37;
        let fixed = gumbel_transform_of_max(0.0, n, |_| (-1.0 / n as f64).exp()).unwrap();
        assert!(fixed.abs() < 1e-14);
        let g = gumbel_transform_of_max(0.0, 1, |_| 0.5).unwrap();
        assert_relative_eq!(g, 0.366_512_920_581_664_3, max_relative = 1e-14);
        assert!(gumbel_transform_of_max(0.0, 5, |_| 1.0).is_err());
        assert!(gumbel_transform_of_max(0.0, 5, |_| 0.0).is_err());

        // n = 100, F(m) = 0.99
        let g = gumbel_transform_of_max(0.0, 100, |_| 0.99).unwrap();
        assert_relative_eq!(g, -0.005_020_959_211_511_37, max_relative = 1e-9);
        let middle = -(100.0f64 * 0.01).ln();
        assert!(g <= middle && middle <= g + (-g).exp() / 100.0);
    }

    #[test]
    fn sandwich_in_far_tail() {
        for m in [-1.0, 0.0, 2.0, 5.0, 9.0, 20.0] {
            let s = normal_coupling_sandwich(m, 1000).unwrap();
            assert!(s.holds(1e-12), "{m}: {s:?}");
        }
        assert!(normal_coupling_sandwich(1.0, 0).is_err());
    }

    #[test]
    fn independent_bracket_examples() {
        let q = MaxQuery::new(100).unwrap();
        let b = independent_msq_bracket(&q, gumbel_quantile(0.5).unwrap()).unwrap();
        assert_relative_eq!(
            b.msq_lower.unwrap(),
            6.012_947_642_132_23,
            max_relative = 1e-12
        );
        assert_relative_eq!(b.msq_upper, 6.283_034_917_950_059, max_relative = 1e-12);
        assert!(b.regime_ok);

        // N + 2g = e gives lower bracket e - 1
        let e = std::f64::consts::E;
        let g = 0.5 * (e - q.level);
        let b = independent_msq_bracket(&q, g).unwrap();
        assert_relative_eq!(b.msq_lower.unwrap(), e - 1.0, max_relative = 1e-14);
        assert!(!b.regime_ok);

        let g = 0.5 * (1.0 - q.level);
        assert!(independent_msq_bracket(&q, g).is_err());
    }

    #[test]
    fn dependent_upper_examples() {
        let q = MaxQuery::new(100).unwrap();
        assert_relative_eq!(
            dependent_msq_upper(&q, exponential_quantile(0.5).unwrap()).unwrap(),
            6.836_461_795_494_812,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            dependent_msq_upper(&q, 0.0).unwrap(),
            5.645_686_236_641_245,
            max_relative = 1e-12
        );
        let q1 = MaxQuery::new(1).unwrap();
        assert_eq!(dependent_msq_upper(&q1, 0.0).unwrap(), 1.0);
        assert!(!dependent_msq_bracket(&q1, 0.0).unwrap().regime_ok);
        assert!(dependent_msq_upper(&q, -0.1).is_err());
    }

    #[test]
    fn certificate_examples() {
        let c = lower_bound_certificate(100, 0.25, 1.0, 0.0).unwrap();
        assert_relative_eq!(c.threshold, 2.194_134_558_732_562, max_relative = 1e-10);
        assert_eq!(c.guaranteed_tail, 0.5);

        let c = lower_bound_certificate(70, 0.25, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.threshold, 1.378_096_850_427_25, max_relative = 1e-10);

        match lower_bound_certificate(69, 0.25, 1.0, 0.0) {
            Err(Error::Validity(msg)) => {
                assert!(msg.contains("N + L_alpha >= 6"), "{msg}");
                assert!(msg.contains("is 70"), "{msg}");
            }
            other => panic!("expected validity error, got {other:?}"),
        }
        assert!(matches!(
            lower_bound_certificate(100, 0.5, 1.0, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(lower_bound_certificate(100, 0.25, 0.0, 0.0).is_err());
        assert!(lower_bound_certificate(100, 0.25, 1.0, -1.0).is_err());
    }

    #[test]
    fn smallest_valid_n() {
        assert_eq!(min_valid_n(0.25).unwrap(), 70);
        for alpha in [0.01, 0.05, 0.1, 0.2, 0.4, 0.49] {
            let n = min_valid_n(alpha).unwrap();
            assert!(lower_bound_certificate(n, alpha, 1.0, 0.0).is_ok());
            if n > 1 {
                assert!(lower_bound_certificate(n - 1, alpha, 1.0, 0.0).is_err());
            }
        }
    }

    #[test]
    fn headline_examples() {
        let c = headline_bound(70, 1.0, 1.0).unwrap();
        assert_eq!(c.guaranteed_tail, 0.5);
        assert_relative_eq!(c.threshold, 1.378_096_850_427_25, max_relative = 1e-10);
        assert!(matches!(
            headline_bound(69, 1.0, 1.0),
            Err(Error::Validity(_))
        ));
        assert!(headline_bound(100, 0.0, 1.0).is_err());
        assert!(headline_bound(100, 2.0, 1.0).is_err());

        let c = headline_bound(1000, 0.25, 4.0).unwrap();
        let q = MaxQuery::new(1000).unwrap();
        let s = q.level + c.l_alpha;
        let expected =
            0.5 * (s - s.ln()).sqrt() + 2.0 * gaussian::std_normal_quantile(0.25).unwrap();
        assert_relative_eq!(c.threshold, expected, max_relative = 1e-14);
    }
}
