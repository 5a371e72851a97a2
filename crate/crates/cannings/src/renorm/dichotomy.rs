//! Numeric clustering-vs-coexistence test with three concordant indicators.
//!
//! The indicators are trend classifications of
//! 1. the partial sums of `m_k` from the volatility flow,
//! 2. the partial sums of `(1/c_k)(d_0 + sum_{l<=k} mu_l)`,
//! 3. (when a hierarchy order is supplied) the level-truncated
//!    pair-coalescence hazard.
//!
//! Divergence or convergence is decided by fitting the local decay exponent
//! of the series terms; the verdicts are numerical trend statements, not
//! proofs, and `Inconclusive` is a valid outcome.

use super::classify::Verdict;
use super::family::CoefficientFamily;
use super::flow::dk_flow;
use super::hazard::hazard_partial_sums;
use crate::Result;
use crate::{Error};
use serde::Serialize;

/// Trend classification of one indicator series.
#[derive(Debug, Clone, Serialize)]
pub struct IndicatorReport {
    pub name: String,
    pub verdict: Verdict,
    /// Last partial sum.
    pub head: f64,
    /// Estimated local decay exponent of the terms (`> 1` converges).
    pub alpha_hat: f64,
    pub detail: String,
}

/// Combined dichotomy verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub indicators: Vec<IndicatorReport>,
    pub verdict: Verdict,
    /// Whether the weak regularity condition linking the finite-N and
    /// infinite-N dichotomies holds numerically.
    pub regularity_ok: bool,
}

/// Relative tail increment below which a series counts as plateaued.
const PLATEAU_TOL: f64 = 1e-8;

/// Classify a positive term sequence by the trend of its partial sums.
fn classify_terms(name: &str, terms: &[f64]) -> IndicatorReport {
    let mut head = 0.0;
    for t in terms {
        if !t.is_finite() {
            return IndicatorReport {
                name: name.into(),
                verdict: Verdict::Clustering,
                head: f64::INFINITY,
                alpha_hat: f64::NEG_INFINITY,
                detail: "partial sums overflow".into(),
            };
        }
        head += t;
    }
    let len = terms.len();
    let report = |verdict, alpha: f64, detail: String| IndicatorReport {
        name: name.into(),
        verdict,
        head,
        alpha_hat: alpha,
        detail,
    };
    if head == 0.0 {
        return report(Verdict::LocalCoexistence, f64::INFINITY, "series is identically zero".into());
    }
    // Plateau: the last tenth of the sequence adds a negligible amount.
    let w = (len / 10).max(1);
    let tail_inc: f64 = terms[len - w..].iter().sum();
    if tail_inc < PLATEAU_TOL * head.abs() {
        return report(
            Verdict::LocalCoexistence,
            f64::INFINITY,
            format!("tail increment {tail_inc:.3e} below {PLATEAU_TOL:e} of head"),
        );
    }
    let k3 = len - 1;
    let k2 = (len / 2).max(2);
    if k3 <= k2 + 2 {
        return report(Verdict::Inconclusive, f64::NAN, "too few terms for a trend fit".into());
    }
    let (t2, t3) = (terms[k2], terms[k3]);
    if t3 == 0.0 {
        return report(Verdict::LocalCoexistence, f64::INFINITY, "terms vanish".into());
    }
    if t3 > t2 * 1.0001 {
        return report(
            Verdict::Clustering,
            f64::NEG_INFINITY,
            "terms are growing".into(),
        );
    }
    // Local power: t_k ~ k^-alpha around the tail.
    let alpha = (t2 / t3).ln() / (k3 as f64 / k2 as f64).ln();
    if alpha > 1.05 {
        return report(Verdict::LocalCoexistence, alpha, "terms decay faster than 1/k".into());
    }
    if alpha < 0.95 {
        return report(Verdict::Clustering, alpha, "terms decay slower than 1/k".into());
    }
    // Near the 1/k boundary: resolve the log correction
    // t_k ~ k^-1 (ln k)^-beta, convergent iff beta > 1.
    let beta = (alpha - 1.0) * ((k2 as f64 * k3 as f64).sqrt()).ln();
    if beta > 1.15 {
        report(
            Verdict::LocalCoexistence,
            alpha,
            format!("boundary decay with log power {beta:.2} > 1"),
        )
    } else if beta < 0.85 {
        report(
            Verdict::Clustering,
            alpha,
            format!("boundary decay with log power {beta:.2} < 1"),
        )
    } else {
        report(
            Verdict::Inconclusive,
            alpha,
            format!("log power {beta:.2} too close to the 1/(k ln k) boundary"),
        )
    }
}

/// Evaluate the weak regularity condition: either `lambda_{k+1}/c_k` stays
/// bounded, or both `lambda_{k+1}/c_k` and `lambda_k/lambda_{k+1}` stay
/// bounded away from zero.
fn regularity_holds(c: &CoefficientFamily, mu: &CoefficientFamily, k_max: usize) -> bool {
    let lam = |k: usize| 2.0 * mu.value(k);
    let quarter = (k_max / 4).max(2);
    let sup = |lo: usize, hi: usize| -> f64 {
        (lo..hi)
            .map(|k| lam(k + 1) / c.value(k))
            .fold(0.0f64, f64::max)
    };
    let early = sup(quarter, 2 * quarter).max(1e-300);
    let late = sup(2 * quarter, k_max);
    if late <= 10.0 * early || late < 1e3 {
        return true;
    }
    let inf = (2 * quarter..k_max)
        .map(|k| {
            let a = lam(k + 1) / c.value(k);
            let b = if lam(k + 1) > 0.0 { lam(k) / lam(k + 1) } else { f64::INFINITY };
            a.min(b)
        })
        .fold(f64::INFINITY, f64::min);
    inf > 1e-12
}

/// Run the three-indicator dichotomy test.
///
/// `n`, when given, must satisfy the finite-order guards
/// (`limsup log(c_k)/k < log n` and likewise for `2 mu_k`), otherwise the
/// hazard indicator fails to construct.
pub fn dichotomy_test(
    c: &CoefficientFamily,
    mu: &CoefficientFamily,
    d0: f64,
    k_max: usize,
    n: Option<u32>,
) -> Result<DichotomyReport> {
    if k_max < 64 {
        return Err(Error::parameter("dichotomy test needs k_max >= 64"));
    }
    let flow = dk_flow::<f64>(c, mu, d0, k_max)?;
    let mut indicators = vec![classify_terms("sum m_k", &flow.m)];

    let mixed_terms: Vec<f64> = {
        let mut cum = d0;
        (0..=k_max)
            .map(|k| {
                cum += mu.value(k);
                cum / c.value(k)
            })
            .collect()
    };
    indicators.push(classify_terms(
        "sum (1/c_k)(d0 + sum mu_l)",
        &mixed_terms,
    ));

    if let Some(order) = n {
        let lambdas: Vec<f64> = (0..=k_max.min(2048))
            .map(|k| 2.0 * mu.value(k) + if k == 0 { 2.0 * d0 } else { 0.0 })
            .collect();
        let hazard = hazard_partial_sums(order, c, &lambdas)?;
        let ind = match hazard {
            None => IndicatorReport {
                name: "truncated pair hazard".into(),
                verdict: Verdict::Clustering,
                head: f64::INFINITY,
                alpha_hat: f64::NEG_INFINITY,
                detail: "recurrent effective walk: hazard infinite".into(),
            },
            Some(terms) => classify_terms("truncated pair hazard", &terms),
        };
        indicators.push(ind);
    }

    let verdict = if indicators
        .iter()
        .all(|i| i.verdict == indicators[0].verdict)
    {
        indicators[0].verdict
    } else {
        Verdict::Inconclusive
    };
    Ok(DichotomyReport {
        indicators,
        verdict,
        regularity_ok: regularity_holds(c, mu, k_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(amp: f64, idx: f64, lp: f64) -> CoefficientFamily {
        CoefficientFamily::polynomial(amp, idx, lp).unwrap()
    }

    #[test]
    fn fleming_viot_recurrent_clusters() {
        // c = 1, mu = 0, d0 = 1: d_k = 1/(1+k), sum m_k ~ log diverges.
        let rep = dichotomy_test(
            &poly(1.0, 0.0, 0.0),
            &CoefficientFamily::zero(),
            1.0,
            10_000,
            Some(2),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Clustering, "{rep:?}");
        assert!(rep.regularity_ok);
        assert_eq!(rep.indicators.len(), 3);
    }

    #[test]
    fn fleming_viot_transient_coexists() {
        let c = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        let rep = dichotomy_test(&c, &CoefficientFamily::zero(), 1.0, 10_000, Some(8)).unwrap();
        assert_eq!(rep.verdict, Verdict::LocalCoexistence, "{rep:?}");
    }

    #[test]
    fn slowly_transient_with_weak_resampling_coexists() {
        // c_k = k (ln k)^3, mu_k = 1/k: terms ~ 1/(k ln^2 k) converge.
        let rep = dichotomy_test(&poly(1.0, 1.0, 3.0), &poly(1.0, -1.0, 0.0), 0.0, 10_000, Some(2))
            .unwrap();
        assert_eq!(rep.verdict, Verdict::LocalCoexistence, "{rep:?}");
    }

    #[test]
    fn linear_migration_with_constant_resampling_clusters() {
        let rep = dichotomy_test(&poly(1.0, 1.0, 0.0), &poly(1.0, 0.0, 0.0), 0.0, 10_000, Some(2))
            .unwrap();
        assert_eq!(rep.verdict, Verdict::Clustering, "{rep:?}");
    }
}
