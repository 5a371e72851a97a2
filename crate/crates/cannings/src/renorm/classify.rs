//! Symbolic classification of the volatility flow's large-`k` behaviour.
//!
//! The decision tree works on the families' exponents rather than on numeric
//! limits, so slowly varying factors cannot masquerade as constants. A
//! polynomial family is treated as an exponential family with base 1, which
//! lets one tree cover both coefficient grammars.

use super::family::CoefficientFamily;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Clustering versus local coexistence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Clustering,
    LocalCoexistence,
    Inconclusive,
}

/// A possibly-infinite limit, kept JSON-friendly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitValue {
    Finite(f64),
    Infinite,
}

impl LimitValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            LimitValue::Finite(x) => Some(*x),
            LimitValue::Infinite => None,
        }
    }
    pub fn is_zero(&self) -> bool {
        matches!(self, LimitValue::Finite(x) if *x == 0.0)
    }
}

/// Scaling-regime labels: lower case for polynomial coefficients, upper case
/// for exponential ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeCase {
    #[serde(rename = "a")]
    PolyA,
    #[serde(rename = "b")]
    PolyB,
    #[serde(rename = "c")]
    PolyC,
    #[serde(rename = "d")]
    PolyD,
    #[serde(rename = "A")]
    ExpA,
    #[serde(rename = "B")]
    ExpB,
    #[serde(rename = "C1")]
    ExpC1,
    #[serde(rename = "C2")]
    ExpC2,
    #[serde(rename = "C3")]
    ExpC3,
}

/// What `d_k` converges to, and against which normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", content = "value", rename_all = "kebab-case")]
pub enum ScalingLaw {
    /// `d_k / c_k -> value`
    DOverC(f64),
    /// `d_k / sqrt(c_k mu_k) -> value`
    DOverSqrtCMu(f64),
    /// `sigma_k d_k -> value`
    SigmaD(f64),
    /// `d_k / mu_k -> value`
    DOverMu(f64),
    /// `d_k` converges to a positive constant (local coexistence)
    DConverges,
    /// `d_k ~ sum_{l<=k} mu_l` (local coexistence with diverging volatility)
    DLikeMuSum,
}

/// How fast mono-type clusters grow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "speed", rename_all = "kebab-case")]
pub enum ClusterSpeed {
    Fast,
    Diffusive { r: f64 },
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Polynomial,
    Exponential,
}

/// Output of [`classify_regime`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub family_kind: FamilyKind,
    /// `K = lim mu_k/c_k` (polynomial) or `Kbar`, the limit of the regularly
    /// varying parts (exponential).
    pub k_limit: LimitValue,
    /// `L = lim k^2 mu_k/c_k`, computed when `K = 0` (polynomial only).
    pub l_limit: Option<LimitValue>,
    pub case: Option<RegimeCase>,
    pub scaling: Option<ScalingLaw>,
    pub m_asymptotics: String,
    pub verdict: Verdict,
    pub speed: Option<ClusterSpeed>,
}

/// Growth data `e^(ln_base * k) * amp * k^idx * (ln k)^logpow`.
#[derive(Debug, Clone, Copy)]
struct Growth {
    ln_base: f64,
    amp: f64,
    idx: f64,
    logpow: f64,
}

fn growth_of(f: &CoefficientFamily) -> Result<Option<Growth>> {
    Ok(match f {
        CoefficientFamily::Explicit { .. } => {
            return Err(Error::Unclassified(
                "explicit coefficient lists carry no asymptotics; use a closed-form family".into(),
            ))
        }
        CoefficientFamily::Zero => None,
        CoefficientFamily::Polynomial {
            amplitude,
            index,
            log_power,
        } => Some(Growth {
            ln_base: 0.0,
            amp: *amplitude,
            idx: *index,
            logpow: *log_power,
        }),
        CoefficientFamily::Exponential {
            base,
            amplitude,
            index,
            log_power,
        } => Some(Growth {
            ln_base: base.ln(),
            amp: *amplitude,
            idx: *index,
            logpow: *log_power,
        }),
    })
}

/// `lim k^extra_power * (num/den)` from the exponent data.
fn ratio_limit(num: &Growth, den: &Growth, extra_power: f64) -> LimitValue {
    let b = num.ln_base - den.ln_base;
    if b > 0.0 {
        return LimitValue::Infinite;
    }
    if b < 0.0 {
        return LimitValue::Finite(0.0);
    }
    let i = num.idx - den.idx + extra_power;
    if i > 0.0 {
        return LimitValue::Infinite;
    }
    if i < 0.0 {
        return LimitValue::Finite(0.0);
    }
    let p = num.logpow - den.logpow;
    if p > 0.0 {
        LimitValue::Infinite
    } else if p < 0.0 {
        LimitValue::Finite(0.0)
    } else {
        LimitValue::Finite(num.amp / den.amp)
    }
}

/// Does `sum_k e^(ln_base k) amp k^idx (ln k)^logpow` diverge?
fn series_diverges(g: &Growth) -> Option<bool> {
    if g.ln_base > 0.0 {
        return Some(true);
    }
    if g.ln_base < 0.0 {
        return Some(false);
    }
    if g.idx > -1.0 {
        return Some(true);
    }
    if g.idx < -1.0 {
        return Some(false);
    }
    // sum 1/(k (ln k)^q) converges iff q > 1.
    if g.logpow >= -1.0 {
        Some(true)
    } else {
        Some(false)
    }
}

/// Growth of the cumulative sums `d_0 + sum_{l<=k} mu_l`; `None` marks the
/// `ln ln k` corner the grammar does not represent.
fn cumulative_growth(mu: Option<&Growth>) -> Option<Growth> {
    let bounded = Growth {
        ln_base: 0.0,
        amp: 1.0,
        idx: 0.0,
        logpow: 0.0,
    };
    let g = match mu {
        None => return Some(bounded),
        Some(g) => g,
    };
    if g.ln_base > 0.0 {
        // Partial sums grow like the last term.
        return Some(Growth {
            amp: g.amp / (1.0 - (-g.ln_base).exp()),
            ..*g
        });
    }
    if g.ln_base < 0.0 || g.idx < -1.0 {
        return Some(bounded);
    }
    if g.idx > -1.0 {
        return Some(Growth {
            ln_base: 0.0,
            amp: g.amp / (g.idx + 1.0),
            idx: g.idx + 1.0,
            logpow: g.logpow,
        });
    }
    // idx == -1
    if g.logpow > -1.0 {
        return Some(Growth {
            ln_base: 0.0,
            amp: g.amp / (g.logpow + 1.0),
            idx: 0.0,
            logpow: g.logpow + 1.0,
        });
    }
    if g.logpow == -1.0 {
        return None; // ln ln k
    }
    Some(bounded)
}

/// Symbolic clustering-vs-coexistence decision via divergence of
/// `sum_k (1/c_k)(d_0 + sum_{l<=k} mu_l)`.
///
/// Classification reports assume `d_0 > 0` whenever `mu = 0` (the pure
/// hierarchical Fleming-Viot reference), so the cumulative mass here is
/// always bounded below by a constant.
fn symbolic_dichotomy(c: &Growth, mu: Option<&Growth>) -> Result<Verdict> {
    let cum = cumulative_growth(mu).ok_or_else(|| {
        Error::Unclassified("cumulative resampling mass grows like ln ln k; outside the grammar".into())
    })?;
    let term = Growth {
        ln_base: cum.ln_base - c.ln_base,
        amp: cum.amp / c.amp,
        idx: cum.idx - c.idx,
        logpow: cum.logpow - c.logpow,
    };
    match series_diverges(&term) {
        Some(true) => Ok(Verdict::Clustering),
        Some(false) => Ok(Verdict::LocalCoexistence),
        None => Ok(Verdict::Inconclusive),
    }
}

/// Does `sigma_k = sum_{l<k} 1/c_l` diverge?
fn sigma_diverges(c: &Growth) -> bool {
    let inv = Growth {
        ln_base: -c.ln_base,
        amp: 1.0 / c.amp,
        idx: -c.idx,
        logpow: -c.logpow,
    };
    series_diverges(&inv).unwrap_or(false)
}

/// Case-(b) limit constant `M = K/2 (-1 + sqrt(1 + 4/K))`.
pub fn case_b_constant(k: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 / k).sqrt())
}

/// Case-(d) limit constant `M* = (1 + sqrt(1 + 4L/(1-a)^2))/2`.
pub fn case_d_constant(l: f64, a: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * l / ((1.0 - a) * (1.0 - a))).sqrt())
}

/// Case-(B) limit constant for exponential coefficients with common base `c`.
pub fn exp_case_b_constant(c: f64, kbar: f64) -> f64 {
    let s = c * (kbar + 1.0) - 1.0;
    (-s + (s * s + 4.0 * c * kbar).sqrt()) / (2.0 * c)
}

/// Classify the large-`k` regime of a (c, mu) coefficient pair.
pub fn classify_regime(c: &CoefficientFamily, mu: &CoefficientFamily) -> Result<RegimeReport> {
    c.require_positive("migration coefficients")?;
    let gc = growth_of(c)?.expect("positive family has growth data");
    let gmu = growth_of(mu)?;

    let exp_like = gc.ln_base != 0.0 || gmu.map_or(false, |g| g.ln_base != 0.0);
    if exp_like {
        classify_exponential(&gc, gmu.as_ref())
    } else {
        classify_polynomial(&gc, gmu.as_ref())
    }
}

fn classify_polynomial(gc: &Growth, gmu: Option<&Growth>) -> Result<RegimeReport> {
    let k_limit = match gmu {
        None => LimitValue::Finite(0.0),
        Some(g) => ratio_limit(g, gc, 0.0),
    };
    let report = |case, scaling, l_limit, m_asym: String, verdict, speed| RegimeReport {
        family_kind: FamilyKind::Polynomial,
        k_limit,
        l_limit,
        case,
        scaling,
        m_asymptotics: m_asym,
        verdict,
        speed,
    };

    match k_limit {
        LimitValue::Infinite => Ok(report(
            Some(RegimeCase::PolyA),
            Some(ScalingLaw::DOverC(1.0)),
            None,
            "m_k ~ mu_k/c_k -> infinity".into(),
            Verdict::Clustering,
            Some(ClusterSpeed::Fast),
        )),
        LimitValue::Finite(k) if k > 0.0 => {
            let m = case_b_constant(k);
            Ok(report(
                Some(RegimeCase::PolyB),
                Some(ScalingLaw::DOverC(m)),
                None,
                format!("m_k -> {}", k + m),
                Verdict::Clustering,
                Some(ClusterSpeed::Fast),
            ))
        }
        _ => {
            // K = 0: refine with L = lim k^2 mu_k/c_k.
            let l_limit = match gmu {
                None => LimitValue::Finite(0.0),
                Some(g) => ratio_limit(g, gc, 2.0),
            };
            match l_limit {
                LimitValue::Infinite => Ok(report(
                    Some(RegimeCase::PolyC),
                    Some(ScalingLaw::DOverSqrtCMu(1.0)),
                    Some(l_limit),
                    "m_k ~ sqrt(mu_k/c_k) -> 0".into(),
                    Verdict::Clustering,
                    Some(ClusterSpeed::Fast),
                )),
                LimitValue::Finite(l) => {
                    let a = gc.idx;
                    if a < 1.0 {
                        let m_star = case_d_constant(l, a);
                        let r = m_star * (1.0 - a);
                        Ok(report(
                            Some(RegimeCase::PolyD),
                            Some(ScalingLaw::SigmaD(m_star)),
                            Some(l_limit),
                            format!("m_k ~ {m_star}/(c_k sigma_k) -> 0"),
                            Verdict::Clustering,
                            Some(ClusterSpeed::Diffusive { r }),
                        ))
                    } else {
                        match symbolic_dichotomy(gc, gmu)? {
                            Verdict::LocalCoexistence => Ok(report(
                                None,
                                Some(coexistence_scaling(gmu)),
                                Some(l_limit),
                                "sum m_k < infinity".into(),
                                Verdict::LocalCoexistence,
                                None,
                            )),
                            _ => Err(Error::Unclassified(format!(
                                "migration index a = {a} >= 1 with K = 0, L < infinity is outside \
                                 the clustering scaling theorem"
                            ))),
                        }
                    }
                }
            }
        }
    }
}

/// In the coexistence regime `d_k` converges when the total resampling mass
/// is summable and otherwise grows like the partial sums of `mu`.
fn coexistence_scaling(gmu: Option<&Growth>) -> ScalingLaw {
    match gmu {
        None => ScalingLaw::DConverges,
        Some(g) => {
            if series_diverges(g) == Some(true) {
                ScalingLaw::DLikeMuSum
            } else {
                ScalingLaw::DConverges
            }
        }
    }
}

fn classify_exponential(gc: &Growth, gmu: Option<&Growth>) -> Result<RegimeReport> {
    let cb = gc.ln_base;
    let part_c = Growth { ln_base: 0.0, ..*gc };
    // mu = 0 behaves like base 0: strictly below any positive base.
    let (mb, part_mu) = match gmu {
        None => (f64::NEG_INFINITY, None),
        Some(g) => (g.ln_base, Some(Growth { ln_base: 0.0, ..*g })),
    };
    let kbar = match part_mu.as_ref() {
        None => LimitValue::Finite(0.0),
        Some(pm) => ratio_limit(pm, &part_c, 0.0),
    };
    let verdict = symbolic_dichotomy(gc, gmu)?;
    let report = |case, scaling, m_asym: String, verdict, speed| RegimeReport {
        family_kind: FamilyKind::Exponential,
        k_limit: kbar,
        l_limit: None,
        case,
        scaling,
        m_asymptotics: m_asym,
        verdict,
        speed,
    };

    // Case A: mu dominates (strictly larger base, or same base with
    // diverging part ratio).
    if cb < mb || (cb == mb && kbar == LimitValue::Infinite) {
        let c = cb.exp();
        return Ok(report(
            Some(RegimeCase::ExpA),
            Some(ScalingLaw::DOverC(1.0 / c)),
            "m_k ~ mu_k/c_k -> infinity".into(),
            Verdict::Clustering,
            Some(ClusterSpeed::Fast),
        ));
    }

    if cb == mb {
        let c = cb.exp();
        match kbar {
            LimitValue::Finite(k) if k > 0.0 => {
                let m = exp_case_b_constant(c, k);
                return Ok(report(
                    Some(RegimeCase::ExpB),
                    Some(ScalingLaw::DOverC(m)),
                    format!("m_k -> {}", k + m),
                    Verdict::Clustering,
                    Some(ClusterSpeed::Fast),
                ));
            }
            _ => {
                // Kbar = 0.
                if c < 1.0 {
                    return Ok(report(
                        Some(RegimeCase::ExpC2),
                        Some(ScalingLaw::DOverC((1.0 - c) / c)),
                        format!("m_k -> {}", (1.0 - c) / c),
                        Verdict::Clustering,
                        Some(ClusterSpeed::Fast),
                    ));
                }
                // c = mu > 1, Kbar = 0: clustering iff sum of part ratios
                // diverges; speed from lim k mubar_k/cbar_k.
                let pm = part_mu.as_ref().expect("Kbar finite requires mu > 0");
                if verdict == Verdict::LocalCoexistence {
                    return Ok(report(
                        Some(RegimeCase::ExpC3),
                        Some(coexistence_scaling(gmu)),
                        "sum m_k < infinity".into(),
                        Verdict::LocalCoexistence,
                        None,
                    ));
                }
                let mu_val = c;
                let speed = match ratio_limit(pm, &part_c, 1.0) {
                    LimitValue::Infinite => Some(ClusterSpeed::Fast),
                    LimitValue::Finite(v) if v > 0.0 => Some(ClusterSpeed::Diffusive {
                        r: v / (mu_val - 1.0),
                    }),
                    _ => {
                        // k mubar/cbar -> 0: slow clustering when the decay
                        // is a log power in (0,1), unclassified otherwise.
                        let dp = pm.idx - part_c.idx + 1.0;
                        let lp = pm.logpow - part_c.logpow;
                        if dp == 0.0 && lp > -1.0 && lp < 0.0 {
                            Some(ClusterSpeed::Slow)
                        } else {
                            None
                        }
                    }
                };
                return Ok(report(
                    Some(RegimeCase::ExpC3),
                    Some(ScalingLaw::DOverMu(1.0 / (mu_val - 1.0))),
                    format!("m_k ~ mubar_k/cbar_k / {}", mu_val - 1.0),
                    verdict,
                    speed,
                ));
            }
        }
    }

    // cb > mb.
    let c = cb.exp();
    if c < 1.0 || (c == 1.0 && sigma_diverges(gc)) {
        return Ok(report(
            Some(RegimeCase::ExpC1),
            Some(ScalingLaw::SigmaD(1.0)),
            "m_k ~ 1/(c_k sigma_k) -> positive constant".into(),
            Verdict::Clustering,
            Some(ClusterSpeed::Fast),
        ));
    }
    Ok(report(
        None,
        Some(coexistence_scaling(gmu)),
        "sum m_k < infinity".into(),
        Verdict::LocalCoexistence,
        None,
    ))
}

/// Cluster-growth speed of an already-classified clustering regime.
pub fn clustering_speed(report: &RegimeReport) -> Result<ClusterSpeed> {
    if report.verdict != Verdict::Clustering {
        return Err(Error::parameter(
            "cluster speed is defined only in the clustering regime",
        ));
    }
    report.speed.ok_or_else(|| {
        Error::Unclassified("cluster speed outside the classified windows".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(amp: f64, idx: f64) -> CoefficientFamily {
        CoefficientFamily::polynomial(amp, idx, 0.0).unwrap()
    }

    #[test]
    fn balanced_case_b_constant() {
        // mu/c -> 2 gives M = -1 + sqrt(3).
        let rep = classify_regime(&poly(1.0, 1.0), &poly(2.0, 1.0)).unwrap();
        assert_eq!(rep.case, Some(RegimeCase::PolyB));
        match rep.scaling {
            Some(ScalingLaw::DOverC(m)) => {
                assert!((m - (3f64.sqrt() - 1.0)).abs() < 1e-14, "M = {m}")
            }
            other => panic!("unexpected scaling {other:?}"),
        }
        assert_eq!(rep.verdict, Verdict::Clustering);
        assert_eq!(rep.speed, Some(ClusterSpeed::Fast));
    }

    #[test]
    fn case_d_golden_ratio_and_diffusive_speed() {
        // a = 0, L = 1: M* = (1+sqrt(5))/2, R = M*.
        let c = poly(1.0, 0.0);
        let mu = poly(1.0, -2.0);
        let rep = classify_regime(&c, &mu).unwrap();
        assert_eq!(rep.case, Some(RegimeCase::PolyD));
        match rep.scaling {
            Some(ScalingLaw::SigmaD(m)) => {
                assert!((m - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14)
            }
            other => panic!("unexpected scaling {other:?}"),
        }
        match rep.speed {
            Some(ClusterSpeed::Diffusive { r }) => {
                assert!((r - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14)
            }
            other => panic!("unexpected speed {other:?}"),
        }
    }

    #[test]
    fn case_d_with_l_zero_has_unit_rate() {
        // a = 0, L = 0 (mu decays faster than k^-2): M* = 1, R = 1.
        let rep = classify_regime(&poly(1.0, 0.0), &poly(1.0, -3.0)).unwrap();
        assert_eq!(rep.case, Some(RegimeCase::PolyD));
        assert_eq!(rep.scaling, Some(ScalingLaw::SigmaD(1.0)));
        assert_eq!(rep.speed, Some(ClusterSpeed::Diffusive { r: 1.0 }));
    }

    #[test]
    fn exponential_case_b_sqrt_two() {
        // c = mu = 1/2, Kbar = 1: Mbar = sqrt(2).
        let c = CoefficientFamily::exponential(0.5, 1.0, 0.0, 0.0).unwrap();
        let mu = CoefficientFamily::exponential(0.5, 1.0, 0.0, 0.0).unwrap();
        let rep = classify_regime(&c, &mu).unwrap();
        assert_eq!(rep.case, Some(RegimeCase::ExpB));
        match rep.scaling {
            Some(ScalingLaw::DOverC(m)) => assert!((m - 2f64.sqrt()).abs() < 1e-14, "Mbar = {m}"),
            other => panic!("unexpected scaling {other:?}"),
        }
    }

    #[test]
    fn exponential_c3_diffusive_window() {
        // c = mu = 2, parts ratio ~ 1/k with amplitude mu-1 = 1: R = 1.
        let c = CoefficientFamily::exponential(2.0, 1.0, 0.0, 0.0).unwrap();
        let mu = CoefficientFamily::exponential(2.0, 1.0, -1.0, 0.0).unwrap();
        let rep = classify_regime(&c, &mu).unwrap();
        assert_eq!(rep.case, Some(RegimeCase::ExpC3));
        assert_eq!(rep.verdict, Verdict::Clustering);
        match rep.speed {
            Some(ClusterSpeed::Diffusive { r }) => assert!((r - 1.0).abs() < 1e-14),
            other => panic!("unexpected speed {other:?}"),
        }
    }

    #[test]
    fn exponential_c3_slow_window_and_coexistence() {
        let c = CoefficientFamily::exponential(2.0, 1.0, 0.0, 0.0).unwrap();
        let mu_slow = CoefficientFamily::exponential(2.0, 1.0, -1.0, -0.5).unwrap();
        let rep = classify_regime(&c, &mu_slow).unwrap();
        assert_eq!(rep.speed, Some(ClusterSpeed::Slow));
        let mu_coex = CoefficientFamily::exponential(2.0, 1.0, -1.0, -2.0).unwrap();
        let rep = classify_regime(&c, &mu_coex).unwrap();
        assert_eq!(rep.verdict, Verdict::LocalCoexistence);
        assert!(clustering_speed(&rep).is_err());
    }

    #[test]
    fn transient_migration_without_resampling_coexists() {
        let c = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        let rep = classify_regime(&c, &CoefficientFamily::zero()).unwrap();
        assert_eq!(rep.verdict, Verdict::LocalCoexistence);
        assert_eq!(rep.case, None);
    }

    #[test]
    fn barely_transient_with_slow_resampling_coexists() {
        // c_k = k (ln k)^3, mu_k = 1/k: local coexistence.
        let c = CoefficientFamily::polynomial(1.0, 1.0, 3.0).unwrap();
        let mu = poly(1.0, -1.0);
        let rep = classify_regime(&c, &mu).unwrap();
        assert_eq!(rep.verdict, Verdict::LocalCoexistence);
        assert_eq!(rep.scaling, Some(ScalingLaw::DLikeMuSum));
    }

    #[test]
    fn explicit_lists_are_rejected() {
        let c = CoefficientFamily::explicit(vec![1.0, 2.0]).unwrap();
        let mu = poly(1.0, 0.0);
        assert!(matches!(
            classify_regime(&c, &mu),
            Err(Error::Unclassified(_))
        ));
    }

    #[test]
    fn boundary_index_is_unclassified_when_clustering() {
        // a = 1 exactly, K = 0, L finite, diverging mixed series.
        let c = poly(1.0, 1.0);
        let mu = poly(1.0, -1.0);
        assert!(matches!(
            classify_regime(&c, &mu),
            Err(Error::Unclassified(_))
        ));
    }

    #[test]
    fn case_boundary_continuity_of_m() {
        // M(K) -> 1 as K -> infinity; M(K) ~ sqrt(K) as K -> 0.
        assert!((case_b_constant(1e8) - 1.0).abs() < 1e-4);
        for k in [1e-4, 1e-6, 1e-8] {
            let m = case_b_constant(k);
            assert!((m / k.sqrt() - 1.0).abs() < 1e-2, "K={k}: M={m}");
        }
    }
}
