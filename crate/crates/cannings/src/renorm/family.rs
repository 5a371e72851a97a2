//! Coefficient sequences `c_k`, `mu_k` given in closed form or as lists.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A nonnegative coefficient sequence.
///
/// * `Explicit` lists are zero beyond their last entry, which truncates the
///   geography after that many levels.
/// * `Polynomial` is `amplitude * k^index * (ln k)^log_power`, with the
///   convention that both `k^index` and the log factor are treated as 1 for
///   `k <= 1`.
/// * `Exponential` multiplies a `base^k` prefactor onto the polynomial part.
/// * `Zero` is the identically-zero sequence (allowed for resampling masses,
///   not for migration coefficients).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientFamily {
    Explicit {
        values: Vec<f64>,
    },
    Polynomial {
        amplitude: f64,
        #[serde(default)]
        index: f64,
        #[serde(default)]
        log_power: f64,
    },
    Exponential {
        base: f64,
        amplitude: f64,
        #[serde(default)]
        index: f64,
        #[serde(default)]
        log_power: f64,
    },
    Zero,
}

impl CoefficientFamily {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::parameter("explicit coefficients must be finite and >= 0"));
        }
        Ok(CoefficientFamily::Explicit { values })
    }

    pub fn polynomial(amplitude: f64, index: f64, log_power: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::parameter("polynomial amplitude must be positive"));
        }
        Ok(CoefficientFamily::Polynomial {
            amplitude,
            index,
            log_power,
        })
    }

    pub fn constant(amplitude: f64) -> Result<Self> {
        Self::polynomial(amplitude, 0.0, 0.0)
    }

    pub fn exponential(base: f64, amplitude: f64, index: f64, log_power: f64) -> Result<Self> {
        if !(base > 0.0 && base.is_finite()) {
            return Err(Error::parameter("exponential base must be positive"));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::parameter("exponential amplitude must be positive"));
        }
        Ok(CoefficientFamily::Exponential {
            base,
            amplitude,
            index,
            log_power,
        })
    }

    pub fn zero() -> Self {
        CoefficientFamily::Zero
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoefficientFamily::Zero => true,
            CoefficientFamily::Explicit { values } => values.iter().all(|v| *v == 0.0),
            _ => false,
        }
    }

    fn poly_part(k: usize, amplitude: f64, index: f64, log_power: f64) -> f64 {
        if k <= 1 {
            return amplitude;
        }
        let kf = k as f64;
        amplitude * kf.powf(index) * kf.ln().powf(log_power)
    }

    /// Value at level `k`.
    pub fn value(&self, k: usize) -> f64 {
        match self {
            CoefficientFamily::Explicit { values } => values.get(k).copied().unwrap_or(0.0),
            CoefficientFamily::Polynomial {
                amplitude,
                index,
                log_power,
            } => Self::poly_part(k, *amplitude, *index, *log_power),
            CoefficientFamily::Exponential {
                base,
                amplitude,
                index,
                log_power,
            } => base.powi(k as i32) * Self::poly_part(k, *amplitude, *index, *log_power),
            CoefficientFamily::Zero => 0.0,
        }
    }

    /// Natural log of the value, `None` where the value is zero.
    pub fn ln_value(&self, k: usize) -> Option<f64> {
        match self {
            CoefficientFamily::Explicit { values } => {
                let v = values.get(k).copied().unwrap_or(0.0);
                (v > 0.0).then(|| v.ln())
            }
            CoefficientFamily::Polynomial {
                amplitude,
                index,
                log_power,
            } => {
                if k <= 1 {
                    Some(amplitude.ln())
                } else {
                    let kf = k as f64;
                    Some(amplitude.ln() + index * kf.ln() + log_power * kf.ln().ln())
                }
            }
            CoefficientFamily::Exponential {
                base,
                amplitude,
                index,
                log_power,
            } => {
                let poly = if k <= 1 {
                    amplitude.ln()
                } else {
                    let kf = k as f64;
                    amplitude.ln() + index * kf.ln() + log_power * kf.ln().ln()
                };
                Some(k as f64 * base.ln() + poly)
            }
            CoefficientFamily::Zero => None,
        }
    }

    /// `value(k+1)/value(k)`, computed without overflowing for the
    /// closed-form kinds.
    pub fn ratio(&self, k: usize) -> f64 {
        match self {
            CoefficientFamily::Explicit { values } => {
                let cur = values.get(k).copied().unwrap_or(0.0);
                let next = values.get(k + 1).copied().unwrap_or(0.0);
                if cur == 0.0 {
                    0.0
                } else {
                    next / cur
                }
            }
            CoefficientFamily::Polynomial {
                index, log_power, ..
            } => Self::poly_ratio(k, *index, *log_power),
            CoefficientFamily::Exponential {
                base,
                index,
                log_power,
                ..
            } => base * Self::poly_ratio(k, *index, *log_power),
            CoefficientFamily::Zero => 0.0,
        }
    }

    fn poly_ratio(k: usize, index: f64, log_power: f64) -> f64 {
        if k == 0 {
            1.0
        } else if k == 1 {
            2f64.powf(index) * 2f64.ln().powf(log_power)
        } else {
            let kf = k as f64;
            (1.0 + 1.0 / kf).powf(index) * ((kf + 1.0).ln() / kf.ln()).powf(log_power)
        }
    }

    pub(crate) fn require_positive(&self, what: &str) -> Result<()> {
        let ok = match self {
            CoefficientFamily::Explicit { values } => {
                !values.is_empty() && values.iter().all(|v| *v > 0.0)
            }
            CoefficientFamily::Polynomial { amplitude, .. } => *amplitude > 0.0,
            CoefficientFamily::Exponential { base, amplitude, .. } => {
                *base > 0.0 && *amplitude > 0.0
            }
            CoefficientFamily::Zero => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::parameter(format!("{what} must be strictly positive")))
        }
    }

    pub(crate) fn require_nonnegative(&self, what: &str) -> Result<()> {
        match self {
            CoefficientFamily::Explicit { values } => {
                if values.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::parameter(format!("{what} must be nonnegative")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_values_and_convention() {
        let f = CoefficientFamily::polynomial(2.0, 1.0, 3.0).unwrap();
        assert_eq!(f.value(0), 2.0);
        assert_eq!(f.value(1), 2.0);
        let k = 5usize;
        let expect = 2.0 * 5.0 * 5f64.ln().powi(3);
        assert!((f.value(k) - expect).abs() < 1e-12);
    }

    #[test]
    fn explicit_truncates_to_zero() {
        let f = CoefficientFamily::explicit(vec![1.0, 2.0]).unwrap();
        assert_eq!(f.value(1), 2.0);
        assert_eq!(f.value(2), 0.0);
    }

    #[test]
    fn ratio_matches_values_in_range() {
        let fams = [
            CoefficientFamily::polynomial(0.5, 2.0, -1.0).unwrap(),
            CoefficientFamily::exponential(1.5, 2.0, 1.0, 0.0).unwrap(),
        ];
        for f in fams {
            for k in [0usize, 1, 2, 7, 40] {
                let direct = f.value(k + 1) / f.value(k);
                assert!(
                    (f.ratio(k) - direct).abs() < 1e-12 * direct.abs().max(1.0),
                    "ratio mismatch at {k}"
                );
            }
        }
    }

    #[test]
    fn ln_value_stays_finite_when_value_overflows() {
        let f = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        assert!(f.value(600).is_infinite());
        let ln = f.ln_value(600).unwrap();
        assert!((ln - 600.0 * 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let f = CoefficientFamily::exponential(0.5, 1.0, 0.0, -2.0).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: CoefficientFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(f, back);
    }
}
