//! Closed-form variance formulas along the interaction chain.
//!
//! One chain step scales the expected local variance by `1/(1+m_k)`; the
//! variance of an evaluation `<M, psi>` telescopes into the weighted sum of
//! `d_{i+1}/c_i = m_i/(1+m_i)` factors. These formulas are the analytic
//! counterparts of the Monte-Carlo chain sampler.

use super::flow::FlowResult;
use crate::scalar::Real;
use crate::{Error, Result};

/// Which closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainVarianceMode {
    /// `E[var(psi)]` under the law of `M^(j)_0`:
    /// `prod_{k=0}^{j} 1/(1+m_k) * var_theta`.
    EVar { j: usize },
    /// `Var(<M^(j)_{-k}, psi>)`:
    /// `sum_{i=k}^{j} (d_{i+1}/c_i) prod_{l=i+1}^{j} 1/(1+m_l) * var_theta`.
    EvalVar { k: usize, j: usize },
    /// The same sum over the window `[beta2 j, beta1 j]`, normalised by
    /// `var_theta = 1`; converges to `1 - (beta2/beta1)^R` in the diffusive
    /// clustering regime.
    DiffusiveSum { j: usize, beta1: f64, beta2: f64 },
}

pub fn chain_variance<F: Real>(
    flow: &FlowResult<F>,
    mode: ChainVarianceMode,
    var_theta: F,
) -> Result<F> {
    match mode {
        ChainVarianceMode::EVar { j } => {
            let m = flow
                .m
                .get(..=j)
                .ok_or_else(|| Error::parameter("flow shorter than requested level j"))?;
            let mut prod = F::one();
            for &mk in m {
                prod = prod / (F::one() + mk);
            }
            Ok(prod * var_theta)
        }
        ChainVarianceMode::EvalVar { k, j } => {
            if j >= flow.m.len() {
                return Err(Error::parameter("flow shorter than requested level j"));
            }
            if k > j + 1 {
                return Err(Error::parameter("start level k must be at most j+1"));
            }
            Ok(window_sum(flow, k, j) * var_theta)
        }
        ChainVarianceMode::DiffusiveSum { j, beta1, beta2 } => {
            if !(0.0 <= beta2 && beta2 <= beta1 && beta1 <= 1.0) {
                return Err(Error::parameter("need 0 <= beta2 <= beta1 <= 1"));
            }
            let hi = (beta1 * j as f64).floor() as usize;
            let lo = (beta2 * j as f64).floor() as usize;
            if hi >= flow.m.len() {
                return Err(Error::parameter("flow shorter than beta1 * j"));
            }
            Ok(window_sum(flow, lo, hi))
        }
    }
}

/// `sum_{i=lo}^{hi} (m_i/(1+m_i)) prod_{l=i+1}^{hi} 1/(1+m_l)`, accumulated
/// from the top so the running product is shared.
fn window_sum<F: Real>(flow: &FlowResult<F>, lo: usize, hi: usize) -> F {
    if lo > hi {
        return F::zero(); // empty window: the chain starts deterministically
    }
    let mut prod = F::one();
    let mut acc = F::zero();
    for i in (lo..=hi).rev() {
        let mi = flow.m[i];
        acc = acc + mi / (F::one() + mi) * prod;
        prod = prod / (F::one() + mi);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::{dk_flow, CoefficientFamily};

    #[test]
    fn single_step_factor() {
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.5).unwrap();
        let flow = dk_flow::<f64>(&c, &mu, 0.0, 4).unwrap();
        let v = chain_variance(&flow, ChainVarianceMode::EVar { j: 0 }, 1.0).unwrap();
        assert!((v - 1.0 / (1.0 + flow.m[0])).abs() < 1e-15);
    }

    #[test]
    fn empty_eval_window_is_zero() {
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.5).unwrap();
        let flow = dk_flow::<f64>(&c, &mu, 0.0, 4).unwrap();
        let v = chain_variance(&flow, ChainVarianceMode::EvalVar { k: 4, j: 3 }, 1.0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn eval_var_telescopes_to_e_var_complement() {
        // Summing the full window gives 1 - prod 1/(1+m_l): the martingale
        // decomposition of the total variance.
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.7).unwrap();
        let flow = dk_flow::<f64>(&c, &mu, 0.3, 9).unwrap();
        let j = 9;
        let full = chain_variance(&flow, ChainVarianceMode::EvalVar { k: 0, j }, 1.0).unwrap();
        let evar = chain_variance(&flow, ChainVarianceMode::EVar { j }, 1.0).unwrap();
        assert!((full + evar - 1.0).abs() < 1e-12, "{full} + {evar} != 1");
    }

    #[test]
    fn invalid_windows_error() {
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.5).unwrap();
        let flow = dk_flow::<f64>(&c, &mu, 0.0, 4).unwrap();
        assert!(chain_variance(&flow, ChainVarianceMode::EVar { j: 9 }, 1.0).is_err());
        assert!(chain_variance(
            &flow,
            ChainVarianceMode::DiffusiveSum {
                j: 4,
                beta1: 0.5,
                beta2: 0.7
            },
            1.0
        )
        .is_err());
    }
}
