//! Closed-form moments of the level-truncated pair-coalescence hazard.
//!
//! For two dual lineages the accumulated hazard up to level `M` is
//! `H^(M) = sum_{k<=M} w_k L(k)` with `w_k = sum_{j>=k} lambda_j N^-j` and
//! `L(k)` the occupation time of the distance-`k` shell by the difference
//! walk. The moments reduce to shell counts and Green functions of the
//! hierarchical walk with the effective coefficients
//! `cbar_k = c_k + lambda_{k+1}/N`; the factors 1/2 absorb the doubled speed
//! of the difference walk and the division by the total jump rate converts
//! the unit-rate spectral clock into physical time.

use super::family::CoefficientFamily;
use crate::hiergeo::{shell_count, Green, MigrationSpec, WalkSpectrum};
use crate::scalar::Real;
use crate::{Error, Result};

/// First and second moment of the truncated hazard, with tail diagnostics.
#[derive(Debug, Clone)]
pub struct HazardMoments<F> {
    /// `E[H^(M)]`.
    pub first: F,
    /// `E[(H^(M))^2]`.
    pub second: F,
    /// Whether the untruncated hazard is infinite (recurrent effective walk
    /// with positive resampling weight).
    pub infinite: bool,
    /// Set when the level truncation cannot certify a small tail.
    pub tail_warning: Option<String>,
    pub trunc_m: usize,
}

fn weights(n: u32, lambdas: &[f64]) -> Vec<f64> {
    // w_k = sum_{j >= k} lambda_j N^-j over the finite list.
    let nf = n as f64;
    let mut w = vec![0.0; lambdas.len()];
    let mut acc = 0.0;
    for j in (0..lambdas.len()).rev() {
        acc += lambdas[j] * nf.powi(-(j as i32));
        w[j] = acc;
    }
    w
}

/// Closed-form hazard moments at hierarchy order `n`.
///
/// `lambdas` is the finite list of resampling masses (zero beyond its end);
/// `trunc_m` is the largest hazard level included.
pub fn hazard_closed_form<F: Real>(
    n: u32,
    c: &CoefficientFamily,
    lambdas: &[f64],
    trunc_m: usize,
) -> Result<HazardMoments<F>> {
    if lambdas.iter().any(|l| *l < 0.0 || !l.is_finite()) {
        return Err(Error::parameter("resampling masses must be finite and >= 0"));
    }
    let lam_family = CoefficientFamily::explicit(lambdas.to_vec())?;
    let mig = MigrationSpec::effective(c.clone(), lam_family)?;

    let w = weights(n, lambdas);
    let support = lambdas.len();
    if w.is_empty() || w[0] == 0.0 {
        return Ok(HazardMoments {
            first: F::zero(),
            second: F::zero(),
            infinite: false,
            tail_warning: None,
            trunc_m,
        });
    }
    let top = support - 1; // hazard terms vanish beyond the lambda support
    let spec: WalkSpectrum<F> = WalkSpectrum::build(n, &mig, top as u32 + 2, 1e-16)?;

    let mut greens = Vec::with_capacity(top + 1);
    for k in 0..=top {
        match spec.green_block(k as u32) {
            Green::Finite { value, .. } => greens.push(value),
            Green::Infinite => {
                return Ok(HazardMoments {
                    first: F::infinity(),
                    second: F::infinity(),
                    infinite: true,
                    tail_warning: None,
                    trunc_m,
                })
            }
        }
    }

    let half = F::from_f64_lossy(0.5);
    let shells: Vec<F> = (0..=top)
        .map(|k| F::from_f64_lossy(shell_count(n, k as u32)))
        .collect();
    let wf: Vec<F> = w.iter().map(|&x| F::from_f64_lossy(x)).collect();

    let first_upto = |m: usize| -> F {
        let mut acc = F::zero();
        for k in 0..=m.min(top) {
            acc = acc + wf[k] * shells[k] * greens[k];
        }
        half * acc
    };
    let d_star = spec.d_star();
    let head = first_upto(trunc_m);
    let full = first_upto(top);
    let tail_warning = if trunc_m < top && (full - head) > F::from_f64_lossy(0.01) * head {
        Some(format!(
            "levels above {trunc_m} carry {:.2}% of the first moment",
            ((full - head) / full * F::from_f64_lossy(100.0))
        ))
    } else {
        None
    };

    // Second moment: cross terms couple shells through the Green function at
    // the larger distance; the diagonal gets the return-path correction.
    let m_top = trunc_m.min(top);
    let mut second = F::zero();
    for k in 0..=m_top {
        for l in 0..=m_top {
            let g = greens[k.max(l)];
            second = second + wf[k] * wf[l] * shells[k] * shells[l] * g * g;
        }
    }
    let nf = n as f64;
    for k in 0..=m_top {
        let nbar = if k == 0 {
            1.0
        } else {
            nf.powi(k as i32) - 2.0 * nf.powi(k as i32 - 1)
        };
        let mut inner = (F::from_f64_lossy(nbar) - shells[k]) * greens[k];
        for m in 0..k {
            inner = inner + shells[m] * greens[m];
        }
        second = second + wf[k] * wf[k] * shells[k] * greens[k] * inner;
    }
    second = half * second;

    Ok(HazardMoments {
        first: head / d_star,
        second: second / (d_star * d_star),
        infinite: false,
        tail_warning,
        trunc_m,
    })
}

/// Hazard first-moment contributions per level, used as a dichotomy
/// indicator. Returns `None` when the effective walk is recurrent (the
/// hazard is infinite term by term).
pub(crate) fn hazard_partial_sums(
    n: u32,
    c: &CoefficientFamily,
    lambdas: &[f64],
) -> Result<Option<Vec<f64>>> {
    let lam_family = CoefficientFamily::explicit(lambdas.to_vec())?;
    let mig = MigrationSpec::effective(c.clone(), lam_family)?;
    let w = weights(n, lambdas);
    if w.is_empty() || w[0] == 0.0 {
        return Ok(Some(vec![0.0; lambdas.len().max(1)]));
    }
    // Terms decay at least like N^-k; cap the level range by what f64 resolves.
    let top = (lambdas.len() - 1).min((1000.0 / (n as f64).log10()).floor() as usize / 4);
    let spec: WalkSpectrum<f64> = WalkSpectrum::build(n, &mig, top as u32 + 2, 1e-16)?;
    let d_star = spec.d_star();
    let mut terms = Vec::with_capacity(top + 1);
    for k in 0..=top {
        match spec.green_block(k as u32) {
            Green::Finite { value, .. } => {
                terms.push(0.5 * w[k] * shell_count(n, k as u32) * value / d_star)
            }
            Green::Infinite => return Ok(None),
        }
    }
    Ok(Some(terms))
}

/// Large-order first-moment asymptotic `sum_k mu_k sum_{m>=k} 1/c_m`.
pub fn hazard_large_n_asymptotic(c: &CoefficientFamily, lambdas: &[f64]) -> f64 {
    let mut total = 0.0;
    for (k, lam) in lambdas.iter().enumerate() {
        let mu = 0.5 * lam;
        if mu == 0.0 {
            continue;
        }
        let mut inv = 0.0;
        let mut m = k;
        loop {
            let cm = c.value(m);
            if cm <= 0.0 {
                break;
            }
            let inc = 1.0 / cm;
            inv += inc;
            if inc < 1e-16 * inv || m > k + 100_000 {
                break;
            }
            m += 1;
        }
        total += mu * inv;
    }
    total
}
