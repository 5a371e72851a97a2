//! The volatility recursion `d_{k+1} = c_k (mu_k + d_k) / (c_k + mu_k + d_k)`
//! and the Möbius transformations behind it.

use super::family::CoefficientFamily;
use crate::scalar::Real;
use crate::{Error, Result};

/// Output of the volatility flow, everything indexed `0..=k_max`.
#[derive(Debug, Clone)]
pub struct FlowResult<F> {
    /// Volatility constants `d_k` (may overflow to infinity for exponential
    /// families; the ratios below stay finite).
    pub d: Vec<F>,
    /// `m_k = (mu_k + d_k)/c_k`.
    pub m: Vec<F>,
    /// `sigma_k = sum_{l<k} 1/c_l`, `sigma_0 = 0`.
    pub sigma: Vec<F>,
    /// `d_k / c_k`.
    pub d_over_c: Vec<F>,
    /// Partial sums `sum_{l<=k} m_l`.
    pub m_partial: Vec<F>,
    /// Partial sums `sum_{j<=k} (1/c_j) (d_0 + sum_{l<=j} mu_l)`; with
    /// `d_0 = 0` this is the migration-vs-resampling dichotomy series.
    pub mixed_partial: Vec<F>,
}

impl<F: Real> FlowResult<F> {
    pub fn k_max(&self) -> usize {
        self.d.len() - 1
    }
}

/// Run the volatility flow to `k_max`.
///
/// The recursion is iterated on the ratio `d_k/c_k`, which keeps exponential
/// families finite; `d_k` itself is reconstructed afterwards.
pub fn dk_flow<F: Real>(
    c: &CoefficientFamily,
    mu: &CoefficientFamily,
    d0: f64,
    k_max: usize,
) -> Result<FlowResult<F>> {
    if k_max < 1 {
        return Err(Error::parameter("k_max must be at least 1"));
    }
    if !(d0 >= 0.0 && d0.is_finite()) {
        return Err(Error::parameter("d_0 must be finite and nonnegative"));
    }
    c.require_positive("migration coefficients")?;
    mu.require_nonnegative("resampling coefficients")?;

    let steps = k_max + 1;
    let mut d = Vec::with_capacity(steps);
    let mut m = Vec::with_capacity(steps);
    let mut sigma = Vec::with_capacity(steps);
    let mut d_over_c = Vec::with_capacity(steps);
    let mut m_partial = Vec::with_capacity(steps);
    let mut mixed_partial = Vec::with_capacity(steps);

    let mut z = F::from_f64_lossy(d0 / c.value(0)); // d_k / c_k
    let mut sig = F::zero();
    let mut msum = F::zero();
    let mut mixed = F::zero();
    let mut mu_cum = d0;

    for k in 0..steps {
        let ln_ck = c
            .ln_value(k)
            .ok_or_else(|| Error::parameter(format!("c_{k} must be positive")))?;
        let ck = F::from_f64_lossy(ln_ck.exp());
        let mu_k = mu.value(k);
        if mu_k < 0.0 {
            return Err(Error::parameter(format!("mu_{k} must be nonnegative")));
        }
        // q_k = mu_k / c_k via logs so huge exponential pairs stay finite.
        let q = match mu.ln_value(k) {
            Some(ln_mu) => F::from_f64_lossy((ln_mu - ln_ck).exp()),
            None => F::zero(),
        };

        let mk = q + z;
        d.push(if k == 0 { F::from_f64_lossy(d0) } else { z * ck });
        d_over_c.push(z);
        m.push(mk);
        sigma.push(sig);
        msum = msum + mk;
        m_partial.push(msum);
        mu_cum += mu_k;
        mixed = mixed + F::from_f64_lossy(mu_cum) * F::from_f64_lossy((-ln_ck).exp());
        mixed_partial.push(mixed);

        // Advance to k+1.
        let ratio = F::from_f64_lossy(c.ratio(k)); // c_{k+1}/c_k
        if !(ratio > F::zero()) {
            return Err(Error::parameter(format!("c_{} must be positive", k + 1)));
        }
        z = (q + z) / (F::one() + q + z) / ratio;
        sig = sig + F::from_f64_lossy((-ln_ck).exp());
    }

    Ok(FlowResult {
        d,
        m,
        sigma,
        d_over_c,
        m_partial,
        mixed_partial,
    })
}

/// Fixed points and slopes of the level-`k` Möbius map
/// `f(x) = (c x + c mu) / (x + c + mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusFixedPoints<F> {
    pub x_plus: F,
    pub x_minus: F,
    pub slope_plus: F,
    pub slope_minus: F,
}

pub fn mobius_fixed_points<F: Real>(c: F, mu: F) -> Result<MobiusFixedPoints<F>> {
    if !(c > F::zero()) || !(mu > F::zero()) {
        return Err(Error::parameter("Möbius fixed points need c > 0 and mu > 0"));
    }
    let four = F::from_f64_lossy(4.0);
    let half = F::from_f64_lossy(0.5);
    let root = (F::one() + four * c / mu).sqrt();
    // x+ written with the conjugate to avoid cancellation for small c/mu.
    let x_plus = (c + c) / (F::one() + root);
    let x_minus = -half * mu * (F::one() + root);
    let slope = |x: F| {
        let denom = x + c + mu;
        (c / denom) * (c / denom)
    };
    Ok(MobiusFixedPoints {
        x_plus,
        x_minus,
        slope_plus: slope(x_plus),
        slope_minus: slope(x_minus),
    })
}

/// One application of the level map, used by tests and the fixed-point
/// diagnostics.
pub fn mobius_apply<F: Real>(c: F, mu: F, x: F) -> F {
    (c * x + c * mu) / (x + c + mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow64(c: &CoefficientFamily, mu: &CoefficientFamily, d0: f64, k: usize) -> FlowResult<f64> {
        dk_flow(c, mu, d0, k).unwrap()
    }

    #[test]
    fn first_step_matches_mean_field_constant() {
        // d_1 = c_0 lambda_0 / (2 c_0 + lambda_0) with mu = lambda/2.
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.5).unwrap();
        let f = flow64(&c, &mu, 0.0, 2);
        assert!((f.d[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pure_migration_solution_is_exact() {
        // mu_0 = 1, mu_k = 0 for k >= 1, c = 1: d_k = mu_0/(1 + mu_0 sigma_k).
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::explicit(vec![1.0]).unwrap();
        let f = flow64(&c, &mu, 0.0, 10);
        assert!((f.d[3] - 0.25).abs() < 1e-12);
        for k in 1..=10 {
            let exact = 1.0 / (1.0 + f.sigma[k]);
            assert!((f.d[k] - exact).abs() < 1e-12, "k={k}: {} vs {exact}", f.d[k]);
        }
    }

    #[test]
    fn raising_coefficients_raises_later_volatility() {
        let c = CoefficientFamily::explicit(vec![1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let mu = CoefficientFamily::explicit(vec![0.5, 0.5, 0.5, 0.5, 0.5]).unwrap();
        let base = flow64(&c, &mu, 0.0, 4);
        for bump in 0..4usize {
            let mut cv = vec![1.0; 5];
            cv[bump] += 0.5;
            let c2 = CoefficientFamily::explicit(cv).unwrap();
            let up = flow64(&c2, &mu, 0.0, 4);
            for k in bump + 1..=4 {
                assert!(up.d[k] >= base.d[k] - 1e-15, "c bump at {bump}, k={k}");
            }
            let mut mv = vec![0.5; 5];
            mv[bump] += 0.5;
            let m2 = CoefficientFamily::explicit(mv).unwrap();
            let up = flow64(&c, &m2, 0.0, 4);
            for k in bump + 1..=4 {
                assert!(up.d[k] >= base.d[k] - 1e-15, "mu bump at {bump}, k={k}");
            }
        }
    }

    #[test]
    fn flow_survives_exponential_overflow_in_ratio_space() {
        let c = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        let mu = CoefficientFamily::exponential(4.0, 2.0, 0.0, 0.0).unwrap();
        let f = flow64(&c, &mu, 0.0, 2000);
        let last = *f.d_over_c.last().unwrap();
        assert!(last.is_finite() && last > 0.0);
        let m_last = *f.m.last().unwrap();
        assert!(m_last.is_finite());
    }

    #[test]
    fn fixed_point_golden_ratio_example() {
        let fp = mobius_fixed_points(1.0f64, 1.0).unwrap();
        assert!((fp.x_plus - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-14);
        assert!(fp.slope_plus < 1.0 && fp.slope_minus > 1.0);
    }

    #[test]
    fn fixed_points_satisfy_vieta_and_are_fixed() {
        let mut rng = crate::rng::stream_rng(5, 0);
        use rand::Rng;
        for _ in 0..1000 {
            let c: f64 = rng.random_range(0.01..50.0);
            let mu: f64 = rng.random_range(0.01..50.0);
            let fp = mobius_fixed_points(c, mu).unwrap();
            assert!(
                (fp.x_plus * fp.x_minus + c * mu).abs() < 1e-9 * (c * mu).max(1.0),
                "Vieta failed for c={c}, mu={mu}"
            );
            for x in [fp.x_plus, fp.x_minus] {
                let fx = mobius_apply(c, mu, x);
                assert!((fx - x).abs() < 1e-12 * x.abs().max(1.0), "not fixed: c={c} mu={mu}");
            }
        }
    }

    #[test]
    fn flow_works_in_f32_too() {
        let c = CoefficientFamily::constant(1.0).unwrap();
        let mu = CoefficientFamily::constant(0.5).unwrap();
        let f: FlowResult<f32> = dk_flow(&c, &mu, 0.0, 50).unwrap();
        assert!((f.d[1] - 1.0 / 3.0).abs() < 1e-6);
    }
}
