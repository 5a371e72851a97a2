//! Hierarchical group geometry, migration kernel and the potential theory of
//! the hierarchical random walk.
//!
//! Sites are digit strings over `{0,..,N-1}`; the distance between two sites
//! is the first level above which their digits agree, which makes the space
//! ultrametric. A walker picks level `k` at rate `c_{k-1}/N^{k-1}` and jumps
//! to a uniform site of the radius-`k` ball around its position.
//!
//! Transition probabilities and Green functions are computed from the walk's
//! spectral decomposition. The eigenvalue formulas describe the walk run at
//! unit total jump rate; the actual walk runs at rate [`WalkSpectrum::d_star`]
//! and consumers that need physical time (the hazard formulas) divide by it.

use crate::renorm::CoefficientFamily;
use crate::scalar::Real;
use crate::{Error, Result};
use rand::Rng;

/// Geographic space: the hierarchical group of order `N`, either truncated
/// after `K` levels (`N^K` sites, used by the simulators) or infinite (used
/// only by the closed-form analytics).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierGeometry {
    order_n: u32,
    trunc: Trunc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trunc {
    Finite(u32),
    Infinite,
}

impl HierGeometry {
    pub fn new(order_n: u32, trunc: Trunc) -> Result<Self> {
        if order_n < 2 {
            return Err(Error::InvalidGeometry(format!(
                "hierarchy order must be at least 2, got {order_n}"
            )));
        }
        if let Trunc::Finite(k) = trunc {
            if k < 1 {
                return Err(Error::InvalidGeometry("truncation level must be >= 1".into()));
            }
            let bits = (k as f64) * (order_n as f64).log2();
            if bits > 62.0 {
                return Err(Error::InvalidGeometry(format!(
                    "site space {order_n}^{k} does not fit in an index type"
                )));
            }
        }
        Ok(HierGeometry { order_n, trunc })
    }

    pub fn finite(order_n: u32, levels: u32) -> Result<Self> {
        Self::new(order_n, Trunc::Finite(levels))
    }

    pub fn infinite(order_n: u32) -> Result<Self> {
        Self::new(order_n, Trunc::Infinite)
    }

    pub fn order(&self) -> u32 {
        self.order_n
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn levels(&self) -> Result<u32> {
        match self.trunc {
            Trunc::Finite(k) => Ok(k),
            Trunc::Infinite => Err(Error::InvalidGeometry(
                "operation requires a finite truncation".into(),
            )),
        }
    }

    /// Number of sites of the truncated space.
    pub fn site_count(&self) -> Result<u64> {
        let k = self.levels()?;
        Ok((self.order_n as u64).pow(k))
    }

    /// `N^k`, the size of a radius-`k` ball.
    pub fn block_size(&self, k: u32) -> u64 {
        (self.order_n as u64).pow(k)
    }

    /// Hierarchical distance between two site indices.
    pub fn distance_idx(&self, a: u64, b: u64) -> u32 {
        let n = self.order_n as u64;
        let (mut a, mut b) = (a, b);
        let mut d = 0;
        while a != b {
            a /= n;
            b /= n;
            d += 1;
        }
        d
    }

    /// Identifier of the radius-`k` ball containing `s`.
    pub fn block_id(&self, s: u64, k: u32) -> u64 {
        s / self.block_size(k)
    }

    /// Uniform site of the radius-`k` ball around `s`.
    pub fn uniform_in_block(&self, s: u64, k: u32, rng: &mut impl Rng) -> u64 {
        let size = self.block_size(k);
        (s / size) * size + rng.random_range(0..size)
    }
}

/// A site as an explicit digit string, least significant level first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    order_n: u32,
    digits: Vec<u16>,
}

impl Site {
    pub fn new(geom: &HierGeometry, digits: Vec<u16>) -> Result<Self> {
        if let Trunc::Finite(k) = geom.trunc {
            if digits.len() != k as usize {
                return Err(Error::InvalidGeometry(format!(
                    "site needs {} digits, got {}",
                    k,
                    digits.len()
                )));
            }
        }
        if digits.iter().any(|&d| d as u32 >= geom.order_n) {
            return Err(Error::InvalidGeometry(format!(
                "digit out of range for order {}",
                geom.order_n
            )));
        }
        Ok(Site {
            order_n: geom.order_n,
            digits,
        })
    }

    pub fn origin(geom: &HierGeometry) -> Result<Self> {
        let k = geom.levels()?;
        Ok(Site {
            order_n: geom.order_n,
            digits: vec![0; k as usize],
        })
    }

    pub fn from_index(geom: &HierGeometry, mut idx: u64) -> Result<Self> {
        let k = geom.levels()?;
        let n = geom.order_n as u64;
        let mut digits = Vec::with_capacity(k as usize);
        for _ in 0..k {
            digits.push((idx % n) as u16);
            idx /= n;
        }
        Ok(Site {
            order_n: geom.order_n,
            digits,
        })
    }

    pub fn to_index(&self) -> u64 {
        let n = self.order_n as u64;
        self.digits.iter().rev().fold(0u64, |acc, &d| acc * n + d as u64)
    }

    pub fn digits(&self) -> &[u16] {
        &self.digits
    }
}

/// Ultrametric distance: smallest `k` such that the digits agree from level
/// `k` upward.
pub fn hier_distance(a: &Site, b: &Site) -> Result<u32> {
    if a.order_n != b.order_n || a.digits.len() != b.digits.len() {
        return Err(Error::GeometryMismatch(format!(
            "sites live on different geometries ({}^{} vs {}^{})",
            a.order_n,
            a.digits.len(),
            b.order_n,
            b.digits.len()
        )));
    }
    let mut d = 0u32;
    for (l, (x, y)) in a.digits.iter().zip(&b.digits).enumerate() {
        if x != y {
            d = l as u32 + 1;
        }
    }
    Ok(d)
}

/// Ball size and shell counts at level `k`: `(N^k, N[k], Nbar[k])` where
/// `N[k]` counts the sites at distance exactly `k` from a point and
/// `Nbar[k]` the sites at distance `k` from both a point and a second point
/// itself at distance `k`.
pub fn block_counts(geom: &HierGeometry, k: u32) -> Result<(u64, u64, u64)> {
    if let Trunc::Finite(levels) = geom.trunc {
        if k > levels {
            return Err(Error::InvalidGeometry(format!(
                "level {k} exceeds truncation {levels}"
            )));
        }
    }
    let n = geom.order_n as u64;
    if k == 0 {
        return Ok((1, 1, 1));
    }
    let size = n.pow(k);
    let inner = n.pow(k - 1);
    Ok((size, size - inner, size - 2 * inner))
}

/// Number of sites at distance exactly `k` from a point, as a float (valid
/// for any `k`, not limited by the index type).
pub fn shell_count(n: u32, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        let n = n as f64;
        n.powi(k as i32) - n.powi(k as i32 - 1)
    }
}

/// Per-level migration coefficients, raw `c_k` or with the reshuffling
/// correction `c_k + lambda_{k+1}/N` folded in.
#[derive(Debug, Clone)]
pub struct MigrationSpec {
    c: CoefficientFamily,
    /// Resampling masses `lambda_k`; required when `effective` is set.
    lambdas: Option<CoefficientFamily>,
    effective: bool,
}

impl MigrationSpec {
    pub fn raw(c: CoefficientFamily) -> Result<Self> {
        c.require_positive("migration coefficients")?;
        Ok(MigrationSpec {
            c,
            lambdas: None,
            effective: false,
        })
    }

    /// Coefficients `c_k + lambda_{k+1}/N`, the migration rates felt by dual
    /// lineages once block reshuffling is accounted for.
    pub fn effective(c: CoefficientFamily, lambdas: CoefficientFamily) -> Result<Self> {
        c.require_positive("migration coefficients")?;
        lambdas.require_nonnegative("resampling masses")?;
        Ok(MigrationSpec {
            c,
            lambdas: Some(lambdas),
            effective: true,
        })
    }

    pub fn is_effective(&self) -> bool {
        self.effective
    }

    pub fn raw_coeff(&self, k: usize) -> f64 {
        self.c.value(k)
    }

    /// The coefficient actually used at level `k` for hierarchy order `n`.
    pub fn coeff(&self, k: usize, n: u32) -> f64 {
        let base = self.c.value(k);
        if self.effective {
            let lam = self.lambdas.as_ref().map(|l| l.value(k + 1)).unwrap_or(0.0);
            base + lam / n as f64
        } else {
            base
        }
    }
}

/// Jump rates of the hierarchical random walk on a truncated space.
#[derive(Debug, Clone)]
pub struct MigrationKernel {
    n: u32,
    /// `level_rates[k-1]` is the rate of picking the radius-`k` ball,
    /// `c_{k-1}/N^{k-1}`.
    level_rates: Vec<f64>,
    total_rate: f64,
    d_star: f64,
}

/// Build the kernel for levels `1..=levels`. Coefficients beyond the spec's
/// support are zero, which truncates the walk to `G_{N,levels}`.
pub fn migration_kernel(geom: &HierGeometry, mig: &MigrationSpec) -> Result<MigrationKernel> {
    let n = geom.order_n;
    let levels = match geom.trunc {
        Trunc::Finite(k) => k as usize,
        Trunc::Infinite => {
            return Err(Error::InvalidGeometry(
                "explicit kernels need a finite truncation; use WalkSpectrum for the infinite space"
                    .into(),
            ))
        }
    };
    let nf = n as f64;
    let mut level_rates = Vec::with_capacity(levels);
    let mut total = 0.0;
    let mut d_star = 0.0;
    for k in 1..=levels {
        let c = mig.coeff(k - 1, n);
        if !c.is_finite() || c < 0.0 {
            return Err(Error::parameter(format!("migration coefficient c_{} = {c}", k - 1)));
        }
        let rate = c / nf.powi(k as i32 - 1);
        level_rates.push(rate);
        total += rate;
        d_star += rate * (1.0 - nf.powi(-(k as i32)));
    }
    if !total.is_finite() {
        return Err(Error::NonSummableMigration(
            "per-level jump rates do not sum".into(),
        ));
    }
    Ok(MigrationKernel {
        n,
        level_rates,
        total_rate: total,
        d_star,
    })
}

impl MigrationKernel {
    /// Kernel entry `a(a,b) = sum_{k >= d(a,b)} c_{k-1}/N^{2k-1}`; zero on
    /// the diagonal.
    pub fn rate_between(&self, geom: &HierGeometry, a: u64, b: u64) -> f64 {
        if a == b {
            return 0.0;
        }
        let d = geom.distance_idx(a, b).max(1) as usize;
        let nf = self.n as f64;
        self.level_rates
            .iter()
            .enumerate()
            .skip(d - 1)
            .map(|(i, r)| r / nf.powi(i as i32 + 1))
            .sum()
    }

    /// Total off-diagonal rate of one walker (row sum of the kernel).
    pub fn d_star(&self) -> f64 {
        self.d_star
    }

    /// Total event rate including jumps that land on the current site.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    pub fn level_rates(&self) -> &[f64] {
        &self.level_rates
    }

    /// Draw a jump: pick the level, then a uniform site of that ball.
    pub fn jump(&self, geom: &HierGeometry, from: u64, rng: &mut impl Rng) -> u64 {
        let mut u = rng.random_range(0.0..self.total_rate);
        for (i, r) in self.level_rates.iter().enumerate() {
            if u < *r {
                return geom.uniform_in_block(from, i as u32 + 1, rng);
            }
            u -= r;
        }
        geom.uniform_in_block(from, self.level_rates.len() as u32, rng)
    }
}

/// Green function value at a given distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Green<F> {
    Finite { value: F, tail_bound: F },
    Infinite,
}

impl<F: Real> Green<F> {
    pub fn value_or_inf(&self) -> F {
        match self {
            Green::Finite { value, .. } => *value,
            Green::Infinite => F::infinity(),
        }
    }
}

/// Spectral data of the hierarchical random walk at unit jump rate.
///
/// `P_t(0,.)` on the distance-`k` shell is `sum_{j>=k} K_{jk} e^{-h_j t} N^{-j}`
/// with `K_{jk}` equal to `N-1` off the diagonal and `-1` at `j=k>=1`. The
/// series is truncated at `j_max` with the certified tail bound `eps_tail`.
#[derive(Debug, Clone)]
pub struct WalkSpectrum<F> {
    n: u32,
    /// `r[j-1]` is the probability that a unit-rate jump picks level `j`.
    r: Vec<F>,
    /// `h[j-1]` is the eigenvalue attached to level `j`.
    h: Vec<F>,
    d_norm: F,
    d_star: F,
    j_max: usize,
    eps_tail: F,
    /// Per-level inverse-coefficient tail: sum over `j > j_max` of
    /// `1/c_{j-1}`, used to certify Green-function tails. `None` when the
    /// coefficient sums diverge (recurrent walk).
    inv_c_tail: Option<F>,
    /// Raw coefficients held for tail estimates.
    coeffs: Vec<f64>,
}

const INV_C_PROBE: usize = 200_000;

/// Classify `sum 1/c_k` numerically: total plus the part beyond `from`, or
/// divergence.
fn inv_coeff_sum(coeff: &impl Fn(usize) -> f64, from: usize) -> Option<f64> {
    let mut tail = 0.0;
    let mut k = from;
    let mut last_inc = f64::INFINITY;
    let mut flat = 0usize;
    while k < INV_C_PROBE {
        let c = coeff(k);
        if c == 0.0 {
            // Truncated coefficient list: nothing beyond.
            return Some(tail);
        }
        let inc = 1.0 / c;
        tail += inc;
        if inc >= last_inc * 0.9999 {
            flat += 1;
            if flat > 400 && inc > 1e-18 * tail.max(1.0) {
                return None;
            }
        } else {
            flat = 0;
        }
        if inc < 1e-18 * tail.max(1.0) {
            return Some(tail);
        }
        last_inc = inc;
        k += 1;
    }
    // Probe exhausted without the increments dying away: treat as divergent.
    let c_last = coeff(INV_C_PROBE - 1);
    if 1.0 / c_last > 1e-14 * tail.max(1.0) {
        None
    } else {
        Some(tail)
    }
}

impl<F: Real> WalkSpectrum<F> {
    /// Build the spectrum for hierarchy order `n`, resolving coefficients
    /// from `mig`. `levels_needed` is the largest shell index consumers will
    /// ask about; `tail_tol` the requested series tail.
    pub fn build(n: u32, mig: &MigrationSpec, levels_needed: u32, tail_tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGeometry("order must be >= 2".into()));
        }
        let coeff = |k: usize| mig.coeff(k, n);
        let nf = n as f64;
        let ln_n = nf.ln();
        let extra = (tail_tol.max(1e-300).recip().ln() / ln_n).ceil() as usize + 8;
        let j_max = (levels_needed as usize + extra).max(24);

        // Total jump rate D* = sum_m c_m N^-m (1 - N^-(m+1)); divergence here
        // means the walk itself is ill-posed.
        let mut d_star = 0.0f64;
        let mut grow = 0usize;
        let mut prev_term = f64::INFINITY;
        let mut m = 0usize;
        loop {
            let term = coeff(m) * nf.powi(-(m as i32));
            d_star += term * (1.0 - nf.powi(-(m as i32) - 1));
            if term >= prev_term && term > 0.0 {
                grow += 1;
                if grow > 30 {
                    return Err(Error::NonSummableMigration(format!(
                        "c_k / {n}^k does not decay (violates limsup log(c_k)/k < log N)"
                    )));
                }
            } else {
                grow = 0;
            }
            if term < 1e-18 * d_star.max(1e-300) && m > levels_needed as usize {
                break;
            }
            prev_term = if term > 0.0 { term } else { prev_term };
            m += 1;
            if m > j_max + 4000 {
                return Err(Error::NonSummableMigration(
                    "total jump rate did not converge".into(),
                ));
            }
        }
        if d_star <= 0.0 {
            return Err(Error::parameter("all migration coefficients vanish"));
        }

        // Unnormalised level weights u_j = sum_{i>=j} c_{i-1} N^{-(2i-j-1)}.
        let mut u = vec![0.0f64; j_max];
        for j in 1..=j_max {
            let mut term = coeff(j - 1) * nf.powi(-(j as i32 - 1));
            let mut acc = 0.0;
            let mut i = j;
            loop {
                acc += term;
                let c_cur = coeff(i - 1);
                if c_cur == 0.0 {
                    break;
                }
                let ratio = coeff(i) / c_cur / (nf * nf);
                if !ratio.is_finite() || ratio >= 1.0 {
                    return Err(Error::NonSummableMigration(format!(
                        "level-weight series diverges at level {j} (c growth >= N^2)"
                    )));
                }
                term *= ratio;
                i += 1;
                if term < 1e-18 * acc.max(1e-300) || i > j + 600 {
                    acc += term * ratio / (1.0 - ratio).max(1e-6);
                    break;
                }
            }
            u[j - 1] = acc;
        }
        let d_norm: f64 = u.iter().sum();
        if !(d_norm.is_finite() && d_norm > 0.0) {
            return Err(Error::NonSummableMigration("level weights do not normalise".into()));
        }

        let r: Vec<f64> = u.iter().map(|x| x / d_norm).collect();
        // h_j = N/(N-1) r_j + sum_{i>j} r_i = S_j + r_j/(N-1).
        let mut h = vec![0.0f64; j_max];
        let mut suffix = 0.0;
        for j in (0..j_max).rev() {
            suffix += r[j];
            h[j] = suffix + r[j] / (nf - 1.0);
        }

        let inv_c_tail = inv_coeff_sum(&coeff, j_max);
        let coeffs: Vec<f64> = (0..j_max + 1).map(coeff).collect();
        Ok(WalkSpectrum {
            n,
            r: r.iter().map(|&x| F::from_f64_lossy(x)).collect(),
            h: h.iter().map(|&x| F::from_f64_lossy(x)).collect(),
            d_norm: F::from_f64_lossy(d_norm),
            d_star: F::from_f64_lossy(d_star),
            j_max,
            eps_tail: F::from_f64_lossy(nf.powi(-(j_max as i32))),
            inv_c_tail: inv_c_tail.map(F::from_f64_lossy),
            coeffs,
        })
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Certified bound on the truncated part of the `P_t` series, valid for
    /// every `t >= 0`.
    pub fn eps_tail(&self) -> F {
        self.eps_tail
    }

    pub fn level_probabilities(&self) -> &[F] {
        &self.r
    }

    pub fn eigenvalues(&self) -> &[F] {
        &self.h
    }

    pub fn d_norm(&self) -> F {
        self.d_norm
    }

    /// Total jump rate of the physical walk. The spectral formulas describe
    /// the unit-rate walk; occupation times in physical time divide by this.
    pub fn d_star(&self) -> F {
        self.d_star
    }

    /// `P_t(0, eta)` for any site `eta` at distance `k`, unit-jump-rate clock.
    pub fn transition_prob(&self, t: F, k: u32) -> Result<F> {
        if t < F::zero() {
            return Err(Error::parameter("time must be nonnegative"));
        }
        let k = k as usize;
        let nf = F::from_u32(self.n).unwrap();
        let nm1 = nf - F::one();
        let mut acc = F::zero();
        let mut npow = nf.powi(-(k.max(1) as i32));
        for j in k.max(1)..=self.j_max {
            let kjk = if j == k { -F::one() } else { nm1 };
            acc = acc + kjk * (-self.h[j - 1] * t).exp() * npow;
            npow = npow / nf;
        }
        Ok(acc)
    }

    /// Green function `G_k = sum_{j>=k} K_{jk}/(h_j N^j)` of the unit-rate
    /// walk, or `Infinite` when the walk is recurrent.
    pub fn green_block(&self, k: u32) -> Green<F> {
        let inv_tail = match self.inv_c_tail {
            None => return Green::Infinite,
            Some(t) => t,
        };
        let k = k as usize;
        let nf = F::from_u32(self.n).unwrap();
        let nm1 = nf - F::one();
        let mut acc = F::zero();
        let mut npow = nf.powi(-(k.max(1) as i32));
        for j in k.max(1)..=self.j_max {
            let h = self.h[j - 1];
            if h <= F::zero() {
                // Confined walk (coefficients truncated): every shell is
                // visited forever.
                return Green::Infinite;
            }
            let kjk = if j == k { -F::one() } else { nm1 };
            acc = acc + kjk / (h * npow.recip());
            npow = npow / nf;
        }
        // Beyond j_max: 1/(h_j N^j) <= D (N-1) N^-2 / c_{j-1} term by term.
        let tail = self.d_norm * nm1 * nm1 / (nf * nf) * inv_tail;
        Green::Finite {
            value: acc + tail * F::from_f64_lossy(0.5),
            tail_bound: tail,
        }
    }

    /// Raw coefficient used at level `k` (after the effective correction).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }
}

/// Convenience wrapper matching the operation signature: `P_t(0, shell k)`.
pub fn transition_prob<F: Real>(spec: &WalkSpectrum<F>, t: F, k: u32) -> Result<F> {
    spec.transition_prob(t, k)
}

/// Convenience wrapper: Green function of the unit-rate walk at distance `k`.
pub fn green_block<F: Real>(spec: &WalkSpectrum<F>, k: u32) -> Green<F> {
    spec.green_block(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::CoefficientFamily;
    use crate::rng::stream_rng;
    use rand::Rng;

    fn geom(n: u32, k: u32) -> HierGeometry {
        HierGeometry::finite(n, k).unwrap()
    }

    #[test]
    fn distance_identity_and_examples() {
        let g = geom(3, 2);
        let a = Site::new(&g, vec![1, 0]).unwrap();
        assert_eq!(hier_distance(&a, &a).unwrap(), 0);
        let b = Site::new(&g, vec![2, 0]).unwrap();
        assert_eq!(hier_distance(&a, &b).unwrap(), 1);
        let c = Site::new(&g, vec![1, 1]).unwrap();
        let d = Site::new(&g, vec![2, 2]).unwrap();
        assert_eq!(hier_distance(&c, &d).unwrap(), 2);
    }

    #[test]
    fn distance_rejects_mismatched_geometries() {
        let g2 = geom(3, 2);
        let g3 = geom(3, 3);
        let a = Site::new(&g2, vec![1, 0]).unwrap();
        let b = Site::new(&g3, vec![1, 0, 0]).unwrap();
        assert!(matches!(hier_distance(&a, &b), Err(Error::GeometryMismatch(_))));
    }

    #[test]
    fn ultrametric_inequality_holds_on_random_triples() {
        let g = geom(4, 7);
        let sites = g.site_count().unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..10_000 {
            let (a, b, c) = (
                rng.random_range(0..sites),
                rng.random_range(0..sites),
                rng.random_range(0..sites),
            );
            let dab = g.distance_idx(a, b);
            let dbc = g.distance_idx(b, c);
            let dac = g.distance_idx(a, c);
            assert!(dac <= dab.max(dbc), "ultrametric violated: {dab} {dbc} {dac}");
            // And via the digit representation.
            let sa = Site::from_index(&g, a).unwrap();
            let sb = Site::from_index(&g, b).unwrap();
            assert_eq!(hier_distance(&sa, &sb).unwrap(), dab);
        }
    }

    #[test]
    fn block_count_examples() {
        let g3 = geom(3, 4);
        assert_eq!(block_counts(&g3, 0).unwrap(), (1, 1, 1));
        assert_eq!(block_counts(&g3, 2).unwrap(), (9, 6, 3));
        let g2 = geom(2, 4);
        assert_eq!(block_counts(&g2, 1).unwrap(), (2, 1, 0));
        assert!(block_counts(&g2, 5).is_err());
    }

    #[test]
    fn kernel_examples_single_level() {
        // One active level: a = c_0/N for neighbours, D* = c_0 (1 - 1/N)/1.
        let g = geom(2, 6);
        let mig = MigrationSpec::raw(CoefficientFamily::explicit(vec![1.0]).unwrap()).unwrap();
        let kern = migration_kernel(&g, &mig).unwrap();
        assert_eq!(kern.rate_between(&g, 5, 5), 0.0);
        let a01 = kern.rate_between(&g, 0, 1);
        assert!((a01 - 0.5).abs() < 1e-15);
        assert!((kern.d_star() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kernel_row_sums_equal_d_star() {
        let g = geom(3, 4);
        let mig = MigrationSpec::raw(
            CoefficientFamily::explicit(vec![1.0, 0.7, 0.4, 0.2]).unwrap(),
        )
        .unwrap();
        let kern = migration_kernel(&g, &mig).unwrap();
        let sites = g.site_count().unwrap();
        for eta in [0u64, 5, 80] {
            let row: f64 = (0..sites).map(|z| kern.rate_between(&g, eta, z)).sum();
            assert!(
                (row - kern.d_star()).abs() < 1e-10,
                "row sum {row} vs D* {}",
                kern.d_star()
            );
        }
    }

    #[test]
    fn jump_stays_in_block_and_is_uniformish() {
        let g = geom(2, 5);
        let mig = MigrationSpec::raw(CoefficientFamily::explicit(vec![1.0, 1.0]).unwrap()).unwrap();
        let kern = migration_kernel(&g, &mig).unwrap();
        let mut rng = stream_rng(3, 1);
        for _ in 0..2000 {
            let to = kern.jump(&g, 6, &mut rng);
            assert!(g.distance_idx(6, to) <= 2);
        }
    }

    #[test]
    fn spectrum_rejects_non_summable_migration() {
        // c_k = 4^k with N = 2 grows faster than the order: no walk exists.
        let fam = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        let mig = MigrationSpec::raw(fam).unwrap();
        let err = WalkSpectrum::<f64>::build(2, &mig, 4, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonSummableMigration(_)), "{err}");
    }

    #[test]
    fn spectrum_level_probabilities_normalise() {
        for fam in [
            CoefficientFamily::constant(1.0).unwrap(),
            CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap(),
        ] {
            let mig = MigrationSpec::raw(fam).unwrap();
            let spec = WalkSpectrum::<f64>::build(8, &mig, 6, 1e-14).unwrap();
            let total: f64 = spec.level_probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "sum r_j = {total}");
        }
    }

    #[test]
    fn transition_prob_at_time_zero() {
        let mig = MigrationSpec::raw(CoefficientFamily::constant(1.0).unwrap()).unwrap();
        let spec = WalkSpectrum::<f64>::build(2, &mig, 10, 1e-14).unwrap();
        assert!((spec.transition_prob(0.0, 0).unwrap() - 1.0).abs() < 1e-12);
        for k in 1..8 {
            assert!(spec.transition_prob(0.0, k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn transition_prob_normalises_over_shells() {
        let mig = MigrationSpec::raw(CoefficientFamily::constant(1.0).unwrap()).unwrap();
        let spec = WalkSpectrum::<f64>::build(2, &mig, 46, 1e-16).unwrap();
        for t in [0.0, 0.1, 1.0, 10.0] {
            // Shells beyond ~46 carry less than t * sum_{k>46} c_{k-1} N^{1-k}
            // of mass, far below the tolerance.
            let total: f64 = (0..=46)
                .map(|k| shell_count(2, k) * spec.transition_prob(t, k).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "t={t}: mass {total}");
        }
    }

    #[test]
    fn green_recurrent_walk_is_infinite() {
        // sum 1/c_k = infinity for constant coefficients.
        let mig = MigrationSpec::raw(CoefficientFamily::constant(1.0).unwrap()).unwrap();
        let spec = WalkSpectrum::<f64>::build(2, &mig, 8, 1e-14).unwrap();
        assert_eq!(spec.green_block(0), Green::Infinite);
    }

    #[test]
    fn green_monotone_in_distance_for_transient_walk() {
        let fam = CoefficientFamily::exponential(4.0, 1.0, 0.0, 0.0).unwrap();
        let mig = MigrationSpec::raw(fam).unwrap();
        let spec = WalkSpectrum::<f64>::build(8, &mig, 12, 1e-14).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..12 {
            match spec.green_block(k) {
                Green::Finite { value, tail_bound } => {
                    assert!(value > 0.0);
                    assert!(tail_bound < 1e-12 * value.max(1e-3), "tail {tail_bound}");
                    assert!(value <= prev + 1e-14, "G_{k} = {value} > G_{} = {prev}", k - 1);
                    prev = value;
                }
                Green::Infinite => panic!("transient walk reported infinite Green function"),
            }
        }
    }

    #[test]
    fn effective_coefficients_shift_by_lambda_over_n() {
        let c = CoefficientFamily::constant(1.0).unwrap();
        let lam = CoefficientFamily::constant(3.0).unwrap();
        let mig = MigrationSpec::effective(c, lam).unwrap();
        assert!((mig.coeff(0, 2) - (1.0 + 1.5)).abs() < 1e-15);
        assert!((mig.coeff(5, 4) - (1.0 + 0.75)).abs() < 1e-15);
    }
}
