//! Resampling measures on `[0,1]` and their derived intensities.
//!
//! A measure splits into a Kingman atom at 0 (volatility `d`, pairwise
//! coalescence rate `2d`), point masses on `(0,1]` and a Beta-like density
//! `C r^p (1-r)^q` on `(0,1)`. The reweighted intensity `Lambda*(dr) =
//! Lambda(dr)/r^2` drives resampling events; its total mass may be infinite
//! (dust-free measures), in which case consumers must fall back to
//! effective-event rates.

use crate::quad::{integrate_unit, Quad};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

const QUAD_TOL: f64 = 1e-10;

/// Density `coeff * r^r_exp * (1-r)^one_minus_r_exp` on `(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDensity {
    pub coeff: f64,
    #[serde(default)]
    pub r_exp: f64,
    #[serde(default)]
    pub one_minus_r_exp: f64,
}

impl PowerDensity {
    fn validate(&self) -> Result<()> {
        if !(self.coeff > 0.0 && self.coeff.is_finite()) {
            return Err(Error::InvalidMeasure("density coefficient must be positive".into()));
        }
        if self.r_exp <= -1.0 || self.one_minus_r_exp <= -1.0 {
            return Err(Error::InvalidMeasure(
                "density exponents must exceed -1 for a finite measure".into(),
            ));
        }
        Ok(())
    }

    fn eval(&self, r: f64) -> f64 {
        self.coeff * r.powf(self.r_exp) * (1.0 - r).powf(self.one_minus_r_exp)
    }

    /// `int density(r) r^a (1-r)^b dr`, divergence-aware.
    fn moment(&self, a: f64, b: f64) -> Quad {
        integrate_unit(
            |r| self.eval(r) * r.powf(a) * (1.0 - r).powf(b),
            QUAD_TOL,
        )
    }
}

/// Serialisation schema: `{"kingman": d, "atoms": [[r, m], ...],
/// "density": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaSpec {
    #[serde(default)]
    kingman: f64,
    #[serde(default)]
    atoms: Vec<(f64, f64)>,
    #[serde(default)]
    density: Option<PowerDensity>,
}

/// A finite resampling measure with cached intensities.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LambdaSpec", into = "LambdaSpec")]
pub struct LambdaMeasure {
    kingman: f64,
    atoms: Vec<(f64, f64)>,
    density: Option<PowerDensity>,
    lambda: f64,
    lambda_star: f64,
    dust_free: bool,
}

impl TryFrom<LambdaSpec> for LambdaMeasure {
    type Error = Error;
    fn try_from(s: LambdaSpec) -> Result<Self> {
        LambdaMeasure::new(s.kingman, s.atoms, s.density)
    }
}

impl From<LambdaMeasure> for LambdaSpec {
    fn from(m: LambdaMeasure) -> LambdaSpec {
        LambdaSpec {
            kingman: m.kingman,
            atoms: m.atoms,
            density: m.density,
        }
    }
}

impl LambdaMeasure {
    pub fn new(kingman: f64, atoms: Vec<(f64, f64)>, density: Option<PowerDensity>) -> Result<Self> {
        if !(kingman >= 0.0 && kingman.is_finite()) {
            return Err(Error::InvalidMeasure("Kingman mass must be finite and >= 0".into()));
        }
        for &(r, m) in &atoms {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidMeasure(format!("atom position {r} outside (0,1]")));
            }
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom mass {m} must be positive")));
            }
        }
        if let Some(d) = &density {
            d.validate()?;
        }

        let atom_mass: f64 = atoms.iter().map(|&(_, m)| m).sum();
        let density_mass = match density.as_ref().map(|d| d.moment(0.0, 0.0)) {
            Some(Quad::Finite(v)) => v,
            Some(Quad::Divergent) => {
                return Err(Error::InvalidMeasure("density has infinite total mass".into()))
            }
            None => 0.0,
        };
        let lambda = atom_mass + density_mass;

        let atom_star: f64 = atoms.iter().map(|&(r, m)| m / (r * r)).sum();
        let lambda_star = match density.as_ref().map(|d| d.moment(-2.0, 0.0)) {
            Some(Quad::Finite(v)) => atom_star + v,
            Some(Quad::Divergent) => f64::INFINITY,
            None => atom_star,
        };

        let dust_free = match density.as_ref().map(|d| d.moment(-1.0, 0.0)) {
            Some(Quad::Divergent) => true,
            _ => false,
        };

        Ok(LambdaMeasure {
            kingman,
            atoms,
            density,
            lambda,
            lambda_star,
            dust_free,
        })
    }

    /// The zero measure.
    pub fn zero() -> Self {
        LambdaMeasure::new(0.0, vec![], None).expect("zero measure is valid")
    }

    /// Pure Kingman atom.
    pub fn kingman_only(d: f64) -> Result<Self> {
        LambdaMeasure::new(d, vec![], None)
    }

    /// A single point mass `m` at `r`.
    pub fn single_atom(r: f64, m: f64) -> Result<Self> {
        LambdaMeasure::new(0.0, vec![(r, m)], None)
    }

    /// `(d, lambda, lambda*)`: Kingman mass, continuous total mass, and the
    /// reweighted total intensity (`infinity` for dust-free-at-0 densities).
    pub fn total_masses(&self) -> (f64, f64, f64) {
        (self.kingman, self.lambda, self.lambda_star)
    }

    pub fn kingman_mass(&self) -> f64 {
        self.kingman
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn is_dust_free(&self) -> bool {
        self.dust_free
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&PowerDensity> {
        self.density.as_ref()
    }

    /// Rate at which a fixed `i`-subset of `b` families at one site merges:
    /// `lambda_{b,i} = int Lambda*(dr) r^i (1-r)^(b-i)` over the continuous
    /// part. The Kingman supplement (`2d` per pair, `i = 2` only) is not
    /// included here.
    pub fn coalescence_rate(&self, b: usize, i: usize) -> Result<f64> {
        if i < 2 || i > b {
            return Err(Error::parameter(format!(
                "subset size {i} must lie in [2, {b}]"
            )));
        }
        let mut rate: f64 = self
            .atoms
            .iter()
            .map(|&(r, m)| m * r.powi(i as i32 - 2) * (1.0 - r).powi((b - i) as i32))
            .sum();
        if let Some(d) = &self.density {
            match d.moment(i as f64 - 2.0, (b - i) as f64) {
                Quad::Finite(v) => rate += v,
                Quad::Divergent => {
                    return Err(Error::InvalidMeasure(
                        "coalescence-rate integral diverged".into(),
                    ))
                }
            }
        }
        Ok(rate)
    }

    /// Total rate at which some pair among `b = 2` families merges:
    /// `lambda + 2d`.
    pub fn pair_rate(&self) -> f64 {
        self.lambda + 2.0 * self.kingman
    }

    /// Draw from the normalised continuous part `Lambda/lambda`.
    pub fn sample_r(&self, rng: &mut impl Rng) -> f64 {
        debug_assert!(self.lambda > 0.0, "sampling from a zero measure");
        let atom_mass: f64 = self.atoms.iter().map(|&(_, m)| m).sum();
        let mut u = rng.random_range(0.0..self.lambda);
        if u < atom_mass {
            for &(r, m) in &self.atoms {
                if u < m {
                    return r;
                }
                u -= m;
            }
        }
        let d = self.density.as_ref().expect("mass beyond atoms implies a density");
        // C r^p (1-r)^q normalised is Beta(p+1, q+1).
        let beta = Beta::new(d.r_exp + 1.0, d.one_minus_r_exp + 1.0)
            .expect("validated exponents give a proper Beta");
        beta.sample(rng)
    }

    /// Draw from the normalised intensity `Lambda*/lambda*`; requires a
    /// finite `lambda*`.
    pub fn sample_r_star(&self, rng: &mut impl Rng) -> Result<f64> {
        if !self.lambda_star.is_finite() || self.lambda_star == 0.0 {
            return Err(Error::InvalidMeasure(
                "Lambda* sampling needs a finite positive total intensity".into(),
            ));
        }
        let atom_star: f64 = self.atoms.iter().map(|&(r, m)| m / (r * r)).sum();
        let mut u = rng.random_range(0.0..self.lambda_star);
        if u < atom_star {
            for &(r, m) in &self.atoms {
                let w = m / (r * r);
                if u < w {
                    return Ok(r);
                }
                u -= w;
            }
        }
        let d = self
            .density
            .as_ref()
            .expect("intensity mass beyond atoms implies a density");
        // C r^(p-2) (1-r)^q normalised is Beta(p-1, q+1); p > 1 since
        // lambda* is finite.
        let beta = Beta::new(d.r_exp - 1.0, d.one_minus_r_exp + 1.0)
            .map_err(|_| Error::InvalidMeasure("density intensity is not a proper Beta".into()))?;
        Ok(beta.sample(rng))
    }
}

/// `(d, lambda, lambda*)` of a measure.
pub fn total_masses(measure: &LambdaMeasure) -> (f64, f64, f64) {
    measure.total_masses()
}

/// Operation form of [`LambdaMeasure::coalescence_rate`].
pub fn coalescence_rate(measure: &LambdaMeasure, b: usize, i: usize) -> Result<f64> {
    measure.coalescence_rate(b, i)
}

/// Dust-free predicate: `int Lambda(dr)/r = infinity`.
pub fn is_dust_free(measure: &LambdaMeasure) -> bool {
    measure.is_dust_free()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn pure_kingman_masses() {
        let m = LambdaMeasure::kingman_only(0.7).unwrap();
        assert_eq!(m.total_masses(), (0.7, 0.0, 0.0));
        assert!(!m.is_dust_free());
    }

    #[test]
    fn single_atom_masses() {
        let m = LambdaMeasure::single_atom(0.5, 1.0).unwrap();
        let (d, l, ls) = m.total_masses();
        assert_eq!(d, 0.0);
        assert!((l - 1.0).abs() < 1e-12);
        assert!((ls - 4.0).abs() < 1e-12);
        assert!(!m.is_dust_free());
    }

    #[test]
    fn uniform_density_has_infinite_intensity() {
        let m = LambdaMeasure::new(
            0.0,
            vec![],
            Some(PowerDensity {
                coeff: 1.0,
                r_exp: 0.0,
                one_minus_r_exp: 0.0,
            }),
        )
        .unwrap();
        let (d, l, ls) = m.total_masses();
        assert_eq!(d, 0.0);
        assert!((l - 1.0).abs() < 1e-9, "lambda = {l}");
        assert!(ls.is_infinite());
        assert!(m.is_dust_free());
    }

    #[test]
    fn stable_like_density_dust_boundary() {
        // density r^(1-alpha) (1-r)^(alpha-1): dust-free iff alpha > 1.
        for (alpha, expect) in [(1.5, true), (0.5, false)] {
            let m = LambdaMeasure::new(
                0.0,
                vec![],
                Some(PowerDensity {
                    coeff: 1.0,
                    r_exp: 1.0 - alpha,
                    one_minus_r_exp: alpha - 1.0,
                }),
            )
            .unwrap();
            assert_eq!(m.is_dust_free(), expect, "alpha = {alpha}");
        }
    }

    #[test]
    fn atom_coalescence_rates() {
        // m delta_r: lambda_{b,i} = m r^(i-2) (1-r)^(b-i).
        let m = LambdaMeasure::single_atom(0.3, 2.0).unwrap();
        for b in 2..=6 {
            for i in 2..=b {
                let expect = 2.0 * 0.3f64.powi(i as i32 - 2) * 0.7f64.powi((b - i) as i32);
                let got = m.coalescence_rate(b, i).unwrap();
                assert!((got - expect).abs() < 1e-12);
            }
        }
        assert!(m.coalescence_rate(3, 1).is_err());
        assert!(m.coalescence_rate(3, 4).is_err());
    }

    #[test]
    fn pair_rate_is_lambda_of_continuous_part() {
        // lambda_{2,2} = lambda for any measure without an atom at 0.
        let m = LambdaMeasure::new(
            0.0,
            vec![(0.2, 0.4), (0.9, 0.1)],
            Some(PowerDensity {
                coeff: 0.5,
                r_exp: 1.2,
                one_minus_r_exp: 0.3,
            }),
        )
        .unwrap();
        let rate = m.coalescence_rate(2, 2).unwrap();
        assert!((rate - m.lambda()).abs() < 1e-9);
        // And the full pair rate adds the Kingman 2d.
        let m2 = LambdaMeasure::new(0.25, vec![(0.5, 1.0)], None).unwrap();
        assert!((m2.pair_rate() - (1.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn consistency_relation_on_random_measures() {
        let mut rng = stream_rng(21, 0);
        use rand::Rng;
        for trial in 0..60 {
            let n_atoms = rng.random_range(1..4);
            let atoms: Vec<(f64, f64)> = (0..n_atoms)
                .map(|_| (rng.random_range(0.05..1.0), rng.random_range(0.1..2.0)))
                .collect();
            let density = if rng.random_bool(0.5) {
                Some(PowerDensity {
                    coeff: rng.random_range(0.1..2.0),
                    r_exp: rng.random_range(-0.9..2.0),
                    one_minus_r_exp: rng.random_range(-0.9..2.0),
                })
            } else {
                None
            };
            let m = LambdaMeasure::new(0.0, atoms, density).unwrap();
            for b in 2..=8usize {
                for i in 2..=b {
                    let lhs = m.coalescence_rate(b, i).unwrap();
                    let rhs = m.coalescence_rate(b + 1, i + 1).unwrap()
                        + m.coalescence_rate(b + 1, i).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-10 * lhs.max(1.0),
                        "trial {trial}: lambda_{b},{i} = {lhs} vs {rhs}"
                    );
                    // Adding an unmarked individual can only lower the rate.
                    let bigger = m.coalescence_rate(b + 1, i).unwrap();
                    assert!(bigger <= lhs + 1e-12);
                }
            }
        }
    }

    #[test]
    fn total_masses_additive_over_mixtures() {
        let a = LambdaMeasure::new(0.1, vec![(0.4, 0.5)], None).unwrap();
        let b = LambdaMeasure::new(
            0.2,
            vec![(0.8, 0.25)],
            Some(PowerDensity {
                coeff: 1.0,
                r_exp: 2.0,
                one_minus_r_exp: 0.0,
            }),
        )
        .unwrap();
        let mixed = LambdaMeasure::new(
            0.1 + 0.2,
            vec![(0.4, 0.5), (0.8, 0.25)],
            Some(PowerDensity {
                coeff: 1.0,
                r_exp: 2.0,
                one_minus_r_exp: 0.0,
            }),
        )
        .unwrap();
        let (da, la, sa) = a.total_masses();
        let (db, lb, sb) = b.total_masses();
        let (dm, lm, sm) = mixed.total_masses();
        assert!((dm - da - db).abs() < 1e-12);
        assert!((lm - la - lb).abs() < 1e-9);
        assert!((sm - sa - sb).abs() < 1e-9);
    }

    #[test]
    fn sampling_matches_masses() {
        let m = LambdaMeasure::new(
            0.0,
            vec![(0.25, 1.0)],
            Some(PowerDensity {
                coeff: 6.0,
                r_exp: 1.0,
                one_minus_r_exp: 1.0,
            }),
        )
        .unwrap();
        // density mass = 6 B(2,2) = 1, so atoms carry half the mass.
        let mut rng = stream_rng(9, 4);
        let reps = 40_000;
        let mut at_atom = 0usize;
        let mut mean = 0.0;
        for _ in 0..reps {
            let r = m.sample_r(&mut rng);
            if r == 0.25 {
                at_atom += 1;
            }
            mean += r;
        }
        mean /= reps as f64;
        let frac = at_atom as f64 / reps as f64;
        assert!((frac - 0.5).abs() < 0.02, "atom fraction {frac}");
        // E[r] = 0.5*0.25 + 0.5*0.5 = 0.375.
        assert!((mean - 0.375).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"kingman": 0.25, "atoms": [[0.5, 1.0]], "density": {"coeff": 1.0, "r_exp": 0.5}}"#;
        let m: LambdaMeasure = serde_json::from_str(text).unwrap();
        assert_eq!(m.kingman_mass(), 0.25);
        let back = serde_json::to_string(&m).unwrap();
        let m2: LambdaMeasure = serde_json::from_str(&back).unwrap();
        assert!((m2.lambda() - m.lambda()).abs() < 1e-12);
    }

    #[test]
    fn malformed_measures_rejected() {
        assert!(LambdaMeasure::new(-0.1, vec![], None).is_err());
        assert!(LambdaMeasure::new(0.0, vec![(0.0, 1.0)], None).is_err());
        assert!(LambdaMeasure::new(0.0, vec![(0.5, -1.0)], None).is_err());
        // Negative density coefficient.
        assert!(LambdaMeasure::new(
            0.0,
            vec![],
            Some(PowerDensity {
                coeff: -1.0,
                r_exp: 0.0,
                one_minus_r_exp: 0.0
            })
        )
        .is_err());
        // Non-integrable density (not a finite measure).
        assert!(LambdaMeasure::new(
            0.0,
            vec![],
            Some(PowerDensity {
                coeff: 1.0,
                r_exp: -1.5,
                one_minus_r_exp: 0.0
            })
        )
        .is_err());
    }
}
