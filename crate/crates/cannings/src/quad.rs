//! Adaptive quadrature on `(0,1)` with divergence detection at the endpoints.
//!
//! Resampling-measure densities are integrated against weights like `1/r` or
//! `1/r^2` that may blow up at 0 (and, for Beta-like densities, at 1). The
//! integrator splits `(0,1)` into dyadic panels shrinking towards both
//! endpoints, integrates each panel with adaptive Gauss-Legendre, and watches
//! the per-panel contributions: geometric decay is summed and extrapolated,
//! sustained non-decay is reported as divergence.

/// Outcome of an endpoint-singular integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quad {
    Finite(f64),
    Divergent,
}

impl Quad {
    pub fn is_finite(&self) -> bool {
        matches!(self, Quad::Finite(_))
    }

    /// Finite value, or `f64::INFINITY` for a divergent integral.
    pub fn value_or_inf(&self) -> f64 {
        match self {
            Quad::Finite(v) => *v,
            Quad::Divergent => f64::INFINITY,
        }
    }
}

// 15-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.9372733924007060,
    0.9879925180204854,
];
const GL_WEIGHTS: [f64; 8] = [
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
];

fn gauss15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = GL_WEIGHTS[0] * f(c);
    for i in 1..8 {
        let dx = h * GL_NODES[i];
        acc += GL_WEIGHTS[i] * (f(c + dx) + f(c - dx));
    }
    acc * h
}

fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let whole = gauss15(f, a, b);
    let m = 0.5 * (a + b);
    let halves = gauss15(f, a, m) + gauss15(f, m, b);
    if depth == 0 || (whole - halves).abs() <= tol.max(1e-15 * halves.abs()) {
        halves
    } else {
        panel(f, a, m, 0.5 * tol, depth - 1) + panel(f, m, b, 0.5 * tol, depth - 1)
    }
}

/// Integrate `f` over `(0,1)` to absolute tolerance `tol`.
///
/// `f` must be finite on the open interval; endpoint singularities are
/// handled by the dyadic refinement.
pub fn integrate_unit(f: impl Fn(f64) -> f64, tol: f64) -> Quad {
    let f = &f;
    // Central panel plus dyadic ladders towards 0 and towards 1.
    let mut total = panel(f, 0.25, 0.75, tol / 4.0, 24);
    for (lo_side, hi_side) in [(true, false), (false, true)] {
        let mut prev = f64::INFINITY;
        let mut flat_run = 0u32;
        let mut m = 2u32;
        loop {
            let (a, b) = if lo_side {
                (2f64.powi(-(m as i32 + 1)), 2f64.powi(-(m as i32)))
            } else {
                (1.0 - 2f64.powi(-(m as i32)), 1.0 - 2f64.powi(-(m as i32 + 1)))
            };
            let _ = hi_side;
            let c = panel(f, a, b, tol / 16.0, 20);
            total += c;
            let ca = c.abs();
            // Geometric decay: extrapolate the remaining tail and stop.
            if ca < prev * 0.75 && ca < tol {
                let ratio = (ca / prev).min(0.75);
                total += c * ratio / (1.0 - ratio);
                break;
            }
            // Sustained non-decay of panel contributions means the integral
            // fails to converge at this endpoint.
            flat_run = if ca >= prev * 0.999 { flat_run + 1 } else { 0 };
            if flat_run >= 40 && ca > tol {
                return Quad::Divergent;
            }
            if m >= 900 {
                if ca > tol {
                    return Quad::Divergent;
                }
                break;
            }
            prev = ca.max(f64::MIN_POSITIVE);
            m += 1;
        }
    }
    Quad::Finite(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integral() {
        match integrate_unit(|r| r * r, 1e-12) {
            Quad::Finite(v) => assert!((v - 1.0 / 3.0).abs() < 1e-11),
            Quad::Divergent => panic!("convergent integral flagged divergent"),
        }
    }

    #[test]
    fn integrable_singularity_at_zero() {
        // int_0^1 r^(-1/2) dr = 2
        match integrate_unit(|r| r.powf(-0.5), 1e-10) {
            Quad::Finite(v) => assert!((v - 2.0).abs() < 1e-9, "got {v}"),
            Quad::Divergent => panic!("integrable singularity flagged divergent"),
        }
    }

    #[test]
    fn integrable_singularity_at_one() {
        // int_0^1 (1-r)^(-1/2) dr = 2
        match integrate_unit(|r| (1.0 - r).powf(-0.5), 1e-10) {
            Quad::Finite(v) => assert!((v - 2.0).abs() < 1e-9, "got {v}"),
            Quad::Divergent => panic!("integrable singularity flagged divergent"),
        }
    }

    #[test]
    fn divergence_at_zero() {
        assert_eq!(integrate_unit(|r| 1.0 / r, 1e-10), Quad::Divergent);
        assert_eq!(integrate_unit(|r| 1.0 / (r * r), 1e-10), Quad::Divergent);
    }

    #[test]
    fn beta_moment() {
        // int r^1.5 (1-r)^(-0.5) dr = B(2.5, 0.5) = 0.58904862254808624
        match integrate_unit(|r| r.powf(1.5) * (1.0 - r).powf(-0.5), 1e-11) {
            Quad::Finite(v) => assert!((v - 0.58904862254808624).abs() < 1e-9, "got {v}"),
            Quad::Divergent => panic!("finite Beta moment flagged divergent"),
        }
    }
}
