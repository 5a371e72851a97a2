//! Scalar abstraction for the closed-form analytics.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the analytic layer is generic over.
///
/// `f32` works for quick scans, `f64` is the default everywhere tolerances
/// matter. Simulators are not generic; they run in `f64`.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + 'static {
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(|| Self::from_f64_lossy(n as f64))
    }
}

impl Real for f32 {}
impl Real for f64 {}
