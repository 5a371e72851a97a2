//! Hierarchically interacting Cannings processes.
//!
//! A population carries one of finitely many types and lives on the
//! hierarchical group of order `N` (or on one of its truncations).
//! Individuals migrate between colonies, resample locally, and take part in
//! block-level reshuffling-resampling events driven by a sequence of finite
//! measures on `[0,1]`. This crate provides
//!
//! * the forward-in-time models (individual-based and continuum-mass),
//! * their dual, the spatial lambda-coalescent with non-local coalescence,
//! * the single-colony McKean-Vlasov process with immigration-emigration and
//!   its interaction chain across hierarchical scales,
//! * closed-form renormalisation analytics: the volatility flow `d_k`, the
//!   clustering vs. local-coexistence dichotomy, regime classification and
//!   pair-coalescence hazard moments,
//! * potential theory of the hierarchical random walk (transition
//!   probabilities, Green functions) used by the hazard formulas.
//!
//! Every closed-form quantity has a Monte-Carlo counterpart somewhere in the
//! crate so the two routes can be cross-validated.
//!
//! The closed-form analytics are generic over the floating-point scalar via
//! [`Real`]; the simulators work in `f64`. Concrete aliases for the common
//! instantiations live at the crate root.

pub mod coalescent;
pub mod forward;
pub mod hiergeo;
pub mod lambda;
pub mod mckv;
pub mod quad;
pub mod renorm;
pub mod rng;
pub mod scalar;
pub mod stats;

mod error;

pub use error::{Error, Result};
pub use scalar::Real;

/// Volatility-flow output over `f64`.
pub type FlowResult64 = renorm::FlowResult<f64>;
/// Random-walk spectrum over `f64`.
pub type WalkSpectrum64 = hiergeo::WalkSpectrum<f64>;
/// Möbius fixed-point data over `f64`.
pub type MobiusFixedPoints64 = renorm::MobiusFixedPoints<f64>;
/// Closed-form hazard moments over `f64`.
pub type HazardMoments64 = renorm::HazardMoments<f64>;
