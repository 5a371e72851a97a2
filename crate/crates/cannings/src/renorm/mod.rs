//! Closed-form renormalisation analytics.
//!
//! The volatility constants `d_k` obey a Möbius recursion driven by the
//! migration coefficients `c_k` and the halved resampling masses
//! `mu_k = lambda_k/2`. This module computes the flow, its fixed points,
//! the clustering vs. local-coexistence dichotomy (symbolically from family
//! exponents and numerically from partial-sum trends), the scaling regime
//! with its limit constants, cluster-speed diagnostics, and the closed-form
//! moments of the pair-coalescence hazard at finite hierarchy order.

mod classify;
mod dichotomy;
mod family;
mod flow;
mod hazard;
mod variance;

pub use classify::{
    case_b_constant, case_d_constant, classify_regime, clustering_speed, exp_case_b_constant,
    ClusterSpeed, FamilyKind, LimitValue, RegimeCase, RegimeReport, ScalingLaw, Verdict,
};
pub use dichotomy::{dichotomy_test, DichotomyReport, IndicatorReport};
pub use family::CoefficientFamily;
pub use flow::{dk_flow, mobius_apply, mobius_fixed_points, FlowResult, MobiusFixedPoints};
pub use hazard::{hazard_closed_form, hazard_large_n_asymptotic, HazardMoments};
pub use variance::{chain_variance, ChainVarianceMode};
