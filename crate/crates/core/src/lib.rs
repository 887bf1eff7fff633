//! New Keynesian model with productive public capital, solved at and away
//! from the effective lower bound on an exact finite Markov-chain
//! representation of every variable.
//!
//! All model code is generic over [`Scalar`]: `f64` for everyday use, `f32`,
//! and [`Exact`] (arbitrary-precision rationals) for checks that must be free
//! of rounding. The aliases below fix the common `f64` instantiations.

pub mod analytics;
pub mod datasets;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod model;
pub mod oracle;
pub mod output;
pub mod scalar;
pub mod selftest;
pub mod solver;

pub use analytics::{
    decompose_multiplier, eigen_diagnostics, impact_multiplier_normal, impact_multiplier_trap,
    multiplier_report, pdv_multiplier, sweep_l, theta_values, threshold_eps_i, PdvScenario,
    Scenario, Trap,
};
pub use error::{Error, Result};
pub use linalg::{Mat2, Vec2};
pub use markov::{build_transition, capital_states, exogenous_states, expectation, irf, ChainSpec};
pub use model::{
    derive_composites, load_config, parse_config, regime_matrices, steady_state, Nkpc, ParamSet,
    Regime,
};
pub use scalar::{Real, Scalar};
pub use solver::{
    calibrate_xi, calibrate_xi_at, impact_closed_form, q_limit, solve_elb, solve_terminal,
    verify_binding, BindingPattern, ExitMode,
};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Params = model::StructuralParams<f64>;
pub type ExactParams = model::StructuralParams<Exact>;
pub type Solution = solver::EquilibriumSolution<f64>;
pub type ExactSolution = solver::EquilibriumSolution<Exact>;
pub type Irf = markov::IrfPath<f64>;
pub type Report = analytics::MultiplierReport<f64>;
pub type SteadyState = model::SteadyState<f64>;
pub type Matrices = model::RegimeMatrices<f64>;
