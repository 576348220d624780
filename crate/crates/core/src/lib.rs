//! Ergodic secrecy analysis for a NOMA downlink relayed by a UAV-mounted
//! STAR surface with imperfect phase compensation.
//!
//! The analytic kernels (`geometry`, `rf_stats`, `quadrature`,
//! `closed_form`) are generic over [`Scalar`] (`f32` or `f64`). Monte Carlo,
//! optimization, configuration and the CLI plumbing work in `f64`; the
//! aliases below name the `f64` instantiations.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod config;
pub mod geometry;
pub mod monte_carlo;
pub mod optimizer;
pub mod output;
pub mod quadrature;
pub mod rf_stats;
pub mod scalar;
pub mod special;
pub mod sweep;
pub mod validate;

pub use closed_form::{secrecy_report, AnalysisError, Evaluator};
pub use config::{load_config, ConfigError, ScenarioConfig, Weights};
pub use monte_carlo::{simulate_rates, EvePhaseModel, McSettings, RateEstimates};
pub use optimizer::{alternating_optimize, gss_zeta, grid_search_uav, OptResult, OptimizerSettings, SearchBox};
pub use scalar::Scalar;
pub use sweep::{run_optimize, run_sweep, SweepSpec};
pub use validate::{run_validate, ValidationHooks, ValidationReport};

pub type Position = geometry::Position3D<f64>;
pub type Layout = geometry::NodeLayout<f64>;
pub type Distances = geometry::LinkDistances<f64>;
pub type PhaseModel = rf_stats::PhaseErrorModel<f64>;
pub type Fading = rf_stats::FadingParams<f64>;
pub type GammaParams = rf_stats::GammaChannelParams<f64>;
pub type Rule = quadrature::QuadRule<f64>;
pub type Integrator = quadrature::CapacityIntegrator<f64>;
pub type Power = closed_form::PowerConfig<f64>;
pub type Snr = closed_form::SnrConstants<f64>;
pub type Report = closed_form::SecrecyReport<f64>;
