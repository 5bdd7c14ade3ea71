//! Controlled quantum search on graphs driven by the discrete nonlinear
//! Schrödinger equation
//!
//! ```text
//! i x'_j = gamma sum_k L_jk x_k + u_j(t) |x_j|^(2 zeta_j) x_j
//! ```
//!
//! The crate reduces graph dynamics to equivalence classes and shells,
//! evaluates the closed-form complete-graph protocol, integrates with an
//! adaptive three-stage Radau IIA method, and searches for bounded spline
//! controls on shell-structured graphs.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod analytic;
pub mod cli;
pub mod control_opt;
pub mod dynamics;
pub mod error;
pub mod graphs;
pub mod integrate;
pub mod scalar;

pub use analytic::{CompleteProtocol, PerturbationSpec, RuntimeRegime};
pub use control_opt::{optimize, BSplineControl, Costates, OptimizationProblem, OptimizationResult};
pub use dynamics::{Control, ControlScheme, ModelParams, Polar, ReducedDynamics, SystemState};
pub use error::{Error, Result};
pub use graphs::{EquivalencePartition, Graph, ShellDescriptor};
pub use integrate::{IntegratorConfig, Peak, Trajectory};
pub use scalar::Real;

pub type SystemState64 = SystemState<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type ControlScheme64 = ControlScheme<f64>;
pub type CompleteProtocol64 = CompleteProtocol<f64>;
pub type BSplineControl64 = BSplineControl<f64>;
pub type Costates64 = Costates<f64>;
pub type OptimizationProblem64 = OptimizationProblem<f64>;
pub type OptimizationResult64 = OptimizationResult<f64>;
pub type IntegratorConfig64 = IntegratorConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
