//! Stiff ODE integration (Radau IIA) with dense output and peak detection.

pub mod linalg;
mod peak;
mod radau;

pub use peak::{find_first_peak, find_first_peak_with_tol, Peak};
pub use radau::{integrate, integrate_fixed, DenseStep, IntegratorConfig, IntegratorStats, Trajectory};
