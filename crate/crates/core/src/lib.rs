//! Delayed Hegselmann-Krause opinion dynamics: simulation and verification.
//!
//! Agents `i = 1..N` carry opinions `x_i(t)` in `R^d` and evolve by
//!
//! ```text
//!   dx_i/dt = sum_{j != i} psi_ij(t) * (x_j(t - tau) - x_i(t))
//! ```
//!
//! where the communication weights `psi_ij` are built from a positive influence
//! function `psi` under one of three scalings (see [`model::WeightScheme`]).
//! The delayed system is integrated by the method of steps with a fixed-step
//! classical Runge-Kutta scheme and dense cubic-Hermite history
//! ([`engine`]). The [`analysis`] module computes the contraction certificates
//! (`psi_lower`, `sigma`, `Gamma`, `gamma_minus`, `gamma_plus`) that bound the
//! diameter shrinkage of the group on windows of length `6 tau`, and checks
//! them against simulated trajectories. [`meanfield`] provides the
//! particle-approximation side of the mean-field limit: empirical measures,
//! 1-Wasserstein distances and N-scaling experiments.

pub mod analysis;
pub mod engine;
mod error;
pub mod history;
pub mod meanfield;
pub mod model;
pub mod rng;

pub use engine::{IntegratorConfig, Simulation, Trajectory};
pub use error::{Error, Result};
pub use history::InitialHistory;
pub use model::{InfluenceFunction, ModelParams, Points, SystemState, WeightScheme};
