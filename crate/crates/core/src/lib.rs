//! Simulation and certification of synchronization and consensus in noisy
//! networks of Ito stochastic differential equations.
//!
//! A network of `N` identical nodes with state dimension `n` evolves as
//!
//! ```text
//! dx_i = [f(t, x_i) + sigma * sum_{j ~ i} (x_j - x_i)] dt + g_i(t, X) db_i
//! ```
//!
//! where the deterministic coupling runs over a communication [`graph`] and
//! the diffusion can be per-node, shared across the network, or routed
//! through a dedicated noise layer. This crate provides:
//!
//! - [`graph`]: undirected graphs, Laplacians, and their spectra
//!   (algebraic connectivity `lambda_2`, largest eigenvalue `lambda_N`);
//! - [`sde`]: Brownian path generation and fixed-step Euler-Maruyama
//!   integration of the coupled network SDE;
//! - [`models`]: ready-made systems — environment- and fully-coupled
//!   FitzHugh-Nagumo oscillator networks, a nonlinear drift-diffusion
//!   decision model, and linear consensus;
//! - [`conditions`]: algebraic sufficient conditions for almost-sure
//!   exponential synchronization, constant estimators, and a designer for
//!   noise-layer strengths that certify synchronization;
//! - [`metrics`]: synchronization error, order parameter, and sample
//!   Lyapunov exponents fitted from trajectories.
//!
//! The crate is `no_std`-compatible (with `alloc`): disable default
//! features and enable `libm` instead. IO, file formats, and the command
//! line live in the companion `stosync-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("either the `std` or the `libm` feature must be enabled");

pub mod conditions;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod sde;

pub use conditions::SyncCertificate;
pub use graph::{Graph, LaplacianSpectrum};
pub use metrics::MetricsReport;
pub use sde::{BrownianPath, DiffusionSpec, NetworkSystem, Trajectory};
