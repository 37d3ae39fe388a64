//! Mean-field counter-diabatic driving for the infinite-range Ising model.
//!
//! The `N`-spin model restricted to maximal total spin is a single spin
//! `S = N/2` with Hamiltonian `-(J/S)(Sᶻ)² - 2ΓSˣ - 2hSᶻ + 2θ̇Sʸ`, where
//! `θ̇` is the counter-diabatic field obtained from the self-consistent
//! mean-field magnetization.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod meanfield;
pub mod propagate;
pub mod quartic;
pub mod schedule;
pub mod spin;
pub mod two_level;
pub mod variational;

pub use dynamics::{Assist, EvolveOptions, StateVector, TrajectoryPoint, TrajectoryRecord};
pub use error::{Error, Result};
pub use meanfield::{MeanFieldPoint, ModelParams};
pub use propagate::Integrator;
pub use schedule::{Schedule, ScheduleKind};
pub use spin::{SpinOperatorSet, SpinSize};
