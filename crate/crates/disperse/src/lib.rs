//! Birth-death chains in random environments.
//!
//! A population is split into independent colonies; each colony runs a
//! linear birth-death chain at its own randomly drawn rate until its own
//! randomly drawn collapse time, when every survivor disperses and founds a
//! new colony under a fresh environment. This crate simulates that process,
//! the null model where the environment instead switches globally for one
//! undispersed population, and the classical fixed-rate chain — and
//! evaluates the analytic survival criteria that separate them:
//! `E[exp((Λ-1)τ)] > 1` for the dispersing population versus `E(Λ) > 1`
//! for the global and fixed ones.
//!
//! Modules:
//! - [`env`] — laws of the random environment (Λ, τ) and their couplings
//! - [`birth_death`] — exact transient law of the linear chain plus an
//!   event-driven Gillespie oracle
//! - [`process`] — trial runners for the three models and trajectory mode
//! - [`criteria`] — survival criteria, critical clock rate, Jensen bound,
//!   extinction probabilities
//! - [`montecarlo`] — seeded trial harness, Wilson intervals, sweeps
//! - [`cli`] — command-line surface and CSV/JSON serialization

pub mod birth_death;
pub mod cli;
pub mod criteria;
pub mod env;
pub mod error;
pub mod montecarlo;
pub mod process;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
