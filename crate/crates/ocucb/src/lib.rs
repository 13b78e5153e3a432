//! Finite-armed stochastic bandit simulation built around the anytime
//! optimally-confident UCB index family, together with the regret envelopes
//! and concentration estimates that justify it.
//!
//! The crate is organised bottom-up:
//!
//! * [`env`]: bandit instances, 1-subgaussian noise models, seeded streams.
//! * [`policies`]: index policies (OCUCB-n, KL-UCB+, UCB1, MOSS) and the
//!   incremental denominator accumulator that keeps OCUCB-n cheap per round.
//! * [`difficulty`]: gap profiles, effective arm counts, and the upper /
//!   lower regret envelopes evaluated for concrete instances.
//! * [`sim`]: episode and experiment runners with deterministic,
//!   thread-count-independent output.
//! * [`conc`]: Monte Carlo checks of the concentration facts the index
//!   construction relies on (maximal inequality, iterated-logarithm survival,
//!   boundary crossing times, discounted crossing counts).
//! * [`config`] / [`report`] / [`plot`] / [`runner`]: the TOML experiment
//!   format, CSV + manifest emission, SVG rendering, and the operations the
//!   command line binary dispatches to.

// Validation deliberately writes `!(x > bound)` so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conc;
pub mod config;
pub mod difficulty;
pub mod env;
pub mod error;
pub mod plot;
pub mod policies;
pub mod report;
pub mod runner;
pub mod sim;

pub use error::Error;
