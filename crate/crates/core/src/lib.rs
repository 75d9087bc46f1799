//! Scheduling engine for a multi-community integrated energy system (MCIES).
//!
//! The engine models an operator that owns the conversion and storage
//! equipment of several community integrated energy systems (CIES) and sells
//! electricity and heat to building users. Day-ahead operation is a bi-level
//! problem: the operator announces 24-hour electricity and heat prices, the
//! users adjust shiftable / interruptible / cuttable load to minimise their
//! own bill plus discomfort, and the operator dispatches devices against the
//! adjusted loads under renewable uncertainty.
//!
//! Module map:
//! - [`scenario`]: renewable sample handling, clustering, joint scenario sets
//! - [`building`]: thermal comfort, baseline loads, demand-response envelopes
//! - [`devices`]: boiler, CHP, micro turbine, storage, heat pipe models
//! - [`market`]: tariffs, price schedules, revenue / cost / balance ledgers
//! - [`game`]: bi-level game wrapper and equilibrium diagnostics
//! - [`solver`]: follower QP, scenario dispatch, chaotic differential
//!   evolution, and the top-level price search
//! - [`system`]: the full system description plus the bundled example
//!
//! All hourly data uses fixed 24-slot arrays ([`Hourly`]); hour 1 maps to
//! index 0. Every randomised routine takes an explicit seed and produces
//! bit-identical results for a fixed seed.

pub mod building;
pub mod devices;
pub mod error;
pub mod game;
pub mod market;
pub mod scenario;
pub mod series;
pub mod solver;
pub mod system;

pub use error::{CoreError, Result};
pub use series::{Hourly, HOURS};
