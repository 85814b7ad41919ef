//! Deterministic agent-based model of multiple-sclerosis immune dynamics.
//!
//! Resting and active regulatory (Treg) and effector (Teff) T-cells, viruses
//! and cytokines move over a 51×51 patch grid split into blood, blood-brain
//! barrier and white-matter zones. Active effectors eat myelin and emit
//! cytokines; cytokines open the barrier; active regulators hunt effectors.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO. Every run is fully
//! determined by its [`SimParams`](config::SimParams) and seed. Rendering
//! helpers ([`metrics`], [`snapshot`], [`plot`]) produce in-memory text; the
//! `msabm` crate writes it to disk.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod config;
pub mod dynamics;
pub mod engine;
pub mod metrics;
pub mod plot;
pub mod population;
pub mod rng;
pub mod snapshot;
pub mod world;

pub use config::{preset, validate, ConfigError, SimParams, Violation};
pub use dynamics::{AgentState, Breed};
pub use engine::{init_run, run, RunOutput, WorldState};
pub use metrics::{collect_metrics, MetricsRecord};
pub use world::{Grid, Position, Zone, GRID_EXTENT, WM_TOTAL};
