// SPDX-License-Identifier: Apache-2.0

//! Terrain-avoiding soft-landing guidance for a point-mass lander.
//!
//! The crate provides three guidance laws over a common simulation core:
//!
//! * `Ogl`: zero-effort-miss / zero-effort-velocity optimal feedback,
//! * `Otalg`: the same plus a barrier-driven divert acceleration,
//! * `MssOtalg`: terrain avoidance robustified with two sliding surfaces.
//!
//! Modules:
//!
//! * [`terrain_barriers`]: stepped terrain and polynomial barrier functions,
//! * [`lander_dynamics`]: 3-DOF dynamics, actuator lag, noise, disturbance,
//! * [`guidance_laws`]: ZEM/ZEV, divert rate, sliding surfaces, commands,
//! * [`analysis`]: divert-event detection, Lyapunov series, PFTS checks,
//! * [`sim_harness`]: closed-loop runs, Monte Carlo campaigns, statistics,
//! * [`cli_io`]: TOML configuration, CSV output and run manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli_io;
pub mod error;
pub mod guidance_laws;
pub mod lander_dynamics;
pub mod sim_harness;
pub mod terrain_barriers;

/// Three-component vector used for positions, velocities and accelerations.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{Error, Result};
pub use guidance_laws::{GuidanceConfig, GuidanceOutput, Law};
pub use lander_dynamics::{Environment, LanderState, Perturbation};
pub use sim_harness::{run_campaign, run_monte_carlo, run_simulation, run_summary, McConfig, Scenario, TrajectoryLog};
pub use terrain_barriers::{build_barriers, BarrierSet, StepTerrain, VerticalRule};
