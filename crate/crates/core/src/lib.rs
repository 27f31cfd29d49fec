// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Josephson-junction frequency tuning for fixed-frequency transmon wafers.
//!
//! The crate turns room-temperature junction resistances into qubit
//! frequencies, finds frequency collisions on QPU coupling graphs, plans
//! electron-beam annealing doses under a saturating dose-response model and
//! simulates multi-round tuning campaigns on synthetic wafers.
//!
//! | module        | contents                                              |
//! |---------------|-------------------------------------------------------|
//! | [`physics`]   | resistance ↔ frequency for the transmon               |
//! | [`wafer`]     | wafer data model, CSV/JSON I/O, yield and spread      |
//! | [`dose`]      | dose response, proximity kernel, ageing, fitting      |
//! | [`collision`] | coupling graph, collision predicates, wafer maps      |
//! | [`planner`]   | ensemble, targeted and collision-aware shot plans     |
//! | [`sim`]       | synthetic wafers, virtual anneal, campaigns           |
//! | [`report`]    | CSV/JSON/SVG report directory                         |
//!
//! Runnable walkthroughs for each capability live under `examples/`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod dose;
pub mod error;
pub mod physics;
pub mod planner;
pub mod report;
pub mod sim;
pub mod stats;
pub mod wafer;

pub use collision::{
    detect_collisions, wafer_collision_map, zero_spread_assessment, CollisionHit, CollisionParams,
    CollisionReport, CollisionType, QpuLayout,
};
pub use dose::{delta_r, invert_dose, proximity_factor, BeamPlacement, DoseResponseModel};
pub use error::{Error, Result};
pub use physics::TransmonModel;
pub use planner::{CampaignConfig, Strategy, TunePlan};
pub use sim::{apply_plan, generate_wafer, run_campaign, CampaignReport, WaferSpec};
pub use wafer::{Junction, JunctionStatus, SpreadStats, Wafer};
