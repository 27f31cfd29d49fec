// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! The three planning strategies on the same wafer, one round each.

use jjtune::collision::{wafer_collision_map, CollisionParams};
use jjtune::dose::DoseResponseModel;
use jjtune::planner::{advance_predicted, plan_round, CampaignConfig, Strategy};
use jjtune::sim::{generate_wafer, WaferSpec};
use jjtune::wafer::pooled_spread_stats;

fn main() -> jjtune::Result<()> {
    let spec = WaferSpec::default();
    let wafer = generate_wafer(&spec)?;
    let model = DoseResponseModel::default();
    let params = CollisionParams::default();
    let (layout, physics) = (&spec.layout, &spec.physics);

    let before = pooled_spread_stats(&wafer.junctions, 0.8, 1.2)?;
    let collisions = wafer_collision_map(&wafer, layout, &params, physics)?.total_excluding_s1();
    println!("as fabricated: sigma {:.2} %, {collisions} collisions", before.sigma_percent);

    println!("\n{:<16} {:>8} {:>7} {:>9} {:>10} {:>10}", "strategy", "planned", "shots", "partial", "sigma %", "collisions");
    for strategy in [Strategy::EnsembleBelowMedian, Strategy::TargetedInverse, Strategy::CollisionAware] {
        let cfg = CampaignConfig {
            strategy,
            ..CampaignConfig::default()
        };
        let plan = plan_round(&wafer, 1, &cfg, &model, layout, &params, physics)?;
        // Noiseless preview of the wafer after this round.
        let predicted = advance_predicted(&wafer, &plan, &model);
        let after = pooled_spread_stats(&predicted.junctions, 0.8, 1.2)?;
        let collisions = wafer_collision_map(&predicted, layout, &params, physics)?.total_excluding_s1();
        println!(
            "{:<16} {:>8} {:>7} {:>9} {:>10.2} {:>10}",
            strategy.to_string(),
            plan.entries.len(),
            plan.total_shots(),
            plan.partially_tunable.len(),
            after.sigma_percent,
            collisions
        );
    }
    Ok(())
}
