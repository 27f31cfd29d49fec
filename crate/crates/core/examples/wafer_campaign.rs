// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Three rounds of targeted tuning on a 552-junction wafer, with the full
//! report directory.
//!
//! ```text
//! cargo run --release --example wafer_campaign -- [reports/] [targeted|ensemble|collision-aware]
//! ```

use std::path::PathBuf;

use jjtune::collision::CollisionParams;
use jjtune::dose::DoseResponseModel;
use jjtune::planner::{CampaignConfig, Strategy};
use jjtune::report::emit_reports;
use jjtune::sim::{run_campaign_from_spec, WaferSpec};

fn main() -> jjtune::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("jjtune-reports"));
    let strategy: Strategy = args.next().as_deref().unwrap_or("targeted").parse()?;

    let spec = WaferSpec {
        group_rel_sigma_percent: [(1, 2.76), (2, 3.59), (3, 2.99)].into_iter().collect(),
        ..WaferSpec::default()
    };
    let cfg = CampaignConfig {
        strategy,
        ..CampaignConfig::default()
    };
    let report = run_campaign_from_spec(&spec, &cfg, &DoseResponseModel::default(), &CollisionParams::default())?;

    println!("{:>5} {:>9} {:>24} {:>8} {:>11} {:>8}", "round", "sigma %", "by group %", "yield %", "collisions", "shots");
    for r in &report.per_round {
        let groups: Vec<String> = r.sigma_percent_by_group.values().map(|s| format!("{s:.2}")).collect();
        let collisions: usize = r.collision_map.iter().map(|d| d.collisions).sum();
        println!(
            "{:>5} {:>9.2} {:>24} {:>8.2} {:>11} {:>8}",
            r.round,
            r.sigma_percent_overall,
            groups.join(" / "),
            r.yield_percent,
            collisions,
            r.total_shots
        );
    }
    let shift = report.tuned_vs_untuned_shift;
    println!(
        "\n{} tuned junctions shifted {:.1} Ω on average, {} untuned {:.1} Ω; yield change {:+.2} points",
        shift.tuned_count,
        shift.tuned_mean_ohm.unwrap_or(0.0),
        shift.untuned_count,
        shift.untuned_mean_ohm.unwrap_or(0.0),
        report.yield_delta_percent
    );

    let files = emit_reports(&report, &out)?;
    println!("{} report files in {}", files.len(), out.display());
    Ok(())
}
