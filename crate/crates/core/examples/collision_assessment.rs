// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Collision budget of the default 8-qubit ring: the ideal die, how much
//! frequency error it tolerates, and a fabricated wafer.

use jjtune::collision::{
    wafer_collision_map, zero_spread_assessment, zero_spread_margin, CollisionParams, CollisionType,
    QpuLayout,
};
use jjtune::sim::{generate_wafer, WaferSpec};

fn main() -> jjtune::Result<()> {
    let layout = QpuLayout::default();
    let params = CollisionParams::default();
    for (g, f) in &layout.target_frequency_hz {
        println!("group {g}: {:.3} GHz", f / 1e9);
    }

    let ideal = zero_spread_assessment(&layout, &params);
    println!("\non-target die:");
    for (t, n) in &ideal.per_type_counts {
        println!("  {t}: {n}");
    }
    if let Some(m) = zero_spread_margin(&layout, &params, 200e6) {
        println!("every non-S1 threshold can widen by {:.1} MHz before a hit", m / 1e6);
    }

    for sigma in [3.11, 1.5, 0.5] {
        let spec = WaferSpec {
            rel_sigma_percent: sigma,
            out_of_spec_fraction: 0.0,
            ..WaferSpec::default()
        };
        let wafer = generate_wafer(&spec)?;
        let map = wafer_collision_map(&wafer, &layout, &params, &spec.physics)?;
        let free = map.histogram.get(&0).copied().unwrap_or(0);
        let a1: usize = map.dies.iter().map(|d| d.report.count(CollisionType::A1)).sum();
        println!(
            "\nsigma {sigma:.2} %: {free}/{} dies collision-free, {} collisions (S1 excluded), {a1} of them A1",
            map.dies.len(),
            map.total_excluding_s1()
        );
        let hist: Vec<String> = map.histogram.iter().map(|(k, n)| format!("{k}:{n}")).collect();
        println!("  dies per collision count  {}", hist.join("  "));
    }
    Ok(())
}
