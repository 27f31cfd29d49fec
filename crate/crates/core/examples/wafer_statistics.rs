// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Generate a wafer, write it as CSV, read it back and summarize it.
//!
//! ```text
//! cargo run --example wafer_statistics -- [out.csv]
//! ```

use std::path::PathBuf;

use jjtune::sim::{generate_wafer, WaferSpec};
use jjtune::wafer::{group_by_design, pooled_spread_stats, spread_stats, Wafer};

fn main() -> jjtune::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("jjtune-wafer.csv"));

    let spec = WaferSpec {
        group_rel_sigma_percent: [(1, 2.76), (2, 3.59), (3, 2.99)].into_iter().collect(),
        out_of_spec_fraction: 0.02,
        ..WaferSpec::default()
    };
    generate_wafer(&spec)?.save(&out)?;
    let wafer = Wafer::load(&out)?;
    println!("{} junctions on {} dies, written to {}", wafer.junctions.len(), wafer.dies().len(), out.display());

    println!("\n{:>5} {:>6} {:>10} {:>9} {:>8}", "group", "count", "median Ω", "sigma %", "yield %");
    for (g, members) in group_by_design(&wafer) {
        let s = spread_stats(&members)?;
        println!(
            "{g:>5} {:>6} {:>10.1} {:>9.2} {:>8.1}",
            s.count_total, s.median, s.sigma_percent, s.yield_percent
        );
    }
    let all = pooled_spread_stats(&wafer.junctions, 0.8, 1.2)?;
    println!(
        "pooled: sigma {:.2} % over {} in-window junctions, yield {:.1} %",
        all.sigma_percent, all.count_in_window, all.yield_percent
    );
    Ok(())
}
