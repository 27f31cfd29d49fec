// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! One fixed-dose round on the junctions below their group median: tuned
//! junctions pull away from the untuned ones by the planned shift, while
//! neighbours a few hundred microns away see nothing of the beam.

use jjtune::collision::CollisionParams;
use jjtune::dose::{delta_r, proximity_factor, BeamPlacement, DoseResponseModel};
use jjtune::planner::{CampaignConfig, Strategy};
use jjtune::sim::{run_campaign_from_spec, WaferSpec};

fn main() -> jjtune::Result<()> {
    // Eight shots at n0 = 4 deliver exactly 200 Ω.
    let model = DoseResponseModel {
        delta_r_sat: 200.0 / (1.0 - (-2.0f64).exp()),
        ..DoseResponseModel::default()
    };
    let planned = delta_r(8, &BeamPlacement::centered(), &model);
    let cfg = CampaignConfig {
        max_rounds: 1,
        strategy: Strategy::EnsembleBelowMedian,
        ensemble_shots: 8,
        ..CampaignConfig::default()
    };

    for (label, m) in [("noiseless", model.noiseless()), ("15 % noise", model)] {
        let report = run_campaign_from_spec(&WaferSpec::default(), &cfg, &m, &CollisionParams::default())?;
        let s = report.tuned_vs_untuned_shift;
        println!(
            "{label:>10}: tuned {:.1} Ω (n = {}), untuned {:.1} Ω (n = {}), gap {:.2} Ω for a planned {planned:.1} Ω",
            s.tuned_mean_ohm.unwrap_or(f64::NAN),
            s.tuned_count,
            s.untuned_mean_ohm.unwrap_or(f64::NAN),
            s.untuned_count,
            s.separation_ohm().unwrap_or(f64::NAN)
        );
    }

    let spec = WaferSpec::default();
    let pitch = 2.0 * spec.ring_radius_um * (std::f64::consts::PI / spec.layout.qubit_count as f64).sin();
    println!(
        "\nnearest neighbour on the ring is {pitch:.0} µm away; the beam reaches it with weight {:.1e}",
        proximity_factor(&BeamPlacement::at(pitch), &model)
    );
    Ok(())
}
