// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Fit the saturating dose response to a noisy calibration run, then use
//! the fitted model to choose shot counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use jjtune::dose::{
    delta_r, fit_dose_response, invert_dose, proximity_factor, saturation_shots, BeamPlacement,
    DoseResponseModel, DoseSample, DEFAULT_HEADROOM_FRAC,
};

fn main() -> jjtune::Result<()> {
    let truth = DoseResponseModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let centred = BeamPlacement::centered();

    // Ten junctions per shot count, each with 15 % multiplicative scatter
    // and a few ohms of drift.
    let mut samples = Vec::new();
    for shots in [0u32, 1, 2, 4, 6, 8, 12, 16, 24, 32] {
        let scatter = Normal::new(1.0, 0.15 / 10f64.sqrt()).expect("valid normal");
        let shift = 12.0 + delta_r(shots, &centred, &truth) * scatter.sample(&mut rng);
        samples.push(DoseSample {
            shots,
            mean_shift_ohm: shift,
        });
    }
    let fit = fit_dose_response(&samples)?;
    println!(
        "fitted ΔR_sat = {:.1} Ω (true {:.1}), n0 = {:.2} shots (true {:.2}), offset {:.1} Ω, residual {:.2} Ω",
        fit.model.delta_r_sat,
        truth.delta_r_sat,
        fit.model.shots_scale,
        truth.shots_scale,
        fit.ageing_offset_ohm,
        fit.residual_norm
    );

    let model = fit.model;
    println!("\n{:>12} {:>6}", "shift (Ω)", "shots");
    for shift in [10.0, 50.0, 100.0, 150.0, 200.0, 230.0, 260.0] {
        match invert_dose(shift, &centred, &model)?.shots() {
            Some(n) => println!("{shift:>12.0} {n:>6}"),
            None => println!("{shift:>12.0} {:>6}", "beyond headroom"),
        }
    }
    println!(
        "saturation dose at {:.0} % headroom: {} shots",
        100.0 * DEFAULT_HEADROOM_FRAC,
        saturation_shots(&centred, &model, DEFAULT_HEADROOM_FRAC)
    );

    println!("\nbeam offset (µm)  relative effect");
    for d in [0.0, 5.0, 10.0, 20.0, 30.0, 40.0] {
        println!("{d:>16.0}  {:.4}", proximity_factor(&BeamPlacement::at(d), &model));
    }
    Ok(())
}
