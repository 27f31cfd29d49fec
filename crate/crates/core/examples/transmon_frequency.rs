// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Junction resistance to qubit frequency, and back.
//!
//! ```text
//! cargo run --example transmon_frequency
//! ```

use jjtune::physics::TransmonModel;

fn main() -> jjtune::Result<()> {
    let m = TransmonModel::default();
    println!(
        "gap {:.0} µeV, E_C/h {:.0} MHz, anharmonicity {:.0} MHz",
        m.material.gap_uev(),
        m.charging_hz() / 1e6,
        m.anharmonicity_hz() / 1e6
    );

    println!("\n{:>10} {:>12} {:>14}", "R_n (Ω)", "f01 (GHz)", "df/dR (MHz/Ω)");
    for r in [6000.0, 7000.0, 8000.0, 9000.0, 10_000.0, 12_000.0] {
        println!(
            "{r:>10.0} {:>12.4} {:>14.4}",
            m.frequency(r)? / 1e9,
            m.frequency_slope(r)? / 1e6
        );
    }

    // Resistance needed for each design frequency.
    println!();
    for f in [4.695e9, 4.85e9, 5.005e9] {
        println!("{:.3} GHz needs R_n = {:.1} Ω", f / 1e9, m.resistance(f)?);
    }

    // A 2 % rise in resistance moves the qubit down by about 1 %.
    let r = m.resistance(4.85e9)?;
    let f2 = m.frequency(1.02 * r)?;
    println!("\n+2 % R_n: {:.1} MHz shift ({:.2} %)", (f2 - 4.85e9) / 1e6, 100.0 * (f2 / 4.85e9 - 1.0));
    Ok(())
}
