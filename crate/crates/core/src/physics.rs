// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Transmon resistance ↔ frequency pipeline.
//!
//! A junction's room-temperature barrier resistance `R_n` fixes its critical
//! current through the Ambegaokar–Baratoff relation, the critical current
//! fixes the Josephson energy, and together with the charging energy of the
//! shunt capacitor that gives the 0→1 transition frequency:
//!
//! ```text
//! I_c = π Δ / (2 e R_n)
//! E_J = ħ I_c / (2 e)
//! E_C = e² / (2 C)
//! f01 ≃ (√(8 E_J E_C) − E_C) / h
//! ```
//!
//! All quantities are SI; frequencies are carried in hertz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementary charge (C), exact in SI since 2019.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Planck constant (J·s), exact in SI since 2019.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Default superconducting gap of thin-film aluminium, in µeV.
pub const DEFAULT_GAP_UEV: f64 = 170.0;

/// Default charging energy `E_C / h` in hertz.
pub const DEFAULT_CHARGING_HZ: f64 = 200.0e6;

/// Smallest `E_J / E_C` for which the transmon formula is trusted.
pub const TRANSMON_MIN_RATIO: f64 = 20.0;

/// Lowest barrier resistance the inverse map will return.
pub const DEFAULT_MIN_RESISTANCE_OHM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub electron_charge: f64,
    pub planck_h: f64,
    pub planck_hbar: f64,
}

impl PhysicalConstants {
    pub fn si() -> Self {
        Self {
            electron_charge: ELEMENTARY_CHARGE,
            planck_h: PLANCK,
            planck_hbar: PLANCK / (2.0 * PI),
        }
    }

    /// Resistance quantum for Cooper pairs, `h / 4e²`.
    pub fn pair_resistance_quantum(&self) -> f64 {
        self.planck_h / (4.0 * self.electron_charge * self.electron_charge)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si()
    }
}

/// Superconductor parameters of the junction electrodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Superconducting gap Δ in joules.
    pub gap_delta: f64,
}

impl MaterialParams {
    pub fn from_gap_uev(gap_uev: f64) -> Result<Self> {
        let gap_delta = gap_uev * 1e-6 * ELEMENTARY_CHARGE;
        if !(gap_delta > 0.0) || !gap_delta.is_finite() {
            return Err(Error::Domain(format!("gap must be positive, got {gap_uev} µeV")));
        }
        Ok(Self { gap_delta })
    }

    pub fn gap_uev(&self) -> f64 {
        self.gap_delta / ELEMENTARY_CHARGE * 1e6
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self {
            gap_delta: DEFAULT_GAP_UEV * 1e-6 * ELEMENTARY_CHARGE,
        }
    }
}

/// Shunt capacitance of the transmon and the energies derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitDesign {
    /// Total shunt capacitance in farads.
    pub capacitance: f64,
}

impl QubitDesign {
    pub fn from_capacitance(capacitance: f64) -> Result<Self> {
        if !(capacitance > 0.0) || !capacitance.is_finite() {
            return Err(Error::Domain(format!(
                "capacitance must be positive, got {capacitance} F"
            )));
        }
        Ok(Self { capacitance })
    }

    /// Builds the design whose charging energy equals `h · ec_hz`.
    pub fn from_charging_hz(ec_hz: f64, k: &PhysicalConstants) -> Result<Self> {
        if !(ec_hz > 0.0) || !ec_hz.is_finite() {
            return Err(Error::Domain(format!(
                "charging energy must be positive, got {ec_hz} Hz"
            )));
        }
        let e_c = ec_hz * k.planck_h;
        Self::from_capacitance(k.electron_charge * k.electron_charge / (2.0 * e_c))
    }

    /// `E_C = e² / 2C` in joules.
    pub fn charging_energy(&self, k: &PhysicalConstants) -> f64 {
        k.electron_charge * k.electron_charge / (2.0 * self.capacitance)
    }

    pub fn charging_hz(&self, k: &PhysicalConstants) -> f64 {
        self.charging_energy(k) / k.planck_h
    }

    /// Transmon anharmonicity `α = −E_C / h` in hertz.
    pub fn anharmonicity(&self, k: &PhysicalConstants) -> f64 {
        -self.charging_hz(k)
    }
}

impl Default for QubitDesign {
    fn default() -> Self {
        Self::from_charging_hz(DEFAULT_CHARGING_HZ, &PhysicalConstants::si())
            .expect("default charging energy is positive")
    }
}

/// Whether [`qubit_frequency_with`] enforces the transmon regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeGuard {
    Enforce { min_ratio: f64 },
    Override,
}

impl Default for RegimeGuard {
    fn default() -> Self {
        RegimeGuard::Enforce {
            min_ratio: TRANSMON_MIN_RATIO,
        }
    }
}

/// Ambegaokar–Baratoff critical current `π Δ / (2 e R_n)` in amperes.
pub fn critical_current(r_n: f64, m: &MaterialParams, k: &PhysicalConstants) -> Result<f64> {
    if !(r_n > 0.0) || r_n.is_nan() {
        return Err(Error::Domain(format!("resistance must be positive, got {r_n} Ω")));
    }
    if !(m.gap_delta > 0.0) {
        return Err(Error::Domain("superconducting gap must be positive".into()));
    }
    Ok(PI * m.gap_delta / (2.0 * k.electron_charge * r_n))
}

/// Josephson energy `ħ I_c / 2e` in joules.
pub fn josephson_energy(i_c: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(i_c >= 0.0) {
        return Err(Error::Domain(format!("critical current must be ≥ 0, got {i_c} A")));
    }
    Ok(k.planck_hbar * i_c / (2.0 * k.electron_charge))
}

/// Josephson energy straight from resistance, `(Δ/2)(h/4e²)/R_n`.
///
/// Algebraically identical to `josephson_energy(critical_current(r_n))`.
pub fn josephson_energy_from_resistance(
    r_n: f64,
    m: &MaterialParams,
    k: &PhysicalConstants,
) -> Result<f64> {
    if !(r_n > 0.0) || r_n.is_nan() {
        return Err(Error::Domain(format!("resistance must be positive, got {r_n} Ω")));
    }
    Ok(0.5 * m.gap_delta * k.pair_resistance_quantum() / r_n)
}

/// Transmon 0→1 frequency in hertz, guarded to `E_J/E_C ≥ 20`.
pub fn qubit_frequency(e_j: f64, e_c: f64, k: &PhysicalConstants) -> Result<f64> {
    qubit_frequency_with(e_j, e_c, k, RegimeGuard::default())
}

pub fn qubit_frequency_with(
    e_j: f64,
    e_c: f64,
    k: &PhysicalConstants,
    guard: RegimeGuard,
) -> Result<f64> {
    if !(e_c > 0.0) {
        return Err(Error::Domain(format!("charging energy must be positive, got {e_c} J")));
    }
    if !(e_j >= 0.0) {
        return Err(Error::Domain(format!("Josephson energy must be ≥ 0, got {e_j} J")));
    }
    if let RegimeGuard::Enforce { min_ratio } = guard {
        let ratio = e_j / e_c;
        if ratio < min_ratio {
            return Err(Error::Regime { ratio, min: min_ratio });
        }
    }
    Ok(((8.0 * e_j * e_c).sqrt() - e_c) / k.planck_h)
}

/// Qubit frequency for a junction of barrier resistance `r_n`.
pub fn frequency_from_resistance(
    r_n: f64,
    m: &MaterialParams,
    d: &QubitDesign,
    k: &PhysicalConstants,
) -> Result<f64> {
    let i_c = critical_current(r_n, m, k)?;
    let e_j = josephson_energy(i_c, k)?;
    qubit_frequency(e_j, d.charging_energy(k), k)
}

/// Barrier resistance that places the qubit at `f_target`.
///
/// Closed-form inverse of [`frequency_from_resistance`]. Fails when the
/// target needs a barrier below [`DEFAULT_MIN_RESISTANCE_OHM`] or falls
/// outside the transmon regime.
pub fn resistance_for_frequency(
    f_target: f64,
    m: &MaterialParams,
    d: &QubitDesign,
    k: &PhysicalConstants,
) -> Result<f64> {
    invert_frequency(f_target, m, d, k, DEFAULT_MIN_RESISTANCE_OHM, TRANSMON_MIN_RATIO)
}

fn invert_frequency(
    f_target: f64,
    m: &MaterialParams,
    d: &QubitDesign,
    k: &PhysicalConstants,
    min_resistance: f64,
    min_ratio: f64,
) -> Result<f64> {
    if !(f_target > 0.0) || !f_target.is_finite() {
        return Err(Error::Domain(format!("target frequency must be positive, got {f_target} Hz")));
    }
    let e_c = d.charging_energy(k);
    let hf = k.planck_h * f_target + e_c;
    let e_j = hf * hf / (8.0 * e_c);
    if e_j / e_c < min_ratio {
        return Err(Error::Regime {
            ratio: e_j / e_c,
            min: min_ratio,
        });
    }
    let r_n = 0.5 * m.gap_delta * k.pair_resistance_quantum() / e_j;
    if r_n < min_resistance {
        return Err(Error::Domain(format!(
            "{:.6} GHz needs R_n = {r_n:.1} Ω, below the {min_resistance} Ω floor",
            f_target * 1e-9
        )));
    }
    Ok(r_n)
}

/// Complete resistance-to-frequency model: constants, gap, capacitance and
/// the validity limits applied to the inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TransmonConfig", into = "TransmonConfig")]
pub struct TransmonModel {
    pub constants: PhysicalConstants,
    pub material: MaterialParams,
    pub design: QubitDesign,
    pub min_ratio: f64,
    pub min_resistance_ohm: f64,
}

#[derive(Serialize, Deserialize)]
struct TransmonConfig {
    gap_delta_uev: f64,
    charging_energy_hz: f64,
    #[serde(default = "default_min_ratio")]
    min_ej_over_ec: f64,
    #[serde(default = "default_min_resistance")]
    min_resistance_ohm: f64,
}

fn default_min_ratio() -> f64 {
    TRANSMON_MIN_RATIO
}

fn default_min_resistance() -> f64 {
    DEFAULT_MIN_RESISTANCE_OHM
}

impl From<TransmonConfig> for TransmonModel {
    fn from(c: TransmonConfig) -> Self {
        let constants = PhysicalConstants::si();
        let e_c = c.charging_energy_hz * constants.planck_h;
        TransmonModel {
            constants,
            material: MaterialParams {
                gap_delta: c.gap_delta_uev * 1e-6 * constants.electron_charge,
            },
            design: QubitDesign {
                capacitance: constants.electron_charge * constants.electron_charge / (2.0 * e_c),
            },
            min_ratio: c.min_ej_over_ec,
            min_resistance_ohm: c.min_resistance_ohm,
        }
    }
}

impl From<TransmonModel> for TransmonConfig {
    fn from(t: TransmonModel) -> Self {
        TransmonConfig {
            gap_delta_uev: t.material.gap_uev(),
            charging_energy_hz: t.design.charging_hz(&t.constants),
            min_ej_over_ec: t.min_ratio,
            min_resistance_ohm: t.min_resistance_ohm,
        }
    }
}

impl Default for TransmonModel {
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::si(),
            material: MaterialParams::default(),
            design: QubitDesign::default(),
            min_ratio: TRANSMON_MIN_RATIO,
            min_resistance_ohm: DEFAULT_MIN_RESISTANCE_OHM,
        }
    }
}

impl TransmonModel {
    pub fn new(gap_uev: f64, charging_hz: f64) -> Result<Self> {
        let constants = PhysicalConstants::si();
        Ok(Self {
            constants,
            material: MaterialParams::from_gap_uev(gap_uev)?,
            design: QubitDesign::from_charging_hz(charging_hz, &constants)?,
            ..Self::default()
        })
    }

    pub fn charging_hz(&self) -> f64 {
        self.design.charging_hz(&self.constants)
    }

    pub fn anharmonicity_hz(&self) -> f64 {
        self.design.anharmonicity(&self.constants)
    }

    pub fn frequency(&self, r_n: f64) -> Result<f64> {
        let i_c = critical_current(r_n, &self.material, &self.constants)?;
        let e_j = josephson_energy(i_c, &self.constants)?;
        qubit_frequency_with(
            e_j,
            self.design.charging_energy(&self.constants),
            &self.constants,
            RegimeGuard::Enforce {
                min_ratio: self.min_ratio,
            },
        )
    }

    pub fn resistance(&self, f_target: f64) -> Result<f64> {
        invert_frequency(
            f_target,
            &self.material,
            &self.design,
            &self.constants,
            self.min_resistance_ohm,
            self.min_ratio,
        )
    }

    /// Analytic `df01/dR_n` in Hz/Ω.
    pub fn frequency_slope(&self, r_n: f64) -> Result<f64> {
        if !(r_n > 0.0) {
            return Err(Error::Domain(format!("resistance must be positive, got {r_n} Ω")));
        }
        let k = &self.constants;
        let e_c = self.design.charging_energy(k);
        // E_J = K / R_n
        let big_k = 0.5 * self.material.gap_delta * k.pair_resistance_quantum();
        Ok(-0.5 * (8.0 * big_k * e_c).sqrt() * r_n.powf(-1.5) / k.planck_h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn defaults() -> (MaterialParams, QubitDesign, PhysicalConstants) {
        let k = PhysicalConstants::si();
        (MaterialParams::default(), QubitDesign::default(), k)
    }

    #[test]
    fn hbar_matches_h_over_two_pi() {
        let k = PhysicalConstants::si();
        assert_relative_eq!(k.planck_hbar, k.planck_h / (2.0 * PI), max_relative = 1e-12);
        assert!(k.electron_charge > 0.0 && k.planck_h > 0.0);
    }

    #[test]
    fn critical_current_at_five_kilohm() {
        let (m, _, k) = defaults();
        // πΔ/(2eR) with Δ/e = 170 µV: π · 170e-6 / 10_000
        let oracle = PI * 170e-6 / (2.0 * 5000.0);
        let i_c = critical_current(5000.0, &m, &k).unwrap();
        assert_relative_eq!(i_c, oracle, max_relative = 1e-12);
        assert!((i_c * 1e9 - 53.4).abs() < 0.05);
        let halved = critical_current(10_000.0, &m, &k).unwrap();
        assert_relative_eq!(halved, i_c / 2.0, max_relative = 1e-15);
        assert!(critical_current(1e30, &m, &k).unwrap() < 1e-30);
    }

    #[test]
    fn critical_current_rejects_non_positive_resistance() {
        let (m, _, k) = defaults();
        assert!(matches!(critical_current(0.0, &m, &k), Err(Error::Domain(_))));
        assert!(matches!(critical_current(-5.0, &m, &k), Err(Error::Domain(_))));
    }

    #[test]
    fn josephson_energy_cases() {
        let k = PhysicalConstants::si();
        assert_eq!(josephson_energy(0.0, &k).unwrap(), 0.0);
        let e_j = josephson_energy(53.4e-9, &k).unwrap();
        assert!((e_j / k.planck_h * 1e-9 - 26.5).abs() < 0.05);
        let tripled = josephson_energy(3.0 * 53.4e-9, &k).unwrap();
        assert_relative_eq!(tripled, 3.0 * e_j, max_relative = 1e-15);
        assert!(josephson_energy(-1e-9, &k).is_err());
    }

    #[test]
    fn qubit_frequency_cases() {
        let k = PhysicalConstants::si();
        let e_j = 26.5e9 * k.planck_h;
        let e_c = 0.2e9 * k.planck_h;
        let f = qubit_frequency(e_j, e_c, &k).unwrap();
        let oracle = ((8.0f64 * 26.5 * 0.2).sqrt() - 0.2) * 1e9;
        assert_relative_eq!(f, oracle, max_relative = 1e-12);
        assert!((f * 1e-9 - 6.31).abs() < 0.01);

        assert!(matches!(qubit_frequency(0.0, e_c, &k), Err(Error::Regime { .. })));
        let zero = qubit_frequency_with(0.0, e_c, &k, RegimeGuard::Override).unwrap();
        assert_relative_eq!(zero, -0.2e9, max_relative = 1e-12);

        let f4 = qubit_frequency(4.0 * e_j, e_c, &k).unwrap();
        assert_relative_eq!(f4 + 0.2e9, 2.0 * (f + 0.2e9), max_relative = 1e-12);
    }

    #[test]
    fn frequency_from_resistance_composes() {
        let (m, d, k) = defaults();
        let f = frequency_from_resistance(5000.0, &m, &d, &k).unwrap();
        assert!((f * 1e-9 - 6.31).abs() < 0.01, "f = {f}");

        let f_up = frequency_from_resistance(5150.0, &m, &d, &k).unwrap();
        let ec = d.charging_hz(&k);
        let drop = 1.0 - (f_up + ec) / (f + ec);
        assert_relative_eq!(drop, 1.0 - 1.03f64.powf(-0.5), max_relative = 1e-9);
        assert!((drop - 0.015).abs() < 0.001);
        assert!(f_up < f);
    }

    #[test]
    fn inverse_round_trip_and_one_percent_detune() {
        let (m, d, k) = defaults();
        let f0 = frequency_from_resistance(5000.0, &m, &d, &k).unwrap();
        let r = resistance_for_frequency(f0, &m, &d, &k).unwrap();
        assert_relative_eq!(r, 5000.0, max_relative = 1e-9);

        // Bisection on the forward map as an independent inverse.
        let target = 0.99 * f0;
        let (mut lo, mut hi) = (5000.0, 6000.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if frequency_from_resistance(mid, &m, &d, &k).unwrap() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r1 = resistance_for_frequency(target, &m, &d, &k).unwrap();
        assert_relative_eq!(r1, 0.5 * (lo + hi), max_relative = 1e-9);
        assert!((r1 / 5000.0 - 1.02).abs() < 0.002);
    }

    #[test]
    fn inverse_rejects_unreachable_targets() {
        let (m, d, k) = defaults();
        assert!(resistance_for_frequency(1e15, &m, &d, &k).is_err());
        assert!(resistance_for_frequency(-1.0, &m, &d, &k).is_err());
        // below the transmon regime
        assert!(matches!(
            resistance_for_frequency(1e9, &m, &d, &k),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn model_serializes_in_engineering_units() {
        let t = TransmonModel::default();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("gap_delta_uev"));
        let back: TransmonModel = serde_json::from_str(&json).unwrap();
        assert_relative_eq!(back.material.gap_delta, t.material.gap_delta, max_relative = 1e-12);
        assert_relative_eq!(back.charging_hz(), 200e6, max_relative = 1e-12);
        assert_relative_eq!(t.anharmonicity_hz(), -200e6, max_relative = 1e-12);
    }
}
