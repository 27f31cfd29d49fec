// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Electron-beam dose response of a junction.
//!
//! An exposure of `n` shots at distance `D` from the junction raises its
//! barrier resistance by
//!
//! ```text
//! ΔR(n, D) = g(D) · ΔR_sat · (1 − exp(−n / n₀)),   g(D) = exp(−D² / 2s²)
//! ```
//!
//! and every junction on the wafer, exposed or not, drifts upward by a
//! fixed ambient ageing step per round.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA_R_SAT_OHM: f64 = 250.0;
pub const DEFAULT_SHOTS_SCALE: f64 = 4.0;
pub const DEFAULT_PROXIMITY_SIGMA_UM: f64 = 13.0;
pub const DEFAULT_AGEING_PER_ROUND_OHM: f64 = 15.0;
pub const DEFAULT_NOISE_REL_STD: f64 = 0.15;
pub const DEFAULT_EXPOSURE_AREA_UM: f64 = 15.0;

/// Fraction of the reachable shift the inverse is allowed to request.
pub const DEFAULT_HEADROOM_FRAC: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseResponseModel {
    #[serde(rename = "delta_r_sat_ohm")]
    pub delta_r_sat: f64,
    pub shots_scale: f64,
    #[serde(rename = "proximity_sigma_um")]
    pub proximity_sigma: f64,
    #[serde(rename = "ageing_per_round_ohm")]
    pub ageing_per_round: f64,
    pub noise_rel_std: f64,
}

impl Default for DoseResponseModel {
    fn default() -> Self {
        Self {
            delta_r_sat: DEFAULT_DELTA_R_SAT_OHM,
            shots_scale: DEFAULT_SHOTS_SCALE,
            proximity_sigma: DEFAULT_PROXIMITY_SIGMA_UM,
            ageing_per_round: DEFAULT_AGEING_PER_ROUND_OHM,
            noise_rel_std: DEFAULT_NOISE_REL_STD,
        }
    }
}

impl DoseResponseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.delta_r_sat >= 0.0
            && self.shots_scale > 0.0
            && self.proximity_sigma > 0.0
            && self.ageing_per_round >= 0.0
            && self.noise_rel_std >= 0.0
            && [
                self.delta_r_sat,
                self.shots_scale,
                self.proximity_sigma,
                self.ageing_per_round,
                self.noise_rel_std,
            ]
            .iter()
            .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid dose-response model {self:?}")))
        }
    }

    pub fn noiseless(self) -> Self {
        Self {
            noise_rel_std: 0.0,
            ..self
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }
}

/// Where the exposure square sits relative to the junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPlacement {
    /// Signed offset D of the square's centre from the junction.
    pub distance_um: f64,
    /// Side of the square exposure area.
    #[serde(default = "default_area")]
    pub area_um: f64,
}

fn default_area() -> f64 {
    DEFAULT_EXPOSURE_AREA_UM
}

impl BeamPlacement {
    pub fn centered() -> Self {
        Self {
            distance_um: 0.0,
            area_um: DEFAULT_EXPOSURE_AREA_UM,
        }
    }

    pub fn at(distance_um: f64) -> Self {
        Self {
            distance_um,
            ..Self::centered()
        }
    }
}

impl Default for BeamPlacement {
    fn default() -> Self {
        Self::centered()
    }
}

/// Gaussian attenuation `g(D) ∈ [0, 1]`, 1 when the beam is centred.
pub fn proximity_factor(d: &BeamPlacement, m: &DoseResponseModel) -> f64 {
    let s = m.proximity_sigma;
    (-(d.distance_um * d.distance_um) / (2.0 * s * s)).exp()
}

/// Resistance shift for `shots` pulses at placement `d`.
pub fn delta_r(shots: u32, d: &BeamPlacement, m: &DoseResponseModel) -> f64 {
    proximity_factor(d, m) * m.delta_r_sat * saturation_fraction(shots as f64, m.shots_scale)
}

fn saturation_fraction(shots: f64, scale: f64) -> f64 {
    -(-shots / scale).exp_m1()
}

/// Answer of [`invert_dose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoseSolution {
    Shots(u32),
    Unreachable,
}

impl DoseSolution {
    pub fn shots(self) -> Option<u32> {
        match self {
            DoseSolution::Shots(n) => Some(n),
            DoseSolution::Unreachable => None,
        }
    }
}

/// Smallest shot count whose shift reaches `target_shift`, using the
/// default headroom.
pub fn invert_dose(target_shift: f64, d: &BeamPlacement, m: &DoseResponseModel) -> Result<DoseSolution> {
    invert_dose_with(target_shift, d, m, DEFAULT_HEADROOM_FRAC)
}

/// As [`invert_dose`]; targets beyond `headroom · g(D) · ΔR_sat` are
/// unreachable.
pub fn invert_dose_with(
    target_shift: f64,
    d: &BeamPlacement,
    m: &DoseResponseModel,
    headroom: f64,
) -> Result<DoseSolution> {
    if !(target_shift >= 0.0) {
        return Err(Error::Domain(format!("target shift must be ≥ 0, got {target_shift} Ω")));
    }
    if target_shift == 0.0 {
        return Ok(DoseSolution::Shots(0));
    }
    let ceiling = proximity_factor(d, m) * m.delta_r_sat;
    // The asymptote itself is never reached.
    if target_shift > headroom * ceiling || target_shift >= ceiling || ceiling <= 0.0 {
        return Ok(DoseSolution::Unreachable);
    }
    let estimate = -m.shots_scale * (-target_shift / ceiling).ln_1p();
    let mut shots = estimate.ceil().max(0.0) as u32;
    // Clean up rounding at exact integer solutions.
    while delta_r(shots, d, m) < target_shift {
        shots += 1;
    }
    while shots > 0 && delta_r(shots - 1, d, m) >= target_shift {
        shots -= 1;
    }
    Ok(DoseSolution::Shots(shots))
}

/// Shot count that delivers the largest shift the headroom allows;
/// `headroom` must be below 1.
pub fn saturation_shots(d: &BeamPlacement, m: &DoseResponseModel, headroom: f64) -> u32 {
    let ceiling = headroom * proximity_factor(d, m) * m.delta_r_sat;
    match invert_dose_with(ceiling, d, m, headroom) {
        Ok(DoseSolution::Shots(n)) => n,
        _ => 0,
    }
}

/// Ambient drift accumulated over `rounds`.
pub fn ambient_ageing(rounds: u32, m: &DoseResponseModel) -> f64 {
    rounds as f64 * m.ageing_per_round
}

/// One averaged point of a dose-response calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseSample {
    pub shots: u32,
    pub mean_shift_ohm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseFit {
    /// Fitted model; `ageing_per_round` holds the clamped ageing offset.
    pub model: DoseResponseModel,
    /// Constant offset common to all samples (unexposed drift).
    pub ageing_offset_ohm: f64,
    pub residual_norm: f64,
}

/// Least-squares fit of `c + ΔR_sat (1 − exp(−n/n₀))` to calibration points.
///
/// For fixed `n₀` the model is linear in `(c, ΔR_sat)`, so the search runs
/// over `n₀` alone (log-grid, then golden section) and finishes with a few
/// Gauss–Newton steps on all three parameters. `n₀` is confined to
/// `[min_shots / 50, 20 · max_shots]`, the range the samples can resolve.
pub fn fit_dose_response(samples: &[DoseSample]) -> Result<DoseFit> {
    let mut distinct: Vec<u32> = samples.iter().map(|s| s.shots).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct shot counts, have {}",
            distinct.len()
        )));
    }
    if samples.iter().any(|s| !s.mean_shift_ohm.is_finite()) {
        return Err(Error::Fit("non-finite shift in samples".into()));
    }
    let first = samples[0].mean_shift_ohm;
    if samples.iter().all(|s| s.mean_shift_ohm == first) {
        return Err(Error::Fit("all shifts are equal; saturation is undetermined".into()));
    }

    let xs: Vec<f64> = samples.iter().map(|s| s.shots as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.mean_shift_ohm).collect();
    let min_pos = distinct.iter().copied().find(|&n| n > 0).unwrap_or(1) as f64;
    let max_shots = *distinct.last().unwrap() as f64;
    let (lo, hi) = ((min_pos / 50.0).ln(), (20.0 * max_shots).ln());

    let profile = |log_scale: f64| linear_part(&xs, &ys, log_scale.exp()).map(|(_, _, rss)| rss);

    const GRID: usize = 200;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=GRID {
        let t = lo + (hi - lo) * i as f64 / GRID as f64;
        if let Some(rss) = profile(t) {
            if rss < best.0 {
                best = (rss, t);
            }
        }
    }
    let step = (hi - lo) / GRID as f64;
    let mut a = (best.1 - step).max(lo);
    let mut b = (best.1 + step).min(hi);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let eval = |t: f64| profile(t).unwrap_or(f64::INFINITY);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = eval(d);
        }
    }
    let mut scale = (0.5 * (a + b)).exp();
    let (mut offset, mut sat, mut rss) = linear_part(&xs, &ys, scale)
        .ok_or_else(|| Error::Fit("singular normal equations".into()))?;

    // Gauss–Newton polish on (c, ΔR_sat, n₀).
    for _ in 0..20 {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            let e = (-x / scale).exp();
            let r = y - (offset + sat * (1.0 - e));
            let grad = Vector3::new(1.0, 1.0 - e, -sat * x * e / (scale * scale));
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        let Some(delta) = jtj.lu().solve(&jtr) else { break };
        let cand_scale = scale + delta[2];
        if !(cand_scale > 0.0) || cand_scale.ln() < lo || cand_scale.ln() > hi {
            break;
        }
        let cand = (offset + delta[0], sat + delta[1], cand_scale);
        let cand_rss = residual(&xs, &ys, cand.0, cand.1, cand.2);
        if cand_rss > rss {
            break;
        }
        (offset, sat, scale, rss) = (cand.0, cand.1, cand.2, cand_rss);
        if delta.norm() < 1e-14 * (1.0 + sat.abs()) {
            break;
        }
    }

    if !(sat > 0.0) {
        return Err(Error::Fit(format!("fitted saturation {sat:.3} Ω is not positive")));
    }
    Ok(DoseFit {
        model: DoseResponseModel {
            delta_r_sat: sat,
            shots_scale: scale,
            ageing_per_round: offset.max(0.0),
            ..DoseResponseModel::default()
        },
        ageing_offset_ohm: offset,
        residual_norm: rss.sqrt(),
    })
}

fn residual(xs: &[f64], ys: &[f64], offset: f64, sat: f64, scale: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (offset + sat * saturation_fraction(x, scale));
            r * r
        })
        .sum()
}

/// Closed-form linear least squares for `(c, ΔR_sat)` at fixed scale.
fn linear_part(xs: &[f64], ys: &[f64], scale: f64) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let us: Vec<f64> = xs.iter().map(|&x| saturation_fraction(x, scale)).collect();
    let su: f64 = us.iter().sum();
    let suu: f64 = us.iter().map(|u| u * u).sum();
    let sy: f64 = ys.iter().sum();
    let suy: f64 = us.iter().zip(ys).map(|(u, y)| u * y).sum();
    let det = n * suu - su * su;
    if det.abs() < 1e-300 {
        return None;
    }
    let sat = (n * suy - su * sy) / det;
    let offset = (sy - sat * su) / n;
    Some((offset, sat, residual(xs, ys, offset, sat, scale)))
}
