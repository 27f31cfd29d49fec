// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Synthetic wafers, the virtual anneal and end-to-end campaigns.
//!
//! All randomness comes from per-junction streams keyed by
//! `(seed, junction_id, round)`, so results do not depend on evaluation
//! order or thread count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collision::{wafer_collision_map_with, CollisionParams, QpuLayout};
use crate::dose::{delta_r, DoseResponseModel};
use crate::error::{Error, Result};
use crate::physics::TransmonModel;
use crate::planner::{campaign_converged, plan_round, CampaignConfig, Strategy, TunePlan};
use crate::wafer::{
    group_by_design, pooled_spread_stats, spread_stats_in, DieCoord, GroupLabel, Junction,
    JunctionStatus, Measurement, Position, SpreadStats, Wafer, DEFAULT_LAYOUT_REF, SCHEMA_VERSION,
};

/// Deterministic random stream for one junction in one round.
pub fn junction_rng(seed: u64, junction_id: &str, round: u32, purpose: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(purpose.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    h.update(junction_id.as_bytes());
    h.update([0u8]);
    h.update(round.to_le_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DieGrid {
    pub rows: u32,
    pub cols: u32,
}

/// Recipe for a synthetic wafer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaferSpec {
    pub schema_version: u32,
    pub wafer_id: String,
    pub dies: DieGrid,
    /// Keep only the first `max_dies` dies in row-major order.
    pub max_dies: Option<usize>,
    pub layout: QpuLayout,
    /// Mean resistance per group; groups missing here use the resistance
    /// of the layout's target frequency.
    pub group_medians: BTreeMap<GroupLabel, f64>,
    pub rel_sigma_percent: f64,
    /// Per-group overrides of `rel_sigma_percent`.
    pub group_rel_sigma_percent: BTreeMap<GroupLabel, f64>,
    /// Fraction of junctions placed outside the 80–120 % window.
    pub out_of_spec_fraction: f64,
    pub seed: u64,
    pub die_pitch_um: f64,
    pub ring_radius_um: f64,
    pub physics: TransmonModel,
}

impl Default for WaferSpec {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            wafer_id: "synthetic".into(),
            dies: DieGrid { rows: 9, cols: 8 },
            max_dies: Some(69),
            layout: QpuLayout::default(),
            group_medians: BTreeMap::new(),
            rel_sigma_percent: 3.11,
            group_rel_sigma_percent: BTreeMap::new(),
            out_of_spec_fraction: 0.01,
            seed: 0,
            die_pitch_um: 6000.0,
            ring_radius_um: 400.0,
            physics: TransmonModel::default(),
        }
    }
}

impl WaferSpec {
    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        let sigmas = std::iter::once(&self.rel_sigma_percent).chain(self.group_rel_sigma_percent.values());
        let problem = if self.dies.rows < 1 || self.dies.cols < 1 || self.max_dies == Some(0) {
            Some("a wafer needs at least one die".to_string())
        } else if sigmas.clone().any(|s| !(s.is_finite() && *s >= 0.0)) {
            Some("rel_sigma_percent must be ≥ 0".into())
        } else if !(0.0..=1.0).contains(&self.out_of_spec_fraction) {
            Some("out_of_spec_fraction must lie in [0, 1]".into())
        } else if self.group_medians.values().any(|r| !(r.is_finite() && *r > 0.0)) {
            Some("group medians must be positive".into())
        } else {
            None
        };
        match problem {
            Some(p) => Err(Error::Validation(p)),
            None => Ok(()),
        }
    }

    pub fn group_median(&self, g: GroupLabel) -> Result<f64> {
        match self.group_medians.get(&g) {
            Some(r) => Ok(*r),
            None => self.physics.resistance(self.layout.target_frequency_hz[&g]),
        }
    }

    pub fn group_sigma_percent(&self, g: GroupLabel) -> f64 {
        self.group_rel_sigma_percent
            .get(&g)
            .copied()
            .unwrap_or(self.rel_sigma_percent)
    }

    pub fn die_coords(&self) -> Vec<DieCoord> {
        let all = (0..self.dies.rows as i32)
            .flat_map(|r| (0..self.dies.cols as i32).map(move |c| DieCoord::new(r, c)));
        match self.max_dies {
            Some(n) => all.take(n).collect(),
            None => all.collect(),
        }
    }
}

/// Draws a wafer: normal resistances per group, a few out-of-spec junctions.
pub fn generate_wafer(spec: &WaferSpec) -> Result<Wafer> {
    spec.validate()?;
    let medians = spec
        .layout
        .groups()
        .into_iter()
        .map(|g| Ok((g, spec.group_median(g)?)))
        .collect::<Result<BTreeMap<GroupLabel, f64>>>()?;

    let n = spec.layout.qubit_count;
    let mut wafer = Wafer::new(spec.wafer_id.clone(), DEFAULT_LAYOUT_REF);
    if spec.layout.name != DEFAULT_LAYOUT_REF {
        wafer.layout_ref = spec.layout.name.clone();
    }
    wafer.metadata.insert("generator".into(), "jjtune".into());
    wafer.metadata.insert("seed".into(), spec.seed.to_string());

    for die in spec.die_coords() {
        for q in 0..n {
            let group = spec.layout.group_of[q];
            let id = Junction::canonical_id(die, q);
            let median = medians[&group];
            let mut rng = junction_rng(spec.seed, &id, 0, "fabricate");
            let r = if rng.random::<f64>() < spec.out_of_spec_fraction {
                let excess = rng.random_range(0.25..0.40);
                if rng.random::<bool>() {
                    median * (1.0 + excess)
                } else {
                    median * (1.0 - excess)
                }
            } else {
                let std = median * spec.group_sigma_percent(group) / 100.0;
                if std == 0.0 {
                    median
                } else {
                    Normal::new(median, std)
                        .map_err(|e| Error::Validation(e.to_string()))?
                        .sample(&mut rng)
                }
            };
            let angle = TAU * q as f64 / n as f64;
            wafer.junctions.push(Junction {
                junction_id: id,
                die,
                qubit_index: q,
                group,
                position_um: Position {
                    x: die.col as f64 * spec.die_pitch_um + spec.ring_radius_um * angle.cos(),
                    y: die.row as f64 * spec.die_pitch_um + spec.ring_radius_um * angle.sin(),
                },
                history: vec![Measurement {
                    round: 0,
                    resistance_ohm: r.max(f64::MIN_POSITIVE),
                }],
                status: JunctionStatus::AsFabricated,
            });
        }
    }
    Ok(wafer)
}

/// Multiplicative lognormal noise factor with unit mean.
fn noise_factor(rng: &mut ChaCha8Rng, rel_std: f64) -> f64 {
    if rel_std == 0.0 {
        return 1.0;
    }
    let var = (1.0 + rel_std * rel_std).ln();
    LogNormal::new(-0.5 * var, var.sqrt())
        .map(|d| d.sample(rng))
        .unwrap_or(1.0)
}

/// Virtual anneal: applies a plan and records round `plan.round`.
///
/// Planned junctions shift by their dose response times lognormal noise;
/// every junction also ages by one round.
pub fn apply_plan(wafer: &Wafer, plan: &TunePlan, model: &DoseResponseModel, seed: u64) -> Result<Wafer> {
    model.validate()?;
    let index: HashMap<&str, usize> = wafer
        .junctions
        .iter()
        .enumerate()
        .map(|(i, j)| (j.junction_id.as_str(), i))
        .collect();
    let mut doses = vec![None; wafer.junctions.len()];
    for e in &plan.entries {
        let i = *index
            .get(e.junction_id.as_str())
            .ok_or_else(|| Error::Apply(format!("plan names unknown junction {}", e.junction_id)))?;
        if doses[i].replace(e).is_some() {
            return Err(Error::Apply(format!("junction {} is planned twice", e.junction_id)));
        }
    }
    if let Some(j) = wafer.junctions.iter().find(|j| j.latest_round() >= plan.round) {
        return Err(Error::Apply(format!(
            "plan round {} does not follow junction {}'s last round {}",
            plan.round,
            j.junction_id,
            j.latest_round()
        )));
    }

    let mut next = wafer.clone();
    for (j, dose) in next.junctions.iter_mut().zip(doses) {
        let mut r = j.latest_resistance();
        if let Some(e) = dose {
            let mut rng = junction_rng(seed, &j.junction_id, plan.round, "anneal");
            r += delta_r(e.shots, &e.placement, model) * noise_factor(&mut rng, model.noise_rel_std);
            j.status = JunctionStatus::Tuned;
        }
        r += model.ageing_per_round;
        j.history.push(Measurement {
            round: plan.round,
            resistance_ohm: r,
        });
    }
    Ok(next)
}

/// Fixed histogram bins on `R / group median`, 0.5 % wide, 80–120 %.
pub const HIST_LOW: f64 = 0.80;
pub const HIST_HIGH: f64 = 1.20;
pub const HIST_BIN: f64 = 0.005;

pub fn hist_bin_count() -> usize {
    ((HIST_HIGH - HIST_LOW) / HIST_BIN).round() as usize
}

fn normalized_histogram(values: &[f64]) -> Vec<usize> {
    let nbins = hist_bin_count();
    let mut counts = vec![0; nbins];
    let median = crate::stats::median(values).unwrap_or(f64::NAN);
    for v in values {
        let x = v / median;
        if (HIST_LOW..=HIST_HIGH).contains(&x) {
            let b = (((x - HIST_LOW) / HIST_BIN).floor() as usize).min(nbins - 1);
            counts[b] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DieCount {
    pub row: i32,
    pub col: i32,
    pub collisions: usize,
}

/// Wafer state after one round; round 0 is the as-fabricated wafer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    pub sigma_percent_overall: f64,
    pub sigma_percent_by_group: BTreeMap<GroupLabel, f64>,
    pub yield_percent: f64,
    /// Dies per collision count, S1 excluded.
    pub collision_histogram: BTreeMap<usize, usize>,
    pub collision_map: Vec<DieCount>,
    pub group_histograms: BTreeMap<GroupLabel, Vec<usize>>,
    pub planned_junctions: usize,
    pub total_shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftComparison {
    pub tuned_mean_ohm: Option<f64>,
    pub untuned_mean_ohm: Option<f64>,
    pub tuned_count: usize,
    pub untuned_count: usize,
}

impl ShiftComparison {
    /// Mean tuned shift minus mean untuned shift.
    pub fn separation_ohm(&self) -> Option<f64> {
        Some(self.tuned_mean_ohm? - self.untuned_mean_ohm?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub junction_id: String,
    pub group: GroupLabel,
    pub initial_ohm: f64,
    pub final_ohm: f64,
    pub tuned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: u32,
    pub wafer_id: String,
    pub strategy: Strategy,
    /// Seed the wafer was generated from, when it was generated here.
    pub spec_seed: Option<u64>,
    pub anneal_seed: u64,
    pub rounds_executed: u32,
    pub per_round: Vec<RoundSummary>,
    pub initial: SpreadStats,
    #[serde(rename = "final")]
    pub final_stats: SpreadStats,
    pub yield_delta_percent: f64,
    pub tuned_vs_untuned_shift: ShiftComparison,
    pub shifts: Vec<ShiftRecord>,
    pub plans: Vec<TunePlan>,
    pub histogram_bins: HistogramBins,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBins {
    pub low: f64,
    pub high: f64,
    pub width: f64,
}

impl CampaignReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn final_round(&self) -> &RoundSummary {
        self.per_round.last().expect("round 0 is always present")
    }
}

fn summarize(
    wafer: &Wafer,
    round: u32,
    plan: Option<&TunePlan>,
    cfg: &CampaignConfig,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<RoundSummary> {
    let (lo, hi) = (cfg.yield_low_frac, cfg.yield_high_frac);
    let overall = pooled_spread_stats(&wafer.junctions, lo, hi)?;
    let mut by_group = BTreeMap::new();
    let mut hists = BTreeMap::new();
    for (g, members) in group_by_design(wafer) {
        if let Ok(s) = spread_stats_in(&members, lo, hi) {
            by_group.insert(g, s.sigma_percent);
        }
        let values: Vec<f64> = members.iter().map(|j| j.latest_resistance()).collect();
        hists.insert(g, normalized_histogram(&values));
    }
    let map = wafer_collision_map_with(wafer, layout, params, physics, cfg.parallel)?;
    Ok(RoundSummary {
        round,
        sigma_percent_overall: overall.sigma_percent,
        sigma_percent_by_group: by_group,
        yield_percent: overall.yield_percent,
        collision_histogram: map.histogram.clone(),
        collision_map: map
            .dies
            .iter()
            .map(|d| DieCount {
                row: d.die.row,
                col: d.die.col,
                collisions: d.report.total_excluding_s1,
            })
            .collect(),
        group_histograms: hists,
        planned_junctions: plan.map_or(0, |p| p.entries.len()),
        total_shots: plan.map_or(0, |p| p.total_shots()),
    })
}

/// Plan, anneal and re-measure for up to `cfg.max_rounds` rounds.
pub fn run_campaign(
    wafer: &Wafer,
    cfg: &CampaignConfig,
    model: &DoseResponseModel,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<CampaignReport> {
    cfg.validate()?;
    model.validate()?;
    layout.validate()?;
    params.validate()?;
    let (lo, hi) = (cfg.yield_low_frac, cfg.yield_high_frac);
    let start_round = wafer.junctions.iter().map(|j| j.latest_round()).max().unwrap_or(0);

    let mut current = wafer.clone();
    let mut per_round = vec![summarize(&current, start_round, None, cfg, layout, params, physics)?];
    let mut plans = Vec::new();
    for r in 1..=cfg.max_rounds {
        if campaign_converged(&current, cfg, layout, params, physics)? {
            break;
        }
        let round = start_round + r;
        let plan = plan_round(&current, round, cfg, model, layout, params, physics)?;
        current = apply_plan(&current, &plan, model, cfg.seed)?;
        per_round.push(summarize(&current, round, Some(&plan), cfg, layout, params, physics)?);
        plans.push(plan);
    }

    let tuned: BTreeSet<&str> = plans
        .iter()
        .flat_map(|p| p.entries.iter().map(|e| e.junction_id.as_str()))
        .collect();
    let shifts: Vec<ShiftRecord> = wafer
        .junctions
        .iter()
        .zip(&current.junctions)
        .map(|(before, after)| ShiftRecord {
            junction_id: before.junction_id.clone(),
            group: before.group,
            initial_ohm: before.latest_resistance(),
            final_ohm: after.latest_resistance(),
            tuned: tuned.contains(before.junction_id.as_str()),
        })
        .collect();
    let mean_shift = |want: bool| {
        let d: Vec<f64> = shifts
            .iter()
            .filter(|s| s.tuned == want)
            .map(|s| s.final_ohm - s.initial_ohm)
            .collect();
        (crate::stats::mean(&d), d.len())
    };
    let (tuned_mean_ohm, tuned_count) = mean_shift(true);
    let (untuned_mean_ohm, untuned_count) = mean_shift(false);

    let initial = pooled_spread_stats(&wafer.junctions, lo, hi)?;
    let final_stats = pooled_spread_stats(&current.junctions, lo, hi)?;
    Ok(CampaignReport {
        schema_version: SCHEMA_VERSION,
        wafer_id: wafer.wafer_id.clone(),
        strategy: cfg.strategy,
        spec_seed: wafer.metadata.get("seed").and_then(|s| s.parse().ok()),
        anneal_seed: cfg.seed,
        rounds_executed: plans.len() as u32,
        per_round,
        initial,
        final_stats,
        yield_delta_percent: final_stats.yield_percent - initial.yield_percent,
        tuned_vs_untuned_shift: ShiftComparison {
            tuned_mean_ohm,
            untuned_mean_ohm,
            tuned_count,
            untuned_count,
        },
        shifts,
        plans,
        histogram_bins: HistogramBins {
            low: HIST_LOW,
            high: HIST_HIGH,
            width: HIST_BIN,
        },
    })
}

/// Generates a wafer from `spec` and runs a campaign on it.
pub fn run_campaign_from_spec(
    spec: &WaferSpec,
    cfg: &CampaignConfig,
    model: &DoseResponseModel,
    params: &CollisionParams,
) -> Result<CampaignReport> {
    let wafer = generate_wafer(spec)?;
    run_campaign(&wafer, cfg, model, &spec.layout, params, &spec.physics)
}
