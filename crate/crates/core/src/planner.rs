// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Shot planning for a tuning round.
//!
//! Annealing can only raise a junction's resistance, so every strategy
//! closes the spread from below:
//!
//! - **ensemble**: one fixed dose for every junction below its group median;
//! - **targeted**: per-junction doses from the inverse dose response,
//!   aiming every junction at a common group target;
//! - **collision-aware**: a per-die local search over shot counts that
//!   trades collision count against spread.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{detect_collisions, wafer_collision_map_with, CollisionParams, QpuLayout};
use crate::dose::{
    delta_r, invert_dose_with, saturation_shots, BeamPlacement, DoseResponseModel, DoseSolution,
    DEFAULT_HEADROOM_FRAC,
};
use crate::error::{Error, Result};
use crate::physics::TransmonModel;
use crate::stats;
use crate::wafer::{
    group_by_design, pooled_spread_stats, yield_window, DieCoord, GroupLabel, Junction,
    JunctionStatus, Measurement, Wafer, SCHEMA_VERSION, YIELD_HIGH_FRAC, YIELD_LOW_FRAC,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ensemble")]
    EnsembleBelowMedian,
    #[serde(rename = "targeted")]
    TargetedInverse,
    #[serde(rename = "collision-aware")]
    CollisionAware,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::EnsembleBelowMedian => "ensemble",
            Strategy::TargetedInverse => "targeted",
            Strategy::CollisionAware => "collision-aware",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ensemble" => Ok(Strategy::EnsembleBelowMedian),
            "targeted" => Ok(Strategy::TargetedInverse),
            "collision-aware" => Ok(Strategy::CollisionAware),
            other => Err(Error::Validation(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub junction_id: String,
    pub shots: u32,
    #[serde(flatten)]
    pub placement: BeamPlacement,
}

/// Shots for one tuning round; the exposure mask handed to the e-beam tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunePlan {
    pub schema_version: u32,
    pub round: u32,
    pub strategy: Strategy,
    pub entries: Vec<PlanEntry>,
    /// Expected resistance after the round (dose plus ageing), noiseless.
    pub predicted_post: BTreeMap<String, f64>,
    /// Junctions that need more than one round's headroom.
    #[serde(default)]
    pub partially_tunable: Vec<String>,
}

impl TunePlan {
    pub fn empty(round: u32, strategy: Strategy) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            round,
            strategy,
            entries: Vec::new(),
            predicted_post: BTreeMap::new(),
            partially_tunable: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_shots(&self) -> u64 {
        self.entries.iter().map(|e| e.shots as u64).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(s)?;
        if plan.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported plan schema_version {}",
                plan.schema_version
            )));
        }
        if let Some(e) = plan.entries.iter().find(|e| e.shots == 0) {
            return Err(Error::Validation(format!("plan entry {} has zero shots", e.junction_id)));
        }
        Ok(plan)
    }
}

/// Explicit per-group target, in resistance or in qubit frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupTarget {
    Ohm(f64),
    Hz(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub w_spread: f64,
    pub w_collisions: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            w_spread: 0.25,
            w_collisions: 1.0,
        }
    }
}

/// Budget of the collision-aware local search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_sweeps: u32,
    /// Extra starts from random grid points after the all-zero start.
    pub restarts: u32,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_sweeps: 50,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub schema_version: u32,
    pub max_rounds: u32,
    pub strategy: Strategy,
    /// Explicit targets; groups without one use the quantile rule.
    pub group_targets: BTreeMap<GroupLabel, GroupTarget>,
    pub objective_weights: ObjectiveWeights,
    pub stop_sigma_percent: f64,
    /// Automatic group target: this quantile of the in-window resistances,
    /// plus one round of ageing.
    pub target_quantile: f64,
    /// Dose of the ensemble strategy.
    pub ensemble_shots: u32,
    pub headroom_frac: f64,
    pub yield_low_frac: f64,
    pub yield_high_frac: f64,
    pub seed: u64,
    /// Evaluate dies in parallel; results are identical either way.
    pub parallel: bool,
    pub search: SearchBudget,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            max_rounds: 3,
            strategy: Strategy::TargetedInverse,
            group_targets: BTreeMap::new(),
            objective_weights: ObjectiveWeights::default(),
            stop_sigma_percent: 1.0,
            target_quantile: 0.8,
            ensemble_shots: 8,
            headroom_frac: DEFAULT_HEADROOM_FRAC,
            yield_low_frac: YIELD_LOW_FRAC,
            yield_high_frac: YIELD_HIGH_FRAC,
            seed: 0,
            parallel: true,
            search: SearchBudget::default(),
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let w = self.objective_weights;
        let problem = if self.max_rounds < 1 {
            Some("max_rounds must be ≥ 1".to_string())
        } else if !(w.w_spread >= 0.0 && w.w_collisions >= 0.0) || w.w_spread + w.w_collisions == 0.0 {
            Some("objective weights must be ≥ 0 and not both zero".into())
        } else if !(0.0..=1.0).contains(&self.target_quantile) {
            Some("target_quantile must lie in [0, 1]".into())
        } else if !(self.headroom_frac > 0.0 && self.headroom_frac <= 1.0) {
            Some("headroom_frac must lie in (0, 1]".into())
        } else if !(self.yield_low_frac < self.yield_high_frac) {
            Some("yield window is empty".into())
        } else {
            None
        };
        match problem {
            Some(p) => Err(Error::Validation(p)),
            None => Ok(()),
        }
    }
}

/// Junctions strictly below the median of the in-window population.
pub fn select_below_median<J: Borrow<Junction>>(group: &[J]) -> Result<Vec<Junction>> {
    if group.is_empty() {
        return Err(Error::Planning("selection needs at least 2 in-window junctions".into()));
    }
    let part = yield_window(group, YIELD_LOW_FRAC, YIELD_HIGH_FRAC)?;
    if part.in_window.len() < 2 {
        return Err(Error::Planning(format!(
            "selection needs at least 2 in-window junctions, have {}",
            part.in_window.len()
        )));
    }
    let latest: Vec<f64> = part.in_window.iter().map(|j| j.latest_resistance()).collect();
    let median = stats::median(&latest).unwrap_or(f64::NAN);
    Ok(part
        .in_window
        .into_iter()
        .filter(|j| j.latest_resistance() < median)
        .collect())
}

/// Same centred dose for every selected junction.
pub fn ensemble_plan<J: Borrow<Junction>>(
    selected: &[J],
    shots: u32,
    round: u32,
    model: &DoseResponseModel,
) -> Result<TunePlan> {
    if shots < 1 {
        return Err(Error::Planning("ensemble dose must be at least one shot".into()));
    }
    let placement = BeamPlacement::centered();
    let shift = delta_r(shots, &placement, model) + model.ageing_per_round;
    let mut plan = TunePlan::empty(round, Strategy::EnsembleBelowMedian);
    for j in selected {
        let j = j.borrow();
        plan.entries.push(PlanEntry {
            junction_id: j.junction_id.clone(),
            shots,
            placement,
        });
        plan.predicted_post
            .insert(j.junction_id.clone(), j.latest_resistance() + shift);
    }
    Ok(plan)
}

/// Aims every in-window junction of a group at `target_ohm`.
///
/// The required shift leaves room for one round of ambient ageing. Shifts
/// beyond the headroom are planned at saturation and the junction is
/// listed as partially tunable.
pub fn targeted_plan<J: Borrow<Junction>>(
    group: &[J],
    target_ohm: f64,
    model: &DoseResponseModel,
    round: u32,
    headroom: f64,
) -> Result<TunePlan> {
    let mut plan = TunePlan::empty(round, Strategy::TargetedInverse);
    if group.is_empty() {
        return Ok(plan);
    }
    let part = yield_window(group, YIELD_LOW_FRAC, YIELD_HIGH_FRAC)?;
    let latest: Vec<f64> = part.in_window.iter().map(|j| j.latest_resistance()).collect();
    let median = stats::median(&latest).unwrap_or(part.median_ohm);
    if !(target_ohm >= median) {
        return Err(Error::Planning(format!(
            "target {target_ohm:.1} Ω is below the group median {median:.1} Ω; tuning only raises resistance"
        )));
    }
    let placement = BeamPlacement::centered();
    let ageing = model.ageing_per_round;
    let full_shots = saturation_shots(&placement, model, headroom);

    for j in &part.out_of_spec {
        plan.predicted_post
            .insert(j.junction_id.clone(), j.latest_resistance() + ageing);
    }
    for j in &part.in_window {
        let r = j.latest_resistance();
        let required = (target_ohm - r - ageing).max(0.0);
        let shots = match invert_dose_with(required, &placement, model, headroom)? {
            DoseSolution::Shots(n) => n,
            DoseSolution::Unreachable => {
                plan.partially_tunable.push(j.junction_id.clone());
                full_shots
            }
        };
        if shots > 0 {
            plan.entries.push(PlanEntry {
                junction_id: j.junction_id.clone(),
                shots,
                placement,
            });
        }
        plan.predicted_post
            .insert(j.junction_id.clone(), r + delta_r(shots, &placement, model) + ageing);
    }
    Ok(plan)
}

/// Per-die objective used by the collision-aware search.
struct DieObjective<'a> {
    base: Vec<f64>,
    target_ohm: Vec<f64>,
    layout: &'a QpuLayout,
    params: &'a CollisionParams,
    physics: &'a TransmonModel,
    model: &'a DoseResponseModel,
    weights: ObjectiveWeights,
    stop_sigma: f64,
}

impl DieObjective<'_> {
    fn post(&self, shots: &[u32]) -> Vec<f64> {
        let placement = BeamPlacement::centered();
        self.base
            .iter()
            .zip(shots)
            .map(|(r, &s)| r + delta_r(s, &placement, self.model) + self.model.ageing_per_round)
            .collect()
    }

    fn evaluate(&self, shots: &[u32]) -> Result<f64> {
        let post = self.post(shots);
        let freqs = post
            .iter()
            .map(|r| self.physics.frequency(*r))
            .collect::<Result<Vec<f64>>>()?;
        let collisions = detect_collisions(&freqs, self.layout, self.params).total_excluding_s1;
        let normalised: Vec<f64> = post.iter().zip(&self.target_ohm).map(|(r, t)| r / t).collect();
        let sigma = match (stats::sample_std(&normalised), stats::mean(&normalised)) {
            (Some(s), Some(m)) => 100.0 * s / m,
            _ => 0.0,
        };
        Ok(self.weights.w_collisions * collisions as f64
            + self.weights.w_spread * (sigma - self.stop_sigma).max(0.0))
    }
}

/// Objective value `J` of a shot assignment on one die (index = qubit).
///
/// `J = w_collisions · (collisions excluding S1) + w_spread · max(0, σ − σ_stop)`
/// where σ is the spread of resistances normalised to their group targets.
pub fn die_objective<J: Borrow<Junction>>(
    die: &[J],
    shots: &[u32],
    layout: &QpuLayout,
    model: &DoseResponseModel,
    params: &CollisionParams,
    cfg: &CampaignConfig,
    physics: &TransmonModel,
) -> Result<f64> {
    let ordered = order_die(die, layout)?;
    let obj = build_objective(&ordered, layout, model, params, cfg, physics)?;
    obj.evaluate(shots)
}

fn order_die<'a, J: Borrow<Junction>>(die: &'a [J], layout: &QpuLayout) -> Result<Vec<&'a Junction>> {
    let mut slots: Vec<Option<&Junction>> = vec![None; layout.qubit_count];
    for j in die {
        let j = j.borrow();
        match slots.get_mut(j.qubit_index) {
            Some(slot @ None) => *slot = Some(j),
            _ => {
                return Err(Error::Layout(format!(
                    "junction {} does not fit the {}-qubit layout",
                    j.junction_id, layout.qubit_count
                )))
            }
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(q, s)| s.ok_or_else(|| Error::Layout(format!("die has no junction for qubit {q}"))))
        .collect()
}

fn build_objective<'a>(
    die: &[&Junction],
    layout: &'a QpuLayout,
    model: &'a DoseResponseModel,
    params: &'a CollisionParams,
    cfg: &CampaignConfig,
    physics: &'a TransmonModel,
) -> Result<DieObjective<'a>> {
    let target_ohm = layout
        .group_of
        .iter()
        .map(|g| physics.resistance(layout.target_frequency_hz[g]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DieObjective {
        base: die.iter().map(|j| j.latest_resistance()).collect(),
        target_ohm,
        layout,
        params,
        physics,
        model,
        weights: cfg.objective_weights,
        stop_sigma: cfg.stop_sigma_percent,
    })
}

/// Shot levels tried by coordinate descent: `{0, n₀, 2n₀, 4n₀, sat}`,
/// clamped to the saturation dose.
pub fn shot_grid(model: &DoseResponseModel, headroom: f64) -> Vec<u32> {
    let sat = saturation_shots(&BeamPlacement::centered(), model, headroom);
    let n0 = model.shots_scale.round().max(1.0) as u32;
    let mut grid: Vec<u32> = [0, n0, 2 * n0, 4 * n0, sat]
        .into_iter()
        .map(|s| s.min(sat))
        .collect();
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Local search over per-junction shots on one complete die.
///
/// Coordinate descent over [`shot_grid`] (seeded sweep order, up to
/// `max_sweeps`), then steepest single-junction moves over every shot
/// count up to saturation until nothing improves. The first start is the
/// empty plan; further starts are random grid points. The result never
/// scores worse than the empty plan.
pub fn collision_aware_plan<J: Borrow<Junction>>(
    die: &[J],
    layout: &QpuLayout,
    model: &DoseResponseModel,
    params: &CollisionParams,
    cfg: &CampaignConfig,
    physics: &TransmonModel,
    round: u32,
) -> Result<TunePlan> {
    let ordered = order_die(die, layout)?;
    let obj = build_objective(&ordered, layout, model, params, cfg, physics)?;
    let grid = shot_grid(model, cfg.headroom_frac);
    let sat = *grid.last().unwrap_or(&0);
    let tunable: Vec<usize> = ordered
        .iter()
        .enumerate()
        .filter(|(_, j)| !matches!(j.status, JunctionStatus::OutOfSpec | JunctionStatus::Failed))
        .map(|(q, _)| q)
        .collect();

    let n = ordered.len();
    let empty = vec![0u32; n];
    let empty_score = obj.evaluate(&empty)?;
    let mut rng = ChaCha8Rng::seed_from_u64(die_seed(cfg.seed, round, ordered[0].die));

    let mut best = (empty_score, empty.clone());
    for start in 0..=cfg.search.restarts {
        let mut shots = empty.clone();
        if start > 0 {
            for &q in &tunable {
                shots[q] = grid[rng.random_range(0..grid.len())];
            }
        }
        let mut score = obj.evaluate(&shots)?;

        for _ in 0..cfg.search.max_sweeps {
            let mut order = tunable.clone();
            order.shuffle(&mut rng);
            let mut changed = false;
            for q in order {
                let current = shots[q];
                for &level in &grid {
                    if level == shots[q] {
                        continue;
                    }
                    let prev = shots[q];
                    shots[q] = level;
                    let s = obj.evaluate(&shots)?;
                    if s < score {
                        score = s;
                    } else {
                        shots[q] = prev;
                    }
                }
                changed |= shots[q] != current;
            }
            if !changed {
                break;
            }
        }

        loop {
            let mut step: Option<(f64, usize, u32)> = None;
            for &q in &tunable {
                let prev = shots[q];
                for level in 0..=sat {
                    if level == prev {
                        continue;
                    }
                    shots[q] = level;
                    let s = obj.evaluate(&shots)?;
                    if s < score && step.map_or(true, |(b, _, _)| s < b) {
                        step = Some((s, q, level));
                    }
                }
                shots[q] = prev;
            }
            match step {
                Some((s, q, level)) => {
                    shots[q] = level;
                    score = s;
                }
                None => break,
            }
        }

        let total = |v: &[u32]| v.iter().map(|&s| s as u64).sum::<u64>();
        if score < best.0 || (score == best.0 && total(&shots) < total(&best.1)) {
            best = (score, shots);
        }
    }

    let placement = BeamPlacement::centered();
    let post = obj.post(&best.1);
    let mut plan = TunePlan::empty(round, Strategy::CollisionAware);
    for (q, j) in ordered.iter().enumerate() {
        if best.1[q] > 0 {
            plan.entries.push(PlanEntry {
                junction_id: j.junction_id.clone(),
                shots: best.1[q],
                placement,
            });
        }
        plan.predicted_post.insert(j.junction_id.clone(), post[q]);
    }
    Ok(plan)
}

fn die_seed(seed: u64, round: u32, die: DieCoord) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(b"collision-aware");
    h.update(seed.to_le_bytes());
    h.update(round.to_le_bytes());
    h.update(die.row.to_le_bytes());
    h.update(die.col.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Resistance target for one group this round.
pub fn group_target_ohm<J: Borrow<Junction>>(
    group: GroupLabel,
    members: &[J],
    cfg: &CampaignConfig,
    model: &DoseResponseModel,
    physics: &TransmonModel,
) -> Result<f64> {
    match cfg.group_targets.get(&group) {
        Some(GroupTarget::Ohm(r)) => Ok(*r),
        Some(GroupTarget::Hz(f)) => physics.resistance(*f),
        None => {
            let part = yield_window(members, cfg.yield_low_frac, cfg.yield_high_frac)?;
            let latest: Vec<f64> = part.in_window.iter().map(|j| j.latest_resistance()).collect();
            let q = stats::quantile(&latest, cfg.target_quantile)
                .ok_or_else(|| Error::Planning(format!("group {group} has no in-window junctions")))?;
            Ok(q + model.ageing_per_round)
        }
    }
}

/// Plans one round over a whole wafer with the configured strategy.
#[allow(clippy::too_many_arguments)]
pub fn plan_round(
    wafer: &Wafer,
    round: u32,
    cfg: &CampaignConfig,
    model: &DoseResponseModel,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<TunePlan> {
    let mut classified = wafer.clone();
    classified.classify_yield(cfg.yield_low_frac, cfg.yield_high_frac);
    let groups = group_by_design(&classified);

    let mut plans = Vec::new();
    match cfg.strategy {
        Strategy::EnsembleBelowMedian => {
            for members in groups.values() {
                let selected = select_below_median(members)?;
                plans.push(ensemble_plan(&selected, cfg.ensemble_shots, round, model)?);
            }
        }
        Strategy::TargetedInverse => {
            for (g, members) in &groups {
                let target = group_target_ohm(*g, members, cfg, model, physics)?;
                plans.push(targeted_plan(members, target, model, round, cfg.headroom_frac)?);
            }
        }
        Strategy::CollisionAware => {
            let dies: Vec<(DieCoord, Vec<&Junction>)> = classified
                .dies()
                .into_iter()
                .filter(|(_, js)| js.len() == layout.qubit_count)
                .collect();
            let plan_die = |(_, js): &(DieCoord, Vec<&Junction>)| {
                collision_aware_plan(js, layout, model, params, cfg, physics, round)
            };
            let per_die: Vec<Result<TunePlan>> = if cfg.parallel {
                dies.par_iter().map(plan_die).collect()
            } else {
                dies.iter().map(plan_die).collect()
            };
            for p in per_die {
                plans.push(p?);
            }
        }
    }
    Ok(merge_plans(wafer, round, cfg.strategy, plans, model))
}

/// Concatenates partial plans in wafer order and fills `predicted_post`
/// for junctions no partial plan covered with ageing alone.
fn merge_plans(
    wafer: &Wafer,
    round: u32,
    strategy: Strategy,
    parts: Vec<TunePlan>,
    model: &DoseResponseModel,
) -> TunePlan {
    let order: HashMap<&str, usize> = wafer
        .junctions
        .iter()
        .enumerate()
        .map(|(i, j)| (j.junction_id.as_str(), i))
        .collect();
    let mut plan = TunePlan::empty(round, strategy);
    for p in parts {
        plan.entries.extend(p.entries);
        plan.predicted_post.extend(p.predicted_post);
        plan.partially_tunable.extend(p.partially_tunable);
    }
    let rank = |id: &str| order.get(id).copied().unwrap_or(usize::MAX);
    plan.entries.sort_by_key(|e| rank(&e.junction_id));
    plan.partially_tunable.sort_by_key(|id| rank(id));
    for j in &wafer.junctions {
        plan.predicted_post
            .entry(j.junction_id.clone())
            .or_insert(j.latest_resistance() + model.ageing_per_round);
    }
    plan
}

/// Whether spread and collisions already meet the stop criterion.
pub fn campaign_converged(
    wafer: &Wafer,
    cfg: &CampaignConfig,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<bool> {
    let sigma = match pooled_spread_stats(&wafer.junctions, cfg.yield_low_frac, cfg.yield_high_frac) {
        Ok(s) => s.sigma_percent,
        Err(Error::Statistics(_)) => return Ok(false),
        Err(e) => return Err(e),
    };
    if sigma > cfg.stop_sigma_percent {
        return Ok(false);
    }
    let map = wafer_collision_map_with(wafer, layout, params, physics, cfg.parallel)?;
    Ok(map.total_excluding_s1() == 0)
}

/// Wafer as the plan predicts it: every junction moved to its noiseless
/// `predicted_post` value.
pub fn advance_predicted(wafer: &Wafer, plan: &TunePlan, model: &DoseResponseModel) -> Wafer {
    let tuned: std::collections::HashSet<&str> =
        plan.entries.iter().map(|e| e.junction_id.as_str()).collect();
    let mut next = wafer.clone();
    for j in &mut next.junctions {
        let r = plan
            .predicted_post
            .get(&j.junction_id)
            .copied()
            .unwrap_or(j.latest_resistance() + model.ageing_per_round);
        j.history.push(Measurement {
            round: plan.round,
            resistance_ohm: r,
        });
        if tuned.contains(j.junction_id.as_str()) {
            j.status = JunctionStatus::Tuned;
        }
    }
    next
}

/// Plans up to `max_rounds` rounds, re-planning each round from the
/// noiseless predicted wafer. Stops as soon as the spread is at or below
/// `stop_sigma_percent` with no collisions outside S1.
pub fn run_campaign_plan(
    wafer: &Wafer,
    cfg: &CampaignConfig,
    model: &DoseResponseModel,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<Vec<TunePlan>> {
    cfg.validate()?;
    let mut current = wafer.clone();
    let mut plans = Vec::new();
    let start = current.junctions.iter().map(|j| j.latest_round()).max().unwrap_or(0);
    for r in 1..=cfg.max_rounds {
        if campaign_converged(&current, cfg, layout, params, physics)? {
            break;
        }
        let plan = plan_round(&current, start + r, cfg, model, layout, params, physics)?;
        current = advance_predicted(&current, &plan, model);
        plans.push(plan);
    }
    Ok(plans)
}
