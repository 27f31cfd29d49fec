// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! QPU coupling graph and frequency-collision detection.
//!
//! Every edge of the coupling graph is a pair of cross-resonance gates, one
//! per direction; the drive of gate `c → t` sits at the target frequency
//! `f_d = f_t`. With `α < 0` the predicates are:
//!
//! | type | scope              | hit when                                   |
//! |------|--------------------|--------------------------------------------|
//! | A1   | edge `i–j`         | `|f_i − f_j| < δ`                          |
//! | A2   | edge, both ways    | `|f_i − f_j − α/2| < δ`                    |
//! | C1   | edge               | `|f_i − f_j|` not inside `(δ, |α| − δ)`    |
//! | D1   | edge, both ways    | `|f_i + α/2 − f_j| < δ`                    |
//! | E1   | gate `c → t`       | `|f_c − f_d| < δ`                          |
//! | E2   | gate `c → t`       | `|f_c − f_d − α/2| < δ`                    |
//! | S1   | gate + spectator k | `|f_d − f_k| < δ`                          |
//! | S2   | gate + spectator k | `|f_d − f_k − α| < δ`                      |
//! | T1   | gate + spectator k | `|2 f_d − f_c − f_k| < δ`                  |
//!
//! Spectators of `c → t` are the neighbours of `c` other than `t`.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::TransmonModel;
use crate::wafer::{DieCoord, GroupLabel, Junction, JunctionStatus, Wafer, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CollisionType {
    A1,
    A2,
    C1,
    D1,
    E1,
    E2,
    S1,
    S2,
    T1,
}

impl CollisionType {
    pub const ALL: [CollisionType; 9] = [
        CollisionType::A1,
        CollisionType::A2,
        CollisionType::C1,
        CollisionType::D1,
        CollisionType::E1,
        CollisionType::E2,
        CollisionType::S1,
        CollisionType::S2,
        CollisionType::T1,
    ];

    pub fn participant_count(self) -> usize {
        match self {
            CollisionType::S1 | CollisionType::S2 | CollisionType::T1 => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CollisionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for CollisionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CollisionType::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Validation(format!("unknown collision type `{s}`")))
    }
}

/// Default ring group pattern; every group-2/3 qubit sits between two
/// group-1 qubits.
pub const RING8_PATTERN: [GroupLabel; 8] = [1, 2, 1, 3, 1, 2, 1, 3];

/// Default group target frequencies (Hz).
///
/// Group 1 is anchored at 4.85 GHz; the group-2/3 offsets of ∓155 MHz are
/// the result of [`search_zero_spread_targets`] over a 5 MHz grid with the
/// default [`CollisionParams`]: they leave only S1 under zero spread, with
/// the widest margin to every other threshold.
pub const DEFAULT_TARGETS_HZ: [(GroupLabel, f64); 3] =
    [(1, 4.850e9), (2, 4.695e9), (3, 5.005e9)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpuLayout {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub qubit_count: usize,
    pub edges: Vec<(usize, usize)>,
    /// Design group of each qubit, indexed by qubit.
    pub group_of: Vec<GroupLabel>,
    pub target_frequency_hz: BTreeMap<GroupLabel, f64>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl QpuLayout {
    /// Ring of `group_of.len()` qubits with edges `(i, i+1 mod n)`.
    pub fn ring(group_of: Vec<GroupLabel>, targets: BTreeMap<GroupLabel, f64>) -> Result<Self> {
        let n = group_of.len();
        let edges = match n {
            0 | 1 => Vec::new(),
            2 => vec![(0, 1)],
            _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
        };
        let layout = Self {
            schema_version: SCHEMA_VERSION,
            name: format!("ring{n}"),
            qubit_count: n,
            edges,
            group_of,
            target_frequency_hz: targets,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.group_of.len() != self.qubit_count {
            return Err(Error::Layout(format!(
                "group_of has {} entries for {} qubits",
                self.group_of.len(),
                self.qubit_count
            )));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.edges {
            if a >= self.qubit_count || b >= self.qubit_count {
                return Err(Error::Layout(format!("edge ({a}, {b}) references a missing qubit")));
            }
            if a == b {
                return Err(Error::Layout(format!("self-loop on qubit {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Layout(format!("duplicate edge ({a}, {b})")));
            }
        }
        for (q, g) in self.group_of.iter().enumerate() {
            match self.target_frequency_hz.get(g) {
                Some(f) if *f > 0.0 && f.is_finite() => {}
                _ => {
                    return Err(Error::Layout(format!(
                        "qubit {q}: group {g} has no positive target frequency"
                    )))
                }
            }
        }
        Ok(())
    }

    /// Sorted neighbour lists, indexed by qubit.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.qubit_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for v in &mut adj {
            v.sort_unstable();
        }
        adj
    }

    /// Frequencies with every qubit exactly on its group target.
    pub fn target_frequencies(&self) -> Vec<f64> {
        self.group_of
            .iter()
            .map(|g| self.target_frequency_hz[g])
            .collect()
    }

    pub fn groups(&self) -> BTreeSet<GroupLabel> {
        self.group_of.iter().copied().collect()
    }
}

impl Default for QpuLayout {
    fn default() -> Self {
        Self::ring(RING8_PATTERN.to_vec(), DEFAULT_TARGETS_HZ.into_iter().collect())
            .expect("default layout is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    pub anharmonicity_hz: f64,
    pub thresholds_hz: BTreeMap<CollisionType, f64>,
    pub enabled: BTreeSet<CollisionType>,
}

impl Default for CollisionParams {
    fn default() -> Self {
        use CollisionType::*;
        let thresholds = [
            (A1, 17e6),
            (A2, 4e6),
            (C1, 10e6),
            (D1, 25e6),
            (E1, 17e6),
            (E2, 4e6),
            (S1, 17e6),
            (S2, 4e6),
            (T1, 17e6),
        ];
        Self {
            anharmonicity_hz: -200e6,
            thresholds_hz: thresholds.into_iter().collect(),
            enabled: [A1, A2, C1, D1, S1, S2, T1].into_iter().collect(),
        }
    }
}

impl CollisionParams {
    pub fn threshold(&self, t: CollisionType) -> f64 {
        self.thresholds_hz.get(&t).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.anharmonicity_hz < 0.0) || !self.anharmonicity_hz.is_finite() {
            return Err(Error::Validation(format!(
                "anharmonicity must be negative, got {} Hz",
                self.anharmonicity_hz
            )));
        }
        if let Some((t, d)) = self
            .thresholds_hz
            .iter()
            .find(|(_, d)| !(**d >= 0.0) || !d.is_finite())
        {
            return Err(Error::Validation(format!("threshold for {t} must be ≥ 0, got {d}")));
        }
        Ok(())
    }

    /// Copy with every threshold except S1 widened by `margin_hz`.
    pub fn widened(&self, margin_hz: f64) -> Self {
        let mut out = self.clone();
        for t in CollisionType::ALL {
            if t != CollisionType::S1 {
                *out.thresholds_hz.entry(t).or_insert(0.0) += margin_hz;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionHit {
    pub collision_type: CollisionType,
    /// `[i, j]` for pair types, `[control, target, spectator]` otherwise.
    pub participants: Vec<usize>,
    /// Signed distance to the resonance condition. For C1 it is measured
    /// from the nearest edge of the straddling window.
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CollisionReport {
    pub per_type_counts: BTreeMap<CollisionType, usize>,
    pub total_excluding_s1: usize,
    pub hits: Vec<CollisionHit>,
}

impl CollisionReport {
    pub fn count(&self, t: CollisionType) -> usize {
        self.per_type_counts.get(&t).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.per_type_counts.values().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Evaluates every enabled predicate on a frequency assignment.
///
/// `freqs` is indexed by qubit and must cover `layout.qubit_count`.
pub fn detect_collisions(freqs: &[f64], layout: &QpuLayout, params: &CollisionParams) -> CollisionReport {
    use CollisionType::*;
    assert_eq!(
        freqs.len(),
        layout.qubit_count,
        "one frequency per qubit is required"
    );
    let alpha = params.anharmonicity_hz;
    let on = |t| params.enabled.contains(&t);
    let mut hits = Vec::new();
    // C1 decides its own window test before calling in.
    let mut check = |t: CollisionType, detuning: f64, participants: &[usize]| {
        if t == C1 || detuning.abs() < params.threshold(t) {
            hits.push(CollisionHit {
                collision_type: t,
                participants: participants.to_vec(),
                detuning_hz: detuning,
            });
        }
    };

    let adj = layout.adjacency();
    for &(p, q) in &layout.edges {
        let (a, b) = (p.min(q), p.max(q));
        if on(A1) {
            check(A1, freqs[a] - freqs[b], &[a, b]);
        }
        if on(A2) {
            for (i, j) in [(a, b), (b, a)] {
                check(A2, freqs[i] - freqs[j] - alpha / 2.0, &[i, j]);
            }
        }
        if on(C1) {
            let gap = (freqs[a] - freqs[b]).abs();
            let margin = params.threshold(C1);
            if !(gap > margin && gap < alpha.abs() - margin) {
                let detuning = if gap <= 0.5 * alpha.abs() {
                    gap
                } else {
                    gap - alpha.abs()
                };
                check(C1, detuning, &[a, b]);
            }
        }
        if on(D1) {
            for (i, j) in [(a, b), (b, a)] {
                check(D1, freqs[i] + alpha / 2.0 - freqs[j], &[i, j]);
            }
        }
        for (c, t) in [(a, b), (b, a)] {
            let f_d = freqs[t];
            if on(E1) {
                check(E1, freqs[c] - f_d, &[c, t]);
            }
            if on(E2) {
                check(E2, freqs[c] - f_d - alpha / 2.0, &[c, t]);
            }
            for &k in adj[c].iter().filter(|&&k| k != t) {
                if on(S1) {
                    check(S1, f_d - freqs[k], &[c, t, k]);
                }
                if on(S2) {
                    check(S2, f_d - (freqs[k] + alpha), &[c, t, k]);
                }
                if on(T1) {
                    check(T1, 2.0 * f_d - (freqs[c] + freqs[k]), &[c, t, k]);
                }
            }
        }
    }

    let mut per_type_counts: BTreeMap<CollisionType, usize> =
        params.enabled.iter().map(|t| (*t, 0)).collect();
    for h in &hits {
        *per_type_counts.entry(h.collision_type).or_insert(0) += 1;
    }
    let total_excluding_s1 = per_type_counts
        .iter()
        .filter(|(t, _)| **t != S1)
        .map(|(_, n)| n)
        .sum();
    CollisionReport {
        per_type_counts,
        total_excluding_s1,
        hits,
    }
}

/// Frequencies of one die and the qubits whose junctions are out of spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DieFrequencies {
    pub frequencies_hz: Vec<f64>,
    pub flagged: Vec<usize>,
}

/// Converts each junction's latest resistance into its qubit frequency.
pub fn assign_frequencies<J: Borrow<Junction>>(
    die: &[J],
    layout: &QpuLayout,
    physics: &TransmonModel,
) -> Result<DieFrequencies> {
    let mut slots: Vec<Option<&Junction>> = vec![None; layout.qubit_count];
    for j in die {
        let j = j.borrow();
        let slot = slots.get_mut(j.qubit_index).ok_or_else(|| {
            Error::Layout(format!(
                "junction {} has qubit index {} outside a {}-qubit layout",
                j.junction_id, j.qubit_index, layout.qubit_count
            ))
        })?;
        if slot.replace(j).is_some() {
            return Err(Error::Layout(format!("qubit {} appears twice", j.qubit_index)));
        }
    }
    let mut frequencies_hz = Vec::with_capacity(layout.qubit_count);
    let mut flagged = Vec::new();
    for (q, slot) in slots.iter().enumerate() {
        let j = slot.ok_or_else(|| Error::Layout(format!("no junction for qubit {q}")))?;
        frequencies_hz.push(physics.frequency(j.latest_resistance())?);
        if matches!(j.status, JunctionStatus::OutOfSpec | JunctionStatus::Failed) {
            flagged.push(q);
        }
    }
    Ok(DieFrequencies {
        frequencies_hz,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DieCollisions {
    pub die: DieCoord,
    pub flagged_qubits: Vec<usize>,
    pub report: CollisionReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WaferCollisionMap {
    pub dies: Vec<DieCollisions>,
    /// Dies without a full qubit set; not evaluated.
    pub skipped_dies: Vec<DieCoord>,
    /// Number of dies per value of `total_excluding_s1`.
    pub histogram: BTreeMap<usize, usize>,
}

impl WaferCollisionMap {
    pub fn report(&self, die: DieCoord) -> Option<&CollisionReport> {
        self.dies.iter().find(|d| d.die == die).map(|d| &d.report)
    }

    pub fn total_excluding_s1(&self) -> usize {
        self.dies.iter().map(|d| d.report.total_excluding_s1).sum()
    }
}

/// Per-die collision reports for a whole wafer, dies evaluated in parallel.
pub fn wafer_collision_map(
    wafer: &Wafer,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
) -> Result<WaferCollisionMap> {
    wafer_collision_map_with(wafer, layout, params, physics, true)
}

pub fn wafer_collision_map_with(
    wafer: &Wafer,
    layout: &QpuLayout,
    params: &CollisionParams,
    physics: &TransmonModel,
    parallel: bool,
) -> Result<WaferCollisionMap> {
    let dies: Vec<(DieCoord, Vec<&Junction>)> = wafer.dies().into_iter().collect();
    let complete = |js: &[&Junction]| {
        js.len() == layout.qubit_count
            && js.iter().enumerate().all(|(q, j)| j.qubit_index == q)
    };
    let evaluate = |(die, js): &(DieCoord, Vec<&Junction>)| -> Option<Result<DieCollisions>> {
        if !complete(js) {
            return None;
        }
        Some(assign_frequencies(js, layout, physics).map(|f| DieCollisions {
            die: *die,
            flagged_qubits: f.flagged,
            report: detect_collisions(&f.frequencies_hz, layout, params),
        }))
    };
    let results: Vec<Option<Result<DieCollisions>>> = if parallel {
        dies.par_iter().map(evaluate).collect()
    } else {
        dies.iter().map(evaluate).collect()
    };

    let mut map = WaferCollisionMap::default();
    for ((die, _), r) in dies.iter().zip(results) {
        match r {
            None => map.skipped_dies.push(*die),
            Some(r) => {
                let d = r?;
                *map.histogram.entry(d.report.total_excluding_s1).or_insert(0) += 1;
                map.dies.push(d);
            }
        }
    }
    Ok(map)
}

/// Collisions of a perfectly targeted die: every qubit on its group target.
pub fn zero_spread_assessment(layout: &QpuLayout, params: &CollisionParams) -> CollisionReport {
    detect_collisions(&layout.target_frequencies(), layout, params)
}

/// Widest extra margin (Hz, up to `cap_hz`) that can be added to every
/// non-S1 threshold while the zero-spread die stays free of non-S1 hits.
/// `None` when the targets already collide.
pub fn zero_spread_margin(layout: &QpuLayout, params: &CollisionParams, cap_hz: f64) -> Option<f64> {
    let clean = |m: f64| zero_spread_assessment(layout, &params.widened(m)).total_excluding_s1 == 0;
    if !clean(0.0) {
        return None;
    }
    if clean(cap_hz) {
        return Some(cap_hz);
    }
    let (mut lo, mut hi) = (0.0, cap_hz);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if clean(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSearch {
    pub target_frequency_hz: BTreeMap<GroupLabel, f64>,
    pub margin_hz: f64,
    pub s1_count: usize,
}

/// Grid search for group targets that leave only S1 collisions at zero
/// spread.
///
/// The lowest group label is pinned at `anchor_hz`; every other group is
/// offset by a multiple of `step_hz` within `±max_offset_hz`. Candidates
/// are ranked by [`zero_spread_margin`], then by fewer S1 hits, then by
/// smaller total offset, then by ascending offsets.
pub fn search_zero_spread_targets(
    layout: &QpuLayout,
    params: &CollisionParams,
    anchor_hz: f64,
    step_hz: f64,
    max_offset_hz: f64,
) -> Option<TargetSearch> {
    let groups: Vec<GroupLabel> = layout.groups().into_iter().collect();
    let (&anchor, others) = groups.split_first()?;
    let steps = (max_offset_hz / step_hz).floor() as i64;
    let axis: Vec<i64> = (-steps..=steps).collect();

    let mut best: Option<(f64, usize, i64, Vec<i64>, TargetSearch)> = None;
    let mut combo = vec![0usize; others.len()];
    loop {
        let offsets: Vec<i64> = combo.iter().map(|&i| axis[i]).collect();
        let mut candidate = layout.clone();
        candidate.target_frequency_hz = std::iter::once((anchor, anchor_hz))
            .chain(
                others
                    .iter()
                    .zip(&offsets)
                    .map(|(g, o)| (*g, anchor_hz + *o as f64 * step_hz)),
            )
            .collect();
        if let Some(margin) = zero_spread_margin(&candidate, params, 1e9) {
            let report = zero_spread_assessment(&candidate, params);
            let s1 = report.count(CollisionType::S1);
            let spread: i64 = offsets.iter().map(|o| o.abs()).sum();
            let better = match &best {
                None => true,
                Some((m, n, s, o, _)) => {
                    margin > *m
                        || (margin == *m && (s1, spread, &offsets) < (*n, *s, o))
                }
            };
            if s1 > 0 && better {
                best = Some((
                    margin,
                    s1,
                    spread,
                    offsets.clone(),
                    TargetSearch {
                        target_frequency_hz: candidate.target_frequency_hz.clone(),
                        margin_hz: margin,
                        s1_count: report.count(CollisionType::S1),
                    },
                ));
            }
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == combo.len() {
                return best.map(|b| b.4);
            }
            combo[i] += 1;
            if combo[i] < axis.len() {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
    }
}
