// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Wafer data model, measurement-file ingestion, yield window and spread
//! statistics.
//!
//! Two on-disk encodings are supported. The CSV form carries one row per
//! (junction, measurement round) under the fixed header
//! [`CSV_HEADER`]; the JSON form nests each junction's history and keeps
//! wafer-level metadata. Both are validated into the same [`Wafer`].

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] = [
    "wafer_id",
    "die_row",
    "die_col",
    "qubit_index",
    "group",
    "x_um",
    "y_um",
    "round",
    "resistance_ohm",
];

/// Frequency-group label of a junction design.
pub type GroupLabel = u8;

/// Group labels accepted by [`parse_wafer`].
pub const DEFAULT_GROUPS: [GroupLabel; 3] = [1, 2, 3];

pub const YIELD_LOW_FRAC: f64 = 0.80;
pub const YIELD_HIGH_FRAC: f64 = 1.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionStatus {
    #[default]
    AsFabricated,
    Tuned,
    OutOfSpec,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DieCoord {
    pub row: i32,
    pub col: i32,
}

impl DieCoord {
    pub fn new(row: i32, col: i32) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub round: u32,
    pub resistance_ohm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub junction_id: String,
    pub die: DieCoord,
    pub qubit_index: usize,
    pub group: GroupLabel,
    pub position_um: Position,
    pub history: Vec<Measurement>,
    #[serde(default)]
    pub status: JunctionStatus,
}

impl Junction {
    /// Canonical identifier for a junction at a die position.
    pub fn canonical_id(die: DieCoord, qubit_index: usize) -> String {
        format!("r{:02}c{:02}q{}", die.row, die.col, qubit_index)
    }

    /// Resistance of record: the last history entry.
    pub fn latest_resistance(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |m| m.resistance_ohm)
    }

    pub fn initial_resistance(&self) -> f64 {
        self.history.first().map_or(f64::NAN, |m| m.resistance_ohm)
    }

    pub fn latest_round(&self) -> u32 {
        self.history.last().map_or(0, |m| m.round)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wafer {
    pub schema_version: u32,
    pub wafer_id: String,
    pub layout_ref: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub junctions: Vec<Junction>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaferFormat {
    Csv,
    Json,
}

impl WaferFormat {
    /// Picks the format from a file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => WaferFormat::Csv,
            _ => WaferFormat::Json,
        }
    }
}

pub const DEFAULT_LAYOUT_REF: &str = "ring8";

impl Wafer {
    pub fn new(wafer_id: impl Into<String>, layout_ref: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            wafer_id: wafer_id.into(),
            layout_ref: layout_ref.into(),
            metadata: BTreeMap::new(),
            junctions: Vec::new(),
        }
    }

    pub fn junction(&self, id: &str) -> Option<&Junction> {
        self.junctions.iter().find(|j| j.junction_id == id)
    }

    /// Junctions grouped per die, each die's list sorted by qubit index.
    pub fn dies(&self) -> BTreeMap<DieCoord, Vec<&Junction>> {
        let mut out: BTreeMap<DieCoord, Vec<&Junction>> = BTreeMap::new();
        for j in &self.junctions {
            out.entry(j.die).or_default().push(j);
        }
        for v in out.values_mut() {
            v.sort_by_key(|j| j.qubit_index);
        }
        out
    }

    /// Checks identifier uniqueness, die-position uniqueness, non-empty
    /// histories and strictly positive resistances.
    pub fn validate(&self, allowed_groups: Option<&BTreeSet<GroupLabel>>) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut ids = BTreeSet::new();
        let mut slots = BTreeSet::new();
        for j in &self.junctions {
            if !ids.insert(j.junction_id.as_str()) {
                return Err(Error::Validation(format!("duplicate junction id {}", j.junction_id)));
            }
            if !slots.insert((j.die, j.qubit_index)) {
                return Err(Error::Validation(format!(
                    "duplicate die position (row {}, col {}, qubit {})",
                    j.die.row, j.die.col, j.qubit_index
                )));
            }
            if let Some(groups) = allowed_groups {
                if !groups.contains(&j.group) {
                    return Err(Error::Validation(format!(
                        "junction {} has unknown group label {}",
                        j.junction_id, j.group
                    )));
                }
            }
            if j.history.is_empty() {
                return Err(Error::Validation(format!(
                    "junction {} has an empty resistance history",
                    j.junction_id
                )));
            }
            if !j.position_um.x.is_finite() || !j.position_um.y.is_finite() {
                return Err(Error::Validation(format!(
                    "junction {} has a non-finite position",
                    j.junction_id
                )));
            }
            for pair in j.history.windows(2) {
                if pair[1].round <= pair[0].round {
                    return Err(Error::Validation(format!(
                        "junction {} history rounds are not increasing",
                        j.junction_id
                    )));
                }
            }
            for m in &j.history {
                if !(m.resistance_ohm > 0.0) || !m.resistance_ohm.is_finite() {
                    return Err(Error::Validation(format!(
                        "junction {} round {}: resistance must be positive and finite, got {}",
                        j.junction_id, m.round, m.resistance_ohm
                    )));
                }
            }
        }
        Ok(())
    }

    /// Marks junctions outside the per-group yield window as out of spec.
    ///
    /// Returns the number of junctions that changed status. Junctions that
    /// are already `Failed` are left alone.
    pub fn classify_yield(&mut self, low_frac: f64, high_frac: f64) -> usize {
        let mut medians = BTreeMap::new();
        for (group, members) in group_by_design(self) {
            let latest: Vec<f64> = members.iter().map(|j| j.latest_resistance()).collect();
            if let Some(m) = stats::median(&latest) {
                medians.insert(group, m);
            }
        }
        let mut changed = 0;
        for j in &mut self.junctions {
            if j.status == JunctionStatus::Failed {
                continue;
            }
            let ratio = j.latest_resistance() / medians[&j.group];
            let inside = ratio >= low_frac && ratio <= high_frac;
            if !inside && j.status != JunctionStatus::OutOfSpec {
                j.status = JunctionStatus::OutOfSpec;
                changed += 1;
            } else if inside && j.status == JunctionStatus::OutOfSpec {
                j.status = if j.history.len() > 1 {
                    JunctionStatus::Tuned
                } else {
                    JunctionStatus::AsFabricated
                };
                changed += 1;
            }
        }
        changed
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes one CSV row per (junction, round).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Validation(format!("CSV write failed: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for j in &self.junctions {
            for m in &j.history {
                w.write_record([
                    self.wafer_id.clone(),
                    j.die.row.to_string(),
                    j.die.col.to_string(),
                    j.qubit_index.to_string(),
                    j.group.to_string(),
                    j.position_um.x.to_string(),
                    j.position_um.y.to_string(),
                    m.round.to_string(),
                    m.resistance_ohm.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Validation(format!("CSV write failed: {e}")))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = match WaferFormat::from_path(path) {
            WaferFormat::Json => self.to_json()?.into_bytes(),
            WaferFormat::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf)?;
                buf
            }
        };
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        parse_wafer(std::io::BufReader::new(file), WaferFormat::from_path(path))
    }
}

/// Parses and validates a wafer, accepting the default group labels.
pub fn parse_wafer<R: Read>(source: R, format: WaferFormat) -> Result<Wafer> {
    let groups: BTreeSet<GroupLabel> = DEFAULT_GROUPS.into_iter().collect();
    parse_wafer_with_groups(source, format, &groups)
}

pub fn parse_wafer_with_groups<R: Read>(
    source: R,
    format: WaferFormat,
    groups: &BTreeSet<GroupLabel>,
) -> Result<Wafer> {
    let wafer = match format {
        WaferFormat::Json => serde_json::from_reader(source).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?,
        WaferFormat::Csv => parse_csv(source)?,
    };
    wafer.validate(Some(groups))?;
    Ok(wafer)
}

fn parse_csv<R: Read>(source: R) -> Result<Wafer> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", CSV_HEADER.join(",")),
        });
    }

    let mut wafer_id: Option<String> = None;
    let mut junctions: Vec<Junction> = Vec::new();
    let mut index: HashMap<(DieCoord, usize), usize> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |name: &str, value: &str| Error::Parse {
            line,
            message: format!("invalid {name} `{value}`"),
        };
        fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
            s.parse().ok()
        }

        let id = field(0);
        match &wafer_id {
            None => wafer_id = Some(id.to_string()),
            Some(w) if w != id => {
                return Err(Error::Validation(format!(
                    "line {line}: wafer_id `{id}` differs from `{w}`"
                )))
            }
            _ => {}
        }
        let row: i32 = num(field(1)).ok_or_else(|| bad("die_row", field(1)))?;
        let col: i32 = num(field(2)).ok_or_else(|| bad("die_col", field(2)))?;
        let qubit: usize = num(field(3)).ok_or_else(|| bad("qubit_index", field(3)))?;
        let group: GroupLabel = num(field(4)).ok_or_else(|| bad("group", field(4)))?;
        let x: f64 = num(field(5))
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad("x_um", field(5)))?;
        let y: f64 = num(field(6))
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad("y_um", field(6)))?;
        let round: u32 = num(field(7)).ok_or_else(|| bad("round", field(7)))?;
        let resistance: f64 = num(field(8))
            .filter(|v: &f64| v.is_finite() && *v > 0.0)
            .ok_or_else(|| bad("resistance_ohm", field(8)))?;

        let die = DieCoord::new(row, col);
        let slot = *index.entry((die, qubit)).or_insert_with(|| {
            junctions.push(Junction {
                junction_id: Junction::canonical_id(die, qubit),
                die,
                qubit_index: qubit,
                group,
                position_um: Position { x, y },
                history: Vec::new(),
                status: JunctionStatus::AsFabricated,
            });
            junctions.len() - 1
        });
        let j = &mut junctions[slot];
        if j.group != group || j.position_um != (Position { x, y }) {
            return Err(Error::Validation(format!(
                "line {line}: junction {} changes group or position between rows",
                j.junction_id
            )));
        }
        if j.history.iter().any(|m| m.round == round) {
            return Err(Error::Validation(format!(
                "line {line}: duplicate row for junction {} round {round}",
                j.junction_id
            )));
        }
        j.history.push(Measurement {
            round,
            resistance_ohm: resistance,
        });
    }

    for j in &mut junctions {
        j.history.sort_by_key(|m| m.round);
        if j.history.len() > 1 {
            j.status = JunctionStatus::Tuned;
        }
    }
    let mut wafer = Wafer::new(wafer_id.unwrap_or_default(), DEFAULT_LAYOUT_REF);
    wafer.junctions = junctions;
    Ok(wafer)
}

/// Result of [`yield_window`].
#[derive(Debug, Clone, PartialEq)]
pub struct YieldPartition {
    pub median_ohm: f64,
    pub in_window: Vec<Junction>,
    pub out_of_spec: Vec<Junction>,
}

/// Splits junctions by latest resistance relative to the collection
/// median; bounds are inclusive.
pub fn yield_window<J: Borrow<Junction>>(
    junctions: &[J],
    low_frac: f64,
    high_frac: f64,
) -> Result<YieldPartition> {
    let latest: Vec<f64> = junctions.iter().map(|j| j.borrow().latest_resistance()).collect();
    let median = stats::median(&latest)
        .ok_or_else(|| Error::Domain("yield window of an empty collection".into()))?;
    let mut in_window = Vec::new();
    let mut out_of_spec = Vec::new();
    for j in junctions {
        let j = j.borrow();
        let ratio = j.latest_resistance() / median;
        if ratio >= low_frac && ratio <= high_frac {
            in_window.push(j.clone());
        } else {
            let mut j = j.clone();
            j.status = JunctionStatus::OutOfSpec;
            out_of_spec.push(j);
        }
    }
    Ok(YieldPartition {
        median_ohm: median,
        in_window,
        out_of_spec,
    })
}

/// Spread of a junction population.
///
/// `sigma_percent` is the coefficient of variation (sample std / mean) of
/// the in-window population, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadStats {
    pub count_total: usize,
    pub count_in_window: usize,
    pub median: f64,
    pub mean: f64,
    pub sigma_percent: f64,
    pub yield_percent: f64,
}

fn coefficient_stats(values: &[f64], total: usize) -> Result<SpreadStats> {
    if values.len() < 2 {
        return Err(Error::Statistics(format!(
            "need at least 2 in-window junctions, have {}",
            values.len()
        )));
    }
    let mean = stats::mean(values).unwrap_or(f64::NAN);
    let std = stats::sample_std(values).unwrap_or(f64::NAN);
    Ok(SpreadStats {
        count_total: total,
        count_in_window: values.len(),
        median: stats::median(values).unwrap_or(f64::NAN),
        mean,
        sigma_percent: 100.0 * std / mean,
        yield_percent: 100.0 * values.len() as f64 / total as f64,
    })
}

/// Spread statistics over the default 80–120 % window.
pub fn spread_stats<J: Borrow<Junction>>(junctions: &[J]) -> Result<SpreadStats> {
    spread_stats_in(junctions, YIELD_LOW_FRAC, YIELD_HIGH_FRAC)
}

pub fn spread_stats_in<J: Borrow<Junction>>(
    junctions: &[J],
    low_frac: f64,
    high_frac: f64,
) -> Result<SpreadStats> {
    if junctions.is_empty() {
        return Err(Error::Statistics("no junctions".into()));
    }
    let part = yield_window(junctions, low_frac, high_frac)?;
    let values: Vec<f64> = part.in_window.iter().map(|j| j.latest_resistance()).collect();
    coefficient_stats(&values, junctions.len())
}

/// Wafer-wide spread across several design groups.
///
/// Each junction is normalised by its own group's median and the yield
/// window is applied per group, so groups targeting different resistances
/// can be pooled. `median` and `mean` of the result are dimensionless
/// ratios to the group medians.
pub fn pooled_spread_stats<J: Borrow<Junction>>(
    junctions: &[J],
    low_frac: f64,
    high_frac: f64,
) -> Result<SpreadStats> {
    if junctions.is_empty() {
        return Err(Error::Statistics("no junctions".into()));
    }
    let mut by_group: BTreeMap<GroupLabel, Vec<f64>> = BTreeMap::new();
    for j in junctions {
        let j = j.borrow();
        by_group.entry(j.group).or_default().push(j.latest_resistance());
    }
    let mut pooled = Vec::new();
    for values in by_group.values() {
        let med = stats::median(values).unwrap_or(f64::NAN);
        pooled.extend(
            values
                .iter()
                .map(|r| r / med)
                .filter(|x| *x >= low_frac && *x <= high_frac),
        );
    }
    coefficient_stats(&pooled, junctions.len())
}

/// Partitions a wafer's junctions by design group.
pub fn group_by_design(wafer: &Wafer) -> BTreeMap<GroupLabel, Vec<&Junction>> {
    let mut out: BTreeMap<GroupLabel, Vec<&Junction>> = BTreeMap::new();
    for j in &wafer.junctions {
        out.entry(j.group).or_default().push(j);
    }
    out
}
