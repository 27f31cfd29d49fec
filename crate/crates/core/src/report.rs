// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Report files for a campaign.
//!
//! `emit_reports` writes into one directory:
//!
//! | file                           | content                                   |
//! |--------------------------------|-------------------------------------------|
//! | `hist_group{g}_round{r}.csv`   | resistance histogram, `R / group median`  |
//! | `collision_map_round{r}.json`  | per-die collision counts on the die grid  |
//! | `collision_map_round{r}.svg`   | the same grid as a heat map               |
//! | `collision_histogram.csv`      | dies per collision count, every round     |
//! | `shift_scatter.csv`            | initial vs final resistance per junction  |
//! | `campaign.json`                | the full [`CampaignReport`]               |
//!
//! Collision counts exclude S1. Output depends only on the report, so
//! emitting the same report twice gives identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{CampaignReport, RoundSummary};
use crate::wafer::SCHEMA_VERSION;

/// Heat-map colours: `(min collisions, colour)`, first match from the end.
pub const COLOR_SCALE: [(usize, &str); 5] = [
    (0, "#2e7d32"),
    (1, "#f9d71c"),
    (2, "#f57c00"),
    (3, "#d32f2f"),
    (5, "#6a1b1b"),
];
pub const MISSING_DIE_COLOR: &str = "#e0e0e0";
const CELL_PX: i32 = 24;

pub fn color_for(collisions: usize) -> &'static str {
    COLOR_SCALE
        .iter()
        .rev()
        .find(|(min, _)| collisions >= *min)
        .map_or(COLOR_SCALE[0].1, |(_, c)| c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ScaleStep {
    min_collisions: usize,
    color: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CollisionGrid {
    schema_version: u32,
    round: u32,
    row_min: i32,
    col_min: i32,
    /// `grid[row - row_min][col - col_min]`, `null` where there is no die.
    grid: Vec<Vec<Option<usize>>>,
    color_scale: Vec<ScaleStep>,
    missing_die_color: &'static str,
}

fn collision_grid(round: &RoundSummary) -> CollisionGrid {
    let rows = round.collision_map.iter().map(|d| d.row);
    let cols = round.collision_map.iter().map(|d| d.col);
    let (row_min, row_max) = (rows.clone().min().unwrap_or(0), rows.max().unwrap_or(-1));
    let (col_min, col_max) = (cols.clone().min().unwrap_or(0), cols.max().unwrap_or(-1));
    let mut grid = vec![vec![None; (col_max - col_min + 1) as usize]; (row_max - row_min + 1) as usize];
    for d in &round.collision_map {
        grid[(d.row - row_min) as usize][(d.col - col_min) as usize] = Some(d.collisions);
    }
    CollisionGrid {
        schema_version: SCHEMA_VERSION,
        round: round.round,
        row_min,
        col_min,
        grid,
        color_scale: COLOR_SCALE
            .iter()
            .map(|(m, c)| ScaleStep {
                min_collisions: *m,
                color: c,
            })
            .collect(),
        missing_die_color: MISSING_DIE_COLOR,
    }
}

/// Heat grid of per-die collision counts, one `rect` per grid cell.
pub fn collision_svg(round: &RoundSummary) -> String {
    let g = collision_grid(round);
    let rows = g.grid.len() as i32;
    let cols = g.grid.first().map_or(0, |r| r.len()) as i32;
    let (w, h) = (cols * CELL_PX, rows * CELL_PX);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, "<title>collisions excluding S1, round {}</title>", g.round);
    for (r, row) in g.grid.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let (x, y) = (c as i32 * CELL_PX, r as i32 * CELL_PX);
            let fill = cell.map_or(MISSING_DIE_COLOR, color_for);
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL_PX}" height="{CELL_PX}" fill="{fill}" stroke="#ffffff"/>"##
            );
            if let Some(n) = cell {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" font-family="sans-serif">{n}</text>"#,
                    x + CELL_PX / 2,
                    y + CELL_PX / 2 + 4
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes every report file into `out_dir`, creating it if needed.
/// Returns the written paths in a fixed order.
pub fn emit_reports(report: &CampaignReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let bins = report.histogram_bins;

    for round in &report.per_round {
        for (g, counts) in &round.group_histograms {
            let mut csv = String::from("bin_low,bin_high,count\n");
            for (i, n) in counts.iter().enumerate() {
                let lo = bins.low + i as f64 * bins.width;
                let _ = writeln!(csv, "{:.3},{:.3},{n}", lo, lo + bins.width);
            }
            written.push(write(out_dir, &format!("hist_group{g}_round{}.csv", round.round), &csv)?);
        }
        let mut grid = serde_json::to_string_pretty(&collision_grid(round))?;
        grid.push('\n');
        written.push(write(out_dir, &format!("collision_map_round{}.json", round.round), &grid)?);
        written.push(write(
            out_dir,
            &format!("collision_map_round{}.svg", round.round),
            &collision_svg(round),
        )?);
    }

    let mut hist = String::from("round,collisions,dies\n");
    for round in &report.per_round {
        for (k, n) in &round.collision_histogram {
            let _ = writeln!(hist, "{},{k},{n}", round.round);
        }
    }
    written.push(write(out_dir, "collision_histogram.csv", &hist)?);

    let mut scatter = String::from("junction_id,group,initial_ohm,final_ohm,shift_ohm,tuned\n");
    for s in &report.shifts {
        let _ = writeln!(
            scatter,
            "{},{},{},{},{},{}",
            s.junction_id,
            s.group,
            s.initial_ohm,
            s.final_ohm,
            s.final_ohm - s.initial_ohm,
            s.tuned
        );
    }
    written.push(write(out_dir, "shift_scatter.csv", &scatter)?);
    written.push(write(out_dir, "campaign.json", &report.to_json()?)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::DieCount;
    use std::collections::BTreeMap;

    fn round_with(cells: Vec<DieCount>) -> RoundSummary {
        RoundSummary {
            round: 0,
            sigma_percent_overall: 0.0,
            sigma_percent_by_group: BTreeMap::new(),
            yield_percent: 100.0,
            collision_histogram: BTreeMap::new(),
            collision_map: cells,
            group_histograms: BTreeMap::new(),
            planned_junctions: 0,
            total_shots: 0,
        }
    }

    #[test]
    fn one_die_gives_one_cell() {
        let svg = collision_svg(&round_with(vec![DieCount {
            row: 3,
            col: 5,
            collisions: 2,
        }]));
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(color_for(2)));
    }

    #[test]
    fn gaps_in_the_grid_are_grey() {
        let svg = collision_svg(&round_with(vec![
            DieCount { row: 0, col: 0, collisions: 0 },
            DieCount { row: 1, col: 1, collisions: 7 },
        ]));
        assert_eq!(svg.matches("<rect").count(), 4);
        assert_eq!(svg.matches(MISSING_DIE_COLOR).count(), 2);
    }

    #[test]
    fn colour_scale_steps() {
        assert_eq!(color_for(0), "#2e7d32");
        assert_eq!(color_for(4), "#d32f2f");
        assert_eq!(color_for(40), "#6a1b1b");
    }
}
