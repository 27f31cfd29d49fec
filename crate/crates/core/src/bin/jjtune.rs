// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Exit codes: 0 ok, 2 validation, 3 planning, 4 I/O.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use jjtune::collision::{wafer_collision_map, CollisionParams, CollisionType, QpuLayout};
use jjtune::dose::DoseResponseModel;
use jjtune::error::{Error, Result};
use jjtune::physics::TransmonModel;
use jjtune::planner::{plan_round, CampaignConfig, Strategy, TunePlan};
use jjtune::report::emit_reports;
use jjtune::sim::{apply_plan, generate_wafer, run_campaign, WaferSpec};
use jjtune::wafer::{group_by_design, pooled_spread_stats, spread_stats, Wafer, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "jjtune", version, about = "Josephson-junction frequency tuning planner and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Transmon parameters (JSON); built-in defaults otherwise.
    #[arg(long)]
    physics: Option<PathBuf>,
    /// QPU layout (JSON); the default 8-qubit ring otherwise.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Collision parameters (JSON).
    #[arg(long, alias = "collision-params")]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic wafer from a spec.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spread and yield statistics of a wafer.
    Stats {
        #[arg(long)]
        wafer: PathBuf,
        #[arg(long)]
        by_group: bool,
    },
    /// Per-die collision counts of a wafer.
    Collisions {
        #[arg(long)]
        wafer: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        include_s1: bool,
    },
    /// Plan the next tuning round.
    Plan {
        #[arg(long)]
        wafer: PathBuf,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        dose_model: Option<PathBuf>,
        /// Campaign config supplying targets, weights and search budget.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a plan with the stochastic anneal model.
    Apply {
        #[arg(long)]
        wafer: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        dose_model: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full campaign and write the report directory.
    #[command(group(ArgGroup::new("input").required(true).args(["spec", "wafer"])))]
    Campaign {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        wafer: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        dose_model: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Collisions of a die with every qubit exactly on target.
    ZeroSpread {
        #[command(flatten)]
        model: ModelArgs,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn read_or_default<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> Result<T> {
    path.map_or_else(|| Ok(T::default()), |p| read_json(p))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

impl ModelArgs {
    fn load(&self) -> Result<(TransmonModel, QpuLayout, CollisionParams)> {
        let physics: TransmonModel = read_or_default(self.physics.as_ref())?;
        let layout: QpuLayout = read_or_default(self.layout.as_ref())?;
        let params: CollisionParams = read_or_default(self.params.as_ref())?;
        layout.validate()?;
        params.validate()?;
        Ok((physics, layout, params))
    }
}

fn dose_model(path: Option<&PathBuf>) -> Result<DoseResponseModel> {
    let m: DoseResponseModel = read_or_default(path)?;
    m.validate()?;
    Ok(m)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { spec, out } => {
            let spec: WaferSpec = read_json(&spec)?;
            let wafer = generate_wafer(&spec)?;
            wafer.save(&out)?;
            eprintln!("wrote {} junctions to {}", wafer.junctions.len(), out.display());
        }
        Command::Stats { wafer, by_group } => {
            let wafer = Wafer::load(&wafer)?;
            let mut out = json!({
                "schema_version": SCHEMA_VERSION,
                "wafer_id": wafer.wafer_id,
                "overall": pooled_spread_stats(&wafer.junctions, 0.8, 1.2)?,
            });
            if by_group {
                let mut groups = serde_json::Map::new();
                for (g, members) in group_by_design(&wafer) {
                    groups.insert(g.to_string(), serde_json::to_value(spread_stats(&members)?)?);
                }
                out["by_group"] = groups.into();
            }
            print_json(&out)?;
        }
        Command::Collisions {
            wafer,
            model,
            include_s1,
        } => {
            let wafer = Wafer::load(&wafer)?;
            let (physics, layout, params) = model.load()?;
            let map = wafer_collision_map(&wafer, &layout, &params, &physics)?;
            let count = |r: &jjtune::CollisionReport| {
                if include_s1 {
                    r.total()
                } else {
                    r.total() - r.count(CollisionType::S1)
                }
            };
            let mut histogram = std::collections::BTreeMap::new();
            let dies: Vec<_> = map
                .dies
                .iter()
                .map(|d| {
                    *histogram.entry(count(&d.report)).or_insert(0usize) += 1;
                    json!({
                        "row": d.die.row,
                        "col": d.die.col,
                        "collisions": count(&d.report),
                        "per_type_counts": d.report.per_type_counts,
                        "flagged_qubits": d.flagged_qubits,
                    })
                })
                .collect();
            print_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "include_s1": include_s1,
                "dies": dies,
                "skipped_dies": map.skipped_dies,
                "histogram": histogram,
            }))?;
        }
        Command::Plan {
            wafer,
            strategy,
            dose_model: model_path,
            config,
            model,
            out,
        } => {
            let wafer = Wafer::load(&wafer)?;
            let dose = dose_model(model_path.as_ref())?;
            let (physics, layout, params) = model.load()?;
            let mut cfg: CampaignConfig = read_or_default(config.as_ref())?;
            cfg.strategy = strategy;
            cfg.validate()?;
            let round = wafer.junctions.iter().map(|j| j.latest_round()).max().unwrap_or(0) + 1;
            let plan = plan_round(&wafer, round, &cfg, &dose, &layout, &params, &physics)?;
            write_text(&out, &plan.to_json()?)?;
            eprintln!(
                "round {round}: {} junctions, {} shots, {} partially tunable",
                plan.entries.len(),
                plan.total_shots(),
                plan.partially_tunable.len()
            );
        }
        Command::Apply {
            wafer,
            plan,
            dose_model: model_path,
            seed,
            out,
        } => {
            let wafer = Wafer::load(&wafer)?;
            let text = fs::read_to_string(&plan).map_err(|e| Error::Io { path: plan, source: e })?;
            let plan = TunePlan::from_json(&text)?;
            let dose = dose_model(model_path.as_ref())?;
            apply_plan(&wafer, &plan, &dose, seed)?.save(&out)?;
        }
        Command::Campaign {
            spec,
            wafer,
            config,
            dose_model: model_path,
            model,
            out_dir,
        } => {
            let cfg: CampaignConfig = read_or_default(config.as_ref())?;
            let dose = dose_model(model_path.as_ref())?;
            let (mut physics, mut layout, params) = model.load()?;
            let wafer = match (spec, wafer) {
                (Some(spec), _) => {
                    let spec: WaferSpec = read_json(&spec)?;
                    if model.layout.is_none() {
                        layout = spec.layout.clone();
                    }
                    if model.physics.is_none() {
                        physics = spec.physics;
                    }
                    generate_wafer(&spec)?
                }
                (None, Some(w)) => Wafer::load(&w)?,
                (None, None) => unreachable!("clap requires one input"),
            };
            let report = run_campaign(&wafer, &cfg, &dose, &layout, &params, &physics)?;
            emit_reports(&report, &out_dir)?;
            println!(
                "rounds {}  sigma {:.3} % -> {:.3} %  yield {:.2} % -> {:.2} %  collisions {} -> {}",
                report.rounds_executed,
                report.initial.sigma_percent,
                report.final_stats.sigma_percent,
                report.initial.yield_percent,
                report.final_stats.yield_percent,
                report.per_round[0].collision_map.iter().map(|d| d.collisions).sum::<usize>(),
                report.final_round().collision_map.iter().map(|d| d.collisions).sum::<usize>(),
            );
        }
        Command::ZeroSpread { model } => {
            let (_, layout, params) = model.load()?;
            let report = jjtune::zero_spread_assessment(&layout, &params);
            print!("{}", report.to_json()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
