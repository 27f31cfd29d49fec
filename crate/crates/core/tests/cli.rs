// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jjtune::planner::{CampaignConfig, GroupTarget, Strategy, TunePlan};
use jjtune::sim::{DieGrid, WaferSpec};
use jjtune::wafer::Wafer;

fn jjtune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jjtune"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = jjtune(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    jjtune(args).status.code().unwrap()
}

fn write_spec(dir: &Path) -> String {
    let spec = WaferSpec {
        dies: DieGrid { rows: 2, cols: 2 },
        max_dies: None,
        seed: 9,
        ..WaferSpec::default()
    };
    let p = dir.join("spec.json");
    fs::write(&p, serde_json::to_string_pretty(&spec).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name).to_str().unwrap().to_owned();
    let spec = write_spec(tmp.path());

    ok(&["gen", "--spec", &spec, "--out", &d("wafer.json")]);
    let wafer = Wafer::load(Path::new(&d("wafer.json"))).unwrap();
    assert_eq!(wafer.junctions.len(), 32);

    ok(&["gen", "--spec", &spec, "--out", &d("wafer.csv")]);
    let csv = Wafer::load(Path::new(&d("wafer.csv"))).unwrap();
    assert_eq!(csv.junctions.len(), 32);

    let stats: serde_json::Value = serde_json::from_str(&ok(&["stats", "--wafer", &d("wafer.json"), "--by-group"])).unwrap();
    assert_eq!(stats["schema_version"], 1);
    assert_eq!(stats["by_group"].as_object().unwrap().len(), 3);

    let col: serde_json::Value = serde_json::from_str(&ok(&["collisions", "--wafer", &d("wafer.json")])).unwrap();
    let with_s1: serde_json::Value =
        serde_json::from_str(&ok(&["collisions", "--wafer", &d("wafer.json"), "--include-s1"])).unwrap();
    assert_eq!(col["dies"].as_array().unwrap().len(), 4);
    let total = |v: &serde_json::Value| -> u64 {
        v["dies"].as_array().unwrap().iter().map(|d| d["collisions"].as_u64().unwrap()).sum()
    };
    assert!(total(&with_s1) >= total(&col));

    for strategy in ["ensemble", "targeted", "collision-aware"] {
        let plan_path = d(&format!("plan-{strategy}.json"));
        ok(&["plan", "--wafer", &d("wafer.json"), "--strategy", strategy, "--out", &plan_path]);
        let plan = TunePlan::from_json(&fs::read_to_string(&plan_path).unwrap()).unwrap();
        assert_eq!(plan.round, 1);
        assert_eq!(plan.strategy.to_string(), strategy);
    }

    ok(&[
        "apply", "--wafer", &d("wafer.json"), "--plan", &d("plan-targeted.json"), "--seed", "3", "--out",
        &d("wafer2.json"),
    ]);
    let after = Wafer::load(Path::new(&d("wafer2.json"))).unwrap();
    assert!(after.junctions.iter().all(|j| j.history.len() == 2));

    let summary = ok(&["campaign", "--wafer", &d("wafer.json"), "--out-dir", &d("reports")]);
    assert!(summary.contains("sigma"));
    let report = jjtune::CampaignReport::from_json(&fs::read_to_string(d("reports/campaign.json")).unwrap()).unwrap();
    assert_eq!(report.to_json().unwrap(), fs::read_to_string(d("reports/campaign.json")).unwrap());
    for f in ["collision_histogram.csv", "shift_scatter.csv", "collision_map_round0.svg", "hist_group1_round0.csv"] {
        assert!(tmp.path().join("reports").join(f).exists(), "{f}");
    }

    let zs: serde_json::Value = serde_json::from_str(&ok(&["zero-spread"])).unwrap();
    assert_eq!(zs["total_excluding_s1"], 0);
    assert_eq!(zs["per_type_counts"]["S1"], 8);
}

#[test]
fn explicit_model_files_are_read() {
    let tmp = tempfile::tempdir().unwrap();
    let layout = tmp.path().join("layout.json");
    let params = tmp.path().join("params.json");
    fs::write(&layout, serde_json::to_string(&jjtune::QpuLayout::default()).unwrap()).unwrap();
    fs::write(&params, serde_json::to_string(&jjtune::CollisionParams::default()).unwrap()).unwrap();
    let out = ok(&["zero-spread", "--layout", layout.to_str().unwrap(), "--params", params.to_str().unwrap()]);
    assert!(out.contains("\"S1\": 8"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = |name: &str| tmp.path().join(name).to_str().unwrap().to_owned();
    let spec = write_spec(tmp.path());
    ok(&["gen", "--spec", &spec, "--out", &d("wafer.json")]);

    // missing input file
    assert_eq!(code(&["stats", "--wafer", &d("absent.json")]), 4);
    // unwritable output
    assert_eq!(code(&["gen", "--spec", &spec, "--out", &d("no/such/dir/w.json")]), 4);

    // malformed JSON and bad values
    fs::write(d("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&["gen", "--spec", &d("bad.json"), "--out", &d("x.json")]), 2);
    fs::write(d("neg.json"), r#"{"rel_sigma_percent": -1.0}"#).unwrap();
    assert_eq!(code(&["gen", "--spec", &d("neg.json"), "--out", &d("x.json")]), 2);
    fs::write(d("bad.csv"), "junction_id,oops\n").unwrap();
    assert_eq!(code(&["stats", "--wafer", &d("bad.csv")]), 2);
    assert_eq!(code(&["plan", "--wafer", &d("wafer.json"), "--strategy", "greedy", "--out", &d("p.json")]), 2);

    // target below the group median cannot be reached by annealing
    let cfg = CampaignConfig {
        strategy: Strategy::TargetedInverse,
        group_targets: [(1, GroupTarget::Ohm(1000.0))].into_iter().collect(),
        ..CampaignConfig::default()
    };
    fs::write(d("cfg.json"), serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(
        code(&["plan", "--wafer", &d("wafer.json"), "--strategy", "targeted", "--config", &d("cfg.json"), "--out", &d("p.json")]),
        3
    );

    // plan naming a junction the wafer does not have
    let mut plan = TunePlan::empty(1, Strategy::TargetedInverse);
    plan.entries.push(jjtune::planner::PlanEntry {
        junction_id: "r99c99q0".into(),
        shots: 2,
        placement: jjtune::BeamPlacement::centered(),
    });
    fs::write(d("plan.json"), plan.to_json().unwrap()).unwrap();
    assert_eq!(code(&["apply", "--wafer", &d("wafer.json"), "--plan", &d("plan.json"), "--out", &d("w2.json")]), 2);
}
