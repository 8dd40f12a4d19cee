use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ctt_core::evaluation::{evaluate, write_solution, Solution};
use ctt_core::formulations::{build_monolithic, encode_solution};
use ctt_core::instance::{parse_ctt, write_ctt, Course, Instance, Room, WeightVector};
use ctt_core::milp::parse_mps;
use ctt_core::solver::{
    brute_force_instance, external_solve, AdapterConfig, SolveConfig, SolveStatus,
};
use ctt_core::testing::{random_instance, Shape, TOY_CTT};
use tempfile::TempDir;

fn ctt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctt"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn put(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_statuses() {
    let dir = TempDir::new().unwrap();
    let good = put(&dir, "toy.ctt", TOY_CTT);
    assert_eq!(code(&ctt(&["validate", &good])), 0);

    let cut = TOY_CTT.find("ROOMS:").unwrap();
    let truncated = put(&dir, "cut.ctt", &TOY_CTT[..cut]);
    let out = ctt(&["validate", &truncated]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let invalid = put(
        &dir,
        "bad.ctt",
        &TOY_CTT.replace("SceCosC Ocra 3 3 30", "SceCosC Ocra 3 9 30"),
    );
    assert_eq!(code(&ctt(&["validate", &invalid])), 1);

    assert_eq!(code(&ctt(&["validate"])), 2);
    assert_eq!(code(&ctt(&["validate", &good, "--no-such-flag"])), 2);
    assert_eq!(code(&ctt(&["validate", "/nonexistent/x.ctt"])), 2);
}

#[test]
fn stats_as_json() {
    let dir = TempDir::new().unwrap();
    let toy = put(&dir, "toy.ctt", TOY_CTT);
    let out = ctt(&["stats", &toy, "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // 3+3+5+5 events over 20 periods and 3 rooms
    assert_eq!(v["events"], 16);
    assert!((v["frequency"].as_f64().unwrap() - 16.0 / 60.0).abs() < 1e-12);
    assert_eq!(v["curricula"], 2);
}

/// One course of two events and 24 students; room A seats 20, room B 30.
fn two_rooms() -> Instance {
    Instance::new(
        "two-rooms",
        vec![Course {
            id: "c".into(),
            teacher: "t".into(),
            events: 2,
            min_days: 1,
            students: 24,
        }],
        vec![
            Room {
                id: "A".into(),
                capacity: 20,
            },
            Room {
                id: "B".into(),
                capacity: 30,
            },
        ],
        Vec::new(),
        1,
        2,
        Default::default(),
        WeightVector::ITC2007,
    )
    .unwrap()
}

#[test]
fn evaluate_prints_objective() {
    let inst = two_rooms();
    let mut sol = Solution::empty(1);
    sol.place(0, 0, 0);
    sol.place(0, 1, 1);
    let dir = TempDir::new().unwrap();
    let i = put(&dir, "i.ctt", &write_ctt(&inst));
    let s = put(&dir, "s.sol", &write_solution(&inst, &sol));
    let out = ctt(&["evaluate", &i, &s, "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // 4 seats short once, two rooms used: 1*4 + 1*1
    assert_eq!(v["penalties"]["capacity"], 4);
    assert_eq!(v["penalties"]["stability"], 1);
    assert_eq!(v["objective"], 5);

    // the brute-force optimum puts both events in B
    let best = brute_force_instance(&inst).unwrap().unwrap();
    assert_eq!(best.objective, 0);

    let clash = put(&dir, "c.sol", "c A 0 0\nc B 0 0\n");
    let out = ctt(&["evaluate", &i, &clash]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("feasible   no"));
}

#[test]
fn built_model_scores_known_solution() {
    let dir = TempDir::new().unwrap();
    for seed in 0..10 {
        let inst = random_instance(seed, &Shape::TINY).with_weights(WeightVector::ITC2007);
        let Some(best) = brute_force_instance(&inst).unwrap() else {
            continue;
        };
        let i = put(&dir, "i.ctt", &write_ctt(&inst));
        let mps = dir.path().join("m.mps");
        let out = ctt(&[
            "build",
            &i,
            "--formulation",
            "monolithic",
            "--no-implied-cuts",
            "-o",
            path(&mps),
        ]);
        assert_eq!(code(&out), 0);
        let model = parse_mps(&fs::read_to_string(&mps).unwrap()).unwrap();
        let reference = build_monolithic(&parse_ctt(&write_ctt(&inst)).unwrap());
        let x = encode_solution(&inst, &reference, &best.solution, None);
        assert!(model.is_feasible(&x), "seed {seed}");
        assert!(
            (model.objective_value(&x) - evaluate(&inst, &best.solution).1 as f64).abs() < 1e-9
        );
    }
}

#[test]
fn dive_needs_a_basis() {
    let dir = TempDir::new().unwrap();
    let toy = put(&dir, "toy.ctt", TOY_CTT);
    assert_eq!(
        code(&ctt(&["build", &toy, "--formulation", "period-fixed"])),
        2
    );
    let inst = parse_ctt(TOY_CTT).unwrap();
    let sol_path = dir.path().join("s.sol");
    let out = ctt(&[
        "solve",
        &toy,
        "--surface-nodes",
        "50",
        "--dive-nodes",
        "50",
        "-o",
        path(&sol_path),
    ]);
    assert_eq!(code(&out), 0);
    for kind in [
        "period-fixed",
        "day-fixed",
        "day-decomp",
        "day-fixed-zero-stability",
    ] {
        let out = ctt(&[
            "build",
            &toy,
            "--formulation",
            kind,
            "--basis",
            path(&sol_path),
        ]);
        assert_eq!(code(&out), 0, "{kind}");
        let model = parse_mps(&stdout(&out)).unwrap();
        assert!(model.num_vars() > 0 && inst.courses.len() == 4);
    }
}

#[test]
fn node_limited_commands_repeat_byte_for_byte() {
    let dir = TempDir::new().unwrap();
    let inst = random_instance(5, &Shape::SMALL);
    let i = put(&dir, "i.ctt", &write_ctt(&inst));
    let run = || {
        let solve = ctt(&[
            "solve",
            &i,
            "--cpu-units",
            "10",
            "--surface-nodes",
            "200",
            "--dive-nodes",
            "100",
            "--total-nodes",
            "800",
            "--format",
            "json",
        ]);
        let build = ctt(&["build", &i, "--formulation", "surface2"]);
        (solve.stdout, build.stdout)
    };
    let a = run();
    assert!(!a.0.is_empty() && !a.1.is_empty());
    assert_eq!(a, run());
}

#[test]
fn solve_reports_infeasible_instances() {
    let dir = TempDir::new().unwrap();
    let text = TOY_CTT
        .replace("TecCos Rosa 5 4 40", "TecCos Rosa 10 4 40")
        .replace("Geotec Scarlatti 5 4 18", "Geotec Scarlatti 11 4 18");
    let bad = put(&dir, "bad.ctt", &text);
    // Cur2 needs 21 distinct periods out of 20
    assert_eq!(code(&ctt(&["validate", &bad])), 0);
    let out = ctt(&[
        "solve",
        &bad,
        "--surface-nodes",
        "100",
        "--dive-nodes",
        "100",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("status       infeasible"));
}

#[test]
fn milp_subcommand_serves_as_external_solver() {
    let dir = TempDir::new().unwrap();
    for seed in 0..10 {
        let inst = random_instance(seed, &Shape::TINY);
        let Some(best) = brute_force_instance(&inst).unwrap() else {
            continue;
        };
        let model = build_monolithic(&inst);
        let adapter = AdapterConfig {
            program: env!("CARGO_BIN_EXE_ctt").into(),
            args: [
                "milp",
                "{mps}",
                "--solution",
                "{solution}",
                "--bound",
                "{bound}",
            ]
            .map(String::from)
            .to_vec(),
            work_dir: dir.path().to_path_buf(),
            solution_file: "out.sol".into(),
            bound_file: Some("out.bound".into()),
        };
        let r = external_solve(&model, &adapter, &SolveConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "seed {seed}");
        assert_eq!(
            r.objective().unwrap().round() as u64,
            best.objective,
            "seed {seed}"
        );
    }
}
