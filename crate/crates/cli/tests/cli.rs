use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vsaplace_core::{evaluate, CostModel, PlacementPlan, ProblemFile, SolveStatus};

const CHAIN: &str = "3 1 5\nsources: 0\ndestinations: 2\n0 1 1\n1 2 1\n";

fn vsaplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsaplace"))
        .args(args)
        .output()
        .expect("run vsaplace")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_chain() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", CHAIN);
    let out = vsaplace(&["solve", chain.to_str().unwrap(), "--seed", "1", "--sm-cost", "500", "--penalty", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "SM 1 1\nCOST 502\nBREAKDOWN 500 2 0\nFLOW 0 2 0-1-2\n");
}

#[test]
fn oracle_matches_solve_on_chain() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", CHAIN);
    let chain = chain.to_str().unwrap();
    let solve = vsaplace(&["solve", chain, "--seed", "1", "--format", "json"]);
    let oracle = vsaplace(&["oracle", chain, "--sm-cost", "500", "--penalty", "1000", "--format", "json"]);
    let by_count = vsaplace(&["oracle", chain, "--by-count", "--format", "json"]);
    let costs: Vec<f64> = [solve, oracle, by_count]
        .iter()
        .map(|o| {
            assert_eq!(o.status.code(), Some(0));
            PlacementPlan::from_json(&stdout(o)).unwrap().global_cost
        })
        .collect();
    assert_eq!(costs, vec![502.0; 3]);
}

#[test]
fn infeasible_instance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", &CHAIN.replacen("3 1 5", "3 2 5", 1));
    for cmd in ["solve", "oracle"] {
        let out = vsaplace(&[cmd, chain.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        let text = stdout(&out);
        assert!(text.starts_with("STATUS NO_FEASIBLE_SOLUTION\n"), "{text}");
        assert!(!text.contains("SM "));
    }
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(dir.path(), "chain.txt", CHAIN);
    let chain = chain.to_str().unwrap();
    let bad = write(dir.path(), "bad.txt", "3 1 5\nsources: 0\n0 1 1\n");

    let out = vsaplace(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    for args in [
        vec!["solve", "/no/such/file"],
        vec!["solve", chain, "--sm-cost", "1", "--sm-cost", "2"],
        vec!["solve", chain, "--population", "1"],
        vec!["oracle", chain, "--budget", "3"],
        vec!["solve", chain, "--no-such-flag"],
        vec!["gen", "fat-tree", "--k", "3"],
    ] {
        let out = vsaplace(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn gen_fat_tree() {
    let out = vsaplace(&["gen", "fat-tree", "--k", "4", "--weight", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let file = ProblemFile::parse(&stdout(&out)).unwrap();
    assert_eq!(file.node_count, 36);
    assert_eq!(file.sources.iter().map(|n| n.0).collect::<Vec<_>>(), (0..8).collect::<Vec<_>>());
    assert_eq!(file.destinations.iter().map(|n| n.0).collect::<Vec<_>>(), (8..16).collect::<Vec<_>>());
    assert_eq!(file.edges.len(), 48);
}

#[test]
fn gen_random_is_seeded() {
    let args = ["gen", "random", "--nodes", "12", "--edge-prob", "0.3", "--weight-min", "1", "--weight-max", "10", "--seed", "5"];
    let a = vsaplace(&args);
    let b = vsaplace(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let file = ProblemFile::parse(&stdout(&a)).unwrap();
    assert_eq!((file.node_count, file.sources.len(), file.destinations.len()), (12, 1, 1));
    assert!(file.edges.iter().all(|e| (1.0..=10.0).contains(&e.weight)));
}

#[test]
fn plan_written_to_file_re_evaluates() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("ft.txt");
    let plan_path = dir.path().join("plan.json");
    let gen = vsaplace(&["gen", "fat-tree", "--k", "4", "--types", "2", "--evolutions", "3", "--out", problem.to_str().unwrap()]);
    assert_eq!(gen.status.code(), Some(0));
    let out = vsaplace(&[
        "solve",
        problem.to_str().unwrap(),
        "--seed",
        "3",
        "--evolutions",
        "4",
        "--sm-cost",
        "300",
        "--sm-cost",
        "200",
        "--max-unanalyzed",
        "64",
        "--format",
        "json",
        "--out",
        plan_path.to_str().unwrap(),
    ]);
    assert!(out.stdout.is_empty());
    let plan = PlacementPlan::from_json(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(out.status.code(), Some(if plan.status() == SolveStatus::Solved { 0 } else { 2 }));
    assert_eq!(plan.metadata.generations_run, Some(4));

    let inst = ProblemFile::parse(&fs::read_to_string(&problem).unwrap()).unwrap().instance().unwrap();
    let model = CostModel {
        sm_cost: vec![300.0, 200.0],
        max_unanalyzed: 64,
        ..CostModel::uniform(2, 0.0, CostModel::DEFAULT_PENALTY)
    };
    assert_eq!(plan.metadata.cost_model, model);
    let e = evaluate(&inst, &plan.placement(36).unwrap(), &model).unwrap();
    assert_eq!(e.fitness, plan.global_cost);
}

#[test]
fn bench_csv() {
    let out = vsaplace(&["bench", "--sizes", "10", "--max-types", "2", "--seeds", "2", "--no-fat-tree"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "topology,n,T,evolutions,seed,status,best_fitness,wall_ms");
    assert_eq!(lines.len(), 1 + 2 * 2);
    assert!(lines[1].starts_with("random,10,1,5,1,"));
}

#[test]
fn in_process_help_and_version_succeed() {
    assert_eq!(vsaplace_cli::run(["vsaplace", "--version"]), 0);
    assert_eq!(vsaplace_cli::run(["vsaplace", "bogus"]), 1);
}
