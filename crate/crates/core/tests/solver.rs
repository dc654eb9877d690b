mod common;

use ferry::model::{build_model, fix_experiment, ModelOptions};
use ferry::simulate::brute_force_model;
use ferry::solver::{
    export_mps, read_mps, read_solution, solve_lp, solve_milp, write_solution, BnbConfig, SolveStatus,
};
use ferry::synth::tiny_scenario;
use ferry::FerryError;
use milp::{LpOptions, Problem, Sense};
use proptest::prelude::*;

fn exact() -> BnbConfig {
    BnbConfig {
        rel_gap: 1e-10,
        abs_gap: 1e-10,
        ..BnbConfig::default()
    }
}

#[test]
fn one_variable_lp() {
    let mut p = Problem::new("one");
    let x = p.add_col("x", 0.0, f64::INFINITY, -1.0);
    p.add_row("cap", "cap", &[(x, 1.0)], Sense::Le, 3.0);
    let sol = milp::solve_lp(&p, LpOptions::default()).unwrap();
    assert_eq!(sol.status, milp::LpStatus::Optimal);
    assert!((sol.x[0] - 3.0).abs() < 1e-12 && (sol.objective + 3.0).abs() < 1e-12);

    p.add_row("floor", "floor", &[(x, 1.0)], Sense::Ge, 4.0);
    assert_eq!(milp::solve_lp(&p, LpOptions::default()).unwrap().status, milp::LpStatus::Infeasible);
}

#[test]
fn relaxation_bounds_the_integer_optimum() {
    let m = build_model(&common::hand_tiny(), ModelOptions::default()).unwrap();
    let (lp, _) = solve_lp(&m, LpOptions::default()).unwrap();
    let mip = solve_milp(&m, &exact()).unwrap();
    let brute = brute_force_model(&m, false).unwrap();
    assert_eq!(mip.status, SolveStatus::Optimal);
    assert!(lp.objective <= mip.objective + 1e-9);
    assert!((mip.objective - brute.objective).abs() < 1e-7);
    assert!(mip.bound <= mip.objective + 1e-9);
}

#[test]
fn fixed_binaries_need_a_single_node() {
    let m = build_model(&common::hand_tiny(), ModelOptions::default()).unwrap();
    let best = solve_milp(&m, &exact()).unwrap();
    let mut fixed = m.clone();
    for j in m.problem.binaries().collect::<Vec<_>>() {
        let v = best.get(&m.key(j)).round();
        fixed.problem.cols[j].lower = v;
        fixed.problem.cols[j].upper = v;
    }
    let mip = solve_milp(&fixed, &exact()).unwrap();
    let (lp, _) = solve_lp(&fixed, LpOptions::default()).unwrap();
    assert_eq!(mip.nodes, 1);
    assert!((mip.objective - lp.objective).abs() < 1e-9);
    assert!((mip.objective - best.objective).abs() < 1e-9);
}

#[test]
fn desk_exp4_is_no_worse_than_exp1() {
    let s = common::desk();
    let base = build_model(&s, ModelOptions::default()).unwrap();
    let one = solve_milp(&fix_experiment(&base, 1).unwrap(), &BnbConfig::default()).unwrap();
    let four = solve_milp(&fix_experiment(&base, 4).unwrap(), &BnbConfig::default()).unwrap();
    assert_eq!(one.status, SolveStatus::Optimal);
    assert_eq!(four.status, SolveStatus::Optimal);
    assert!(four.objective <= one.objective);
}

#[test]
fn mps_round_trip_and_markers() {
    let m = build_model(&common::hand_tiny(), ModelOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.mps");
    export_mps(&m, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("'MARKER'") && text.contains("'INTORG'") && text.contains("'INTEND'"));
    let back = read_mps(&path).unwrap();
    let set = |p: &Problem| {
        let mut v: Vec<_> = p
            .triplets
            .iter()
            .map(|&(r, c, a)| (p.rows[r].name.clone(), p.cols[c].name.clone(), a.to_bits()))
            .collect();
        v.sort();
        v
    };
    assert_eq!(set(&m.problem), set(&back));
    let z: Vec<bool> = back.cols.iter().filter(|c| c.name.starts_with("Z[")).map(|c| c.binary).collect();
    assert!(!z.is_empty() && z.iter().all(|&b| b));
    // the re-imported problem solves to the same optimum
    let a = milp::solve_mip(&m.problem, &exact()).unwrap();
    let b = milp::solve_mip(&back, &exact()).unwrap();
    assert!((a.objective - b.objective).abs() < 1e-9);
}

#[test]
fn solution_file_round_trip() {
    let s = common::hand_tiny();
    let m = build_model(&s, ModelOptions::default()).unwrap();
    let sol = solve_milp(&m, &exact()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sol.csv");
    write_solution(&s, &sol, &path).unwrap();
    let back = read_solution(&s, &path).unwrap();
    assert_eq!(back.status, sol.status);
    assert_eq!(back.objective, sol.objective);
    assert_eq!(back.values, sol.values);
    let first = std::fs::read_to_string(&path).unwrap();
    write_solution(&s, &back, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
}

#[test]
fn bad_solution_line_is_reported() {
    let s = common::hand_tiny();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "name,value\n@status,optimal\nE_v_max[V1],ten\n").unwrap();
    match read_solution(&s, &path) {
        Err(FerryError::SolutionFile { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    std::fs::write(&path, "name,value\nE_v_max[V9],1.0\n").unwrap();
    assert!(matches!(read_solution(&s, &path), Err(FerryError::SolutionFile { line: 2, .. })));
}

#[test]
fn zero_node_limit_has_no_incumbent() {
    let s = common::desk();
    let m = fix_experiment(&build_model(&s, ModelOptions::default()).unwrap(), 4).unwrap();
    let cfg = BnbConfig {
        node_limit: Some(0),
        heuristic_interval: 0,
        ..BnbConfig::default()
    };
    let sol = solve_milp(&m, &cfg).unwrap();
    assert_eq!(sol.status, SolveStatus::LimitNoIncumbent);
    assert!(!sol.status.has_point());
    assert_eq!(sol.nodes, 0);
    assert!(sol.values.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_the_objective_keeps_the_optimum(seed in 0u64..500, factor in 0.1f64..20.0) {
        let s = tiny_scenario(seed);
        let m = build_model(&s, ModelOptions::default()).unwrap();
        let a = solve_milp(&m, &exact()).unwrap();
        let mut scaled = m.clone();
        for c in &mut scaled.problem.cols {
            c.cost *= factor;
        }
        let b = solve_milp(&scaled, &exact()).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == SolveStatus::Optimal {
            prop_assert!((b.objective - factor * a.objective).abs() <= 1e-7 * (1.0 + b.objective.abs()));
            let x = b.to_vector(&m);
            let original = m.problem.objective(&x);
            prop_assert!((original - a.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()));
        }
    }

    #[test]
    fn parallel_and_sequential_agree(seed in 0u64..500) {
        let s = tiny_scenario(seed);
        let m = build_model(&s, ModelOptions::default()).unwrap();
        let par = solve_milp(&m, &exact()).unwrap();
        let seq = solve_milp(&m, &BnbConfig { parallel: false, ..exact() }).unwrap();
        prop_assert_eq!(par.status, seq.status);
        prop_assert_eq!(par.values, seq.values);
    }
}
