use milp::{solve_lp, DualSimplex, LpOptions, LpSolution, LpStatus, Problem, Sense};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: f64 = f64::INFINITY;

/// Checks the KKT conditions of an optimal LP solution directly from the
/// problem data.
fn assert_kkt(p: &Problem, sol: &LpSolution, tol: f64) {
    assert_eq!(sol.status, LpStatus::Optimal);
    let x = &sol.x;
    let y = &sol.row_dual;
    assert!(p.max_violation(x) <= tol, "primal violation {}", p.max_violation(x));
    let act = p.activities(x);
    let mut d: Vec<f64> = p.cols.iter().map(|c| c.cost).collect();
    for &(r, c, v) in &p.triplets {
        d[c] -= v * y[r];
    }
    let scale = 1.0 + p.cols.iter().map(|c| c.cost.abs()).fold(0.0, f64::max);
    for (j, c) in p.cols.iter().enumerate() {
        assert!((d[j] - sol.reduced_cost[j]).abs() <= tol * scale, "reduced cost mismatch at {j}");
        let at_lo = (x[j] - c.lower).abs() <= tol;
        let at_hi = (x[j] - c.upper).abs() <= tol;
        if at_lo && at_hi {
            continue;
        }
        if at_lo {
            assert!(d[j] >= -tol * scale, "col {j} at lower with d={}", d[j]);
        } else if at_hi {
            assert!(d[j] <= tol * scale, "col {j} at upper with d={}", d[j]);
        } else {
            assert!(d[j].abs() <= tol * scale, "interior col {j} with d={}", d[j]);
        }
    }
    for (i, r) in p.rows.iter().enumerate() {
        let active = (act[i] - r.rhs).abs() <= tol * (1.0 + r.rhs.abs());
        match r.sense {
            Sense::Le => assert!(y[i] <= tol * scale, "Le row {i} dual {}", y[i]),
            Sense::Ge => assert!(y[i] >= -tol * scale, "Ge row {i} dual {}", y[i]),
            Sense::Eq => {}
        }
        if !active {
            assert!(y[i].abs() <= tol * scale, "slack row {i} with dual {}", y[i]);
        }
    }
    assert!((p.objective(x) - sol.objective).abs() <= tol * (1.0 + sol.objective.abs()));
}

#[test]
fn textbook_maximization() {
    let mut p = Problem::new("t");
    let x = p.add_col("x", 0.0, INF, -3.0);
    let y = p.add_col("y", 0.0, INF, -5.0);
    p.add_row("a", "", &[(x, 1.0)], Sense::Le, 4.0);
    p.add_row("b", "", &[(y, 2.0)], Sense::Le, 12.0);
    p.add_row("c", "", &[(x, 3.0), (y, 2.0)], Sense::Le, 18.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_kkt(&p, &sol, 1e-9);
    assert!((sol.objective + 36.0).abs() < 1e-9);
    assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
}

#[test]
fn equality_and_free_columns() {
    // min x + 2y  s.t. x + y = 3, x - y >= -1, y free, x free
    let mut p = Problem::new("t");
    let x = p.add_col("x", -INF, INF, 1.0);
    let y = p.add_col("y", -INF, INF, 2.0);
    p.add_row("e", "", &[(x, 1.0), (y, 1.0)], Sense::Eq, 3.0);
    p.add_row("g", "", &[(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_kkt(&p, &sol, 1e-8);
    // y = 1, x = 2 minimizes x + 2y along x + y = 3 with x - y <= 1
    assert!((sol.objective - 4.0).abs() < 1e-8, "{}", sol.objective);
}

#[test]
fn detects_infeasibility() {
    let mut p = Problem::new("t");
    let x = p.add_col("x", 0.0, 10.0, 1.0);
    let y = p.add_col("y", 0.0, 10.0, 1.0);
    p.add_row("a", "", &[(x, 1.0), (y, 1.0)], Sense::Ge, 5.0);
    p.add_row("b", "", &[(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
}

#[test]
fn detects_unboundedness() {
    let mut p = Problem::new("t");
    let x = p.add_col("x", 0.0, INF, -1.0);
    let y = p.add_col("y", 0.0, INF, 0.0);
    p.add_row("a", "", &[(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
}

#[test]
fn bounds_only_problem() {
    let mut p = Problem::new("t");
    p.add_col("a", -2.0, 3.0, 1.0);
    p.add_col("b", -2.0, 3.0, -1.0);
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert_eq!(sol.x, vec![-2.0, 3.0]);
    assert_eq!(sol.objective, -5.0);
}

#[test]
fn degenerate_assignment_lp() {
    // 6x6 assignment relaxation with many ties
    let n = 6;
    let mut p = Problem::new("assign");
    let mut idx = vec![vec![0; n]; n];
    for (i, row) in idx.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = p.add_col(format!("x{i}_{j}"), 0.0, 1.0, ((i + j) % 3) as f64);
        }
    }
    for (i, row) in idx.iter().enumerate() {
        let t: Vec<_> = row.iter().map(|&c| (c, 1.0)).collect();
        p.add_row(format!("r{i}"), "", &t, Sense::Eq, 1.0);
        let t: Vec<_> = (0..n).map(|j| (idx[j][i], 1.0)).collect();
        p.add_row(format!("c{i}"), "", &t, Sense::Eq, 1.0);
    }
    let sol = solve_lp(&p, LpOptions::default()).unwrap();
    assert_kkt(&p, &sol, 1e-8);
    assert!(sol.objective.abs() < 1e-9);
}

fn random_lp(seed: u64, m: usize, n: usize) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Problem::new("rand");
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    for (j, &v) in x0.iter().enumerate() {
        let (lo, hi) = match rng.random_range(0..4) {
            0 => (v - rng.random_range(0.0..3.0), v + rng.random_range(0.0..3.0)),
            1 => (v - rng.random_range(0.0..3.0), INF),
            2 => (-INF, v + rng.random_range(0.0..3.0)),
            _ => (v.floor() - 1.0, v.ceil() + 1.0),
        };
        p.add_col(format!("x{j}"), lo, hi, rng.random_range(-4.0..4.0));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.4) {
                let mag = 10f64.powf(rng.random_range(-2.0..2.0));
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                terms.push((j, sign * mag));
            }
        }
        let act: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.random_range(0..3) {
            0 => (Sense::Le, act + rng.random_range(0.0..2.0)),
            1 => (Sense::Ge, act - rng.random_range(0.0..2.0)),
            _ => (Sense::Eq, act),
        };
        p.add_row(format!("r{i}"), "", &terms, sense, rhs);
    }
    // every column gets a finite bound in its improving direction
    for c in p.cols.iter_mut() {
        if c.lower == -INF && c.cost > 0.0 {
            c.lower = -50.0;
        }
        if c.upper == INF && c.cost < 0.0 {
            c.upper = 50.0;
        }
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_feasible_lps_satisfy_kkt(seed in any::<u64>(), m in 1usize..25, n in 1usize..25) {
        let p = random_lp(seed, m, n);
        let sol = solve_lp(&p, LpOptions::default()).unwrap();
        assert_kkt(&p, &sol, 1e-6);
    }

    #[test]
    fn larger_random_lps_satisfy_kkt(seed in any::<u64>(), m in 40usize..90, n in 40usize..90) {
        let p = random_lp(seed, m, n);
        let sol = solve_lp(&p, LpOptions::default()).unwrap();
        assert_kkt(&p, &sol, 1e-6);
    }

    #[test]
    fn warm_start_matches_cold_start(seed in any::<u64>(), m in 2usize..20, n in 2usize..20, col in 0usize..20) {
        let p = random_lp(seed, m, n);
        let mut lp = DualSimplex::new(&p, LpOptions::default());
        let first = lp.solve();
        prop_assume!(first.status == LpStatus::Optimal);
        let j = col % n;
        let v = first.x[j];
        let (lo, hi) = lp.col_bounds(j);
        let new_hi = (v - 0.5).max(lo);
        lp.set_col_bounds(j, lo, new_hi);
        let basis = lp.basis();
        lp.load_basis(&basis);
        let warm = lp.solve();

        let mut q = p.clone();
        q.cols[j].upper = new_hi;
        let _ = hi;
        let cold = solve_lp(&q, LpOptions::default()).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective - cold.objective).abs() <= 1e-6 * (1.0 + cold.objective.abs()));
            assert_kkt(&q, &warm, 1e-6);
        }
    }
}
