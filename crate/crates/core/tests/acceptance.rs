//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ferry::harness::{emit_report, run_experiments, ExperimentResult, HarnessConfig};
use ferry::linearize::{consumption, envelope_value, secant_envelope, travel_options};
use ferry::model::{build_model, fix_experiment, LinearizationMode, ModelOptions, VarKey, VarKind};
use ferry::scenario::{load_scenario, Leg, Scenario, TimeGrid, Vessel};
use ferry::simulate::{brute_force_model, check, compare_with_solver, recompute_cost, replay};
use ferry::solver::{export_mps, read_mps, solve_milp, BnbConfig, Solution, SolveStatus};
use ferry::synth::{random_scenario, tiny_scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn desk() -> Scenario {
    load_scenario(desk_dir()).expect("desk bundle loads")
}

fn desk_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../bundles/ba_co_desk")
}

fn exact() -> BnbConfig {
    BnbConfig {
        rel_gap: 1e-9,
        abs_gap: 1e-10,
        ..BnbConfig::default()
    }
}

fn harness(model: ModelOptions) -> HarnessConfig {
    HarnessConfig {
        bnb: exact(),
        model,
        ..HarnessConfig::default()
    }
}

type Verdict = Result<String, String>;

/// Cost agreement and zero violations for one optimal solution.
fn agreement(s: &Scenario, sol: &Solution, what: &str) -> Result<f64, String> {
    let trace = replay(s, sol);
    let mut v = check(&trace, s, 1e-6);
    v.extend(compare_with_solver(&trace, s, sol, 1e-6));
    if let Some(first) = v.first() {
        return Err(format!("{what}: {} violation(s), first: {first}", v.len()));
    }
    let total = recompute_cost(&trace, s).total;
    let rel = (total - sol.objective).abs() / sol.objective.abs().max(1.0);
    if rel > 1e-6 {
        return Err(format!("{what}: recomputed {total} vs objective {}", sol.objective));
    }
    Ok(rel)
}

struct Shared {
    desk: Scenario,
    desk_ladder: Vec<ExperimentResult>,
    desk_elapsed: Duration,
    random_ladders: Vec<(Scenario, Vec<ExperimentResult>)>,
    tiny: Vec<(Scenario, Solution)>,
}

fn criterion_1(shared: &mut Shared) -> Verdict {
    let mut feasible = 0;
    let mut slowest = 0.0f64;
    let mut worst = 0.0f64;
    for seed in 0..24u64 {
        let s = tiny_scenario(seed);
        let m = build_model(&s, ModelOptions::default()).map_err(|e| e.to_string())?;
        let t0 = Instant::now();
        let a = solve_milp(&m, &exact()).map_err(|e| e.to_string())?;
        let b = brute_force_model(&m, true).map_err(|e| e.to_string())?;
        let secs = t0.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        if secs >= 10.0 {
            return Err(format!("seed {seed}: {secs:.1} s"));
        }
        match (a.status, b.status) {
            (SolveStatus::Optimal, SolveStatus::Optimal) => {
                let d = (a.objective - b.objective).abs();
                worst = worst.max(d);
                if d > 1e-7 {
                    return Err(format!("seed {seed}: milp {} vs enumeration {}", a.objective, b.objective));
                }
                feasible += 1;
                shared.tiny.push((s, a));
            }
            (SolveStatus::Infeasible, SolveStatus::Infeasible) => {}
            (x, y) => return Err(format!("seed {seed}: status {} vs {}", x.as_str(), y.as_str())),
        }
    }
    if feasible < 20 {
        return Err(format!("only {feasible} feasible tiny instances"));
    }
    Ok(format!("{feasible} instances, max |diff| {worst:.2e}, slowest {slowest:.2} s"))
}

fn monotone(results: &[ExperimentResult], tol: f64) -> Result<(), String> {
    for w in results.windows(2) {
        let (a, b) = (w[0].cost.total, w[1].cost.total);
        if b > a + 2.0 * tol * a.abs().max(1.0) {
            return Err(format!("exp{} {a:.6} < exp{} {b:.6}", w[0].id, w[1].id));
        }
    }
    Ok(())
}

fn criterion_2(shared: &mut Shared) -> Verdict {
    let tol = exact().rel_gap;
    monotone(&shared.desk_ladder, tol).map_err(|e| format!("desk: {e}"))?;
    let first = shared.desk_ladder[0].cost.total;
    let last = shared.desk_ladder[3].cost.total;
    let saving = (first - last) / first;
    if !(0.02..=0.15).contains(&saving) {
        return Err(format!("desk saving {:.2}% outside [2%, 15%]", 100.0 * saving));
    }
    for seed in 0..5u64 {
        let s = random_scenario(seed);
        let r = run_experiments(&s, &[1, 2, 3, 4], &harness(ModelOptions::default()))
            .map_err(|e| format!("random {seed}: {e}"))?;
        monotone(&r, tol).map_err(|e| format!("random {seed}: {e}"))?;
        shared.random_ladders.push((s, r));
    }
    let totals: Vec<String> = shared.desk_ladder.iter().map(|r| format!("{:.3}", r.cost.total)).collect();
    Ok(format!(
        "desk totals {} kUSD, saving {:.2}%; 5 random ladders monotone",
        totals.join(" / "),
        100.0 * saving
    ))
}

fn criterion_3(shared: &mut Shared) -> Verdict {
    let s = &shared.desk;
    let secant = ModelOptions {
        mode: LinearizationMode::Secant { breakpoints: 6 },
        ..ModelOptions::default()
    };
    let secant_run = run_experiments(s, &[4], &harness(secant)).map_err(|e| e.to_string())?;
    let mut legs = 0;
    for r in shared.desk_ladder.iter().chain(&secant_run) {
        for vt in &r.trace.vessels {
            for l in &vt.legs {
                legs += 1;
                if (l.travel_time - 1.5).abs() > 1e-6 || (l.speed - 32.0 / 1.5).abs() > 0.01 {
                    return Err(format!(
                        "exp{} vessel {} leg {}: {:.4} h at {:.3} kn",
                        r.id, vt.vessel, l.seq, l.travel_time, l.speed
                    ));
                }
            }
        }
    }
    Ok(format!("{legs} legs at 1.5 h / {:.2} kn (candidates and secant)", 32.0 / 1.5))
}

fn max_product(s: &Scenario, sol: &Solution, plus: VarKind, minus: VarKind) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..s.ports.len() {
        for p in 1..=s.grid.periods {
            let a = sol.get(&VarKey::port(plus, i, p));
            let b = sol.get(&VarKey::port(minus, i, p));
            worst = worst.max(a * b);
        }
    }
    worst
}

fn criterion_4(shared: &mut Shared) -> Verdict {
    let mut worst = 0.0f64;
    let mut n = 0;
    let desk = std::iter::once((&shared.desk, &shared.desk_ladder));
    let random = shared.random_ladders.iter().map(|(s, r)| (s, r));
    for (s, results) in desk.chain(random) {
        assert!(s.ports.iter().all(|p| p.feed_in_ratio > 0.0 && p.feed_in_ratio <= 1.0));
        for r in results {
            let g = max_product(s, &r.solution, VarKind::PGPlus, VarKind::PGMinus);
            let b = max_product(s, &r.solution, VarKind::PBPlus, VarKind::PBMinus);
            worst = worst.max(g).max(b);
            n += 1;
            if g.max(b) > 1e-6 {
                return Err(format!("{} exp{}: grid {g:.3e}, storage {b:.3e}", s.name, r.id));
            }
        }
    }
    Ok(format!("{n} optima, max P+ P- {worst:.2e}"))
}

fn criterion_5(shared: &mut Shared) -> Verdict {
    let mut n = 0;
    let mut worst = 0.0f64;
    for r in &shared.desk_ladder {
        let scoped = Scenario {
            toggles: ferry::model::experiment_toggles(r.id).unwrap(),
            ..shared.desk.clone()
        };
        worst = worst.max(agreement(&scoped, &r.solution, &format!("desk exp{}", r.id))?);
        n += 1;
    }
    for (s, results) in &shared.random_ladders {
        for r in results {
            let scoped = Scenario {
                toggles: ferry::model::experiment_toggles(r.id).unwrap(),
                ..s.clone()
            };
            worst = worst.max(agreement(&scoped, &r.solution, &format!("{} exp{}", s.name, r.id))?);
            n += 1;
        }
    }
    for (s, sol) in &shared.tiny {
        worst = worst.max(agreement(s, sol, &s.name)?);
        n += 1;
    }
    Ok(format!("{n} optimal solutions, max relative cost difference {worst:.2e}, no violations"))
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = TimeGrid {
        start: chrono::NaiveDate::from_ymd_opt(2024, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap(),
        periods: 96,
        step: 0.25,
    };
    let mut worst_bp = 0.0f64;
    for i in 0..1000 {
        let k = rng.random_range(1e-6..1e-4);
        let d = rng.random_range(5.0..60.0);
        let w = rng.random_range(300.0..6000.0);
        let (smin, smax) = (rng.random_range(5.0..12.0), rng.random_range(15.0..30.0));
        let s = rng.random_range(smin..smax);
        let vessel = Vessel {
            id: "V".into(),
            battery_bound_max: 100.0,
            battery_fixed: None,
            soc_min: 0.0,
            displacement: w,
            friction_const: k,
            periodic_frac: 0.5,
            soc_init_frac: 0.5,
            speed_min: smin,
            speed_max: smax,
        };
        let leg = Leg {
            vessel: 0,
            seq: 1,
            origin: 0,
            destination: 1,
            distance: d,
            displacement: w,
            dep_window: (0.0, 0.0),
            arr_window: (0.0, 24.0),
            travel_time_bounds: (d / smax, d / smin),
        };
        let truth = consumption(k, d, s, w);
        let scale = truth.abs().max(1.0);
        let n = rng.random_range(2..10usize);
        let env = secant_envelope(&leg, &vessel, n).map_err(|e| e.to_string())?;
        let modeled = envelope_value(&env, d / s);
        if modeled < truth - 1e-12 * scale {
            return Err(format!("sample {i}: envelope {modeled} below truth {truth}"));
        }
        let mut bps: Vec<f64> = env.iter().map(|g| g.t_lo).collect();
        bps.push(env.last().unwrap().t_hi);
        for t in bps {
            let e = consumption(k, d, d / t, w);
            let diff = (envelope_value(&env, t) - e).abs() / e.max(1.0);
            worst_bp = worst_bp.max(diff);
            if diff > 1e-12 {
                return Err(format!("sample {i}: breakpoint {t} off by {diff:.2e}"));
            }
        }
        if let Ok(opts) = travel_options(&leg, &vessel, &grid) {
            for o in opts {
                let e = consumption(k, d, d / o.travel_time, w);
                if (o.consumption - e).abs() > 1e-12 * e.max(1.0) {
                    return Err(format!("sample {i}: option {} h off", o.travel_time));
                }
            }
        }
    }
    Ok(format!("1000 samples, worst breakpoint deviation {worst_bp:.2e}"))
}

fn criterion_7(shared: &mut Shared) -> Verdict {
    let s = &shared.desk;
    let base = shared.desk_ladder[3].solution.objective;
    let inflated = ModelOptions {
        big_m_scale: 10.0,
        ..ModelOptions::default()
    };
    let m = fix_experiment(&build_model(s, inflated).map_err(|e| e.to_string())?, 4).map_err(|e| e.to_string())?;
    let sol = solve_milp(&m, &exact()).map_err(|e| e.to_string())?;
    if sol.status != SolveStatus::Optimal {
        return Err(format!("status {}", sol.status.as_str()));
    }
    let rel = (sol.objective - base).abs() / base.abs();
    if rel >= 1e-6 {
        return Err(format!("objective {} vs {base} ({rel:.2e})", sol.objective));
    }
    Ok(format!("objective {:.6} vs {:.6}, relative change {rel:.2e}", sol.objective, base))
}

fn triplet_set(p: &milp::Problem) -> Vec<(String, String, u64)> {
    let mut q = p.clone();
    q.compress();
    let mut v: Vec<(String, String, u64)> = q
        .triplets
        .iter()
        .map(|&(r, c, a)| (q.rows[r].name.clone(), q.cols[c].name.clone(), a.to_bits()))
        .collect();
    v.sort();
    v
}

fn criterion_8(shared: &mut Shared) -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let models = [
        ("tiny", fix_experiment(&build_model(&tiny_scenario(0), ModelOptions::default()).unwrap(), 4).unwrap()),
        ("desk", fix_experiment(&build_model(&shared.desk, ModelOptions::default()).unwrap(), 4).unwrap()),
    ];
    let mut total = 0;
    for (name, m) in &models {
        let path = dir.path().join(format!("{name}.mps"));
        export_mps(m, &path).map_err(|e| e.to_string())?;
        let back = read_mps(&path).map_err(|e| e.to_string())?;
        let (a, b) = (triplet_set(&m.problem), triplet_set(&back));
        if a != b {
            return Err(format!("{name}: {} vs {} triplets differ", a.len(), b.len()));
        }
        let costs_match = m.problem.cols.iter().zip(&back.cols).all(|(x, y)| {
            x.name == y.name && x.cost == y.cost && x.lower == y.lower && x.upper == y.upper && x.binary == y.binary
        });
        let rows_match = m.problem.rows.len() == back.rows.len()
            && m.problem.rows.iter().zip(&back.rows).all(|(x, y)| x.name == y.name && x.sense == y.sense && x.rhs == y.rhs);
        if !costs_match || !rows_match {
            return Err(format!("{name}: columns or rows differ after re-import"));
        }
        total += a.len();
    }
    Ok(format!("{total} triplets reproduced bit for bit (tiny and desk Exp4); external solver check is manual"))
}

fn criterion_9(shared: &mut Shared) -> Verdict {
    let secs = shared.desk_elapsed.as_secs_f64();
    if secs >= 300.0 {
        return Err(format!("desk Exp1-Exp4 took {secs:.1} s"));
    }
    Ok(format!("desk Exp1-Exp4 with replay and report in {secs:.1} s"))
}

fn main() {
    let desk = desk();
    let cfg = harness(ModelOptions::default());
    let out = tempfile::tempdir().expect("temp dir");
    let t0 = Instant::now();
    let ladder = run_experiments(&desk, &[1, 2, 3, 4], &cfg).and_then(|r| {
        emit_report(&r, &desk, Some(&desk_dir()), &cfg, out.path())?;
        Ok(r)
    });
    let desk_elapsed = t0.elapsed();
    let mut stdout = std::io::stdout().lock();
    let desk_ladder = match ladder {
        Ok(r) => r,
        Err(e) => {
            for n in 1..=9 {
                let _ = writeln!(stdout, "criterion {n}: FAIL (desk ladder did not run: {e})");
            }
            std::process::exit(1);
        }
    };
    let mut shared = Shared {
        desk,
        desk_ladder,
        desk_elapsed,
        random_ladders: Vec::new(),
        tiny: Vec::new(),
    };
    type Criterion = (&'static str, fn(&mut Shared) -> Verdict);
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", criterion_1),
        ("experiment ladder monotonicity", criterion_2),
        ("operating point 1.5 h / 21.33 kn", criterion_3),
        ("losslessness", criterion_4),
        ("simulator agreement", criterion_5),
        ("linearization conservatism", |_| criterion_6()),
        ("big-M robustness", criterion_7),
        ("MPS round trip", criterion_8),
        ("performance envelope", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let verdict = f(&mut shared);
        let line = match &verdict {
            Ok(msg) => format!("criterion {} ({name}): PASS: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                format!("criterion {} ({name}): FAIL: {msg}", i + 1)
            }
        };
        let _ = writeln!(stdout, "{line}");
    }
    let _ = writeln!(stdout, "acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
