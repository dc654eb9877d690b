//! The experiment ladder: fix bounds, solve, replay, check, cost.

mod report;

use std::time::Duration;

use milp::par_map;

pub use report::{emit_report, summary_csv, summary_table, Manifest, SUMMARY_COLUMNS};

use crate::error::FerryError;
use crate::model::{build_model, experiment_toggles, fix_experiment, MilpModel, ModelOptions, VarKey, VarKind};
use crate::scenario::Scenario;
use crate::simulate::{check, compare_with_solver, recompute_cost, replay, CostBreakdown, DispatchTrace, DEFAULT_TOLERANCE};
use crate::solver::{solve_milp, BnbConfig, Solution, SolveStatus};

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub bnb: BnbConfig,
    pub model: ModelOptions,
    pub tolerance: f64,
    /// Run experiments concurrently.
    pub parallel: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            bnb: BnbConfig::default(),
            model: ModelOptions::default(),
            tolerance: DEFAULT_TOLERANCE,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOutcome {
    pub grid_power: Vec<f64>,
    pub vessel_battery: Vec<f64>,
    pub storage: Vec<f64>,
    pub pv: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub status: SolveStatus,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub id: u8,
    /// Upper bound on PV per port in this experiment (MW).
    pub pv_limit: f64,
    /// Upper bound on storage per port in this experiment (MWh).
    pub storage_limit: f64,
    pub vessel_sizing: bool,
    pub design: DesignOutcome,
    pub cost: CostBreakdown,
    pub stats: SolveStats,
    pub solution: Solution,
    pub trace: DispatchTrace,
}

fn design_of(s: &Scenario, sol: &Solution) -> DesignOutcome {
    let per_port = |kind| (0..s.ports.len()).map(|i| sol.get(&VarKey::design(kind, i))).collect();
    DesignOutcome {
        grid_power: per_port(VarKind::PGMax),
        vessel_battery: (0..s.vessels.len())
            .map(|v| sol.get(&VarKey::design(VarKind::EVMax, v)))
            .collect(),
        storage: per_port(VarKind::EBMax),
        pv: per_port(VarKind::PPvMax),
    }
}

/// Solves, replays and checks one experiment on an assembled base model.
pub fn run_experiment(s: &Scenario, base: &MilpModel, id: u8, cfg: &HarnessConfig) -> Result<ExperimentResult, FerryError> {
    let m = fix_experiment(base, id)?;
    let sol = solve_milp(&m, &cfg.bnb)?;
    if !sol.status.has_point() {
        return Err(FerryError::Unsolved {
            experiment: id,
            status: sol.status,
        });
    }
    let scoped = Scenario {
        toggles: experiment_toggles(id)?,
        ..s.clone()
    };
    let trace = replay(&scoped, &sol);
    let mut problems = check(&trace, &scoped, cfg.tolerance);
    problems.extend(compare_with_solver(&trace, &scoped, &sol, cfg.tolerance));
    if !problems.is_empty() {
        let dump: Vec<String> = problems.iter().take(20).map(ToString::to_string).collect();
        return Err(FerryError::Experiment {
            experiment: id,
            msg: format!("replay found {} violation(s):\n  {}", problems.len(), dump.join("\n  ")),
        });
    }
    let cost = recompute_cost(&trace, &scoped);
    Ok(ExperimentResult {
        id,
        pv_limit: m.kind_upper(VarKind::PPvMax),
        storage_limit: m.kind_upper(VarKind::EBMax),
        vessel_sizing: scoped.toggles.vessel_sizing_enabled,
        design: design_of(s, &sol),
        cost,
        stats: SolveStats {
            status: sol.status,
            objective: sol.objective,
            bound: sol.bound,
            gap: sol.gap,
            nodes: sol.nodes,
            wall_time: sol.wall_time,
        },
        solution: sol,
        trace,
    })
}

/// Runs the requested experiments; results are ordered by id.
pub fn run_experiments(s: &Scenario, ids: &[u8], cfg: &HarnessConfig) -> Result<Vec<ExperimentResult>, FerryError> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.is_empty() {
        return Ok(Vec::new());
    }
    for &id in &ids {
        experiment_toggles(id)?;
    }
    let base = build_model(s, cfg.model)?;
    let results = par_map(&ids, cfg.parallel, |&id| run_experiment(s, &base, id, cfg));
    results.into_iter().collect()
}
