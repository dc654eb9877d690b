//! Solving assembled models and moving them in and out of files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Duration;

pub use milp::BnbConfig;
use milp::{LpOptions, LpStatus, MipStatus, Problem};

use crate::error::FerryError;
use crate::model::{MilpModel, VarKey, VarKind};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node or time limit reached with an incumbent.
    LimitIncumbent,
    /// Limit reached before any feasible point was found.
    LimitNoIncumbent,
    IterationLimit,
    Numerical,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitIncumbent => "limit_incumbent",
            SolveStatus::LimitNoIncumbent => "limit_no_incumbent",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::Numerical => "numerical",
        }
    }

    pub fn parse(s: &str) -> Option<SolveStatus> {
        [
            SolveStatus::Optimal,
            SolveStatus::Infeasible,
            SolveStatus::Unbounded,
            SolveStatus::LimitIncumbent,
            SolveStatus::LimitNoIncumbent,
            SolveStatus::IterationLimit,
            SolveStatus::Numerical,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }

    pub fn has_point(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::LimitIncumbent)
    }
}

/// A solved model: values keyed by column name tuple plus search statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: BTreeMap<VarKey, f64>,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub wall_time: Duration,
}

impl Solution {
    pub fn get(&self, key: &VarKey) -> f64 {
        self.values.get(key).copied().unwrap_or(0.0)
    }

    pub fn try_get(&self, key: &VarKey) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn empty(status: SolveStatus, wall_time: Duration) -> Self {
        Solution {
            status,
            values: BTreeMap::new(),
            objective: f64::NAN,
            bound: f64::NAN,
            gap: f64::INFINITY,
            nodes: 0,
            wall_time,
        }
    }

    /// Point in column order of `m`; absent columns read as 0.
    pub fn to_vector(&self, m: &MilpModel) -> Vec<f64> {
        m.keys().iter().map(|k| self.get(k)).collect()
    }
}

fn values_of(m: &MilpModel, x: &[f64]) -> BTreeMap<VarKey, f64> {
    m.keys().iter().zip(x).map(|(k, &v)| (*k, v)).collect()
}

fn relaxed(p: &Problem) -> Problem {
    let mut q = p.clone();
    for c in &mut q.cols {
        c.binary = false;
    }
    q
}

/// LP relaxation of `m` (binaries treated as continuous in [0,1]).
pub fn solve_lp(m: &MilpModel, opts: LpOptions) -> Result<(Solution, milp::LpSolution), FerryError> {
    let start = std::time::Instant::now();
    let lp = milp::solve_lp(&relaxed(&m.problem), opts)?;
    let status = match lp.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::IterationLimit => SolveStatus::IterationLimit,
    };
    let sol = if status == SolveStatus::Optimal {
        Solution {
            status,
            values: values_of(m, &lp.x),
            objective: lp.objective,
            bound: lp.objective,
            gap: 0.0,
            nodes: 0,
            wall_time: start.elapsed(),
        }
    } else {
        Solution::empty(status, start.elapsed())
    };
    Ok((sol, lp))
}

pub fn solve_milp(m: &MilpModel, cfg: &BnbConfig) -> Result<Solution, FerryError> {
    let r = milp::solve_mip(&m.problem, cfg)?;
    let status = match (r.status, r.x.is_some()) {
        (MipStatus::Optimal, _) => SolveStatus::Optimal,
        (MipStatus::Infeasible, _) => SolveStatus::Infeasible,
        (MipStatus::Unbounded, _) => SolveStatus::Unbounded,
        (MipStatus::NodeLimit | MipStatus::TimeLimit, true) => SolveStatus::LimitIncumbent,
        (MipStatus::NodeLimit | MipStatus::TimeLimit, false) => SolveStatus::LimitNoIncumbent,
        (MipStatus::Numerical, _) => SolveStatus::Numerical,
    };
    log::info!(
        "milp {}: status {} obj {:.6} bound {:.6} nodes {} time {:.2}s",
        m.problem.name,
        r.status.as_str(),
        r.objective,
        r.bound,
        r.nodes,
        r.wall_time.as_secs_f64()
    );
    Ok(match r.x {
        Some(x) => Solution {
            status,
            values: values_of(m, &x),
            objective: r.objective,
            bound: r.bound,
            gap: r.gap,
            nodes: r.nodes,
            wall_time: r.wall_time,
        },
        None => Solution {
            nodes: r.nodes,
            ..Solution::empty(status, r.wall_time)
        },
    })
}

/// Writes `m` as fixed-format MPS. A non-finite coefficient is reported with
/// its row name.
pub fn export_mps(m: &MilpModel, path: impl AsRef<Path>) -> Result<(), FerryError> {
    milp::write_mps_file(&m.problem, path.as_ref())?;
    Ok(())
}

pub fn read_mps(path: impl AsRef<Path>) -> Result<Problem, FerryError> {
    Ok(milp::read_mps_file(path.as_ref())?)
}

const META: [&str; 5] = ["@status", "@objective", "@bound", "@gap", "@nodes"];

/// Writes a solution as `name,value` CSV. Statistics come first as rows whose
/// names start with `@`; columns follow in key order. Wall time is left out
/// so that reruns produce identical files.
pub fn write_solution(s: &Scenario, sol: &Solution, path: impl AsRef<Path>) -> Result<(), FerryError> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["name", "value"])?;
    let meta = [
        sol.status.as_str().to_string(),
        format!("{:?}", sol.objective),
        format!("{:?}", sol.bound),
        format!("{:?}", sol.gap),
        sol.nodes.to_string(),
    ];
    for (k, v) in META.iter().zip(meta) {
        w.write_record([k.to_string(), v])?;
    }
    for (key, v) in &sol.values {
        w.write_record([key.name(s), format!("{v:?}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_solution(s: &Scenario, path: impl AsRef<Path>) -> Result<Solution, FerryError> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let err = |line: usize, msg: String| FerryError::SolutionFile {
        file: file.clone(),
        line,
        msg,
    };
    let mut rdr = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut sol = Solution::empty(SolveStatus::Optimal, Duration::ZERO);
    for (n, rec) in rdr.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        let (name, value) = (rec.get(0).unwrap_or(""), rec.get(1).unwrap_or(""));
        let num = || value.parse::<f64>().map_err(|_| err(line, format!("bad number {value:?}")));
        match name {
            "@status" => {
                sol.status = SolveStatus::parse(value).ok_or_else(|| err(line, format!("bad status {value:?}")))?
            }
            "@objective" => sol.objective = num()?,
            "@bound" => sol.bound = num()?,
            "@gap" => sol.gap = num()?,
            "@nodes" => sol.nodes = num()? as usize,
            "@wall_time" => sol.wall_time = Duration::from_secs_f64(num()?.max(0.0)),
            _ => {
                let key = VarKey::parse(s, name).map_err(|e| err(line, e.to_string()))?;
                sol.values.insert(key, num()?);
            }
        }
    }
    Ok(sol)
}

/// Short human summary used by the CLI.
pub fn describe(s: &Scenario, sol: &Solution, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "status {} objective {:.6} bound {:.6} gap {:.3e} nodes {} time {:.2}s",
        sol.status.as_str(),
        sol.objective,
        sol.bound,
        sol.gap,
        sol.nodes,
        sol.wall_time.as_secs_f64()
    )?;
    for kind in [VarKind::PGMax, VarKind::PPvMax, VarKind::EBMax, VarKind::EVMax] {
        for (k, v) in sol.values.iter().filter(|(k, _)| k.kind == kind) {
            writeln!(out, "  {} = {v:.4}", k.name(s))?;
        }
    }
    Ok(())
}
