use std::time::Instant;

use milp::{par_map, DualSimplex, LpOptions, LpStatus};

use crate::error::FerryError;
use crate::model::{build_model, MilpModel, ModelOptions};
use crate::scenario::Scenario;
use crate::solver::{Solution, SolveStatus};

pub const MAX_FREE_BINARIES: usize = 22;

/// Exact optimum of a tiny scenario by enumerating every binary assignment.
pub fn brute_force(s: &Scenario, opts: ModelOptions, parallel: bool) -> Result<Solution, FerryError> {
    let m = build_model(s, opts)?;
    brute_force_model(&m, parallel)
}

struct ChunkBest {
    best: Option<(f64, u64, Vec<f64>)>,
    lps: usize,
}

/// Enumerates the free binaries of `m` in Gray-code order, solving the
/// restricted LP for each assignment with a warm start from the previous one.
/// Ties are broken towards the numerically smallest assignment mask.
pub fn brute_force_model(m: &MilpModel, parallel: bool) -> Result<Solution, FerryError> {
    let start = Instant::now();
    m.problem.check()?;
    let free: Vec<usize> = m
        .problem
        .binaries()
        .filter(|&j| m.problem.cols[j].lower < m.problem.cols[j].upper)
        .collect();
    if free.len() > MAX_FREE_BINARIES {
        return Err(FerryError::TooManyBinaries {
            found: free.len(),
            limit: MAX_FREE_BINARIES,
        });
    }
    let template = DualSimplex::new(&m.problem, LpOptions::default());
    let total: u64 = 1 << free.len();
    let chunk_len = total.div_ceil(64).max(1);
    let chunks: Vec<u64> = (0..total).step_by(chunk_len as usize).collect();

    let results = par_map(&chunks, parallel, |&first| {
        let mut lp = template.clone();
        let mut out = ChunkBest { best: None, lps: 0 };
        let mut basis = None;
        let last = (first + chunk_len).min(total);
        for idx in first..last {
            let mask = idx ^ (idx >> 1);
            for (b, &j) in free.iter().enumerate() {
                let v = (mask >> b & 1) as f64;
                lp.set_col_bounds(j, v, v);
            }
            match &basis {
                Some(bs) => lp.load_basis(bs),
                None => lp.load_logical_basis(),
            }
            let sol = lp.solve();
            out.lps += 1;
            basis = Some(lp.basis());
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let better = match &out.best {
                None => true,
                Some((obj, bm, _)) => sol.objective < *obj || (sol.objective == *obj && mask < *bm),
            };
            if better {
                out.best = Some((sol.objective, mask, sol.x));
            }
        }
        out
    });

    let mut best: Option<(f64, u64, Vec<f64>)> = None;
    let mut lps = 0;
    for r in results {
        lps += r.lps;
        if let Some((obj, mask, x)) = r.best {
            let better = match &best {
                None => true,
                Some((bo, bm, _)) => obj < *bo || (obj == *bo && mask < *bm),
            };
            if better {
                best = Some((obj, mask, x));
            }
        }
    }
    let wall_time = start.elapsed();
    Ok(match best {
        Some((objective, _, x)) => Solution {
            status: SolveStatus::Optimal,
            values: m.keys().iter().zip(x).map(|(k, v)| (*k, v)).collect(),
            objective,
            bound: objective,
            gap: 0.0,
            nodes: lps,
            wall_time,
        },
        None => Solution {
            status: SolveStatus::Infeasible,
            values: Default::default(),
            objective: f64::NAN,
            bound: f64::NAN,
            gap: f64::INFINITY,
            nodes: lps,
            wall_time,
        },
    })
}
