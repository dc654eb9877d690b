//! Small mixed-binary linear programming toolkit: a sparse dual simplex,
//! deterministic branch-and-bound, and fixed-format MPS input/output.

#![allow(clippy::needless_range_loop)]

mod bnb;
mod error;
mod lu;
mod mps;
mod par;
mod problem;
mod simplex;
mod sparse;

pub use bnb::{solve_mip, BnbConfig, MipSolution, MipStatus};
pub use error::MilpError;
pub use mps::{read_mps, read_mps_file, write_mps, write_mps_file};
pub use par::{par_map, parallel_enabled};
pub use problem::{Column, Problem, Row, Sense};
pub use simplex::{Basis, DualSimplex, LpOptions, LpSolution, LpStatus, VarState};

/// Solves the LP relaxation of `problem` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(problem: &Problem, opts: LpOptions) -> Result<LpSolution, MilpError> {
    problem.check()?;
    let mut lp = DualSimplex::new(problem, opts);
    Ok(lp.solve())
}
