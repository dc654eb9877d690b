//! Joint sizing of port charging infrastructure and ferry batteries as a
//! mixed-integer linear program.

pub mod error;
pub mod harness;
pub mod linearize;
pub mod model;
pub mod scenario;
pub mod simulate;
pub mod solver;
pub mod synth;

pub use error::{FerryError, ScenarioError};
pub use model::{build_model, fix_experiment, MilpModel, ModelOptions, VarKey, VarKind};
pub use scenario::{load_scenario, save_scenario, validate_scenario, Scenario};
pub use solver::{solve_milp, Solution, SolveStatus};
