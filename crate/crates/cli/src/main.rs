use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use ferry::harness::{emit_report, run_experiments, summary_table, HarnessConfig};
use ferry::model::{build_model, fix_experiment, LinearizationMode, ModelOptions};
use ferry::scenario::{load_scenario, validate_scenario, Scenario};
use ferry::simulate::{check, compare_with_solver, recompute_cost, replay, write_traces};
use ferry::solver::{describe, export_mps, read_solution, solve_milp, write_solution, BnbConfig, SolveStatus};
use ferry::FerryError;

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_INPUT: u8 = 3;
/// Solver failure or a replayed solution that violates a constraint.
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "ferry", version, about = "Electric ferry charging infrastructure sizing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-5)]
    gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Node limit for branch and bound.
    #[arg(long)]
    node_limit: Option<usize>,
    /// Process branch-and-bound nodes sequentially.
    #[arg(long)]
    sequential: bool,
    /// Use the secant envelope with this many breakpoints instead of
    /// candidate travel times.
    #[arg(long)]
    secant: Option<usize>,
    /// Multiplier on the big-M constants.
    #[arg(long, default_value_t = 1.0)]
    big_m_scale: f64,
    /// Print one line per branch-and-bound node to stderr.
    #[arg(long)]
    log_nodes: bool,
}

impl SolveArgs {
    fn bnb(&self) -> BnbConfig {
        BnbConfig {
            rel_gap: self.gap,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
            parallel: !self.sequential,
            log_nodes: self.log_nodes,
            ..BnbConfig::default()
        }
    }

    fn model(&self) -> ModelOptions {
        ModelOptions {
            mode: match self.secant {
                Some(breakpoints) => LinearizationMode::Secant { breakpoints },
                None => LinearizationMode::Candidates,
            },
            big_m_scale: self.big_m_scale,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario bundle and report every violation.
    Validate { bundle: PathBuf },
    /// Solve one experiment (or the scenario's own toggles) and print the design.
    Solve {
        bundle: PathBuf,
        #[arg(long)]
        experiment: Option<u8>,
        /// Write the solution file here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        opts: SolveArgs,
    },
    /// Write the model of one experiment as fixed-format MPS.
    ExportMps {
        bundle: PathBuf,
        #[arg(long)]
        experiment: u8,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        opts: SolveArgs,
    },
    /// Run the experiment ladder and write the summary, traces and manifest.
    Experiments {
        bundle: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma separated experiment ids.
        #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4])]
        ids: Vec<u8>,
        /// Run experiments concurrently.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        opts: SolveArgs,
    },
    /// Replay a solution file, check it and write traces.
    Replay {
        bundle: PathBuf,
        solution: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Violation tolerance on MW and MWh quantities.
        #[arg(long, default_value_t = ferry::simulate::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Write the reference bundles (ba_co_desk, ba_co_week) into a directory.
    GenerateBundles {
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn load(bundle: &Path) -> Result<Scenario, FerryError> {
    Ok(load_scenario(bundle)?)
}

fn status_code(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::Infeasible | SolveStatus::Unbounded => ExitCode::from(EXIT_INFEASIBLE),
        _ => ExitCode::from(EXIT_LIMIT),
    }
}

fn run(cli: Cli) -> Result<ExitCode, FerryError> {
    match cli.command {
        Command::Validate { bundle } => {
            let s = load(&bundle)?;
            let problems = validate_scenario(&s);
            if problems.is_empty() {
                println!(
                    "{}: ok ({} ports, {} vessels, {} legs, {} periods)",
                    s.name,
                    s.ports.len(),
                    s.vessels.len(),
                    s.num_legs(),
                    s.grid.periods
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for p in &problems {
                    println!("{p}");
                }
                Ok(ExitCode::from(EXIT_INPUT))
            }
        }
        Command::Solve {
            bundle,
            experiment,
            output,
            opts,
        } => {
            let s = load(&bundle)?;
            let mut m = build_model(&s, opts.model())?;
            if let Some(e) = experiment {
                m = fix_experiment(&m, e)?;
            }
            log::info!("model: {} columns, {} rows", m.num_cols(), m.num_rows());
            let sol = solve_milp(&m, &opts.bnb())?;
            describe(&s, &sol, std::io::stdout())?;
            if let Some(path) = output {
                if sol.status.has_point() {
                    write_solution(&s, &sol, &path)?;
                }
            }
            Ok(status_code(sol.status))
        }
        Command::ExportMps {
            bundle,
            experiment,
            output,
            opts,
        } => {
            let s = load(&bundle)?;
            let m = fix_experiment(&build_model(&s, opts.model())?, experiment)?;
            export_mps(&m, &output)?;
            println!("wrote {} ({} columns, {} rows)", output.display(), m.num_cols(), m.num_rows());
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiments {
            bundle,
            output,
            ids,
            parallel,
            opts,
        } => {
            let s = load(&bundle)?;
            let cfg = HarnessConfig {
                bnb: opts.bnb(),
                model: opts.model(),
                parallel,
                ..HarnessConfig::default()
            };
            let results = run_experiments(&s, &ids, &cfg)?;
            emit_report(&results, &s, Some(&bundle), &cfg, &output)?;
            print!("{}", summary_table(&results));
            let worst = results
                .iter()
                .map(|r| r.stats.status)
                .find(|st| *st != SolveStatus::Optimal)
                .unwrap_or(SolveStatus::Optimal);
            Ok(status_code(worst))
        }
        Command::Replay {
            bundle,
            solution,
            output,
            tolerance,
        } => {
            let s = load(&bundle)?;
            let sol = read_solution(&s, &solution)?;
            let trace = replay(&s, &sol);
            let mut problems = check(&trace, &s, tolerance);
            problems.extend(compare_with_solver(&trace, &s, &sol, tolerance));
            write_traces(&trace, &s, &output, "")?;
            let cost = recompute_cost(&trace, &s);
            println!(
                "capital {:.4}  purchase {:.4}  revenue {:.4}  total {:.4} kUSD",
                cost.capital, cost.purchase, cost.revenue, cost.total
            );
            for p in &problems {
                println!("{p}");
            }
            println!("{} violation(s)", problems.len());
            Ok(if problems.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INPUT)
            })
        }
        Command::GenerateBundles { output } => {
            for s in [ferry::synth::ba_co_desk(), ferry::synth::ba_co_week()] {
                let dir = output.join(&s.name);
                ferry::synth::write_reference_bundle(&s, &dir)?;
                println!("wrote {}", dir.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                FerryError::Unsolved { status, .. } => status_code(status),
                FerryError::Milp(_) | FerryError::Experiment { .. } => ExitCode::from(EXIT_INTERNAL),
                _ => ExitCode::from(EXIT_INPUT),
            }
        }
    }
}
