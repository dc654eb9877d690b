//! Branch-and-bound over binary columns.
//!
//! Nodes are processed in batches of `batch_size`. Every node of a batch is
//! evaluated independently (optionally in parallel), and the results are
//! merged in batch order, so the search is the same with or without threads.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::MilpError;
use crate::par::par_map;
use crate::problem::Problem;
use crate::simplex::{Basis, DualSimplex, LpOptions, LpStatus};

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub int_tol: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub batch_size: usize,
    pub parallel: bool,
    /// Print one line per processed node to stderr.
    pub log_nodes: bool,
    /// Try a rounding heuristic at the root and at every node whose id is a
    /// multiple of this value; 0 disables it.
    pub heuristic_interval: usize,
    pub lp: LpOptions,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            rel_gap: 1e-5,
            abs_gap: 1e-9,
            int_tol: 1e-6,
            node_limit: None,
            time_limit: None,
            batch_size: 8,
            parallel: true,
            log_nodes: false,
            heuristic_interval: 16,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
    Numerical,
}

impl MipStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MipStatus::Optimal => "optimal",
            MipStatus::Infeasible => "infeasible",
            MipStatus::Unbounded => "unbounded",
            MipStatus::NodeLimit => "node_limit",
            MipStatus::TimeLimit => "time_limit",
            MipStatus::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Best integral point found, if any.
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    /// Proven lower bound.
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub root_objective: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    fixes: Vec<(usize, f64)>,
    basis: Option<Arc<Basis>>,
}

enum Outcome {
    Pruned,
    Infeasible,
    Failed(LpStatus),
    Integral { obj: f64, x: Vec<f64> },
    Branch {
        obj: f64,
        col: usize,
        value: f64,
        basis: Arc<Basis>,
        heuristic: Option<(f64, Vec<f64>)>,
    },
}

struct Evaluated {
    outcome: Outcome,
    iterations: usize,
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    let diff = (incumbent - bound).max(0.0);
    if diff == 0.0 {
        0.0
    } else {
        diff / incumbent.abs().max(1.0)
    }
}

struct Search<'a> {
    cfg: &'a BnbConfig,
    template: DualSimplex,
    binaries: Vec<usize>,
    root_lower: Vec<f64>,
    root_upper: Vec<f64>,
}

impl Search<'_> {
    /// Fixes every binary with a positive value to 1 (the rest to 0) and
    /// re-solves; returns the point if the restricted LP is feasible.
    fn round_up(&self, lp: &mut DualSimplex, x: &[f64], basis: &Basis) -> (Option<(f64, Vec<f64>)>, usize) {
        for &j in &self.binaries {
            let r: f64 = if x[j] > self.cfg.int_tol { 1.0 } else { 0.0 };
            let r = r.clamp(self.root_lower[j], self.root_upper[j]);
            lp.set_col_bounds(j, r, r);
        }
        lp.load_basis(basis);
        let sol = lp.solve();
        let found = (sol.status == LpStatus::Optimal).then_some((sol.objective, sol.x));
        (found, sol.iterations)
    }

    fn prepare(&self, fixes: &[(usize, f64)], basis: Option<&Basis>) -> DualSimplex {
        let mut lp = self.template.clone();
        for &(j, v) in fixes {
            lp.set_col_bounds(j, v, v);
        }
        match basis {
            Some(b) => lp.load_basis(b),
            None => lp.load_logical_basis(),
        }
        lp
    }

    fn evaluate(&self, node: &Node, cutoff: f64) -> Evaluated {
        let mut lp = self.prepare(&node.fixes, node.basis.as_deref());
        let sol = lp.solve();
        let mut iterations = sol.iterations;
        let outcome = match sol.status {
            LpStatus::Infeasible => Outcome::Infeasible,
            st @ (LpStatus::Unbounded | LpStatus::IterationLimit) => Outcome::Failed(st),
            LpStatus::Optimal if sol.objective >= cutoff => Outcome::Pruned,
            LpStatus::Optimal => {
                let mut pick: Option<(usize, f64, f64)> = None;
                for &j in &self.binaries {
                    let v = sol.x[j];
                    let frac = (v - v.round()).abs();
                    if frac <= self.cfg.int_tol {
                        continue;
                    }
                    match pick {
                        Some((_, f, _)) if f >= frac => {}
                        _ => pick = Some((j, frac, v)),
                    }
                }
                match pick {
                    Some((col, _, value)) => {
                        let basis = lp.basis();
                        let every = self.cfg.heuristic_interval;
                        let heuristic = if every > 0 && node.id.is_multiple_of(every) {
                            let (h, it) = self.round_up(&mut lp, &sol.x, &basis);
                            iterations += it;
                            h
                        } else {
                            None
                        };
                        Outcome::Branch {
                            obj: sol.objective,
                            col,
                            value,
                            basis: Arc::new(basis),
                            heuristic,
                        }
                    }
                    None => {
                        // polish: fix binaries to their rounded values and re-solve
                        let basis = lp.basis();
                        for &j in &self.binaries {
                            let r = sol.x[j].round().clamp(self.root_lower[j], self.root_upper[j]);
                            lp.set_col_bounds(j, r, r);
                        }
                        lp.load_basis(&basis);
                        let fixed = lp.solve();
                        iterations += fixed.iterations;
                        if fixed.status == LpStatus::Optimal {
                            Outcome::Integral {
                                obj: fixed.objective,
                                x: fixed.x,
                            }
                        } else {
                            let mut x = sol.x.clone();
                            for &j in &self.binaries {
                                x[j] = x[j].round();
                            }
                            Outcome::Integral { obj: sol.objective, x }
                        }
                    }
                }
            }
        };
        Evaluated { outcome, iterations }
    }
}

/// Solves `problem` to the configured gap.
pub fn solve_mip(problem: &Problem, cfg: &BnbConfig) -> Result<MipSolution, MilpError> {
    problem.check()?;
    let start = Instant::now();
    let template = DualSimplex::new(problem, cfg.lp.clone());
    let binaries: Vec<usize> = problem.binaries().collect();
    let search = Search {
        cfg,
        root_lower: problem.cols.iter().map(|c| c.lower).collect(),
        root_upper: problem.cols.iter().map(|c| c.upper).collect(),
        template,
        binaries,
    };
    let batch = cfg.batch_size.max(1);

    let mut incumbent = f64::INFINITY;
    let mut best_x: Option<Vec<f64>> = None;
    let mut open: Vec<Node> = vec![Node {
        id: 0,
        depth: 0,
        bound: f64::NEG_INFINITY,
        fixes: Vec::new(),
        basis: None,
    }];
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut root_objective = f64::NAN;
    let mut root_failure: Option<LpStatus> = None;
    let mut limit: Option<MipStatus> = None;

    let cutoff_of = |inc: f64| -> f64 {
        if inc.is_finite() {
            inc - cfg.abs_gap.max(cfg.rel_gap * inc.abs())
        } else {
            f64::INFINITY
        }
    };

    while !open.is_empty() {
        if let Some(nl) = cfg.node_limit {
            if nodes >= nl {
                limit = Some(MipStatus::NodeLimit);
                break;
            }
        }
        if let Some(tl) = cfg.time_limit {
            if start.elapsed() >= tl {
                limit = Some(MipStatus::TimeLimit);
                break;
            }
        }
        let lower = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        if relative_gap(incumbent, lower) <= cfg.rel_gap {
            break;
        }

        // select a batch
        let take = batch.min(open.len());
        let selected: Vec<Node> = if best_x.is_none() {
            let at = open.len() - take;
            let mut tail = open.split_off(at);
            tail.reverse();
            tail
        } else {
            open.sort_by(|a, b| b.bound.total_cmp(&a.bound).then(b.id.cmp(&a.id)));
            let at = open.len() - take;
            let mut tail = open.split_off(at);
            tail.reverse();
            tail
        };

        let cutoff = cutoff_of(incumbent);
        let results = par_map(&selected, cfg.parallel, |n| search.evaluate(n, cutoff));

        let mut children: Vec<Node> = Vec::new();
        for (node, ev) in selected.iter().zip(results) {
            nodes += 1;
            lp_iterations += ev.iterations;
            let mut node_bound = f64::INFINITY;
            match ev.outcome {
                Outcome::Infeasible | Outcome::Pruned => {}
                Outcome::Failed(st) => {
                    if node.id == 0 {
                        root_failure = Some(st);
                    }
                    log::warn!("node {} LP failed; discarding", node.id);
                }
                Outcome::Integral { obj, x } => {
                    node_bound = obj;
                    if obj < incumbent {
                        incumbent = obj;
                        best_x = Some(x);
                    }
                }
                Outcome::Branch {
                    obj,
                    col,
                    value,
                    basis,
                    heuristic,
                } => {
                    node_bound = obj;
                    if let Some((h, x)) = heuristic {
                        if h < incumbent {
                            incumbent = h;
                            best_x = Some(x);
                        }
                    }
                    if obj < cutoff_of(incumbent) {
                        let up_first = value >= 0.5;
                        let mk = |v: f64, id: usize| {
                            let mut fixes = node.fixes.clone();
                            fixes.push((col, v));
                            Node {
                                id,
                                depth: node.depth + 1,
                                bound: obj,
                                fixes,
                                basis: Some(Arc::clone(&basis)),
                            }
                        };
                        // the preferred child is pushed last so a stack pops it first
                        let (second, first) = if up_first { (0.0, 1.0) } else { (1.0, 0.0) };
                        children.push(mk(second, next_id));
                        children.push(mk(first, next_id + 1));
                        next_id += 2;
                    }
                }
            }
            if node.id == 0 {
                root_objective = node_bound;
            }
            if cfg.log_nodes {
                let gap = relative_gap(incumbent, node_bound);
                eprintln!(
                    "node {:>6} depth {:>3} bound {:>14.6} incumbent {:>14.6} gap {:>10.3e}",
                    node.id, node.depth, node_bound, incumbent, gap
                );
            }
        }
        // keep DFS order: children of later nodes are popped first; within
        // a batch the earliest node's children end on top
        let mut grouped: Vec<Node> = Vec::with_capacity(children.len());
        for pair in children.chunks(2).rev() {
            grouped.extend_from_slice(pair);
        }
        open.extend(grouped);
        let cutoff = cutoff_of(incumbent);
        open.retain(|n| n.bound < cutoff);
    }

    let bound = if limit.is_some() {
        open.iter()
            .map(|n| n.bound)
            .fold(f64::INFINITY, f64::min)
            .min(incumbent)
    } else if open.is_empty() {
        incumbent
    } else {
        open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min).min(incumbent)
    };
    let status = if let Some(st) = root_failure {
        if st == LpStatus::Unbounded {
            MipStatus::Unbounded
        } else {
            MipStatus::Numerical
        }
    } else if let Some(l) = limit {
        l
    } else if best_x.is_some() {
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    let objective = if best_x.is_some() { incumbent } else { f64::NAN };
    let gap = if best_x.is_some() { relative_gap(incumbent, bound) } else { f64::INFINITY };
    Ok(MipSolution {
        status,
        x: best_x,
        objective,
        bound,
        gap,
        nodes,
        lp_iterations,
        root_objective,
        wall_time: start.elapsed(),
    })
}
