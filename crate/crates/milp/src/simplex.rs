//! Bounded-variable revised dual simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i·x` whose bounds encode
//! the row sense, so the working system is `A x - r = 0` with bounds on all
//! variables and the all-logical starting basis. Nonbasic variables sit at a
//! finite bound; a missing bound on the side the reduced cost asks for is
//! replaced by an artificial box that is widened if the optimum touches it.

use std::sync::Arc;

use crate::lu::BasisFactor;
use crate::problem::{Problem, Sense};
use crate::sparse::{CscMatrix, ScatterVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub max_iterations: usize,
    /// Iterations without objective progress before switching to Bland's rule.
    pub stall_threshold: usize,
    pub refactor_interval: usize,
    pub scale: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            max_iterations: 500_000,
            stall_threshold: 400,
            refactor_interval: 96,
            scale: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Column values.
    pub x: Vec<f64>,
    /// Row activities `A x`.
    pub row_activity: Vec<f64>,
    /// Row duals `y` with `c - A^T y` the reduced costs.
    pub row_dual: Vec<f64>,
    pub reduced_cost: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            x: vec![f64::NAN; n],
            row_activity: vec![f64::NAN; m],
            row_dual: vec![f64::NAN; m],
            reduced_cost: vec![f64::NAN; n],
            iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// Snapshot of a basis, usable as a warm start after bound changes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    states: Vec<VarState>,
}

impl Basis {
    pub fn states(&self) -> &[VarState] {
        &self.states
    }
}

/// Immutable scaled data shared between solver clones.
#[derive(Debug)]
struct LpData {
    n: usize,
    m: usize,
    a: CscMatrix,
    at: CscMatrix,
    col_scale: Vec<f64>,
    row_scale: Vec<f64>,
    obj_scale: f64,
    /// Scaled costs for all `n + m` variables.
    cost: Vec<f64>,
    /// Scaled root bounds.
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic(usize),
    AtLower,
    AtUpper,
}

const BOX_START: f64 = 1e6;
const BOX_GROWTH: f64 = 1e3;
const BOX_ROUNDS: usize = 3;
const PIVOT_TOL: f64 = 1e-9;

/// Dual simplex state for one LP; cheap to clone (matrix data is shared).
#[derive(Debug, Clone)]
pub struct DualSimplex {
    data: Arc<LpData>,
    opts: LpOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Artificial box flags per variable side.
    art_lower: Vec<bool>,
    art_upper: Vec<bool>,
    box_size: f64,
    status: Vec<Status>,
    head: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    weights: Vec<f64>,
    factor: BasisFactor,
    iterations: usize,
}

fn pow2_round(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round() as i32)
}

fn compute_scaling(nrows: usize, ncols: usize, trip: &[(usize, usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut rs = vec![1.0; nrows];
    let mut cs = vec![1.0; ncols];
    for _ in 0..6 {
        let mut rmin = vec![f64::INFINITY; nrows];
        let mut rmax = vec![0.0f64; nrows];
        for &(r, c, v) in trip {
            let a = v.abs() * cs[c];
            rmin[r] = rmin[r].min(a);
            rmax[r] = rmax[r].max(a);
        }
        for i in 0..nrows {
            if rmax[i] > 0.0 {
                rs[i] = 1.0 / (rmin[i] * rmax[i]).sqrt();
            }
        }
        let mut cmin = vec![f64::INFINITY; ncols];
        let mut cmax = vec![0.0f64; ncols];
        for &(r, c, v) in trip {
            let a = v.abs() * rs[r];
            cmin[c] = cmin[c].min(a);
            cmax[c] = cmax[c].max(a);
        }
        for j in 0..ncols {
            if cmax[j] > 0.0 {
                cs[j] = 1.0 / (cmin[j] * cmax[j]).sqrt();
            }
        }
    }
    (
        rs.into_iter().map(pow2_round).collect(),
        cs.into_iter().map(pow2_round).collect(),
    )
}

impl DualSimplex {
    pub fn new(problem: &Problem, opts: LpOptions) -> Self {
        let n = problem.num_cols();
        let m = problem.num_rows();
        let mut p = problem.clone();
        p.compress();
        let (row_scale, col_scale) = if opts.scale {
            compute_scaling(m, n, &p.triplets)
        } else {
            (vec![1.0; m], vec![1.0; n])
        };
        let trip: Vec<(usize, usize, f64)> = p
            .triplets
            .iter()
            .map(|&(r, c, v)| (r, c, v * row_scale[r] * col_scale[c]))
            .collect();
        let a = CscMatrix::from_triplets(m, n, &trip);
        let at = a.transpose();
        let cmax = p
            .cols
            .iter()
            .zip(&col_scale)
            .map(|(c, s)| (c.cost * s).abs())
            .fold(0.0f64, f64::max);
        let obj_scale = if opts.scale && cmax > 0.0 { pow2_round(1.0 / cmax) } else { 1.0 };
        let mut cost = vec![0.0; n + m];
        let mut lower = vec![0.0; n + m];
        let mut upper = vec![0.0; n + m];
        for (j, c) in p.cols.iter().enumerate() {
            cost[j] = c.cost * col_scale[j] * obj_scale;
            lower[j] = c.lower / col_scale[j];
            upper[j] = c.upper / col_scale[j];
        }
        for (i, r) in p.rows.iter().enumerate() {
            let b = r.rhs * row_scale[i];
            let (lo, hi) = match r.sense {
                Sense::Le => (f64::NEG_INFINITY, b),
                Sense::Ge => (b, f64::INFINITY),
                Sense::Eq => (b, b),
            };
            lower[n + i] = lo;
            upper[n + i] = hi;
        }
        let data = Arc::new(LpData {
            n,
            m,
            a,
            at,
            col_scale,
            row_scale,
            obj_scale,
            cost,
            lower: lower.clone(),
            upper: upper.clone(),
        });
        let mut status = vec![Status::AtLower; n + m];
        let mut head = Vec::with_capacity(m);
        for i in 0..m {
            status[n + i] = Status::Basic(i);
            head.push(n + i);
        }
        Self {
            data,
            opts,
            art_lower: vec![false; n + m],
            art_upper: vec![false; n + m],
            lower,
            upper,
            box_size: BOX_START,
            status,
            head,
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            weights: vec![1.0; m],
            factor: BasisFactor::default(),
            iterations: 0,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.data.n
    }

    pub fn num_rows(&self) -> usize {
        self.data.m
    }

    pub fn options_mut(&mut self) -> &mut LpOptions {
        &mut self.opts
    }

    /// Sets bounds of structural column `j` (unscaled units).
    pub fn set_col_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        let s = self.data.col_scale[j];
        self.lower[j] = lower / s;
        self.upper[j] = upper / s;
        self.art_lower[j] = false;
        self.art_upper[j] = false;
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        let s = self.data.col_scale[j];
        let lo = if self.art_lower[j] { f64::NEG_INFINITY } else { self.lower[j] * s };
        let hi = if self.art_upper[j] { f64::INFINITY } else { self.upper[j] * s };
        (lo, hi)
    }

    /// Restores the root bounds of every structural column.
    pub fn reset_bounds(&mut self) {
        let n = self.data.n;
        self.lower[..n].copy_from_slice(&self.data.lower[..n]);
        self.upper[..n].copy_from_slice(&self.data.upper[..n]);
        for j in 0..n {
            self.art_lower[j] = false;
            self.art_upper[j] = false;
        }
    }

    pub fn basis(&self) -> Basis {
        Basis {
            states: self
                .status
                .iter()
                .map(|s| match s {
                    Status::Basic(_) => VarState::Basic,
                    Status::AtLower => VarState::AtLower,
                    Status::AtUpper => VarState::AtUpper,
                })
                .collect(),
        }
    }

    /// Loads a basis; falls back to the logical basis when the snapshot does
    /// not have exactly `m` basic variables.
    pub fn load_basis(&mut self, basis: &Basis) {
        let n = self.data.n;
        let m = self.data.m;
        let nb = basis.states.iter().filter(|s| **s == VarState::Basic).count();
        if basis.states.len() != n + m || nb != m {
            self.load_logical_basis();
            return;
        }
        self.head.clear();
        for (j, s) in basis.states.iter().enumerate() {
            self.status[j] = match s {
                VarState::Basic => {
                    self.head.push(j);
                    Status::Basic(self.head.len() - 1)
                }
                VarState::AtLower => Status::AtLower,
                VarState::AtUpper => Status::AtUpper,
            };
        }
        self.weights = vec![1.0; m];
    }

    pub fn load_logical_basis(&mut self) {
        let n = self.data.n;
        let m = self.data.m;
        self.head.clear();
        for j in 0..n {
            self.status[j] = Status::AtLower;
        }
        for i in 0..m {
            self.status[n + i] = Status::Basic(i);
            self.head.push(n + i);
        }
        self.weights = vec![1.0; m];
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    // ---- linear algebra helpers ----

    fn refactor(&mut self) {
        let m = self.data.m;
        let head = self.head.clone();
        let data = Arc::clone(&self.data);
        let n = data.n;
        let repairs = self.factor.factorize(m, -1.0, |k, buf| {
            let j = head[k];
            if j < n {
                let (rows, vals) = data.a.col(j);
                buf.extend(rows.iter().copied().zip(vals.iter().copied()));
            } else {
                buf.push((j - n, -1.0));
            }
        });
        for rep in repairs {
            let old = self.head[rep.pos];
            let new = n + rep.row;
            log::debug!("basis repair: position {} var {} -> logical {}", rep.pos, old, new);
            // the displaced variable leaves at the nearest finite bound
            self.status[old] = if self.lower[old].is_finite() {
                Status::AtLower
            } else {
                Status::AtUpper
            };
            self.head[rep.pos] = new;
            self.status[new] = Status::Basic(rep.pos);
            self.weights[rep.pos] = 1.0;
        }
    }

    /// Places nonbasic variables on bounds consistent with their reduced cost
    /// signs, boxing missing bounds where needed.
    fn place_nonbasic(&mut self) {
        let tot = self.data.n + self.data.m;
        let tol = self.opts.dual_tol;
        for j in 0..tot {
            if matches!(self.status[j], Status::Basic(_)) {
                continue;
            }
            let lo = self.lower[j];
            let hi = self.upper[j];
            let want_upper = if lo == hi {
                false
            } else if self.d[j] < -tol {
                true
            } else if self.d[j] > tol {
                false
            } else {
                // keep current side if possible
                match self.status[j] {
                    Status::AtUpper => hi.is_finite() || !lo.is_finite(),
                    _ => !lo.is_finite() && hi.is_finite(),
                }
            };
            if want_upper {
                if !hi.is_finite() {
                    self.upper[j] = lo.max(0.0).max(-self.box_size) + self.box_size;
                    self.art_upper[j] = true;
                }
                self.status[j] = Status::AtUpper;
                self.x[j] = self.upper[j];
            } else {
                if !lo.is_finite() {
                    self.lower[j] = hi.min(0.0) - self.box_size;
                    self.art_lower[j] = true;
                }
                self.status[j] = Status::AtLower;
                self.x[j] = self.lower[j];
            }
        }
    }

    fn compute_primal(&mut self) {
        let n = self.data.n;
        let m = self.data.m;
        let mut rhs = vec![0.0; m];
        for j in 0..n + m {
            if matches!(self.status[j], Status::Basic(_)) {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < n {
                let (rows, vals) = self.data.a.col(j);
                for (&r, &a) in rows.iter().zip(vals) {
                    rhs[r] -= a * v;
                }
            } else {
                rhs[j - n] += v;
            }
        }
        self.factor.ftran(&mut rhs);
        for (k, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[k];
        }
    }

    fn compute_duals(&mut self) -> Vec<f64> {
        let n = self.data.n;
        let m = self.data.m;
        let mut y: Vec<f64> = self.head.iter().map(|&j| self.data.cost[j]).collect();
        self.factor.btran(&mut y);
        for j in 0..n {
            if matches!(self.status[j], Status::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let (rows, vals) = self.data.a.col(j);
            let mut acc = self.data.cost[j];
            for (&r, &a) in rows.iter().zip(vals) {
                acc -= a * y[r];
            }
            self.d[j] = acc;
        }
        for i in 0..m {
            let j = n + i;
            self.d[j] = if matches!(self.status[j], Status::Basic(_)) { 0.0 } else { y[i] };
        }
        y
    }

    fn objective_scaled(&self) -> f64 {
        (0..self.data.n).map(|j| self.data.cost[j] * self.x[j]).sum()
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] {
            self.lower[j] - v
        } else if v > self.upper[j] {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    /// Runs the dual simplex from the currently loaded basis.
    pub fn solve(&mut self) -> LpSolution {
        let n = self.data.n;
        let m = self.data.m;
        self.iterations = 0;
        if m == 0 {
            // only bounds: each column sits at its cheapest bound
            return self.solve_bounds_only();
        }
        for round in 0..=BOX_ROUNDS {
            let st = self.run();
            let boxed = self.art_lower.iter().chain(&self.art_upper).any(|&b| b);
            if st == LpStatus::Infeasible && boxed && round < BOX_ROUNDS {
                self.widen_boxes();
                continue;
            }
            if st != LpStatus::Optimal {
                return self.finish(st);
            }
            let touching = (0..n + m).any(|j| {
                (self.art_lower[j] && self.x[j] <= self.lower[j] + self.opts.primal_tol)
                    || (self.art_upper[j] && self.x[j] >= self.upper[j] - self.opts.primal_tol)
            });
            if !touching {
                return self.finish(LpStatus::Optimal);
            }
            if round == BOX_ROUNDS {
                return self.finish(LpStatus::Unbounded);
            }
            self.widen_boxes();
        }
        unreachable!()
    }

    fn widen_boxes(&mut self) {
        self.box_size *= BOX_GROWTH;
        for j in 0..self.data.n + self.data.m {
            if self.art_upper[j] {
                let base = if self.art_lower[j] || !self.lower[j].is_finite() {
                    0.0
                } else {
                    self.lower[j].max(0.0)
                };
                self.upper[j] = base + self.box_size;
            }
            if self.art_lower[j] {
                let base = if self.art_upper[j] || !self.upper[j].is_finite() {
                    0.0
                } else {
                    self.upper[j].min(0.0)
                };
                self.lower[j] = base - self.box_size;
            }
        }
    }

    fn solve_bounds_only(&mut self) -> LpSolution {
        let n = self.data.n;
        let mut x = vec![0.0; n];
        for j in 0..n {
            let c = self.data.cost[j];
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let v = if c > 0.0 {
                lo
            } else if c < 0.0 {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            if !v.is_finite() {
                return LpSolution::empty(LpStatus::Unbounded, n, 0, 0);
            }
            if lo > hi {
                return LpSolution::empty(LpStatus::Infeasible, n, 0, 0);
            }
            x[j] = v;
        }
        for j in 0..n {
            self.x[j] = x[j];
            self.d[j] = self.data.cost[j];
            self.status[j] = if x[j] == self.upper[j] && self.lower[j] != self.upper[j] {
                Status::AtUpper
            } else {
                Status::AtLower
            };
        }
        self.finish_with_duals(LpStatus::Optimal, Vec::new())
    }

    fn finish(&mut self, status: LpStatus) -> LpSolution {
        let n = self.data.n;
        let m = self.data.m;
        if status != LpStatus::Optimal {
            return LpSolution::empty(status, n, m, self.iterations);
        }
        let y = self.compute_duals();
        self.finish_with_duals(status, y)
    }

    fn finish_with_duals(&mut self, status: LpStatus, y: Vec<f64>) -> LpSolution {
        let data = Arc::clone(&self.data);
        let n = data.n;
        let m = data.m;
        let x: Vec<f64> = (0..n)
            .map(|j| {
                let v = self.x[j] * data.col_scale[j];
                // snap onto bounds that the scaled value reached
                let (lo, hi) = self.col_bounds(j);
                if lo.is_finite() && (v - lo).abs() <= 1e-12 * (1.0 + lo.abs()) {
                    lo
                } else if hi.is_finite() && (v - hi).abs() <= 1e-12 * (1.0 + hi.abs()) {
                    hi
                } else {
                    v
                }
            })
            .collect();
        let row_activity: Vec<f64> = (0..m).map(|i| self.x[n + i] / data.row_scale[i]).collect();
        let row_dual: Vec<f64> = (0..m).map(|i| y[i] * data.row_scale[i] / data.obj_scale).collect();
        let reduced_cost: Vec<f64> = (0..n)
            .map(|j| self.d[j] / (data.col_scale[j] * data.obj_scale))
            .collect();
        let objective = self.objective_scaled() / data.obj_scale;
        LpSolution {
            status,
            objective,
            x,
            row_activity,
            row_dual,
            reduced_cost,
            iterations: self.iterations,
        }
    }

    /// Main dual simplex loop. Assumes the basis is loaded.
    fn run(&mut self) -> LpStatus {
        let n = self.data.n;
        let m = self.data.m;
        let ptol = self.opts.primal_tol;
        let dtol = self.opts.dual_tol;

        self.refactor();
        self.compute_duals();
        self.place_nonbasic();
        self.compute_primal();

        let mut rho = vec![0.0; m];
        let mut col = vec![0.0; m];
        let mut tau = vec![0.0; m];
        let mut alpha = ScatterVec::new(n + m);
        let mut best_obj = f64::NEG_INFINITY;
        let mut stall = 0usize;
        let mut bland = false;
        let mut recheck = 0usize;

        loop {
            if self.iterations >= self.opts.max_iterations {
                return LpStatus::IterationLimit;
            }
            // -- pricing
            let mut r_best: Option<usize> = None;
            let mut score_best = 0.0;
            for k in 0..m {
                let j = self.head[k];
                let inf = self.infeasibility(j);
                if inf <= ptol {
                    continue;
                }
                if bland {
                    match r_best {
                        Some(rb) if self.head[rb] <= j => {}
                        _ => r_best = Some(k),
                    }
                } else {
                    let score = inf * inf / self.weights[k];
                    if score > score_best {
                        score_best = score;
                        r_best = Some(k);
                    }
                }
            }
            let Some(r) = r_best else {
                // verify with a fresh factorization before declaring optimality
                if self.factor.num_updates() > 0 && recheck < 3 {
                    recheck += 1;
                    self.refactor();
                    self.compute_duals();
                    self.place_nonbasic();
                    self.compute_primal();
                    continue;
                }
                return LpStatus::Optimal;
            };
            let leave = self.head[r];
            let to_lower = self.x[leave] < self.lower[leave];
            let target = if to_lower { self.lower[leave] } else { self.upper[leave] };

            // -- row of the tableau
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            alpha.clear();
            for (i, &ri) in rho.iter().enumerate() {
                if ri == 0.0 {
                    continue;
                }
                let (cols, vals) = self.data.at.col(i);
                for (&j, &a) in cols.iter().zip(vals) {
                    alpha.add(j, ri * a);
                }
                alpha.add(n + i, -ri);
            }

            // -- ratio test (Harris two-pass)
            let eligible = |a: f64, st: Status| -> bool {
                match st {
                    Status::Basic(_) => false,
                    Status::AtLower => (a < -PIVOT_TOL && to_lower) || (a > PIVOT_TOL && !to_lower),
                    Status::AtUpper => (a > PIVOT_TOL && to_lower) || (a < -PIVOT_TOL && !to_lower),
                }
            };
            let mut theta_max = f64::INFINITY;
            for &j in &alpha.touched {
                let a = alpha.vals[j];
                let st = self.status[j];
                if self.lower[j] == self.upper[j] || !eligible(a, st) {
                    continue;
                }
                let dj = self.d[j].abs();
                let t = (dj + dtol) / a.abs();
                if t < theta_max {
                    theta_max = t;
                }
            }
            if theta_max == f64::INFINITY {
                // confirm with a fresh factorization
                if self.factor.num_updates() > 0 {
                    self.refactor();
                    self.compute_duals();
                    self.place_nonbasic();
                    self.compute_primal();
                    continue;
                }
                return LpStatus::Infeasible;
            }
            let mut q: Option<usize> = None;
            let mut q_abs = 0.0;
            let mut q_ratio = f64::INFINITY;
            for &j in &alpha.touched {
                let a = alpha.vals[j];
                let st = self.status[j];
                if self.lower[j] == self.upper[j] || !eligible(a, st) {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                if ratio > theta_max {
                    continue;
                }
                let better = if bland {
                    match q {
                        None => true,
                        Some(qb) => ratio < q_ratio - 1e-12 || (ratio <= q_ratio + 1e-12 && j < qb),
                    }
                } else {
                    a.abs() > q_abs || (a.abs() == q_abs && Some(j) < q)
                };
                if better {
                    q = Some(j);
                    q_abs = a.abs();
                    q_ratio = ratio;
                }
            }
            let q = q.expect("candidate exists when theta_max is finite");
            let alpha_q = alpha.vals[q];

            // -- column of the entering variable
            col.iter_mut().for_each(|v| *v = 0.0);
            if q < n {
                let (rows, vals) = self.data.a.col(q);
                for (&i, &a) in rows.iter().zip(vals) {
                    col[i] = a;
                }
            } else {
                col[q - n] = -1.0;
            }
            self.factor.ftran(&mut col);
            let piv = col[r];
            if (piv - alpha_q).abs() > 1e-6 * (1.0 + piv.abs()) || piv.abs() < PIVOT_TOL {
                if self.factor.num_updates() > 0 {
                    log::debug!("pivot mismatch {piv} vs {alpha_q}; refactoring");
                    self.refactor();
                    self.compute_duals();
                    self.place_nonbasic();
                    self.compute_primal();
                    continue;
                }
                if piv.abs() < PIVOT_TOL {
                    log::debug!("pivot {piv} too small on a fresh factorization");
                    return LpStatus::IterationLimit;
                }
            }

            // -- dual update
            let theta_d = self.d[q] / alpha_q;
            for &j in &alpha.touched {
                if matches!(self.status[j], Status::Basic(_)) {
                    continue;
                }
                self.d[j] -= theta_d * alpha.vals[j];
            }
            self.d[q] = 0.0;
            self.d[leave] = -theta_d;

            // -- dual steepest-edge reference vector
            tau.copy_from_slice(&rho);
            self.factor.ftran(&mut tau);

            // -- primal update
            let delta = (self.x[leave] - target) / piv;
            for k in 0..m {
                let c = col[k];
                if c != 0.0 {
                    let j = self.head[k];
                    self.x[j] -= c * delta;
                }
            }
            self.x[q] += delta;
            self.x[leave] = target;

            // -- weights
            let wr = self.weights[r];
            for k in 0..m {
                if k == r {
                    continue;
                }
                let c = col[k];
                if c == 0.0 {
                    continue;
                }
                let ratio = c / piv;
                let w = self.weights[k] - 2.0 * ratio * tau[k] + ratio * ratio * wr;
                self.weights[k] = w.max(ratio * ratio).max(1e-8);
            }
            self.weights[r] = (wr / (piv * piv)).max(1e-8);

            // -- basis change
            self.head[r] = q;
            self.status[q] = Status::Basic(r);
            self.status[leave] = if to_lower { Status::AtLower } else { Status::AtUpper };
            self.factor.update(r, &col);
            self.iterations += 1;

            let obj = self.objective_scaled();
            if obj > best_obj + 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
                if bland {
                    bland = false;
                }
            } else {
                stall += 1;
                if stall >= self.opts.stall_threshold && !bland {
                    log::debug!("stalled for {stall} iterations; switching to Bland's rule");
                    bland = true;
                    stall = 0;
                }
            }

            if self.factor.num_updates() >= self.opts.refactor_interval
                || self.factor.eta_nnz() > 4 * self.factor.lu_nnz() + 10 * m
            {
                self.refactor();
                self.compute_duals();
                self.place_nonbasic();
                self.compute_primal();
            }
        }
    }
}
