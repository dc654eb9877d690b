//! Sparse LU factorization of simplex bases with product-form updates.
//!
//! The basis matrix `B` (columns indexed by basis position) is factorized
//! left-looking with threshold partial pivoting: `B Q = L U`, where `L` is
//! unit lower triangular under the row permutation and `U` is upper triangular
//! in step order. Basis changes between refactorizations are kept as eta
//! columns.

/// Entries below this magnitude are dropped from `L` and `U`.
const DROP_TOL: f64 = 1e-14;
/// Threshold partial pivoting parameter.
const PIVOT_THRESHOLD: f64 = 0.01;
/// Absolute pivot magnitude below which a column counts as dependent.
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// A column replaced by a unit column during factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Repair {
    pub pos: usize,
    pub row: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct BasisFactor {
    m: usize,
    /// Pivot row of each step.
    prow: Vec<usize>,
    /// Basis position eliminated at each step.
    qpos: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_ptr: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
    work: Vec<f64>,
}

impl BasisFactor {
    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.etas.iter().map(|e| e.idx.len()).sum()
    }

    pub fn lu_nnz(&self) -> usize {
        self.l_idx.len() + self.u_idx.len() + self.m
    }

    /// Factorizes the basis whose column at position `k` is produced by
    /// `column(k, &mut buf)`. Dependent columns are replaced by unit columns
    /// on unpivoted rows; the replacements are returned so the caller can
    /// swap in the matching logical variables. A replacement column
    /// `sign * e_row` is used, where `sign` is `logical_sign`.
    pub fn factorize<F>(&mut self, m: usize, logical_sign: f64, mut column: F) -> Vec<Repair>
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        self.m = m;
        self.etas.clear();
        self.prow.clear();
        self.qpos.clear();
        self.l_ptr.clear();
        self.l_idx.clear();
        self.l_val.clear();
        self.u_ptr.clear();
        self.u_idx.clear();
        self.u_val.clear();
        self.u_diag.clear();
        self.l_ptr.push(0);
        self.u_ptr.push(0);

        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        let mut row_count = vec![0usize; m];
        for k in 0..m {
            let mut buf = Vec::new();
            column(k, &mut buf);
            for &(i, _) in &buf {
                row_count[i] += 1;
            }
            cols.push(buf);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (cols[k].len(), k));

        // step index of each pivoted row
        let mut step_of_row: Vec<usize> = vec![usize::MAX; m];
        let mut x = vec![0.0f64; m];
        let mut in_pattern = vec![false; m];
        let mut pattern: Vec<usize> = Vec::new();
        let mut topo: Vec<usize> = Vec::new();
        let mut visited = vec![false; m];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut deferred: Vec<usize> = Vec::new();

        for &pos in &order {
            let col = &cols[pos];
            pattern.clear();
            topo.clear();
            for &(i, v) in col {
                x[i] += v;
                if !in_pattern[i] {
                    in_pattern[i] = true;
                    pattern.push(i);
                }
            }
            // Depth-first reach over the graph of L to get a topological order
            // of the steps that touch this column.
            for &(i0, _) in col {
                let s0 = step_of_row[i0];
                if s0 == usize::MAX || visited[s0] {
                    continue;
                }
                visited[s0] = true;
                stack.push((s0, self.l_ptr[s0]));
                while let Some(&mut (s, ref mut next)) = stack.last_mut() {
                    let end = self.l_ptr[s + 1];
                    let mut pushed = false;
                    while *next < end {
                        let i = self.l_idx[*next];
                        *next += 1;
                        if !in_pattern[i] {
                            in_pattern[i] = true;
                            pattern.push(i);
                        }
                        let si = step_of_row[i];
                        if si != usize::MAX && !visited[si] {
                            visited[si] = true;
                            stack.push((si, self.l_ptr[si]));
                            pushed = true;
                            break;
                        }
                    }
                    if !pushed {
                        topo.push(s);
                        stack.pop();
                    }
                }
            }
            for &s in topo.iter().rev() {
                visited[s] = false;
                let xs = x[self.prow[s]];
                if xs == 0.0 {
                    continue;
                }
                for k in self.l_ptr[s]..self.l_ptr[s + 1] {
                    x[self.l_idx[k]] -= self.l_val[k] * xs;
                }
            }
            // pick pivot among unpivoted rows
            let mut amax: f64 = 0.0;
            for &i in &pattern {
                if step_of_row[i] == usize::MAX {
                    amax = amax.max(x[i].abs());
                }
            }
            if amax < SINGULAR_TOL {
                for &i in &pattern {
                    x[i] = 0.0;
                    in_pattern[i] = false;
                }
                deferred.push(pos);
                continue;
            }
            let mut best: Option<usize> = None;
            for &i in &pattern {
                if step_of_row[i] != usize::MAX {
                    continue;
                }
                let a = x[i].abs();
                if a < PIVOT_THRESHOLD * amax {
                    continue;
                }
                best = match best {
                    None => Some(i),
                    Some(b) => {
                        let better = (row_count[i], -a, i) < (row_count[b], -x[b].abs(), b);
                        if better {
                            Some(i)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            let p = best.expect("pivot candidate exists when amax > 0");
            let piv = x[p];
            let step = self.prow.len();
            for &i in &pattern {
                let v = x[i];
                x[i] = 0.0;
                in_pattern[i] = false;
                if i == p || v.abs() < DROP_TOL {
                    continue;
                }
                let si = step_of_row[i];
                if si != usize::MAX {
                    self.u_idx.push(si);
                    self.u_val.push(v);
                } else {
                    self.l_idx.push(i);
                    self.l_val.push(v / piv);
                }
            }
            self.u_diag.push(piv);
            self.u_ptr.push(self.u_idx.len());
            self.l_ptr.push(self.l_idx.len());
            self.prow.push(p);
            self.qpos.push(pos);
            step_of_row[p] = step;
        }

        let mut repairs = Vec::new();
        if !deferred.is_empty() {
            let free_rows: Vec<usize> = (0..m).filter(|&i| step_of_row[i] == usize::MAX).collect();
            debug_assert_eq!(free_rows.len(), deferred.len());
            for (&pos, &row) in deferred.iter().zip(&free_rows) {
                let step = self.prow.len();
                self.u_diag.push(logical_sign);
                self.u_ptr.push(self.u_idx.len());
                self.l_ptr.push(self.l_idx.len());
                self.prow.push(row);
                self.qpos.push(pos);
                step_of_row[row] = step;
                repairs.push(Repair { pos, row });
            }
        }
        self.work = vec![0.0; m];
        repairs
    }

    /// Solves `B z = a` in place: `rhs` enters indexed by row and leaves
    /// indexed by basis position.
    pub fn ftran(&mut self, rhs: &mut [f64]) {
        let m = self.m;
        // L solve, row indexed
        for s in 0..m {
            let v = rhs[self.prow[s]];
            if v == 0.0 {
                continue;
            }
            for k in self.l_ptr[s]..self.l_ptr[s + 1] {
                rhs[self.l_idx[k]] -= self.l_val[k] * v;
            }
        }
        // gather into step order
        let w = &mut self.work;
        for s in 0..m {
            w[s] = rhs[self.prow[s]];
        }
        // U back substitution
        for s in (0..m).rev() {
            let v = w[s];
            if v == 0.0 {
                continue;
            }
            let v = v / self.u_diag[s];
            w[s] = v;
            for k in self.u_ptr[s]..self.u_ptr[s + 1] {
                w[self.u_idx[k]] -= self.u_val[k] * v;
            }
        }
        for s in 0..m {
            rhs[self.qpos[s]] = w[s];
        }
        for eta in &self.etas {
            let zr = rhs[eta.pos];
            if zr == 0.0 {
                continue;
            }
            let zr = zr / eta.pivot;
            rhs[eta.pos] = zr;
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                rhs[i] -= a * zr;
            }
        }
    }

    /// Solves `B^T y = c` in place: `rhs` enters indexed by basis position and
    /// leaves indexed by row.
    pub fn btran(&mut self, rhs: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut acc = rhs[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                acc -= a * rhs[i];
            }
            rhs[eta.pos] = acc / eta.pivot;
        }
        let w = &mut self.work;
        for s in 0..m {
            w[s] = rhs[self.qpos[s]];
        }
        // U^T forward
        for s in 0..m {
            let mut acc = w[s];
            for k in self.u_ptr[s]..self.u_ptr[s + 1] {
                acc -= self.u_val[k] * w[self.u_idx[k]];
            }
            w[s] = acc / self.u_diag[s];
        }
        // L^T backward, row indexed
        for s in (0..m).rev() {
            let mut acc = w[s];
            for k in self.l_ptr[s]..self.l_ptr[s + 1] {
                acc -= self.l_val[k] * rhs[self.l_idx[k]];
            }
            rhs[self.prow[s]] = acc;
        }
    }

    /// Records the replacement of the column at `pos` by a column whose
    /// FTRAN image (position indexed) is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            idx,
            val,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_cols(a: &[Vec<f64>]) -> Vec<Vec<(usize, f64)>> {
        let m = a.len();
        (0..m)
            .map(|k| {
                (0..m)
                    .filter(|&i| a[i][k] != 0.0)
                    .map(|i| (i, a[i][k]))
                    .collect()
            })
            .collect()
    }

    fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
            .collect()
    }

    fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let m = a.len();
        (0..m).map(|j| (0..m).map(|i| a[i][j]).collect()).collect()
    }

    #[test]
    fn solves_small_dense_system() {
        let a = vec![
            vec![4.0, 0.0, 1.0, 0.0],
            vec![1.0, 3.0, 0.0, 0.0],
            vec![0.0, 2.0, 5.0, 1.0],
            vec![0.0, 0.0, 1.0, 2.0],
        ];
        let cols = dense_cols(&a);
        let mut f = BasisFactor::default();
        let rep = f.factorize(4, -1.0, |k, buf| buf.extend_from_slice(&cols[k]));
        assert!(rep.is_empty());
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let mut z = b.clone();
        f.ftran(&mut z);
        let back = matvec(&a, &z);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let mut y = b.clone();
        f.btran(&mut y);
        let back = matvec(&transpose(&a), &y);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_refactorization() {
        let mut a = vec![
            vec![2.0, 1.0, 0.0],
            vec![0.0, 3.0, 1.0],
            vec![1.0, 0.0, 4.0],
        ];
        let cols = dense_cols(&a);
        let mut f = BasisFactor::default();
        f.factorize(3, -1.0, |k, buf| buf.extend_from_slice(&cols[k]));
        // replace column 1 by (1, 1, 1)
        let newcol = vec![1.0, 1.0, 1.0];
        let mut alpha = newcol.clone();
        f.ftran(&mut alpha);
        f.update(1, &alpha);
        for i in 0..3 {
            a[i][1] = newcol[i];
        }
        let b = vec![0.5, -1.0, 2.0];
        let mut z = b.clone();
        f.ftran(&mut z);
        let back = matvec(&a, &z);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
        let mut y = b.clone();
        f.btran(&mut y);
        let back = matvec(&transpose(&a), &y);
        for (p, q) in back.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_column_is_repaired() {
        // column 2 = column 0 + column 1
        let a = vec![
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 0.0],
        ];
        let cols = dense_cols(&a);
        let mut f = BasisFactor::default();
        let rep = f.factorize(3, -1.0, |k, buf| buf.extend_from_slice(&cols[k]));
        assert_eq!(rep.len(), 1);
        assert_eq!(rep[0].row, 2);
    }
}
