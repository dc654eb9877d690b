/// Compressed sparse column storage. Row-major access uses the transpose.
#[derive(Debug, Clone, Default)]
pub(crate) struct CscMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CscMatrix {
    /// Builds from triplets; duplicates must already be merged.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; ncols + 1];
        for &(_, c, _) in triplets {
            counts[c + 1] += 1;
        }
        for j in 0..ncols {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = next[c];
            row_idx[k] = r;
            vals[k] = v;
            next[c] += 1;
        }
        let mut m = Self {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            vals,
        };
        m.sort_columns();
        m
    }

    fn sort_columns(&mut self) {
        for j in 0..self.ncols {
            let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
            if self.row_idx[s..e].windows(2).all(|w| w[0] <= w[1]) {
                continue;
            }
            let mut pairs: Vec<(usize, f64)> = self.row_idx[s..e]
                .iter()
                .copied()
                .zip(self.vals[s..e].iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            for (k, (r, v)) in pairs.into_iter().enumerate() {
                self.row_idx[s + k] = r;
                self.vals[s + k] = v;
            }
        }
    }

    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[s..e], &self.vals[s..e])
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut trip = Vec::with_capacity(self.vals.len());
        for j in 0..self.ncols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                trip.push((j, r, v));
            }
        }
        CscMatrix::from_triplets(self.ncols, self.nrows, &trip)
    }
}

/// Dense work vector that remembers which entries were touched.
#[derive(Debug, Clone)]
pub(crate) struct ScatterVec {
    pub vals: Vec<f64>,
    pub touched: Vec<usize>,
    mark: Vec<bool>,
}

impl ScatterVec {
    pub fn new(n: usize) -> Self {
        Self {
            vals: vec![0.0; n],
            touched: Vec::new(),
            mark: vec![false; n],
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, v: f64) {
        if !self.mark[i] {
            self.mark[i] = true;
            self.touched.push(i);
        }
        self.vals[i] += v;
    }

    pub fn clear(&mut self) {
        for &i in &self.touched {
            self.vals[i] = 0.0;
            self.mark[i] = false;
        }
        self.touched.clear();
    }
}
