use std::fmt;

use crate::error::MilpError;

/// Direction of a linear row `a·x (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    /// Free-form annotation carried through MPS comments.
    pub tag: String,
}

/// A minimization problem over bounded columns with linear rows.
///
/// Coefficients are stored as triplets in assembly order. Duplicate `(row, col)`
/// entries are summed by [`Problem::compress`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Problem {
    pub name: String,
    pub cols: Vec<Column>,
    pub rows: Vec<Row>,
    pub triplets: Vec<(usize, usize, f64)>,
}

impl Problem {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_col(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.cols.push(Column {
            name: name.into(),
            lower,
            upper,
            cost,
            binary: false,
        });
        self.cols.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.cols.push(Column {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            cost,
            binary: true,
        });
        self.cols.len() - 1
    }

    /// Appends a row; zero coefficients are dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        tag: impl Into<String>,
        terms: &[(usize, f64)],
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let r = self.rows.len();
        self.rows.push(Row {
            name: name.into(),
            sense,
            rhs,
            tag: tag.into(),
        });
        for &(c, v) in terms {
            if v != 0.0 {
                self.triplets.push((r, c, v));
            }
        }
        r
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, c)| c.binary)
            .map(|(j, _)| j)
    }

    /// Sums duplicate entries and drops exact zeros, keeping first-occurrence order.
    pub fn compress(&mut self) {
        let mut seen: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::with_capacity(self.triplets.len());
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.triplets.len());
        for &(r, c, v) in &self.triplets {
            match seen.get(&(r, c)) {
                Some(&k) => out[k].2 += v,
                None => {
                    seen.insert((r, c), out.len());
                    out.push((r, c, v));
                }
            }
        }
        out.retain(|t| t.2 != 0.0);
        self.triplets = out;
    }

    /// Structural checks: indices in range, finite data, consistent bounds.
    pub fn check(&self) -> Result<(), MilpError> {
        for (j, c) in self.cols.iter().enumerate() {
            if c.lower.is_nan() || c.upper.is_nan() || !c.cost.is_finite() {
                return Err(MilpError::NonFinite {
                    what: format!("column {} ({})", j, c.name),
                });
            }
            if c.lower > c.upper {
                return Err(MilpError::InvalidBounds {
                    col: c.name.clone(),
                    lower: c.lower,
                    upper: c.upper,
                });
            }
            if c.binary && (c.lower < 0.0 || c.upper > 1.0) {
                return Err(MilpError::InvalidBounds {
                    col: c.name.clone(),
                    lower: c.lower,
                    upper: c.upper,
                });
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(MilpError::NonFinite {
                    what: format!("rhs of row {}", r.name),
                });
            }
        }
        for &(r, c, v) in &self.triplets {
            if r >= self.rows.len() || c >= self.cols.len() {
                return Err(MilpError::IndexOutOfRange { row: r, col: c });
            }
            if !v.is_finite() {
                return Err(MilpError::NonFinite {
                    what: format!("coefficient of {} in row {}", self.cols[c].name, self.rows[r].name),
                });
            }
        }
        Ok(())
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for &(r, c, v) in &self.triplets {
            act[r] += v * x[c];
        }
        act
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.cols.iter().zip(x).map(|(c, &v)| c.cost * v).sum()
    }

    /// Largest violation of any row or column bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, &v) in self.cols.iter().zip(x) {
            worst = worst.max(c.lower - v).max(v - c.upper);
        }
        for (row, a) in self.rows.iter().zip(self.activities(x)) {
            let viol = match row.sense {
                Sense::Le => a - row.rhs,
                Sense::Ge => row.rhs - a,
                Sense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Same as [`Problem::max_violation`], but each row residual is divided by
    /// `max(1, |rhs|, max |a_ij|)`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let mut row_scale: Vec<f64> = self.rows.iter().map(|r| r.rhs.abs().max(1.0)).collect();
        for &(r, _, v) in &self.triplets {
            row_scale[r] = row_scale[r].max(v.abs());
        }
        let mut worst: f64 = 0.0;
        for (c, &v) in self.cols.iter().zip(x) {
            worst = worst.max(c.lower - v).max(v - c.upper);
        }
        for ((row, a), s) in self.rows.iter().zip(self.activities(x)).zip(row_scale) {
            let viol = match row.sense {
                Sense::Le => a - row.rhs,
                Sense::Ge => row.rhs - a,
                Sense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(viol / s);
        }
        worst
    }
}
