//! Row-major stacks of per-agent row vectors.
//!
//! Row `i` of an [`AgentMatrix`] is agent `i`'s vector in R^N. Norms of whole
//! stacks are Frobenius norms.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct AgentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl AgentMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        AgentMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::param("agent matrix needs at least one non-empty row"));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("agent matrix rows have unequal lengths"));
        }
        Ok(AgentMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        AgentMatrix { rows, cols, data }
    }

    /// Every row equal to `row`.
    pub fn repeat_row(rows: usize, row: &[f64]) -> Self {
        AgentMatrix {
            rows,
            cols: row.len(),
            data: row.repeat(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Column-wise average (1/n) 1ᵀ X.
    pub fn column_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        let n = self.rows as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// ‖X − 1 v‖.
    pub fn distance_to_row(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.cols);
        self.data
            .chunks(self.cols)
            .flat_map(|row| row.iter().zip(v).map(|(a, b)| (a - b) * (a - b)))
            .sum::<f64>()
            .sqrt()
    }

    /// Consensus error ‖X − 1 x̄‖.
    pub fn deviation_norm(&self) -> f64 {
        self.distance_to_row(&self.column_mean())
    }

    pub fn distance(&self, other: &AgentMatrix) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut out = AgentMatrix::zeros(self.rows, self.cols);
        for (i, &p) in perm.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(p));
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deviation_of_consensual_stack_is_zero() {
        let m = AgentMatrix::repeat_row(4, &[1.5, -2.0]);
        assert_eq!(m.deviation_norm(), 0.0);
        assert_eq!(m.column_mean(), vec![1.5, -2.0]);
    }

    #[test]
    fn deviation_matches_hand_value() {
        let m = AgentMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 2.0]]).unwrap();
        // mean (0, 1); deviations (1,-1), (-1,1)
        assert!((m.deviation_norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(AgentMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(AgentMatrix::from_rows(&[]).is_err());
    }
}
