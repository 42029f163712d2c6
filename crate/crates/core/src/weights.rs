//! Doubly stochastic consensus matrices and their deflated spectral norm σ.

use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::AgentMatrix;

/// Default tolerance for row/column sums.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Dense n×n consensus matrix with a cached sparse view for mixing.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    dense: DMatrix<f64>,
    sparse_rows: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for WeightMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.dense == other.dense
    }
}

impl WeightMatrix {
    /// Wraps an arbitrary square matrix. No validation is performed; see
    /// [`validate_weights`].
    pub fn from_dense(dense: DMatrix<f64>) -> Result<Self> {
        if dense.nrows() != dense.ncols() || dense.nrows() == 0 {
            return Err(Error::param("weight matrix must be square and non-empty"));
        }
        let sparse_rows = (0..dense.nrows())
            .map(|i| {
                (0..dense.ncols())
                    .filter(|&j| dense[(i, j)] != 0.0)
                    .map(|j| (j, dense[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(WeightMatrix { dense, sparse_rows })
    }

    pub fn identity(n: usize) -> Result<Self> {
        WeightMatrix::from_dense(DMatrix::identity(n, n))
    }

    /// (1/n) 1 1ᵀ.
    pub fn averaging(n: usize) -> Result<Self> {
        WeightMatrix::from_dense(DMatrix::from_element(n, n, 1.0 / n as f64))
    }

    pub fn n(&self) -> usize {
        self.dense.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dense[(i, j)]
    }

    pub fn dense(&self) -> &DMatrix<f64> {
        &self.dense
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..i).all(|j| (self.dense[(i, j)] - self.dense[(j, i)]).abs() <= tol))
    }

    /// `out = W x`, using only the nonzero pattern of W.
    pub fn mix_into(&self, x: &AgentMatrix, out: &mut AgentMatrix) {
        debug_assert_eq!(x.rows(), self.n());
        debug_assert_eq!(out.rows(), self.n());
        for (i, row) in self.sparse_rows.iter().enumerate() {
            let target = out.row_mut(i);
            target.fill(0.0);
            for &(j, w) in row {
                for (t, v) in target.iter_mut().zip(x.row(j)) {
                    *t += w * v;
                }
            }
        }
    }

    pub fn mix(&self, x: &AgentMatrix) -> AgentMatrix {
        let mut out = AgentMatrix::zeros(x.rows(), x.cols());
        self.mix_into(x, &mut out);
        out
    }

    /// Applies W to a column vector in Rⁿ.
    pub fn apply(&self, omega: &[f64]) -> Vec<f64> {
        self.sparse_rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * omega[j]).sum())
            .collect()
    }

    /// P W Pᵀ for the relabeling where new index `k` is old index `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        WeightMatrix::from_dense(DMatrix::from_fn(n, n, |a, b| self.dense[(perm[a], perm[b])]))
    }

    /// CSV dump: n rows of n comma-separated values, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            let line: Vec<String> = (0..self.n())
                .map(|j| format!("{:.16e}", self.dense[(i, j)]))
                .collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}

fn require_connected(g: &Graph) -> Result<()> {
    if g.is_connected() {
        Ok(())
    } else {
        Err(Error::param("consensus weights need a connected graph"))
    }
}

/// Laplacian-method weights W = I − L / (max_i d_i + 1).
pub fn build_laplacian_weights(g: &Graph) -> Result<WeightMatrix> {
    require_connected(g)?;
    let n = g.n();
    let scale = 1.0 / (g.max_degree() as f64 + 1.0);
    let mut w = DMatrix::zeros(n, n);
    for &(a, b) in g.edges() {
        w[(a, b)] = scale;
        w[(b, a)] = scale;
    }
    for i in 0..n {
        w[(i, i)] = 1.0 - g.degree(i) as f64 * scale;
    }
    WeightMatrix::from_dense(w)
}

/// Lazy Metropolis weights: w_ij = 1 / (2 max(d_i, d_j)) on edges, the
/// diagonal absorbing the remaining row mass.
pub fn build_lazy_metropolis(g: &Graph) -> Result<WeightMatrix> {
    require_connected(g)?;
    let n = g.n();
    let mut w = DMatrix::zeros(n, n);
    for &(a, b) in g.edges() {
        let v = 1.0 / (2.0 * g.degree(a).max(g.degree(b)) as f64);
        w[(a, b)] = v;
        w[(b, a)] = v;
    }
    for i in 0..n {
        let off: f64 = g
            .neighbors(i)
            .iter()
            .map(|&q| 1.0 / (2.0 * g.degree(i).max(g.degree(q)) as f64))
            .sum();
        w[(i, i)] = 1.0 - off;
    }
    WeightMatrix::from_dense(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralInfo {
    /// Spectral norm of W − (1/n) 1 1ᵀ.
    pub sigma: f64,
}

/// Largest singular value of W − (1/n) 1 1ᵀ.
///
/// Symmetric W goes through a symmetric eigendecomposition (σ is then the
/// largest |eigenvalue| of the deflated matrix); anything else uses an SVD.
pub fn sigma(w: &WeightMatrix) -> Result<SpectralInfo> {
    let (rows, cols) = stochastic_sum_errors(w);
    let worst = rows.iter().chain(&cols).fold(0.0f64, |m, e| m.max(e.abs()));
    if worst > DEFAULT_TOLERANCE {
        return Err(Error::Precondition(format!(
            "weight matrix is not doubly stochastic (max sum error {worst:e})"
        )));
    }
    let n = w.n();
    let deflated = w.dense() - DMatrix::from_element(n, n, 1.0 / n as f64);
    let sigma = if w.is_symmetric(0.0) {
        let sym = (&deflated + deflated.transpose()) * 0.5;
        sym.symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
    } else {
        deflated
            .singular_values()
            .iter()
            .fold(0.0f64, |m, s| m.max(*s))
    };
    Ok(SpectralInfo { sigma })
}

/// Upper bound 1 − 1/(71 U²) on σ for lazy Metropolis weights, U ≥ n.
pub fn metropolis_sigma_upper_bound(upper_bound: usize) -> Result<f64> {
    if upper_bound < 2 {
        return Err(Error::param("agent-count bound U must be >= 2"));
    }
    let u = upper_bound as f64;
    Ok(1.0 - 1.0 / (71.0 * u * u))
}

fn stochastic_sum_errors(w: &WeightMatrix) -> (Vec<f64>, Vec<f64>) {
    let d = w.dense();
    let rows = d.row_iter().map(|r| r.sum() - 1.0).collect();
    let cols = d.column_iter().map(|c| c.sum() - 1.0).collect();
    (rows, cols)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DimensionMismatch { weights: usize, graph: usize },
    /// Nonzero weight where the graph has no edge.
    Sparsity { i: usize, j: usize, value: f64 },
    /// Non-positive weight on an edge or the diagonal.
    Positivity { i: usize, j: usize, value: f64 },
    RowSum { row: usize, error: f64 },
    ColumnSum { column: usize, error: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DimensionMismatch { weights, graph } => {
                write!(f, "weights are {weights}x{weights} but the graph has {graph} vertices")
            }
            Violation::Sparsity { i, j, value } => write!(f, "w[{i}][{j}] = {value:e} on a non-edge"),
            Violation::Positivity { i, j, value } => write!(f, "w[{i}][{j}] = {value:e} is not positive"),
            Violation::RowSum { row, error } => write!(f, "row {row} sums to 1 {error:+e}"),
            Violation::ColumnSum { column, error } => write!(f, "column {column} sums to 1 {error:+e}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Informational only; doubly stochastic weights need not be symmetric.
    pub symmetric: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks sparsity pattern, positivity and double stochasticity of `w` against `g`.
pub fn validate_weights(w: &WeightMatrix, g: &Graph, tol: f64) -> ValidationReport {
    let mut report = ValidationReport {
        violations: Vec::new(),
        symmetric: w.is_symmetric(tol),
    };
    if w.n() != g.n() {
        report.violations.push(Violation::DimensionMismatch {
            weights: w.n(),
            graph: g.n(),
        });
        return report;
    }
    let n = w.n();
    for i in 0..n {
        for j in 0..n {
            let value = w.get(i, j);
            if i == j || g.has_edge(i, j) {
                if value <= 0.0 {
                    report.violations.push(Violation::Positivity { i, j, value });
                }
            } else if value != 0.0 {
                report.violations.push(Violation::Sparsity { i, j, value });
            }
        }
    }
    let (rows, cols) = stochastic_sum_errors(w);
    for (row, &error) in rows.iter().enumerate() {
        if error.abs() > tol {
            report.violations.push(Violation::RowSum { row, error });
        }
    }
    for (column, &error) in cols.iter().enumerate() {
        if error.abs() > tol {
            report.violations.push(Violation::ColumnSum { column, error });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete, gen_erdos_renyi, gen_path};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15
    }

    #[test]
    fn laplacian_complete_two() {
        let w = build_laplacian_weights(&gen_complete(2).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(w.get(i, j), 0.5));
            }
        }
        assert!(sigma(&w).unwrap().sigma.abs() < 1e-15);
    }

    #[test]
    fn laplacian_path_three() {
        let w = build_laplacian_weights(&gen_path(3).unwrap()).unwrap();
        assert!(close(w.get(0, 1), 1.0 / 3.0));
        assert!(close(w.get(1, 2), 1.0 / 3.0));
        assert!(close(w.get(0, 0), 2.0 / 3.0));
        assert!(close(w.get(1, 1), 1.0 / 3.0));
        assert!(close(w.get(2, 2), 2.0 / 3.0));
        assert_eq!(w.get(0, 2), 0.0);
    }

    #[test]
    fn path_three_sigma_is_two_thirds() {
        // W has eigenvalues 1, 2/3, 0 (eigvecs 1, (1,0,-1), (1,-2,1)).
        let w = build_laplacian_weights(&gen_path(3).unwrap()).unwrap();
        assert!((sigma(&w).unwrap().sigma - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn metropolis_path_three() {
        let w = build_lazy_metropolis(&gen_path(3).unwrap()).unwrap();
        assert!(close(w.get(0, 1), 0.25));
        assert!(close(w.get(0, 0), 0.75));
        assert!(close(w.get(1, 1), 0.5));
        assert!(close(w.get(2, 2), 0.75));
    }

    #[test]
    fn metropolis_complete_two() {
        // both degrees are 1, so all four entries are 1/2
        let w = build_lazy_metropolis(&gen_complete(2).unwrap()).unwrap();
        assert!(close(w.get(0, 1), 0.5));
        assert!(close(w.get(0, 0), 0.5));
        assert!(close(w.get(1, 1), 0.5));
    }

    #[test]
    fn builders_reject_disconnected() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert!(build_laplacian_weights(&g).is_err());
        assert!(build_lazy_metropolis(&g).is_err());
    }

    #[test]
    fn sigma_edge_cases() {
        assert!(sigma(&WeightMatrix::averaging(5).unwrap()).unwrap().sigma < 1e-15);
        assert!((sigma(&WeightMatrix::identity(4).unwrap()).unwrap().sigma - 1.0).abs() < 1e-15);
        let mut bad = DMatrix::identity(3, 3);
        bad[(0, 0)] = 1.1;
        assert!(matches!(
            sigma(&WeightMatrix::from_dense(bad).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sigma_non_symmetric_uses_singular_values() {
        // Doubly stochastic, non-symmetric 3-cycle mixing.
        let d = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.5]);
        let w = WeightMatrix::from_dense(d.clone()).unwrap();
        let deflated = d - DMatrix::from_element(3, 3, 1.0 / 3.0);
        // Independent route: ‖A‖₂² = λ_max(AᵀA).
        let gram = deflated.transpose() * &deflated;
        let lmax = gram.symmetric_eigenvalues().max();
        assert!((sigma(&w).unwrap().sigma - lmax.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn metropolis_bound_values() {
        assert!((metropolis_sigma_upper_bound(2).unwrap() - (1.0 - 1.0 / 284.0)).abs() < 1e-15);
        assert!((metropolis_sigma_upper_bound(100).unwrap() - (1.0 - 1.0 / 710_000.0)).abs() < 1e-15);
        assert!(metropolis_sigma_upper_bound(11).unwrap() > metropolis_sigma_upper_bound(10).unwrap());
        assert!(metropolis_sigma_upper_bound(1).is_err());
    }

    #[test]
    fn validation_flags_violations() {
        let g = gen_erdos_renyi(10, 0.4, 3).unwrap();
        let w = build_laplacian_weights(&g).unwrap();
        let report = validate_weights(&w, &g, DEFAULT_TOLERANCE);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(report.symmetric);

        let mut bumped = w.dense().clone();
        bumped[(0, 0)] += 0.1;
        let report = validate_weights(&WeightMatrix::from_dense(bumped).unwrap(), &g, DEFAULT_TOLERANCE);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::RowSum { row: 0, .. })));

        let (a, b) = (0..10)
            .flat_map(|i| (0..10).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && !g.has_edge(i, j))
            .unwrap();
        let mut leaked = w.dense().clone();
        leaked[(a, b)] = 0.01;
        let report = validate_weights(&WeightMatrix::from_dense(leaked).unwrap(), &g, DEFAULT_TOLERANCE);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Sparsity { i, j, .. } if (*i, *j) == (a, b))));
    }

    #[test]
    fn mixing_matches_dense_product() {
        let g = gen_erdos_renyi(7, 0.5, 1).unwrap();
        let w = build_lazy_metropolis(&g).unwrap();
        let x = AgentMatrix::from_fn(7, 2, |i, j| (i * 3 + j) as f64 - 4.0);
        let mixed = w.mix(&x);
        for i in 0..7 {
            for j in 0..2 {
                let expect: f64 = (0..7).map(|k| w.get(i, k) * x.row(k)[j]).sum();
                assert!((mixed.row(i)[j] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let w = build_laplacian_weights(&gen_path(3).unwrap()).unwrap();
        let csv = w.to_csv();
        let first: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(first.len(), 3);
        assert_eq!(first[0], "6.6666666666666674e-1");
        assert_eq!(first[0].parse::<f64>().unwrap(), w.get(0, 0));
    }
}
