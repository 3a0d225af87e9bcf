use nalgebra::{DMatrix, DVector};

use crate::error::StatsError;

/// Response, fixed-effect design and random-intercept grouping for one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDesign {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub names: Vec<String>,
    /// Dense group index per row, `0..n_groups`.
    pub groups: Vec<usize>,
    n_groups: usize,
}

impl RegressionDesign {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, names: Vec<String>, groups: Vec<usize>) -> Result<Self, StatsError> {
        if x.nrows() != y.len() {
            return Err(StatsError::LengthMismatch { left: x.nrows(), right: y.len() });
        }
        if groups.len() != y.len() {
            return Err(StatsError::LengthMismatch { left: groups.len(), right: y.len() });
        }
        if names.len() != x.ncols() {
            return Err(StatsError::BadDesign(format!("{} names for {} columns", names.len(), x.ncols())));
        }
        if y.is_empty() || x.ncols() == 0 {
            return Err(StatsError::BadDesign("empty design".into()));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(StatsError::BadDesign("non-finite value".into()));
        }
        let n_groups = groups.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; n_groups];
        for &g in &groups {
            seen[g] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(StatsError::BadDesign("group indices are not dense".into()));
        }
        Ok(Self { y: DVector::from_vec(y), x, names, groups, n_groups })
    }

    /// Builds a design from named predictor columns, prepending an intercept.
    /// Group labels are re-indexed densely in order of first appearance.
    pub fn with_intercept<G: PartialEq + Clone>(
        y: Vec<f64>,
        columns: Vec<(String, Vec<f64>)>,
        group_labels: &[G],
    ) -> Result<Self, StatsError> {
        let n = y.len();
        for (name, col) in &columns {
            if col.len() != n {
                return Err(StatsError::BadDesign(format!("column {name:?} has {} rows, expected {n}", col.len())));
            }
        }
        let p = columns.len() + 1;
        let mut x = DMatrix::zeros(n, p);
        x.column_mut(0).fill(1.0);
        let mut names = vec!["(Intercept)".to_string()];
        for (j, (name, col)) in columns.into_iter().enumerate() {
            x.column_mut(j + 1).copy_from_slice(&col);
            names.push(name);
        }
        let mut labels: Vec<G> = Vec::new();
        let groups = group_labels
            .iter()
            .map(|g| match labels.iter().position(|l| l == g) {
                Some(i) => i,
                None => {
                    labels.push(g.clone());
                    labels.len() - 1
                }
            })
            .collect();
        Self::new(y, x, names, groups)
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_fixed(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    /// Row indices of each group.
    pub fn group_rows(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n_groups];
        for (i, &g) in self.groups.iter().enumerate() {
            rows[g].push(i);
        }
        rows
    }

    pub fn is_binary(&self) -> bool {
        self.y.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Fails unless `XᵀX` is comfortably positive definite.
    pub fn check_rank(&self) -> Result<(), StatsError> {
        let xtx = self.x.transpose() * &self.x;
        let eig = xtx.symmetric_eigenvalues();
        let max = eig.iter().cloned().fold(0.0_f64, f64::max);
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 || min <= max * 1e-12 {
            return Err(StatsError::RankDeficient);
        }
        Ok(())
    }
}
