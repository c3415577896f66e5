//! Principal-component scores of the covariate sample, the axes the
//! spread profile is plotted against.
//!
//! Vector covariates use the ordinary sample covariance. Curves use the
//! discretized covariance operator under the trapezoid inner product, the
//! same quadrature the curve metric uses, so the scores are grid-aware:
//! with node weights d the symmetric problem is D^{1/2} K D^{1/2} and a
//! curve's score is the d-weighted inner product with the eigenfunction.

use crate::dataset::Covariates;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct PrincipalScores {
    /// Per-observation scores on the top two components.
    pub scores: Vec<[f64; 2]>,
    /// Fraction of total dispersion carried by each component.
    pub explained: [f64; 2],
    /// A component with (numerically) zero variance is flagged and its
    /// scores are zeroed rather than left as eigen-noise.
    pub degenerate: [bool; 2],
}

/// Trapezoid quadrature weights of a strictly increasing grid.
fn node_weights(grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let mut d = vec![0.0; m];
    for j in 0..m - 1 {
        let h = 0.5 * (grid[j + 1] - grid[j]);
        d[j] += h;
        d[j + 1] += h;
    }
    d
}

/// Scores of every observation on the top two principal components of the
/// covariate dispersion.
pub fn principal_scores(c: &Covariates) -> Result<PrincipalScores> {
    c.validate()?;
    let n = c.len();
    // rows of `a`: observations mapped so that Euclidean geometry on `a`
    // matches the covariate inner product (identity for vectors, D^{1/2}
    // for curves)
    let a = match c {
        Covariates::Vectors(rows) => {
            let p = rows[0].len();
            DMatrix::from_fn(n, p, |i, j| rows[i][j])
        }
        Covariates::Curves { grid, values } => {
            let root_d: Vec<f64> = node_weights(grid).iter().map(|w| w.sqrt()).collect();
            DMatrix::from_fn(n, grid.len(), |i, j| values[i][j] * root_d[j])
        }
    };
    let mut centered = a;
    for j in 0..centered.ncols() {
        let mean = centered.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }
    let cov = centered.transpose() * &centered / n as f64;
    let total = cov.trace();
    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[j].total_cmp(&eigen.eigenvalues[i]));

    let tol = 1e-12 * total.max(1.0);
    let mut scores = vec![[0.0; 2]; n];
    let mut explained = [0.0; 2];
    let mut degenerate = [true; 2];
    for comp in 0..2 {
        let Some(&col) = order.get(comp) else {
            break;
        };
        let lambda = eigen.eigenvalues[col];
        if lambda <= tol {
            continue;
        }
        let mut v = eigen.eigenvectors.column(col).clone_owned();
        // fix the sign so reruns and BLAS variants agree: the entry of
        // largest magnitude points up
        let lead = v
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.abs().total_cmp(&y.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v = -v;
        }
        let s = &centered * v;
        for i in 0..n {
            scores[i][comp] = s[i];
        }
        explained[comp] = lambda / total;
        degenerate[comp] = false;
    }
    if n == 0 {
        return Err(Error::EmptySample);
    }
    Ok(PrincipalScores {
        scores,
        explained,
        degenerate,
    })
}
