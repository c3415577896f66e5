//! Distances between covariate values.
//!
//! Two covariate forms are supported: plain vectors under the Euclidean
//! norm, and curves observed on a shared grid under the L2 norm with
//! trapezoid quadrature. Anything else can be plugged in downstream by
//! supplying a custom distance callback to [`crate::dataset::DistanceMatrix::from_fn`].

use crate::error::{Error, Result};

/// A borrowed view of one covariate observation.
#[derive(Debug, Clone, Copy)]
pub enum CovariateValue<'a> {
    Vector(&'a [f64]),
    /// A curve sampled at `grid` (strictly increasing, shared across the
    /// sample); `values[t]` is the curve evaluated at `grid[t]`.
    Curve { grid: &'a [f64], values: &'a [f64] },
}

fn check_finite(xs: &[f64], what: &'static str) -> Result<()> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Euclidean distance between two vectors of equal, nonzero length.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    check_finite(a, "covariate vector")?;
    check_finite(b, "covariate vector")?;
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sq.sqrt())
}

/// Validates a quadrature grid: at least two nodes, finite, strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "curve grid needs at least 2 nodes, got {}",
            grid.len()
        )));
    }
    check_finite(grid, "curve grid")?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "curve grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Trapezoid-rule integral of `f` over `grid`.
///
/// The grid is assumed valid (see [`validate_grid`]); callers in this
/// module validate once at the boundary.
pub(crate) fn trapezoid(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for t in 0..grid.len() - 1 {
        acc += 0.5 * (grid[t + 1] - grid[t]) * (f(t) + f(t + 1));
    }
    acc
}

/// L2 distance between two curves on a common grid, by trapezoid quadrature
/// of the squared difference.
pub fn l2_curve_distance(grid: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    validate_grid(grid)?;
    if a.len() != grid.len() {
        return Err(Error::DimensionMismatch(a.len(), grid.len()));
    }
    if b.len() != grid.len() {
        return Err(Error::DimensionMismatch(b.len(), grid.len()));
    }
    check_finite(a, "curve values")?;
    check_finite(b, "curve values")?;
    let int = trapezoid(grid, |t| {
        let d = a[t] - b[t];
        d * d
    });
    // Quadrature of a nonnegative integrand stays nonnegative, but guard
    // against a -0.0 leaking into sqrt.
    Ok(int.max(0.0).sqrt())
}

/// Distance between two covariate values of the same form.
pub fn distance(a: &CovariateValue, b: &CovariateValue) -> Result<f64> {
    match (a, b) {
        (CovariateValue::Vector(x), CovariateValue::Vector(y)) => euclidean_distance(x, y),
        (
            CovariateValue::Curve { grid: ga, values: va },
            CovariateValue::Curve { grid: gb, values: vb },
        ) => {
            if ga.len() != gb.len() || ga.iter().zip(gb.iter()).any(|(s, t)| s != t) {
                return Err(Error::InvalidArgument(
                    "curves must share one quadrature grid".into(),
                ));
            }
            l2_curve_distance(ga, va, vb)
        }
        _ => Err(Error::InvalidArgument(
            "cannot mix vector and curve covariates".into(),
        )),
    }
}
