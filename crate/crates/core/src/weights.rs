//! Regression weights over the covariate sample.
//!
//! Both schemes turn covariate distances into a probability vector over the
//! n observations. Downstream code only ever sees the weights, so permuting
//! responses never requires recomputing anything here.

use crate::error::{Error, Result};
use crate::metrics::{self, CovariateValue};
use serde::{Deserialize, Serialize};

/// Normalized weights over a sample, plus the indices that carry mass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// Length-n weight per observation; nonnegative, sums to one.
    pub weights: Vec<f64>,
    /// Indices with strictly positive weight, ascending.
    pub support: Vec<usize>,
}

/// Response rows restricted to the support of a weight vector.
#[derive(Debug, Clone)]
pub struct WeightedLocalSample {
    /// One response point per support index, dimension `p` each.
    pub points: Vec<Vec<f64>>,
    /// Matching weights; sum to one.
    pub weights: Vec<f64>,
    /// Original row index of each point.
    pub source: Vec<usize>,
}

impl WeightedLocalSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Response dimension. Panics on an empty sample.
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Equal-weight sample over the given points, sourced 0..m.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        let m = points.len();
        let w = 1.0 / m as f64;
        Ok(WeightedLocalSample {
            weights: vec![w; m],
            source: (0..m).collect(),
            points,
        })
    }
}

/// Smoothing kernel on [0, 1] applied to `distance / bandwidth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Indicator of [0, 1].
    Box,
    /// (3/4)(1 - u^2) on [0, 1].
    Epanechnikov,
}

impl Kernel {
    pub fn eval(&self, u: f64) -> f64 {
        if !(0.0..=1.0).contains(&u) {
            return 0.0;
        }
        match self {
            Kernel::Box => 1.0,
            Kernel::Epanechnikov => 0.75 * (1.0 - u * u),
        }
    }
}

/// Neighborhood size choice for the k-NN scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KChoice {
    /// `default_k(n)`, the slowly growing log-square rule.
    Auto,
    Fixed(usize),
}

impl KChoice {
    pub fn resolve(&self, n: usize) -> usize {
        match self {
            KChoice::Auto => default_k(n),
            KChoice::Fixed(k) => *k,
        }
    }
}

/// How to turn covariate distances into weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightScheme {
    Knn { k: KChoice },
    Kernel { kernel: Kernel, bandwidth: f64 },
}

impl WeightScheme {
    /// Weights of one covariate point given its distances to the sample.
    pub fn weights_from_distances(&self, dists: &[f64], n_hint: usize) -> Result<WeightVector> {
        match self {
            WeightScheme::Knn { k } => knn_weights(dists, k.resolve(n_hint)),
            WeightScheme::Kernel { kernel, bandwidth } => {
                kernel_weights(dists, *kernel, *bandwidth)
            }
        }
    }
}

/// Default neighborhood size: floor((ln n)^2) + 1.
///
/// Grows slowly enough for local estimation yet unboundedly with n.
/// Requires n >= 1.
pub fn default_k(n: usize) -> usize {
    assert!(n >= 1, "default_k needs a nonempty sample");
    let l = (n as f64).ln();
    (l * l).floor() as usize + 1
}

fn check_distances(dists: &[f64]) -> Result<()> {
    if dists.is_empty() {
        return Err(Error::EmptySample);
    }
    if dists.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::NonFinite("distance"));
    }
    Ok(())
}

/// k-th order statistic of the distances (1-indexed), the k-NN bandwidth.
pub fn knn_bandwidth(dists: &[f64], k: usize) -> Result<f64> {
    check_distances(dists)?;
    if k == 0 || k > dists.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {}",
            dists.len(),
            k
        )));
    }
    let mut sorted = dists.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    Ok(*kth)
}

/// Uniform weights over every observation within the k-NN bandwidth.
///
/// Distance ties at the bandwidth are all included, so the support may
/// exceed k; it never falls below k.
pub fn knn_weights(dists: &[f64], k: usize) -> Result<WeightVector> {
    let h = knn_bandwidth(dists, k)?;
    let support: Vec<usize> = (0..dists.len()).filter(|&i| dists[i] <= h).collect();
    let w = 1.0 / support.len() as f64;
    let mut weights = vec![0.0; dists.len()];
    for &i in &support {
        weights[i] = w;
    }
    Ok(WeightVector { weights, support })
}

/// Kernel weights K(d_i / h) normalized to sum one.
///
/// Requires h > 0. Errors with [`Error::EmptyNeighborhood`] when every
/// kernel value vanishes, rather than silently returning zeros.
pub fn kernel_weights(dists: &[f64], kernel: Kernel, h: f64) -> Result<WeightVector> {
    check_distances(dists)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {h}"
        )));
    }
    let raw: Vec<f64> = dists.iter().map(|&d| kernel.eval(d / h)).collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return Err(Error::EmptyNeighborhood { at: None });
    }
    let weights: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    Ok(WeightVector { weights, support })
}

/// Distances from one covariate value to a slice of others.
pub fn distances_to(x: &CovariateValue, xs: &[CovariateValue]) -> Result<Vec<f64>> {
    xs.iter().map(|xi| metrics::distance(x, xi)).collect()
}

/// k-NN weights of `x` within the covariate sample `xs`.
pub fn knn_weights_at(x: &CovariateValue, xs: &[CovariateValue], k: usize) -> Result<WeightVector> {
    knn_weights(&distances_to(x, xs)?, k)
}

/// Kernel weights of `x` within the covariate sample `xs`.
pub fn kernel_weights_at(
    x: &CovariateValue,
    xs: &[CovariateValue],
    kernel: Kernel,
    h: f64,
) -> Result<WeightVector> {
    kernel_weights(&distances_to(x, xs)?, kernel, h)
}

/// Restrict response rows to the positive-weight indices.
pub fn local_sample(responses: &[Vec<f64>], w: &WeightVector) -> Result<WeightedLocalSample> {
    if responses.len() != w.weights.len() {
        return Err(Error::DimensionMismatch(responses.len(), w.weights.len()));
    }
    let sum: f64 = w.weights.iter().sum();
    if w.weights.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "weights must be nonnegative and sum to one".into(),
        ));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut source = Vec::new();
    let mut p = None;
    for (i, wi) in w.weights.iter().enumerate() {
        if *wi > 0.0 {
            let row = &responses[i];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("response"));
            }
            match p {
                None => p = Some(row.len()),
                Some(q) if q != row.len() => {
                    return Err(Error::DimensionMismatch(q, row.len()));
                }
                _ => {}
            }
            points.push(row.clone());
            weights.push(*wi);
            source.push(i);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if p == Some(0) {
        return Err(Error::UnsupportedDimension {
            p: 0,
            what: "response",
        });
    }
    Ok(WeightedLocalSample {
        points,
        weights,
        source,
    })
}
