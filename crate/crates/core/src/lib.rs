//! Depth-based local regression for multivariate responses.
//!
//! Given covariate-response pairs (X_i, Y_i) with Y_i in R^p, this crate
//! estimates the conditional law of Y at a covariate point x through
//! locally weighted statistical depth. On top of the depth field it builds
//! conditional central regions, medians and trimmed means, spread summaries
//! of those regions, and a permutation test that asks whether the spread
//! profile is flat in x (homoscedasticity) or not.
//!
//! Covariates may be plain vectors (Euclidean distance) or discretized
//! curves on a common grid (trapezoid L2 distance). Responses are always
//! finite-dimensional rows.
//!
//! The crate is organized bottom-up:
//!
//! * [`metrics`]: covariate distances.
//! * [`weights`]: k-NN and kernel regression weights, local samples.
//! * [`depth`]: halfspace, spatial, projection and simplicial depth of a
//!   point with respect to a weighted sample.
//! * [`regions`]: depth-central regions, contours, conditional median and
//!   trimmed mean, Hausdorff distance.
//! * [`spread`]: diameter and volume summaries of central regions.
//! * [`heterotest`]: permutation test for conditional heteroscedasticity.
//! * [`simlab`]: synthetic data models and a power study driver.
//! * [`dataset`]: dataset container, CSV ingestion, distance matrices.
//! * [`pca`]: principal component scores used for diagnostic plots.
//!
//! Everything randomized takes an explicit seed and produces identical
//! results for identical inputs, independent of thread count.

pub mod dataset;
pub mod depth;
pub mod error;
pub mod heterotest;
pub mod metrics;
pub mod pca;
pub mod regions;
pub mod simlab;
pub mod spread;
pub(crate) mod vecmath;
pub mod weights;

pub use error::{Error, Result};
