//! Synthetic location-scale generators and the level/power harness for
//! the heteroscedasticity test.
//!
//! Four models, all centered Gaussian with equicorrelated dispersion and
//! a covariate-driven scale factor:
//!
//! * 1 and 2: trivariate uniform covariates on [0, 1.5]^3, scale
//!   1 + a * x1 * x2 * x3, bivariate (1) or trivariate (2) response;
//! * 3 and 4: random curves X(t) = B * e^t with B uniform on [0, 1],
//!   stored on a uniform 100-node grid over [0, 1], scale 1 + a * ||X||
//!   with the curve norm taken by the same trapezoid rule the covariate
//!   metric uses; bivariate (3) or trivariate (4) response.
//!
//! a = 0 turns every model into its homoscedastic null.

use crate::dataset::{Covariates, Dataset};
use crate::depth::{DepthConfig, DepthKind};
use crate::error::{Error, Result};
use crate::heterotest::{self, PValueRule};
use crate::metrics;
use crate::weights::WeightScheme;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Nodes of the uniform grid carrying the random curves of models 3-4.
pub const CURVE_GRID_LEN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationModel {
    /// 1..=4.
    pub id: u8,
    /// Heteroscedasticity strength; 0 is the null.
    pub a: f64,
}

impl SimulationModel {
    pub fn new(id: u8, a: f64) -> Result<Self> {
        if !(1..=4).contains(&id) {
            return Err(Error::InvalidArgument(format!(
                "model id must be 1..=4, got {id}"
            )));
        }
        if !a.is_finite() || a < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scale strength a must be finite and nonnegative, got {a}"
            )));
        }
        Ok(SimulationModel { id, a })
    }

    /// Response dimension: 2 for models 1 and 3, 3 for models 2 and 4.
    pub fn response_dim(&self) -> usize {
        match self.id {
            1 | 3 => 2,
            _ => 3,
        }
    }

    /// Models 3 and 4 carry curve covariates.
    pub fn functional(&self) -> bool {
        self.id >= 3
    }
}

/// Equicorrelated dispersion: ones on the diagonal, 0.5 elsewhere.
pub fn make_sigma(p: usize) -> DMatrix<f64> {
    assert!(p >= 1, "dispersion dimension must be at least 1");
    DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { 0.5 })
}

fn curve_grid() -> Vec<f64> {
    (0..CURVE_GRID_LEN)
        .map(|j| j as f64 / (CURVE_GRID_LEN - 1) as f64)
        .collect()
}

/// Draws a seeded dataset from one model. Covariates are drawn first,
/// response normals second, so the byte layout is a pure function of
/// (model, n, seed).
pub fn sample_model(model: SimulationModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = model.response_dim();
    let sigma = make_sigma(p);
    let chol = Cholesky::new(sigma).expect("equicorrelated dispersion is positive definite");
    let l = chol.l();

    let (covariates, scales) = if model.functional() {
        let grid = curve_grid();
        let mut values = Vec::with_capacity(n);
        let mut scales = Vec::with_capacity(n);
        for _ in 0..n {
            let b: f64 = rng.random();
            let curve: Vec<f64> = grid.iter().map(|t| b * t.exp()).collect();
            let norm = metrics::trapezoid(&grid, |j| curve[j] * curve[j]).sqrt();
            scales.push(1.0 + model.a * norm);
            values.push(curve);
        }
        (Covariates::Curves { grid, values }, scales)
    } else {
        let mut rows = Vec::with_capacity(n);
        let mut scales = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..3).map(|_| 1.5 * rng.random::<f64>()).collect();
            scales.push(1.0 + model.a * x[0] * x[1] * x[2]);
            rows.push(x);
        }
        (Covariates::Vectors(rows), scales)
    };

    let mut responses = Vec::with_capacity(n);
    for scale in &scales {
        let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &l * z * scale.sqrt();
        responses.push(y.iter().copied().collect::<Vec<f64>>());
    }
    Dataset::new(covariates, responses, vec![], vec![])
}

/// One experiment cell: a model at one sample size and nominal level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub model: SimulationModel,
    pub n: usize,
    pub level: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerStudyConfig {
    pub cells: Vec<PowerCell>,
    pub replications: usize,
    pub permutations: usize,
    pub seed: u64,
    pub depth: DepthKind,
    pub depth_cfg: DepthConfig,
    pub r: f64,
    pub scheme: WeightScheme,
    pub rule: PValueRule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerRow {
    pub model_id: u8,
    pub a: f64,
    pub n: usize,
    pub level: f64,
    /// Fraction of replications whose p-value fell at or under the level.
    pub rate: f64,
    pub replications: usize,
    pub permutations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Replication-level seed, decorrelated across (cell, replication, role).
/// Role 0 seeds the dataset draw, role 1 the permutation streams.
fn derive_seed(seed: u64, cell: usize, replication: usize, role: u64) -> u64 {
    let s = splitmix64(seed.wrapping_add(splitmix64(cell as u64 + 1)));
    let s = splitmix64(s.wrapping_add(splitmix64(replication as u64 + 1)));
    splitmix64(s.wrapping_add(role))
}

/// Runs the permutation test on `replications` fresh datasets per cell and
/// reports rejection rates. Replications are independent seeded tasks, so
/// the table is identical under any worker count.
pub fn power_study(cfg: &PowerStudyConfig) -> Result<PowerTable> {
    if cfg.replications == 0 || cfg.permutations == 0 {
        return Err(Error::InvalidArgument(
            "replication and permutation counts must be at least 1".into(),
        ));
    }
    if !(cfg.r > 0.0 && cfg.r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage r must lie in (0, 1), got {}",
            cfg.r
        )));
    }
    let mut rows = Vec::with_capacity(cfg.cells.len());
    for (ci, cell) in cfg.cells.iter().enumerate() {
        if !(cell.level > 0.0 && cell.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "nominal level must lie in (0, 1), got {}",
                cell.level
            )));
        }
        let hits = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let ds = sample_model(cell.model, cell.n, derive_seed(cfg.seed, ci, rep, 0))?;
                let res = heterotest::permutation_test(
                    &ds,
                    cfg.depth,
                    &cfg.depth_cfg,
                    cfg.r,
                    &cfg.scheme,
                    cfg.permutations,
                    derive_seed(cfg.seed, ci, rep, 1),
                    cfg.rule,
                )?;
                Ok(usize::from(res.p_value <= cell.level))
            })
            .collect::<Result<Vec<usize>>>()?;
        rows.push(PowerRow {
            model_id: cell.model.id,
            a: cell.model.a,
            n: cell.n,
            level: cell.level,
            rate: hits.iter().sum::<usize>() as f64 / cfg.replications as f64,
            replications: cfg.replications,
            permutations: cfg.permutations,
            seed: cfg.seed,
        });
    }
    Ok(PowerTable { rows })
}
