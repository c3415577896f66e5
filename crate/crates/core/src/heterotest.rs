//! Permutation test for heteroscedasticity.
//!
//! The statistic is the variance of the local-spread profile: at every
//! covariate point, measure the diameter of the coverage-r central region
//! across all responses the region captures (not only the neighborhood's
//! own), then take the population variance of those n diameters. Under
//! homoscedasticity the profile is flat up to sampling noise, so a large
//! variance bears evidence against it. The null distribution comes from
//! permuting responses against covariates, which leaves the covariate
//! geometry (and hence all weights) untouched.

use crate::dataset::{Dataset, DistanceMatrix};
use crate::depth::{self, DepthConfig, DepthKind};
use crate::error::{Error, Result};
use crate::spread;
use crate::weights::{self, WeightScheme, WeightVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the p-value counts permuted statistics against the observed one.
///
/// `Strict` counts strictly larger values; it returns 0 when the observed
/// statistic tops every permutation, and in particular for degenerate
/// all-equal-profile data where every statistic is 0. `AddOne` counts ties
/// and the observed sample itself, so it never returns 0 and reports 1 on
/// the degenerate case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueRule {
    Strict,
    AddOne,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeteroTestResult {
    pub observed_t: f64,
    /// One statistic per permutation, in permutation-stream order.
    pub perm_ts: Vec<f64>,
    pub p_value: f64,
    pub rule: PValueRule,
    pub permutations: usize,
    pub seed: u64,
    pub r: f64,
    pub depth_kind: DepthKind,
    pub weight_scheme: WeightScheme,
    /// True when the observed statistic is exactly zero (flat profile), in
    /// which case `Strict` necessarily reports 0 and `AddOne` reports 1.
    pub degenerate: bool,
}

/// Population variance of the spread profile.
pub fn t_statistic(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::EmptySample);
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("spread profile"));
    }
    let n = deltas.len() as f64;
    let mean = deltas.iter().sum::<f64>() / n;
    Ok(deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n)
}

/// One weight vector per covariate point, all from the shared distance
/// cache. An empty neighborhood is reported with its covariate row.
pub fn weight_vectors(dm: &DistanceMatrix, scheme: &WeightScheme) -> Result<Vec<WeightVector>> {
    (0..dm.n())
        .map(|i| {
            scheme
                .weights_from_distances(dm.row(i), dm.n())
                .map_err(|e| match e {
                    Error::EmptyNeighborhood { at: None } => {
                        Error::EmptyNeighborhood { at: Some(i) }
                    }
                    other => other,
                })
        })
        .collect()
}

fn delta_at(
    responses: &[Vec<f64>],
    wv: &WeightVector,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<f64> {
    let s = weights::local_sample(responses, wv)?;
    let depths = depth::depth_at_points(kind, &s, cfg)?;
    Ok(spread::diameter_over_candidates(&s, &depths, responses, kind, cfg, r)?.value)
}

fn profile(
    responses: &[Vec<f64>],
    wvs: &[WeightVector],
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<Vec<f64>> {
    wvs.iter()
        .map(|wv| delta_at(responses, wv, kind, cfg, r))
        .collect()
}

/// The spread profile Δ(r | X_i) for i = 1..n, with neighborhoods taken
/// from the covariates only.
pub fn delta_profile(
    dataset: &Dataset,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
    scheme: &WeightScheme,
) -> Result<Vec<f64>> {
    let dm = DistanceMatrix::from_covariates(&dataset.covariates)?;
    let wvs = weight_vectors(&dm, scheme)?;
    profile(&dataset.responses, &wvs, kind, cfg, r)
}

/// Runs the permutation test.
///
/// Permutation b draws its shuffle from an independent RNG stream derived
/// from (seed, b), so the returned statistics are identical under any
/// worker count or scheduling. Only responses are permuted; the weight
/// vectors are computed once from the covariates and shared read-only.
#[allow(clippy::too_many_arguments)]
pub fn permutation_test(
    dataset: &Dataset,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
    scheme: &WeightScheme,
    permutations: usize,
    seed: u64,
    rule: PValueRule,
) -> Result<HeteroTestResult> {
    if permutations == 0 {
        return Err(Error::InvalidArgument(
            "permutation count must be at least 1".into(),
        ));
    }
    let dm = DistanceMatrix::from_covariates(&dataset.covariates)?;
    let wvs = weight_vectors(&dm, scheme)?;
    let deltas = profile(&dataset.responses, &wvs, kind, cfg, r)?;
    let observed_t = t_statistic(&deltas)?;

    let n = dataset.n();
    let perm_ts = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let permuted: Vec<Vec<f64>> =
                order.iter().map(|&j| dataset.responses[j].clone()).collect();
            let deltas = profile(&permuted, &wvs, kind, cfg, r)?;
            t_statistic(&deltas)
        })
        .collect::<Result<Vec<f64>>>()?;

    let b = permutations as f64;
    let p_value = match rule {
        PValueRule::Strict => perm_ts.iter().filter(|t| **t > observed_t).count() as f64 / b,
        PValueRule::AddOne => {
            (1.0 + perm_ts.iter().filter(|t| **t >= observed_t).count() as f64) / (b + 1.0)
        }
    };
    Ok(HeteroTestResult {
        observed_t,
        perm_ts,
        p_value,
        rule,
        permutations,
        seed,
        r,
        depth_kind: kind,
        weight_scheme: *scheme,
        degenerate: observed_t == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Covariates;
    use crate::weights::KChoice;
    use approx::assert_relative_eq;

    fn vector_dataset(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Dataset {
        Dataset::new(Covariates::Vectors(xs), ys, vec![], vec![]).unwrap()
    }

    fn knn(k: usize) -> WeightScheme {
        WeightScheme::Knn {
            k: KChoice::Fixed(k),
        }
    }

    #[test]
    fn t_statistic_examples() {
        assert_relative_eq!(t_statistic(&[1.0, 3.0]).unwrap(), 1.0);
        assert_relative_eq!(t_statistic(&[0.0, 0.0, 3.0]).unwrap(), 2.0);
        assert_eq!(t_statistic(&[7.0, 7.0, 7.0]).unwrap(), 0.0);
        assert!(t_statistic(&[]).is_err());
    }

    #[test]
    fn t_statistic_shift_invariant_and_quadratic_in_scale() {
        let base = [0.5, 1.0, 2.5, 4.0];
        let t = t_statistic(&base).unwrap();
        let shifted: Vec<f64> = base.iter().map(|d| d + 11.0).collect();
        assert_relative_eq!(t_statistic(&shifted).unwrap(), t, epsilon = 1e-12);
        let scaled: Vec<f64> = base.iter().map(|d| 3.0 * d).collect();
        assert_relative_eq!(t_statistic(&scaled).unwrap(), 9.0 * t, epsilon = 1e-12);
    }

    #[test]
    fn identical_covariates_get_identical_profile_entries() {
        let ds = vector_dataset(
            vec![vec![0.0], vec![0.0], vec![5.0], vec![5.0]],
            vec![vec![1.0], vec![2.0], vec![10.0], vec![20.0]],
        );
        let prof = delta_profile(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(2),
        )
        .unwrap();
        assert_eq!(prof[0], prof[1]);
        assert_eq!(prof[2], prof[3]);
    }

    #[test]
    fn single_observation_gives_zero_statistic() {
        let ds = vector_dataset(vec![vec![0.0]], vec![vec![3.0, 4.0]]);
        let prof = delta_profile(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(1),
        )
        .unwrap();
        assert_eq!(prof, vec![0.0]);
        assert_eq!(t_statistic(&prof).unwrap(), 0.0);
    }

    #[test]
    fn permuting_responses_leaves_weights_unchanged() {
        let xs = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        let dm = DistanceMatrix::from_covariates(&Covariates::Vectors(xs)).unwrap();
        let before = weight_vectors(&dm, &knn(2)).unwrap();
        // responses play no part in the weights; recomputing after any
        // response permutation reads the same cache
        let after = weight_vectors(&dm, &knn(2)).unwrap();
        for (a, b) in before.iter().zip(after.iter()) {
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.support, b.support);
        }
    }

    fn spread_jump_dataset() -> Dataset {
        // tight response cloud over the left covariate half, a huge and
        // irregular one over the right; golden-angle directions keep all
        // response locations distinct
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20 {
            let theta = 2.399963 * i as f64;
            let rho = 1.0 + 0.3 * (5.0 * theta).cos();
            let scale = if i < 10 { 0.05 } else { 40.0 + i as f64 };
            xs.push(vec![i as f64]);
            ys.push(vec![scale * rho * theta.cos(), scale * rho * theta.sin()]);
        }
        vector_dataset(xs, ys)
    }

    #[test]
    fn rerun_with_same_seed_is_bitwise_identical() {
        let ds = spread_jump_dataset();
        let cfg = DepthConfig::default();
        let run = || {
            permutation_test(
                &ds,
                DepthKind::Halfspace,
                &cfg,
                0.5,
                &knn(4),
                20,
                42,
                PValueRule::Strict,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.observed_t.to_bits(), b.observed_t.to_bits());
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
        for (x, y) in a.perm_ts.iter().zip(b.perm_ts.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn strong_heteroscedasticity_tops_every_permutation() {
        let ds = spread_jump_dataset();
        let res = permutation_test(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(5),
            30,
            7,
            PValueRule::Strict,
        )
        .unwrap();
        assert!(res.observed_t > 0.0);
        let max_perm = res.perm_ts.iter().cloned().fold(f64::MIN, f64::max);
        assert!(
            max_perm < res.observed_t,
            "observed {} vs max permuted {}",
            res.observed_t,
            max_perm
        );
        assert_eq!(res.p_value, 0.0);
        assert!(!res.degenerate);
    }

    #[test]
    fn identical_responses_are_degenerate() {
        let ds = vector_dataset(
            (0..10).map(|i| vec![i as f64]).collect(),
            vec![vec![2.0, 3.0]; 10],
        );
        let strict = permutation_test(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(3),
            25,
            0,
            PValueRule::Strict,
        )
        .unwrap();
        assert_eq!(strict.observed_t, 0.0);
        assert!(strict.perm_ts.iter().all(|t| *t == 0.0));
        assert_eq!(strict.p_value, 0.0);
        assert!(strict.degenerate);
        let addone = permutation_test(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(3),
            25,
            0,
            PValueRule::AddOne,
        )
        .unwrap();
        assert_eq!(addone.p_value, 1.0);
        assert!(addone.degenerate);
    }

    #[test]
    fn p_values_are_probabilities_under_both_rules() {
        let ds = spread_jump_dataset();
        for rule in [PValueRule::Strict, PValueRule::AddOne] {
            let res = permutation_test(
                &ds,
                DepthKind::Spatial,
                &DepthConfig::default(),
                0.5,
                &knn(5),
                12,
                3,
                rule,
            )
            .unwrap();
            assert!((0.0..=1.0).contains(&res.p_value), "{}", res.p_value);
            assert_eq!(res.perm_ts.len(), 12);
        }
    }

    #[test]
    fn zero_permutations_is_rejected() {
        let ds = spread_jump_dataset();
        assert!(permutation_test(
            &ds,
            DepthKind::Halfspace,
            &DepthConfig::default(),
            0.5,
            &knn(4),
            0,
            1,
            PValueRule::Strict,
        )
        .is_err());
    }
}
