//! Statistical depth of a point with respect to a weighted sample.
//!
//! All four depths see the sample only through its atoms and weights, so
//! the same routines serve both plain empirical distributions (equal
//! weights) and the locally weighted samples produced by [`crate::weights`].
//!
//! Exactness by dimension:
//!
//! * halfspace: exact for p = 1 and p = 2 (rotating sweep); for p >= 3 a
//!   lower envelope over a finite direction set, flagged approximate.
//! * spatial: closed form, exact in any dimension.
//! * projection: exact for p = 1; direction scan otherwise.
//! * simplicial: exact enumeration of all (p+1)-point subsets.

use crate::error::{Error, Result};
use crate::vecmath::{axpy, dot, for_each_combination, norm, sub};
use crate::weights::WeightedLocalSample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthKind {
    Halfspace,
    Spatial,
    Projection,
    Simplicial,
}

impl DepthKind {
    pub const ALL: [DepthKind; 4] = [
        DepthKind::Halfspace,
        DepthKind::Spatial,
        DepthKind::Projection,
        DepthKind::Simplicial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DepthKind::Halfspace => "halfspace",
            DepthKind::Spatial => "spatial",
            DepthKind::Projection => "projection",
            DepthKind::Simplicial => "simplicial",
        }
    }
}

/// Knobs for the direction-based approximations and coincidence tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthConfig {
    /// Number of random unit directions (halfspace p >= 3, projection p >= 2).
    pub direction_count: usize,
    /// Seed for the sampled directions; they depend on nothing else.
    pub rng_seed: u64,
    /// Below this Euclidean distance two points count as coincident. Also
    /// the geometric tolerance of the point-in-simplex test.
    pub coincidence_tolerance: f64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        DepthConfig {
            direction_count: 512,
            rng_seed: 0,
            coincidence_tolerance: 1e-12,
        }
    }
}

/// A computed depth plus algorithm metadata.
#[derive(Debug, Clone)]
pub struct DepthValue {
    pub value: f64,
    /// True when the algorithm scanned a finite direction set instead of
    /// solving the extremal problem exactly.
    pub approximate: bool,
    /// Maximizing direction, reported by projection depth as a diagnostic.
    pub direction: Option<Vec<f64>>,
}

impl DepthValue {
    fn exact(value: f64) -> Self {
        DepthValue {
            value,
            approximate: false,
            direction: None,
        }
    }
}

fn validate(y: &[f64], s: &WeightedLocalSample) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    if s.points.len() != s.weights.len() {
        return Err(Error::DimensionMismatch(s.points.len(), s.weights.len()));
    }
    let p = s.dim();
    if p == 0 {
        return Err(Error::UnsupportedDimension {
            p: 0,
            what: "depth",
        });
    }
    if y.len() != p {
        return Err(Error::DimensionMismatch(y.len(), p));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("query point"));
    }
    for pt in &s.points {
        if pt.len() != p {
            return Err(Error::DimensionMismatch(pt.len(), p));
        }
        if pt.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample point"));
        }
    }
    if s.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("weight"));
    }
    Ok(())
}

/// Seeded unit directions in R^p. Identical for identical (p, count, seed).
pub(crate) fn sampled_directions(p: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = Vec::with_capacity(count);
    while dirs.len() < count {
        let v: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            dirs.push(v.iter().map(|x| x / n).collect());
        }
    }
    dirs
}

/// Direction set for p >= 3: sampled directions, signed coordinate axes,
/// and every normalized pairwise difference of sample points (both signs).
/// The pairwise differences are what make the halfspace envelope tight on
/// small supports.
fn direction_set(s: &WeightedLocalSample, cfg: &DepthConfig) -> Vec<Vec<f64>> {
    let p = s.dim();
    let mut dirs = sampled_directions(p, cfg.direction_count, cfg.rng_seed);
    for j in 0..p {
        let mut e = vec![0.0; p];
        e[j] = 1.0;
        dirs.push(e.clone());
        e[j] = -1.0;
        dirs.push(e);
    }
    for i in 0..s.points.len() {
        for j in i + 1..s.points.len() {
            let d = sub(&s.points[i], &s.points[j]);
            let n = norm(&d);
            if n > cfg.coincidence_tolerance {
                let u: Vec<f64> = d.iter().map(|x| x / n).collect();
                dirs.push(u.iter().map(|x| -x).collect());
                dirs.push(u);
            }
        }
    }
    dirs
}

// --- halfspace ---------------------------------------------------------

fn halfspace_1d(y: f64, s: &WeightedLocalSample, tol: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (pt, w) in s.points.iter().zip(&s.weights) {
        let d = pt[0] - y;
        if d.abs() <= tol {
            lo += w;
            hi += w;
        } else if d < 0.0 {
            lo += w;
        } else {
            hi += w;
        }
    }
    lo.min(hi)
}

fn wrap_angle(a: f64) -> f64 {
    let mut t = a % TAU;
    if t < 0.0 {
        t += TAU;
    }
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Exact planar halfspace depth by a rotating sweep.
///
/// Each sample point occupies the closed arc of halfplane normals within
/// pi/2 of its own angle. Sweeping the normal angle, the halfplane mass
/// changes only at arc endpoints, and the infimum is attained strictly
/// between consecutive endpoints, so scanning interval masses is exact.
fn halfspace_2d(y: &[f64], s: &WeightedLocalSample, tol: f64) -> f64 {
    let mut coincident = 0.0;
    let mut angs: Vec<(f64, f64)> = Vec::with_capacity(s.len());
    let mut total = 0.0;
    for (pt, w) in s.points.iter().zip(&s.weights) {
        total += w;
        let dx = pt[0] - y[0];
        let dy = pt[1] - y[1];
        if (dx * dx + dy * dy).sqrt() <= tol {
            coincident += w;
        } else {
            angs.push((dy.atan2(dx), *w));
        }
    }
    if angs.is_empty() {
        return total;
    }
    // (event angle, mass delta, covering-count delta)
    let mut events: Vec<(f64, f64, i32)> = Vec::with_capacity(2 * angs.len());
    for &(a, w) in &angs {
        events.push((wrap_angle(a - FRAC_PI_2), w, 1));
        events.push((wrap_angle(a + FRAC_PI_2), -w, -1));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    // mass on the wrap interval (after the last event, before the first)
    let first = events[0].0;
    let last = events[events.len() - 1].0;
    let mid = wrap_angle(last + (first + TAU - last) / 2.0);
    let mut mass = coincident;
    let mut active = 0i32;
    for &(a, w) in &angs {
        let mut d = (a - mid).abs() % TAU;
        if d > TAU / 2.0 {
            d = TAU - d;
        }
        if d <= FRAC_PI_2 {
            mass += w;
            active += 1;
        }
    }

    let mut min_mass = mass;
    let mut i = 0;
    while i < events.len() {
        let angle = events[i].0;
        let mut delta = 0.0;
        let mut count = 0;
        while i < events.len() && events[i].0 == angle {
            delta += events[i].1;
            count += events[i].2;
            i += 1;
        }
        mass += delta;
        active += count;
        if active == 0 {
            // running sums drift by an ulp or two; an uncovered interval
            // has exactly the coincident mass
            mass = coincident;
        }
        if mass < min_mass {
            min_mass = mass;
        }
    }
    min_mass.max(0.0)
}

fn halfspace_directional(y: &[f64], s: &WeightedLocalSample, dirs: &[Vec<f64>]) -> f64 {
    let diffs: Vec<Vec<f64>> = s.points.iter().map(|pt| sub(pt, y)).collect();
    let mut best = f64::INFINITY;
    for u in dirs {
        let mut mass = 0.0;
        for (d, w) in diffs.iter().zip(&s.weights) {
            if dot(u, d) >= 0.0 {
                mass += w;
            }
        }
        if mass < best {
            best = mass;
        }
    }
    best
}

/// Halfspace depth: smallest weighted mass of a closed halfspace whose
/// boundary passes through `y`.
pub fn halfspace_depth(y: &[f64], s: &WeightedLocalSample, cfg: &DepthConfig) -> Result<DepthValue> {
    validate(y, s)?;
    let tol = cfg.coincidence_tolerance;
    match s.dim() {
        1 => Ok(DepthValue::exact(halfspace_1d(y[0], s, tol))),
        2 => Ok(DepthValue::exact(halfspace_2d(y, s, tol))),
        _ => {
            let dirs = direction_set(s, cfg);
            Ok(DepthValue {
                value: halfspace_directional(y, s, &dirs),
                approximate: true,
                direction: None,
            })
        }
    }
}

// --- spatial -----------------------------------------------------------

/// Spatial depth: one minus the norm of the weighted mean of unit vectors
/// pointing from the sample to `y`. Coincident points contribute zero.
pub fn spatial_depth(y: &[f64], s: &WeightedLocalSample, cfg: &DepthConfig) -> Result<DepthValue> {
    validate(y, s)?;
    let p = s.dim();
    let mut acc = vec![0.0; p];
    for (pt, w) in s.points.iter().zip(&s.weights) {
        let d = sub(y, pt);
        let n = norm(&d);
        if n > cfg.coincidence_tolerance {
            axpy(&mut acc, w / n, &d);
        }
    }
    Ok(DepthValue::exact((1.0 - norm(&acc)).clamp(0.0, 1.0)))
}

// --- projection --------------------------------------------------------

/// Smallest value whose cumulative weight reaches one half.
///
/// This lower-median convention keeps the estimate inside the observed
/// values and makes every downstream quantity deterministic under ties.
pub(crate) fn weighted_lower_median(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    debug_assert!(!values.is_empty());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let half = 0.5 * total;
    let mut cum = 0.0;
    for &i in &idx {
        cum += weights[i];
        if cum >= half {
            return values[i];
        }
    }
    values[idx[idx.len() - 1]]
}

fn projection_ratio(
    y: &[f64],
    s: &WeightedLocalSample,
    u: &[f64],
) -> Result<f64> {
    // project the atoms relative to the query: the query's own projection
    // is then 0, and a common translation of the whole configuration
    // cancels inside `sub` instead of perturbing two separate roundings
    let projs: Vec<f64> = s.points.iter().map(|pt| dot(u, &sub(pt, y))).collect();
    let med = weighted_lower_median(&projs, &s.weights);
    let devs: Vec<f64> = projs.iter().map(|z| (z - med).abs()).collect();
    let mad = weighted_lower_median(&devs, &s.weights);
    if mad <= 0.0 {
        return Err(Error::DegenerateScale {
            direction: u.to_vec(),
        });
    }
    Ok(med.abs() / mad)
}

/// Projection depth: outlyingness is the worst median-centered, MAD-scaled
/// distance over scanned directions; depth is 1 / (1 + outlyingness).
///
/// p = 1 needs only the single direction u = 1 and is exact. p = 2 scans a
/// uniform angular grid of `direction_count` directions; p >= 3 scans the
/// same direction set as approximate halfspace depth. The maximizing
/// direction comes back as a diagnostic.
pub fn projection_depth(
    y: &[f64],
    s: &WeightedLocalSample,
    cfg: &DepthConfig,
) -> Result<DepthValue> {
    validate(y, s)?;
    let p = s.dim();
    if p == 1 {
        let u = [1.0];
        let ratio = projection_ratio(y, s, &u)?;
        return Ok(DepthValue {
            value: 1.0 / (1.0 + ratio),
            approximate: false,
            direction: Some(vec![1.0]),
        });
    }
    let dirs: Vec<Vec<f64>> = if p == 2 {
        if cfg.direction_count == 0 {
            return Err(Error::InvalidArgument(
                "direction_count must be positive".into(),
            ));
        }
        (0..cfg.direction_count)
            .map(|g| {
                let a = TAU * g as f64 / cfg.direction_count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        direction_set(s, cfg)
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_dir = None;
    for u in &dirs {
        let ratio = projection_ratio(y, s, u)?;
        if ratio > best {
            best = ratio;
            best_dir = Some(u.clone());
        }
    }
    Ok(DepthValue {
        value: 1.0 / (1.0 + best),
        approximate: true,
        direction: best_dir,
    })
}

// --- simplicial --------------------------------------------------------

/// Closed-simplex membership with rank-deficiency handling.
///
/// Full-rank vertex sets go through barycentric coordinates (QR by
/// modified Gram-Schmidt, then back substitution). Rank-deficient sets
/// degrade gracefully: membership means lying in the affine hull of the
/// vertices within tolerance and inside their convex hull there, which by
/// Caratheodory reduces to membership in some smaller sub-simplex.
pub(crate) fn simplex_contains(verts: &[&[f64]], y: &[f64], tol: f64) -> bool {
    const BARY_TOL: f64 = 1e-9;
    let q = verts.len();
    let v0 = verts[0];
    let cols: Vec<Vec<f64>> = verts[1..].iter().map(|v| sub(v, v0)).collect();
    let b = sub(y, v0);
    // tolerance scales with the difference geometry, not the absolute
    // coordinates, so a common translation cannot flip boundary verdicts
    let scale = cols
        .iter()
        .flat_map(|v| v.iter())
        .chain(b.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let t = tol * scale;
    if q == 1 {
        return norm(&b) <= t;
    }

    // orthonormal basis of the span, with one re-orthogonalization pass
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for c in &cols {
        let mut r = c.clone();
        for qv in &basis {
            let pr = dot(&r, qv);
            axpy(&mut r, -pr, qv);
        }
        for qv in &basis {
            let pr = dot(&r, qv);
            axpy(&mut r, -pr, qv);
        }
        let nr = norm(&r);
        if nr > t {
            for x in r.iter_mut() {
                *x /= nr;
            }
            basis.push(r);
        }
    }
    let rank = basis.len();

    let mut res = b.clone();
    for qv in &basis {
        let pr = dot(&res, qv);
        axpy(&mut res, -pr, qv);
    }
    if norm(&res) > t {
        return false;
    }

    if rank == q - 1 {
        // R[i][j] = <basis_i, cols_j> is upper triangular by construction
        let qb: Vec<f64> = basis.iter().map(|qv| dot(qv, &b)).collect();
        let mut lam = vec![0.0; rank];
        for i in (0..rank).rev() {
            let mut v = qb[i];
            for j in i + 1..rank {
                v -= dot(&basis[i], &cols[j]) * lam[j];
            }
            lam[i] = v / dot(&basis[i], &cols[i]);
        }
        let lam0 = 1.0 - lam.iter().sum::<f64>();
        lam0 >= -BARY_TOL && lam.iter().all(|l| *l >= -BARY_TOL)
    } else {
        // project vertices and query into the flat, then recurse over
        // every (rank+1)-subset
        let pv: Vec<Vec<f64>> = verts
            .iter()
            .map(|v| {
                let d = sub(v, v0);
                basis.iter().map(|qv| dot(qv, &d)).collect()
            })
            .collect();
        let py: Vec<f64> = basis.iter().map(|qv| dot(qv, &b)).collect();
        let mut found = false;
        for_each_combination(q, rank + 1, |c| {
            if !found {
                let subset: Vec<&[f64]> = c.iter().map(|&i| pv[i].as_slice()).collect();
                if simplex_contains(&subset, &py, tol) {
                    found = true;
                }
            }
        });
        found
    }
}

/// Simplicial depth: the weight-product mass of (p+1)-point subsets whose
/// closed simplex covers `y`, relative to all such subsets.
///
/// Exhaustive over C(m, p+1) subsets, intended for the support sizes local
/// weighting produces (tens of points).
pub fn simplicial_depth(
    y: &[f64],
    s: &WeightedLocalSample,
    cfg: &DepthConfig,
) -> Result<DepthValue> {
    validate(y, s)?;
    let p = s.dim();
    let m = s.len();
    if m < p + 1 {
        return Err(Error::InvalidArgument(format!(
            "simplicial depth needs at least p + 1 = {} support points, got {m}",
            p + 1
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for_each_combination(m, p + 1, |c| {
        let mut w = 1.0;
        for &i in c {
            w *= s.weights[i];
        }
        den += w;
        let verts: Vec<&[f64]> = c.iter().map(|&i| s.points[i].as_slice()).collect();
        if simplex_contains(&verts, y, cfg.coincidence_tolerance) {
            num += w;
        }
    });
    Ok(DepthValue::exact(num / den))
}

// --- dispatch ----------------------------------------------------------

/// Depth of `y` under the chosen notion.
pub fn evaluate(
    kind: DepthKind,
    y: &[f64],
    s: &WeightedLocalSample,
    cfg: &DepthConfig,
) -> Result<DepthValue> {
    match kind {
        DepthKind::Halfspace => halfspace_depth(y, s, cfg),
        DepthKind::Spatial => spatial_depth(y, s, cfg),
        DepthKind::Projection => projection_depth(y, s, cfg),
        DepthKind::Simplicial => simplicial_depth(y, s, cfg),
    }
}

/// Depth of every support atom with respect to its own sample.
pub fn depth_at_points(
    kind: DepthKind,
    s: &WeightedLocalSample,
    cfg: &DepthConfig,
) -> Result<Vec<f64>> {
    s.points
        .iter()
        .map(|pt| evaluate(kind, pt, s, cfg).map(|d| d.value))
        .collect()
}
