//! Size summaries of a central region: how spread out the conditional
//! distribution is at a covariate point.
//!
//! The diameter is the workhorse: cheap, dimension-free, and the statistic
//! the heteroscedasticity test aggregates. [`diameter_given_depths`] scans
//! the sample's own atoms; [`diameter_over_candidates`] scans an external
//! point set against the same region, which is how the per-covariate
//! spread profile measures the region across every response in the
//! dataset, not only the ones the local weights kept. The two volume
//! estimates exist to compare against the diameter; the convex-hull
//! variant in particular reports the volume of the hull of the member
//! atoms, which can overstate a non-convex region, so it carries an
//! explicit degeneracy flag instead of pretending to be exact.

use crate::depth::{self, DepthConfig, DepthKind};
use crate::error::{Error, Result};
use crate::regions::alpha_r;
use crate::vecmath::{dist, dot, norm, sub, BBox};
use crate::weights::WeightedLocalSample;
use serde::Serialize;

/// Which size summary was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadMethod {
    Diameter,
    GridVolume,
    HullVolume,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpreadEstimate {
    /// Coverage of the underlying region.
    pub r: f64,
    pub method: SpreadMethod,
    pub value: f64,
    /// Indices realizing the diameter, into whichever point set was
    /// scanned (sample atoms or candidate rows); None when fewer than two
    /// members or for volume methods.
    pub achieving_pair: Option<(usize, usize)>,
    /// Set when the member cloud is too flat for the requested volume.
    pub degenerate: bool,
}

fn member_indices(
    s: &WeightedLocalSample,
    depths: &[f64],
    r: f64,
) -> Result<(f64, Vec<usize>)> {
    if depths.len() != s.len() {
        return Err(Error::DimensionMismatch(depths.len(), s.len()));
    }
    let alpha = alpha_r(depths, &s.weights, r)?;
    let members: Vec<usize> = (0..s.len()).filter(|&i| depths[i] >= alpha).collect();
    Ok((alpha, members))
}

/// Diameter of the coverage-r region when the atom depths are already known.
pub fn diameter_given_depths(
    s: &WeightedLocalSample,
    depths: &[f64],
    r: f64,
) -> Result<SpreadEstimate> {
    let (_, members) = member_indices(s, depths, r)?;
    let mut best = 0.0;
    let mut pair = None;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let d = dist(&s.points[i], &s.points[j]);
            if d > best {
                best = d;
                pair = Some((i, j));
            }
        }
    }
    Ok(SpreadEstimate {
        r,
        method: SpreadMethod::Diameter,
        value: best,
        achieving_pair: pair,
        degenerate: false,
    })
}

/// Safety margin for the projection screen: only rejections clear of the
/// threshold by more than accumulated rounding are taken without a full
/// depth evaluation.
const SCREEN_SLACK: f64 = 1e-12;

/// Relative slack under alpha when judging region membership. Local depths
/// land on rungs set by sums of atom weights, and a candidate evaluated
/// through a different summation order than the atoms can round a hair
/// below the rung it sits on. The slack sits far above f64 rounding yet
/// far below any rung gap, so it only rescues true boundary members.
const QUALIFY_SLACK: f64 = 1e-9;

/// Sorted projections of the sample onto a few fixed directions, with
/// prefix mass sums. The halfspace depth of a point never exceeds the
/// sample mass of any closed halfspace through it, so the smallest
/// one-sided tail mass over these directions is an upper bound that
/// rejects far candidates without running the sweep.
struct ProjectionScreen {
    dirs: Vec<Vec<f64>>,
    /// Per direction: projections sorted ascending, and prefix[i] = total
    /// weight of the first i entries.
    sorted: Vec<(Vec<f64>, Vec<f64>)>,
    total: f64,
}

impl ProjectionScreen {
    fn new(s: &WeightedLocalSample) -> Self {
        let p = s.dim();
        let mut dirs: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let mut d = vec![0.0; p];
                d[j] = 1.0;
                d
            })
            .collect();
        if p == 2 {
            dirs.push(vec![1.0, 1.0]);
            dirs.push(vec![1.0, -1.0]);
        }
        let sorted = dirs
            .iter()
            .map(|d| {
                let mut pairs: Vec<(f64, f64)> = s
                    .points
                    .iter()
                    .zip(s.weights.iter())
                    .map(|(pt, &w)| (dot(pt, d), w))
                    .collect();
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut vals = Vec::with_capacity(pairs.len());
                let mut prefix = Vec::with_capacity(pairs.len() + 1);
                let mut acc = 0.0;
                prefix.push(0.0);
                for (v, w) in pairs {
                    vals.push(v);
                    acc += w;
                    prefix.push(acc);
                }
                (vals, prefix)
            })
            .collect();
        let total: f64 = s.weights.iter().sum();
        ProjectionScreen { dirs, sorted, total }
    }

    fn bound(&self, c: &[f64]) -> f64 {
        let mut best = self.total;
        for (d, (vals, prefix)) in self.dirs.iter().zip(self.sorted.iter()) {
            let x = dot(c, d);
            let lo = vals.partition_point(|v| *v < x);
            let hi = vals.partition_point(|v| *v <= x);
            let mass_ge = self.total - prefix[lo];
            let mass_le = prefix[hi];
            best = best.min(mass_ge.min(mass_le));
        }
        best
    }
}

/// Diameter of the coverage-r region measured over an external candidate
/// set: every candidate whose depth against the local measure reaches the
/// region threshold joins the pairwise-distance scan, whether or not the
/// local weights kept it. Candidate rows listed in `s.source` are the
/// sample's own atoms and reuse `depths` rather than being re-evaluated,
/// so boundary atoms qualify consistently. The achieving pair indexes the
/// candidate rows.
pub fn diameter_over_candidates(
    s: &WeightedLocalSample,
    depths: &[f64],
    candidates: &[Vec<f64>],
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<SpreadEstimate> {
    if depths.len() != s.len() {
        return Err(Error::DimensionMismatch(depths.len(), s.len()));
    }
    let alpha = alpha_r(depths, &s.weights, r)?;
    let thresh = alpha * (1.0 - QUALIFY_SLACK);
    let mut atom_of = vec![usize::MAX; candidates.len()];
    for (t, &row) in s.source.iter().enumerate() {
        if row < candidates.len() {
            debug_assert_eq!(candidates[row], s.points[t]);
            atom_of[row] = t;
        }
    }
    let p = s.dim();
    let screen = (kind == DepthKind::Halfspace).then(|| ProjectionScreen::new(s));
    let mut members: Vec<usize> = Vec::new();
    for (j, c) in candidates.iter().enumerate() {
        let qualifies = if atom_of[j] != usize::MAX {
            depths[atom_of[j]] >= thresh
        } else {
            let screenable = c.len() == p && c.iter().all(|v| v.is_finite());
            if screenable
                && screen
                    .as_ref()
                    .is_some_and(|sc| sc.bound(c) < thresh - SCREEN_SLACK)
            {
                false
            } else {
                depth::evaluate(kind, c, s, cfg)?.value >= thresh
            }
        };
        if qualifies {
            members.push(j);
        }
    }
    let mut best = 0.0;
    let mut pair = None;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let d = dist(&candidates[i], &candidates[j]);
            if d > best {
                best = d;
                pair = Some((i, j));
            }
        }
    }
    Ok(SpreadEstimate {
        r,
        method: SpreadMethod::Diameter,
        value: best,
        achieving_pair: pair,
        degenerate: false,
    })
}

/// Largest pairwise distance among the atoms of the coverage-r region.
pub fn spread_diameter(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<SpreadEstimate> {
    let depths = depth::depth_at_points(kind, s, cfg)?;
    diameter_given_depths(s, &depths, r)
}

/// Volume of the coverage-r region by midpoint counting: the depth field
/// is sampled at the centers of `resolution`^p cells tiling the support
/// bounding box expanded by ten percent per side. Planar and spatial
/// responses only.
pub fn spread_volume_grid(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
    resolution: usize,
) -> Result<SpreadEstimate> {
    let p = s.dim();
    if !(p == 2 || p == 3) {
        return Err(Error::UnsupportedDimension {
            p,
            what: "grid volume",
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(
            "grid resolution must be at least 2".into(),
        ));
    }
    let depths = depth::depth_at_points(kind, s, cfg)?;
    let (alpha, _) = member_indices(s, &depths, r)?;
    let bbox = BBox::of_points(&s.points)
        .ok_or(Error::EmptySample)?
        .expanded(0.10);
    let steps: Vec<f64> = (0..p)
        .map(|j| (bbox.maxs[j] - bbox.mins[j]) / resolution as f64)
        .collect();
    let cell: f64 = steps.iter().product();
    let mut inside = 0usize;
    let mut idx = vec![0usize; p];
    'cells: loop {
        let q: Vec<f64> = (0..p)
            .map(|j| bbox.mins[j] + (idx[j] as f64 + 0.5) * steps[j])
            .collect();
        if depth::evaluate(kind, &q, s, cfg)?.value >= alpha {
            inside += 1;
        }
        for j in 0..p {
            idx[j] += 1;
            if idx[j] < resolution {
                continue 'cells;
            }
            idx[j] = 0;
        }
        break;
    }
    Ok(SpreadEstimate {
        r,
        method: SpreadMethod::GridVolume,
        value: inside as f64 * cell,
        achieving_pair: None,
        degenerate: false,
    })
}

/// Volume (area for p = 2) of the convex hull of the region member atoms.
/// A member cloud of deficient affine rank yields zero with the degenerate
/// flag set. Planar and spatial responses only.
pub fn spread_volume_hull(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<SpreadEstimate> {
    let depths = depth::depth_at_points(kind, s, cfg)?;
    hull_volume_given_depths(s, &depths, r)
}

/// Hull variant of [`diameter_given_depths`].
pub fn hull_volume_given_depths(
    s: &WeightedLocalSample,
    depths: &[f64],
    r: f64,
) -> Result<SpreadEstimate> {
    let p = s.dim();
    if !(p == 2 || p == 3) {
        return Err(Error::UnsupportedDimension {
            p,
            what: "hull volume",
        });
    }
    let (_, members) = member_indices(s, depths, r)?;
    let mut pts: Vec<Vec<f64>> = members.iter().map(|&i| s.points[i].clone()).collect();
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != std::cmp::Ordering::Equal)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();

    let scale = pts
        .iter()
        .flat_map(|v| v.iter())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    if affine_rank(&pts, tol) < p {
        return Ok(SpreadEstimate {
            r,
            method: SpreadMethod::HullVolume,
            value: 0.0,
            achieving_pair: None,
            degenerate: true,
        });
    }
    let value = match p {
        2 => {
            let hull = convex_hull_2d(&pts);
            shoelace_area(&hull)
        }
        _ => hull_volume_3d(&pts, tol),
    };
    Ok(SpreadEstimate {
        r,
        method: SpreadMethod::HullVolume,
        value,
        achieving_pair: None,
        degenerate: false,
    })
}

/// Dimension of the affine span of the points, judged at tolerance `tol`.
fn affine_rank(pts: &[Vec<f64>], tol: f64) -> usize {
    if pts.len() < 2 {
        return 0;
    }
    let p0 = &pts[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for pt in &pts[1..] {
        let mut d = sub(pt, p0);
        for q in &basis {
            let c = crate::vecmath::dot(&d, q);
            crate::vecmath::axpy(&mut d, -c, q);
        }
        let n = norm(&d);
        if n > tol {
            for x in d.iter_mut() {
                *x /= n;
            }
            basis.push(d);
            if basis.len() == p0.len() {
                break;
            }
        }
    }
    basis.len()
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Monotone-chain convex hull; input must be lexicographically sorted and
/// deduplicated. Returns the hull in counterclockwise order.
fn convex_hull_2d(pts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = pts.len();
    if n < 3 {
        return pts.to_vec();
    }
    let mut hull: Vec<Vec<f64>> = Vec::with_capacity(2 * n);
    for pt in pts {
        while hull.len() >= 2
            && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], pt) <= 0.0
        {
            hull.pop();
        }
        hull.push(pt.clone());
    }
    let lower_len = hull.len() + 1;
    for pt in pts.iter().rev() {
        while hull.len() >= lower_len
            && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], pt) <= 0.0
        {
            hull.pop();
        }
        hull.push(pt.clone());
    }
    hull.pop();
    hull
}

fn shoelace_area(poly: &[Vec<f64>]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc.abs()
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Convex hull volume in three dimensions by facet enumeration.
///
/// Every point triple spanning a plane with all points on one side is a
/// facet candidate; each distinct facet plane is handled once, its on-plane
/// points hulled in 2-D, and the resulting polygon fanned into tetrahedra
/// against the centroid (interior for a full-rank cloud). Quadratic-ish in
/// the member count, which regions keep small.
fn hull_volume_3d(pts: &[Vec<f64>], tol: f64) -> f64 {
    let n = pts.len();
    let mut centroid = vec![0.0; 3];
    for p in pts {
        for j in 0..3 {
            centroid[j] += p[j] / n as f64;
        }
    }
    let mut seen_planes: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut volume = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nv = cross3(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                let nn = norm(&nv);
                if nn <= tol * tol {
                    continue;
                }
                let unit: Vec<f64> = nv.iter().map(|x| x / nn).collect();
                let d = crate::vecmath::dot(&unit, &pts[i]);
                if seen_planes.iter().any(|(u, dd)| {
                    let c = crate::vecmath::dot(u, &unit);
                    c.abs() > 1.0 - 1e-9 && (dd - d * c.signum()).abs() <= tol
                }) {
                    continue;
                }
                let sides: Vec<f64> = pts
                    .iter()
                    .map(|p| crate::vecmath::dot(&unit, p) - d)
                    .collect();
                let facet = sides.iter().all(|s| *s <= tol) || sides.iter().all(|s| *s >= -tol);
                if !facet {
                    continue;
                }
                seen_planes.push((unit.clone(), d));
                // 2-D hull of the points on this plane
                let e1: Vec<f64> = {
                    let v = sub(&pts[j], &pts[i]);
                    let nv = norm(&v);
                    v.iter().map(|x| x / nv).collect()
                };
                let e2 = cross3(&unit, &e1);
                let mut flat: Vec<(Vec<f64>, usize)> = Vec::new();
                for (m, p) in pts.iter().enumerate() {
                    if sides[m].abs() <= tol {
                        let rel = sub(p, &pts[i]);
                        flat.push((
                            vec![
                                crate::vecmath::dot(&e1, &rel),
                                crate::vecmath::dot(&e2, &rel),
                            ],
                            m,
                        ));
                    }
                }
                flat.sort_by(|a, b| {
                    a.0[0]
                        .total_cmp(&b.0[0])
                        .then(a.0[1].total_cmp(&b.0[1]))
                });
                flat.dedup_by(|a, b| a.0 == b.0);
                let planar: Vec<Vec<f64>> = flat.iter().map(|(q, _)| q.clone()).collect();
                let hull2 = convex_hull_2d(&planar);
                if hull2.len() < 3 {
                    continue;
                }
                // recover 3-D corners of the facet polygon
                let corners: Vec<&Vec<f64>> = hull2
                    .iter()
                    .map(|q| {
                        let m = flat
                            .iter()
                            .find(|(fq, _)| fq == q)
                            .expect("hull vertex came from the flat set")
                            .1;
                        &pts[m]
                    })
                    .collect();
                for t in 1..corners.len() - 1 {
                    let a = sub(corners[0], &centroid);
                    let b = sub(corners[t], &centroid);
                    let c = sub(corners[t + 1], &centroid);
                    volume += (crate::vecmath::dot(&a, &cross3(&b, &c))).abs() / 6.0;
                }
            }
        }
    }
    volume
}
