//! Central regions of a weighted sample under a depth function, and the
//! location summaries built from them.
//!
//! A central region at coverage r is the upper level set of the depth at
//! the data-driven cutoff [`alpha_r`]: the largest achieved depth value
//! whose level set still carries weight at least r. Regions are recorded
//! through their member atoms; for planar samples an explicit contour of
//! the depth field can be traced with [`contour_2d`].

use crate::depth::{self, DepthConfig, DepthKind};
use crate::error::{Error, Result};
use crate::vecmath::{dist, BBox};
use crate::weights::WeightedLocalSample;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A depth-central region described by its member atoms.
#[derive(Debug, Clone, Serialize)]
pub struct CentralRegion {
    /// Requested coverage.
    pub r: f64,
    /// Achieved depth cutoff.
    pub alpha: f64,
    /// Indices into the support whose depth reaches `alpha`.
    pub member_indices: Vec<usize>,
    /// Total weight of the members; at least `r` by construction.
    pub member_mass: f64,
    pub depth_kind: DepthKind,
    /// Traced level curves, present only when explicitly attached.
    pub contour: Option<Vec<Polyline>>,
}

/// An open or closed planar polyline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

/// How the conditional median was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianSearch {
    /// Deepest support atom only.
    SupportAtoms,
    /// Deepest atom followed by two passes of local 3x3 pattern search.
    AtomsWithGridRefinement,
}

/// Deepest-point estimate of the conditional center.
#[derive(Debug, Clone, Serialize)]
pub struct MedianEstimate {
    pub point: Vec<f64>,
    pub depth: f64,
    pub search: MedianSearch,
}

fn check_depths_weights(depths: &[f64], weights: &[f64]) -> Result<()> {
    if depths.is_empty() {
        return Err(Error::EmptySample);
    }
    if depths.len() != weights.len() {
        return Err(Error::DimensionMismatch(depths.len(), weights.len()));
    }
    if depths.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("depth"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::NonFinite("weight"));
    }
    Ok(())
}

/// Largest achieved depth value alpha with total weight at least r on
/// {depth >= alpha}. Requires r strictly inside (0, 1).
///
/// Scanning distinct depth values from the deepest down makes the result
/// an achieved value, so the region always contains its defining atom.
pub fn alpha_r(depths: &[f64], weights: &[f64], r: f64) -> Result<f64> {
    check_depths_weights(depths, weights)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "coverage r must lie strictly between 0 and 1, got {r}"
        )));
    }
    let mut idx: Vec<usize> = (0..depths.len()).collect();
    idx.sort_by(|&a, &b| depths[b].total_cmp(&depths[a]));
    let mut cum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let v = depths[idx[i]];
        // absorb the whole tie group before testing coverage
        while i < idx.len() && depths[idx[i]] == v {
            cum += weights[idx[i]];
            i += 1;
        }
        if cum >= r {
            return Ok(v);
        }
    }
    // weights sum to one and r < 1, so we only get here through rounding;
    // the full support is then the right answer
    Ok(depths[idx[idx.len() - 1]])
}

/// Central region of coverage r for the weighted sample, without contour.
pub fn central_region(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<CentralRegion> {
    let depths = depth::depth_at_points(kind, s, cfg)?;
    central_region_given_depths(s, &depths, kind, r)
}

/// Same as [`central_region`] for callers that already hold the depths.
pub fn central_region_given_depths(
    s: &WeightedLocalSample,
    depths: &[f64],
    kind: DepthKind,
    r: f64,
) -> Result<CentralRegion> {
    if depths.len() != s.len() {
        return Err(Error::DimensionMismatch(depths.len(), s.len()));
    }
    let alpha = alpha_r(depths, &s.weights, r)?;
    let member_indices: Vec<usize> = (0..s.len()).filter(|&i| depths[i] >= alpha).collect();
    let member_mass = member_indices.iter().map(|&i| s.weights[i]).sum();
    Ok(CentralRegion {
        r,
        alpha,
        member_indices,
        member_mass,
        depth_kind: kind,
        contour: None,
    })
}

/// Whether `y` belongs to the closed region {depth >= alpha}.
pub fn region_membership(
    y: &[f64],
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    alpha: f64,
) -> Result<bool> {
    Ok(depth::evaluate(kind, y, s, cfg)?.value >= alpha)
}

/// Weighted mean of the atoms whose depth reaches the (1 - r) coverage
/// cutoff, with weights renormalized over the kept atoms. r = 0 keeps
/// everything and reduces to the plain weighted mean.
pub fn trimmed_mean(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    r: f64,
) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "trimming fraction must lie in [0, 1), got {r}"
        )));
    }
    let depths = depth::depth_at_points(kind, s, cfg)?;
    let keep: Vec<usize> = if r == 0.0 {
        (0..s.len()).collect()
    } else {
        let alpha = alpha_r(&depths, &s.weights, 1.0 - r)?;
        (0..s.len()).filter(|&i| depths[i] >= alpha).collect()
    };
    let total: f64 = keep.iter().map(|&i| s.weights[i]).sum();
    let p = s.dim();
    let mut mean = vec![0.0; p];
    for &i in &keep {
        let w = s.weights[i] / total;
        for j in 0..p {
            mean[j] += w * s.points[i][j];
        }
    }
    Ok(mean)
}

/// Deepest point of the sample: the deepest atom, refined for planar
/// responses by two passes of 3x3 pattern search with shrinking step.
/// Depth ties resolve toward the lexicographically smallest point.
pub fn conditional_median(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
) -> Result<MedianEstimate> {
    let depths = depth::depth_at_points(kind, s, cfg)?;
    // scan atoms in coordinate order so depth ties pick the smallest point
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| {
        let pa = &s.points[a];
        let pb = &s.points[b];
        for (x, y) in pa.iter().zip(pb.iter()) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                other => return other,
            }
        }
        a.cmp(&b)
    });
    let mut best = order[0];
    for &i in &order[1..] {
        if depths[i] > depths[best] {
            best = i;
        }
    }
    let mut point = s.points[best].clone();
    let mut value = depths[best];

    if s.dim() != 2 {
        return Ok(MedianEstimate {
            point,
            depth: value,
            search: MedianSearch::SupportAtoms,
        });
    }

    let bbox = BBox::of_points(&s.points).ok_or(Error::EmptySample)?;
    let extent = bbox.max_extent();
    if extent > 0.0 {
        // two pattern-search passes, each a hill climb at fixed step
        for step in [extent / 4.0, extent / 16.0] {
            for _ in 0..64 {
                let mut moved = false;
                let mut cand_best = value;
                let mut cand_point: Option<Vec<f64>> = None;
                for dx in [-step, 0.0, step] {
                    for dy in [-step, 0.0, step] {
                        if dx == 0.0 && dy == 0.0 {
                            continue;
                        }
                        let q = vec![point[0] + dx, point[1] + dy];
                        let d = depth::evaluate(kind, &q, s, cfg)?.value;
                        if d > cand_best {
                            cand_best = d;
                            cand_point = Some(q);
                        }
                    }
                }
                if let Some(q) = cand_point {
                    point = q;
                    value = cand_best;
                    moved = true;
                }
                if !moved {
                    break;
                }
            }
        }
    }
    Ok(MedianEstimate {
        point,
        depth: value,
        search: MedianSearch::AtomsWithGridRefinement,
    })
}

/// Hausdorff distance between two finite point sets of equal dimension.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let p = a[0].len();
    for pt in a.iter().chain(b.iter()) {
        if pt.len() != p {
            return Err(Error::DimensionMismatch(pt.len(), p));
        }
        if pt.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
    }
    let directed = |from: &[Vec<f64>], to: &[Vec<f64>]| -> f64 {
        from.iter()
            .map(|x| {
                to.iter()
                    .map(|y| dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

// --- contour tracing ---------------------------------------------------

struct NodeGrid {
    nx: usize,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    values: Vec<f64>,
}

impl NodeGrid {
    fn v(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }
    fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.dx
    }
    fn y(&self, iy: usize) -> f64 {
        self.y0 + iy as f64 * self.dy
    }
}

/// Trace the level curves {depth = alpha} of the planar depth field over
/// the support bounding box expanded by ten percent per side.
///
/// Marching squares on a `resolution` x `resolution` cell grid with linear
/// interpolation along edges; saddle cells are disambiguated by sampling
/// the depth at the cell center. Curves that exit the box stay open.
pub fn contour_2d(
    s: &WeightedLocalSample,
    kind: DepthKind,
    cfg: &DepthConfig,
    alpha: f64,
    resolution: usize,
) -> Result<Vec<Polyline>> {
    if s.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            p: s.dim(),
            what: "contour tracing",
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(
            "contour resolution must be at least 2".into(),
        ));
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    let bbox = BBox::of_points(&s.points)
        .ok_or(Error::EmptySample)?
        .expanded(0.10);
    let nx = resolution + 1;
    let ny = resolution + 1;
    let dx = (bbox.maxs[0] - bbox.mins[0]) / resolution as f64;
    let dy = (bbox.maxs[1] - bbox.mins[1]) / resolution as f64;
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let q = [
                bbox.mins[0] + ix as f64 * dx,
                bbox.mins[1] + iy as f64 * dy,
            ];
            values.push(depth::evaluate(kind, &q, s, cfg)?.value);
        }
    }
    let grid = NodeGrid {
        nx,
        x0: bbox.mins[0],
        y0: bbox.mins[1],
        dx,
        dy,
        values,
    };

    // crossing points, one per grid edge, shared between adjacent cells
    let mut h_cross: Vec<Option<[f64; 2]>> = vec![None; (nx - 1) * ny];
    let mut v_cross: Vec<Option<[f64; 2]>> = vec![None; nx * (ny - 1)];
    let interp = |va: f64, vb: f64| -> f64 {
        // endpoints differ in side, so vb != va
        (alpha - va) / (vb - va)
    };
    for iy in 0..ny {
        for ix in 0..nx - 1 {
            let (va, vb) = (grid.v(ix, iy), grid.v(ix + 1, iy));
            if (va >= alpha) != (vb >= alpha) {
                let t = interp(va, vb);
                h_cross[iy * (nx - 1) + ix] = Some([grid.x(ix) + t * dx, grid.y(iy)]);
            }
        }
    }
    for iy in 0..ny - 1 {
        for ix in 0..nx {
            let (va, vb) = (grid.v(ix, iy), grid.v(ix, iy + 1));
            if (va >= alpha) != (vb >= alpha) {
                let t = interp(va, vb);
                v_cross[iy * nx + ix] = Some([grid.x(ix), grid.y(iy) + t * dy]);
            }
        }
    }

    // edge ids per cell: B = bottom, R = right, T = top, L = left
    let mut segments: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for iy in 0..resolution {
        for ix in 0..resolution {
            let b0 = grid.v(ix, iy) >= alpha;
            let b1 = grid.v(ix + 1, iy) >= alpha;
            let b2 = grid.v(ix + 1, iy + 1) >= alpha;
            let b3 = grid.v(ix, iy + 1) >= alpha;
            let case =
                (b0 as usize) | ((b1 as usize) << 1) | ((b2 as usize) << 2) | ((b3 as usize) << 3);
            if case == 0 || case == 15 {
                continue;
            }
            let bottom = h_cross[iy * (nx - 1) + ix];
            let top = h_cross[(iy + 1) * (nx - 1) + ix];
            let left = v_cross[iy * nx + ix];
            let right = v_cross[iy * nx + ix + 1];
            let mut push = |a: Option<[f64; 2]>, b: Option<[f64; 2]>| {
                if let (Some(pa), Some(pb)) = (a, b) {
                    if pa != pb {
                        segments.push((pa, pb));
                    }
                }
            };
            match case {
                1 | 14 => push(left, bottom),
                2 | 13 => push(bottom, right),
                3 | 12 => push(left, right),
                4 | 11 => push(right, top),
                6 | 9 => push(bottom, top),
                7 | 8 => push(top, left),
                5 | 10 => {
                    let center = [grid.x(ix) + 0.5 * dx, grid.y(iy) + 0.5 * dy];
                    let inside = depth::evaluate(kind, &center, s, cfg)?.value >= alpha;
                    // connect the diagonal that matches the center sample
                    let diag_in = case == 5; // corners BL and TR inside
                    if diag_in == inside {
                        push(bottom, right);
                        push(top, left);
                    } else {
                        push(left, bottom);
                        push(right, top);
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    Ok(stitch(segments))
}

fn key(p: [f64; 2]) -> (u64, u64) {
    (p[0].to_bits(), p[1].to_bits())
}

/// Join shared-endpoint segments into polylines. Crossing points are
/// computed once per grid edge, so matching endpoints are bitwise equal.
fn stitch(segments: Vec<([f64; 2], [f64; 2])>) -> Vec<Polyline> {
    let mut by_end: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        by_end.entry(key(*a)).or_default().push(i);
        by_end.entry(key(*b)).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut chain = std::collections::VecDeque::from([a, b]);
        // grow forward from the back, then backward from the front
        for forward in [true, false] {
            loop {
                let tip = if forward {
                    *chain.back().unwrap()
                } else {
                    *chain.front().unwrap()
                };
                let Some(cands) = by_end.get(&key(tip)) else {
                    break;
                };
                let Some(&next) = cands.iter().find(|&&i| !used[i]) else {
                    break;
                };
                used[next] = true;
                let (na, nb) = segments[next];
                let other = if key(na) == key(tip) { nb } else { na };
                if forward {
                    chain.push_back(other);
                } else {
                    chain.push_front(other);
                }
            }
        }
        let mut points: Vec<[f64; 2]> = chain.into_iter().collect();
        let closed = points.len() > 2 && key(points[0]) == key(points[points.len() - 1]);
        if closed {
            points.pop();
        }
        out.push(Polyline { points, closed });
    }
    out
}
