//! Tiny dense-vector helpers shared across modules. Nothing here is public.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// a += c * b
pub(crate) fn axpy(a: &mut [f64], c: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += c * y;
    }
}

/// Axis-aligned bounding box of a point cloud.
#[derive(Debug, Clone)]
pub(crate) struct BBox {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl BBox {
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Vec<f64>>) -> Option<BBox> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut mins = first.clone();
        let mut maxs = first.clone();
        for p in it {
            for (j, v) in p.iter().enumerate() {
                if *v < mins[j] {
                    mins[j] = *v;
                }
                if *v > maxs[j] {
                    maxs[j] = *v;
                }
            }
        }
        Some(BBox { mins, maxs })
    }

    /// Grow each side by `frac` of its extent. Sides of zero extent get a
    /// fixed margin of one half instead, so downstream grids never collapse.
    pub fn expanded(&self, frac: f64) -> BBox {
        let mut out = self.clone();
        for j in 0..out.mins.len() {
            let ext = self.maxs[j] - self.mins[j];
            let margin = if ext > 0.0 { frac * ext } else { 0.5 };
            out.mins[j] -= margin;
            out.maxs[j] += margin;
        }
        out
    }

    pub fn max_extent(&self) -> f64 {
        self.mins
            .iter()
            .zip(&self.maxs)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }
}

/// Visit every k-subset of 0..n in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // advance the odometer
        let mut j = k;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if idx[j] != j + n - k {
                break;
            }
            if j == 0 {
                return;
            }
        }
        idx[j] += 1;
        for t in j + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}
