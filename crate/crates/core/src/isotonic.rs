//! Greatest convex minorant and pool-adjacent-violators solvers.
//!
//! Both the step-function MLE and the smoothed estimator are left-continuous
//! slopes of the greatest convex minorant of a cusum diagram; the discrete and
//! continuous cases differ only in the diagram fed in. PAVA computes the same
//! isotonic fit by block pooling and doubles as an independent cross-check.

use alloc::vec::Vec;

use crate::{Error, Result};

/// A cusum diagram: plane points with strictly increasing x, normally
/// starting at the origin.
#[derive(Debug, Clone)]
pub struct CusumDiagram {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl CusumDiagram {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "coordinate lengths differ: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::DegenerateDiagram);
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingAbscissa);
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservation(alloc::format!(
                "non-finite diagram coordinate"
            )));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            points.iter().map(|p| p.0).collect(),
            points.iter().map(|p| p.1).collect(),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }
}

/// The greatest convex minorant of a diagram: its vertices (a subsequence of
/// the diagram points, always including the first and last) and the strictly
/// increasing per-segment slopes.
#[derive(Debug, Clone)]
pub struct ConvexMinorant {
    vertex_xs: Vec<f64>,
    vertex_ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl ConvexMinorant {
    pub fn vertex_xs(&self) -> &[f64] {
        &self.vertex_xs
    }

    pub fn vertex_ys(&self) -> &[f64] {
        &self.vertex_ys
    }

    /// Slope of each segment, in order; one fewer than the vertices.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Minorant value at `x` (linear between vertices, extended constantly
    /// outside — callers stay inside the domain).
    pub fn value_at(&self, x: f64) -> f64 {
        let k = match self
            .vertex_xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(k) => return self.vertex_ys[k],
            Err(k) => k,
        };
        if k == 0 {
            return self.vertex_ys[0];
        }
        if k == self.vertex_xs.len() {
            return self.vertex_ys[self.vertex_xs.len() - 1];
        }
        self.vertex_ys[k - 1] + self.slopes[k - 1] * (x - self.vertex_xs[k - 1])
    }

    /// Left-continuous slope at `x`: the slope of the segment whose half-open
    /// interval `(v_{k-1}, v_k]` contains `x`. Defined on `(x_0, x_last]`.
    pub fn left_slope(&self, x: f64) -> Result<f64> {
        let first = self.vertex_xs[0];
        let last = self.vertex_xs[self.vertex_xs.len() - 1];
        if !(x > first) || x > last {
            return Err(Error::SlopeQueryOutOfRange);
        }
        // first index with vertex_xs[i] >= x; slope of the segment ending there
        let mut lo = 0;
        let mut hi = self.vertex_xs.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.vertex_xs[mid] < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(self.slopes[lo - 1])
    }

    /// Left-continuous slopes at a nondecreasing sequence of query points in
    /// `(x_0, x_last]`, in one merged sweep.
    pub fn left_slopes_sorted(&self, queries: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(queries.len());
        let mut seg = 1; // index of the vertex ending the current segment
        let last = self.vertex_xs[self.vertex_xs.len() - 1];
        for &x in queries {
            if !(x > self.vertex_xs[0]) || x > last {
                return Err(Error::SlopeQueryOutOfRange);
            }
            while self.vertex_xs[seg] < x {
                seg += 1;
            }
            out.push(self.slopes[seg - 1]);
        }
        Ok(out)
    }
}

/// Greatest convex minorant via a single monotone-chain scan. Points with a
/// non-left turn (cross product <= 0) are dropped, so collinear interior
/// points never become vertices and segment slopes strictly increase.
pub fn gcm(diagram: &CusumDiagram) -> ConvexMinorant {
    let xs = diagram.xs();
    let ys = diagram.ys();
    let n = xs.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // cross((a→b), (a→i)) > 0 keeps b strictly below the chord a→i
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let vertex_xs: Vec<f64> = hull.iter().map(|&i| xs[i]).collect();
    let vertex_ys: Vec<f64> = hull.iter().map(|&i| ys[i]).collect();
    let slopes = vertex_xs
        .windows(2)
        .zip(vertex_ys.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    ConvexMinorant {
        vertex_xs,
        vertex_ys,
        slopes,
    }
}

/// Weighted isotonic regression by pool-adjacent-violators: the nondecreasing
/// vector minimizing `Σ w_i (y_i - v_i)²`. On a cusum diagram with
/// x-increments as weights and y-increment ratios as values this reproduces
/// the minorant's left slopes, which is how it serves as an oracle for
/// [`gcm`].
pub fn pava(weights: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    if weights.len() != values.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "weights/values length mismatch: {} vs {}",
            weights.len(),
            values.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!(
            "isotonic weights must be positive"
        )));
    }
    let n = values.len();
    let mut mean: Vec<f64> = Vec::with_capacity(n);
    let mut weight: Vec<f64> = Vec::with_capacity(n);
    let mut count: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        mean.push(values[i]);
        weight.push(weights[i]);
        count.push(1);
        while mean.len() >= 2 && mean[mean.len() - 2] >= mean[mean.len() - 1] {
            let (m2, w2, c2) = (mean.pop().unwrap(), weight.pop().unwrap(), count.pop().unwrap());
            let last = mean.len() - 1;
            let merged = weight[last] + w2;
            mean[last] = (weight[last] * mean[last] + w2 * m2) / merged;
            weight[last] = merged;
            count[last] += c2;
        }
    }
    let mut out = Vec::with_capacity(n);
    for (m, c) in mean.iter().zip(count.iter()) {
        for _ in 0..*c {
            out.push(*m);
        }
    }
    Ok(out)
}
