//! Uniform grids and grid-tabulated functions.
//!
//! Densities, integrated densities, and smoothed distribution estimates are
//! all carried as values on one shared uniform grid over the observation
//! window `[0, M]`. Integration is composite trapezoidal, i.e. exact for the
//! piecewise-linear interpolant of the tabulated values, with off-node limits
//! handled by interpolation.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

/// Relative slack when snapping query points to grid nodes.
const NODE_SNAP: f64 = 1e-9;

/// A uniform grid `start + k * step`, `k = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    pub n_points: usize,
}

impl GridSpec {
    /// Grid over `[0, upper]` resolving kernel features of scale `bandwidth`:
    /// at least 20 nodes per bandwidth and at least 2000 cells overall.
    pub fn covering(upper: f64, bandwidth: f64) -> Result<Self> {
        if !(upper > 0.0) || !upper.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "grid upper bound must be positive, got {upper}"
            )));
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let target = (bandwidth / 20.0).min(upper / 2000.0);
        let cells = (upper / target).ceil() as usize;
        Ok(Self {
            start: 0.0,
            step: upper / cells as f64,
            n_points: cells + 1,
        })
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.point(k))
    }

    /// Tabulate `f` on the grid.
    pub fn tabulate(&self, mut f: impl FnMut(f64) -> f64) -> GridFunction {
        GridFunction {
            start: self.start,
            step: self.step,
            values: self.points().map(|t| f(t)).collect(),
        }
    }
}

/// Function values tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        Self { start, step, values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn end(&self) -> f64 {
        self.start + (self.values.len() - 1) as f64 * self.step
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            start: self.start,
            step: self.step,
            n_points: self.values.len(),
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.values.len() == other.values.len()
            && (self.start - other.start).abs() <= NODE_SNAP * self.step
            && (self.step - other.step).abs() <= NODE_SNAP * self.step
    }

    /// Value of the piecewise-linear interpolant at `t`, clamped to the grid
    /// range.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.values.len();
        let idx = (t - self.start) / self.step;
        if idx <= 0.0 {
            return self.values[0];
        }
        if idx >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let k = idx.floor() as usize;
        let frac = idx - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }

    /// Running trapezoidal integral from the grid start; same grid, first
    /// value zero.
    pub fn cumulative(&self) -> GridFunction {
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * self.step;
            out.push(acc);
        }
        GridFunction {
            start: self.start,
            step: self.step,
            values: out,
        }
    }

    /// Trapezoidal integral of the interpolant over `[from, to]`.
    pub fn integrate(&self, from: f64, to: f64) -> Result<f64> {
        trapezoid_window(&self.values, self.start, self.step, from, to)
    }
}

/// Trapezoidal integral of grid `values` over `[from, to]`, which must lie
/// inside the tabulated range (up to snapping slack). Off-node limits use the
/// linear interpolant, so the result is exact for piecewise-linear data.
pub fn trapezoid_window(values: &[f64], start: f64, step: f64, from: f64, to: f64) -> Result<f64> {
    let n = values.len();
    let end = start + (n - 1) as f64 * step;
    let slack = step * NODE_SNAP;
    if from > to || from < start - slack || to > end + slack {
        return Err(Error::RangeOutsideGrid);
    }
    let from = from.max(start);
    let to = to.min(end);

    let interp = |x: f64| -> f64 {
        let idx = ((x - start) / step).clamp(0.0, (n - 1) as f64);
        let k = (idx.floor() as usize).min(n - 2);
        let frac = idx - k as f64;
        values[k] + frac * (values[k + 1] - values[k])
    };

    let lo_idx = (from - start) / step;
    let hi_idx = (to - start) / step;
    let i0 = (lo_idx - NODE_SNAP).ceil().max(0.0) as usize;
    let i1 = ((hi_idx + NODE_SNAP).floor() as usize).min(n - 1);

    if i0 > i1 {
        // Both limits inside one cell.
        return Ok(0.5 * (interp(from) + interp(to)) * (to - from));
    }

    let mut total = 0.0;
    let left_node = start + i0 as f64 * step;
    if left_node - from > slack {
        total += 0.5 * (interp(from) + values[i0]) * (left_node - from);
    }
    for k in i0..i1 {
        total += 0.5 * (values[k] + values[k + 1]) * step;
    }
    let right_node = start + i1 as f64 * step;
    if to - right_node > slack {
        total += 0.5 * (values[i1] + interp(to)) * (to - right_node);
    }
    Ok(total)
}
