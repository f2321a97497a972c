//! Distribution estimators for current status samples.
//!
//! The MLE is the left-continuous slope of the greatest convex minorant of
//! the discrete cusum diagram `(i, Σ_{j<=i} Δ_(j))` — a step function with
//! jumps at observation times. The smoothed estimator (MSLE) replaces the
//! diagram with its continuous analogue `(G(t), H(t))` built from kernel
//! estimates of the observation density and sub-density; its slope is a
//! continuous function of `t` evaluated here on the grid.

use alloc::vec::Vec;

use crate::grid::{GridFunction, GridSpec};
use crate::isotonic::{gcm, CusumDiagram};
use crate::kernel::{estimate_densities, estimate_density_derivatives, KernelSpec};
use crate::{Error, Result};

/// Probabilities are clipped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside
/// logarithms and ratios; stored estimates are never clipped.
pub const PROB_CLAMP: f64 = 1e-10;

/// Floor applied to the smoothed observation density before integrating it
/// into the cusum abscissa, so the abscissa stays strictly increasing even
/// where boundary kernels push the density estimate slightly negative.
pub const DENSITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleLabel {
    First,
    Second,
    Combined,
}

/// One current status sample: inspection times with their status indicators,
/// stored sorted by time.
#[derive(Debug, Clone)]
pub struct CurrentStatusSample {
    times: Vec<f64>,
    deltas: Vec<bool>,
    label: SampleLabel,
}

impl CurrentStatusSample {
    pub fn new(observations: Vec<(f64, bool)>, label: SampleLabel) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut obs = observations;
        for (t, _) in obs.iter() {
            if !t.is_finite() || *t < 0.0 {
                return Err(Error::InvalidObservation(alloc::format!(
                    "inspection time must be finite and nonnegative, got {t}"
                )));
            }
        }
        obs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            times: obs.iter().map(|o| o.0).collect(),
            deltas: obs.iter().map(|o| o.1).collect(),
            label,
        })
    }

    /// Merge two samples into the combined sample.
    pub fn pooled(first: &CurrentStatusSample, second: &CurrentStatusSample) -> Self {
        let mut obs: Vec<(f64, bool)> = first.iter().chain(second.iter()).collect();
        obs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            times: obs.iter().map(|o| o.0).collect(),
            deltas: obs.iter().map(|o| o.1).collect(),
            label: SampleLabel::Combined,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.times.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn label(&self) -> SampleLabel {
        self.label
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn deltas(&self) -> &[bool] {
        &self.deltas
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, bool)> + '_ {
        self.times.iter().copied().zip(self.deltas.iter().copied())
    }

    /// Number of positive indicators.
    pub fn positive_count(&self) -> usize {
        self.deltas.iter().filter(|&&d| d).count()
    }
}

/// Right-continuous nondecreasing step function on `[0, ∞)` with values in
/// `[0, 1]`, zero before its first jump.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneStepFunction {
    jump_locations: Vec<f64>,
    post_jump_values: Vec<f64>,
}

impl MonotoneStepFunction {
    pub fn new(jump_locations: Vec<f64>, post_jump_values: Vec<f64>) -> Result<Self> {
        if jump_locations.len() != post_jump_values.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "jump location/value length mismatch"
            )));
        }
        if jump_locations.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(alloc::format!(
                "jump locations must be strictly increasing"
            )));
        }
        if post_jump_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(alloc::format!(
                "step values must be nondecreasing"
            )));
        }
        if post_jump_values
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(Error::InvalidParameter(alloc::format!(
                "step values must lie in [0, 1]"
            )));
        }
        Ok(Self {
            jump_locations,
            post_jump_values,
        })
    }

    /// The constant-zero function.
    pub fn zero() -> Self {
        Self {
            jump_locations: Vec::new(),
            post_jump_values: Vec::new(),
        }
    }

    pub fn jump_locations(&self) -> &[f64] {
        &self.jump_locations
    }

    pub fn post_jump_values(&self) -> &[f64] {
        &self.post_jump_values
    }

    /// Right-continuous evaluation: the value after the last jump at or
    /// before `t`, zero before the first jump.
    pub fn eval(&self, t: f64) -> f64 {
        match self
            .jump_locations
            .binary_search_by(|loc| loc.partial_cmp(&t).unwrap())
        {
            Ok(k) => self.post_jump_values[k],
            Err(0) => 0.0,
            Err(k) => self.post_jump_values[k - 1],
        }
    }

    /// Number of jumps with location in `[a, b]`. Every stored jump is a
    /// strict increase.
    pub fn jump_count(&self, a: f64, b: f64) -> usize {
        self.jump_locations
            .iter()
            .filter(|&&loc| loc >= a && loc <= b)
            .count()
    }
}

/// Number of strict increases of `f_hat` with jump location in `[a, b]`.
pub fn jump_count(f_hat: &MonotoneStepFunction, a: f64, b: f64) -> Result<usize> {
    if !(a < b) {
        return Err(Error::InvalidParameter(alloc::format!(
            "jump count window needs a < b, got [{a}, {b}]"
        )));
    }
    Ok(f_hat.jump_count(a, b))
}

/// The nonparametric MLE of the hidden-event distribution: slope of the
/// greatest convex minorant of the cusum diagram of cumulative indicators
/// over observation ranks. Tied inspection times are merged into a single
/// diagram point before the minorant is taken.
pub fn mle(sample: &CurrentStatusSample) -> Result<MonotoneStepFunction> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    // distinct times with indicator counts
    let mut xs = Vec::with_capacity(sample.len() + 1);
    let mut ys = Vec::with_capacity(sample.len() + 1);
    let mut distinct_times = Vec::with_capacity(sample.len());
    xs.push(0.0);
    ys.push(0.0);
    let times = sample.times();
    let deltas = sample.deltas();
    let mut i = 0;
    let mut count = 0usize;
    let mut positives = 0usize;
    while i < times.len() {
        let t = times[i];
        while i < times.len() && times[i] == t {
            count += 1;
            if deltas[i] {
                positives += 1;
            }
            i += 1;
        }
        distinct_times.push(t);
        xs.push(count as f64);
        ys.push(positives as f64);
    }
    let minorant = gcm(&CusumDiagram::new(xs.clone(), ys)?);
    let slopes = minorant.left_slopes_sorted(&xs[1..])?;

    let mut jump_locations = Vec::new();
    let mut post_jump_values = Vec::new();
    let mut prev = 0.0;
    for (t, s) in distinct_times.iter().zip(slopes.iter()) {
        let v = s.clamp(0.0, 1.0);
        if v > prev {
            jump_locations.push(*t);
            post_jump_values.push(v);
            prev = v;
        }
    }
    MonotoneStepFunction::new(jump_locations, post_jump_values)
}

/// A smoothed distribution estimate on the grid, with an optional density
/// estimate alongside.
#[derive(Debug, Clone)]
pub struct SmoothEstimate {
    pub dist: GridFunction,
    pub density: Option<GridFunction>,
    pub source_bandwidth: f64,
}

impl SmoothEstimate {
    /// Linear interpolation between grid nodes; the estimate is continuous
    /// by construction.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.dist.value_at(t)
    }
}

/// Smoothed maximum likelihood estimate from tabulated density estimates:
/// the left slope of the greatest convex minorant of the continuous cusum
/// diagram `(G(t_k), H(t_k))`, clamped into `[0, 1]`.
///
/// `g_tilde` is floored at [`DENSITY_FLOOR`] before integration so the
/// abscissa increases strictly.
pub fn msle(
    g_tilde: &GridFunction,
    h_tilde: &GridFunction,
    source_bandwidth: f64,
) -> Result<SmoothEstimate> {
    if !g_tilde.same_grid(h_tilde) {
        return Err(Error::GridMismatch);
    }
    let floored = GridFunction::new(
        g_tilde.start,
        g_tilde.step,
        g_tilde.values.iter().map(|&v| v.max(DENSITY_FLOOR)).collect(),
    );
    let big_g = floored.cumulative();
    let big_h = h_tilde.cumulative();
    if big_g.values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingAbscissa);
    }
    let minorant = gcm(&CusumDiagram::new(big_g.values.clone(), big_h.values)?);
    // Left slopes at the nodes are chord slopes of the polygonal diagram,
    // i.e. cell averages lagging the continuous slope by half a cell.
    // Averaging the two segments adjacent to a node recovers the continuous
    // cusum's slope to second order in the grid step.
    let left = minorant.left_slopes_sorted(&big_g.values[1..])?;
    let npts = big_g.values.len();
    let mut values = Vec::with_capacity(npts);
    values.push(left[0].clamp(0.0, 1.0));
    for k in 1..npts - 1 {
        values.push((0.5 * (left[k - 1] + left[k])).clamp(0.0, 1.0));
    }
    values.push(left[npts - 2].clamp(0.0, 1.0));
    Ok(SmoothEstimate {
        dist: GridFunction::new(g_tilde.start, g_tilde.step, values),
        density: None,
        source_bandwidth,
    })
}

/// MSLE of the combined sample: per-sample kernel densities mixed with
/// weights `m/N` and `n/N`, then [`msle`].
pub fn combined_msle(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    spec: &KernelSpec,
    grid: &GridSpec,
) -> Result<SmoothEstimate> {
    let (g1, h1) = estimate_densities(sample1, spec, grid)?;
    let (g2, h2) = estimate_densities(sample2, spec, grid)?;
    let alpha = sample1.len() as f64 / (sample1.len() + sample2.len()) as f64;
    let beta = 1.0 - alpha;
    let mix = |a: &GridFunction, b: &GridFunction| {
        GridFunction::new(
            a.start,
            a.step,
            a.values
                .iter()
                .zip(b.values.iter())
                .map(|(x, y)| alpha * x + beta * y)
                .collect(),
        )
    };
    msle(&mix(&g1, &g2), &mix(&h1, &h2), spec.bandwidth)
}

/// Pooled-sample MSLE together with a kernel density estimate of the hidden
/// distribution, from the quotient rule applied to the ratio representation
/// `F = h/g`:
///
/// `f(t) = h'(t)/g(t) - g'(t) h(t)/g(t)²`,
///
/// with the derivative estimates built from the kernel derivative under the
/// same boundary multipliers. Errors if the smoothed observation density
/// falls below [`DENSITY_FLOOR`] anywhere on `[window.0, window.1]`, where
/// the ratio representation is relied on.
pub fn msle_with_density(
    sample: &CurrentStatusSample,
    bandwidth_tilde: f64,
    grid: &GridSpec,
    window: (f64, f64),
) -> Result<SmoothEstimate> {
    let spec = KernelSpec::triweight(bandwidth_tilde)?;
    let (g, h) = estimate_densities(sample, &spec, grid)?;
    for (k, &gv) in g.values.iter().enumerate() {
        let t = grid.point(k);
        if t >= window.0 && t <= window.1 && gv < DENSITY_FLOOR {
            return Err(Error::DensityBelowFloor { at: t });
        }
    }
    let (dg, dh) = estimate_density_derivatives(sample, &spec, grid)?;
    let density: Vec<f64> = (0..grid.n_points)
        .map(|k| {
            let gv = g.values[k].max(DENSITY_FLOOR);
            dh.values[k] / gv - dg.values[k] * h.values[k] / (gv * gv)
        })
        .collect();
    let mut est = msle(&g, &h, bandwidth_tilde)?;
    est.density = Some(GridFunction::new(grid.start, grid.step, density));
    Ok(est)
}
