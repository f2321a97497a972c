//! Two-sample test statistics and their normalizations.
//!
//! Four statistics are computed from a pair of current status samples:
//!
//! * `V_N` — the smoothed likelihood-ratio statistic: a Kullback-Leibler
//!   weighted contrast between the per-sample smoother estimates and the
//!   pooled one, integrated over the evaluation window `[a, b]`.
//! * the raw likelihood-ratio statistic from the step-function MLEs;
//! * `U_N` — the corrected indicator-mean contrast, standardized by the
//!   pooled-MLE variance estimate (valid only when the two observation
//!   densities coincide);
//! * `W_N` — the squared-distribution moment contrast, likewise tied to
//!   equal observation densities.
//!
//! `V_N` admits an asymptotic pivot: centered at `(b-a)/(N b_N) ∫K²` and
//! scaled by `N sqrt(b_N/(b-a))` it is asymptotically normal with variance
//! `sigma_K²`; when the observation densities differ a deterministic bias
//! proportional to `b_N^4` enters the centering. Second-order diagnostics
//! (the pair-sum decomposition and the jump-count intensity ratio) are
//! included for simulation studies where the true model is known.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::estimators::{
    mle, msle, CurrentStatusSample, MonotoneStepFunction, SmoothEstimate, DENSITY_FLOOR,
    PROB_CLAMP,
};
use crate::grid::{trapezoid_window, GridFunction, GridSpec};
use crate::kernel::{estimate_densities, KernelMoments, KernelSpec};
use crate::{Error, Result};

/// Second moment of the limit variable governing the pointwise MLE
/// distribution, `4 E Z²`; reported alongside the jump-count diagnostic.
pub const FOUR_E_Z_SQUARED: f64 = 1.05423856;

/// Empirical intensity constant relating the expected MLE jump count to
/// `N^{1/3}` times the model integral; the diagnostic ratio should sit near
/// this value under the null.
pub const JUMP_INTENSITY_CONSTANT: f64 = 2.1;

/// Bandwidth rule `b_N = constant * N^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthRule {
    pub constant: f64,
    pub exponent: f64,
}

impl BandwidthRule {
    /// Exponents in `[1/5, 1/3)` give the regimes with a usable pivot.
    pub fn new(constant: f64, exponent: f64) -> Result<Self> {
        if !(constant > 0.0) || !constant.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "bandwidth constant must be positive, got {constant}"
            )));
        }
        if !(0.2..1.0 / 3.0).contains(&exponent) {
            return Err(Error::InvalidParameter(alloc::format!(
                "bandwidth exponent must lie in [1/5, 1/3), got {exponent}"
            )));
        }
        Ok(Self { constant, exponent })
    }

    #[inline]
    pub fn bandwidth(&self, n_total: usize) -> f64 {
        self.constant * (n_total as f64).powf(-self.exponent)
    }
}

/// Evaluation window, observation support, and bandwidth rule for one test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestConfig {
    /// Lower end of the evaluation window.
    pub a: f64,
    /// Upper end of the evaluation window.
    pub b: f64,
    /// Upper end `M` of the observation support `[0, M]`.
    pub support_end: f64,
    /// Rule for the statistic bandwidth `b_N`.
    pub bandwidth: BandwidthRule,
}

impl TestConfig {
    pub fn new(a: f64, b: f64, support_end: f64, bandwidth: BandwidthRule) -> Result<Self> {
        if !(0.0 < a && a < b && b < support_end) || !support_end.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "need 0 < a < b < M, got a={a}, b={b}, M={support_end}"
            )));
        }
        Ok(Self {
            a,
            b,
            support_end,
            bandwidth,
        })
    }

    /// The defaults used throughout the Weibull experiments: window
    /// `[0.1, 1.9]` inside `[0, 2]`, `b_N = 2 N^{-1/5}`.
    pub fn default_weibull() -> Self {
        Self {
            a: 0.1,
            b: 1.9,
            support_end: 2.0,
            bandwidth: BandwidthRule {
                constant: 2.0,
                exponent: 0.2,
            },
        }
    }

    /// Shared grid over `[0, M]` fine enough for `finest_bandwidth`.
    pub fn grid(&self, finest_bandwidth: f64) -> Result<GridSpec> {
        GridSpec::covering(self.support_end, finest_bandwidth)
    }
}

#[inline]
fn clamp_prob(x: f64) -> f64 {
    x.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

// ---------------------------------------------------------------------------
// Windowed integration helpers
// ---------------------------------------------------------------------------

/// Node range of a grid covering the evaluation window, for tabulating
/// integrands only where they are integrated.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StatWindow {
    pub i_lo: usize,
    pub i_hi: usize,
    pub start: f64,
    pub step: f64,
    pub a: f64,
    pub b: f64,
}

impl StatWindow {
    pub(crate) fn new(grid: &GridSpec, a: f64, b: f64) -> Result<Self> {
        if a < grid.start - 1e-9 * grid.step || b > grid.end() + 1e-9 * grid.step || a >= b {
            return Err(Error::RangeOutsideGrid);
        }
        let i_lo = (((a - grid.start) / grid.step).floor().max(0.0)) as usize;
        let i_hi = ((((b - grid.start) / grid.step).ceil()) as usize).min(grid.n_points - 1);
        Ok(Self {
            i_lo,
            i_hi,
            start: grid.point(i_lo),
            step: grid.step,
            a,
            b,
        })
    }

    #[inline]
    pub(crate) fn len(&self) -> usize {
        self.i_hi - self.i_lo + 1
    }

    pub(crate) fn integrate(&self, values: &[f64]) -> Result<f64> {
        trapezoid_window(values, self.start, self.step, self.a, self.b)
    }
}

/// The smoothed likelihood-ratio integrand and its window integral, shared
/// between the observed statistic and its bootstrap replicas. Scratch buffers
/// are caller-provided so resampling loops do not allocate.
#[allow(clippy::too_many_arguments)]
pub(crate) fn v_n_from_parts(
    w: &StatWindow,
    m: usize,
    n: usize,
    h1: &[f64],
    g1: &[f64],
    f1: &[f64],
    h2: &[f64],
    g2: &[f64],
    f2: &[f64],
    f_pool: &[f64],
    scratch1: &mut Vec<f64>,
    scratch2: &mut Vec<f64>,
) -> Result<f64> {
    scratch1.clear();
    scratch2.clear();
    scratch1.reserve(w.len());
    scratch2.reserve(w.len());
    for k in w.i_lo..=w.i_hi {
        let fp = clamp_prob(f_pool[k]);
        let ln_fp = fp.ln();
        let ln_1fp = (1.0 - fp).ln();

        let fa = clamp_prob(f1[k]);
        scratch1.push(h1[k] * (fa.ln() - ln_fp) + (g1[k] - h1[k]) * ((1.0 - fa).ln() - ln_1fp));

        let fb = clamp_prob(f2[k]);
        scratch2.push(h2[k] * (fb.ln() - ln_fp) + (g2[k] - h2[k]) * ((1.0 - fb).ln() - ln_1fp));
    }
    let total = m + n;
    let term1 = w.integrate(scratch1)?;
    let term2 = w.integrate(scratch2)?;
    Ok(2.0 * m as f64 / total as f64 * term1 + 2.0 * n as f64 / total as f64 * term2)
}

// ---------------------------------------------------------------------------
// Smoothed fit: shared inputs of the V_N statistic
// ---------------------------------------------------------------------------

/// Kernel density estimates and smoother fits for both samples and their
/// pool, all on one shared grid.
#[derive(Debug, Clone)]
pub struct SmoothedFit {
    pub m: usize,
    pub n: usize,
    pub bandwidth: f64,
    pub grid: GridSpec,
    pub g1: GridFunction,
    pub h1: GridFunction,
    pub g2: GridFunction,
    pub h2: GridFunction,
    pub est1: SmoothEstimate,
    pub est2: SmoothEstimate,
    pub est_pooled: SmoothEstimate,
}

/// Estimate densities at `b_N = rule(N)` and build the three smoother fits.
pub fn smoothed_fit(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    config: &TestConfig,
    grid: &GridSpec,
) -> Result<SmoothedFit> {
    let m = sample1.len();
    let n = sample2.len();
    let bandwidth = config.bandwidth.bandwidth(m + n);
    let spec = KernelSpec::triweight(bandwidth)?;
    let (g1, h1) = estimate_densities(sample1, &spec, grid)?;
    let (g2, h2) = estimate_densities(sample2, &spec, grid)?;
    let alpha = m as f64 / (m + n) as f64;
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
    let g_pool = mix(&g1, &g2);
    let h_pool = mix(&h1, &h2);
    let est1 = msle(&g1, &h1, bandwidth)?;
    let est2 = msle(&g2, &h2, bandwidth)?;
    let est_pooled = msle(&g_pool, &h_pool, bandwidth)?;
    Ok(SmoothedFit {
        m,
        n,
        bandwidth,
        grid: *grid,
        g1,
        h1,
        g2,
        h2,
        est1,
        est2,
        est_pooled,
    })
}

/// The smoothed likelihood-ratio statistic
///
/// `V_N = (2m/N) ∫_a^b { h₁ log(F₁/F) + (g₁-h₁) log((1-F₁)/(1-F)) } dt
///      + (2n/N) ∫_a^b { h₂ log(F₂/F) + (g₂-h₂) log((1-F₂)/(1-F)) } dt`,
///
/// by trapezoid on the shared grid, probabilities clipped inside the logs.
pub fn v_n_statistic(fit: &SmoothedFit, config: &TestConfig) -> Result<f64> {
    let w = StatWindow::new(&fit.grid, config.a, config.b)?;
    if !(fit.g1.same_grid(&fit.h1)
        && fit.g1.same_grid(&fit.g2)
        && fit.g1.same_grid(&fit.h2)
        && fit.g1.same_grid(&fit.est1.dist))
    {
        return Err(Error::GridMismatch);
    }
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    v_n_from_parts(
        &w,
        fit.m,
        fit.n,
        &fit.h1.values,
        &fit.g1.values,
        &fit.est1.dist.values,
        &fit.h2.values,
        &fit.g2.values,
        &fit.est2.dist.values,
        &fit.est_pooled.dist.values,
        &mut s1,
        &mut s2,
    )
}

/// Centering constant `(b-a)/(N b_N) ∫K²` of the pivot.
pub fn v_n_centering(n_total: usize, config: &TestConfig, moments: &KernelMoments) -> f64 {
    let b_n = config.bandwidth.bandwidth(n_total);
    (config.b - config.a) / (n_total as f64 * b_n) * moments.int_k2
}

/// Normalize `V_N` into its asymptotic pivot:
/// `N sqrt(b_N/(b-a)) (V_N - centering - D_N)`, where the bias `D_N` is zero
/// when both observation densities coincide and otherwise comes from
/// [`d_n_bias`].
pub fn pivot_v_n(
    v_n: f64,
    n_total: usize,
    config: &TestConfig,
    moments: &KernelMoments,
    d_n: Option<f64>,
) -> f64 {
    let b_n = config.bandwidth.bandwidth(n_total);
    let centering = v_n_centering(n_total, config, moments);
    n_total as f64 * (b_n / (config.b - config.a)).sqrt() * (v_n - centering - d_n.unwrap_or(0.0))
}

/// Density information needed by the deterministic bias term: either the
/// true model functions tabulated on the grid, or kernel estimates of them.
#[derive(Debug, Clone)]
pub struct BiasInputs {
    pub hidden_density: GridFunction,
    pub hidden_cdf: GridFunction,
    pub g1: GridFunction,
    pub g1_deriv: GridFunction,
    pub g2: GridFunction,
    pub g2_deriv: GridFunction,
    /// First-sample weight `m/N`.
    pub alpha: f64,
}

/// The `b_N^4`-order bias entering the pivot centering when the observation
/// densities differ:
///
/// `D_N = αβ ∫_a^b f² (g₁'g₂ - g₂'g₁)² / (F(1-F) ḡ g₁ g₂) dt · (∫u²K)² b_N⁴`.
///
/// Identically zero when `g₁ = g₂`.
pub fn d_n_bias(
    inputs: &BiasInputs,
    n_total: usize,
    config: &TestConfig,
    moments: &KernelMoments,
) -> Result<f64> {
    let b_n = config.bandwidth.bandwidth(n_total);
    let grid = inputs.g1.spec();
    let w = StatWindow::new(&grid, config.a, config.b)?;
    let alpha = inputs.alpha;
    let beta = 1.0 - alpha;
    let mut integrand = Vec::with_capacity(w.len());
    for k in w.i_lo..=w.i_hi {
        let f = inputs.hidden_density.values[k];
        let cap_f = clamp_prob(inputs.hidden_cdf.values[k]);
        let g1 = inputs.g1.values[k].max(DENSITY_FLOOR);
        let g2 = inputs.g2.values[k].max(DENSITY_FLOOR);
        let cross = inputs.g1_deriv.values[k] * g2 - inputs.g2_deriv.values[k] * g1;
        let g_bar = alpha * g1 + beta * g2;
        integrand.push(f * f * cross * cross / (cap_f * (1.0 - cap_f) * g_bar * g1 * g2));
    }
    let integral = w.integrate(&integrand)?;
    Ok(alpha * beta * integral * moments.int_u2k * moments.int_u2k * b_n.powi(4))
}

// ---------------------------------------------------------------------------
// Raw likelihood-ratio statistic
// ---------------------------------------------------------------------------

/// Twice the difference is not taken here: the statistic is the plain sum of
/// per-observation log-likelihood-ratio terms over observations with
/// `T_i ∈ [a, b]`, with the per-sample MLEs in the numerators and the pooled
/// MLE in the denominators. Terms with a zero coefficient are zero.
pub fn lr_statistic(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    config: &TestConfig,
) -> Result<f64> {
    let f1 = mle(sample1)?;
    let f2 = mle(sample2)?;
    let pooled = CurrentStatusSample::pooled(sample1, sample2);
    let fp = mle(&pooled)?;
    Ok(lr_sum(sample1, &f1, &fp, config) + lr_sum(sample2, &f2, &fp, config))
}

/// Per-sample LR contribution given fitted step functions.
pub(crate) fn lr_sum(
    sample: &CurrentStatusSample,
    own: &MonotoneStepFunction,
    pooled: &MonotoneStepFunction,
    config: &TestConfig,
) -> f64 {
    let mut acc = 0.0;
    for (t, delta) in sample.iter() {
        if t < config.a || t > config.b {
            continue;
        }
        let fo = clamp_prob(own.eval(t));
        let fp = clamp_prob(pooled.eval(t));
        if delta {
            acc += (fo / fp).ln();
        } else {
            acc += ((1.0 - fo) / (1.0 - fp)).ln();
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Moment-functional statistics
// ---------------------------------------------------------------------------

/// The standardized indicator-mean contrast
///
/// `U_N = N^{-1/2} (β_N Σ_{i<=m} Δ_i - α_N Σ_{i>m} Δ_i) / σ̂_N`,
/// `σ̂_N² = α_N β_N p̂ (1 - p̂)`, `p̂ = (1/N) Σ F̂_N(T_i)`
///
/// over the pooled sample. Centered only when both samples share one
/// observation distribution; computed regardless.
pub fn u_n_statistic(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
) -> Result<f64> {
    let m = sample1.len() as f64;
    let n = sample2.len() as f64;
    let total = m + n;
    let alpha = m / total;
    let beta = n / total;
    let pooled = CurrentStatusSample::pooled(sample1, sample2);
    let f_pool = mle(&pooled)?;
    let p_hat = pooled.times().iter().map(|&t| f_pool.eval(t)).sum::<f64>() / total;
    let variance = alpha * beta * p_hat * (1.0 - p_hat);
    if variance <= 0.0 {
        return Err(Error::DegeneratePooledMle);
    }
    let contrast = beta * sample1.positive_count() as f64 - alpha * sample2.positive_count() as f64;
    Ok(contrast / total.sqrt() / variance.sqrt())
}

/// The squared-distribution moment contrast
///
/// `W_N = sqrt(N) ∫_a^b (F̂₁² - F̂₂²) dG_N /
///        sqrt( (4/(α_N β_N)) ∫_a^b F̂³(1-F̂) dG_N )`,
///
/// with `∫ · dG_N` the pooled empirical average restricted to `[a, b]`.
pub fn w_n_statistic(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    config: &TestConfig,
) -> Result<f64> {
    let m = sample1.len() as f64;
    let n = sample2.len() as f64;
    let total = m + n;
    let alpha = m / total;
    let beta = n / total;
    let f1 = mle(sample1)?;
    let f2 = mle(sample2)?;
    let pooled = CurrentStatusSample::pooled(sample1, sample2);
    let fp = mle(&pooled)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for &t in pooled.times() {
        if t < config.a || t > config.b {
            continue;
        }
        let a1 = f1.eval(t);
        let a2 = f2.eval(t);
        num += a1 * a1 - a2 * a2;
        let p = fp.eval(t);
        den += p * p * p * (1.0 - p);
    }
    num /= total;
    den /= total;
    let denom_sq = 4.0 / (alpha * beta) * den;
    if denom_sq <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(total.sqrt() * num / denom_sq.sqrt())
}

// ---------------------------------------------------------------------------
// Test outcome
// ---------------------------------------------------------------------------

/// Decision record for one statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    /// Pivot-normalized value, when the statistic has one.
    pub pivot: f64,
    pub centering: f64,
    pub bias_correction: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub p_value: f64,
    pub n_bootstrap: usize,
}

impl TestOutcome {
    /// One-sided rule: reject when the statistic exceeds the critical value.
    pub fn one_sided(statistic: f64, critical_value: f64) -> Self {
        Self {
            statistic,
            pivot: f64::NAN,
            centering: 0.0,
            bias_correction: 0.0,
            critical_value,
            reject: statistic > critical_value,
            p_value: f64::NAN,
            n_bootstrap: 0,
        }
    }

    /// Two-sided rule: reject when |statistic| exceeds the critical value.
    pub fn two_sided(statistic: f64, critical_value: f64) -> Self {
        Self {
            statistic,
            pivot: f64::NAN,
            centering: 0.0,
            bias_correction: 0.0,
            critical_value,
            reject: statistic.abs() > critical_value,
            p_value: f64::NAN,
            n_bootstrap: 0,
        }
    }
}

// ---------------------------------------------------------------------------
// Model-based diagnostics
// ---------------------------------------------------------------------------

/// True model functions, supplied by simulation scenarios for the
/// second-order diagnostics.
pub trait NullModel {
    /// Hidden-event distribution function `F` (the null distribution).
    fn hidden_cdf(&self, t: f64) -> f64;
    /// Hidden-event density `f`.
    fn hidden_pdf(&self, t: f64) -> f64;
    /// First-sample observation density `g₁`.
    fn obs1_pdf(&self, t: f64) -> f64;
    /// Second-sample observation density `g₂`.
    fn obs2_pdf(&self, t: f64) -> f64;
    fn obs1_pdf_deriv(&self, t: f64) -> f64;
    fn obs2_pdf_deriv(&self, t: f64) -> f64;
}

/// Pieces of the second-order expansion of `V_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionResult {
    pub a_n: f64,
    pub b_n: f64,
    pub c_n: f64,
    pub d_n: f64,
    /// `αβ ∫ (g̃₂h̃₁ - g̃₁h̃₂)² / (F(1-F) ḡ g₁ g₂) dt` with the true model in
    /// the denominator.
    pub leading_integral: f64,
    pub v_n: f64,
    pub centering: f64,
    /// `V_N - centering - (A_N + B_N - C_N + D_N)`.
    pub residual: f64,
}

/// Evaluate the pair-sum decomposition of `V_N` against the true model.
///
/// `A_N`, `B_N`, `C_N` are pair sums `Σ c_i c_j ∫ φ K_i K_j`; they are
/// evaluated through the exact identity
/// `Σ_{i<j} c_i c_j K_i K_j = ((Σ c_i K_i)² - Σ c_i² K_i²)/2`
/// so the cost stays linear in the sample size. The literal double sum is
/// kept as a test oracle.
pub fn decompose_v_n(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    model: &dyn NullModel,
    config: &TestConfig,
    moments: &KernelMoments,
) -> Result<DecompositionResult> {
    let m = sample1.len();
    let n = sample2.len();
    let total = m + n;
    let alpha = m as f64 / total as f64;
    let beta = 1.0 - alpha;
    let b_n = config.bandwidth.bandwidth(total);
    let grid = config.grid(b_n)?;
    let fit = smoothed_fit(sample1, sample2, config, &grid)?;
    let v_n = v_n_statistic(&fit, config)?;
    let centering = v_n_centering(total, config, moments);
    let w = StatWindow::new(&grid, config.a, config.b)?;

    // model pieces on the window
    let npts = w.len();
    let mut phi1 = vec![0.0; npts]; // g2 / (g1 ḡ F(1-F))
    let mut phi2 = vec![0.0; npts];
    let mut psi = vec![0.0; npts]; // 1 / (ḡ F(1-F))
    let mut denom_lead = vec![0.0; npts]; // F(1-F) ḡ g1 g2
    for (j, k) in (w.i_lo..=w.i_hi).enumerate() {
        let t = grid.point(k);
        let cap_f = clamp_prob(model.hidden_cdf(t));
        let g1 = model.obs1_pdf(t).max(DENSITY_FLOOR);
        let g2 = model.obs2_pdf(t).max(DENSITY_FLOOR);
        let g_bar = alpha * g1 + beta * g2;
        let ff = cap_f * (1.0 - cap_f);
        phi1[j] = g2 / (g1 * g_bar * ff);
        phi2[j] = g1 / (g2 * g_bar * ff);
        psi[j] = 1.0 / (g_bar * ff);
        denom_lead[j] = ff * g_bar * g1 * g2;
    }

    // centered-indicator kernel sums on the window
    let spec = KernelSpec::triweight(b_n)?;
    let scale = 1.0; // columns carry K_b values; weights applied below
    let sums = |sample: &CurrentStatusSample| -> Result<(Vec<f64>, Vec<f64>)> {
        let cols = crate::kernel::kernel_columns(sample.times(), &spec, &grid, scale)?;
        let mut s = vec![0.0; npts];
        let mut q = vec![0.0; npts];
        for (i, col) in cols.iter().enumerate() {
            let c = (if sample.deltas()[i] { 1.0 } else { 0.0 })
                - model.hidden_cdf(sample.times()[i]);
            for (off, &kv) in col.weights.iter().enumerate() {
                let k = col.first + off;
                if k < w.i_lo || k > w.i_hi {
                    continue;
                }
                let j = k - w.i_lo;
                let weighted = c * kv;
                s[j] += weighted;
                q[j] += weighted * weighted;
            }
        }
        Ok((s, q))
    };
    let (s1, q1) = sums(sample1)?;
    let (s2, q2) = sums(sample2)?;

    let integrate_product = |weights: &[f64], f: &dyn Fn(usize) -> f64| -> Result<f64> {
        let vals: Vec<f64> = (0..npts).map(|j| weights[j] * f(j)).collect();
        w.integrate(&vals)
    };

    let m2 = (m * m) as f64;
    let n2 = (n * n) as f64;
    let a_n = alpha * beta / m2
        * (integrate_product(&phi1, &|j| s1[j] * s1[j])? - integrate_product(&phi1, &|j| q1[j])?);
    let b_n_term = alpha * beta / n2
        * (integrate_product(&phi2, &|j| s2[j] * s2[j])? - integrate_product(&phi2, &|j| q2[j])?);
    let c_n = 2.0 * alpha * beta / (m as f64 * n as f64)
        * integrate_product(&psi, &|j| s1[j] * s2[j])?;

    let bias_inputs = BiasInputs {
        hidden_density: grid.tabulate(|t| model.hidden_pdf(t)),
        hidden_cdf: grid.tabulate(|t| model.hidden_cdf(t)),
        g1: grid.tabulate(|t| model.obs1_pdf(t)),
        g1_deriv: grid.tabulate(|t| model.obs1_pdf_deriv(t)),
        g2: grid.tabulate(|t| model.obs2_pdf(t)),
        g2_deriv: grid.tabulate(|t| model.obs2_pdf_deriv(t)),
        alpha,
    };
    let d_n = d_n_bias(&bias_inputs, total, config, moments)?;

    // leading integral with estimated numerator, true-model denominator
    let lead_vals: Vec<f64> = (0..npts)
        .map(|j| {
            let k = w.i_lo + j;
            let cross = fit.g2.values[k] * fit.h1.values[k] - fit.g1.values[k] * fit.h2.values[k];
            cross * cross / denom_lead[j]
        })
        .collect();
    let leading_integral = alpha * beta * w.integrate(&lead_vals)?;

    let residual = v_n - centering - (a_n + b_n_term - c_n + d_n);
    Ok(DecompositionResult {
        a_n,
        b_n: b_n_term,
        c_n,
        d_n,
        leading_integral,
        v_n,
        centering,
        residual,
    })
}

/// Jump-count intensity diagnostic: the ratio of the pooled MLE's jump count
/// on `[a, b]` to `N^{1/3}` times the model integral
/// `∫_a^b (f²ḡ)^{1/3} / (4F(1-F))^{1/3} dt`. Under the null the ratio sits
/// near [`JUMP_INTENSITY_CONSTANT`].
pub fn chernoff_ratio(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    model: &dyn NullModel,
    config: &TestConfig,
) -> Result<f64> {
    let pooled = CurrentStatusSample::pooled(sample1, sample2);
    let total = pooled.len();
    let alpha = sample1.len() as f64 / total as f64;
    let f_pool = mle(&pooled)?;
    let jumps = f_pool.jump_count(config.a, config.b);
    let integrand = |t: f64| {
        let f = model.hidden_pdf(t);
        let g_bar = alpha * model.obs1_pdf(t) + (1.0 - alpha) * model.obs2_pdf(t);
        let cap_f = clamp_prob(model.hidden_cdf(t));
        (f * f * g_bar).powf(1.0 / 3.0) / (4.0 * cap_f * (1.0 - cap_f)).powf(1.0 / 3.0)
    };
    let integral = crate::kernel::adaptive_simpson(&integrand, config.a, config.b, 1e-10);
    if integral <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(jumps as f64 / ((total as f64).powf(1.0 / 3.0) * integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::SampleLabel;
    use crate::rng::StreamRng;

    fn sample(obs: &[(f64, bool)], label: SampleLabel) -> CurrentStatusSample {
        CurrentStatusSample::new(obs.to_vec(), label).unwrap()
    }

    fn uniform_sample(n: usize, prob: impl Fn(f64) -> f64, rng: &mut StreamRng) -> Vec<(f64, bool)> {
        (0..n)
            .map(|_| {
                let t = rng.next_f64() * 2.0;
                (t, rng.next_f64() < prob(t))
            })
            .collect()
    }

    #[test]
    fn bandwidth_rule_validation_and_value() {
        assert!(BandwidthRule::new(2.0, 0.2).is_ok());
        assert!(BandwidthRule::new(2.0, 0.34).is_err());
        assert!(BandwidthRule::new(2.0, 0.19).is_err());
        assert!(BandwidthRule::new(-1.0, 0.25).is_err());
        let r = BandwidthRule::new(2.0, 0.2).unwrap();
        assert!((r.bandwidth(500) - 0.57708).abs() < 1e-4);
    }

    #[test]
    fn config_validation() {
        let rule = BandwidthRule::new(2.0, 0.2).unwrap();
        assert!(TestConfig::new(0.1, 1.9, 2.0, rule).is_ok());
        assert!(TestConfig::new(0.0, 1.9, 2.0, rule).is_err());
        assert!(TestConfig::new(1.9, 0.1, 2.0, rule).is_err());
        assert!(TestConfig::new(0.1, 2.0, 2.0, rule).is_err());
    }

    #[test]
    fn v_n_vanishes_when_all_estimates_coincide() {
        let config = TestConfig::default_weibull();
        let grid = config.grid(0.5).unwrap();
        let g = grid.tabulate(|_| 0.5);
        let h = grid.tabulate(|t| 0.5 * (0.2 + 0.3 * t / 2.0));
        let est = msle(&g, &h, 0.5).unwrap();
        let fit = SmoothedFit {
            m: 50,
            n: 50,
            bandwidth: 0.5,
            grid,
            g1: g.clone(),
            h1: h.clone(),
            g2: g.clone(),
            h2: h.clone(),
            est1: est.clone(),
            est2: est.clone(),
            est_pooled: est,
        };
        let v = v_n_statistic(&fit, &config).unwrap();
        assert!(v.abs() < 1e-12, "V_N = {v}");
    }

    #[test]
    fn v_n_matches_symbolic_value_on_constant_densities() {
        // piecewise-constant inputs make every integrand constant on [a,b]
        let config = TestConfig::default_weibull();
        let grid = config.grid(0.5).unwrap();
        let c1 = 0.6;
        let c2 = 0.2;
        let cp = 0.4;
        let g = grid.tabulate(|_| 0.5);
        let mk = |c: f64| {
            let h = grid.tabulate(|_| 0.5 * c);
            let est = msle(&g, &h, 0.5).unwrap();
            (h, est)
        };
        let (h1, est1) = mk(c1);
        let (h2, est2) = mk(c2);
        let (_, estp) = mk(cp);
        let fit = SmoothedFit {
            m: 50,
            n: 50,
            bandwidth: 0.5,
            grid,
            g1: g.clone(),
            h1,
            g2: g.clone(),
            h2: mk(c2).0,
            est1,
            est2,
            est_pooled: estp,
        };
        let v = v_n_statistic(&fit, &config).unwrap();
        let width = config.b - config.a;
        let expect = width
            * (0.5 * c1 * (c1 / cp).ln()
                + 0.5 * (1.0 - c1) * ((1.0 - c1) / (1.0 - cp)).ln()
                + 0.5 * c2 * (c2 / cp).ln()
                + 0.5 * (1.0 - c2) * ((1.0 - c2) / (1.0 - cp)).ln());
        assert!((v - expect).abs() < 1e-8, "V_N = {v}, expect {expect}");
    }

    #[test]
    fn pivot_is_affine_and_centered() {
        let config = TestConfig::default_weibull();
        let moments = crate::kernel::kernel_moments(
            &KernelSpec::triweight(1.0).unwrap(),
            1e-10,
        )
        .unwrap();
        let centering = v_n_centering(500, &config, &moments);
        assert!(pivot_v_n(centering, 500, &config, &moments, None).abs() < 1e-12);
        let p1 = pivot_v_n(0.01, 500, &config, &moments, None);
        let p2 = pivot_v_n(0.02, 500, &config, &moments, None);
        let p3 = pivot_v_n(0.03, 500, &config, &moments, None);
        assert!(p2 > p1);
        assert!((p3 - p2 - (p2 - p1)).abs() < 1e-9);
        // supplying a bias shifts the centering
        let with_bias = pivot_v_n(0.02, 500, &config, &moments, Some(0.005));
        assert!(with_bias < p2);
    }

    #[test]
    fn lr_vanishes_for_identical_samples() {
        let obs = [
            (0.3, false),
            (0.7, true),
            (1.1, false),
            (1.5, true),
            (1.8, true),
        ];
        let s1 = sample(&obs, SampleLabel::First);
        let s2 = sample(&obs, SampleLabel::Second);
        let config = TestConfig::default_weibull();
        let lr = lr_statistic(&s1, &s2, &config).unwrap();
        assert!(lr.abs() < 1e-12, "LR = {lr}");
    }

    #[test]
    fn lr_matches_hand_computation() {
        // s1: (1,Δ=1),(2,Δ=0) → F̂₁ = 1/2 at both
        // s2: (1.5,Δ=0),(2.5,Δ=1) → F̂₂ = (0, 1)
        // pooled Δ in time order: (1,0,0,1) → F̂ = (1/3,1/3,1/3,1)
        let s1 = sample(&[(1.0, true), (2.0, false)], SampleLabel::First);
        let s2 = sample(&[(1.5, false), (2.5, true)], SampleLabel::Second);
        let rule = BandwidthRule::new(2.0, 0.2).unwrap();
        let config = TestConfig::new(0.1, 2.9, 3.0, rule).unwrap();
        let lr = lr_statistic(&s1, &s2, &config).unwrap();
        let expect = (0.5f64 / (1.0 / 3.0)).ln()
            + (0.5f64 / (2.0 / 3.0)).ln()
            + (1.0f64 / (2.0 / 3.0)).ln();
        assert!((lr - expect).abs() < 1e-9, "LR = {lr}, expect {expect}");
        assert!(lr >= 0.0);
    }

    #[test]
    fn lr_nonnegative_on_full_window_random_data() {
        let mut rng = StreamRng::new(606, 0);
        let rule = BandwidthRule::new(2.0, 0.2).unwrap();
        // full-support window: the statistic is a true likelihood-ratio
        let config = TestConfig::new(1e-6, 2.0 - 1e-6, 2.0, rule).unwrap();
        for _ in 0..200 {
            let s1 = sample(
                &uniform_sample(30, |t| t / 2.0, &mut rng),
                SampleLabel::First,
            );
            let s2 = sample(
                &uniform_sample(40, |t| (t / 2.0).powi(2), &mut rng),
                SampleLabel::Second,
            );
            let lr = lr_statistic(&s1, &s2, &config).unwrap();
            assert!(lr >= -1e-9, "LR = {lr}");
        }
    }

    #[test]
    fn lr_is_order_invariant_within_samples() {
        let mut obs = vec![
            (0.4, true),
            (0.9, false),
            (1.3, true),
            (1.7, false),
            (0.2, true),
        ];
        let s_sorted = sample(&obs, SampleLabel::First);
        obs.reverse();
        let s_rev = sample(&obs, SampleLabel::First);
        let other = sample(&[(0.5, false), (1.0, true), (1.5, false)], SampleLabel::Second);
        let config = TestConfig::default_weibull();
        let a = lr_statistic(&s_sorted, &other, &config).unwrap();
        let b = lr_statistic(&s_rev, &other, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn u_n_hand_value_and_antisymmetry() {
        let s1 = sample(&[(0.5, true), (1.0, true)], SampleLabel::First);
        let s2 = sample(&[(1.5, false), (2.0, false)], SampleLabel::Second);
        let u = u_n_statistic(&s1, &s2).unwrap();
        // pooled MLE ≡ 1/2, p̂ = 1/2, σ̂² = 1/16; Ũ = 1/2 ⇒ U = 2
        assert!((u - 2.0).abs() < 1e-12, "U_N = {u}");
        let swapped = u_n_statistic(&s2, &s1).unwrap();
        assert!((u + swapped).abs() < 1e-12);
    }

    #[test]
    fn u_n_balanced_identical_patterns_is_zero() {
        let s1 = sample(&[(0.5, true), (1.0, false)], SampleLabel::First);
        let s2 = sample(&[(0.6, true), (1.1, false)], SampleLabel::Second);
        let u = u_n_statistic(&s1, &s2).unwrap();
        assert!(u.abs() < 1e-12);
    }

    #[test]
    fn u_n_degenerate_indicators_error() {
        let s1 = sample(&[(0.5, false), (1.0, false)], SampleLabel::First);
        let s2 = sample(&[(1.5, false), (2.0, false)], SampleLabel::Second);
        assert_eq!(u_n_statistic(&s1, &s2), Err(Error::DegeneratePooledMle));
    }

    #[test]
    fn w_n_hand_value_and_antisymmetry() {
        let s1 = sample(&[(0.5, true), (1.0, true)], SampleLabel::First);
        let s2 = sample(&[(1.5, false), (2.0, false)], SampleLabel::Second);
        let rule = BandwidthRule::new(2.0, 0.2).unwrap();
        let config = TestConfig::new(0.01, 2.49, 2.5, rule).unwrap();
        let w = w_n_statistic(&s1, &s2, &config).unwrap();
        assert!((w - 2.0).abs() < 1e-12, "W_N = {w}");
        let swapped = w_n_statistic(&s2, &s1, &config).unwrap();
        assert!((w + swapped).abs() < 1e-12);
    }

    #[test]
    fn w_n_zero_for_identical_fitted_distributions() {
        let obs = [(0.4, true), (0.8, false), (1.2, true), (1.6, true)];
        let s1 = sample(&obs, SampleLabel::First);
        let s2 = sample(&obs, SampleLabel::Second);
        let config = TestConfig::default_weibull();
        let w = w_n_statistic(&s1, &s2, &config).unwrap();
        assert!(w.abs() < 1e-12);
    }

    // Literal double-sum evaluation of a pair term, the oracle for the
    // expanded single-pass computation used by `decompose_v_n`.
    fn pair_sum_oracle(
        sample: &CurrentStatusSample,
        model: &dyn NullModel,
        weight: &dyn Fn(f64) -> f64,
        config: &TestConfig,
        grid: &GridSpec,
        b_n: f64,
    ) -> f64 {
        let spec = KernelSpec::triweight(b_n).unwrap();
        let cols = crate::kernel::kernel_columns(sample.times(), &spec, grid, 1.0).unwrap();
        let w = StatWindow::new(grid, config.a, config.b).unwrap();
        let col_at = |i: usize, k: usize| -> f64 {
            let col = &cols[i];
            if k >= col.first && k < col.first + col.weights.len() {
                col.weights[k - col.first]
            } else {
                0.0
            }
        };
        let c: Vec<f64> = sample
            .iter()
            .map(|(t, d)| (if d { 1.0 } else { 0.0 }) - model.hidden_cdf(t))
            .collect();
        let mut acc = 0.0;
        for i in 0..sample.len() {
            for j in (i + 1)..sample.len() {
                let vals: Vec<f64> = (w.i_lo..=w.i_hi)
                    .map(|k| col_at(i, k) * col_at(j, k) * weight(grid.point(k)))
                    .collect();
                acc += c[i] * c[j] * w.integrate(&vals).unwrap();
            }
        }
        acc
    }

    struct UniformLinearModel;

    impl NullModel for UniformLinearModel {
        fn hidden_cdf(&self, t: f64) -> f64 {
            (t / 2.0).clamp(0.0, 1.0)
        }
        fn hidden_pdf(&self, _t: f64) -> f64 {
            0.5
        }
        fn obs1_pdf(&self, _t: f64) -> f64 {
            0.5
        }
        fn obs2_pdf(&self, _t: f64) -> f64 {
            0.5
        }
        fn obs1_pdf_deriv(&self, _t: f64) -> f64 {
            0.0
        }
        fn obs2_pdf_deriv(&self, _t: f64) -> f64 {
            0.0
        }
    }

    struct SkewedObsModel;

    impl NullModel for SkewedObsModel {
        fn hidden_cdf(&self, t: f64) -> f64 {
            (t / 2.0).clamp(0.0, 1.0)
        }
        fn hidden_pdf(&self, _t: f64) -> f64 {
            0.5
        }
        fn obs1_pdf(&self, _t: f64) -> f64 {
            0.5
        }
        fn obs2_pdf(&self, t: f64) -> f64 {
            0.25 * (2.0 - t).powi(3)
        }
        fn obs1_pdf_deriv(&self, _t: f64) -> f64 {
            0.0
        }
        fn obs2_pdf_deriv(&self, t: f64) -> f64 {
            -0.75 * (2.0 - t).powi(2)
        }
    }

    #[test]
    fn decomposition_pair_sums_match_literal_double_sum() {
        let mut rng = StreamRng::new(321, 5);
        let model = UniformLinearModel;
        let config = TestConfig::default_weibull();
        let s1 = sample(
            &uniform_sample(25, |t| t / 2.0, &mut rng),
            SampleLabel::First,
        );
        let s2 = sample(
            &uniform_sample(20, |t| t / 2.0, &mut rng),
            SampleLabel::Second,
        );
        let total = s1.len() + s2.len();
        let alpha = s1.len() as f64 / total as f64;
        let beta = 1.0 - alpha;
        let b_n = config.bandwidth.bandwidth(total);
        let grid = config.grid(b_n).unwrap();
        let moments =
            crate::kernel::kernel_moments(&KernelSpec::triweight(1.0).unwrap(), 1e-10).unwrap();
        let dec = decompose_v_n(&s1, &s2, &model, &config, &moments).unwrap();

        let weight1 = |t: f64| {
            let cap_f = (t / 2.0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let g = 0.5;
            0.5 / (g * g * cap_f * (1.0 - cap_f))
        };
        let a_oracle = 2.0 * alpha * beta / (s1.len() * s1.len()) as f64
            * pair_sum_oracle(&s1, &model, &weight1, &config, &grid, b_n);
        assert!(
            (dec.a_n - a_oracle).abs() <= 1e-10 * (1.0 + a_oracle.abs()),
            "A_N {} vs oracle {a_oracle}",
            dec.a_n
        );
        let b_oracle = 2.0 * alpha * beta / (s2.len() * s2.len()) as f64
            * pair_sum_oracle(&s2, &model, &weight1, &config, &grid, b_n);
        assert!(
            (dec.b_n - b_oracle).abs() <= 1e-10 * (1.0 + b_oracle.abs()),
            "B_N {} vs oracle {b_oracle}",
            dec.b_n
        );
    }

    #[test]
    fn bias_term_vanishes_iff_observation_densities_match() {
        let mut rng = StreamRng::new(17, 2);
        let config = TestConfig::default_weibull();
        let moments =
            crate::kernel::kernel_moments(&KernelSpec::triweight(1.0).unwrap(), 1e-10).unwrap();
        let s1 = sample(
            &uniform_sample(30, |t| t / 2.0, &mut rng),
            SampleLabel::First,
        );
        let s2 = sample(
            &uniform_sample(30, |t| t / 2.0, &mut rng),
            SampleLabel::Second,
        );
        let same = decompose_v_n(&s1, &s2, &UniformLinearModel, &config, &moments).unwrap();
        assert_eq!(same.d_n, 0.0);
        let diff = decompose_v_n(&s1, &s2, &SkewedObsModel, &config, &moments).unwrap();
        assert!(diff.d_n > 0.0);
        assert!(same.leading_integral >= 0.0);
        assert!(diff.leading_integral >= 0.0);
        assert!(same.residual.is_finite());
    }

    #[test]
    fn single_observation_first_sample_kills_its_pair_sum() {
        let mut rng = StreamRng::new(29, 1);
        let config = TestConfig::default_weibull();
        let moments =
            crate::kernel::kernel_moments(&KernelSpec::triweight(1.0).unwrap(), 1e-10).unwrap();
        let s1 = sample(&[(1.0, true)], SampleLabel::First);
        let s2 = sample(
            &uniform_sample(60, |t| t / 2.0, &mut rng),
            SampleLabel::Second,
        );
        let dec = decompose_v_n(&s1, &s2, &UniformLinearModel, &config, &moments).unwrap();
        assert_eq!(dec.a_n, 0.0);
    }

    #[test]
    fn chernoff_ratio_is_positive_and_counts_jumps() {
        let mut rng = StreamRng::new(2021, 8);
        let config = TestConfig::default_weibull();
        let s1 = sample(
            &uniform_sample(300, |t| t / 2.0, &mut rng),
            SampleLabel::First,
        );
        let s2 = sample(
            &uniform_sample(300, |t| t / 2.0, &mut rng),
            SampleLabel::Second,
        );
        let r = chernoff_ratio(&s1, &s2, &UniformLinearModel, &config).unwrap();
        assert!(r > 0.0 && r.is_finite());
        assert!((FOUR_E_Z_SQUARED - 1.05423856).abs() < 1e-12);
    }

    #[test]
    fn outcome_decision_rules() {
        let one = TestOutcome::one_sided(1.2, 1.0);
        assert!(one.reject);
        let one = TestOutcome::one_sided(0.8, 1.0);
        assert!(!one.reject);
        let two = TestOutcome::two_sided(-2.5, 1.96);
        assert!(two.reject);
        let two = TestOutcome::two_sided(-1.5, 1.96);
        assert!(!two.reject);
    }
}
