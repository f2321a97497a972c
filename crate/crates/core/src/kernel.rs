//! Triweight kernel smoothing with moment-preserving boundary correction.
//!
//! The interior kernel is `K(u) = (35/32)(1 - u^2)^3` on `[-1, 1]`. Inside a
//! bandwidth of either end of the observation window the kernel is replaced by
//! `(alpha(rho) + beta(rho) u) K(u)`, with the coefficients solving the 2x2
//! moment system that restores zeroth moment one and first moment zero over
//! the truncated support (`rho` is the fraction of the support inside the
//! window). Distribution estimates are therefore obtained by numerically
//! integrating the density estimates, not by integrating the kernel.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::estimators::CurrentStatusSample;
use crate::grid::{GridFunction, GridSpec};
use crate::{Error, Result};

/// Kernel family. Only the triweight kernel is implemented; the id exists so
/// configurations name their kernel explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelId {
    Triweight,
}

/// Whether edge windows use the moment-corrected boundary kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    Corrected,
    Uncorrected,
}

/// A kernel with its bandwidth and boundary handling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kernel: KernelId,
    pub bandwidth: f64,
    pub boundary: BoundaryMode,
}

impl KernelSpec {
    pub fn triweight(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self {
            kernel: KernelId::Triweight,
            bandwidth,
            boundary: BoundaryMode::Corrected,
        })
    }

    pub fn uncorrected(mut self) -> Self {
        self.boundary = BoundaryMode::Uncorrected;
        self
    }
}

/// Triweight kernel `K(u) = (35/32)(1 - u^2)^3` on `[-1, 1]`.
#[inline]
pub fn kernel_eval(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - u * u;
    1.09375 * s * s * s
}

/// Derivative `K'(u) = -(105/16) u (1 - u^2)^2` on `[-1, 1]`.
#[inline]
pub fn kernel_deriv(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - u * u;
    -6.5625 * u * s * s
}

// Truncated moments of the triweight over [-1, rho], via the closed-form
// antiderivatives of u^k (1-u^2)^3.
fn truncated_moments(rho: f64) -> (f64, f64, f64) {
    let p = |u: f64| u - u.powi(3) + 0.6 * u.powi(5) - u.powi(7) / 7.0;
    let q = |u: f64| u.powi(3) / 3.0 - 0.6 * u.powi(5) + (3.0 / 7.0) * u.powi(7) - u.powi(9) / 9.0;
    let a0 = 1.09375 * (p(rho) + 16.0 / 35.0);
    let a1 = -(35.0 / 256.0) * (1.0 - rho * rho).powi(4);
    let a2 = 1.09375 * (q(rho) + 16.0 / 315.0);
    (a0, a1, a2)
}

/// Coefficients `(alpha, beta)` of the left-edge boundary kernel
/// `(alpha + beta u) K(u)` with support `[-1, rho]`, `rho` in `[0, 1]`.
pub fn boundary_coeffs(rho: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0 + 1e-12).contains(&rho) || !rho.is_finite() {
        return Err(Error::SingularBoundarySystem { rho });
    }
    let rho = rho.min(1.0);
    let (a0, a1, a2) = truncated_moments(rho);
    let det = a0 * a2 - a1 * a1;
    if det <= 1e-12 {
        return Err(Error::SingularBoundarySystem { rho });
    }
    Ok((a2 / det, -a1 / det))
}

/// Left-edge boundary kernel value `(alpha(rho) + beta(rho) u) K(u)`.
///
/// `rho = t / b` is the fraction of the kernel support inside the window;
/// mirror the argument for the right edge. Requires `rho` in `(0, 1]`.
pub fn boundary_kernel_eval(u: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::SingularBoundarySystem { rho });
    }
    let (alpha, beta) = boundary_coeffs(rho)?;
    Ok((alpha + beta * u) * kernel_eval(u))
}

/// Integrals of the interior kernel used by the pivot normalization:
/// `int_k2 = ∫K²`, `int_u2k = ∫u²K`, and
/// `sigma_k2 = 2∫(∫K(u+v)K(u)du)²dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMoments {
    pub int_k2: f64,
    pub int_u2k: f64,
    pub sigma_k2: f64,
}

/// Kernel moment constants by Gauss-Legendre quadrature (64 nodes per unit
/// interval; the integrands are piecewise polynomials, so the result is exact
/// to rounding and `quad_tol` only guards the request).
pub fn kernel_moments(spec: &KernelSpec, quad_tol: f64) -> Result<KernelMoments> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    let KernelId::Triweight = spec.kernel;
    let (nodes, weights) = gauss_legendre(64);
    let on = |a: f64, b: f64, f: &dyn Fn(f64) -> f64| -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    };

    let int_k2 = on(-1.0, 1.0, &|u| kernel_eval(u) * kernel_eval(u));
    let int_u2k = on(-1.0, 1.0, &|u| u * u * kernel_eval(u));

    // Autocorrelation rho(v) = ∫ K(u+v)K(u) du, supported on |v| < 2 and even.
    let acf = |v: f64| on(-1.0, 1.0 - v, &|u| kernel_eval(u + v) * kernel_eval(u));
    let sigma_k2 = 4.0 * on(0.0, 2.0, &|v| {
        let r = acf(v);
        r * r
    });

    Ok(KernelMoments {
        int_k2,
        int_u2k,
        sigma_k2,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton iteration on the
/// Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (core::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        weights[k] = w;
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = w;
    }
    (nodes, weights)
}

/// Adaptive Simpson quadrature of a smooth scalar integrand to absolute
/// tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 48)
}

// ---------------------------------------------------------------------------
// Density estimation on a grid
// ---------------------------------------------------------------------------

/// Per-node kernel multipliers: the weight applied to `K(u)` at grid node `k`
/// is `c0[k] + c1[k] * u`. Interior nodes carry `(1, 0)`.
pub(crate) struct EdgeTable {
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
}

pub(crate) fn edge_table(spec: &KernelSpec, grid: &GridSpec) -> Result<EdgeTable> {
    let b = spec.bandwidth;
    let domain = grid.end();
    let n = grid.n_points;
    let mut c0 = vec![1.0; n];
    let mut c1 = vec![0.0; n];
    if spec.boundary == BoundaryMode::Uncorrected {
        return Ok(EdgeTable { c0, c1 });
    }
    if b > 0.5 * domain {
        return Err(Error::BandwidthTooLarge {
            bandwidth: b,
            domain,
        });
    }
    for k in 0..n {
        let t = grid.point(k);
        if t < b {
            let (alpha, beta) = boundary_coeffs(t / b)?;
            c0[k] = alpha;
            c1[k] = beta;
        } else if t > domain - b {
            let (alpha, beta) = boundary_coeffs((domain - t) / b)?;
            c0[k] = alpha;
            c1[k] = -beta;
        }
    }
    Ok(EdgeTable { c0, c1 })
}

/// Node index range `[lo, hi]` whose points lie strictly inside
/// `(t_obs - b, t_obs + b)`; `None` when the window misses the grid.
#[inline]
pub(crate) fn window_indices(grid: &GridSpec, t_obs: f64, b: f64) -> Option<(usize, usize)> {
    let lo = ((t_obs - b - grid.start) / grid.step).floor() + 1.0;
    let hi = ((t_obs + b - grid.start) / grid.step).ceil() - 1.0;
    let lo = lo.max(0.0) as usize;
    if hi < 0.0 {
        return None;
    }
    let hi = (hi as usize).min(grid.n_points - 1);
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

/// Kernel estimates of the observation density and sub-density on the grid:
/// `g(t) = (1/n) Σ K_b(t - T_i)` and `h(t) = (1/n) Σ Δ_i K_b(t - T_i)`,
/// boundary-corrected within a bandwidth of the window edges.
pub fn estimate_densities(
    sample: &CurrentStatusSample,
    spec: &KernelSpec,
    grid: &GridSpec,
) -> Result<(GridFunction, GridFunction)> {
    if sample.len() == 0 {
        return Err(Error::EmptySample);
    }
    let edges = edge_table(spec, grid)?;
    let b = spec.bandwidth;
    let scale = 1.0 / (sample.len() as f64 * b);
    let mut g = vec![0.0; grid.n_points];
    let mut h = vec![0.0; grid.n_points];
    for (&t_obs, &delta) in sample.times().iter().zip(sample.deltas()) {
        let Some((lo, hi)) = window_indices(grid, t_obs, b) else {
            continue;
        };
        for k in lo..=hi {
            let u = (grid.point(k) - t_obs) / b;
            let w = (edges.c0[k] + edges.c1[k] * u) * kernel_eval(u);
            g[k] += w;
            if delta {
                h[k] += w;
            }
        }
    }
    for k in 0..grid.n_points {
        g[k] *= scale;
        h[k] *= scale;
    }
    Ok((
        GridFunction::new(grid.start, grid.step, g),
        GridFunction::new(grid.start, grid.step, h),
    ))
}

/// Derivative-kernel estimates `(1/n) Σ K'_b(t - T_i)` and
/// `(1/n) Σ Δ_i K'_b(t - T_i)` (note `K'_b(x) = K'(x/b)/b²`), with the same
/// boundary multipliers as [`estimate_densities`].
pub fn estimate_density_derivatives(
    sample: &CurrentStatusSample,
    spec: &KernelSpec,
    grid: &GridSpec,
) -> Result<(GridFunction, GridFunction)> {
    if sample.len() == 0 {
        return Err(Error::EmptySample);
    }
    let edges = edge_table(spec, grid)?;
    let b = spec.bandwidth;
    let scale = 1.0 / (sample.len() as f64 * b * b);
    let mut dg = vec![0.0; grid.n_points];
    let mut dh = vec![0.0; grid.n_points];
    for (&t_obs, &delta) in sample.times().iter().zip(sample.deltas()) {
        let Some((lo, hi)) = window_indices(grid, t_obs, b) else {
            continue;
        };
        for k in lo..=hi {
            let u = (grid.point(k) - t_obs) / b;
            let w = (edges.c0[k] + edges.c1[k] * u) * kernel_deriv(u);
            dg[k] += w;
            if delta {
                dh[k] += w;
            }
        }
    }
    for k in 0..grid.n_points {
        dg[k] *= scale;
        dh[k] *= scale;
    }
    Ok((
        GridFunction::new(grid.start, grid.step, dg),
        GridFunction::new(grid.start, grid.step, dh),
    ))
}

/// One observation's kernel weights over its grid window, pre-scaled; used to
/// rebuild sub-density estimates cheaply when only the indicators change.
#[derive(Debug, Clone)]
pub struct KernelColumn {
    pub first: usize,
    pub weights: Vec<f64>,
}

/// Per-observation kernel columns: column `i` holds
/// `scale * K_b^corrected(t_k - times[i])` for the nodes `k` in observation
/// `i`'s window.
pub fn kernel_columns(
    times: &[f64],
    spec: &KernelSpec,
    grid: &GridSpec,
    scale: f64,
) -> Result<Vec<KernelColumn>> {
    let edges = edge_table(spec, grid)?;
    let b = spec.bandwidth;
    let mut out = Vec::with_capacity(times.len());
    for &t_obs in times {
        let Some((lo, hi)) = window_indices(grid, t_obs, b) else {
            out.push(KernelColumn {
                first: 0,
                weights: Vec::new(),
            });
            continue;
        };
        let mut weights = Vec::with_capacity(hi - lo + 1);
        for k in lo..=hi {
            let u = (grid.point(k) - t_obs) / b;
            weights.push(scale * (edges.c0[k] + edges.c1[k] * u) * kernel_eval(u) / b);
        }
        out.push(KernelColumn { first: lo, weights });
    }
    Ok(out)
}
