//! Weibull scenario generation and the replication engine.
//!
//! A scenario draws hidden event times from two Weibull densities (shape
//! `alpha_i`, rate `lambda`, second-sample rate multiplier `theta`) and
//! inspection times from one of two observation densities on `[0, 2]`, forms
//! the status indicators, and runs the requested tests. The null hypothesis
//! holds exactly when both shapes agree and `theta = 1`.
//!
//! Every replication is a pure function of `(master_seed, replication
//! index)`: replication `r` draws its data from the stream keyed by `(seed,
//! [r, 0])` and hands the bootstrap the derived seed `(seed, [r, 1])`, so a
//! scenario's outcome is reproducible no matter how replications are
//! scheduled across threads.

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::bootstrap::{BootstrapContext, BootstrapDistribution, BootstrapPlan, StatisticKind};
use crate::estimators::{CurrentStatusSample, SampleLabel, PROB_CLAMP};
use crate::kernel::{adaptive_simpson, KernelMoments};
use crate::rng::{derive_seed, StreamRng};
use crate::statistics::{
    lr_statistic, pivot_v_n, smoothed_fit, u_n_statistic, v_n_centering, v_n_statistic,
    w_n_statistic, NullModel, TestConfig, TestOutcome,
};
use crate::{Error, Result};

/// Two-sided critical value used for the moment-functional statistics.
pub const U_W_CRITICAL: f64 = 1.96;

// ---------------------------------------------------------------------------
// Sampling distributions
// ---------------------------------------------------------------------------

/// Weibull hidden-event distribution with density
/// `alpha lambda theta x^(alpha-1) exp(-lambda theta x^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    pub lambda: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl WeibullParams {
    pub fn new(lambda: f64, alpha: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && alpha > 0.0 && theta > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Weibull parameters must be positive: lambda={lambda}, alpha={alpha}, theta={theta}"
            )));
        }
        Ok(Self {
            lambda,
            alpha,
            theta,
        })
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        1.0 - (-self.lambda * self.theta * x.powf(self.alpha)).exp()
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let rate = self.lambda * self.theta;
        self.alpha * rate * x.powf(self.alpha - 1.0) * (-rate * x.powf(self.alpha)).exp()
    }

    /// Inverse CDF: `x = (-log(1-u)/(lambda theta))^(1/alpha)`.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        (-(1.0 - u).ln() / (self.lambda * self.theta)).powf(1.0 / self.alpha)
    }
}

/// Inverse-CDF draws from the Weibull density.
pub fn sample_weibull(params: &WeibullParams, count: usize, rng: &mut StreamRng) -> Vec<f64> {
    (0..count).map(|_| params.quantile(rng.next_f64())).collect()
}

/// Observation-time densities on `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationDensity {
    /// Uniform: `g(t) = 1/2`.
    Uniform02,
    /// Decreasing: `g(t) = (1/4)(2 - t)^3`.
    PolyDecreasing,
}

impl ObservationDensity {
    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        if !(0.0..=2.0).contains(&t) {
            return 0.0;
        }
        match self {
            Self::Uniform02 => 0.5,
            Self::PolyDecreasing => 0.25 * (2.0 - t).powi(3),
        }
    }

    #[inline]
    pub fn cdf(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 2.0);
        match self {
            Self::Uniform02 => 0.5 * t,
            Self::PolyDecreasing => 1.0 - (2.0 - t).powi(4) / 16.0,
        }
    }

    #[inline]
    pub fn pdf_deriv(&self, t: f64) -> f64 {
        if !(0.0..=2.0).contains(&t) {
            return 0.0;
        }
        match self {
            Self::Uniform02 => 0.0,
            Self::PolyDecreasing => -0.75 * (2.0 - t).powi(2),
        }
    }

    /// Inverse CDF.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Self::Uniform02 => 2.0 * u,
            Self::PolyDecreasing => 2.0 - 2.0 * (1.0 - u).powf(0.25),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Uniform02 => "uniform02",
            Self::PolyDecreasing => "poly_decreasing",
        }
    }
}

impl core::str::FromStr for ObservationDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform02" => Ok(Self::Uniform02),
            "poly_decreasing" => Ok(Self::PolyDecreasing),
            other => Err(Error::InvalidParameter(alloc::format!(
                "unknown observation density id: {other}"
            ))),
        }
    }
}

impl core::fmt::Display for ObservationDensity {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.id())
    }
}

/// Inverse-CDF draws of inspection times.
pub fn sample_observation(
    density: ObservationDensity,
    count: usize,
    rng: &mut StreamRng,
) -> Vec<f64> {
    (0..count).map(|_| density.quantile(rng.next_f64())).collect()
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

/// Which tests a scenario evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestSelection {
    pub slr: bool,
    pub lr: bool,
    pub u_n: bool,
    pub w_n: bool,
}

impl TestSelection {
    pub fn all() -> Self {
        Self {
            slr: true,
            lr: true,
            u_n: true,
            w_n: true,
        }
    }
}

/// One simulation cell: data-generating parameters, sample sizes, test
/// configuration, and replication/bootstrap counts.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub theta: f64,
    pub g1: ObservationDensity,
    pub g2: ObservationDensity,
    pub m: usize,
    pub n: usize,
    pub replications: usize,
    pub bootstrap_resamples: usize,
    pub level: f64,
    pub config: TestConfig,
    pub master_seed: u64,
    pub tests: TestSelection,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        WeibullParams::new(self.lambda, self.alpha1, 1.0)?;
        WeibullParams::new(self.lambda, self.alpha2, self.theta)?;
        if self.m == 0 || self.n == 0 {
            return Err(Error::EmptySample);
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "scenario needs at least one replication"
            )));
        }
        if !(0.0 < self.level && self.level < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "level must lie in (0,1), got {}",
                self.level
            )));
        }
        Ok(())
    }

    pub fn hidden1(&self) -> WeibullParams {
        WeibullParams {
            lambda: self.lambda,
            alpha: self.alpha1,
            theta: 1.0,
        }
    }

    pub fn hidden2(&self) -> WeibullParams {
        WeibullParams {
            lambda: self.lambda,
            alpha: self.alpha2,
            theta: self.theta,
        }
    }

    /// Whether both samples share one hidden-event distribution.
    pub fn is_null(&self) -> bool {
        self.alpha1 == self.alpha2 && self.theta == 1.0
    }

    /// The true model functions, available only under the null (that is the
    /// setting in which diagnostics are meaningful).
    pub fn null_model(&self) -> Result<ScenarioModel> {
        if !self.is_null() {
            return Err(Error::InvalidParameter(alloc::format!(
                "diagnostics require a null scenario (alpha1 = alpha2, theta = 1)"
            )));
        }
        Ok(ScenarioModel {
            hidden: self.hidden1(),
            g1: self.g1,
            g2: self.g2,
        })
    }

    /// Draw the two samples of replication `rep`.
    pub fn draw_samples(
        &self,
        rep: u64,
    ) -> Result<(CurrentStatusSample, CurrentStatusSample)> {
        let mut rng = StreamRng::keyed(self.master_seed, &[rep, 0]);
        let times1 = sample_observation(self.g1, self.m, &mut rng);
        let hidden1 = sample_weibull(&self.hidden1(), self.m, &mut rng);
        let times2 = sample_observation(self.g2, self.n, &mut rng);
        let hidden2 = sample_weibull(&self.hidden2(), self.n, &mut rng);
        let s1 = CurrentStatusSample::new(
            times1
                .iter()
                .zip(hidden1.iter())
                .map(|(&t, &x)| (t, x <= t))
                .collect(),
            SampleLabel::First,
        )?;
        let s2 = CurrentStatusSample::new(
            times2
                .iter()
                .zip(hidden2.iter())
                .map(|(&t, &x)| (t, x <= t))
                .collect(),
            SampleLabel::Second,
        )?;
        Ok((s1, s2))
    }
}

/// True model functions of a null scenario.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioModel {
    pub hidden: WeibullParams,
    pub g1: ObservationDensity,
    pub g2: ObservationDensity,
}

impl NullModel for ScenarioModel {
    fn hidden_cdf(&self, t: f64) -> f64 {
        self.hidden.cdf(t)
    }
    fn hidden_pdf(&self, t: f64) -> f64 {
        self.hidden.pdf(t)
    }
    fn obs1_pdf(&self, t: f64) -> f64 {
        self.g1.pdf(t)
    }
    fn obs2_pdf(&self, t: f64) -> f64 {
        self.g2.pdf(t)
    }
    fn obs1_pdf_deriv(&self, t: f64) -> f64 {
        self.g1.pdf_deriv(t)
    }
    fn obs2_pdf_deriv(&self, t: f64) -> f64 {
        self.g2.pdf_deriv(t)
    }
}

// ---------------------------------------------------------------------------
// Replication engine
// ---------------------------------------------------------------------------

/// Per-replication test results; `None` where the scenario did not request
/// the test.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReplicationOutcome {
    pub slr: Option<TestOutcome>,
    pub lr: Option<TestOutcome>,
    pub u_n: Option<TestOutcome>,
    pub w_n: Option<TestOutcome>,
}

/// Evaluate the requested tests on a given pair of samples: the LR-type
/// statistics get bootstrap critical values (one set of resampled indicators
/// per resample index serves both), the moment statistics are compared
/// against ±1.96.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_tests(
    s1: &CurrentStatusSample,
    s2: &CurrentStatusSample,
    config: &TestConfig,
    sel: TestSelection,
    resamples: usize,
    level: f64,
    bootstrap_seed: u64,
    moments: &KernelMoments,
) -> Result<ReplicationOutcome> {
    let mut outcome = ReplicationOutcome::default();

    if sel.slr || sel.lr {
        let plan = BootstrapPlan {
            resamples,
            level,
            tilde_constant: 2.0,
            kind: StatisticKind::SmoothedLr,
            rng_seed: bootstrap_seed,
        };
        let ctx = BootstrapContext::prepare(s1, s2, &plan, config)?;
        let mut v_values = Vec::with_capacity(if sel.slr { plan.resamples } else { 0 });
        let mut lr_values = Vec::with_capacity(if sel.lr { plan.resamples } else { 0 });
        for i in 0..plan.resamples as u64 {
            match (sel.slr, sel.lr) {
                (true, true) => {
                    let (v, lr) = ctx.statistic_pair_once(i)?;
                    v_values.push(v);
                    lr_values.push(lr);
                }
                (true, false) => {
                    let (d1, d2) = ctx.resample_indicators(i);
                    v_values.push(ctx.smoothed_statistic(&d1, &d2)?);
                }
                (false, true) => {
                    let (d1, d2) = ctx.resample_indicators(i);
                    lr_values.push(ctx.raw_lr_statistic(&d1, &d2)?);
                }
                (false, false) => unreachable!(),
            }
        }
        if sel.slr {
            let fit = smoothed_fit(s1, s2, config, &ctx.grid)?;
            let v_obs = v_n_statistic(&fit, config)?;
            let dist = BootstrapDistribution::from_values(v_values, plan.level);
            let mut out = TestOutcome::one_sided(v_obs, dist.critical_value);
            out.p_value = dist.p_value(v_obs);
            out.n_bootstrap = plan.resamples;
            out.centering = v_n_centering(s1.len() + s2.len(), config, moments);
            out.pivot = pivot_v_n(v_obs, s1.len() + s2.len(), config, moments, None);
            outcome.slr = Some(out);
        }
        if sel.lr {
            let lr_obs = lr_statistic(s1, s2, config)?;
            let dist = BootstrapDistribution::from_values(lr_values, plan.level);
            let mut out = TestOutcome::one_sided(lr_obs, dist.critical_value);
            out.p_value = dist.p_value(lr_obs);
            out.n_bootstrap = plan.resamples;
            outcome.lr = Some(out);
        }
    }

    if sel.u_n {
        outcome.u_n = Some(TestOutcome::two_sided(
            u_n_statistic(s1, s2)?,
            U_W_CRITICAL,
        ));
    }
    if sel.w_n {
        outcome.w_n = Some(TestOutcome::two_sided(
            w_n_statistic(s1, s2, config)?,
            U_W_CRITICAL,
        ));
    }
    Ok(outcome)
}

/// Run one replication of a scenario: draw the data, then
/// [`evaluate_tests`] with the bootstrap seed derived for this replication.
pub fn run_replication(
    scenario: &Scenario,
    moments: &KernelMoments,
    rep: u64,
) -> Result<ReplicationOutcome> {
    let (s1, s2) = scenario.draw_samples(rep)?;
    evaluate_tests(
        &s1,
        &s2,
        &scenario.config,
        scenario.tests,
        scenario.bootstrap_resamples,
        scenario.level,
        derive_seed(scenario.master_seed, &[rep, 1]),
        moments,
    )
}

/// One row of a rejection table.
#[derive(Debug, Clone)]
pub struct RejectionRow {
    pub test: &'static str,
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub theta: f64,
    pub g1: ObservationDensity,
    pub g2: ObservationDensity,
    pub m: usize,
    pub n: usize,
    pub replications: usize,
    pub bootstrap_resamples: usize,
    pub reject_rate: f64,
    pub standard_error: f64,
}

/// Rejection fractions per test for one or more scenarios.
#[derive(Debug, Clone, Default)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

/// Fold replication outcomes into rejection rows (binomial standard errors).
pub fn tally(scenario: &Scenario, outcomes: &[ReplicationOutcome]) -> RejectionTable {
    let r = outcomes.len();
    let rate = |pick: &dyn Fn(&ReplicationOutcome) -> Option<TestOutcome>| -> Option<(f64, f64)> {
        let rejects: Vec<bool> = outcomes.iter().filter_map(|o| pick(o).map(|t| t.reject)).collect();
        if rejects.len() != r || r == 0 {
            return None;
        }
        let p = rejects.iter().filter(|&&x| x).count() as f64 / r as f64;
        Some((p, (p * (1.0 - p) / r as f64).sqrt()))
    };
    let mut rows = Vec::new();
    let mut push = |test: &'static str, stats: Option<(f64, f64)>, b: usize| {
        if let Some((p, se)) = stats {
            rows.push(RejectionRow {
                test,
                lambda: scenario.lambda,
                alpha1: scenario.alpha1,
                alpha2: scenario.alpha2,
                theta: scenario.theta,
                g1: scenario.g1,
                g2: scenario.g2,
                m: scenario.m,
                n: scenario.n,
                replications: r,
                bootstrap_resamples: b,
                reject_rate: p,
                standard_error: se,
            });
        }
    };
    let b = scenario.bootstrap_resamples;
    push("slr", rate(&|o| o.slr), b);
    push("lr", rate(&|o| o.lr), b);
    push("u_n", rate(&|o| o.u_n), 0);
    push("w_n", rate(&|o| o.w_n), 0);
    RejectionTable { rows }
}

/// Run a scenario sequentially. Replications are independent; parallel
/// drivers get identical results by mapping `run_replication` over indices
/// and tallying in index order.
pub fn run_scenario(scenario: &Scenario, moments: &KernelMoments) -> Result<RejectionTable> {
    scenario.validate()?;
    let mut outcomes = Vec::with_capacity(scenario.replications);
    for rep in 0..scenario.replications as u64 {
        outcomes.push(run_replication(scenario, moments, rep)?);
    }
    Ok(tally(scenario, &outcomes))
}

// ---------------------------------------------------------------------------
// Diagnostics over replications
// ---------------------------------------------------------------------------

/// Copy of a scenario rescaled to `n_total` observations, keeping the sample
/// ratio; the master seed branches on `n_total` so sweep points are
/// independent.
pub fn scaled_for_total(scenario: &Scenario, n_total: usize) -> Scenario {
    let alpha = scenario.m as f64 / (scenario.m + scenario.n) as f64;
    let m = ((alpha * n_total as f64) + 0.5) as usize;
    let m = m.clamp(1, n_total - 1);
    let mut scaled = scenario.clone();
    scaled.m = m;
    scaled.n = n_total - m;
    scaled.master_seed = derive_seed(scenario.master_seed, &[n_total as u64]);
    scaled
}

/// One replication of the expansion diagnostic on a null scenario.
pub fn decomposition_replication(
    scenario: &Scenario,
    moments: &KernelMoments,
    rep: u64,
) -> Result<crate::statistics::DecompositionResult> {
    let model = scenario.null_model()?;
    let (s1, s2) = scenario.draw_samples(rep)?;
    crate::statistics::decompose_v_n(&s1, &s2, &model, &scenario.config, moments)
}

/// One replication of the jump-count intensity diagnostic.
pub fn chernoff_replication(scenario: &Scenario, rep: u64) -> Result<f64> {
    let model = scenario.null_model()?;
    let (s1, s2) = scenario.draw_samples(rep)?;
    crate::statistics::chernoff_ratio(&s1, &s2, &model, &scenario.config)
}

/// Summary of a decomposition sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionSummary {
    pub n_total: usize,
    pub replications: usize,
    /// Median of `|residual| * N sqrt(b_N)`, the scale on which the
    /// expansion's remainder must shrink.
    pub median_scaled_residual: f64,
    pub mean_d_n: f64,
    pub mean_leading_integral: f64,
}

/// Fold per-replication decomposition results into a sweep-point summary.
pub fn summarize_decomposition(
    scenario: &Scenario,
    results: &[crate::statistics::DecompositionResult],
) -> DecompositionSummary {
    let n_total = scenario.m + scenario.n;
    let b_n = scenario.config.bandwidth.bandwidth(n_total);
    let scale = n_total as f64 * b_n.sqrt();
    let mut scaled: Vec<f64> = results.iter().map(|r| r.residual.abs() * scale).collect();
    scaled.sort_unstable_by(|a, b| a.total_cmp(b));
    let median = if scaled.is_empty() {
        f64::NAN
    } else if scaled.len() % 2 == 1 {
        scaled[scaled.len() / 2]
    } else {
        0.5 * (scaled[scaled.len() / 2 - 1] + scaled[scaled.len() / 2])
    };
    let mean = |pick: &dyn Fn(&crate::statistics::DecompositionResult) -> f64| {
        results.iter().map(|r| pick(r)).sum::<f64>() / results.len().max(1) as f64
    };
    DecompositionSummary {
        n_total,
        replications: results.len(),
        median_scaled_residual: median,
        mean_d_n: mean(&|r| r.d_n),
        mean_leading_integral: mean(&|r| r.leading_integral),
    }
}

// ---------------------------------------------------------------------------
// Crossing-alternative functionals
// ---------------------------------------------------------------------------

/// The moment functionals that decide whether the moment-based tests can see
/// an alternative, integrated `dt` over `[a, b]` to absolute accuracy 1e-9:
/// the signed difference `∫(F₁-F₂)`, the squared-distribution difference
/// `∫(F₁²-F₂²)`, and the likelihood-type distance
/// `∫ (F₁-F)²/(F(1-F)) + ∫ (F₂-F)²/(F(1-F))` with `F = (F₁+F₂)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingFunctionals {
    pub int_diff: f64,
    pub int_sq_diff: f64,
    pub l2_functional: f64,
}

pub fn crossing_functionals(
    f1: &WeibullParams,
    f2: &WeibullParams,
    a: f64,
    b: f64,
) -> Result<CrossingFunctionals> {
    if !(a < b) {
        return Err(Error::InvalidParameter(alloc::format!(
            "crossing functional window needs a < b, got [{a}, {b}]"
        )));
    }
    let tol = 1e-12;
    let int_diff = adaptive_simpson(&|t| f1.cdf(t) - f2.cdf(t), a, b, tol);
    let int_sq_diff = adaptive_simpson(
        &|t| {
            let x = f1.cdf(t);
            let y = f2.cdf(t);
            x * x - y * y
        },
        a,
        b,
        tol,
    );
    let l2_functional = adaptive_simpson(
        &|t| {
            let x = f1.cdf(t);
            let y = f2.cdf(t);
            let pool = (0.5 * (x + y)).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let denom = pool * (1.0 - pool);
            ((x - pool) * (x - pool) + (y - pool) * (y - pool)) / denom
        },
        a,
        b,
        tol,
    );
    Ok(CrossingFunctionals {
        int_diff,
        int_sq_diff,
        l2_functional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weibull_quantile_closed_points() {
        let p = WeibullParams::new(1.6, 1.0, 1.0).unwrap();
        let u = 1.0 - (-1.6f64).exp();
        assert!((p.quantile(u) - 1.0).abs() < 1e-12);
        assert!(p.quantile(0.0).abs() < 1e-12);
        // quantile inverts the cdf
        for &x in &[0.2, 0.8, 1.7] {
            assert!((p.quantile(p.cdf(x)) - x).abs() < 1e-10);
        }
    }

    #[test]
    fn weibull_sampling_matches_cdf() {
        let p = WeibullParams::new(1.6, 2.0, 1.0).unwrap();
        let mut rng = StreamRng::new(77, 0);
        let mut draws = sample_weibull(&p, 100_000, &mut rng);
        draws.sort_unstable_by(|a, b| a.total_cmp(b));
        let n = draws.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, &x) in draws.iter().enumerate() {
            let f = p.cdf(x);
            let hi = (i as f64 + 1.0) / n;
            let lo = i as f64 / n;
            ks = ks.max((f - lo).abs().max((hi - f).abs()));
        }
        assert!(ks < 0.006, "KS = {ks}");
    }

    #[test]
    fn observation_density_closed_points() {
        let g = ObservationDensity::PolyDecreasing;
        assert!((g.quantile(15.0 / 16.0) - 1.0).abs() < 1e-12);
        assert!(g.quantile(0.0).abs() < 1e-12);
        assert!((g.quantile(1.0 - 1e-12) - 2.0).abs() < 1e-2);
        assert!((g.cdf(1.0) - 15.0 / 16.0).abs() < 1e-12);
        // density integrates to one
        let mass = adaptive_simpson(&|t| g.pdf(t), 0.0, 2.0, 1e-12);
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn poly_decreasing_sample_mean() {
        let mut rng = StreamRng::new(123, 0);
        let draws = sample_observation(ObservationDensity::PolyDecreasing, 100_000, &mut rng);
        let mean: f64 = draws.iter().sum::<f64>() / draws.len() as f64;
        // E T = ∫ t (1/4)(2-t)³ dt = 2/5
        assert!((mean - 0.4).abs() < 0.01, "mean {mean}");
        assert!(draws.iter().all(|&t| (0.0..=2.0).contains(&t)));
    }

    #[test]
    fn crossing_functionals_vanish_for_equal_distributions() {
        let p = WeibullParams::new(0.7, 1.3, 1.0).unwrap();
        let c = crossing_functionals(&p, &p, 0.1, 1.9).unwrap();
        assert_eq!(c.int_diff, 0.0);
        assert_eq!(c.int_sq_diff, 0.0);
        assert_eq!(c.l2_functional, 0.0);
    }

    #[test]
    fn crossing_functionals_match_reference_values() {
        // first crossing pair: tiny mean difference, large L2 distance
        let f1 = WeibullParams::new(0.7, 0.5, 1.0).unwrap();
        let f2 = WeibullParams::new(0.7, 1.8153, 1.0).unwrap();
        let c = crossing_functionals(&f1, &f2, 0.1, 1.9).unwrap();
        assert!(
            (c.int_diff - 1.8717030152e-6).abs() < 1e-11,
            "int_diff = {:e}",
            c.int_diff
        );
        assert!(c.l2_functional > 0.1, "l2 = {}", c.l2_functional);

        // second crossing pair: tiny squared-difference functional
        let f1 = WeibullParams::new(0.8, 0.2, 1.0).unwrap();
        let f2 = WeibullParams::new(0.8, 0.767, 1.0).unwrap();
        let c = crossing_functionals(&f1, &f2, 0.1, 1.9).unwrap();
        assert!(
            (c.int_sq_diff - 2.5991780651e-6).abs() < 1e-11,
            "int_sq_diff = {:e}",
            c.int_sq_diff
        );
    }

    fn small_scenario() -> Scenario {
        Scenario {
            name: String::from("unit"),
            lambda: 1.6,
            alpha1: 1.0,
            alpha2: 1.0,
            theta: 1.0,
            g1: ObservationDensity::Uniform02,
            g2: ObservationDensity::Uniform02,
            m: 20,
            n: 20,
            replications: 3,
            bootstrap_resamples: 25,
            level: 0.05,
            config: TestConfig::default_weibull(),
            master_seed: 42,
            tests: TestSelection::all(),
        }
    }

    #[test]
    fn replications_are_deterministic() {
        let scenario = small_scenario();
        let moments = crate::kernel::kernel_moments(
            &crate::kernel::KernelSpec::triweight(1.0).unwrap(),
            1e-10,
        )
        .unwrap();
        let a = run_replication(&scenario, &moments, 1).unwrap();
        let b = run_replication(&scenario, &moments, 1).unwrap();
        assert_eq!(a.slr.unwrap().statistic, b.slr.unwrap().statistic);
        assert_eq!(
            a.slr.unwrap().critical_value,
            b.slr.unwrap().critical_value
        );
        assert_eq!(a.lr.unwrap().statistic, b.lr.unwrap().statistic);
        assert_eq!(a.u_n.unwrap().statistic, b.u_n.unwrap().statistic);
        // different replication index gives different data
        let c = run_replication(&scenario, &moments, 2).unwrap();
        assert_ne!(a.slr.unwrap().statistic, c.slr.unwrap().statistic);
    }

    #[test]
    fn tally_counts_rejections() {
        let scenario = small_scenario();
        let mk = |reject: bool| {
            let mut o = ReplicationOutcome::default();
            o.slr = Some(TestOutcome::one_sided(if reject { 2.0 } else { 0.0 }, 1.0));
            o
        };
        let outcomes = [mk(true), mk(false), mk(true), mk(true)];
        let table = tally(&scenario, &outcomes);
        let slr = table.rows.iter().find(|r| r.test == "slr").unwrap();
        assert!((slr.reject_rate - 0.75).abs() < 1e-12);
        assert!((slr.standard_error - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-12);
        // u_n missing from outcomes ⇒ no row
        assert!(table.rows.iter().all(|r| r.test != "u_n"));
    }

    #[test]
    fn null_model_requires_null_scenario() {
        let mut s = small_scenario();
        assert!(s.null_model().is_ok());
        s.theta = 1.5;
        assert!(s.null_model().is_err());
        s.theta = 1.0;
        s.alpha2 = 2.0;
        assert!(s.null_model().is_err());
    }

    #[test]
    fn scenario_runs_end_to_end() {
        let mut scenario = small_scenario();
        scenario.replications = 2;
        let moments = crate::kernel::kernel_moments(
            &crate::kernel::KernelSpec::triweight(1.0).unwrap(),
            1e-10,
        )
        .unwrap();
        let table = run_scenario(&scenario, &moments).unwrap();
        assert_eq!(table.rows.len(), 4);
        for row in &table.rows {
            assert!((0.0..=1.0).contains(&row.reject_rate));
            assert_eq!(row.replications, 2);
        }
    }
}
