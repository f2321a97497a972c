//! Bootstrap critical values for the likelihood-ratio statistics.
//!
//! The test is conditional on the observation times: only the indicators are
//! resampled. A pooled smoothed estimate `F̃` (bandwidth `~ N^{-1/5}`) is
//! fitted once, and each resample draws `Δ*_i ~ Bernoulli(F̃(T_i))`
//! independently. Per-sample observation-density estimates are computed once
//! from the original data and reused across every resample; only the
//! sub-density estimates are rebuilt, from cached per-observation kernel
//! columns. The critical value is the `⌈B(1-level)⌉`-th order statistic of
//! the resampled statistics.
//!
//! Resample `i` draws from the counter stream keyed by `(seed, i)`, so the
//! bootstrap distribution is reproducible bit-exactly no matter how the
//! resamples are scheduled.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::estimators::{
    combined_msle, mle, CurrentStatusSample, SampleLabel, SmoothEstimate,
};
use crate::grid::{GridFunction, GridSpec};
use crate::kernel::{estimate_densities, kernel_columns, KernelColumn, KernelSpec};
use crate::rng::StreamRng;
use crate::statistics::{lr_sum, v_n_from_parts, StatWindow, TestConfig};
use crate::{Error, Result};

/// Which statistic the bootstrap replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticKind {
    SmoothedLr,
    RawLr,
}

/// Bootstrap configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapPlan {
    /// Number of resamples `B`.
    pub resamples: usize,
    /// Test level; the critical value is the `⌈B(1-level)⌉`-th order
    /// statistic.
    pub level: f64,
    /// Constant of the resampling bandwidth `b̃_N = c̃ N^{-1/5}`.
    pub tilde_constant: f64,
    pub kind: StatisticKind,
    pub rng_seed: u64,
}

impl BootstrapPlan {
    pub fn new(resamples: usize, level: f64, kind: StatisticKind, rng_seed: u64) -> Result<Self> {
        if resamples == 0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "need at least one bootstrap resample"
            )));
        }
        if !(0.0 < level && level < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "bootstrap level must lie in (0,1), got {level}"
            )));
        }
        Ok(Self {
            resamples,
            level,
            tilde_constant: 2.0,
            kind,
            rng_seed,
        })
    }

    /// The documented default: `B = 1000` resamples at level 5%.
    pub fn default_for(kind: StatisticKind, rng_seed: u64) -> Self {
        Self {
            resamples: 1000,
            level: 0.05,
            tilde_constant: 2.0,
            kind,
            rng_seed,
        }
    }

    /// Resampling bandwidth `b̃_N = c̃ N^{-1/5}`.
    pub fn tilde_bandwidth(&self, n_total: usize) -> f64 {
        self.tilde_constant * (n_total as f64).powf(-0.2)
    }
}

/// Sorted bootstrap statistics with the extracted critical value.
#[derive(Debug, Clone)]
pub struct BootstrapDistribution {
    values: Vec<f64>,
    pub critical_value: f64,
    pub level: f64,
}

impl BootstrapDistribution {
    pub fn from_values(mut values: Vec<f64>, level: f64) -> Self {
        values.sort_unstable_by(|a, b| a.total_cmp(b));
        let b = values.len();
        let rank = ((b as f64) * (1.0 - level)).ceil() as usize;
        let rank = rank.clamp(1, b);
        let critical_value = values[rank - 1];
        Self {
            values,
            critical_value,
            level,
        }
    }

    /// Sorted resampled statistics.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Finite-sample corrected p-value `(1 + #{V* >= observed}) / (B + 1)`.
    pub fn p_value(&self, observed: f64) -> f64 {
        let above = self
            .values
            .iter()
            .filter(|&&v| v >= observed)
            .count();
        (1 + above) as f64 / (self.values.len() + 1) as f64
    }
}

/// Pooled-sample smoothed estimate used as the resampling distribution, at
/// the `N^{-1/5}` bandwidth. Both the smoothed and the raw LR bootstraps
/// resample from this estimate.
pub fn fit_resampling_distribution(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    plan: &BootstrapPlan,
    config: &TestConfig,
    grid: &GridSpec,
) -> Result<SmoothEstimate> {
    let _ = config;
    let b_tilde = plan.tilde_bandwidth(sample1.len() + sample2.len());
    let spec = KernelSpec::triweight(b_tilde)?;
    combined_msle(sample1, sample2, &spec, grid)
}

/// Draw one set of bootstrap indicators: `Δ*_i = 1{U_i < F̃(T_i)}` with
/// independent uniforms; the observation times are never resampled.
pub fn resample_deltas(
    f_tilde: &SmoothEstimate,
    observation_times: &[f64],
    rng: &mut StreamRng,
) -> Vec<bool> {
    observation_times
        .iter()
        .map(|&t| rng.next_f64() < f_tilde.eval(t).clamp(0.0, 1.0))
        .collect()
}

/// Everything that stays fixed across resamples of one test invocation.
#[derive(Debug, Clone)]
pub struct BootstrapContext {
    pub plan: BootstrapPlan,
    pub config: TestConfig,
    pub grid: GridSpec,
    m: usize,
    n: usize,
    window: StatWindow,
    times1: Vec<f64>,
    times2: Vec<f64>,
    probs1: Vec<f64>,
    probs2: Vec<f64>,
    cols1: Vec<KernelColumn>,
    cols2: Vec<KernelColumn>,
    g1: GridFunction,
    g2: GridFunction,
    g_pool: GridFunction,
    bandwidth: f64,
    resampling_dist: SmoothEstimate,
}

impl BootstrapContext {
    pub fn prepare(
        sample1: &CurrentStatusSample,
        sample2: &CurrentStatusSample,
        plan: &BootstrapPlan,
        config: &TestConfig,
    ) -> Result<Self> {
        let m = sample1.len();
        let n = sample2.len();
        let total = m + n;
        let bandwidth = config.bandwidth.bandwidth(total);
        let b_tilde = plan.tilde_bandwidth(total);
        let grid = config.grid(bandwidth.min(b_tilde))?;
        let window = StatWindow::new(&grid, config.a, config.b)?;

        let resampling_dist = fit_resampling_distribution(sample1, sample2, plan, config, &grid)?;
        let probs1 = sample1
            .times()
            .iter()
            .map(|&t| resampling_dist.eval(t).clamp(0.0, 1.0))
            .collect();
        let probs2 = sample2
            .times()
            .iter()
            .map(|&t| resampling_dist.eval(t).clamp(0.0, 1.0))
            .collect();

        let spec = KernelSpec::triweight(bandwidth)?;
        let (g1, _) = estimate_densities(sample1, &spec, &grid)?;
        let (g2, _) = estimate_densities(sample2, &spec, &grid)?;
        let alpha = m as f64 / total as f64;
        let beta = 1.0 - alpha;
        let g_pool = GridFunction::new(
            g1.start,
            g1.step,
            g1.values
                .iter()
                .zip(g2.values.iter())
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        );
        let cols1 = kernel_columns(sample1.times(), &spec, &grid, 1.0 / m as f64)?;
        let cols2 = kernel_columns(sample2.times(), &spec, &grid, 1.0 / n as f64)?;

        Ok(Self {
            plan: *plan,
            config: *config,
            grid,
            m,
            n,
            window,
            times1: sample1.times().to_vec(),
            times2: sample2.times().to_vec(),
            probs1,
            probs2,
            cols1,
            cols2,
            g1,
            g2,
            g_pool,
            bandwidth,
            resampling_dist,
        })
    }

    /// The fitted resampling distribution `F̃`.
    pub fn resampling_dist(&self) -> &SmoothEstimate {
        &self.resampling_dist
    }

    /// Indicators of resample `index`, drawn from the stream keyed by
    /// `(seed, index)`: first sample in time order, then second sample.
    pub fn resample_indicators(&self, index: u64) -> (Vec<bool>, Vec<bool>) {
        let mut rng = StreamRng::keyed(self.plan.rng_seed, &[index]);
        let d1 = self.probs1.iter().map(|&p| rng.next_f64() < p).collect();
        let d2 = self.probs2.iter().map(|&p| rng.next_f64() < p).collect();
        (d1, d2)
    }

    /// The smoothed LR statistic of a resample: sub-density estimates are
    /// rebuilt from the cached kernel columns, the observation-density
    /// estimates stay those of the original samples.
    pub fn smoothed_statistic(&self, deltas1: &[bool], deltas2: &[bool]) -> Result<f64> {
        let npts = self.grid.n_points;
        let mut h1 = vec![0.0; npts];
        let mut h2 = vec![0.0; npts];
        accumulate_columns(&self.cols1, deltas1, &mut h1);
        accumulate_columns(&self.cols2, deltas2, &mut h2);
        let alpha = self.m as f64 / (self.m + self.n) as f64;
        let beta = 1.0 - alpha;
        let h_pool: Vec<f64> = h1
            .iter()
            .zip(h2.iter())
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        let h1 = GridFunction::new(self.grid.start, self.grid.step, h1);
        let h2 = GridFunction::new(self.grid.start, self.grid.step, h2);
        let h_pool = GridFunction::new(self.grid.start, self.grid.step, h_pool);
        let est1 = crate::estimators::msle(&self.g1, &h1, self.bandwidth)?;
        let est2 = crate::estimators::msle(&self.g2, &h2, self.bandwidth)?;
        let est_pool = crate::estimators::msle(&self.g_pool, &h_pool, self.bandwidth)?;
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        v_n_from_parts(
            &self.window,
            self.m,
            self.n,
            &h1.values,
            &self.g1.values,
            &est1.dist.values,
            &h2.values,
            &self.g2.values,
            &est2.dist.values,
            &est_pool.dist.values,
            &mut s1,
            &mut s2,
        )
    }

    /// The raw LR statistic of a resample: the three step-function MLEs are
    /// recomputed from `(T_i, Δ*_i)`.
    pub fn raw_lr_statistic(&self, deltas1: &[bool], deltas2: &[bool]) -> Result<f64> {
        let s1 = CurrentStatusSample::new(
            self.times1
                .iter()
                .zip(deltas1)
                .map(|(&t, &d)| (t, d))
                .collect(),
            SampleLabel::First,
        )?;
        let s2 = CurrentStatusSample::new(
            self.times2
                .iter()
                .zip(deltas2)
                .map(|(&t, &d)| (t, d))
                .collect(),
            SampleLabel::Second,
        )?;
        let f1 = mle(&s1)?;
        let f2 = mle(&s2)?;
        let pooled = CurrentStatusSample::pooled(&s1, &s2);
        let fp = mle(&pooled)?;
        Ok(lr_sum(&s1, &f1, &fp, &self.config) + lr_sum(&s2, &f2, &fp, &self.config))
    }

    /// One bootstrap value of the planned statistic.
    pub fn statistic_once(&self, index: u64) -> Result<f64> {
        let (d1, d2) = self.resample_indicators(index);
        match self.plan.kind {
            StatisticKind::SmoothedLr => self.smoothed_statistic(&d1, &d2),
            StatisticKind::RawLr => self.raw_lr_statistic(&d1, &d2),
        }
    }

    /// Both statistics from one shared set of resampled indicators; used by
    /// the simulation engine so one resampling pass serves both tests.
    pub fn statistic_pair_once(&self, index: u64) -> Result<(f64, f64)> {
        let (d1, d2) = self.resample_indicators(index);
        Ok((
            self.smoothed_statistic(&d1, &d2)?,
            self.raw_lr_statistic(&d1, &d2)?,
        ))
    }
}

fn accumulate_columns(cols: &[KernelColumn], deltas: &[bool], out: &mut [f64]) {
    for (col, &d) in cols.iter().zip(deltas) {
        if !d {
            continue;
        }
        for (off, &w) in col.weights.iter().enumerate() {
            out[col.first + off] += w;
        }
    }
}

/// Run the full bootstrap: `B` resamples of the planned statistic, sorted,
/// with the critical value extracted.
pub fn critical_value(
    sample1: &CurrentStatusSample,
    sample2: &CurrentStatusSample,
    plan: &BootstrapPlan,
    config: &TestConfig,
) -> Result<BootstrapDistribution> {
    let ctx = BootstrapContext::prepare(sample1, sample2, plan, config)?;
    let mut values = Vec::with_capacity(plan.resamples);
    for i in 0..plan.resamples {
        values.push(ctx.statistic_once(i as u64)?);
    }
    Ok(BootstrapDistribution::from_values(values, plan.level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::{smoothed_fit, v_n_statistic};

    fn weibull_like_samples(seed: u64, m: usize, n: usize) -> (CurrentStatusSample, CurrentStatusSample) {
        let mut rng = StreamRng::new(seed, 0);
        let mk = |count: usize, rng: &mut StreamRng, label: SampleLabel| {
            let obs: Vec<(f64, bool)> = (0..count)
                .map(|_| {
                    let t = rng.next_f64() * 2.0;
                    (t, rng.next_f64() < t / 2.0)
                })
                .collect();
            CurrentStatusSample::new(obs, label).unwrap()
        };
        let s1 = mk(m, &mut rng, SampleLabel::First);
        let s2 = mk(n, &mut rng, SampleLabel::Second);
        (s1, s2)
    }

    #[test]
    fn critical_value_rank_is_the_order_statistic() {
        let values: Vec<f64> = (0..1000).rev().map(|k| k as f64).collect();
        let dist = BootstrapDistribution::from_values(values, 0.05);
        // 950th order statistic of 0..=999 is 949
        assert_eq!(dist.critical_value, 949.0);
        let single = BootstrapDistribution::from_values(vec![3.25], 0.05);
        assert_eq!(single.critical_value, 3.25);
    }

    #[test]
    fn raising_the_level_never_raises_the_critical_value() {
        let values: Vec<f64> = (0..500).map(|k| (k as f64) * 0.01).collect();
        let tight = BootstrapDistribution::from_values(values.clone(), 0.01);
        let loose = BootstrapDistribution::from_values(values, 0.10);
        assert!(loose.critical_value <= tight.critical_value);
    }

    #[test]
    fn p_value_counts_upper_tail_with_correction() {
        let dist = BootstrapDistribution::from_values((1..=9).map(f64::from).collect(), 0.05);
        // 3 of 9 values are >= 7 ⇒ (1+3)/10
        assert!((dist.p_value(7.0) - 0.4).abs() < 1e-12);
        assert!((dist.p_value(100.0) - 0.1).abs() < 1e-12);
        assert!((dist.p_value(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resampled_indicators_follow_the_fitted_probabilities() {
        let grid = GridSpec::covering(2.0, 0.5).unwrap();
        let flat = SmoothEstimate {
            dist: grid.tabulate(|_| 0.3),
            density: None,
            source_bandwidth: 0.5,
        };
        let times: Vec<f64> = (0..100_000).map(|k| 2.0 * (k as f64 + 0.5) / 100_000.0).collect();
        let mut rng = StreamRng::new(5150, 0);
        let draws = resample_deltas(&flat, &times, &mut rng);
        let mean = draws.iter().filter(|&&d| d).count() as f64 / draws.len() as f64;
        assert!((mean - 0.3).abs() < 0.005, "mean {mean}");

        let zero = SmoothEstimate {
            dist: grid.tabulate(|_| 0.0),
            density: None,
            source_bandwidth: 0.5,
        };
        assert!(resample_deltas(&zero, &times[..100], &mut rng)
            .iter()
            .all(|&d| !d));
        let one = SmoothEstimate {
            dist: grid.tabulate(|_| 1.0),
            density: None,
            source_bandwidth: 0.5,
        };
        assert!(resample_deltas(&one, &times[..100], &mut rng)
            .iter()
            .all(|&d| d));
    }

    #[test]
    fn original_indicators_reproduce_the_observed_statistic() {
        let (s1, s2) = weibull_like_samples(99, 40, 35);
        let config = TestConfig::default_weibull();
        let plan = BootstrapPlan::new(10, 0.05, StatisticKind::SmoothedLr, 7).unwrap();
        let ctx = BootstrapContext::prepare(&s1, &s2, &plan, &config).unwrap();
        let v_star = ctx.smoothed_statistic(s1.deltas(), s2.deltas()).unwrap();
        let grid = ctx.grid;
        let fit = smoothed_fit(&s1, &s2, &config, &grid).unwrap();
        let v_obs = v_n_statistic(&fit, &config).unwrap();
        assert!(
            (v_star - v_obs).abs() < 1e-12,
            "V* = {v_star} vs V = {v_obs}"
        );
        let lr_star = ctx.raw_lr_statistic(s1.deltas(), s2.deltas()).unwrap();
        let lr_obs = crate::statistics::lr_statistic(&s1, &s2, &config).unwrap();
        assert!((lr_star - lr_obs).abs() < 1e-12);
    }

    #[test]
    fn all_zero_indicators_give_null_statistics() {
        let (s1, s2) = weibull_like_samples(3, 30, 30);
        let config = TestConfig::default_weibull();
        let plan = BootstrapPlan::new(5, 0.05, StatisticKind::SmoothedLr, 7).unwrap();
        let ctx = BootstrapContext::prepare(&s1, &s2, &plan, &config).unwrap();
        let d1 = vec![false; 30];
        let d2 = vec![false; 30];
        let v = ctx.smoothed_statistic(&d1, &d2).unwrap();
        assert!(v.abs() < 1e-9, "V* = {v}");
        let lr = ctx.raw_lr_statistic(&d1, &d2).unwrap();
        assert!(lr.abs() < 1e-9, "LR* = {lr}");
    }

    #[test]
    fn bootstrap_is_deterministic_and_order_free() {
        let (s1, s2) = weibull_like_samples(12, 25, 30);
        let config = TestConfig::default_weibull();
        let plan = BootstrapPlan::new(40, 0.05, StatisticKind::SmoothedLr, 2024).unwrap();
        let a = critical_value(&s1, &s2, &plan, &config).unwrap();
        // separately prepared context, resamples evaluated in reverse order
        let ctx = BootstrapContext::prepare(&s1, &s2, &plan, &config).unwrap();
        let mut values: Vec<f64> = (0..40u64)
            .rev()
            .map(|i| ctx.statistic_once(i).unwrap())
            .collect();
        values.reverse();
        let b = BootstrapDistribution::from_values(values, plan.level);
        assert_eq!(a.values(), b.values());
        assert_eq!(a.critical_value, b.critical_value);
    }

    #[test]
    fn resampling_bandwidth_matches_rule() {
        let plan = BootstrapPlan::default_for(StatisticKind::SmoothedLr, 1);
        assert!((plan.tilde_bandwidth(500) - 0.57708).abs() < 1e-4);
        assert_eq!(plan.resamples, 1000);
        assert_eq!(plan.level, 0.05);
    }

    #[test]
    fn plan_validation() {
        assert!(BootstrapPlan::new(0, 0.05, StatisticKind::RawLr, 1).is_err());
        assert!(BootstrapPlan::new(10, 0.0, StatisticKind::RawLr, 1).is_err());
        assert!(BootstrapPlan::new(10, 1.0, StatisticKind::RawLr, 1).is_err());
    }
}
