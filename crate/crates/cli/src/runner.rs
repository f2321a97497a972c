//! Parallel replication driver.
//!
//! Replications are pure functions of `(master_seed, index)`, so the rayon
//! map below produces the same outcome vector no matter how many workers
//! run it; tallying happens in index order.

use anyhow::Result;
use curstat_core::kernel::KernelMoments;
use curstat_core::simulation::{run_replication, tally, RejectionTable, Scenario};
use rayon::prelude::*;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "CURSTAT_THREADS";

/// Build a rayon pool with `threads` workers (explicit flag beats the
/// `CURSTAT_THREADS` variable, which beats the machine default).
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let requested = threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v > 0)
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = requested {
        builder = builder.num_threads(k);
    }
    Ok(builder.build()?)
}

/// Run all replications of a scenario on the given pool, reporting progress
/// to stderr, and tally the rejections.
pub fn run_scenario_parallel(
    scenario: &Scenario,
    moments: &KernelMoments,
    pool: &rayon::ThreadPool,
    progress: bool,
) -> Result<RejectionTable> {
    scenario.validate()?;
    let reps = scenario.replications;
    let done = AtomicUsize::new(0);
    let tick = (reps / 20).max(1);
    let outcomes: Vec<_> = pool.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                let out = run_replication(scenario, moments, rep);
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                if progress && (k % tick == 0 || k == reps) {
                    let mut err = std::io::stderr().lock();
                    let _ = write!(err, "\r{}: replication {k}/{reps}", scenario.name);
                    if k == reps {
                        let _ = writeln!(err);
                    }
                    let _ = err.flush();
                }
                out
            })
            .collect::<core::result::Result<Vec<_>, _>>()
    })?;
    Ok(tally(scenario, &outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use curstat_core::kernel::{kernel_moments, KernelSpec};
    use curstat_core::simulation::{ObservationDensity, TestSelection};
    use curstat_core::statistics::TestConfig;

    fn tiny_scenario() -> Scenario {
        Scenario {
            name: "tiny".into(),
            lambda: 1.6,
            alpha1: 1.0,
            alpha2: 1.0,
            theta: 1.0,
            g1: ObservationDensity::Uniform02,
            g2: ObservationDensity::Uniform02,
            m: 15,
            n: 15,
            replications: 6,
            bootstrap_resamples: 12,
            level: 0.05,
            config: TestConfig::default_weibull(),
            master_seed: 7,
            tests: TestSelection::all(),
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let scenario = tiny_scenario();
        let moments = kernel_moments(&KernelSpec::triweight(1.0).unwrap(), 1e-10).unwrap();
        let one = thread_pool(Some(1)).unwrap();
        let four = thread_pool(Some(4)).unwrap();
        let a = run_scenario_parallel(&scenario, &moments, &one, false).unwrap();
        let b = run_scenario_parallel(&scenario, &moments, &four, false).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(b.rows.iter()) {
            assert_eq!(x.test, y.test);
            assert_eq!(x.reject_rate.to_bits(), y.reject_rate.to_bits());
            assert_eq!(x.standard_error.to_bits(), y.standard_error.to_bits());
        }
        // sequential core runner agrees too
        let seq = curstat_core::simulation::run_scenario(&scenario, &moments).unwrap();
        for (x, y) in a.rows.iter().zip(seq.rows.iter()) {
            assert_eq!(x.reject_rate.to_bits(), y.reject_rate.to_bits());
        }
    }
}
