//! Subcommand implementations.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;

use curstat_core::estimators::{mle, CurrentStatusSample};
use curstat_core::kernel::{kernel_moments, KernelMoments, KernelSpec};
use curstat_core::rng::derive_seed;
use curstat_core::simulation::{
    chernoff_replication, decomposition_replication, evaluate_tests, scaled_for_total,
    summarize_decomposition, RejectionTable, Scenario,
};
use rayon::prelude::*;
use curstat_core::statistics::{smoothed_fit, BandwidthRule, TestConfig};

use crate::csv_io::{
    format_rejection_table, write_curves_csv, write_diagnostics_csv, write_outcome_csv,
    write_rejection_csv, CurveSet, DiagnosticRow,
};
use crate::runner::{run_scenario_parallel, thread_pool};
use crate::scenario_file::{parse_scenarios, Preset};

/// Default master seed; pass `--seed` to change it.
pub const DEFAULT_SEED: u64 = 1729;

fn moments() -> Result<KernelMoments> {
    Ok(kernel_moments(&KernelSpec::triweight(1.0)?, 1e-10)?)
}

fn out_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create output file {}", path.display())
    })?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PresetName {
    /// R = B = 500
    Desk,
    /// R = B = 1000
    Full,
}

impl PresetName {
    fn preset(self) -> Preset {
        match self {
            PresetName::Desk => Preset::desk(),
            PresetName::Full => Preset::full(),
        }
    }
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Input CSV with header `sample,t,delta`
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Write the decision report as CSV here (stdout report is always shown)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write estimator curves (plot data) here
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Tests to run, comma separated: slr,lr,u_n,w_n or `all`
    #[arg(long, default_value = "all")]
    pub tests: String,
    /// Bootstrap resamples for the LR-type tests
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    /// Test level
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Evaluation window lower end
    #[arg(long, default_value_t = 0.1)]
    pub window_a: f64,
    /// Evaluation window upper end
    #[arg(long, default_value_t = 1.9)]
    pub window_b: f64,
    /// Upper end M of the observation support [0, M]
    #[arg(long, default_value_t = 2.0)]
    pub support_end: f64,
    /// Bandwidth rule constant c in b_N = c N^(-e)
    #[arg(long, default_value_t = 2.0)]
    pub bandwidth_constant: f64,
    /// Bandwidth rule exponent e
    #[arg(long, default_value_t = 0.2)]
    pub bandwidth_exponent: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Exit with status 2 when any selected test rejects
    #[arg(long)]
    pub exit_on_reject: bool,
}

pub fn cmd_test(args: &TestArgs) -> Result<u8> {
    let sel = crate::scenario_file::parse_test_selection(&args.tests)?;
    let config = TestConfig::new(
        args.window_a,
        args.window_b,
        args.support_end,
        BandwidthRule::new(args.bandwidth_constant, args.bandwidth_exponent)?,
    )?;
    let file = File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))?;
    let (s1, s2) = crate::csv_io::read_samples(BufReader::new(file), args.support_end)?;
    let moments = moments()?;
    let outcome = evaluate_tests(
        &s1,
        &s2,
        &config,
        sel,
        args.bootstrap,
        args.level,
        derive_seed(args.seed, &[0]),
        &moments,
    )?;

    let mut any_reject = false;
    let mut report = |name: &str, t: Option<curstat_core::statistics::TestOutcome>| {
        if let Some(t) = t {
            any_reject |= t.reject;
            let p = if t.p_value.is_nan() {
                String::new()
            } else {
                format!(", p = {:.4}", t.p_value)
            };
            println!(
                "{name:<4} statistic {:>12.6}  critical {:>12.6}{p}  => {}",
                t.statistic,
                t.critical_value,
                if t.reject { "reject" } else { "fail to reject" }
            );
        }
    };
    report("slr", outcome.slr);
    report("lr", outcome.lr);
    report("u_n", outcome.u_n);
    report("w_n", outcome.w_n);

    if let Some(path) = &args.out {
        let mut w = out_writer(path)?;
        write_outcome_csv(&mut w, &outcome)?;
    }
    if let Some(path) = &args.curves {
        let bandwidth = config.bandwidth.bandwidth(s1.len() + s2.len());
        let grid = config.grid(bandwidth)?;
        let fit = smoothed_fit(&s1, &s2, &config, &grid)?;
        let pooled = CurrentStatusSample::pooled(&s1, &s2);
        let mle1 = mle(&s1)?;
        let mle2 = mle(&s2)?;
        let mle_pooled = mle(&pooled)?;
        let curves = CurveSet {
            grid_points: grid.points().collect(),
            mle1: &mle1,
            mle2: &mle2,
            mle_pooled: &mle_pooled,
            fit: &fit,
        };
        let mut w = out_writer(path)?;
        write_curves_csv(&mut w, &curves)?;
    }
    Ok(if args.exit_on_reject && any_reject { 2 } else { 0 })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (`[scenario <name>]` blocks of `key = value` lines)
    #[arg(long, short = 's')]
    pub scenarios: PathBuf,
    /// Output CSV path
    #[arg(long, short = 'o', default_value = "rejections.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = PresetName::Desk)]
    pub preset: PresetName,
    /// Override the preset's replication count
    #[arg(long)]
    pub replications: Option<usize>,
    /// Override the preset's bootstrap resample count
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads (default: CURSTAT_THREADS or all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Suppress progress output
    #[arg(long)]
    pub quiet: bool,
}

/// Run every scenario of a parsed file and merge the rejection rows.
pub fn run_scenarios(
    scenarios: &[Scenario],
    threads: Option<usize>,
    progress: bool,
) -> Result<RejectionTable> {
    let pool = thread_pool(threads)?;
    let moments = moments()?;
    let mut all = RejectionTable::default();
    for scenario in scenarios {
        let table = run_scenario_parallel(scenario, &moments, &pool, progress)?;
        if progress {
            eprint!("{}", format_rejection_table(scenario, &table));
        }
        all.rows.extend(table.rows);
    }
    Ok(all)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.scenarios)
        .with_context(|| format!("cannot read {}", args.scenarios.display()))?;
    let mut preset = args.preset.preset();
    if let Some(r) = args.replications {
        preset.replications = r;
    }
    if let Some(b) = args.bootstrap {
        preset.bootstrap_resamples = b;
    }
    let mut scenarios = parse_scenarios(&text, preset, args.seed)?;
    if args.replications.is_some() || args.bootstrap.is_some() {
        for s in &mut scenarios {
            if let Some(r) = args.replications {
                s.replications = r;
            }
            if let Some(b) = args.bootstrap {
                s.bootstrap_resamples = b;
            }
        }
    }
    let table = run_scenarios(&scenarios, args.threads, !args.quiet)?;
    let mut w = out_writer(&args.out)?;
    write_rejection_csv(&mut w, &table)?;
    w.flush()?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Scenario file; every scenario must satisfy the null hypothesis
    #[arg(long, short = 's')]
    pub scenarios: PathBuf,
    #[arg(long, short = 'o', default_value = "diagnostics.csv")]
    pub out: PathBuf,
    /// Total sample sizes for the decomposition sweep
    #[arg(long, default_value = "200,800,3200")]
    pub sweep: String,
    /// Replications per sweep point
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    /// Total sample size for the jump-count intensity estimate
    #[arg(long, default_value_t = 10_000)]
    pub jump_n: usize,
    /// Replications for the jump-count intensity estimate
    #[arg(long, default_value_t = 50)]
    pub jump_reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.scenarios)
        .with_context(|| format!("cannot read {}", args.scenarios.display()))?;
    let scenarios = parse_scenarios(&text, Preset::desk(), args.seed)?;
    let sweep: Vec<usize> = args
        .sweep
        .split(',')
        .map(|s| s.trim().parse::<usize>().context("bad --sweep entry"))
        .collect::<Result<_>>()?;
    if sweep.is_empty() {
        bail!("--sweep must list at least one sample size");
    }
    let pool = thread_pool(args.threads)?;
    let moments = moments()?;
    let mut rows: Vec<DiagnosticRow> = Vec::new();
    for scenario in &scenarios {
        // diagnostics need the true model, hence a null scenario
        scenario.null_model().map_err(anyhow::Error::from)?;
        for &n_total in &sweep {
            let scaled = scaled_for_total(scenario, n_total);
            let results = pool.install(|| {
                (0..args.replications as u64)
                    .into_par_iter()
                    .map(|rep| decomposition_replication(&scaled, &moments, rep))
                    .collect::<core::result::Result<Vec<_>, _>>()
            })?;
            let summary = summarize_decomposition(&scaled, &results);
            if !args.quiet {
                eprintln!(
                    "{}: N = {n_total}: median |residual| * N sqrt(b_N) = {:.5}, mean D_N = {:.3e}",
                    scenario.name, summary.median_scaled_residual, summary.mean_d_n
                );
            }
            rows.push(DiagnosticRow {
                scenario: scenario.name.clone(),
                metric: "median_scaled_residual",
                n_total,
                replications: args.replications,
                value: summary.median_scaled_residual,
            });
            rows.push(DiagnosticRow {
                scenario: scenario.name.clone(),
                metric: "mean_d_n",
                n_total,
                replications: args.replications,
                value: summary.mean_d_n,
            });
            rows.push(DiagnosticRow {
                scenario: scenario.name.clone(),
                metric: "mean_leading_integral",
                n_total,
                replications: args.replications,
                value: summary.mean_leading_integral,
            });
        }
        let jump_scaled = scaled_for_total(scenario, args.jump_n);
        let ratios = pool.install(|| {
            (0..args.jump_reps as u64)
                .into_par_iter()
                .map(|rep| chernoff_replication(&jump_scaled, rep))
                .collect::<core::result::Result<Vec<_>, _>>()
        })?;
        let ratio = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
        if !args.quiet {
            eprintln!(
                "{}: jump-count intensity ratio at N = {} over {} reps: {:.3}",
                scenario.name, args.jump_n, args.jump_reps, ratio
            );
        }
        rows.push(DiagnosticRow {
            scenario: scenario.name.clone(),
            metric: "jump_intensity_ratio",
            n_total: args.jump_n,
            replications: args.jump_reps,
            value: ratio,
        });
    }
    let mut w = out_writer(&args.out)?;
    write_diagnostics_csv(&mut w, &rows)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

/// The scenario files shipped with the binary.
pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
    ("table1", include_str!("../scenarios/table1.scenarios")),
    ("table2", include_str!("../scenarios/table2.scenarios")),
    ("table3", include_str!("../scenarios/table3.scenarios")),
    ("table4", include_str!("../scenarios/table4.scenarios")),
    ("table5", include_str!("../scenarios/table5.scenarios")),
    ("table6", include_str!("../scenarios/table6.scenarios")),
    ("table7", include_str!("../scenarios/table7.scenarios")),
    ("table8", include_str!("../scenarios/table8.scenarios")),
    ("crossing", include_str!("../scenarios/crossing.scenarios")),
];

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Directory for the per-table CSVs
    #[arg(long, short = 'o', default_value = "tables_out")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = PresetName::Desk)]
    pub preset: PresetName,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
    /// Only regenerate tables whose name contains this substring
    #[arg(long)]
    pub only: Option<String>,
}

pub fn cmd_tables(args: &TablesArgs) -> Result<u8> {
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create {}", args.out_dir.display()))?;
    let mut preset = args.preset.preset();
    if let Some(r) = args.replications {
        preset.replications = r;
    }
    if let Some(b) = args.bootstrap {
        preset.bootstrap_resamples = b;
    }
    for (name, text) in BUNDLED_SCENARIOS {
        if let Some(filter) = &args.only {
            if !name.contains(filter.as_str()) {
                continue;
            }
        }
        // each table keeps its own seed branch so runs are independent of
        // which tables are selected
        let seed = derive_seed(args.seed, &[table_tag(name)]);
        let mut scenarios = parse_scenarios(text, preset, seed)?;
        for s in &mut scenarios {
            if let Some(r) = args.replications {
                s.replications = r;
            }
            if let Some(b) = args.bootstrap {
                s.bootstrap_resamples = b;
            }
        }
        if !args.quiet {
            eprintln!("== {name}: {} scenarios", scenarios.len());
        }
        let table = run_scenarios(&scenarios, args.threads, !args.quiet)?;
        let path = args.out_dir.join(format!("{name}.csv"));
        let mut w = out_writer(&path)?;
        write_rejection_csv(&mut w, &table)?;
    }
    Ok(0)
}

fn table_tag(name: &str) -> u64 {
    name.bytes().fold(0u64, |acc, b| {
        acc.wrapping_mul(257).wrapping_add(b as u64)
    })
}
