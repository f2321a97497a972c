//! CSV ingestion and emission.
//!
//! Input data format: header `sample,t,delta` (any column order), one
//! observation per line, `sample` in {1,2}, `t` in `[0, M]`, `delta` in
//! {0,1}. All parse errors carry the offending line number.

use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use curstat_core::estimators::{CurrentStatusSample, SampleLabel};
use curstat_core::simulation::{RejectionTable, ReplicationOutcome, Scenario};

/// Read the two sample groups from `sample,t,delta` CSV.
pub fn read_samples(
    reader: impl BufRead,
    support_end: f64,
) -> Result<(CurrentStatusSample, CurrentStatusSample)> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((idx, line)) => {
                let line = line.with_context(|| format!("line {}: read error", idx + 1))?;
                if line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => bail!("empty input: expected header `sample,t,delta`"),
        }
    };
    let names: Vec<String> = header
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    let col = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .with_context(|| format!("missing column: {name}"))
    };
    let sample_col = col("sample")?;
    let t_col = col("t")?;
    let delta_col = col("delta")?;

    let mut group1 = Vec::new();
    let mut group2 = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.with_context(|| format!("line {line_no}: read error"))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |c: usize, name: &str| -> Result<&str> {
            fields
                .get(c)
                .copied()
                .with_context(|| format!("line {line_no}: missing {name} field"))
        };
        let sample = field(sample_col, "sample")?;
        let t: f64 = field(t_col, "t")?
            .parse()
            .with_context(|| format!("line {line_no}: t is not numeric"))?;
        if !t.is_finite() || t < 0.0 || t > support_end {
            bail!("line {line_no}: t = {t} outside [0, {support_end}]");
        }
        let delta = match field(delta_col, "delta")? {
            "0" => false,
            "1" => true,
            other => bail!("line {line_no}: delta must be 0 or 1, got {other}"),
        };
        match sample {
            "1" => group1.push((t, delta)),
            "2" => group2.push((t, delta)),
            other => bail!("line {line_no}: sample must be 1 or 2, got {other}"),
        }
    }
    if group1.is_empty() {
        bail!("sample group 1 is empty");
    }
    if group2.is_empty() {
        bail!("sample group 2 is empty");
    }
    Ok((
        CurrentStatusSample::new(group1, SampleLabel::First)?,
        CurrentStatusSample::new(group2, SampleLabel::Second)?,
    ))
}

pub const REJECTION_HEADER: &str =
    "test,lambda,alpha1,alpha2,theta,g1,g2,m,n,R,B,reject_rate,se";

/// Write rejection rows; float formatting is shortest-roundtrip, so output
/// bytes are a pure function of the computed values.
pub fn write_rejection_csv(out: &mut impl Write, table: &RejectionTable) -> Result<()> {
    writeln!(out, "{REJECTION_HEADER}")?;
    for r in &table.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.test,
            r.lambda,
            r.alpha1,
            r.alpha2,
            r.theta,
            r.g1,
            r.g2,
            r.m,
            r.n,
            r.replications,
            r.bootstrap_resamples,
            r.reject_rate,
            r.standard_error
        )?;
    }
    Ok(())
}

/// Per-replication test report for `curstat test`.
pub fn write_outcome_csv(out: &mut impl Write, outcome: &ReplicationOutcome) -> Result<()> {
    writeln!(
        out,
        "test,statistic,critical_value,p_value,reject,n_bootstrap"
    )?;
    let mut row = |name: &str, t: &curstat_core::statistics::TestOutcome| -> Result<()> {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            name,
            t.statistic,
            t.critical_value,
            if t.p_value.is_nan() {
                String::new()
            } else {
                t.p_value.to_string()
            },
            t.reject,
            t.n_bootstrap
        )?;
        Ok(())
    };
    if let Some(t) = outcome.slr {
        row("slr", &t)?;
    }
    if let Some(t) = outcome.lr {
        row("lr", &t)?;
    }
    if let Some(t) = outcome.u_n {
        row("u_n", &t)?;
    }
    if let Some(t) = outcome.w_n {
        row("w_n", &t)?;
    }
    Ok(())
}

/// Estimator curves on the grid (plot data): step-function MLEs and smoothed
/// estimates for both samples and the pool.
pub struct CurveSet<'a> {
    pub grid_points: Vec<f64>,
    pub mle1: &'a curstat_core::estimators::MonotoneStepFunction,
    pub mle2: &'a curstat_core::estimators::MonotoneStepFunction,
    pub mle_pooled: &'a curstat_core::estimators::MonotoneStepFunction,
    pub fit: &'a curstat_core::statistics::SmoothedFit,
}

pub fn write_curves_csv(out: &mut impl Write, curves: &CurveSet<'_>) -> Result<()> {
    writeln!(
        out,
        "t,mle1,mle2,mle_pooled,msle1,msle2,msle_pooled"
    )?;
    for (k, &t) in curves.grid_points.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t,
            curves.mle1.eval(t),
            curves.mle2.eval(t),
            curves.mle_pooled.eval(t),
            curves.fit.est1.dist.values[k],
            curves.fit.est2.dist.values[k],
            curves.fit.est_pooled.dist.values[k]
        )?;
    }
    Ok(())
}

/// Long-format diagnostic rows for `curstat diagnose`.
pub struct DiagnosticRow {
    pub scenario: String,
    pub metric: &'static str,
    pub n_total: usize,
    pub replications: usize,
    pub value: f64,
}

pub fn write_diagnostics_csv(out: &mut impl Write, rows: &[DiagnosticRow]) -> Result<()> {
    writeln!(out, "scenario,metric,n_total,replications,value")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.scenario, r.metric, r.n_total, r.replications, r.value
        )?;
    }
    Ok(())
}

/// Render a rejection table for terminal display.
pub fn format_rejection_table(scenario: &Scenario, table: &RejectionTable) -> String {
    let mut s = format!(
        "scenario {} (lambda={}, alpha1={}, alpha2={}, theta={}, g1={}, g2={}, m={}, n={}):\n",
        scenario.name,
        scenario.lambda,
        scenario.alpha1,
        scenario.alpha2,
        scenario.theta,
        scenario.g1,
        scenario.g2,
        scenario.m,
        scenario.n
    );
    for r in &table.rows {
        s.push_str(&format!(
            "  {:<4} reject rate {:.3} (se {:.3}, R={}, B={})\n",
            r.test, r.reject_rate, r.standard_error, r.replications, r.bootstrap_resamples
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn reads_well_formed_input() {
        let data = "sample,t,delta\n1,0.5,1\n1,1.2,0\n2,0.7,1\n2,1.9,0\n";
        let (s1, s2) = read_samples(Cursor::new(data), 2.0).unwrap();
        assert_eq!(s1.len(), 2);
        assert_eq!(s2.len(), 2);
        assert_eq!(s1.times(), &[0.5, 1.2]);
    }

    #[test]
    fn header_order_is_flexible() {
        let data = "delta,sample,t\n1,1,0.5\n0,2,0.7\n";
        let (s1, s2) = read_samples(Cursor::new(data), 2.0).unwrap();
        assert_eq!(s1.times(), &[0.5]);
        assert_eq!(s2.deltas(), &[false]);
    }

    #[test]
    fn missing_column_is_named() {
        let data = "sample,t\n1,0.5\n";
        let err = read_samples(Cursor::new(data), 2.0).unwrap_err();
        assert!(err.to_string().contains("missing column: delta"), "{err}");
    }

    #[test]
    fn bad_rows_carry_line_numbers() {
        let cases = [
            ("sample,t,delta\n1,0.5,1\n1,oops,0\n", "line 3: t is not numeric"),
            ("sample,t,delta\n1,0.5,3\n", "line 2: delta must be 0 or 1"),
            ("sample,t,delta\n7,0.5,1\n", "line 2: sample must be 1 or 2"),
            ("sample,t,delta\n1,2.5,1\n", "line 2: t = 2.5 outside"),
        ];
        for (data, needle) in cases {
            let err = read_samples(Cursor::new(data), 2.0).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
        }
    }

    #[test]
    fn empty_groups_are_rejected() {
        let data = "sample,t,delta\n1,0.5,1\n";
        let err = read_samples(Cursor::new(data), 2.0).unwrap_err();
        assert!(err.to_string().contains("group 2 is empty"));
    }
}
