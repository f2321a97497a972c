//! Scenario file parsing.
//!
//! A scenario file lists one block per scenario:
//!
//! ```text
//! [scenario h0-weibull]
//! lambda = 1.6
//! alpha1 = 0.5
//! alpha2 = 0.5
//! theta = 1.0
//! g1 = uniform02
//! g2 = uniform02
//! m = 50
//! n = 50
//! # replications / bootstrap default to the preset when omitted
//! tests = slr,lr,u_n,w_n
//! ```
//!
//! Lines starting with `#` are comments. Window and bandwidth keys
//! (`a`, `b`, `support_end`, `bandwidth_constant`, `bandwidth_exponent`,
//! `level`) default to the standard configuration.

use anyhow::{bail, Context, Result};
use curstat_core::simulation::{ObservationDensity, Scenario, TestSelection};
use curstat_core::statistics::{BandwidthRule, TestConfig};

/// Replication/bootstrap counts applied when a scenario omits them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub replications: usize,
    pub bootstrap_resamples: usize,
}

impl Preset {
    /// CI-scale runs: `R = B = 500`.
    pub fn desk() -> Self {
        Self {
            replications: 500,
            bootstrap_resamples: 500,
        }
    }

    /// Full-scale runs: `R = B = 1000`.
    pub fn full() -> Self {
        Self {
            replications: 1000,
            bootstrap_resamples: 1000,
        }
    }
}

/// Parse a comma-separated test list (`slr,lr,u_n,w_n` or `all`).
pub fn parse_test_selection(spec: &str) -> Result<TestSelection> {
    let mut sel = TestSelection {
        slr: false,
        lr: false,
        u_n: false,
        w_n: false,
    };
    for part in spec.split(',') {
        match part.trim() {
            "slr" => sel.slr = true,
            "lr" => sel.lr = true,
            "u_n" | "un" => sel.u_n = true,
            "w_n" | "wn" => sel.w_n = true,
            "all" => sel = TestSelection::all(),
            "" => {}
            other => bail!("unknown test id: {other}"),
        }
    }
    if !(sel.slr || sel.lr || sel.u_n || sel.w_n) {
        bail!("no tests selected");
    }
    Ok(sel)
}

struct Builder {
    name: String,
    lambda: Option<f64>,
    alpha1: Option<f64>,
    alpha2: Option<f64>,
    theta: f64,
    g1: ObservationDensity,
    g2: ObservationDensity,
    m: Option<usize>,
    n: Option<usize>,
    replications: Option<usize>,
    bootstrap: Option<usize>,
    level: f64,
    a: f64,
    b: f64,
    support_end: f64,
    bandwidth_constant: f64,
    bandwidth_exponent: f64,
    tests: TestSelection,
}

impl Builder {
    fn new(name: String) -> Self {
        Self {
            name,
            lambda: None,
            alpha1: None,
            alpha2: None,
            theta: 1.0,
            g1: ObservationDensity::Uniform02,
            g2: ObservationDensity::Uniform02,
            m: None,
            n: None,
            replications: None,
            bootstrap: None,
            level: 0.05,
            a: 0.1,
            b: 1.9,
            support_end: 2.0,
            bandwidth_constant: 2.0,
            bandwidth_exponent: 0.2,
            tests: TestSelection::all(),
        }
    }

    fn set(&mut self, key: &str, value: &str, line_no: usize) -> Result<()> {
        let ctx = || format!("line {line_no}: bad value for {key}: {value}");
        match key {
            "lambda" => self.lambda = Some(value.parse().with_context(ctx)?),
            "alpha1" => self.alpha1 = Some(value.parse().with_context(ctx)?),
            "alpha2" => self.alpha2 = Some(value.parse().with_context(ctx)?),
            "theta" => self.theta = value.parse().with_context(ctx)?,
            "g1" => self.g1 = value.parse().with_context(ctx)?,
            "g2" => self.g2 = value.parse().with_context(ctx)?,
            "m" => self.m = Some(value.parse().with_context(ctx)?),
            "n" => self.n = Some(value.parse().with_context(ctx)?),
            "replications" => self.replications = Some(value.parse().with_context(ctx)?),
            "bootstrap" => self.bootstrap = Some(value.parse().with_context(ctx)?),
            "level" => self.level = value.parse().with_context(ctx)?,
            "a" => self.a = value.parse().with_context(ctx)?,
            "b" => self.b = value.parse().with_context(ctx)?,
            "support_end" => self.support_end = value.parse().with_context(ctx)?,
            "bandwidth_constant" => self.bandwidth_constant = value.parse().with_context(ctx)?,
            "bandwidth_exponent" => self.bandwidth_exponent = value.parse().with_context(ctx)?,
            "tests" => self.tests = parse_test_selection(value).with_context(ctx)?,
            other => bail!("line {line_no}: unknown key: {other}"),
        }
        Ok(())
    }

    fn build(self, preset: Preset, seed: u64) -> Result<Scenario> {
        let need = |opt: Option<f64>, key: &str| -> Result<f64> {
            opt.with_context(|| format!("scenario {}: missing key {key}", self.name))
        };
        let need_usize = |opt: Option<usize>, key: &str| -> Result<usize> {
            opt.with_context(|| format!("scenario {}: missing key {key}", self.name))
        };
        let config = TestConfig::new(
            self.a,
            self.b,
            self.support_end,
            BandwidthRule::new(self.bandwidth_constant, self.bandwidth_exponent)?,
        )?;
        let scenario = Scenario {
            name: self.name.clone(),
            lambda: need(self.lambda, "lambda")?,
            alpha1: need(self.alpha1, "alpha1")?,
            alpha2: need(self.alpha2, "alpha2")?,
            theta: self.theta,
            g1: self.g1,
            g2: self.g2,
            m: need_usize(self.m, "m")?,
            n: need_usize(self.n, "n")?,
            replications: self.replications.unwrap_or(preset.replications),
            bootstrap_resamples: self.bootstrap.unwrap_or(preset.bootstrap_resamples),
            level: self.level,
            config,
            master_seed: seed,
            tests: self.tests,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Parse a scenario file. Scenario `k` gets master seed
/// `derive_seed(base_seed, [k])`, so adding a scenario never shifts the
/// randomness of the ones before it.
pub fn parse_scenarios(text: &str, preset: Preset, base_seed: u64) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    let mut current: Option<Builder> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(inner) = rest.strip_suffix(']') else {
                bail!("line {line_no}: unclosed scenario header");
            };
            let name = inner
                .strip_prefix("scenario")
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .with_context(|| {
                    format!("line {line_no}: header must look like [scenario <name>]")
                })?;
            if let Some(done) = current.take() {
                let seed = curstat_core::rng::derive_seed(base_seed, &[out.len() as u64]);
                out.push(done.build(preset, seed)?);
            }
            current = Some(Builder::new(name.to_string()));
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {line_no}: expected `key = value`, got: {line}");
        };
        let builder = current
            .as_mut()
            .with_context(|| format!("line {line_no}: key outside any [scenario] block"))?;
        builder.set(key.trim(), value.trim(), line_no)?;
    }
    if let Some(done) = current.take() {
        let seed = curstat_core::rng::derive_seed(base_seed, &[out.len() as u64]);
        out.push(done.build(preset, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[scenario first]
lambda = 1.6
alpha1 = 0.5
alpha2 = 0.5
m = 50
n = 50

[scenario second]
lambda = 0.58
alpha1 = 2.0
alpha2 = 2.0
theta = 1.5
g2 = poly_decreasing
m = 25
n = 30
replications = 7
bootstrap = 11
tests = u_n,w_n
";

    #[test]
    fn parses_blocks_with_defaults_and_overrides() {
        let scenarios = parse_scenarios(SAMPLE, Preset::desk(), 99).unwrap();
        assert_eq!(scenarios.len(), 2);
        let s1 = &scenarios[0];
        assert_eq!(s1.name, "first");
        assert_eq!(s1.replications, 500);
        assert_eq!(s1.bootstrap_resamples, 500);
        assert_eq!(s1.theta, 1.0);
        assert!(s1.tests.slr && s1.tests.w_n);
        assert!(s1.is_null());
        let s2 = &scenarios[1];
        assert_eq!(s2.replications, 7);
        assert_eq!(s2.bootstrap_resamples, 11);
        assert_eq!(s2.g2, ObservationDensity::PolyDecreasing);
        assert!(!s2.tests.slr && s2.tests.u_n);
        assert!(!s2.is_null());
        assert_ne!(s1.master_seed, s2.master_seed);
    }

    #[test]
    fn empty_file_gives_no_scenarios() {
        assert!(parse_scenarios("", Preset::desk(), 1).unwrap().is_empty());
        assert!(parse_scenarios("# only comments\n", Preset::desk(), 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_scenarios("[scenario x]\nlambda = abc\n", Preset::desk(), 1).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"), "{err:#}");
        let err = parse_scenarios("lambda = 1\n", Preset::desk(), 1).unwrap_err();
        assert!(format!("{err:#}").contains("outside any"), "{err:#}");
        let err = parse_scenarios("[scenario x]\ng1 = nope\n", Preset::desk(), 1).unwrap_err();
        assert!(format!("{err:#}").contains("unknown observation density"), "{err:#}");
    }

    #[test]
    fn missing_required_keys_are_reported() {
        let err = parse_scenarios("[scenario x]\nlambda = 1.6\n", Preset::desk(), 1).unwrap_err();
        assert!(format!("{err:#}").contains("missing key"), "{err:#}");
    }

    #[test]
    fn nonpositive_parameters_are_rejected() {
        let text = "[scenario x]\nlambda = -1\nalpha1 = 1\nalpha2 = 1\nm = 5\nn = 5\n";
        assert!(parse_scenarios(text, Preset::desk(), 1).is_err());
    }
}
