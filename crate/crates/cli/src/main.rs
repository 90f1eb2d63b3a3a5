//! `modclock` batch front end.

mod config;
mod error;
mod output;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modclock::verify::suites::{run_suite, Suite, SuiteOptions};
use modclock::verify::{observed_orders, Check};
use rayon::prelude::*;
use serde::Serialize;

use config::{KeyValues, RunConfig, ScenarioParams};
use error::CliError;
use output::{check_table, to_json, write_atomic};
use runner::Outcome;

const DEFAULT_OUT: &str = "modclock-out";

#[derive(Parser, Debug)]
#[command(
    name = "modclock",
    version,
    about = "Finite-clock timeless dynamics: scenarios and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario from a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a scenario once per parameter value.
    Sweep {
        config: PathBuf,
        /// Config key to vary, e.g. `piston.displacement` or `clock.d`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 64)]
        d: usize,
        #[arg(long)]
        hbar: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Clock dimension; must refine the scenario's base clock by a whole factor.
    #[arg(long)]
    d: Option<usize>,
    /// Clock tick (spin only).
    #[arg(long)]
    dt: Option<f64>,
    /// Spin regime: resonant, detuned_bare or detuned_compensated.
    #[arg(long)]
    regime: Option<String>,
}

impl Overrides {
    fn apply(&self, kv: &mut KeyValues) {
        if let Some(out) = &self.out {
            kv.set("out", out.display().to_string());
        }
        if let Some(h) = self.hbar {
            kv.set("hbar", h.to_string());
        }
        if let Some(d) = self.d {
            kv.set("clock.d", d.to_string());
        }
        if let Some(dt) = self.dt {
            kv.set("clock.dt", dt.to_string());
        }
        if let Some(r) = &self.regime {
            kv.set("spin.regime", r.clone());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => cmd_run(&config, &overrides),
        Command::Sweep {
            config,
            param,
            values,
            jobs,
            overrides,
        } => cmd_sweep(&config, &param, &values, jobs, &overrides),
        Command::Verify {
            suite,
            d,
            hbar,
            out,
        } => cmd_verify(&suite, d, hbar, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("modclock: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn set_hbar(h: Option<f64>) -> Result<(), CliError> {
    if let Some(h) = h {
        modclock::config::set_hbar(h).map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn load(path: &Path, overrides: &Overrides) -> Result<KeyValues, CliError> {
    let mut kv = KeyValues::read(path)?;
    overrides.apply(&mut kv);
    Ok(kv)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    scenario: &'static str,
    params: &'a ScenarioParams,
    hbar: f64,
    passed: bool,
    metrics: &'a std::collections::BTreeMap<String, f64>,
    checks: &'a [Check],
}

fn cmd_run(path: &Path, overrides: &Overrides) -> Result<bool, CliError> {
    let kv = load(path, overrides)?;
    let cfg = RunConfig::from_key_values(&kv)?;
    set_hbar(cfg.hbar)?;
    let outcome = runner::run(&cfg)?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let summary = RunSummary {
        scenario: outcome.scenario,
        params: &cfg.params,
        hbar: modclock::config::hbar(),
        passed: outcome.passed(),
        metrics: &outcome.metrics,
        checks: &outcome.checks,
    };
    let report = format!(
        "scenario {}\n\n{}",
        outcome.scenario,
        check_table(&outcome.checks)
    );
    let csv = outcome.table.to_csv()?;
    let json = to_json(&summary)?;
    write_atomic(&out, &format!("{}.csv", outcome.scenario), &csv)?;
    write_atomic(&out, "summary.json", &json)?;
    write_atomic(&out, "report.txt", report.as_bytes())?;
    print!("{report}");
    Ok(outcome.passed())
}

#[derive(Serialize)]
struct SweepEntry<'a> {
    value: &'a str,
    passed: bool,
    metrics: &'a std::collections::BTreeMap<String, f64>,
    checks: &'a [Check],
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    scenario: &'static str,
    param: &'a str,
    hbar: f64,
    passed: bool,
    runs: Vec<SweepEntry<'a>>,
    derived: Vec<Check>,
}

fn cmd_sweep(
    path: &Path,
    param: &str,
    values: &[String],
    jobs: Option<usize>,
    overrides: &Overrides,
) -> Result<bool, CliError> {
    if matches!(param, "hbar" | "out" | "scenario") {
        return Err(CliError::Config(format!("`{param}` cannot be swept")));
    }
    let base = load(path, overrides)?;
    let configs = values
        .iter()
        .map(|v| {
            let mut kv = base.clone();
            kv.set(param, v.trim());
            RunConfig::from_key_values(&kv).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{param} = {v}: {m}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let first = configs
        .first()
        .ok_or_else(|| CliError::Config("no sweep values".into()))?;
    set_hbar(first.hbar)?;
    let out = first
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        configs
            .par_iter()
            .map(runner::run)
            .collect::<Result<Vec<_>, _>>()
    })?;

    let derived = derived_checks(param, &configs, &outcomes);
    let passed = outcomes.iter().all(Outcome::passed) && derived.iter().all(Check::passed);
    let summary = SweepSummary {
        scenario: first.scenario.name(),
        param,
        hbar: modclock::config::hbar(),
        passed,
        runs: values
            .iter()
            .zip(&outcomes)
            .map(|(v, o)| SweepEntry {
                value: v.trim(),
                passed: o.passed(),
                metrics: &o.metrics,
                checks: &o.checks,
            })
            .collect(),
        derived,
    };

    let mut report = format!("sweep {} over {param}\n", first.scenario.name());
    for (v, o) in values.iter().zip(&outcomes) {
        report.push_str(&format!(
            "\n{param} = {}\n{}",
            v.trim(),
            check_table(&o.checks)
        ));
    }
    if !summary.derived.is_empty() {
        report.push_str(&format!(
            "\nacross values\n{}",
            check_table(&summary.derived)
        ));
    }

    let csvs = outcomes
        .iter()
        .map(|o| o.table.to_csv())
        .collect::<Result<Vec<_>, _>>()?;
    let json = to_json(&summary)?;
    for (i, csv) in csvs.iter().enumerate() {
        write_atomic(&out, &format!("run_{i:03}.csv"), csv)?;
    }
    write_atomic(&out, "sweep.json", &json)?;
    write_atomic(&out, "report.txt", report.as_bytes())?;
    print!("{report}");
    Ok(passed)
}

/// Checks that only make sense across a sweep: piston linearity in the
/// displacement and the convergence order of the constraint residual.
fn derived_checks(param: &str, configs: &[RunConfig], outcomes: &[Outcome]) -> Vec<Check> {
    let metric = |o: &Outcome, k: &str| o.metrics.get(k).copied().unwrap_or(f64::NAN);
    let mut out = Vec::new();
    if param == "piston.displacement" {
        let slopes: Vec<f64> = outcomes
            .iter()
            .filter(|o| metric(o, "displacement") != 0.0)
            .map(|o| metric(o, "delta_arg") / metric(o, "displacement"))
            .collect();
        if slopes.len() >= 2 {
            let worst = slopes
                .iter()
                .map(|s| (s / slopes[0] - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(Check::below("sweep.linearity", worst, 0.05));
        }
    }
    if matches!(param, "clock.d" | "clock.dt") && outcomes.len() >= 2 {
        let mut pairs: Vec<(f64, f64)> = outcomes
            .iter()
            .map(|o| (metric(o, "delta_t"), metric(o, "constraint")))
            .filter(|(dt, r)| dt.is_finite() && r.is_finite())
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let (steps, errors): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let smooth = configs.iter().all(|c| match &c.params {
            ScenarioParams::Piston(p) => p.ramp_shape == modclock::scenarios::RampShape::Smooth,
            ScenarioParams::Spin(p, _) => p.shape == modclock::scenarios::PulseShape::Hann,
            ScenarioParams::DoubleSlit(_) => false,
        });
        for (i, order) in observed_orders(&steps, &errors).into_iter().enumerate() {
            let c = Check::near(format!("sweep.constraint_order.{i}"), order, 2.0, 0.5);
            out.push(if smooth {
                c
            } else {
                Check {
                    note: Some(format!(
                        "{}; drive not smooth, unasserted",
                        c.note.clone().unwrap_or_default()
                    )),
                    ..c.asserted_if(false)
                }
            });
        }
    }
    out
}

fn cmd_verify(
    suite: &str,
    d: usize,
    hbar: Option<f64>,
    out: Option<&Path>,
) -> Result<bool, CliError> {
    let suite: Suite = suite
        .parse()
        .map_err(|e: modclock::Error| CliError::Config(e.to_string()))?;
    set_hbar(hbar)?;
    let report = run_suite(suite, SuiteOptions { d })?;
    let text = format!("suite {}\n\n{}", report.suite, check_table(&report.checks));
    if let Some(dir) = out {
        let json = to_json(&report)?;
        write_atomic(dir, "verify.json", &json)?;
        write_atomic(dir, "report.txt", text.as_bytes())?;
    }
    print!("{text}");
    Ok(report.passed())
}
