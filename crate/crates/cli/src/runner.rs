use std::collections::BTreeMap;
use std::f64::consts::TAU;

use modclock::modvars::fourier_moments;
use modclock::scenarios::{
    collapse_uncertainty_demo, modular_momentum, polynomial_phase_insensitivity, run_piston,
    run_spin, two_packet_state, DoubleSlitConfig, GridSystem, SpinRegime,
};
use modclock::verify::Check;
use modclock::C64;
use serde::Serialize;

use crate::config::{DoubleSlitParams, RunConfig, ScenarioParams};
use crate::error::CliError;

/// Numeric rows written as CSV under a header.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::io("csv", e.into());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(io)?;
        }
        w.into_inner()
            .map_err(|e| CliError::io("csv", e.into_error()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub scenario: &'static str,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub table: Table,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut outcome = match &cfg.params {
        ScenarioParams::DoubleSlit(p) => double_slit(p)?,
        ScenarioParams::Piston(p) => piston(p)?,
        ScenarioParams::Spin(p, regime) => spin(p, *regime)?,
    };
    apply_tolerances(&mut outcome.checks, &cfg.tolerances);
    Ok(outcome)
}

/// Overrides tolerances by check id; ids were validated against the
/// scenario when the config was read.
pub fn apply_tolerances(checks: &mut [Check], tols: &BTreeMap<String, f64>) {
    for check in checks.iter_mut() {
        if let Some(&tol) = tols.get(&check.id) {
            *check = check.clone().with_tol(tol);
        }
    }
}

fn double_slit(p: &DoubleSlitParams) -> Result<Outcome, CliError> {
    let grid = GridSystem::new(p.n, p.length, p.mass)?;
    let base = DoubleSlitConfig::for_grid(&grid, p.sites, 0.0);
    let v = modular_momentum(&grid, base.ell(&grid))?;
    let phis: Vec<f64> = match p.phi {
        Some(phi) => vec![phi],
        None => (0..p.phis)
            .map(|j| TAU * j as f64 / p.phis as f64)
            .collect(),
    };
    let mut table = Table {
        columns: vec!["phi", "re_moment", "im_moment"],
        rows: Vec::with_capacity(phis.len()),
    };
    let mut worst = 0.0f64;
    for &phi in &phis {
        let psi = two_packet_state(&grid, &base.with_phi(phi))?;
        let m = fourier_moments(&psi, &v, 1)?.moment(1);
        worst = worst.max((m - C64::from_polar(0.5, phi)).norm());
        table.rows.push(vec![phi, m.re, m.im]);
    }
    let poly = polynomial_phase_insensitivity(&grid, &base, p.max_degree, &phis)?;
    let collapse = collapse_uncertainty_demo(&grid, &base.with_phi(p.collapse_phi), p.n_max)?;
    let metrics = BTreeMap::from([
        ("ell".to_string(), base.ell(&grid)),
        ("phase_law_residual".to_string(), worst),
        ("polynomial_deviation".to_string(), poly.max_deviation),
        ("collapse_max_moment".to_string(), collapse.after.max_abs()),
        ("window_weight".to_string(), collapse.window_weight),
    ]);
    Ok(Outcome {
        scenario: "doubleslit",
        metrics,
        checks: vec![
            Check::below("doubleslit.phase_law", worst, 1e-6),
            Check::below("doubleslit.polynomial", poly.max_deviation, 1e-8),
            Check::below("doubleslit.collapse", collapse.after.max_abs(), 1e-6),
        ],
        table,
    })
}

fn piston(p: &modclock::scenarios::PistonConfig) -> Result<Outcome, CliError> {
    let r = run_piston(p)?;
    let ratio = if r.predicted == 0.0 {
        f64::NAN
    } else {
        r.delta_arg / r.predicted
    };
    let mut checks = vec![Check::below("piston.wall_mass", r.wall_mass, 1e-6)];
    if r.predicted != 0.0 {
        checks.push(Check::below("piston.phase", (ratio - 1.0).abs(), 0.05));
    } else {
        checks.push(Check::below(
            "piston.static_phase",
            r.delta_arg.abs(),
            1e-10,
        ));
    }
    let metrics = BTreeMap::from([
        ("period".to_string(), r.period),
        ("revival".to_string(), r.revival),
        ("delta_t".to_string(), r.delta_t),
        ("d".to_string(), r.d as f64),
        ("displacement".to_string(), r.displacement),
        ("delta_arg".to_string(), r.delta_arg),
        ("predicted".to_string(), r.predicted),
        ("ratio".to_string(), ratio),
        ("wall_mass".to_string(), r.wall_mass),
        ("constraint".to_string(), r.constraint),
    ]);
    let table = Table {
        columns: vec!["t", "re_overlap", "im_overlap"],
        rows: r.series.iter().map(|s| vec![s.t, s.re, s.im]).collect(),
    };
    Ok(Outcome {
        scenario: "piston",
        metrics,
        checks,
        table,
    })
}

fn spin(p: &modclock::scenarios::SpinPulseConfig, regime: SpinRegime) -> Result<Outcome, CliError> {
    let r = run_spin(p, regime)?;
    let flip = match regime {
        SpinRegime::DetunedBare => Check::below("spin.max_flip", r.max_flip, 0.1),
        SpinRegime::Resonant | SpinRegime::DetunedCompensated => {
            Check::above("spin.max_flip", r.max_flip, 0.99)
        }
    };
    let metrics = BTreeMap::from([
        ("tau".to_string(), r.schedule.tau),
        ("tau_prime".to_string(), r.schedule.tau_prime),
        ("delta_t".to_string(), r.schedule.delta_t),
        ("d".to_string(), r.schedule.d as f64),
        ("max_flip".to_string(), r.max_flip),
        ("sigma_z_ratio".to_string(), r.sigma_z_ratio),
        ("energy_change".to_string(), r.energy_change),
        ("energy_quantum".to_string(), r.energy_quantum),
        ("granularity".to_string(), r.granularity),
        ("norm_drift".to_string(), r.norm_drift),
        ("constraint".to_string(), r.constraint),
    ]);
    let table = Table {
        columns: vec!["t", "p_flip"],
        rows: r
            .times
            .iter()
            .zip(&r.p_flip)
            .map(|(&t, &pf)| vec![t, pf])
            .collect(),
    };
    Ok(Outcome {
        scenario: "spin",
        metrics,
        checks: vec![flip, Check::below("spin.norm", r.norm_drift, 1e-10)],
        table,
    })
}
