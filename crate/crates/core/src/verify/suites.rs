//! Named groups of checks run by `modclock verify`.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use crate::clock::{gaussian_clock_state, make_clock};
use crate::config::hbar;
use crate::grid::GridSystem;
use crate::modvars::{cell_commutation_check, weyl_commutation_check, weyl_relation_residual};
use crate::opalg::{pauli, StateVector};
use crate::pwframe::{
    assemble_full_state, build_history, conserved_modular_energy_check, HamiltonianSpec,
};
use crate::scenarios::{
    collapse_uncertainty_demo, modular_momentum, polynomial_phase_insensitivity, run_piston,
    run_spin, spin_modular_energy_rates, spin_schedule, two_packet_state, DoubleSlitConfig,
    PistonConfig, SpinPulseConfig, SpinRegime,
};
use crate::{Error, Result};

use super::presets;
use super::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Exact operator identities.
    Identities,
    /// Evolution-based checks: time flow, variance, conservation, orders.
    Dynamics,
    /// The three physical settings.
    Scenarios,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Dynamics => "dynamics",
            Suite::Scenarios => "scenarios",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Suite::Identities,
            Suite::Dynamics,
            Suite::Scenarios,
            Suite::All,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| Error::param("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    /// Clock size for the generic clock checks.
    pub d: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { d: 64 }
    }
}

type Job = Box<dyn Fn() -> Result<Vec<Check>> + Send + Sync>;

/// Runs every check of the suite, independent groups concurrently, and
/// returns them in a fixed order.
pub fn run_suite(suite: Suite, opts: SuiteOptions) -> Result<VerificationReport> {
    if opts.d < 8 {
        return Err(Error::param("d", "clock checks need at least 8 ticks"));
    }
    crate::config::check_dim(opts.d * 2)?;
    let mut jobs: Vec<(&'static str, Job)> = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        jobs.extend(identity_jobs(opts));
    }
    if matches!(suite, Suite::Dynamics | Suite::All) {
        jobs.extend(dynamics_jobs(opts));
    }
    if matches!(suite, Suite::Scenarios | Suite::All) {
        jobs.extend(scenario_jobs());
    }
    let results: Vec<Vec<Check>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(name, job)| {
                let name = *name;
                scope.spawn(move || job().unwrap_or_else(|e| vec![Check::failed(name, &e)]))
            })
            .collect();
        handles
            .into_iter()
            .zip(&jobs)
            .map(|(h, (name, _))| {
                h.join().unwrap_or_else(|_| {
                    vec![Check::failed(
                        *name,
                        &Error::Scenario("check panicked".into()),
                    )]
                })
            })
            .collect()
    });
    Ok(VerificationReport {
        suite: suite.name().to_string(),
        checks: results.into_iter().flatten().collect(),
    })
}

fn job(
    name: &'static str,
    f: impl Fn() -> Result<Vec<Check>> + Send + Sync + 'static,
) -> (&'static str, Job) {
    (name, Box::new(f))
}

fn identity_jobs(opts: SuiteOptions) -> Vec<(&'static str, Job)> {
    let d = opts.d;
    vec![
        job("weyl", || {
            let g = GridSystem::new(64, 64.0, 1.0)?;
            let ell = 8.0 * g.dx();
            let full = TAU * hbar() / ell;
            Ok(vec![
                Check::below(
                    "weyl.full_cell",
                    weyl_commutation_check(&g, ell, full)?,
                    1e-10,
                ),
                Check::above(
                    "weyl.half_cell",
                    weyl_commutation_check(&g, ell, 0.5 * full)?,
                    0.5,
                ),
                Check::below(
                    "weyl.relation",
                    weyl_relation_residual(&g, ell, 0.5 * full)?,
                    1e-10,
                ),
            ])
        }),
        job("cells", move || {
            let clock = make_clock(d, 1.0, 0.0)?;
            let s = if d.is_multiple_of(4) { 4 } else { 1 };
            Ok(vec![Check::below(
                "cells.commuting",
                cell_commutation_check(&clock, s)?,
                1e-10,
            )])
        }),
        job("momentum", || {
            let g = GridSystem::new(128, 128.0, 1.0)?;
            let ell = 16.0 * g.dx();
            Ok(vec![
                Check::below(
                    "momentum.zero",
                    check_modular_momentum_identity(&g, potentials::zero, ell)?,
                    1e-10,
                ),
                Check::below(
                    "momentum.harmonic",
                    check_modular_momentum_identity(
                        &g,
                        potentials::harmonic(1.0, 0.02, 64.0),
                        ell,
                    )?,
                    1e-10,
                ),
                Check::below(
                    "momentum.double_well",
                    check_modular_momentum_identity(
                        &g,
                        potentials::double_well_array(1.0, 128.0, 4),
                        ell,
                    )?,
                    1e-10,
                ),
            ])
        }),
        job("energy", move || {
            let clock = make_clock(d, 0.1, 0.0)?;
            let c = pauli::sigma_x().scale(crate::C64::new(0.3, 0.0));
            let constant: crate::pwframe::Interaction = std::sync::Arc::new(move |_| c.clone());
            let h_s = pauli::sigma_z();
            let spec = HamiltonianSpec::with_mirrored_clock(clock, &h_s, Some(constant))?;
            let flat = check_modular_energy_identity(&spec, 3)?;
            Ok(vec![
                Check::below("energy.constant", flat.residual, 1e-10),
                Check::below("energy.constant_rhs", flat.rhs_norm, 1e-14),
            ])
        }),
        job("energy.spin", || {
            let spec = presets::spin_compact(SpinRegime::DetunedCompensated)?;
            let s = spin_schedule(&SpinPulseConfig::compact(), SpinRegime::DetunedCompensated)?;
            let q = spec
                .clock_a()
                .ticks_in(s.tau)
                .ok_or_else(|| Error::Incommensurate("τ".into()))?;
            let r = check_modular_energy_identity(&spec, q)?;
            let rates = spin_modular_energy_rates(&s)?;
            Ok(vec![
                Check::below("energy.spin", r.residual, 1e-10),
                Check::below("energy.spin_pulse_period", rates.tau_prime_rate, 1e-10),
                Check::below("energy.spin_reduced_x", rates.reduced_x_residual, 1e-10),
                Check::below("energy.spin_reduced_z", rates.reduced_z_residual, 1e-10),
            ])
        }),
        job("energy.piston", || {
            let (setup, spec) = presets::piston_compact()?;
            let r = check_modular_energy_identity(&spec, setup.ticks_per_period() as i64)?;
            let (window, ticks) = check_piston_window(&setup, setup.cfg.displacement)?;
            Ok(vec![
                Check::below("energy.piston", r.residual, 1e-10),
                Check::below("energy.piston_window", window, 1e-10)
                    .with_note(format!("{ticks} window ticks")),
            ])
        }),
        job("energy_time", move || {
            let clock = make_clock(d, 0.1, 0.0)?;
            let r = check_energy_time_commutators(&clock, 1, 1)?;
            Ok(vec![
                Check::below("energy_time.shift", r.shift_interior, 1e-8),
                Check::flagged("energy_time.shift_seam", r.shift_seam, clock.period()),
                Check::below("energy_time.ladder", r.ladder, 1e-2),
            ])
        }),
    ]
}

fn dynamics_jobs(opts: SuiteOptions) -> Vec<(&'static str, Job)> {
    let d = opts.d;
    vec![
        job("time_flow", move || {
            let spec = presets::driven_qubit(d, 1.0)?;
            let clock = spec.clock_a();
            let mid = 0.5 * clock.period();
            let band = gaussian_clock_state(clock, mid, 4.0)?;
            let r = check_time_flow(&spec, &band, &presets::qubit_plus())?;
            let sharp = gaussian_clock_state(clock, mid, 1e-3)?;
            let e = check_time_flow(&spec, &sharp, &presets::qubit_plus())?;
            Ok(vec![
                Check::below("time_flow.band_limited", r.residual, 1e-2).asserted_if(r.asserted),
                Check::flagged("time_flow.eigenstate", e.residual, 1e-2),
            ])
        }),
        job("time_rate", move || {
            let spec = presets::driven_qubit(d, 1.0)?;
            let clock = spec.clock_a();
            let cs = gaussian_clock_state(clock, 0.5 * clock.period(), 2.0)?;
            let psi = cs.state.tensor(&presets::qubit_plus())?;
            let t_a = presets::clock_time_observable(&spec)?;
            let r = finite_difference_rate(&spec, &t_a, &psi, 0.0, &[0.4, 0.2, 0.1])?;
            let worst = r
                .lhs
                .iter()
                .map(|(re, im)| ((re - 1.0).powi(2) + im * im).sqrt())
                .fold(0.0, f64::max);
            Ok(vec![Check::below("time_rate.clock", worst, 1e-8)])
        }),
        job("variance", || {
            let mut out = Vec::new();
            let spin = presets::spin_compact(SpinRegime::Resonant)?;
            let c = spin.clock_a();
            let cs = gaussian_clock_state(c, c.t0() + 0.3 * c.period(), 8.0 * c.delta_t())?;
            let one = StateVector::basis(pauli::identity().layout().clone(), 1)?;
            let r = check_variance_propagation(&spin, &cs, &one, 40)?;
            out.push(Check::below("variance.spin", r.drift, 1e-2).asserted_if(r.asserted));
            let (setup, piston) = presets::piston_compact()?;
            let c = piston.clock_a();
            let cs = gaussian_clock_state(c, c.t0() + 0.3 * c.period(), 4.0 * c.delta_t())?;
            let r = check_variance_propagation(&piston, &cs, &setup.psi0, 40)?;
            out.push(Check::below("variance.piston", r.drift, 1e-2).asserted_if(r.asserted));
            Ok(out)
        }),
        job("conservation", || {
            let spin = presets::spin_compact(SpinRegime::DetunedCompensated)?;
            let one = StateVector::basis(pauli::identity().layout().clone(), 1)?;
            let full =
                assemble_full_state(&build_history(&spin, &one, crate::C64::new(1.0, 0.0))?)?;
            let tau =
                spin_schedule(&SpinPulseConfig::compact(), SpinRegime::DetunedCompensated)?.tau;
            let a = conserved_modular_energy_check(&spin, &full, tau, 16)?;
            let (setup, piston) = presets::piston_compact()?;
            let full = assemble_full_state(&build_history(
                &piston,
                &setup.psi0,
                crate::C64::new(1.0, 0.0),
            )?)?;
            let b = conserved_modular_energy_check(&piston, &full, setup.period, 16)?;
            Ok(vec![
                Check::below("conservation.spin", a.drift, 1e-8),
                Check::below("conservation.piston", b.drift, 1e-8),
            ])
        }),
        job("sign_relation", || {
            let clock = make_clock(64, 0.1, 0.0)?;
            let h_s = pauli::sigma_z().scale(crate::C64::new(0.5 * hbar() * TAU / 1.6, 0.0));
            let spec = HamiltonianSpec::with_mirrored_clock(clock, &h_s, None)?;
            let up = StateVector::basis(pauli::identity().layout().clone(), 0)?;
            let r = periodic_sign_relation(&spec, &up, 16)?;
            Ok(vec![Check::below(
                "sign_relation",
                r.clock_residual.max(r.system_residual).max(r.periodicity),
                1e-8,
            )])
        }),
        job("constraint_order", || {
            let spin = presets::spin_smooth();
            let s = constraint_convergence(&[2, 4, 8], |f| {
                presets::spin_level(&spin, SpinRegime::DetunedCompensated, f)
            })?;
            let cfg = PistonConfig::default();
            let p = constraint_convergence(&[1, 2], |f| presets::piston_level(&cfg, f))?;
            Ok(vec![
                Check::near(
                    "constraint_order.spin",
                    *s.orders.last().expect("levels"),
                    2.0,
                    0.5,
                ),
                Check::near("constraint_order.piston", p.orders[0], 2.0, 0.5),
            ])
        }),
        job("self_convergence", || {
            let spin = presets::spin_smooth();
            let r = self_convergence(&[1, 2], 8, |f| {
                presets::spin_level(&spin, SpinRegime::DetunedCompensated, f)
            })?;
            let order = (r.values[0] / r.values[1]).log2();
            Ok(vec![Check::near("self_convergence.spin", order, 2.0, 0.5)])
        }),
        job("classical", || {
            let v = |x: f64| 2.0 * x * x;
            let r = classical_rate_convergence(v, 1.0, 0.0, 1.3, 0.9, 1.0, &[0.1, 0.05, 0.025])?;
            Ok(vec![Check::near(
                "classical.order",
                *r.orders.last().expect("levels"),
                4.0,
                0.5,
            )])
        }),
        job("nonlocality", || {
            let r =
                nonlocality_contrast(&SpinPulseConfig::compact(), SpinRegime::DetunedCompensated)?;
            Ok(vec![
                Check::above("nonlocality.quantum", r.rate_change, 0.1 * r.rate_scale),
                Check::below(
                    "nonlocality.classical",
                    r.classical_change,
                    f64::MIN_POSITIVE,
                ),
            ])
        }),
    ]
}

fn scenario_jobs() -> Vec<(&'static str, Job)> {
    vec![
        job("doubleslit", || {
            let g = GridSystem::new(256, 256.0, 1.0)?;
            let base = DoubleSlitConfig::for_grid(&g, 32, 0.0);
            let v = modular_momentum(&g, base.ell(&g))?;
            let mut worst = 0.0f64;
            for j in 0..12 {
                let phi = TAU * j as f64 / 12.0;
                let psi = two_packet_state(&g, &base.with_phi(phi))?;
                let m = crate::modvars::fourier_moments(&psi, &v, 1)?.moment(1);
                worst = worst.max((m - crate::C64::from_polar(0.5, phi)).norm());
            }
            let poly = polynomial_phase_insensitivity(&g, &base, 4, &[PI / 3.0, PI])?;
            let collapse = collapse_uncertainty_demo(&g, &base.with_phi(0.4), 5)?;
            Ok(vec![
                Check::below("doubleslit.phase_law", worst, 1e-6),
                Check::below("doubleslit.polynomial", poly.max_deviation, 1e-8),
                Check::below("doubleslit.collapse", collapse.after.max_abs(), 1e-6),
            ])
        }),
        job("piston", || {
            let cfg = PistonConfig::default();
            let one = run_piston(&cfg.with_displacement(1.0))?;
            let two = run_piston(&cfg.with_displacement(2.0))?;
            let rel = |r: &crate::scenarios::PistonRun| (r.delta_arg / r.predicted - 1.0).abs();
            Ok(vec![
                Check::below("piston.phase_pi_8", rel(&one), 0.05),
                Check::below("piston.phase_pi_4", rel(&two), 0.05),
                Check::below(
                    "piston.linearity",
                    (two.delta_arg / one.delta_arg / 2.0 - 1.0).abs(),
                    0.05,
                ),
            ])
        }),
        job("spin", || {
            let cfg = SpinPulseConfig::default();
            let res = run_spin(&cfg, SpinRegime::Resonant)?;
            let bare = run_spin(&cfg, SpinRegime::DetunedBare)?;
            let comp = run_spin(&cfg, SpinRegime::DetunedCompensated)?;
            let norm = res.norm_drift.max(bare.norm_drift).max(comp.norm_drift);
            Ok(vec![
                Check::above("spin.resonant", res.max_flip, 0.99),
                Check::below("spin.detuned_bare", bare.max_flip, 0.1),
                Check::above("spin.detuned_compensated", comp.max_flip, 0.99),
                Check::below("spin.norm", norm, 1e-10),
                Check::above("spin.granularity_compensated", comp.granularity, 0.1),
                Check::below("spin.granularity_bare", bare.granularity, 0.1),
            ])
        }),
    ]
}
