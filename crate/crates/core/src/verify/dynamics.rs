use std::f64::consts::TAU;

use serde::Serialize;

use crate::clock::{
    seam_mass, wrapped_time_moments, ClockModel, ClockState, SEAM_MARGIN_TICKS, SEAM_MASS_TOL,
};
use crate::config::hbar;
use crate::opalg::{
    distance, hermitian_eig, inner, norm, unitary_exp, Operator, Sign, StateVector,
};
use crate::pwframe::{
    build_history, constraint_residual, effective_hamiltonian_b, modular_energy_expectation_a,
    HamiltonianSpec,
};
use crate::{Error, Result, C64};

use super::heisenberg_rhs;

/// Relative error below which finite-difference levels are at roundoff and
/// no order is fitted.
const ORDER_FLOOR: f64 = 1e-10;
/// Largest tolerated weight in the outer quarter of the clock's energy band.
const BAND_EDGE_TOL: f64 = 1e-2;

/// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` for consecutive levels.
pub fn observed_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RateCheck {
    pub dts: Vec<f64>,
    /// Central differences of `⟨O⟩` at each level.
    pub lhs: Vec<(f64, f64)>,
    /// `⟨−(i/ħ)[O, H_eff^B]⟩` at `t`.
    pub rhs: (f64, f64),
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    /// Order of the finest pair, if the errors are above roundoff.
    pub order: Option<f64>,
}

/// Compares `d⟨O⟩/dt_B` from central differences of exactly evolved states
/// with the Heisenberg right-hand side.
pub fn finite_difference_rate(
    spec: &HamiltonianSpec,
    o: &Operator,
    psi0: &StateVector,
    t: f64,
    dts: &[f64],
) -> Result<RateCheck> {
    if dts.len() < 3 {
        return Err(Error::param("dts", "need at least 3 refinement levels"));
    }
    if dts.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::param("dts", "steps must be positive"));
    }
    let h = effective_hamiltonian_b(spec)?;
    if psi0.layout() != h.layout() || o.layout() != h.layout() {
        return Err(Error::LayoutMismatch(format!(
            "state {} and operator {} vs {}",
            psi0.layout(),
            o.layout(),
            h.layout()
        )));
    }
    let eig = hermitian_eig(&h)?;
    let expect = |s: f64| -> Result<C64> {
        let psi = eig.evolve(psi0.amplitudes(), s)?;
        Ok(inner(&psi, &o.apply(&psi)?))
    };
    let psi_t = eig.evolve(psi0.amplitudes(), t)?;
    let rhs = inner(&psi_t, &heisenberg_rhs(o, &h)?.apply(&psi_t)?);
    let mut lhs = Vec::with_capacity(dts.len());
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let fd = (expect(t + dt)? - expect(t - dt)?) / (2.0 * dt);
        errors.push((fd - rhs).norm());
        lhs.push((fd.re, fd.im));
    }
    let orders = observed_orders(dts, &errors);
    let floor = ORDER_FLOOR * rhs.norm().max(1.0);
    let order = errors
        .iter()
        .all(|&e| e > floor)
        .then(|| *orders.last().expect("at least two levels"));
    Ok(RateCheck {
        dts: dts.to_vec(),
        lhs,
        rhs: (rhs.re, rhs.im),
        errors,
        orders,
        order,
    })
}

/// Weight of the clock amplitudes in the outer quarter of the energy band,
/// summed over the remaining factors.
pub fn band_edge_weight(clock: &ClockModel, amps: &[C64]) -> f64 {
    let d = clock.d();
    let rest = amps.len() / d;
    let mut edge = 0.0;
    let mut total = 0.0;
    for s in 0..rest {
        for j in 0..d {
            let mut z = C64::new(0.0, 0.0);
            for k in 0..d {
                z +=
                    amps[k * rest + s] * C64::from_polar(1.0, -TAU * (j * k % d) as f64 / d as f64);
            }
            let w = z.norm_sqr();
            total += w;
            // frequency index folded into [−d/2, d/2)
            let f = if j < d.div_ceil(2) { j } else { d - j };
            if 4 * f >= d {
                edge += w;
            }
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeFlowReport {
    /// `‖(−(i/ħ)[T_A, H_eff^B] − I)ψ‖ / ‖ψ‖`.
    pub residual: f64,
    pub seam_mass: f64,
    pub band_edge: f64,
    /// False when the state reaches the seam or the band edge.
    pub asserted: bool,
}

/// Time-flow residual on `clock_state ⊗ system`.
pub fn check_time_flow(
    spec: &HamiltonianSpec,
    clock_state: &ClockState,
    system: &StateVector,
) -> Result<TimeFlowReport> {
    let full = clock_state.state.tensor(system)?;
    let h = effective_hamiltonian_b(spec)?;
    let psi = full.amplitudes();
    let clock = spec.clock_a();
    let n = spec.system_dim();
    let times = clock.times();
    let t_apply = |v: &[C64]| -> Vec<C64> {
        v.iter()
            .enumerate()
            .map(|(i, z)| z * times[i / n])
            .collect()
    };
    let th = t_apply(&h.apply(psi)?);
    let ht = h.apply(&t_apply(psi))?;
    let k = C64::new(0.0, -1.0 / hbar());
    let r: Vec<C64> = (0..psi.len())
        .map(|i| k * (th[i] - ht[i]) - psi[i])
        .collect();
    let seam = seam_mass(clock, psi, None, SEAM_MARGIN_TICKS);
    let band_edge = band_edge_weight(clock, psi);
    Ok(TimeFlowReport {
        residual: norm(&r) / norm(psi),
        seam_mass: seam,
        band_edge,
        asserted: seam < SEAM_MASS_TOL && band_edge < BAND_EDGE_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VarianceReport {
    pub times: Vec<f64>,
    /// `⟨ΔT_A²⟩` with the cut moving along with the packet.
    pub variances: Vec<f64>,
    pub initial: f64,
    /// `max |v(t) − v(0)| / v(0)`, or the absolute drift for `v(0) = 0`.
    pub drift: f64,
    /// `max |⟨ΔT²(t)⟩ − ⟨ΔT²(t⁰) + 2(t−t⁰)(T(t⁰) − ⟨T(t⁰)⟩)⟩|`.
    pub relation_residual: f64,
    /// The packet touched the clock's own seam at some sampled time.
    pub seam_crossed: bool,
    /// Static-cut drift up to the first seam contact.
    pub static_drift: f64,
    /// Band-limited at the start.
    pub asserted: bool,
}

/// Evolves `clock_state ⊗ system` under `H_eff^B` over one clock period and
/// tracks the clock variance. Sampling times are multiples of
/// `period / n_times`.
pub fn check_variance_propagation(
    spec: &HamiltonianSpec,
    clock_state: &ClockState,
    system: &StateVector,
    n_times: usize,
) -> Result<VarianceReport> {
    if n_times == 0 {
        return Err(Error::param("n_times", "must be at least 1"));
    }
    let clock = spec.clock_a();
    let full = clock_state.state.tensor(system)?;
    let h = effective_hamiltonian_b(spec)?;
    let eig = hermitian_eig(&h)?;
    let (center0, v0) = wrapped_time_moments(clock, full.amplitudes(), clock_state.mean);
    let (_, static_v0) = crate::clock::time_moments(clock, full.amplitudes());
    // ⟨T(t⁰) − ⟨T(t⁰)⟩⟩ on the initial state, in the co-moving frame
    let (m0, _) = wrapped_time_moments(clock, full.amplitudes(), center0);
    let period = clock.period();
    let mut times = Vec::with_capacity(n_times + 1);
    let mut variances = Vec::with_capacity(n_times + 1);
    let mut drift = 0.0f64;
    let mut relation_residual = 0.0f64;
    let mut seam_crossed = false;
    let mut static_drift = 0.0f64;
    for j in 0..=n_times {
        let t = period * j as f64 / n_times as f64;
        let psi = eig.evolve(full.amplitudes(), t)?;
        let (_, v) = wrapped_time_moments(clock, &psi, center0 + t);
        let dev = (v - v0).abs();
        drift = drift.max(if v0 > 0.0 { dev / v0 } else { dev });
        let rhs = v0 + 2.0 * t * (m0 - center0);
        relation_residual = relation_residual.max((v - rhs).abs());
        if !seam_crossed {
            if seam_mass(clock, &psi, None, SEAM_MARGIN_TICKS) > SEAM_MASS_TOL {
                seam_crossed = true;
            } else {
                let (_, sv) = crate::clock::time_moments(clock, &psi);
                let sdev = (sv - static_v0).abs();
                static_drift = static_drift.max(if static_v0 > 0.0 {
                    sdev / static_v0
                } else {
                    sdev
                });
            }
        }
        times.push(t);
        variances.push(v);
    }
    let asserted = band_edge_weight(clock, full.amplitudes()) < BAND_EDGE_TOL;
    Ok(VarianceReport {
        times,
        variances,
        initial: v0,
        drift,
        relation_residual,
        seam_crossed,
        static_drift,
        asserted,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SignRelation {
    /// `max_k ‖ψ(t_k + τ) − e^{iφ}ψ(t_k)‖` over ticks with `k + q < d`.
    pub periodicity: f64,
    /// `φ` read off the clock side.
    pub phase: f64,
    /// `max_k |⟨e^{iH_Aτ/ħ}⟩^{t_k} − e^{iφ}|`.
    pub clock_residual: f64,
    /// `max_k |⟨ψ(t_k)|e^{iH_Sτ/ħ}|ψ(t_k)⟩ − e^{−iφ}|`.
    pub system_residual: f64,
}

/// Builds the history of `psi0` and checks that its clock-side and
/// system-side modular energies carry opposite phases.
pub fn periodic_sign_relation(
    spec: &HamiltonianSpec,
    psi0: &StateVector,
    q: i64,
) -> Result<SignRelation> {
    if spec.has_interaction() {
        return Err(Error::param(
            "spec",
            "sign relation needs a time-independent system",
        ));
    }
    let history = build_history(spec, psi0, C64::new(1.0, 0.0))?;
    let d = history.len();
    if q <= 0 || q as usize >= d {
        return Err(Error::param("q", format!("must lie in 1..{d}")));
    }
    let q_us = q as usize;
    let tau = q as f64 * history.delta_t();
    let z0 = modular_energy_expectation_a(&history, 0, q)?.value();
    let phase = z0.arg();
    let e_phi = C64::from_polar(1.0, phase);
    let u = unitary_exp(spec.h_s(), tau, Sign::Plus)?;
    let (mut periodicity, mut clock_residual, mut system_residual) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..d - q_us {
        let s = history.states();
        let shifted: Vec<C64> = s[k].amplitudes().iter().map(|z| z * e_phi).collect();
        periodicity = periodicity.max(distance(s[k + q_us].amplitudes(), &shifted));
        let a = modular_energy_expectation_a(&history, k, q)?.value();
        clock_residual = clock_residual.max((a - e_phi).norm());
        let b = inner(s[k].amplitudes(), &u.apply(s[k].amplitudes())?);
        system_residual = system_residual.max((b - e_phi.conj()).norm());
    }
    Ok(SignRelation {
        periodicity,
        phase,
        clock_residual,
        system_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub factors: Vec<usize>,
    pub values: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Interior Wheeler–DeWitt residual for clocks refined by each factor;
/// `build(f)` returns the Hamiltonian spec and initial state at refinement `f`.
pub fn constraint_convergence(
    factors: &[usize],
    build: impl Fn(usize) -> Result<(HamiltonianSpec, StateVector)>,
) -> Result<ConvergenceReport> {
    let mut values = Vec::with_capacity(factors.len());
    for &f in factors {
        let (spec, psi0) = build(f)?;
        let history = build_history(&spec, &psi0, C64::new(1.0, 0.0))?;
        values.push(constraint_residual(&history, &spec)?.max_interior);
    }
    let steps: Vec<f64> = factors.iter().map(|&f| 1.0 / f as f64).collect();
    Ok(ConvergenceReport {
        factors: factors.to_vec(),
        orders: observed_orders(&steps, &values),
        values,
    })
}

/// History error against a reference `reference` times finer, measured at
/// the coarsest level's ticks.
pub fn self_convergence(
    factors: &[usize],
    reference: usize,
    build: impl Fn(usize) -> Result<(HamiltonianSpec, StateVector)>,
) -> Result<ConvergenceReport> {
    let (spec, psi0) = build(reference)?;
    let reference_history = build_history(&spec, &psi0, C64::new(1.0, 0.0))?;
    let mut values = Vec::with_capacity(factors.len());
    let base = *factors
        .iter()
        .min()
        .ok_or_else(|| Error::param("factors", "empty"))?;
    if factors.iter().chain([&reference]).any(|f| f % base != 0) {
        return Err(Error::param(
            "factors",
            "refinements must be multiples of the coarsest",
        ));
    }
    let (spec, psi0) = build(base)?;
    let coarse_ticks = spec.clock_a().d();
    drop((spec, psi0));
    for &f in factors {
        let (spec, psi0) = build(f)?;
        let history = build_history(&spec, &psi0, C64::new(1.0, 0.0))?;
        let mut worst = 0.0f64;
        for k in 0..coarse_ticks {
            let a = history.states()[k * f / base].amplitudes();
            let b = reference_history.states()[k * reference / base].amplitudes();
            worst = worst.max(distance(a, b));
        }
        values.push(worst);
    }
    let steps: Vec<f64> = factors.iter().map(|&f| 1.0 / f as f64).collect();
    Ok(ConvergenceReport {
        factors: factors.to_vec(),
        orders: observed_orders(&steps, &values),
        values,
    })
}
