use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clock::make_clock;
use crate::config::hbar;
use crate::opalg::{expectation, pauli, Factor, Operator, SpaceLayout, StateVector};
use crate::pwframe::{
    build_history, clock_modular_energy, clock_shift_rate, constraint_residual,
    effective_hamiltonian_b, HamiltonianSpec, HistoryState, Interaction,
};
use crate::{Error, Result, C64};

/// Largest pulse width as a fraction of the pulse period.
const MAX_DUTY: f64 = 0.02;
/// Smallest detuning `|τ′/τ − n|` in the detuned regimes.
const MIN_DETUNING: f64 = 0.1;
/// Tolerance for snapping clock times onto tick indices.
const TICK_SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinRegime {
    Resonant,
    DetunedBare,
    DetunedCompensated,
}

impl SpinRegime {
    pub const ALL: [SpinRegime; 3] = [
        SpinRegime::Resonant,
        SpinRegime::DetunedBare,
        SpinRegime::DetunedCompensated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpinRegime::Resonant => "resonant",
            SpinRegime::DetunedBare => "detuned_bare",
            SpinRegime::DetunedCompensated => "detuned_compensated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    #[default]
    Rect,
    /// `sin²` window vanishing at both edges.
    Hann,
}

impl PulseShape {
    /// Mean of the window over its width.
    fn mean(self) -> f64 {
        match self {
            PulseShape::Rect => 1.0,
            PulseShape::Hann => 0.5,
        }
    }

    /// Window value at fractional position `u ∈ [0, 1)`.
    fn eval(self, u: f64) -> f64 {
        match self {
            PulseShape::Rect => 1.0,
            PulseShape::Hann => (PI * u).sin().powi(2),
        }
    }
}

/// Spin-½ in a static field `B₀ẑ` kicked by periodic `x` and `z` pulses.
/// Pulse timing is given in clock ticks within one pulse period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinPulseConfig {
    pub b0: f64,
    pub mu: f64,
    /// `τ′/τ` in the resonant regime; must be a positive integer.
    pub resonant_multiple: usize,
    /// `τ′/τ` in the detuned regimes.
    pub detuning_ratio: f64,
    pub ticks_per_period: usize,
    pub n_periods: usize,
    pub pulse_ticks: usize,
    /// Rotation per `x` pulse; `π/n_periods` when absent.
    pub x_angle: Option<f64>,
    pub x_offset: usize,
    pub z_offset: usize,
    pub shape: PulseShape,
}

impl Default for SpinPulseConfig {
    fn default() -> Self {
        Self {
            b0: TAU,
            mu: 1.0,
            resonant_multiple: 1,
            detuning_ratio: 1.5,
            ticks_per_period: 150,
            n_periods: 20,
            pulse_ticks: 3,
            x_angle: None,
            x_offset: 1,
            z_offset: 75,
            shape: PulseShape::Rect,
        }
    }
}

impl SpinPulseConfig {
    /// Few periods with one-tick pulses, for dense `A ⊗ S` checks.
    pub fn compact() -> Self {
        Self {
            ticks_per_period: 60,
            n_periods: 4,
            pulse_ticks: 1,
            z_offset: 30,
            ..Self::default()
        }
    }

    /// Same physical schedule on a clock `factor` times finer.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            ticks_per_period: self.ticks_per_period * factor,
            pulse_ticks: self.pulse_ticks * factor,
            x_offset: self.x_offset * factor,
            z_offset: self.z_offset * factor,
            ..self.clone()
        }
    }

    pub fn tau(&self) -> f64 {
        TAU / (self.mu * self.b0)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("b0", self.b0), ("mu", self.mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if self.n_periods == 0 || self.resonant_multiple == 0 {
            return Err(Error::param("n_periods", "need at least one period"));
        }
        if self.pulse_ticks == 0 {
            return Err(Error::param("pulse_ticks", "pulses need at least one tick"));
        }
        let tpp = self.ticks_per_period;
        if self.pulse_ticks as f64 > MAX_DUTY * tpp as f64 + 1e-12 {
            return Err(Error::param(
                "pulse_ticks",
                format!("pulse width exceeds {MAX_DUTY} of the pulse period"),
            ));
        }
        let x = self.x_offset..self.x_offset + self.pulse_ticks;
        let z = self.z_offset..self.z_offset + self.pulse_ticks;
        if x.end > tpp || z.end > tpp {
            return Err(Error::param(
                "z_offset",
                "pulses must fit inside one period",
            ));
        }
        if x.start < z.end && z.start < x.end {
            return Err(Error::Scenario("x and z pulse supports overlap".into()));
        }
        if let Some(a) = self.x_angle {
            if !a.is_finite() {
                return Err(Error::param("x_angle", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Fully resolved pulse schedule for one regime.
#[derive(Clone, Debug, Serialize)]
pub struct SpinSchedule {
    pub regime: SpinRegime,
    pub b0: f64,
    pub mu: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub delta_t: f64,
    pub d: usize,
    pub ticks_per_period: usize,
    pub pulse_ticks: usize,
    pub x_offset: usize,
    pub z_offset: usize,
    pub shape: PulseShape,
    pub a_x: f64,
    pub a_z: f64,
    /// Rotation per `z` pulse.
    pub theta_z: f64,
}

impl SpinSchedule {
    fn window(&self, t: f64, offset: usize) -> f64 {
        let mut u = t / self.delta_t;
        if (u - u.round()).abs() < TICK_SNAP {
            u = u.round();
        }
        let phase = u.rem_euclid(self.ticks_per_period as f64) - offset as f64;
        let w = self.pulse_ticks as f64;
        if (0.0..w).contains(&phase) {
            self.shape.eval(phase / w)
        } else {
            0.0
        }
    }

    pub fn b_x(&self, t: f64) -> f64 {
        self.a_x * self.window(t, self.x_offset)
    }

    pub fn b_z(&self, t: f64) -> f64 {
        self.a_z * self.window(t, self.z_offset)
    }

    /// `(ħ/2)μ[B_x(t)σ_x + B_z(t)σ_z]`.
    pub fn interaction(&self, t: f64) -> Operator {
        let k = 0.5 * hbar() * self.mu;
        let (bx, bz) = (self.b_x(t), self.b_z(t));
        let l = SpaceLayout::single(Factor::S, 2).expect("qubit layout");
        Operator::from_rows(
            l,
            &[
                vec![C64::new(k * bz, 0.0), C64::new(k * bx, 0.0)],
                vec![C64::new(k * bx, 0.0), C64::new(-k * bz, 0.0)],
            ],
        )
        .expect("2×2 rows")
    }

    /// `(ħ/2)μB₀σ_z`.
    pub fn system_hamiltonian(&self) -> Operator {
        pauli::sigma_z().scale(C64::new(0.5 * hbar() * self.mu * self.b0, 0.0))
    }
}

pub fn spin_schedule(cfg: &SpinPulseConfig, regime: SpinRegime) -> Result<SpinSchedule> {
    cfg.validate()?;
    let tau = cfg.tau();
    let ratio = match regime {
        SpinRegime::Resonant => cfg.resonant_multiple as f64,
        SpinRegime::DetunedBare | SpinRegime::DetunedCompensated => {
            let r = cfg.detuning_ratio;
            if !(r > 0.0 && r.is_finite()) || (r - r.round()).abs() < MIN_DETUNING {
                return Err(Error::param(
                    "detuning_ratio",
                    format!("τ′/τ = {r} must be at least {MIN_DETUNING} away from an integer"),
                ));
            }
            r
        }
    };
    let tau_prime = ratio * tau;
    let delta_t = tau_prime / cfg.ticks_per_period as f64;
    let width = cfg.pulse_ticks as f64 * delta_t;
    let area = cfg.mu * width * cfg.shape.mean();
    let x_angle = cfg.x_angle.unwrap_or(PI / cfg.n_periods as f64);
    let theta_z = match regime {
        SpinRegime::DetunedCompensated => {
            let mut th = -(cfg.mu * cfg.b0 * tau_prime).rem_euclid(TAU);
            if th < -PI {
                th += TAU;
            }
            th
        }
        _ => 0.0,
    };
    Ok(SpinSchedule {
        regime,
        b0: cfg.b0,
        mu: cfg.mu,
        tau,
        tau_prime,
        delta_t,
        d: cfg.ticks_per_period * cfg.n_periods,
        ticks_per_period: cfg.ticks_per_period,
        pulse_ticks: cfg.pulse_ticks,
        x_offset: cfg.x_offset,
        z_offset: cfg.z_offset,
        shape: cfg.shape,
        a_x: x_angle / area,
        a_z: theta_z / area,
        theta_z,
    })
}

pub fn spin_spec(schedule: &SpinSchedule) -> Result<HamiltonianSpec> {
    let clock = make_clock(schedule.d, schedule.delta_t, 0.0)?;
    let s = schedule.clone();
    let h_int: Interaction = Arc::new(move |t| s.interaction(t));
    HamiltonianSpec::with_mirrored_clock(clock, &schedule.system_hamiltonian(), Some(h_int))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpinRun {
    pub schedule: SpinSchedule,
    pub times: Vec<f64>,
    /// Population of `|0⟩` for the spin prepared in `|1⟩`.
    pub p_flip: Vec<f64>,
    pub max_flip: f64,
    /// Time average of `⟨σ_z⟩` over its initial value.
    pub sigma_z_ratio: f64,
    pub norm_drift: f64,
    /// `⟨H_S⟩` at the end of the train minus its initial value.
    pub energy_change: f64,
    /// `2πħ/τ′`.
    pub energy_quantum: f64,
    /// Distance of `energy_change/energy_quantum` from the nearest integer.
    pub granularity: f64,
    /// Largest interior constraint residual.
    pub constraint: f64,
    #[serde(skip)]
    pub history: HistoryState,
}

pub fn run_spin(cfg: &SpinPulseConfig, regime: SpinRegime) -> Result<SpinRun> {
    let schedule = spin_schedule(cfg, regime)?;
    let spec = spin_spec(&schedule)?;
    let psi0 = StateVector::basis(SpaceLayout::single(Factor::S, 2)?, 1)?;
    let history = build_history(&spec, &psi0, C64::new(1.0, 0.0))?;
    let sz = pauli::sigma_z().with_layout(psi0.layout().clone())?;
    let h_s = spec.h_s();

    let mut p_flip = Vec::with_capacity(history.len());
    let mut sz_sum = 0.0;
    let mut norm_drift = 0.0f64;
    for s in history.states() {
        let a = s.amplitudes();
        p_flip.push(a[0].norm_sqr());
        sz_sum += expectation(s, &sz)?.re;
        norm_drift = norm_drift.max((crate::opalg::norm(a) - 1.0).abs());
    }
    let sz0 = expectation(&psi0, &sz)?.re;
    let last = history.states().last().expect("non-empty history");
    let energy_change = expectation(last, h_s)?.re - expectation(&psi0, h_s)?.re;
    let energy_quantum = TAU * hbar() / schedule.tau_prime;
    let units = energy_change / energy_quantum;
    Ok(SpinRun {
        times: history.clock().times().to_vec(),
        max_flip: p_flip.iter().copied().fold(0.0, f64::max),
        sigma_z_ratio: sz_sum / history.len() as f64 / sz0,
        norm_drift,
        energy_change,
        energy_quantum,
        granularity: (units - units.round()).abs(),
        constraint: constraint_residual(&history, &spec)?.max_interior,
        p_flip,
        schedule,
        history,
    })
}

/// Operator-valued rates `−(i/ħ)[e^{iH_Aθ/ħ}, H_eff^B]` for `θ = τ′` and
/// `θ = τ`.
#[derive(Clone, Debug, Serialize)]
pub struct SpinRateReport {
    /// `‖rate(τ′)‖_max`.
    pub tau_prime_rate: f64,
    /// `‖rate(τ) − (−iμ/2)[ΔB_x σ_x + ΔB_z σ_z]e^{iH_Aτ/ħ}‖_max`.
    pub tau_identity_residual: f64,
    /// `‖rate(τ)‖_max`, for scale.
    pub tau_rate_scale: f64,
    /// Reduced form where `B_x(t) = 0`: `−(iμ/2)[B_x(t+τ)σ_x − B_z(t)σ_z]`.
    pub reduced_x_residual: f64,
    pub reduced_x_ticks: usize,
    /// Reduced form where `B_x(t+τ) = 0`: `−(iμ/2)[B_z(t+τ)σ_z − B_x(t)σ_x]`.
    pub reduced_z_residual: f64,
    pub reduced_z_ticks: usize,
}

pub fn spin_modular_energy_rates(schedule: &SpinSchedule) -> Result<SpinRateReport> {
    let spec = spin_spec(schedule)?;
    let clock = spec.clock_a().clone();
    let d = clock.d();
    let q_prime = clock
        .ticks_in(schedule.tau_prime)
        .ok_or_else(|| Error::Incommensurate("τ′ is not on the clock lattice".into()))?;
    let q = clock.ticks_in(schedule.tau).ok_or_else(|| {
        Error::Incommensurate(format!(
            "τ = {} is not a multiple of δt = {}",
            schedule.tau, schedule.delta_t
        ))
    })?;
    let h_eff = effective_hamiltonian_b(&spec)?;
    let tau_prime_rate = clock_shift_rate(&spec, &h_eff, q_prime)?.max_norm();

    let rate = clock_shift_rate(&spec, &h_eff, q)?;
    let w = clock_modular_energy(&spec, q)?;
    let delta = spec
        .interaction_operator(q)?
        .try_sub(&spec.interaction_operator(0)?)?;
    let rhs = delta.try_mul(&w)?.scale(C64::new(0.0, -1.0 / hbar()));
    let tau_identity_residual = rate.max_abs_diff(&rhs)?;

    let sx = pauli::sigma_x();
    let sz = pauli::sigma_z();
    let k_mu = C64::new(0.0, -0.5 * schedule.mu);
    let mut reduced = [(0.0f64, 0usize), (0.0f64, 0usize)];
    for k in 0..d {
        let t = clock.time(k);
        let j = (k + q as usize) % d;
        let t_next = clock.time(j);
        let (bx, bz) = (schedule.b_x(t), schedule.b_z(t));
        let (bx_n, bz_n) = (schedule.b_x(t_next), schedule.b_z(t_next));
        let forms = [
            (bx == 0.0 && bz_n == 0.0 && bx_n != 0.0, bx_n, -bz),
            (bx_n == 0.0 && bz == 0.0 && bz_n != 0.0, -bx, bz_n),
        ];
        for (slot, (applies, cx, cz)) in forms.into_iter().enumerate() {
            if !applies {
                continue;
            }
            let block = sx
                .scale(C64::new(cx, 0.0))
                .try_add(&sz.scale(C64::new(cz, 0.0)))?
                .scale(k_mu);
            let mut worst = 0.0f64;
            for col_tick in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        let want = if col_tick == j {
                            block.get(a, b)
                        } else {
                            C64::new(0.0, 0.0)
                        };
                        let got = rate.get(2 * k + a, 2 * col_tick + b);
                        worst = worst.max((got - want).norm());
                    }
                }
            }
            reduced[slot].0 = reduced[slot].0.max(worst);
            reduced[slot].1 += 1;
        }
    }
    Ok(SpinRateReport {
        tau_prime_rate,
        tau_identity_residual,
        tau_rate_scale: rate.max_norm(),
        reduced_x_residual: reduced[0].0,
        reduced_x_ticks: reduced[0].1,
        reduced_z_residual: reduced[1].0,
        reduced_z_ticks: reduced[1].1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_windows_are_disjoint_and_tick_aligned() {
        let s = spin_schedule(&SpinPulseConfig::default(), SpinRegime::DetunedCompensated).unwrap();
        let mut x_ticks = 0;
        let mut z_ticks = 0;
        for k in 0..s.d {
            let t = k as f64 * s.delta_t;
            assert_eq!(s.b_x(t) * s.b_z(t), 0.0);
            x_ticks += usize::from(s.b_x(t) != 0.0);
            z_ticks += usize::from(s.b_z(t) != 0.0);
        }
        assert_eq!(x_ticks, 3 * 20);
        assert_eq!(z_ticks, 3 * 20);
        assert!((s.theta_z + PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_schedules_are_rejected() {
        let cfg = SpinPulseConfig {
            z_offset: 2,
            ..Default::default()
        };
        assert!(matches!(
            spin_schedule(&cfg, SpinRegime::Resonant),
            Err(Error::Scenario(_))
        ));
        let cfg = SpinPulseConfig {
            pulse_ticks: 4,
            ..Default::default()
        };
        assert!(spin_schedule(&cfg, SpinRegime::Resonant).is_err());
        let cfg = SpinPulseConfig {
            detuning_ratio: 2.05,
            ..Default::default()
        };
        assert!(spin_schedule(&cfg, SpinRegime::DetunedBare).is_err());
    }

    #[test]
    fn no_x_field_means_no_flip() {
        let cfg = SpinPulseConfig {
            x_angle: Some(0.0),
            n_periods: 3,
            ..SpinPulseConfig::default()
        };
        let run = run_spin(&cfg, SpinRegime::Resonant).unwrap();
        assert_eq!(run.max_flip, 0.0);
        assert_eq!(run.sigma_z_ratio, 1.0);
    }

    #[test]
    fn regimes_flip_or_not() {
        let cfg = SpinPulseConfig::default();
        let res = run_spin(&cfg, SpinRegime::Resonant).unwrap();
        assert!(res.max_flip >= 0.99, "{}", res.max_flip);
        let bare = run_spin(&cfg, SpinRegime::DetunedBare).unwrap();
        assert!(bare.max_flip <= 0.1, "{}", bare.max_flip);
        assert!(
            (0.9..=1.0).contains(&bare.sigma_z_ratio),
            "{}",
            bare.sigma_z_ratio
        );
        let comp = run_spin(&cfg, SpinRegime::DetunedCompensated).unwrap();
        assert!(comp.max_flip >= 0.99, "{}", comp.max_flip);
        for r in [&res, &bare, &comp] {
            assert!(r.norm_drift < 1e-10);
        }
        assert!(comp.granularity > 0.1, "{}", comp.granularity);
        assert!(bare.granularity < 0.1, "{}", bare.granularity);
    }

    #[test]
    fn pulse_period_rate_vanishes() {
        let s = spin_schedule(&SpinPulseConfig::compact(), SpinRegime::DetunedCompensated).unwrap();
        let r = spin_modular_energy_rates(&s).unwrap();
        assert!(r.tau_prime_rate < 1e-10, "{r:?}");
        assert!(r.tau_identity_residual < 1e-10, "{r:?}");
        assert!(r.tau_rate_scale > 1.0);
        assert!(r.reduced_x_ticks > 0 && r.reduced_z_ticks > 0, "{r:?}");
        assert!(
            r.reduced_x_residual < 1e-10 && r.reduced_z_residual < 1e-10,
            "{r:?}"
        );
    }
}
