//! Finite cyclic clock.
//!
//! A `d`-level clock with tick `δt` has time eigenvalues `t_k = t0 + k·δt`
//! and a centered energy lattice `E_n = 2πħ(n − ⌊d/2⌋)/(d·δt)`. The energy
//! eigenvectors are `⟨t_k|E_n⟩ = e^{iE_n k δt/ħ}/√d`, which makes
//! `e^{−iHδt/ħ}|t_k⟩ = |t_{(k+1) mod d}⟩` an identity of the model rather
//! than an approximation.
//!
//! The canonical relation `[T, H] = iħ` only holds on states that are
//! band-limited and keep away from the wrap point `t0 + d·δt` (the seam).

use std::f64::consts::TAU;
use std::sync::OnceLock;

use crate::config::hbar;
use crate::opalg::{fourier_multiplier, norm, Factor, Operator, SpaceLayout, StateVector};
use crate::{Error, Result, C64};

/// Probability mass near the seam below which a clock state counts as
/// interior.
pub const SEAM_MASS_TOL: f64 = 1e-8;
/// Width of the seam exclusion zone, in ticks.
pub const SEAM_MARGIN_TICKS: usize = 4;

#[derive(Clone, Debug)]
pub struct ClockModel {
    d: usize,
    delta_t: f64,
    t0: f64,
    times: Vec<f64>,
    layout: SpaceLayout,
    time_op: OnceLock<Operator>,
    energy_op: OnceLock<Operator>,
    label: Factor,
}

pub fn make_clock(d: usize, delta_t: f64, t0: f64) -> Result<ClockModel> {
    ClockModel::new(d, delta_t, t0, Factor::A)
}

impl ClockModel {
    pub fn new(d: usize, delta_t: f64, t0: f64, label: Factor) -> Result<Self> {
        if d < 2 {
            return Err(Error::param(
                "d",
                format!("clock dimension must be at least 2, got {d}"),
            ));
        }
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(Error::param(
                "delta_t",
                format!("tick must be positive, got {delta_t}"),
            ));
        }
        if !t0.is_finite() {
            return Err(Error::param("t0", "origin must be finite"));
        }
        let layout = SpaceLayout::single(label, d)?;
        let times: Vec<f64> = (0..d).map(|k| t0 + k as f64 * delta_t).collect();
        Ok(Self {
            d,
            delta_t,
            t0,
            times,
            layout,
            time_op: OnceLock::new(),
            energy_op: OnceLock::new(),
            label,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn label(&self) -> Factor {
        self.label
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    /// Total period `d·δt`.
    pub fn period(&self) -> f64 {
        self.d as f64 * self.delta_t
    }

    /// `2πħ/(d·δt)`.
    pub fn energy_quantum(&self) -> f64 {
        TAU * hbar() / self.period()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k % self.d]
    }

    /// Centered energy lattice, ascending.
    pub fn energies(&self) -> Vec<f64> {
        crate::opalg::conjugate_lattice(self.d, self.delta_t)
    }

    /// Dense `T`, built on first use.
    pub fn time_operator(&self) -> Result<&Operator> {
        if let Some(op) = self.time_op.get() {
            return Ok(op);
        }
        let op = Operator::real_diagonal(self.layout.clone(), &self.times)?;
        Ok(self.time_op.get_or_init(|| op))
    }

    /// Dense `H`, built on first use.
    pub fn energy_operator(&self) -> Result<&Operator> {
        if let Some(op) = self.energy_op.get() {
            return Ok(op);
        }
        let op = fourier_multiplier(self.layout.clone(), self.delta_t, |e| e)?;
        Ok(self.energy_op.get_or_init(|| op))
    }

    /// Number of whole ticks in `tau`, if `tau` lies on the tick lattice.
    pub fn ticks_in(&self, tau: f64) -> Option<i64> {
        let q = tau / self.delta_t;
        let r = q.round();
        ((q - r).abs() < 1e-9 * q.abs().max(1.0)).then_some(r as i64)
    }

    /// Tick index whose time is nearest to `t` on the circle.
    pub fn nearest_tick(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.delta_t).round() as i64;
        k.rem_euclid(self.d as i64) as usize
    }

    /// Signed distance `t − center` mapped into `[−P/2, P/2)`.
    pub fn wrapped_offset(&self, t: f64, center: f64) -> f64 {
        let p = self.period();
        (t - center + 0.5 * p).rem_euclid(p) - 0.5 * p
    }
}

/// `e^{−iH·(steps·δt)/ħ}`: the cyclic permutation `|t_k⟩ ↦ |t_{k+steps}⟩`.
pub fn time_shift(clock: &ClockModel, steps: i64) -> Operator {
    let d = clock.d as i64;
    let perm: Vec<usize> = (0..d).map(|k| (k + steps).rem_euclid(d) as usize).collect();
    Operator::permutation(clock.layout().clone(), &perm).expect("cyclic shift is a permutation")
}

/// `e^{2πiT/τ}`: diagonal in the time basis. For `τ = d·δt/s` with integer
/// `s` it is the `s`-step ladder `|E_n⟩ ↦ |E_{n+s mod d}⟩` up to the global
/// phase `e^{2πi t0/τ}`.
pub fn modular_time_unitary(clock: &ClockModel, tau: f64) -> Result<Operator> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", format!("must be positive, got {tau}")));
    }
    let diag: Vec<C64> = clock
        .times
        .iter()
        .map(|&t| C64::from_polar(1.0, TAU * t / tau))
        .collect();
    let op = Operator::diagonal(clock.layout().clone(), &diag)?;
    op.mark_unitary()
}

/// Clock state together with its time moments (static cut at the seam).
#[derive(Clone, Debug)]
pub struct ClockState {
    pub state: StateVector,
    pub mean: f64,
    pub variance: f64,
}

/// `⟨T⟩` and `⟨ΔT²⟩` with the time operator's own cut at the seam.
pub fn time_moments(clock: &ClockModel, amps: &[C64]) -> (f64, f64) {
    marginal_moments(clock, amps, |t| t)
}

/// Time moments measured with the cut placed opposite `center`, i.e. the
/// circular moments of a packet located near `center`.
pub fn wrapped_time_moments(clock: &ClockModel, amps: &[C64], center: f64) -> (f64, f64) {
    let (mean_offset, var) = marginal_moments(clock, amps, |t| clock.wrapped_offset(t, center));
    (center + mean_offset, var)
}

fn marginal_moments(clock: &ClockModel, amps: &[C64], coord: impl Fn(f64) -> f64) -> (f64, f64) {
    let probs = clock_marginal(clock, amps);
    let total: f64 = probs.iter().sum();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, p) in probs.iter().enumerate() {
        let x = coord(clock.times[k]);
        m1 += p * x;
        m2 += p * x * x;
    }
    let mean = m1 / total;
    (mean, (m2 / total - mean * mean).max(0.0))
}

/// Marginal tick distribution of a state on `A` or on `A ⊗ rest` (clock
/// first).
pub fn clock_marginal(clock: &ClockModel, amps: &[C64]) -> Vec<f64> {
    let rest = amps.len() / clock.d;
    (0..clock.d)
        .map(|k| {
            amps[k * rest..(k + 1) * rest]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
        })
        .collect()
}

/// Probability within `margin` ticks of the seam, measured on a cut placed
/// opposite `center` (pass `None` for the clock's own seam).
pub fn seam_mass(clock: &ClockModel, amps: &[C64], center: Option<f64>, margin: usize) -> f64 {
    let probs = clock_marginal(clock, amps);
    let total: f64 = probs.iter().sum();
    let half = 0.5 * clock.period();
    let reach = margin as f64 * clock.delta_t;
    probs
        .iter()
        .enumerate()
        .filter(|&(k, _)| {
            let t = clock.times[k];
            match center {
                None => {
                    let from_start = t - clock.t0;
                    from_start < reach || clock.period() - from_start <= reach
                }
                Some(c) => half - clock.wrapped_offset(t, c).abs() <= reach,
            }
        })
        .map(|(_, p)| p)
        .sum::<f64>()
        / total
}

/// Periodically wrapped Gaussian `∝ e^{−(t_k − mean)²/4w²}`; widths below
/// `δt/10` are clamped there, which yields the nearest time eigenstate.
pub fn gaussian_clock_state(clock: &ClockModel, mean: f64, width: f64) -> Result<ClockState> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param(
            "width",
            format!("must be positive, got {width}"),
        ));
    }
    if !(mean >= clock.t0 && mean < clock.t0 + clock.period()) {
        return Err(Error::param(
            "mean",
            format!(
                "must lie in [{}, {}), got {mean}",
                clock.t0,
                clock.t0 + clock.period()
            ),
        ));
    }
    let w = width.max(clock.delta_t / 10.0);
    let amps: Vec<C64> = clock
        .times
        .iter()
        .map(|&t| {
            let x = clock.wrapped_offset(t, mean);
            C64::new((-x * x / (4.0 * w * w)).exp(), 0.0)
        })
        .collect();
    debug_assert!(norm(&amps) > 0.0);
    let state = StateVector::normalized(amps, clock.layout().clone())?;
    let (m, v) = time_moments(clock, state.amplitudes());
    Ok(ClockState {
        state,
        mean: m,
        variance: v,
    })
}
