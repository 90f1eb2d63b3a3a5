use serde::Serialize;

use super::{clock_split, HamiltonianSpec};
use crate::clock::ClockModel;
use crate::opalg::{hermitian_eig, norm, Eigen, Factor, Operator, Sign, SpaceLayout, StateVector};
use crate::{Error, Result, C64};

/// Norm below which a tick of a history state counts as empty.
const ZERO_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// `e^{−i[H_S + H_int(t_k + δt/2)]δt/ħ}` per tick.
    Midpoint,
}

/// Conditional system states `|ψ(t_k)⟩`, `k = 0..d`.
#[derive(Clone, Debug)]
pub struct HistoryState {
    clock: ClockModel,
    states: Vec<StateVector>,
    propagators: Vec<Operator>,
    step: Vec<usize>,
    integrator: Integrator,
}

impl HistoryState {
    pub fn clock(&self) -> &ClockModel {
        &self.clock
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn delta_t(&self) -> f64 {
        self.clock.delta_t()
    }

    /// One-step propagator from tick `k` to `k + 1`.
    pub fn propagator(&self, k: usize) -> &Operator {
        &self.propagators[self.step[k]]
    }

    /// Number of distinct one-step propagators.
    pub fn distinct_propagators(&self) -> usize {
        self.propagators.len()
    }

    /// `max_k ‖ψ(t_{k+1}) − U_k ψ(t_k)‖`.
    pub fn step_consistency(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..self.len() - 1 {
            let next = self.propagator(k).apply(self.states[k].amplitudes())?;
            worst = worst.max(crate::opalg::distance(
                &next,
                self.states[k + 1].amplitudes(),
            ));
        }
        Ok(worst)
    }
}

/// Midpoint-rule history. Consecutive ticks with identical step Hamiltonians
/// are evolved from the start of the run through one eigendecomposition, so
/// a time-independent history matches `e^{−iH_S t_k/ħ}ψ0` to roundoff.
pub fn build_history(
    spec: &HamiltonianSpec,
    psi0: &StateVector,
    phase0: C64,
) -> Result<HistoryState> {
    let clock = spec.clock_a().clone();
    if psi0.layout() != spec.h_s().layout() {
        return Err(Error::LayoutMismatch(format!(
            "initial state {} vs system {}",
            psi0.layout(),
            spec.h_s().layout()
        )));
    }
    let first = psi0.clone().with_phase(phase0)?;
    let d = clock.d();
    let dt = clock.delta_t();

    let mut hamiltonians: Vec<Operator> = Vec::new();
    let mut eigs: Vec<StepSolver> = Vec::new();
    let mut step = Vec::with_capacity(d - 1);
    for k in 0..d - 1 {
        let h = spec.system_hamiltonian_at(clock.time(k) + 0.5 * dt)?;
        let idx = match hamiltonians.iter().rposition(|known| *known == h) {
            Some(i) => i,
            None => {
                eigs.push(StepSolver::new(&h)?);
                hamiltonians.push(h);
                hamiltonians.len() - 1
            }
        };
        step.push(idx);
    }

    let mut states = Vec::with_capacity(d);
    states.push(first);
    let mut run_start = 0;
    for k in 0..d - 1 {
        if k > 0 && step[k] != step[k - 1] {
            run_start = k;
        }
        let eig = &eigs[step[k]];
        let elapsed = (k + 1 - run_start) as f64 * dt;
        let amps = eig.evolve(states[run_start].amplitudes(), elapsed)?;
        states.push(renormalize(amps, psi0.layout())?);
    }
    let propagators = eigs
        .iter()
        .map(|e| e.propagator(dt, psi0.layout()))
        .collect::<Result<_>>()?;
    Ok(HistoryState {
        clock,
        states,
        propagators,
        step,
        integrator: Integrator::Midpoint,
    })
}

/// Diagonal step Hamiltonians are exponentiated entrywise, which keeps
/// `H = 0` steps bit-exact.
enum StepSolver {
    Diagonal(Vec<f64>),
    Spectral(Eigen),
}

impl StepSolver {
    fn new(h: &Operator) -> Result<Self> {
        Ok(match h.diagonal_entries() {
            Some(diag) => StepSolver::Diagonal(diag.iter().map(|z| z.re).collect()),
            None => StepSolver::Spectral(hermitian_eig(h)?),
        })
    }

    fn evolve(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        match self {
            StepSolver::Diagonal(diag) => {
                let w = -t / crate::config::hbar();
                Ok(psi
                    .iter()
                    .zip(diag)
                    .map(|(z, &e)| {
                        if e == 0.0 {
                            *z
                        } else {
                            z * C64::from_polar(1.0, w * e)
                        }
                    })
                    .collect())
            }
            StepSolver::Spectral(eig) => eig.evolve(psi, t),
        }
    }

    fn propagator(&self, dt: f64, layout: &SpaceLayout) -> Result<Operator> {
        match self {
            StepSolver::Diagonal(diag) => {
                let w = -dt / crate::config::hbar();
                let phases: Vec<C64> = diag.iter().map(|&e| C64::from_polar(1.0, w * e)).collect();
                Operator::diagonal(layout.clone(), &phases)
            }
            StepSolver::Spectral(eig) => Ok(eig.exp_i(dt, Sign::Minus)),
        }
    }
}

fn renormalize(amps: Vec<C64>, layout: &SpaceLayout) -> Result<StateVector> {
    let n = norm(&amps);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm: n });
    }
    if (n - 1.0).abs() <= crate::opalg::NORM_TOL {
        StateVector::new(amps, layout.clone())
    } else {
        StateVector::normalized(amps, layout.clone())
    }
}

/// Wheeler–DeWitt residual per tick.
#[derive(Clone, Debug, Serialize)]
pub struct ConstraintReport {
    pub per_tick: Vec<f64>,
    /// Maximum over `k = 1..d−1`.
    pub max_interior: f64,
    /// Wrapped central differences at `k = 0` and `k = d − 1`; never asserted.
    pub seam: (f64, f64),
}

/// `‖iħ(ψ_{k+1} − ψ_{k−1})/2δt − [H_S + H_int(t_k)]ψ_k‖` at every tick.
pub fn constraint_residual(
    history: &HistoryState,
    spec: &HamiltonianSpec,
) -> Result<ConstraintReport> {
    let d = history.len();
    if d < 3 {
        return Err(Error::param(
            "d",
            "constraint residual needs at least 3 ticks",
        ));
    }
    let clock = history.clock();
    let hbar = crate::config::hbar();
    let dt = clock.delta_t();
    let s = history.states();
    let mut per_tick = Vec::with_capacity(d);
    for k in 0..d {
        let prev = s[(k + d - 1) % d].amplitudes();
        let next = s[(k + 1) % d].amplitudes();
        let h = spec.system_hamiltonian_at(clock.time(k))?;
        let hpsi = h.apply(s[k].amplitudes())?;
        let scale = C64::new(0.0, hbar / (2.0 * dt));
        let r: f64 = next
            .iter()
            .zip(prev)
            .zip(&hpsi)
            .map(|((a, b), hp)| (scale * (a - b) - hp).norm_sqr())
            .sum::<f64>()
            .sqrt();
        per_tick.push(r);
    }
    let max_interior = per_tick[1..d - 1].iter().copied().fold(0.0, f64::max);
    Ok(ConstraintReport {
        seam: (per_tick[0], per_tick[d - 1]),
        per_tick,
        max_interior,
    })
}

/// `|Ψ⟩⟩ = d^{−1/2} Σ_k |t_k⟩ ⊗ |ψ(t_k)⟩` on `[A:d, S:n]`.
pub fn assemble_full_state(history: &HistoryState) -> Result<StateVector> {
    let d = history.len();
    let sys = history.states()[0].layout();
    let layout = SpaceLayout::single(Factor::A, d)?.concat(sys)?;
    let w = 1.0 / (d as f64).sqrt();
    let amps = history
        .states()
        .iter()
        .flat_map(|s| s.amplitudes().iter().map(move |z| z * w))
        .collect();
    StateVector::normalized(amps, layout)
}

#[derive(Clone, Debug)]
pub struct ConditionalState {
    pub state: StateVector,
    /// `‖⟨t_k|Ψ⟩⟩‖²` before renormalization.
    pub weight: f64,
}

/// `⟨t_k|Ψ⟩⟩`, renormalized.
pub fn conditional_state(full: &StateVector, k: usize) -> Result<ConditionalState> {
    let (d, n) = clock_split(full.layout())?;
    if k >= d {
        return Err(Error::param("k", format!("tick {k} out of range 0..{d}")));
    }
    let block = full.amplitudes()[k * n..(k + 1) * n].to_vec();
    let weight = norm(&block).powi(2);
    if weight.sqrt() <= ZERO_WEIGHT {
        return Err(Error::ZeroWeight { tick: k });
    }
    let rest = SpaceLayout::new(full.layout().factors()[1..].iter().copied())?;
    Ok(ConditionalState {
        state: StateVector::normalized(block, rest)?,
        weight,
    })
}
