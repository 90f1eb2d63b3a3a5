//! Page–Wootters machinery on `A ⊗ S`.
//!
//! Clock `B` never interacts with anything (`H_BS ≡ 0` and `H_int` does not
//! depend on `T_B`), so it stays in a product state and is kept only as
//! bookkeeping: its time parameter `t_B` is the evolution parameter of the
//! joint `A ⊗ S` state under `H_eff^B = H_A + H_S + H_int(T_A)`.
//!
//! Conditional states are taken with clock `A` as the first tensor factor.

mod history;

pub use history::{
    assemble_full_state, build_history, conditional_state, constraint_residual, ConditionalState,
    ConstraintReport, HistoryState, Integrator,
};

use std::fmt;
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::clock::{time_shift, ClockModel};
use crate::config::{check_dim, hbar};
use crate::opalg::{
    hermitian_eig, inner, unitary_exp, Factor, Operator, Sign, SpaceLayout, StateVector,
};
use crate::{Error, Result, C64};

/// Time-dependent interaction `t ↦ H_int(t)` on `S`.
pub type Interaction = Arc<dyn Fn(f64) -> Operator + Send + Sync>;

#[derive(Clone)]
pub struct HamiltonianSpec {
    clock_a: ClockModel,
    clock_b: ClockModel,
    h_s: Operator,
    h_int: Option<Interaction>,
}

impl fmt::Debug for HamiltonianSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSpec")
            .field("clock_a", &self.clock_a)
            .field("system_dim", &self.h_s.dim())
            .field("h_int", &self.h_int.is_some())
            .finish()
    }
}

impl HamiltonianSpec {
    pub fn new(
        clock_a: ClockModel,
        clock_b: ClockModel,
        h_s: &Operator,
        h_int: Option<Interaction>,
    ) -> Result<Self> {
        if clock_a.label() != Factor::A {
            return Err(Error::LayoutMismatch("clock A must carry label A".into()));
        }
        if h_s.layout().factors() != [(Factor::S, h_s.dim())] {
            return Err(Error::LayoutMismatch(format!(
                "system Hamiltonian must act on S alone, got {}",
                h_s.layout()
            )));
        }
        check_dim(clock_a.d() * h_s.dim())?;
        let spec = Self {
            clock_a,
            clock_b,
            h_s: h_s.clone().mark_hermitian()?,
            h_int,
        };
        spec.interaction_at(spec.clock_a.t0())?;
        Ok(spec)
    }

    /// Hamiltonian spec whose clock `B` mirrors clock `A`.
    pub fn with_mirrored_clock(
        clock_a: ClockModel,
        h_s: &Operator,
        h_int: Option<Interaction>,
    ) -> Result<Self> {
        let clock_b = ClockModel::new(clock_a.d(), clock_a.delta_t(), clock_a.t0(), Factor::B)?;
        Self::new(clock_a, clock_b, h_s, h_int)
    }

    pub fn clock_a(&self) -> &ClockModel {
        &self.clock_a
    }

    pub fn clock_b(&self) -> &ClockModel {
        &self.clock_b
    }

    pub fn h_s(&self) -> &Operator {
        &self.h_s
    }

    pub fn system_dim(&self) -> usize {
        self.h_s.dim()
    }

    pub fn has_interaction(&self) -> bool {
        self.h_int.is_some()
    }

    /// Always true: the internal clock–system coupling is not modelled.
    pub fn h_bs_null(&self) -> bool {
        true
    }

    pub fn full_layout(&self) -> SpaceLayout {
        SpaceLayout::new([(Factor::A, self.clock_a.d()), (Factor::S, self.h_s.dim())])
            .expect("clock and system labels are distinct")
    }

    /// `H_int(t)`, checked Hermitian and sized for `S`.
    pub fn interaction_at(&self, t: f64) -> Result<Operator> {
        let Some(f) = &self.h_int else {
            return Ok(Operator::zeros(self.h_s.layout().clone()));
        };
        let h = f(t);
        if h.dim() != self.h_s.dim() {
            return Err(Error::DimMismatch {
                expected: self.h_s.dim(),
                found: h.dim(),
            });
        }
        h.with_layout(self.h_s.layout().clone())?.mark_hermitian()
    }

    /// `H_S + H_int(t)`.
    pub fn system_hamiltonian_at(&self, t: f64) -> Result<Operator> {
        if self.h_int.is_none() {
            return Ok(self.h_s.clone());
        }
        self.h_s.try_add(&self.interaction_at(t)?)?.mark_hermitian()
    }

    /// `Σ_k |t_k⟩⟨t_k| ⊗ H_int(t_{(k+q) mod d})`, i.e. `H_int(T_A + qδt)`.
    pub fn interaction_operator(&self, q: i64) -> Result<Operator> {
        let d = self.clock_a.d() as i64;
        let blocks = (0..d)
            .map(|k| self.interaction_at(self.clock_a.time((k + q).rem_euclid(d) as usize)))
            .collect::<Result<Vec<_>>>()?;
        block_diagonal(&self.full_layout(), &blocks)
    }
}

/// `Σ_k |t_k⟩⟨t_k| ⊗ blocks[k]` on `A ⊗ S`.
pub(crate) fn block_diagonal(layout: &SpaceLayout, blocks: &[Operator]) -> Result<Operator> {
    let n = blocks[0].dim();
    let dim = layout.dim();
    let zero = C64::new(0.0, 0.0);
    let mat = Mat::from_fn(dim, dim, |r, c| {
        if r / n == c / n {
            blocks[r / n].get(r % n, c % n)
        } else {
            zero
        }
    });
    let op = Operator::new(mat, layout.clone())?;
    if blocks.iter().all(Operator::is_hermitian) {
        op.mark_hermitian()
    } else {
        Ok(op)
    }
}

/// `H_A ⊗ I + I ⊗ H_S + Σ_k |t_k⟩⟨t_k| ⊗ H_int(t_k)`.
pub fn effective_hamiltonian_b(spec: &HamiltonianSpec) -> Result<Operator> {
    let layout = spec.full_layout();
    let n = spec.system_dim();
    let d = spec.clock_a.d();
    let blocks = (0..d)
        .map(|k| spec.system_hamiltonian_at(spec.clock_a.time(k)))
        .collect::<Result<Vec<_>>>()?;
    let ha = spec.clock_a.energy_operator()?;
    let zero = C64::new(0.0, 0.0);
    let mat = Mat::from_fn(d * n, d * n, |r, c| {
        let (a, i) = (r / n, r % n);
        let (b, j) = (c / n, c % n);
        let mut z = if i == j { ha.get(a, b) } else { zero };
        if a == b {
            z += blocks[a].get(i, j);
        }
        z
    });
    Operator::new(mat, layout)?.mark_hermitian()
}

/// `e^{iH_Aτ/ħ} ⊗ I_S` for `τ = qδt`: the exact shift `|t_k⟩ ↦ |t_{k−q}⟩`.
pub fn clock_modular_energy(spec: &HamiltonianSpec, q: i64) -> Result<Operator> {
    let w = time_shift(&spec.clock_a, -q);
    let id = Operator::identity(spec.h_s.layout().clone());
    crate::opalg::tensor_product(&w, &id)
}

/// `−(i/ħ)[e^{iH_Aτ/ħ} ⊗ I, H]` for `τ = qδt`, the `t_B`-rate of the clock's
/// modular energy.
pub fn clock_shift_rate(spec: &HamiltonianSpec, h_eff: &Operator, q: i64) -> Result<Operator> {
    let w = clock_modular_energy(spec, q)?;
    let c = w.try_mul(h_eff)?.try_sub(&h_eff.try_mul(&w)?)?;
    Ok(c.scale(C64::new(0.0, -1.0 / hbar())))
}

/// Which side the clock projector sits on in a time-conditioned expectation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectationVariant {
    #[default]
    Left,
    Right,
    Sym,
}

/// `d·⟨⟨Ψ|Π_k O|Ψ⟩⟩`, `d·⟨⟨Ψ|O Π_k|Ψ⟩⟩`, or their average, with
/// `Π_k = |t_k⟩⟨t_k| ⊗ I`.
pub fn expectation_at(
    full: &StateVector,
    o: &Operator,
    k: usize,
    v: ExpectationVariant,
) -> Result<C64> {
    if full.layout() != o.layout() {
        return Err(Error::LayoutMismatch(format!(
            "state {} vs operator {}",
            full.layout(),
            o.layout()
        )));
    }
    let (d, n) = clock_split(full.layout())?;
    if k >= d {
        return Err(Error::param("k", format!("tick {k} out of range 0..{d}")));
    }
    let psi = full.amplitudes();
    let block = k * n..(k + 1) * n;
    let left = || -> Result<C64> {
        let o_psi = o.apply(psi)?;
        Ok(inner(&psi[block.clone()], &o_psi[block.clone()]) * d as f64)
    };
    let right = || -> Result<C64> {
        let o_adj_psi = o.adjoint().apply(psi)?;
        Ok(inner(&o_adj_psi[block.clone()], &psi[block.clone()]) * d as f64)
    };
    match v {
        ExpectationVariant::Left => left(),
        ExpectationVariant::Right => right(),
        ExpectationVariant::Sym => Ok((left()? + right()?) * 0.5),
    }
}

/// `(d, n)` for a layout `[A:d, S:n]` (or `[A:d]`).
pub(crate) fn clock_split(layout: &SpaceLayout) -> Result<(usize, usize)> {
    match layout.factors() {
        [(Factor::A, d), rest @ ..] => Ok((*d, rest.iter().map(|f| f.1).product())),
        _ => Err(Error::LayoutMismatch(format!(
            "expected clock A as the first factor, got {layout}"
        ))),
    }
}

/// Clock-side modular energy at a tick.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModularOverlap {
    pub re: f64,
    pub im: f64,
    /// `k + q` crossed the clock seam.
    pub wrapped: bool,
    /// `τ` was off the tick lattice and went through `unitary_exp` on `H_A`.
    pub interpolated: bool,
}

impl ModularOverlap {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Left-variant `⟨e^{iH_Aτ/ħ}⟩` at tick `k` for `τ = qδt`:
/// `⟨ψ(t_k)|ψ(t_{(k+q) mod d})⟩`.
pub fn modular_energy_expectation_a(
    history: &HistoryState,
    k: usize,
    q: i64,
) -> Result<ModularOverlap> {
    let d = history.len() as i64;
    if k as i64 >= d {
        return Err(Error::param("k", format!("tick {k} out of range 0..{d}")));
    }
    if q.abs() >= d {
        return Err(Error::param(
            "q",
            format!("|q| = {} exceeds one clock period", q.abs()),
        ));
    }
    let target = k as i64 + q;
    let j = target.rem_euclid(d) as usize;
    let z = history.states()[k].inner(&history.states()[j])?;
    Ok(ModularOverlap {
        re: z.re,
        im: z.im,
        wrapped: target < 0 || target >= d,
        interpolated: false,
    })
}

/// As [`modular_energy_expectation_a`] for arbitrary `τ`; off-lattice values
/// use row `k` of `e^{iH_Aτ/ħ}` and are flagged as interpolated.
pub fn modular_energy_expectation_a_tau(
    history: &HistoryState,
    k: usize,
    tau: f64,
) -> Result<ModularOverlap> {
    let clock = history.clock();
    if let Some(q) = clock.ticks_in(tau) {
        if q.abs() < clock.d() as i64 {
            return modular_energy_expectation_a(history, k, q);
        }
    }
    let w = unitary_exp(clock.energy_operator()?, tau, Sign::Plus)?;
    let psi_k = &history.states()[k];
    let mut z = C64::new(0.0, 0.0);
    for (j, psi_j) in history.states().iter().enumerate() {
        z += w.get(k, j) * psi_k.inner(psi_j)?;
    }
    Ok(ModularOverlap {
        re: z.re,
        im: z.im,
        wrapped: false,
        interpolated: true,
    })
}

/// `⟨ψ|e^{iH_Sτ/ħ}|ψ⟩` from the dense exponential.
pub fn modular_energy_expectation_s(psi: &StateVector, h_s: &Operator, tau: f64) -> Result<C64> {
    let u = unitary_exp(h_s, tau, Sign::Plus)?;
    Ok(inner(psi.amplitudes(), &u.apply(psi.amplitudes())?))
}

/// `Σ_n |c_n|² e^{iE_nτ/ħ}` from the spectral decomposition of `H_S`.
pub fn spectral_modular_expectation(psi: &StateVector, h_s: &Operator, tau: f64) -> Result<C64> {
    let eig = hermitian_eig(h_s)?;
    let c = eig.coefficients(psi.amplitudes())?;
    let w = tau / hbar();
    Ok(c.iter()
        .zip(eig.values())
        .map(|(ci, &e)| C64::from_polar(ci.norm_sqr(), e * w))
        .sum())
}

/// Drift of `⟨e^{iH_eff^B τ/ħ}⟩` along `t_B`.
#[derive(Clone, Debug, Serialize)]
pub struct ConservationReport {
    pub times: Vec<f64>,
    pub values: Vec<(f64, f64)>,
    pub drift: f64,
}

/// Evolves `full_psi0` under `H_eff^B` over one clock period in `n_times`
/// steps and tracks `⟨e^{iH_eff^B τ/ħ}⟩`.
pub fn conserved_modular_energy_check(
    spec: &HamiltonianSpec,
    full_psi0: &StateVector,
    tau: f64,
    n_times: usize,
) -> Result<ConservationReport> {
    if n_times == 0 {
        return Err(Error::param("n_times", "must be at least 1"));
    }
    let h = effective_hamiltonian_b(spec)?;
    if full_psi0.layout() != h.layout() {
        return Err(Error::LayoutMismatch(format!(
            "state {} vs {}",
            full_psi0.layout(),
            h.layout()
        )));
    }
    let eig = hermitian_eig(&h)?;
    let w = eig.exp_i(tau, Sign::Plus);
    let period = spec.clock_a.period();
    let mut times = Vec::with_capacity(n_times + 1);
    let mut values = Vec::with_capacity(n_times + 1);
    let mut drift = 0.0f64;
    let mut first = None;
    for j in 0..=n_times {
        let t = period * j as f64 / n_times as f64;
        let psi = eig.evolve(full_psi0.amplitudes(), t)?;
        let z = inner(&psi, &w.apply(&psi)?);
        let z0 = *first.get_or_insert(z);
        drift = drift.max((z - z0).norm());
        times.push(t);
        values.push((z.re, z.im));
    }
    Ok(ConservationReport {
        times,
        values,
        drift,
    })
}
