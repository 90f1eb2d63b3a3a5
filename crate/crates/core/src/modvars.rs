//! Modular variables and the complete-uncertainty machinery.
//!
//! A modular variable is represented by its unitary `e^{iΦ}` with
//! `Φ = base·θ/ħ`. Its distribution lives on `[0, 2π)` and is fixed by the
//! Fourier moments `⟨e^{inΦ}⟩`; the variable is completely uncertain when
//! every moment with `n ≠ 0` vanishes. Only `n = 1..n_max` can be checked.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::clock::{modular_time_unitary, ClockModel};
use crate::config::hbar;
use crate::grid::GridSystem;
use crate::opalg::{hermitian_eig, unitary_exp, Eigen, Operator, Sign, StateVector};
use crate::{Error, Result, C64};

/// Default truncation of uncertainty profiles.
pub const DEFAULT_N_MAX: usize = 8;

#[derive(Clone, Debug)]
pub struct ModularVariable {
    base: Operator,
    scale: f64,
    label: String,
}

impl ModularVariable {
    pub fn new(base: &Operator, scale: f64, label: impl Into<String>) -> Result<Self> {
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::param(
                "scale",
                format!("must be finite and nonzero, got {scale}"),
            ));
        }
        Ok(Self {
            base: base.clone().mark_hermitian()?,
            scale,
            label: label.into(),
        })
    }

    pub fn base(&self) -> &Operator {
        &self.base
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Phases `λθ/ħ` of the eigenvalues of the base, not reduced.
    fn phases(&self, eig: &Eigen) -> Vec<f64> {
        let k = self.scale / hbar();
        eig.values().iter().map(|&l| l * k).collect()
    }

    /// Eigenbasis weights `|⟨v_j|ψ⟩|²` paired with the phases.
    fn weights(&self, psi: &StateVector) -> Result<(Vec<f64>, Vec<f64>)> {
        if psi.dim() != self.base.dim() {
            return Err(Error::DimMismatch {
                expected: self.base.dim(),
                found: psi.dim(),
            });
        }
        if let Some(diag) = self.base.diagonal_entries() {
            let k = self.scale / hbar();
            let phases = diag.iter().map(|z| z.re * k).collect();
            let w = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
            return Ok((phases, w));
        }
        let eig = hermitian_eig(&self.base)?;
        let c = eig.coefficients(psi.amplitudes())?;
        Ok((self.phases(&eig), c.iter().map(|z| z.norm_sqr()).collect()))
    }
}

/// `e^{i·base·θ/ħ}`.
pub fn modular_unitary(v: &ModularVariable) -> Result<Operator> {
    unitary_exp(&v.base, v.scale, Sign::Plus)
}

/// Eigenvalue-wise reduction `λ ↦ λ mod modulus ∈ [0, modulus)`.
pub fn modular_reduce(op: &Operator, modulus: f64) -> Result<Operator> {
    if !(modulus > 0.0 && modulus.is_finite()) {
        return Err(Error::param(
            "modulus",
            format!("must be positive, got {modulus}"),
        ));
    }
    crate::opalg::apply_to_spectrum(op, |l| {
        let r = l.rem_euclid(modulus);
        // rem_euclid can round up to the modulus itself for tiny negative input
        if r >= modulus {
            0.0
        } else {
            r
        }
    })
}

/// Fourier moments `⟨e^{inΦ}⟩` for `n = 1..=n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct UncertaintyProfile {
    moments: Vec<(f64, f64)>,
}

impl UncertaintyProfile {
    pub fn from_moments(moments: &[C64]) -> Self {
        Self {
            moments: moments.iter().map(|z| (z.re, z.im)).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.moments.len()
    }

    /// `⟨e^{inΦ}⟩`; `n = 0` gives 1 and negative `n` the conjugate.
    pub fn moment(&self, n: i64) -> C64 {
        if n == 0 {
            return C64::new(1.0, 0.0);
        }
        let (re, im) = self.moments[n.unsigned_abs() as usize - 1];
        let z = C64::new(re, im);
        if n > 0 {
            z
        } else {
            z.conj()
        }
    }

    /// Fourier coefficient `c_n = ⟨e^{inΦ}⟩/2π` of the distribution.
    pub fn coefficient(&self, n: i64) -> C64 {
        self.moment(n) / TAU
    }

    pub fn max_abs(&self) -> f64 {
        (1..=self.n_max() as i64)
            .map(|n| self.moment(n).norm())
            .fold(0.0, f64::max)
    }

    /// Density on `[0, 2π)` reconstructed from the truncated series.
    pub fn density(&self, phi: f64) -> f64 {
        let n_max = self.n_max() as i64;
        (-n_max..=n_max)
            .map(|n| (self.coefficient(n) * C64::from_polar(1.0, -(n as f64) * phi)).re)
            .sum()
    }
}

pub fn fourier_moments(
    psi: &StateVector,
    v: &ModularVariable,
    n_max: usize,
) -> Result<UncertaintyProfile> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    let (phases, w) = v.weights(psi)?;
    let moments: Vec<C64> = (1..=n_max)
        .map(|n| {
            phases
                .iter()
                .zip(&w)
                .map(|(&ph, &p)| C64::from_polar(p, n as f64 * ph))
                .sum()
        })
        .collect();
    Ok(UncertaintyProfile::from_moments(&moments))
}

/// True iff `|⟨e^{inΦ}⟩| < tol` for all `n = 1..=n_max`.
pub fn is_completely_uncertain(p: &UncertaintyProfile, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    Ok(p.max_abs() < tol)
}

/// Histogram of `Φ mod 2π` over `bins` equal bins on `[0, 2π)`.
pub fn modular_distribution(
    psi: &StateVector,
    v: &ModularVariable,
    bins: usize,
) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::param("bins", "need at least 2 bins"));
    }
    let (phases, w) = v.weights(psi)?;
    let mut hist = vec![0.0; bins];
    for (ph, p) in phases.iter().zip(&w) {
        let r = ph.rem_euclid(TAU);
        let b = ((r / TAU * bins as f64) as usize).min(bins - 1);
        hist[b] += p;
    }
    Ok(hist)
}

pub fn bin_centers(bins: usize) -> Vec<f64> {
    (0..bins)
        .map(|b| (b as f64 + 0.5) * TAU / bins as f64)
        .collect()
}

/// `Σ_b P_b e^{inφ_b}` over bin centers.
pub fn moment_from_distribution(hist: &[f64], n: i64) -> C64 {
    bin_centers(hist.len())
        .iter()
        .zip(hist)
        .map(|(&phi, &p)| C64::from_polar(p, n as f64 * phi))
        .sum()
}

fn lattice_steps(value: f64, unit: f64, what: &str) -> Result<i64> {
    let q = value / unit;
    let r = q.round();
    if (q - r).abs() > 1e-9 * q.abs().max(1.0) {
        return Err(Error::Incommensurate(format!(
            "{what} = {value} is not an integer multiple of {unit}"
        )));
    }
    Ok(r as i64)
}

/// `‖e^{iXp₀/ħ}e^{iPℓ/ħ} − e^{iPℓ/ħ}e^{iXp₀/ħ}‖_max` on a periodic grid.
///
/// `ℓ` must be a multiple of `dx` and `p₀` a multiple of `2πħ/L`; the
/// residual vanishes when `ℓp₀` is a multiple of `2πħ`.
pub fn weyl_commutation_check(grid: &GridSystem, ell: f64, p0: f64) -> Result<f64> {
    let (a, b) = weyl_pair(grid, ell, p0)?;
    a.try_mul(&b)?.max_abs_diff(&b.try_mul(&a)?)
}

/// Residual of the Weyl relation `e^{iXp₀/ħ}e^{iPℓ/ħ} = e^{−iℓp₀/ħ}e^{iPℓ/ħ}e^{iXp₀/ħ}`.
pub fn weyl_relation_residual(grid: &GridSystem, ell: f64, p0: f64) -> Result<f64> {
    let (a, b) = weyl_pair(grid, ell, p0)?;
    let phase = C64::from_polar(1.0, -ell * p0 / hbar());
    a.try_mul(&b)?.max_abs_diff(&b.try_mul(&a)?.scale(phase))
}

fn weyl_pair(grid: &GridSystem, ell: f64, p0: f64) -> Result<(Operator, Operator)> {
    lattice_steps(ell, grid.dx(), "ell")?;
    lattice_steps(p0, grid.momentum_quantum(), "p0")?;
    let a = unitary_exp(grid.x(), p0, Sign::Plus)?;
    let b = unitary_exp(grid.p(), ell, Sign::Plus)?;
    Ok((a, b))
}

/// `‖[e^{iH_Aτ/ħ}, e^{2πiT_A/τ}]‖_max` for `τ = d·δt/s`; zero when `s`
/// divides `d`.
pub fn cell_commutation_check(clock: &ClockModel, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::param("s", "must be a positive integer"));
    }
    let tau = clock.period() / s as f64;
    let w = unitary_exp(clock.energy_operator()?, tau, Sign::Plus)?;
    let m = modular_time_unitary(clock, tau)?;
    w.try_mul(&m)?.max_abs_diff(&m.try_mul(&w)?)
}
