use serde::Serialize;

use crate::grid::GridSystem;
use crate::modvars::{fourier_moments, ModularVariable, UncertaintyProfile};
use crate::opalg::{inner, norm, StateVector};
use crate::{Error, Result, C64};

/// Largest tolerated `|⟨ξ₁|ξ₂⟩|`.
const MAX_OVERLAP: f64 = 1e-12;

/// Two equal Gaussian packets `ξ₁` at `center` and `ξ₂` at `center + ℓ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoubleSlitConfig {
    pub sigma: f64,
    /// Separation in grid steps, `ℓ = sites·dx`.
    pub sites: i64,
    pub phi: f64,
    pub center: f64,
}

impl DoubleSlitConfig {
    /// `σ = ℓ/16` with the first packet a quarter of the way into the box.
    pub fn for_grid(grid: &GridSystem, sites: i64, phi: f64) -> Self {
        let ell = sites as f64 * grid.dx();
        Self {
            sigma: ell / 16.0,
            sites,
            phi,
            center: 0.5 * grid.length() - ell,
        }
    }

    pub fn ell(&self, grid: &GridSystem) -> f64 {
        self.sites as f64 * grid.dx()
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self {
            phi,
            ..self.clone()
        }
    }

    fn validate(&self, grid: &GridSystem) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param("sigma", "must be positive"));
        }
        if self.sites <= 0 || self.sites as usize >= grid.n() {
            return Err(Error::param(
                "sites",
                format!("separation must lie in 1..{}, got {}", grid.n(), self.sites),
            ));
        }
        if !self.phi.is_finite() || !self.center.is_finite() {
            return Err(Error::param("phi", "phase and center must be finite"));
        }
        Ok(())
    }
}

fn packets(grid: &GridSystem, cfg: &DoubleSlitConfig) -> Result<(StateVector, StateVector)> {
    cfg.validate(grid)?;
    let xi1 = grid.gaussian_packet(cfg.center, cfg.sigma, 0.0)?;
    let xi2 = grid.gaussian_packet(cfg.center + cfg.ell(grid), cfg.sigma, 0.0)?;
    let overlap = xi1.inner(&xi2)?.norm();
    if overlap > MAX_OVERLAP {
        return Err(Error::Scenario(format!(
            "packet overlap {overlap:.3e} exceeds {MAX_OVERLAP:e}; narrow the packets or separate them"
        )));
    }
    Ok((xi1, xi2))
}

/// `(|ξ₁⟩ + e^{iφ}|ξ₂⟩)/√2`.
pub fn two_packet_state(grid: &GridSystem, cfg: &DoubleSlitConfig) -> Result<StateVector> {
    let (xi1, xi2) = packets(grid, cfg)?;
    let phase = C64::from_polar(1.0, cfg.phi);
    let amps = xi1
        .amplitudes()
        .iter()
        .zip(xi2.amplitudes())
        .map(|(a, b)| a + phase * b)
        .collect();
    StateVector::normalized(amps, grid.layout().clone())
}

/// Modular momentum `e^{iPℓ/ħ}` of the configured separation.
pub fn modular_momentum(grid: &GridSystem, ell: f64) -> Result<ModularVariable> {
    if grid.sites_in(ell).is_none() {
        return Err(Error::Incommensurate(format!(
            "ell = {ell} is not a multiple of dx = {}",
            grid.dx()
        )));
    }
    ModularVariable::new(grid.p(), ell, "P")
}

#[derive(Clone, Debug, Serialize)]
pub struct PolynomialReport {
    /// `max |⟨X^aP^b⟩(φ) − ⟨X^aP^b⟩(0)| / (‖X^aψ‖‖P^bψ‖)`.
    pub max_deviation: f64,
    /// Monomial `(a, b)` attaining the maximum.
    pub worst: (usize, usize),
    pub monomials: usize,
}

/// Checks that `⟨X^aP^b⟩` for `a + b ≤ max_degree` does not depend on the
/// relative phase.
pub fn polynomial_phase_insensitivity(
    grid: &GridSystem,
    cfg: &DoubleSlitConfig,
    max_degree: usize,
    phis: &[f64],
) -> Result<PolynomialReport> {
    let reference = two_packet_state(grid, &cfg.with_phi(0.0))?;
    let moments = |psi: &StateVector| -> Result<Vec<((usize, usize), C64, f64)>> {
        let mut out = Vec::new();
        let mut p_pow = psi.amplitudes().to_vec();
        for b in 0..=max_degree {
            if b > 0 {
                p_pow = grid.p().apply(&p_pow)?;
            }
            let mut x_pow = psi.amplitudes().to_vec();
            for a in 0..=max_degree - b {
                if a > 0 {
                    x_pow = grid.x().apply(&x_pow)?;
                }
                // X is Hermitian: ⟨ψ|X^aP^b|ψ⟩ = ⟨X^aψ|P^bψ⟩
                let value = inner(&x_pow, &p_pow);
                let scale = norm(&x_pow) * norm(&p_pow);
                out.push(((a, b), value, scale));
            }
        }
        Ok(out)
    };
    let base = moments(&reference)?;
    let mut max_deviation = 0.0f64;
    let mut worst = (0, 0);
    for &phi in phis {
        let psi = two_packet_state(grid, &cfg.with_phi(phi))?;
        for ((ab, v0, scale), (_, v, _)) in base.iter().zip(moments(&psi)?) {
            let dev = (v - v0).norm() / scale.max(f64::MIN_POSITIVE);
            if dev > max_deviation {
                max_deviation = dev;
                worst = *ab;
            }
        }
    }
    Ok(PolynomialReport {
        max_deviation,
        worst,
        monomials: base.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub before: UncertaintyProfile,
    pub after: UncertaintyProfile,
    /// Probability of finding the particle in the first packet's window.
    pub window_weight: f64,
}

/// Moments of `e^{iPℓ/ħ}` before and after projecting onto the half-cell
/// window around `ξ₁`.
pub fn collapse_uncertainty_demo(
    grid: &GridSystem,
    cfg: &DoubleSlitConfig,
    n_max: usize,
) -> Result<CollapseReport> {
    let psi = two_packet_state(grid, cfg)?;
    let ell = cfg.ell(grid);
    let v = modular_momentum(grid, ell)?;
    let before = fourier_moments(&psi, &v, n_max)?;
    let amps: Vec<C64> = grid
        .positions()
        .into_iter()
        .zip(psi.amplitudes())
        .map(|(x, z)| {
            if grid.wrapped_offset(x, cfg.center).abs() < 0.5 * ell {
                *z
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let window_weight = norm(&amps).powi(2);
    let collapsed = StateVector::normalized(amps, grid.layout().clone())?;
    let after = fourier_moments(&collapsed, &v, n_max)?;
    Ok(CollapseReport {
        before,
        after,
        window_weight,
    })
}
