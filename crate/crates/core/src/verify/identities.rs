use serde::Serialize;

use crate::clock::{gaussian_clock_state, modular_time_unitary, ClockModel};
use crate::config::hbar;
use crate::grid::GridSystem;
use crate::opalg::{commutator, norm, unitary_exp, Operator, Sign};
use crate::pwframe::{
    clock_modular_energy, clock_shift_rate, effective_hamiltonian_b, HamiltonianSpec,
};
use crate::scenarios::PistonSetup;
use crate::{Error, Result, C64};

/// `−(i/ħ)[O, H]`.
pub fn heisenberg_rhs(o: &Operator, h: &Operator) -> Result<Operator> {
    Ok(commutator(o, h)?.scale(C64::new(0.0, -1.0 / hbar())))
}

/// `‖−(i/ħ)[e^{iPℓ/ħ}, H] + (i/ħ)[V(X+ℓ) − V(X)]e^{iPℓ/ħ}‖_max` with
/// `H = P²/2m + V(X)` and `V(X+ℓ)` wrapped around the box.
pub fn check_modular_momentum_identity(
    grid: &GridSystem,
    v: impl Fn(f64) -> f64 + Copy,
    ell: f64,
) -> Result<f64> {
    let m = grid.sites_in(ell).ok_or_else(|| {
        Error::Incommensurate(format!(
            "ell = {ell} is not a multiple of dx = {}",
            grid.dx()
        ))
    })?;
    let u = grid.translation(m);
    let h = grid.hamiltonian(v)?;
    let lhs = heisenberg_rhs(&u, &h)?;
    let dv = grid.shifted_potential(v, m)?.try_sub(&grid.potential(v)?)?;
    let rhs = dv.try_mul(&u)?.scale(C64::new(0.0, -1.0 / hbar()));
    lhs.max_abs_diff(&rhs)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularEnergyIdentity {
    /// `‖rate − rhs‖_max`.
    pub residual: f64,
    /// `‖rhs‖_max`; zero when `H_int` is the same at `t` and `t + τ`.
    pub rhs_norm: f64,
}

/// `−(i/ħ)[e^{iH_Aτ/ħ}⊗I, H_eff^B]` against
/// `−(i/ħ)[H_int(T_A+τ) − H_int(T_A)](e^{iH_Aτ/ħ}⊗I)`, `τ = qδt`.
pub fn check_modular_energy_identity(
    spec: &HamiltonianSpec,
    q: i64,
) -> Result<ModularEnergyIdentity> {
    let h_eff = effective_hamiltonian_b(spec)?;
    let rate = clock_shift_rate(spec, &h_eff, q)?;
    let w = clock_modular_energy(spec, q)?;
    let delta = spec
        .interaction_operator(q)?
        .try_sub(&spec.interaction_operator(0)?)?;
    let rhs = delta.try_mul(&w)?.scale(C64::new(0.0, -1.0 / hbar()));
    Ok(ModularEnergyIdentity {
        residual: rate.max_abs_diff(&rhs)?,
        rhs_norm: rhs.max_norm(),
    })
}

/// Over the ticks where the wall is at rest at `t` and fully displaced at
/// `t + τ`, the rate block `(k, k+q)` must equal
/// `−(i/ħ)[V_r(X + δℓ) − V_r(X)]`. Returns the worst block deviation and the
/// number of ticks checked.
pub fn check_piston_window(setup: &PistonSetup, displacement: f64) -> Result<(f64, usize)> {
    let spec = crate::scenarios::piston_spec(setup, displacement)?;
    let q = setup.ticks_per_period() as i64;
    let h_eff = effective_hamiltonian_b(&spec)?;
    let rate = clock_shift_rate(&spec, &h_eff, q)?;
    let want = setup
        .wall_step(displacement)?
        .scale(C64::new(0.0, -1.0 / hbar()));
    let n = spec.system_dim();
    let d = spec.clock_a().d();
    let window = setup.displacement_window();
    let mut worst = 0.0f64;
    for &k in &window {
        let j = k + q as usize;
        for col in 0..d {
            for a in 0..n {
                for b in 0..n {
                    let w = if col == j {
                        want.get(a, b)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    worst = worst.max((rate.get(k * n + a, col * n + b) - w).norm());
                }
            }
        }
    }
    Ok((worst, window.len()))
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyTimeReport {
    /// `max_j ‖([W, T] − τW)|t_j⟩‖` over columns that do not wrap.
    pub shift_interior: f64,
    /// The same over the `q` wrapping columns (equals the clock period).
    pub shift_seam: f64,
    /// `‖(−(i/ħ)[M, H_A] − (2πi/τ_c)M)g‖ / (2π/τ_c)` on a band-limited `g`,
    /// with `M = e^{2πiT/τ_c}` and `τ_c` the clock period over `cells`.
    pub ladder: f64,
}

/// Commutators of the clock's modular energy and modular time.
pub fn check_energy_time_commutators(
    clock: &ClockModel,
    q: i64,
    cells: usize,
) -> Result<EnergyTimeReport> {
    if cells == 0 {
        return Err(Error::Incommensurate(
            "cell count must be a positive integer".into(),
        ));
    }
    let d = clock.d();
    if q < 0 || q as usize >= d {
        return Err(Error::param("q", format!("must lie in 0..{d}")));
    }
    let tau = q as f64 * clock.delta_t();
    let t_op = clock.time_operator()?;
    let w = unitary_exp(clock.energy_operator()?, tau, Sign::Plus)?;
    let c = w
        .try_mul(t_op)?
        .try_sub(&t_op.try_mul(&w)?)?
        .try_sub(&w.scale(C64::new(tau, 0.0)))?;
    let column = |j: usize| -> f64 { (0..d).map(|i| c.get(i, j).norm_sqr()).sum::<f64>().sqrt() };
    let q = q as usize;
    let shift_interior = (q..d).map(column).fold(0.0, f64::max);
    let shift_seam = (0..q).map(column).fold(0.0, f64::max);

    let tau_c = clock.period() / cells as f64;
    let m = modular_time_unitary(clock, tau_c)?;
    let h = clock.energy_operator()?;
    let g = gaussian_clock_state(
        clock,
        clock.t0() + 0.5 * clock.period(),
        4.0 * clock.delta_t(),
    )?;
    let g = g.state.amplitudes();
    let mh = m.apply(&h.apply(g)?)?;
    let hm = h.apply(&m.apply(g)?)?;
    let mg = m.apply(g)?;
    let k = 2.0 * std::f64::consts::PI / tau_c;
    let r: Vec<C64> = (0..d)
        .map(|i| C64::new(0.0, -1.0 / hbar()) * (mh[i] - hm[i]) - C64::new(0.0, k) * mg[i])
        .collect();
    Ok(EnergyTimeReport {
        shift_interior,
        shift_seam,
        ladder: norm(&r) / k,
    })
}

/// Potentials used by the modular-momentum identity checks.
pub mod potentials {
    use std::f64::consts::TAU;

    pub fn zero(_: f64) -> f64 {
        0.0
    }

    /// `½mω²(x − c)²`.
    pub fn harmonic(mass: f64, omega: f64, center: f64) -> impl Fn(f64) -> f64 + Copy {
        move |x| 0.5 * mass * omega * omega * (x - center) * (x - center)
    }

    /// Periodic array of double wells with `wells` cells on a box of length
    /// `length`.
    pub fn double_well_array(depth: f64, length: f64, wells: usize) -> impl Fn(f64) -> f64 + Copy {
        let k = TAU * wells as f64 / length;
        move |x| {
            let c = (k * x).cos();
            depth * (c * c - 0.5).powi(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::make_clock;
    use crate::opalg::pauli;

    #[test]
    fn heisenberg_rhs_pauli_algebra() {
        let omega = 1.3;
        let h = pauli::sigma_z().scale(C64::new(0.5 * hbar() * omega, 0.0));
        let r = heisenberg_rhs(&pauli::sigma_x(), &h).unwrap();
        // [σx, σz] = −2iσy
        let want = pauli::sigma_y().scale(C64::new(-omega, 0.0));
        assert!(r.max_abs_diff(&want).unwrap() < 1e-15);
        assert_eq!(heisenberg_rhs(&h, &h).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn momentum_identity_zero_and_harmonic() {
        let g = GridSystem::new(64, 32.0, 1.5).unwrap();
        let ell = 4.0 * g.dx();
        assert!(check_modular_momentum_identity(&g, potentials::zero, ell).unwrap() < 1e-12);
        let v = potentials::harmonic(1.5, 0.2, 16.0);
        assert!(check_modular_momentum_identity(&g, v, ell).unwrap() < 1e-10);
        assert!(matches!(
            check_modular_momentum_identity(&g, v, 0.3 * g.dx()),
            Err(Error::Incommensurate(_))
        ));
    }

    #[test]
    fn harmonic_difference_is_linear_away_from_wrap() {
        // V(x+ℓ) − V(x) = mω²ℓ(x − c) + ½mω²ℓ²
        let (m, w, c) = (1.5, 0.2, 16.0);
        let g = GridSystem::new(64, 32.0, m).unwrap();
        let sites = 4;
        let ell = sites as f64 * g.dx();
        let v = potentials::harmonic(m, w, c);
        let dv = g
            .shifted_potential(v, sites)
            .unwrap()
            .try_sub(&g.potential(v).unwrap())
            .unwrap();
        for (k, x) in g
            .positions()
            .into_iter()
            .enumerate()
            .take(64 - sites as usize)
        {
            let want = m * w * w * ell * (x - c) + 0.5 * m * w * w * ell * ell;
            assert!((dv.get(k, k).re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn double_well_identity() {
        let g = GridSystem::new(128, 64.0, 1.0).unwrap();
        let v = potentials::double_well_array(2.0, 64.0, 4);
        let r = check_modular_momentum_identity(&g, v, 16.0 * g.dx()).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn energy_time_commutator() {
        let clock = make_clock(64, 0.1, 0.0).unwrap();
        let zero = check_energy_time_commutators(&clock, 0, 1).unwrap();
        assert!(zero.shift_interior < 1e-12);
        let r = check_energy_time_commutators(&clock, 1, 1).unwrap();
        assert!(r.shift_interior < 1e-8, "{r:?}");
        assert!((r.shift_seam - clock.period()).abs() < 1e-8);
        assert!(r.ladder < 0.01, "{r:?}");
        assert!(check_energy_time_commutators(&clock, 1, 0).is_err());
    }
}
