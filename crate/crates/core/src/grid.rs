//! Periodic position grid with a spectral momentum operator.
//!
//! `P` is the Fourier multiplier with eigenvalues `2πħj/L` (centered `j`),
//! so `e^{iPℓ/ħ}` with `ℓ = m·dx` is the exact cyclic shift
//! `ψ(x) ↦ ψ(x + ℓ)` and kinetic terms commute with every lattice shift.

use std::f64::consts::TAU;

use crate::config::hbar;
use crate::opalg::{fourier_multiplier, Factor, Operator, SpaceLayout, StateVector};
use crate::{Error, Result, C64};

#[derive(Clone, Debug)]
pub struct GridSystem {
    n: usize,
    length: f64,
    mass: f64,
    x: Operator,
    p: Operator,
}

impl GridSystem {
    pub fn new(n: usize, length: f64, mass: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param(
                "n",
                format!("grid needs at least 2 points, got {n}"),
            ));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::param(
                "length",
                format!("must be positive, got {length}"),
            ));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::param(
                "mass",
                format!("must be positive, got {mass}"),
            ));
        }
        let layout = SpaceLayout::single(Factor::S, n)?;
        let dx = length / n as f64;
        let positions: Vec<f64> = (0..n).map(|k| k as f64 * dx).collect();
        let x = Operator::real_diagonal(layout.clone(), &positions)?;
        let p = fourier_multiplier(layout, dx, |k| k)?;
        Ok(Self {
            n,
            length,
            mass,
            x,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.x.layout()
    }

    pub fn x(&self) -> &Operator {
        &self.x
    }

    pub fn p(&self) -> &Operator {
        &self.p
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|k| k as f64 * self.dx()).collect()
    }

    /// Momentum eigenvalues `2πħj/L`, ascending.
    pub fn momenta(&self) -> Vec<f64> {
        crate::opalg::conjugate_lattice(self.n, self.dx())
    }

    /// `2πħ/L`.
    pub fn momentum_quantum(&self) -> f64 {
        TAU * hbar() / self.length
    }

    /// Number of grid steps in `ell`, if `ell` lies on the lattice.
    pub fn sites_in(&self, ell: f64) -> Option<i64> {
        let m = ell / self.dx();
        let r = m.round();
        ((m - r).abs() < 1e-9 * m.abs().max(1.0)).then_some(r as i64)
    }

    /// `P²/2m`.
    pub fn kinetic(&self) -> Result<Operator> {
        let two_m = 2.0 * self.mass;
        fourier_multiplier(self.layout().clone(), self.dx(), |p| p * p / two_m)
    }

    /// `V(X)` sampled on the grid.
    pub fn potential(&self, v: impl Fn(f64) -> f64) -> Result<Operator> {
        let diag: Vec<f64> = self.positions().into_iter().map(v).collect();
        if let Some(bad) = diag.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFinite {
                eigenvalue: bad as f64 * self.dx(),
            });
        }
        Operator::real_diagonal(self.layout().clone(), &diag)
    }

    /// `V(X + m·dx)` with the argument wrapped around the box.
    pub fn shifted_potential(&self, v: impl Fn(f64) -> f64, m: i64) -> Result<Operator> {
        let pos = self.positions();
        let n = self.n as i64;
        let diag: Vec<f64> = (0..n)
            .map(|k| v(pos[(k + m).rem_euclid(n) as usize]))
            .collect();
        Operator::real_diagonal(self.layout().clone(), &diag)
    }

    /// `P²/2m + V(X)`.
    pub fn hamiltonian(&self, v: impl Fn(f64) -> f64) -> Result<Operator> {
        self.kinetic()?
            .try_add(&self.potential(v)?)?
            .mark_hermitian()
    }

    /// `e^{iP·m·dx/ħ}`: the permutation `|x_k⟩ ↦ |x_{k−m}⟩`.
    pub fn translation(&self, m: i64) -> Operator {
        let n = self.n as i64;
        let perm: Vec<usize> = (0..n).map(|k| (k - m).rem_euclid(n) as usize).collect();
        Operator::permutation(self.layout().clone(), &perm).expect("cyclic shift is a permutation")
    }

    /// Signed distance `x − center` mapped into `[−L/2, L/2)`.
    pub fn wrapped_offset(&self, x: f64, center: f64) -> f64 {
        let l = self.length;
        (x - center + 0.5 * l).rem_euclid(l) - 0.5 * l
    }

    /// Periodically wrapped Gaussian packet
    /// `∝ e^{−(x−c)²/4σ² + ip̄(x−c)/ħ}`.
    pub fn gaussian_packet(&self, center: f64, sigma: f64, p_mean: f64) -> Result<StateVector> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        let h = hbar();
        let amps: Vec<C64> = self
            .positions()
            .into_iter()
            .map(|x| {
                let u = self.wrapped_offset(x, center);
                C64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p_mean * u / h)
            })
            .collect();
        StateVector::normalized(amps, self.layout().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{commutator, unitary_exp, Sign};

    #[test]
    fn momentum_exponential_is_lattice_shift() {
        let g = GridSystem::new(32, 8.0, 1.0).unwrap();
        let ell = 3.0 * g.dx();
        let u = unitary_exp(g.p(), ell, Sign::Plus).unwrap();
        assert!(u.max_abs_diff(&g.translation(3)).unwrap() < 1e-10);
        // shifting the argument: (Uψ)(x_k) = ψ(x_{k+3})
        let psi = g.gaussian_packet(2.0, 0.5, 1.0).unwrap();
        let out = g.translation(3).apply(psi.amplitudes()).unwrap();
        for k in 0..32 {
            assert_eq!(out[k], psi.amplitudes()[(k + 3) % 32]);
        }
    }

    #[test]
    fn kinetic_commutes_with_shifts_exactly() {
        let g = GridSystem::new(24, 6.0, 2.0).unwrap();
        let t = g.kinetic().unwrap();
        let c = commutator(&g.translation(5), &t).unwrap();
        assert_eq!(c.max_norm(), 0.0);
    }

    #[test]
    fn shifted_potential_matches_conjugation() {
        let g = GridSystem::new(16, 4.0, 1.0).unwrap();
        let v = |x: f64| (x - 1.3).powi(2) + 0.2 * x;
        let u = g.translation(5);
        let conj = &(&u * &g.potential(v).unwrap()) * &u.adjoint();
        assert_eq!(
            conj.max_abs_diff(&g.shifted_potential(v, 5).unwrap())
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn canonical_pair_on_band_limited_packet() {
        // [X, P]ψ = iħψ away from the box edges
        let g = GridSystem::new(64, 16.0, 1.0).unwrap();
        let psi = g.gaussian_packet(8.0, 0.7, 0.5).unwrap();
        let c = commutator(g.x(), g.p()).unwrap();
        let out = c.apply(psi.amplitudes()).unwrap();
        let worst = out
            .iter()
            .zip(psi.amplitudes())
            .map(|(o, a)| (o - C64::new(0.0, hbar()) * a).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn invalid_grids() {
        assert!(GridSystem::new(1, 1.0, 1.0).is_err());
        assert!(GridSystem::new(8, 0.0, 1.0).is_err());
        assert!(GridSystem::new(8, 1.0, -1.0).is_err());
        let g = GridSystem::new(8, 8.0, 1.0).unwrap();
        assert_eq!(g.sites_in(3.0), Some(3));
        assert_eq!(g.sites_in(2.5), None);
    }
}
