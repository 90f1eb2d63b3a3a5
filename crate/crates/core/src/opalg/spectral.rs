use std::f64::consts::TAU;

use faer::{Mat, Side};

use super::layout::SpaceLayout;
use super::operator::{mat_mul, Operator};
use crate::config::hbar;
use crate::{Error, Result, C64};

/// Sign of the exponent in `e^{±iHθ/ħ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Eigendecomposition `H = U diag(λ) U†` of a Hermitian operator,
/// eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    values: Vec<f64>,
    vectors: Operator,
}

pub fn hermitian_eig(h: &Operator) -> Result<Eigen> {
    let h = if h.is_hermitian() {
        h.clone()
    } else {
        h.clone().mark_hermitian()?
    };
    let evd = h
        .mat()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    let values: Vec<f64> = (0..h.dim())
        .map(|i| evd.S().column_vector()[i].re)
        .collect();
    let n = h.dim();
    let u = evd.U();
    let vectors =
        Operator::new(Mat::from_fn(n, n, |i, j| u[(i, j)]), h.layout().clone())?.mark_unitary()?;
    Ok(Eigen { values, vectors })
}

impl Eigen {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Operator {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn layout(&self) -> &SpaceLayout {
        self.vectors.layout()
    }

    /// `U diag(f(λ)) U†`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> C64) -> Operator {
        let n = self.dim();
        let u = self.vectors.mat();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * weights[j]);
        let u_adj = Mat::from_fn(n, n, |i, j| u[(j, i)].conj());
        Operator::new(
            mat_mul(scaled.as_ref(), u_adj.as_ref()),
            self.layout().clone(),
        )
        .expect("eigenvector layout matches")
    }

    /// `e^{±iHθ/ħ}`.
    pub fn exp_i(&self, theta: f64, sign: Sign) -> Operator {
        let phase = sign.value() * theta / hbar();
        let mut op = self.reconstruct(|l| C64::from_polar(1.0, phase * l));
        // exact by construction up to roundoff; the flag is verified in tests
        op = op.mark_unitary().expect("spectral exponential is unitary");
        op
    }

    /// Components `U†ψ` in the eigenbasis.
    pub fn coefficients(&self, psi: &[C64]) -> Result<Vec<C64>> {
        self.vectors.adjoint().apply(psi)
    }

    /// `f(H)ψ` without forming `f(H)`.
    pub fn apply_fn(&self, psi: &[C64], f: impl Fn(f64) -> C64) -> Result<Vec<C64>> {
        let mut c = self.coefficients(psi)?;
        for (ci, &l) in c.iter_mut().zip(&self.values) {
            *ci *= f(l);
        }
        self.vectors.apply(&c)
    }

    /// `e^{−iHt/ħ}ψ`.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        let w = -t / hbar();
        self.apply_fn(psi, |l| C64::from_polar(1.0, w * l))
    }
}

/// `e^{±iHθ/ħ}` through the Hermitian eigendecomposition of `h`.
pub fn unitary_exp(h: &Operator, theta: f64, sign: Sign) -> Result<Operator> {
    if !theta.is_finite() {
        return Err(Error::param("theta", "must be finite"));
    }
    Ok(hermitian_eig(h)?.exp_i(theta, sign))
}

/// Applies a real function eigenvalue-wise.
pub fn apply_to_spectrum(h: &Operator, f: impl Fn(f64) -> f64) -> Result<Operator> {
    if let Some(diag) = h.diagonal_entries() {
        let h = h.clone().mark_hermitian()?;
        let mut out = Vec::with_capacity(diag.len());
        for z in diag {
            let v = f(z.re);
            if !v.is_finite() {
                return Err(Error::NonFinite { eigenvalue: z.re });
            }
            out.push(v);
        }
        return Operator::real_diagonal(h.layout().clone(), &out);
    }
    let eig = hermitian_eig(h)?;
    if let Some(&bad) = eig.values.iter().find(|&&l| !f(l).is_finite()) {
        return Err(Error::NonFinite { eigenvalue: bad });
    }
    eig.reconstruct(|l| C64::new(f(l), 0.0)).mark_hermitian()
}

/// Centered conjugate lattice of an `n`-point periodic grid with the given
/// spacing: `κ_j = 2πħ (j − ⌊n/2⌋) / (n·spacing)`, ascending.
pub fn conjugate_lattice(n: usize, spacing: f64) -> Vec<f64> {
    let c = (n / 2) as i64;
    let quantum = TAU * hbar() / (n as f64 * spacing);
    (0..n as i64).map(|j| (j - c) as f64 * quantum).collect()
}

/// Fourier multiplier `g(K)` on an `n`-point periodic grid, where `K` is the
/// conjugate operator whose eigenvectors are `⟨x_a|κ_j⟩ = e^{iκ_j x_a/ħ}/√n`.
///
/// The result is circulant and exactly Hermitian: entries depend only on
/// `(a − b) mod n`, and `h[n−m] = conj(h[m])` bit for bit. Cyclic
/// permutations therefore commute with it exactly.
pub fn fourier_multiplier(
    layout: SpaceLayout,
    spacing: f64,
    symbol: impl Fn(f64) -> f64,
) -> Result<Operator> {
    let n = layout.dim();
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::param("spacing", "must be positive"));
    }
    let lattice = conjugate_lattice(n, spacing);
    let weights: Vec<f64> = lattice.iter().map(|&k| symbol(k)).collect();
    if let Some(pos) = weights.iter().position(|w| !w.is_finite()) {
        return Err(Error::NonFinite {
            eigenvalue: lattice[pos],
        });
    }
    let c = (n / 2) as i64;
    let ni = n as i64;
    let mut column = vec![C64::new(0.0, 0.0); n];
    for m in 0..=n / 2 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &w) in weights.iter().enumerate() {
            let r = ((j as i64 - c) * m as i64).rem_euclid(ni);
            acc += C64::from_polar(w, TAU * r as f64 / n as f64);
        }
        column[m] = acc / n as f64;
    }
    column[0].im = 0.0;
    if n.is_multiple_of(2) {
        column[n / 2].im = 0.0;
    }
    for m in n / 2 + 1..n {
        column[m] = column[n - m].conj();
    }
    Operator::from_fn(layout, |a, b| column[(a + n - b) % n]).mark_hermitian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{pauli, Factor};

    #[test]
    fn pauli_z_exponential() {
        // e^{-iσ_z θ/2} at θ = π is diag(-i, i)
        let h = pauli::sigma_z().scale(C64::new(0.5, 0.0));
        let u = unitary_exp(&h, std::f64::consts::PI, Sign::Minus).unwrap();
        assert!((u.get(0, 0) - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((u.get(1, 1) - C64::new(0.0, 1.0)).norm() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let l = SpaceLayout::single(Factor::S, 3).unwrap();
        let u = unitary_exp(&Operator::zeros(l.clone()), 2.7, Sign::Plus).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(l)).unwrap() < 1e-15);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let l = SpaceLayout::single(Factor::S, 2).unwrap();
        let a = Operator::from_fn(l, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
        assert!(unitary_exp(&a, 1.0, Sign::Plus).is_err());
        assert!(unitary_exp(&pauli::sigma_x(), f64::NAN, Sign::Plus).is_err());
    }

    #[test]
    fn square_of_sigma_z_is_identity() {
        let sq = apply_to_spectrum(&pauli::sigma_z(), |x| x * x).unwrap();
        assert!(sq.max_abs_diff(&pauli::identity()).unwrap() < 1e-14);
        assert!(matches!(
            apply_to_spectrum(&pauli::sigma_z(), |x| 1.0 / (x + 1.0)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn fourier_multiplier_is_exactly_circulant() {
        let l = SpaceLayout::single(Factor::S, 10).unwrap();
        let k = fourier_multiplier(l, 0.3, |p| p * p + p).unwrap();
        for a in 0..10 {
            for b in 0..10 {
                assert_eq!(k.get(a, b), k.get((a + 1) % 10, (b + 1) % 10));
            }
        }
        assert_eq!(k.hermitian_deviation(), 0.0);
    }

    #[test]
    fn fourier_multiplier_spectrum_matches_symbol() {
        let l = SpaceLayout::single(Factor::S, 9).unwrap();
        let k = fourier_multiplier(l, 0.5, |p| p).unwrap();
        let eig = hermitian_eig(&k).unwrap();
        for (got, want) in eig.values().iter().zip(conjugate_lattice(9, 0.5)) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}
