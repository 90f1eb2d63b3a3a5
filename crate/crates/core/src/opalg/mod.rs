//! Dense complex operator algebra.
//!
//! Every exponential in this crate has the form `e^{±iHθ/ħ}` with `H`
//! Hermitian, so exponentials go through the Hermitian eigendecomposition
//! rather than scaling-and-squaring. Structural identities are checked at
//! `1e-10` and derived-state comparisons at `1e-8`, relative to operator
//! max-norms.

mod layout;
mod operator;
mod spectral;
mod state;

pub use layout::{Factor, SpaceLayout};
pub use operator::{pauli, Operator, HERMITIAN_TOL, UNITARY_TOL};
pub use spectral::{
    apply_to_spectrum, conjugate_lattice, fourier_multiplier, hermitian_eig, unitary_exp, Eigen,
    Sign,
};
pub use state::{distance, inner, norm, StateVector, NORM_TOL};

use faer::Mat;

use crate::config::check_dim;
use crate::{Error, Result, C64};

/// Kronecker product; the layout is the concatenation `a ⊗ b`.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(Error::Size {
        requested: usize::MAX,
        max: crate::config::max_dim(),
    })?;
    check_dim(dim)?;
    let layout = a.layout().concat(b.layout())?;
    let nb = b.dim();
    let (am, bm) = (a.mat(), b.mat());
    let mat = Mat::from_fn(dim, dim, |r, c| am[(r / nb, c / nb)] * bm[(r % nb, c % nb)]);
    let mut op = Operator::new(mat, layout)?;
    if a.is_hermitian() && b.is_hermitian() {
        op = op.mark_hermitian()?;
    }
    if a.is_unitary() && b.is_unitary() {
        op = op.mark_unitary()?;
    }
    Ok(op)
}

/// Lifts an operator on one factor to the full layout, identity elsewhere.
pub fn embed(op: &Operator, layout: &SpaceLayout, label: Factor) -> Result<Operator> {
    let (_, mid, right) = layout.split_around(label)?;
    if op.dim() != mid {
        return Err(Error::DimMismatch {
            expected: mid,
            found: op.dim(),
        });
    }
    let n = layout.dim();
    let m = op.mat();
    let zero = C64::new(0.0, 0.0);
    let mat = Mat::from_fn(n, n, |r, c| {
        let (rl, rm, rr) = (r / (mid * right), (r / right) % mid, r % right);
        let (cl, cm, cr) = (c / (mid * right), (c / right) % mid, c % right);
        if rl == cl && rr == cr {
            m[(rm, cm)]
        } else {
            zero
        }
    });
    let mut out = Operator::new(mat, layout.clone())?;
    if op.is_hermitian() {
        out = out.mark_hermitian()?;
    }
    if op.is_unitary() {
        out = out.mark_unitary()?;
    }
    Ok(out)
}

/// `ab − ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.try_mul(b)?;
    let ba = b.try_mul(a)?;
    ab.try_sub(&ba)
}

/// `ab + ba`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.try_mul(b)?;
    let ba = b.try_mul(a)?;
    ab.try_add(&ba)
}

/// `⟨ψ|O|ψ⟩`.
pub fn expectation(psi: &StateVector, o: &Operator) -> Result<C64> {
    if psi.dim() != o.dim() {
        return Err(Error::DimMismatch {
            expected: o.dim(),
            found: psi.dim(),
        });
    }
    let opsi = o.apply(psi.amplitudes())?;
    Ok(inner(psi.amplitudes(), &opsi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lay(label: Factor, n: usize) -> SpaceLayout {
        SpaceLayout::single(label, n).unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = tensor_product(
            &Operator::identity(lay(Factor::A, 2)),
            &Operator::identity(lay(Factor::S, 2)),
        )
        .unwrap();
        assert!(
            i4.max_abs_diff(&Operator::identity(
                SpaceLayout::new([(Factor::A, 2), (Factor::S, 2)]).unwrap()
            ))
            .unwrap()
                == 0.0
        );
        assert!(i4.is_unitary() && i4.is_hermitian());
    }

    #[test]
    fn sigma_z_tensor_identity_is_diagonal() {
        let z = pauli::sigma_z().relabel(Factor::A).unwrap();
        let zi = tensor_product(&z, &pauli::identity()).unwrap();
        let want = [1.0, 1.0, -1.0, -1.0];
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r == c { want[r] } else { 0.0 };
                assert_eq!(zi.get(r, c), C64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn x_tensor_x_flips_both() {
        let xx = tensor_product(
            &pauli::sigma_x().relabel(Factor::A).unwrap(),
            &pauli::sigma_x(),
        )
        .unwrap();
        // explicit 4×4: σx⊗σx is the anti-diagonal
        let l = SpaceLayout::new([(Factor::A, 2), (Factor::S, 2)]).unwrap();
        let anti = Operator::from_fn(l.clone(), |r, c| {
            C64::new(if r + c == 3 { 1.0 } else { 0.0 }, 0.0)
        });
        assert_eq!(xx.max_abs_diff(&anti).unwrap(), 0.0);
        let out = xx
            .apply(StateVector::basis(l, 0).unwrap().amplitudes())
            .unwrap();
        assert_eq!(out[3], C64::new(1.0, 0.0));
    }

    #[test]
    fn tensor_product_respects_size_cap() {
        // 2^17 exceeds the default cap of 2^16
        let a = Operator::identity(lay(Factor::A, 512));
        let b = Operator::identity(lay(Factor::S, 256));
        assert!(matches!(tensor_product(&a, &b), Err(Error::Size { .. })));
    }

    #[test]
    fn embed_on_second_factor() {
        let l = SpaceLayout::new([(Factor::A, 2), (Factor::S, 2)]).unwrap();
        let e = embed(&pauli::sigma_z(), &l, Factor::S).unwrap();
        let k = tensor_product(&Operator::identity(lay(Factor::A, 2)), &pauli::sigma_z()).unwrap();
        assert_eq!(e.max_abs_diff(&k).unwrap(), 0.0);
        assert!(matches!(
            embed(&pauli::sigma_z(), &l, Factor::B),
            Err(Error::UnknownFactor(Factor::B))
        ));
        assert!(matches!(
            embed(&Operator::identity(lay(Factor::S, 3)), &l, Factor::S),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn embed_identity_is_identity() {
        let l = SpaceLayout::new([(Factor::A, 3), (Factor::B, 2), (Factor::S, 2)]).unwrap();
        let e = embed(&Operator::identity(lay(Factor::A, 3)), &l, Factor::A).unwrap();
        assert_eq!(e.max_abs_diff(&Operator::identity(l)).unwrap(), 0.0);
    }

    #[test]
    fn pauli_commutator() {
        let c = commutator(&pauli::sigma_x(), &pauli::sigma_y()).unwrap();
        let want = pauli::sigma_z().scale(C64::new(0.0, 2.0));
        assert!(c.max_abs_diff(&want).unwrap() < 1e-15);
        let self_c = commutator(&pauli::sigma_x(), &pauli::sigma_x()).unwrap();
        assert_eq!(self_c.max_norm(), 0.0);
        let anti = anticommutator(&pauli::sigma_x(), &pauli::sigma_y()).unwrap();
        assert!(anti.max_norm() < 1e-15);
    }

    #[test]
    fn commutator_dim_mismatch() {
        assert!(commutator(&pauli::sigma_x(), &Operator::identity(lay(Factor::S, 3))).is_err());
    }

    #[test]
    fn basic_expectations() {
        let l = lay(Factor::S, 2);
        let zero = StateVector::basis(l.clone(), 0).unwrap();
        assert_eq!(
            expectation(&zero, &pauli::sigma_z()).unwrap(),
            C64::new(1.0, 0.0)
        );
        let plus = StateVector::normalized(vec![C64::new(1.0, 0.0); 2], l.clone()).unwrap();
        assert!((expectation(&plus, &pauli::sigma_x()).unwrap() - 1.0).norm() < 1e-15);
        let psi = StateVector::normalized(vec![C64::new(0.3, -0.2), C64::new(0.1, 0.9)], l.clone())
            .unwrap();
        assert!((expectation(&psi, &Operator::identity(l)).unwrap() - 1.0).norm() < 1e-15);
        assert!(expectation(&psi, &Operator::identity(lay(Factor::S, 3))).is_err());
    }
}
