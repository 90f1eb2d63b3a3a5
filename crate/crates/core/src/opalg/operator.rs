use std::ops::{Add, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};

use super::layout::{Factor, SpaceLayout};
use crate::{Error, Result, C64};

/// Hermiticity tolerance, relative to `max(1, ‖A‖_max)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unitarity tolerance on `‖A†A − I‖_max`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Dense complex square matrix with a declared tensor layout.
///
/// The `hermitian` and `unitary` flags are only ever set after a numerical
/// check (or by constructors whose output satisfies them by construction),
/// and are propagated through the algebra where the property is preserved.
#[derive(Clone, Debug)]
pub struct Operator {
    mat: Mat<C64>,
    layout: SpaceLayout,
    hermitian: bool,
    unitary: bool,
}

pub(crate) fn mat_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Mat<C64> {
    let mut out = Mat::<C64>::zeros(a.nrows(), b.ncols());
    matmul(
        out.as_mut(),
        Accum::Replace,
        a,
        b,
        C64::new(1.0, 0.0),
        Par::Seq,
    );
    out
}

impl Operator {
    pub fn new(mat: Mat<C64>, layout: SpaceLayout) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        if mat.nrows() != layout.dim() {
            return Err(Error::DimMismatch {
                expected: layout.dim(),
                found: mat.nrows(),
            });
        }
        Ok(Self {
            mat,
            layout,
            hermitian: false,
            unitary: false,
        })
    }

    pub fn from_fn(layout: SpaceLayout, f: impl FnMut(usize, usize) -> C64) -> Self {
        let n = layout.dim();
        Self {
            mat: Mat::from_fn(n, n, f),
            layout,
            hermitian: false,
            unitary: false,
        }
    }

    /// Row-major construction, mostly for small literal matrices.
    pub fn from_rows(layout: SpaceLayout, rows: &[Vec<C64>]) -> Result<Self> {
        let n = layout.dim();
        if rows.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(layout, |i, j| rows[i][j]))
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let n = layout.dim();
        Self {
            mat: Mat::zeros(n, n),
            layout,
            hermitian: true,
            unitary: false,
        }
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.dim();
        Self {
            mat: Mat::identity(n, n),
            layout,
            hermitian: true,
            unitary: true,
        }
    }

    pub fn diagonal(layout: SpaceLayout, diag: &[C64]) -> Result<Self> {
        if diag.len() != layout.dim() {
            return Err(Error::DimMismatch {
                expected: layout.dim(),
                found: diag.len(),
            });
        }
        let mut op = Self::zeros(layout);
        op.hermitian = diag.iter().all(|z| z.im == 0.0);
        op.unitary = diag.iter().all(|z| (z.norm() - 1.0).abs() < UNITARY_TOL);
        for (i, &z) in diag.iter().enumerate() {
            op.mat[(i, i)] = z;
        }
        Ok(op)
    }

    pub fn real_diagonal(layout: SpaceLayout, diag: &[f64]) -> Result<Self> {
        let diag: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(layout, &diag)
    }

    /// Permutation with `|k⟩ ↦ |perm[k]⟩`.
    pub fn permutation(layout: SpaceLayout, perm: &[usize]) -> Result<Self> {
        let n = layout.dim();
        if perm.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::param("perm", "not a permutation"));
            }
        }
        let mut op = Self::zeros(layout);
        op.hermitian = perm.iter().enumerate().all(|(k, &p)| perm[p] == k);
        op.unitary = true;
        for (k, &p) in perm.iter().enumerate() {
            op.mat[(p, k)] = C64::new(1.0, 0.0);
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn mat(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_mat(self) -> Mat<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Relabels the layout; the dimensions must agree.
    pub fn with_layout(mut self, layout: SpaceLayout) -> Result<Self> {
        if layout.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: layout.dim(),
            });
        }
        self.layout = layout;
        Ok(self)
    }

    pub fn relabel(self, label: Factor) -> Result<Self> {
        let dim = self.dim();
        self.with_layout(SpaceLayout::single(label, dim)?)
    }

    pub fn max_norm(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.mat[(i, j)].norm());
            }
        }
        m
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                m = m.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn unitary_deviation(&self) -> f64 {
        let prod = mat_mul(self.adjoint().mat(), self.mat());
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        m
    }

    /// Verifies hermiticity and sets the flag. The matrix is replaced by its
    /// Hermitian part, which leaves exactly Hermitian input bit-identical.
    pub fn mark_hermitian(mut self) -> Result<Self> {
        if self.hermitian {
            return Ok(self);
        }
        let deviation = self.hermitian_deviation();
        if !(deviation <= HERMITIAN_TOL * self.max_norm().max(1.0)) {
            return Err(Error::NotHermitian { deviation });
        }
        let n = self.dim();
        for j in 0..n {
            for i in 0..=j {
                let z = (self.mat[(i, j)] + self.mat[(j, i)].conj()) * 0.5;
                self.mat[(i, j)] = z;
                self.mat[(j, i)] = z.conj();
            }
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn mark_unitary(mut self) -> Result<Self> {
        if self.unitary {
            return Ok(self);
        }
        let deviation = self.unitary_deviation();
        if !(deviation < UNITARY_TOL) {
            return Err(Error::param(
                "operator",
                format!("not unitary (‖A†A − I‖ = {deviation:.3e})"),
            ));
        }
        self.unitary = true;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(j, i)].conj()),
            layout: self.layout.clone(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        let n = self.dim();
        Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] * z),
            layout: self.layout.clone(),
            hermitian: self.hermitian && z.im == 0.0,
            unitary: self.unitary && z.norm() == 1.0,
        }
    }

    fn check_same_layout(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_layout(other)?;
        Ok(Self {
            mat: mat_mul(self.mat(), other.mat()),
            layout: self.layout.clone(),
            hermitian: false,
            unitary: self.unitary && other.unitary,
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_layout(other)?;
        let n = self.dim();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] + other.mat[(i, j)]),
            layout: self.layout.clone(),
            hermitian: self.hermitian && other.hermitian,
            unitary: false,
        })
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_layout(other)?;
        let n = self.dim();
        Ok(Self {
            mat: Mat::from_fn(n, n, |i, j| self.mat[(i, j)] - other.mat[(i, j)]),
            layout: self.layout.clone(),
            hermitian: self.hermitian && other.hermitian,
            unitary: false,
        })
    }

    /// `max |A_ij − B_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let n = self.dim();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
            }
        }
        Ok(m)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::new(0.0, 0.0) {
                continue;
            }
            let col = self.mat.col(j);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vj;
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// Diagonal entries, if every off-diagonal entry is exactly zero.
    pub fn diagonal_entries(&self) -> Option<Vec<C64>> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.mat[(i, j)] != C64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.mat[(i, i)]).collect())
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.mat == other.mat
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;

    /// Panics on layout mismatch; use [`Operator::try_mul`] for a `Result`.
    fn mul(self, rhs: &'a Operator) -> Operator {
        self.try_mul(rhs)
            .expect("operator product: layout mismatch")
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn add(self, rhs: &'a Operator) -> Operator {
        self.try_add(rhs).expect("operator sum: layout mismatch")
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;

    fn sub(self, rhs: &'a Operator) -> Operator {
        self.try_sub(rhs)
            .expect("operator difference: layout mismatch")
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;

    fn mul(self, z: C64) -> Operator {
        self.scale(z)
    }
}

/// Pauli matrices on a two-level `S` factor.
pub mod pauli {
    use super::*;

    fn two(rows: [[C64; 2]; 2]) -> Operator {
        let layout = SpaceLayout::single(Factor::S, 2).expect("two-level layout");
        Operator::from_fn(layout, |i, j| rows[i][j])
            .mark_hermitian()
            .expect("Pauli matrices are Hermitian")
    }

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn sigma_x() -> Operator {
        let mut op = two([[O, ONE], [ONE, O]]);
        op.unitary = true;
        op
    }

    pub fn sigma_y() -> Operator {
        let mut op = two([[O, -I], [I, O]]);
        op.unitary = true;
        op
    }

    pub fn sigma_z() -> Operator {
        let mut op = two([[ONE, O], [O, -ONE]]);
        op.unitary = true;
        op
    }

    pub fn identity() -> Operator {
        Operator::identity(SpaceLayout::single(Factor::S, 2).expect("two-level layout"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize) -> SpaceLayout {
        SpaceLayout::single(Factor::S, n).unwrap()
    }

    #[test]
    fn mark_hermitian_rejects_skew_part() {
        let op = Operator::from_rows(
            s(2),
            &[
                vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
                vec![C64::new(0.0, 1.0), C64::new(2.0, 0.0)],
            ],
        )
        .unwrap();
        assert!(matches!(
            op.mark_hermitian(),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn permutation_is_unitary_and_maps_basis() {
        let p = Operator::permutation(s(3), &[1, 2, 0]).unwrap();
        assert!(p.is_unitary());
        assert!(!p.is_hermitian());
        let e0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let out = p.apply(&e0).unwrap();
        assert_eq!(out[1], C64::new(1.0, 0.0));
        assert!(p.unitary_deviation() < 1e-15);
        assert!(Operator::permutation(s(3), &[0, 0, 1]).is_err());
    }

    #[test]
    fn algebra_rejects_layout_mismatch() {
        let a = Operator::identity(s(2));
        let b = Operator::identity(SpaceLayout::single(Factor::A, 2).unwrap());
        assert!(matches!(a.try_mul(&b), Err(Error::LayoutMismatch(_))));
        assert!(matches!(
            a.try_add(&Operator::identity(s(3))),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z());
        let xy = &x * &y;
        let iz = z.scale(C64::new(0.0, 1.0));
        assert!(xy.max_abs_diff(&iz).unwrap() < 1e-15);
        assert!((&x * &x).max_abs_diff(&pauli::identity()).unwrap() < 1e-15);
    }
}
