use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::check_dim;
use crate::{Error, Result};

/// Tensor factor labels: external clock `A`, internal clock `B`, system `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
    S,
}

/// Ordered factor structure of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceLayout {
    factors: Vec<(Factor, usize)>,
}

impl SpaceLayout {
    pub fn new(factors: impl IntoIterator<Item = (Factor, usize)>) -> Result<Self> {
        let factors: Vec<_> = factors.into_iter().collect();
        if factors.is_empty() {
            return Err(Error::LayoutMismatch(
                "layout needs at least one factor".into(),
            ));
        }
        let mut dim = 1usize;
        for (i, &(label, d)) in factors.iter().enumerate() {
            if d == 0 {
                return Err(Error::param(
                    "layout",
                    format!("factor {label:?} has dimension 0"),
                ));
            }
            if factors[..i].iter().any(|&(l, _)| l == label) {
                return Err(Error::LayoutMismatch(format!(
                    "factor {label:?} appears twice"
                )));
            }
            dim = dim.checked_mul(d).ok_or(Error::Size {
                requested: usize::MAX,
                max: crate::config::max_dim(),
            })?;
        }
        check_dim(dim)?;
        Ok(Self { factors })
    }

    pub fn single(label: Factor, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|&(_, d)| d).product()
    }

    pub fn factors(&self) -> &[(Factor, usize)] {
        &self.factors
    }

    pub fn position(&self, label: Factor) -> Option<usize> {
        self.factors.iter().position(|&(l, _)| l == label)
    }

    pub fn factor_dim(&self, label: Factor) -> Option<usize> {
        self.position(label).map(|p| self.factors[p].1)
    }

    pub fn concat(&self, other: &SpaceLayout) -> Result<Self> {
        Self::new(self.factors.iter().chain(other.factors.iter()).copied())
    }

    /// Product of the dimensions before and after `label`.
    pub(crate) fn split_around(&self, label: Factor) -> Result<(usize, usize, usize)> {
        let p = self.position(label).ok_or(Error::UnknownFactor(label))?;
        let left = self.factors[..p].iter().map(|&(_, d)| d).product();
        let right = self.factors[p + 1..].iter().map(|&(_, d)| d).product();
        Ok((left, self.factors[p].1, right))
    }
}

impl fmt::Display for SpaceLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (label, d)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{label:?}:{d}")?;
        }
        write!(f, "]")
    }
}
