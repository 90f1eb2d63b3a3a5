use super::layout::SpaceLayout;
use crate::{Error, Result, C64};

/// Normalization tolerance for [`StateVector`].
pub const NORM_TOL: f64 = 1e-12;

/// `⟨a|b⟩`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between two amplitude vectors.
pub fn distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Unit vector with a declared tensor layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    layout: SpaceLayout,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<C64>, layout: SpaceLayout) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimMismatch {
                expected: layout.dim(),
                found: amps.len(),
            });
        }
        let n = norm(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self { amps, layout })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C64>, layout: SpaceLayout) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimMismatch {
                expected: layout.dim(),
                found: amps.len(),
            });
        }
        let n = norm(&amps);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        amps.iter_mut().for_each(|z| *z /= n);
        Ok(Self { amps, layout })
    }

    pub fn basis(layout: SpaceLayout, k: usize) -> Result<Self> {
        let n = layout.dim();
        if k >= n {
            return Err(Error::param(
                "k",
                format!("basis index {k} out of range 0..{n}"),
            ));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amps, layout })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn with_phase(mut self, phase: C64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::param(
                "phase",
                format!("|phase| = {} is not 1", phase.norm()),
            ));
        }
        self.amps.iter_mut().for_each(|z| *z *= phase);
        Ok(self)
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(layout.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Ok(Self { amps, layout })
    }

    /// Overlap modulus `|⟨self|other⟩|`, insensitive to global phase.
    pub fn fidelity_amplitude(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }
}
