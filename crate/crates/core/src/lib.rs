//! Finite-dimensional timeless quantum mechanics.
//!
//! A clock factor `A` and a system factor `S` are represented as dense
//! complex operators. The cyclic clock has exact discrete time and energy
//! operators, so clock translations are permutations and the modular
//! identities of the theory hold to roundoff on the tick lattice.
//!
//! Module map:
//!
//! * [`opalg`]: dense operator algebra (tensor products, Hermitian
//!   eigendecomposition, unitary exponentials).
//! * [`clock`]: the cyclic clock model.
//! * [`pwframe`]: Hamiltonian assembly, history states and time-conditioned
//!   expectations.
//! * [`modvars`]: modular unitaries, Fourier moment profiles and Weyl checks.
//! * [`verify`]: residual checks of the dynamical identities.
//! * [`scenarios`]: double slit, particle and piston, pulsed spin.

pub mod clock;
pub mod config;
pub mod error;
pub mod grid;
pub mod modvars;
pub mod opalg;
pub mod pwframe;
pub mod scenarios;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
