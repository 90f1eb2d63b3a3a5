//! Process-wide numerical configuration.
//!
//! `hbar` defaults to 1 (natural units). Every exponent `e^{±iHθ/ħ}` divides
//! by `hbar()` exactly once, inside [`crate::opalg::unitary_exp`] and the
//! spectral helpers built on the same eigendecomposition.
//!
//! The allocation cap defaults to 65536 and may be overridden through the
//! `MODCLOCK_MAX_DIM` environment variable or [`set_max_dim`].

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crate::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 1 << 16;
pub const MAX_DIM_ENV: &str = "MODCLOCK_MAX_DIM";

static HBAR_BITS: AtomicU64 = AtomicU64::new(0x3ff0_0000_0000_0000); // 1.0
static MAX_DIM: AtomicUsize = AtomicUsize::new(0);

pub fn hbar() -> f64 {
    f64::from_bits(HBAR_BITS.load(Ordering::Relaxed))
}

pub fn set_hbar(value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::param(
            "hbar",
            format!("must be positive and finite, got {value}"),
        ));
    }
    HBAR_BITS.store(value.to_bits(), Ordering::Relaxed);
    Ok(())
}

pub fn max_dim() -> usize {
    match MAX_DIM.load(Ordering::Relaxed) {
        0 => {
            let from_env = std::env::var(MAX_DIM_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v > 0)
                .unwrap_or(DEFAULT_MAX_DIM);
            MAX_DIM.store(from_env, Ordering::Relaxed);
            from_env
        }
        n => n,
    }
}

pub fn set_max_dim(value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::param("max_dim", "must be positive"));
    }
    MAX_DIM.store(value, Ordering::Relaxed);
    Ok(())
}

/// Refuses allocations above the configured cap.
pub fn check_dim(requested: usize) -> Result<()> {
    let max = max_dim();
    if requested > max {
        Err(Error::Size { requested, max })
    } else {
        Ok(())
    }
}
