//! Certified enclosures of the dominant root α(k) and the constants built
//! from it.
//!
//! Root brackets are certified by exact rational sign evaluation of `Ψ_k`;
//! everything downstream is MPFR interval arithmetic with outward rounding.

mod checks;
mod constants;
mod interval;
mod root;

use thiserror::Error;

pub use checks::{
    alpha_power_near_two_power, f_alpha_in_range, f_alpha_near_half, inverse_log_alpha_bound,
    root_in_bracket, two_alpha_minus_one_in_range, two_alpha_minus_one_near_three,
};
pub use constants::{
    binet_residual, constants_for, derived_constants, f_k, height_bounds, DerivedConstants,
    HeightBounds,
};
pub use interval::{
    exact_decimal, float_from_exact_decimal, parse_exact_decimal, rational_to_exact_decimal,
    RealInterval,
};
pub use root::{dominant_root, lower_bracket, psi_eval, psi_sign, RootCertificate, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticError {
    #[error("order k must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("requested precision {0} bits is below the minimum of 8")]
    PrecisionTooLow(u32),
    #[error("precision exhausted: {requested} bits exceeds the cap of {cap} bits")]
    PrecisionExhausted { requested: u32, cap: u32 },
    #[error("domain violation: {0}")]
    DomainViolation(&'static str),
}

/// Precision escalation policy: work starts at `start_bits` (or the request,
/// if larger), doubles on failure, and never exceeds `cap_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub start_bits: u32,
    pub cap_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            start_bits: 192,
            cap_bits: 1 << 21,
        }
    }
}

impl PrecisionPolicy {
    pub fn check(&self, requested: u32) -> Result<(), AnalyticError> {
        if requested > self.cap_bits {
            return Err(AnalyticError::PrecisionExhausted {
                requested,
                cap: self.cap_bits,
            });
        }
        Ok(())
    }

    pub fn initial(&self, requested: u32) -> u32 {
        self.start_bits.max(requested)
    }
}
