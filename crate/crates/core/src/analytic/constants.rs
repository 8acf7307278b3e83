use rug::float::Round;
use rug::{Float, Integer, Rational};

use super::root::{dominant_root, RootCertificate};
use super::{AnalyticError, PrecisionPolicy, RealInterval};

/// `f_k(x) = (x - 1) / (2 + (k + 1)(x - 2))`, exactly.
pub fn f_k(k: usize, x: &Rational) -> Rational {
    let num = Rational::from(x - 1u32);
    let den = Rational::from(x * (k as u32 + 1)) - 2 * k as u32;
    num / den
}

/// Enclosures of the constants attached to α(k).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub k: usize,
    pub root: RootCertificate,
    pub f_alpha: RealInterval,
    pub two_alpha_minus_one: RealInterval,
    pub log_alpha: RealInterval,
    pub log_f_alpha: RealInterval,
    pub log_two_alpha_minus_one: RealInterval,
}

impl DerivedConstants {
    pub fn precision_bits(&self) -> u32 {
        self.log_f_alpha.precision_bits()
    }

    fn all(&self) -> [&RealInterval; 5] {
        [
            &self.f_alpha,
            &self.two_alpha_minus_one,
            &self.log_alpha,
            &self.log_f_alpha,
            &self.log_two_alpha_minus_one,
        ]
    }
}

fn evaluate(root: &RootCertificate, prec: u32) -> Result<DerivedConstants, AnalyticError> {
    let k = root.k;
    // f_k is decreasing on the bracket, so the endpoints swap.
    let f_alpha = RealInterval::from_rationals(&f_k(k, &root.hi), &f_k(k, &root.lo), prec);
    let two_lo = Rational::from(&root.lo * 2u32) - 1u32;
    let two_hi = Rational::from(&root.hi * 2u32) - 1u32;
    let two_alpha_minus_one = RealInterval::from_rationals(&two_lo, &two_hi, prec);
    let alpha = RealInterval::from_rationals(&root.lo, &root.hi, prec);
    Ok(DerivedConstants {
        k,
        root: root.clone(),
        log_alpha: alpha.ln()?,
        log_f_alpha: f_alpha.ln()?,
        log_two_alpha_minus_one: two_alpha_minus_one.ln()?,
        f_alpha,
        two_alpha_minus_one,
    })
}

/// Enclosures of `f_k(α)`, `2α - 1` and the three logarithms, each of width
/// at most `2^-precision_bits`. The root is refined as needed.
pub fn derived_constants(
    cert: &RootCertificate,
    precision_bits: u32,
    policy: &PrecisionPolicy,
) -> Result<DerivedConstants, AnalyticError> {
    policy.check(precision_bits)?;
    let k = cert.k;
    // |f_k'| < k on the bracket; one extra bit per doubling of k is enough.
    let mut guard = 8 + (usize::BITS - k.leading_zeros());
    loop {
        let root_bits = precision_bits + guard;
        policy.check(root_bits)?;
        let root = if cert.width_within(root_bits) {
            cert.clone()
        } else {
            log::trace!("refining root for k={k} to {root_bits} bits");
            dominant_root(k, root_bits, policy)?
        };
        let consts = evaluate(&root, precision_bits + guard + 8)?;
        if consts.all().iter().all(|i| i.width_within(precision_bits)) {
            return Ok(consts);
        }
        guard *= 2;
    }
}

/// Convenience: certify the root and constants for `k` in one call.
pub fn constants_for(
    k: usize,
    precision_bits: u32,
    policy: &PrecisionPolicy,
) -> Result<DerivedConstants, AnalyticError> {
    let root = dominant_root(k, precision_bits.max(8), policy)?;
    derived_constants(&root, precision_bits, policy)
}

fn binet_at(
    consts: &DerivedConstants,
    value: &Integer,
    n: i64,
) -> Result<RealInterval, AnalyticError> {
    let e = i32::try_from(n - 1).map_err(|_| AnalyticError::DomainViolation("index too large"))?;
    let prec = consts.precision_bits();
    let alpha = RealInterval::from_rationals(&consts.root.lo, &consts.root.hi, prec);
    let main = consts
        .f_alpha
        .mul(&consts.two_alpha_minus_one)
        .mul(&alpha.pow_i(e)?);
    Ok(RealInterval::from_integer(value, prec).sub(&main))
}

/// Enclosure of `L_n - f_k(α)(2α - 1)α^(n-1)`.
///
/// Precision is doubled until the enclosure certifies `|residual| < 3/2` or
/// is narrow enough (`2^-16`) that the sign of `|residual| - 3/2` is settled;
/// the caller decides what to do with a certified violation.
pub fn binet_residual(
    consts: &DerivedConstants,
    n: i64,
    policy: &PrecisionPolicy,
) -> Result<RealInterval, AnalyticError> {
    let k = consts.k;
    let params = crate::sequence::KParams::new(k).map_err(|_| AnalyticError::InvalidOrder(k))?;
    let value = crate::sequence::term(params, n)
        .map_err(|_| AnalyticError::DomainViolation("index below 2 - k"))?;
    let three_halves = Rational::from((3, 2));
    let mut current = consts.clone();
    loop {
        let res = binet_at(&current, &value, n)?;
        if res.mag() < three_halves || res.width_within(16) {
            return Ok(res);
        }
        let next = current.precision_bits() * 2;
        log::trace!("binet residual k={k} n={n}: escalating to {next} bits");
        policy.check(next)?;
        current = derived_constants(&current.root, next, policy)?;
    }
}

/// Closed-form upper bounds for the logarithmic heights of `f_k(α)`, `α` and
/// `2α - 1`: `3 log k`, `0.7 / k` and `3 / k`, rounded up.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightBounds {
    pub f_alpha: Float,
    pub alpha: Float,
    pub two_alpha_minus_one: Float,
}

pub fn height_bounds(k: usize) -> HeightBounds {
    const PREC: u32 = 128;
    let k32 = k as u32;
    let log_k = Float::with_val_round(PREC, Float::ln_u(k32), Round::Up).0;
    HeightBounds {
        f_alpha: Float::with_val_round(PREC, log_k * 3u32, Round::Up).0,
        alpha: Float::with_val_round(PREC, Rational::from((7, 10 * k32)), Round::Up).0,
        two_alpha_minus_one: Float::with_val_round(PREC, Rational::from((3, k32)), Round::Up).0,
    }
}
