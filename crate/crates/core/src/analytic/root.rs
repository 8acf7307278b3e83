use std::cmp::Ordering;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{AnalyticError, PrecisionPolicy, RealInterval};

/// `Ψ_k(x) = x^k - x^(k-1) - … - x - 1`, evaluated exactly by Horner's rule.
pub fn psi_eval(k: usize, x: &Rational) -> Rational {
    assert!(k >= 2, "order k must be at least 2");
    let mut acc = Rational::from(1);
    for _ in 0..k {
        acc *= x;
        acc -= 1u32;
    }
    acc
}

/// Sign of `Ψ_k(x)`. For `x > 1` this uses `(x - 1) Ψ_k(x) = x^k (x - 2) + 1`
/// on the integer numerator and denominator, which needs a single power.
pub fn psi_sign(k: usize, x: &Rational) -> Ordering {
    if *x <= 1 {
        return psi_eval(k, x).cmp0();
    }
    let (num, den) = (x.numer(), x.denom());
    let k32 = u32::try_from(k).expect("order fits in u32");
    let head = Integer::from(num.pow(k32)) * Integer::from(num - Integer::from(den * 2u32));
    let tail = Integer::from(den.pow(k32 + 1));
    (head + tail).cmp0()
}

/// Certified bracket `lo < α(k) < hi` with the signs of `Ψ_k` checked exactly
/// at both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RootCertificate {
    pub k: usize,
    pub lo: Rational,
    pub hi: Rational,
    pub alpha: RealInterval,
    pub sign_lo: Sign,
    pub sign_hi: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

/// `2(1 - 2^-k)`.
pub fn lower_bracket(k: usize) -> Rational {
    Rational::from(2) - Rational::from((Integer::from(1), Integer::from(1) << (k as u32 - 1)))
}

impl RootCertificate {
    /// Width of the exact bracket.
    pub fn width(&self) -> Rational {
        Rational::from(&self.hi - &self.lo)
    }

    pub fn width_within(&self, bits: u32) -> bool {
        self.width() <= Rational::from((Integer::from(1), Integer::from(1) << bits))
    }

    /// Re-check both endpoint signs and the a-priori bracket.
    pub fn verify(&self) -> bool {
        psi_sign(self.k, &self.lo) == Ordering::Less
            && psi_sign(self.k, &self.hi) == Ordering::Greater
            && self.lo > lower_bracket(self.k)
            && self.hi < 2
            && self.alpha.contains_rational(&self.lo)
            && self.alpha.contains_rational(&self.hi)
    }

    /// Decimal expansion of α truncated to `digits` places, when both
    /// endpoints agree on it.
    pub fn truncated_decimal(&self, digits: usize) -> Option<String> {
        let scale = Integer::from(Integer::u_pow_u(10, digits as u32));
        let lo = Rational::from(&self.lo * &scale).floor().numer().clone();
        let hi = Rational::from(&self.hi * &scale).floor().numer().clone();
        if lo != hi {
            return None;
        }
        let s = format!("{:0>width$}", lo.to_string(), width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        Some(if digits == 0 {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        })
    }
}

fn dyadic(x: &Float) -> Rational {
    x.to_rational().expect("finite float")
}

/// Largest `b` with `hi - lo <= 2^-b`, approximately.
fn width_bits(lo: &Rational, hi: &Rational) -> u32 {
    let w = Float::with_val(64, Rational::from(hi - lo));
    w.get_exp().map_or(0, |e| (-e).max(0) as u32)
}

fn bisect(k: usize, lo: &mut Rational, hi: &mut Rational) {
    let mid = Rational::from(&*lo + &*hi) / 2u32;
    match psi_sign(k, &mid) {
        Ordering::Less => *lo = mid,
        Ordering::Greater => *hi = mid,
        Ordering::Equal => {
            // Ψ_k is irreducible of degree ≥ 2, so a rational root is impossible.
            unreachable!("rational root of an irreducible polynomial")
        }
    }
}

/// One Newton step on `g(x) = x^k (x - 2) + 1` at working precision `prec`.
fn newton_step(k: usize, x: &Float, prec: u32) -> Float {
    let k32 = k as i32;
    let x = Float::with_val(prec, x);
    let xk1 = Float::with_val(prec, (&x).pow(k32 - 1));
    let xk = Float::with_val(prec, &xk1 * &x);
    let g = Float::with_val(prec, &xk * Float::with_val(prec, &x - 2u32)) + 1u32;
    let dg = xk1
        * Float::with_val(
            prec,
            Float::with_val(prec, &x * (k as u32 + 1)) - 2 * k as u32,
        );
    x - g / dg
}

/// Certified enclosure of the dominant root α(k) of width at most
/// `2^-precision_bits`.
///
/// Bisection from `(2(1 - 2^-k), 2)` narrows the bracket to `2^-8`, then
/// Newton iterates at doubling precision; each Newton candidate `x ± 2^-p`
/// is accepted only when the exact signs bracket the root, otherwise the
/// step falls back to bisection.
pub fn dominant_root(
    k: usize,
    precision_bits: u32,
    policy: &PrecisionPolicy,
) -> Result<RootCertificate, AnalyticError> {
    if k < 2 {
        return Err(AnalyticError::InvalidOrder(k));
    }
    if precision_bits < 8 {
        return Err(AnalyticError::PrecisionTooLow(precision_bits));
    }
    policy.check(precision_bits)?;

    let mut lo = lower_bracket(k);
    let mut hi = Rational::from(2);
    debug_assert_eq!(psi_sign(k, &lo), Ordering::Less);
    debug_assert_eq!(psi_sign(k, &hi), Ordering::Greater);

    let within = |lo: &Rational, hi: &Rational, bits: u32| {
        Rational::from(hi - lo) <= Rational::from((Integer::from(1), Integer::from(1) << bits))
    };

    // The a-priori bracket is open at the lower end; bisect until the lower
    // endpoint has moved off it.
    let floor = lo.clone();
    while !within(&lo, &hi, 8.min(precision_bits)) || lo == floor {
        bisect(k, &mut lo, &mut hi);
    }

    let guard = 16 + usize::BITS - k.leading_zeros();
    let mut p = width_bits(&lo, &hi).max(32);
    let mut x = Float::with_val(p + guard, Rational::from(&lo + &hi) / 2u32);
    while !within(&lo, &hi, precision_bits) {
        p = (2 * p).min(precision_bits + 2);
        let work = p + guard;
        x = newton_step(k, &x, work);
        x = newton_step(k, &x, work);
        let delta = Rational::from((Integer::from(1), Integer::from(1) << p));
        let xr = dyadic(&x);
        let cand_lo = Rational::from(&xr - &delta);
        let cand_hi = xr + delta;
        let contracts = cand_lo >= lo
            && cand_hi <= hi
            && psi_sign(k, &cand_lo) == Ordering::Less
            && psi_sign(k, &cand_hi) == Ordering::Greater;
        if contracts {
            lo = cand_lo;
            hi = cand_hi;
        } else {
            log::trace!("newton did not contract for k={k} at {p} bits; bisecting");
            for _ in 0..8 {
                bisect(k, &mut lo, &mut hi);
            }
            x = Float::with_val(work, Rational::from(&lo + &hi) / 2u32);
            p = width_bits(&lo, &hi).max(16);
        }
    }

    let prec = precision_bits + 2 * guard + 8;
    let alpha = RealInterval::new(
        Float::with_val_round(prec, &lo, Round::Down).0,
        Float::with_val_round(prec, &hi, Round::Up).0,
    );
    Ok(RootCertificate {
        k,
        sign_lo: psi_sign(k, &lo).into(),
        sign_hi: psi_sign(k, &hi).into(),
        lo,
        hi,
        alpha,
    })
}
