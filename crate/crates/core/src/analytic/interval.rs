use std::cmp::Ordering;
use std::fmt;

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::AnalyticError;

/// Closed enclosure `[lo, hi]` with MPFR endpoints. Every operation rounds
/// the lower endpoint toward −∞ and the upper endpoint toward +∞.
#[derive(Clone, PartialEq)]
pub struct RealInterval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Down).0
}

fn up<T>(prec: u32, val: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, val, Round::Up).0
}

impl RealInterval {
    /// Panics if the endpoints are out of order or not finite.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite(),
            "interval endpoints must be finite"
        );
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        Self {
            lo: down(prec, r),
            hi: up(prec, r),
        }
    }

    /// Enclosure of the rational segment `[lo, hi]`.
    pub fn from_rationals(lo: &Rational, hi: &Rational, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self {
            lo: down(prec, lo),
            hi: up(prec, hi),
        }
    }

    pub fn from_integer(n: &Integer, prec: u32) -> Self {
        Self {
            lo: down(prec, n),
            hi: up(prec, n),
        }
    }

    /// `[log p]` for a small positive integer.
    pub fn ln_u(p: u32, prec: u32) -> Self {
        Self {
            lo: down(prec, Float::ln_u(p)),
            hi: up(prec, Float::ln_u(p)),
        }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn precision_bits(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        up(self.precision_bits(), &self.hi - &self.lo)
    }

    /// True when the width does not exceed `2^-bits`.
    pub fn width_within(&self, bits: u32) -> bool {
        let w = self.width();
        w.is_zero()
            || w.get_exp()
                .map_or(false, |e| i64::from(e) <= -i64::from(bits))
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    /// `lo > 0`.
    pub fn is_positive(&self) -> bool {
        self.lo.is_sign_positive() && !self.lo.is_zero()
    }

    /// Upper bound on `max |x|` over the interval.
    pub fn mag(&self) -> Float {
        let a = Float::with_val(self.lo.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.hi.prec(), self.hi.abs_ref());
        if a > b {
            a
        } else {
            b
        }
    }

    /// Strictly inside the open rational interval `(a, b)`.
    pub fn strictly_inside(&self, a: &Rational, b: &Rational) -> bool {
        self.lo > *a && self.hi < *b
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.precision_bits().max(other.precision_bits());
        Self {
            lo: down(prec, &self.lo + &other.lo),
            hi: up(prec, &self.hi + &other.hi),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.precision_bits().max(other.precision_bits());
        Self {
            lo: down(prec, &self.lo - &other.hi),
            hi: up(prec, &self.hi - &other.lo),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.precision_bits().max(other.precision_bits());
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let l = down(prec, a * b);
            let h = up(prec, a * b);
            if lo.as_ref().map_or(true, |x| l < *x) {
                lo = Some(l);
            }
            if hi.as_ref().map_or(true, |x| h > *x) {
                hi = Some(h);
            }
        }
        Self {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, AnalyticError> {
        if other.lo <= 0 && other.hi >= 0 {
            return Err(AnalyticError::DomainViolation(
                "interval divisor contains zero",
            ));
        }
        let prec = self.precision_bits().max(other.precision_bits());
        let recip = Self {
            lo: down(prec, 1 / &other.hi),
            hi: up(prec, 1 / &other.lo),
        };
        Ok(self.mul(&recip))
    }

    /// Multiply by an exact integer.
    pub fn scale(&self, c: &Integer) -> Self {
        let prec = self.precision_bits();
        let (a, b) = (down(prec, &self.lo * c), up(prec, &self.hi * c));
        let (a2, b2) = (down(prec, &self.hi * c), up(prec, &self.lo * c));
        if c.cmp0() == Ordering::Less {
            Self { lo: a2, hi: b2 }
        } else {
            Self { lo: a, hi: b }
        }
    }

    /// Natural logarithm; requires a positive interval.
    pub fn ln(&self) -> Result<Self, AnalyticError> {
        if !self.is_positive() {
            return Err(AnalyticError::DomainViolation(
                "logarithm of a non-positive interval",
            ));
        }
        let prec = self.precision_bits();
        Ok(Self {
            lo: down(prec, self.lo.ln_ref()),
            hi: up(prec, self.hi.ln_ref()),
        })
    }

    /// `x^e` for a positive interval; monotone in each endpoint.
    pub fn pow_i(&self, e: i32) -> Result<Self, AnalyticError> {
        if !self.is_positive() {
            return Err(AnalyticError::DomainViolation(
                "power of a non-positive interval",
            ));
        }
        let prec = self.precision_bits();
        let (lo, hi) = if e >= 0 {
            (&self.lo, &self.hi)
        } else {
            (&self.hi, &self.lo)
        };
        Ok(Self {
            lo: down(prec, lo.pow(e)),
            hi: up(prec, hi.pow(e)),
        })
    }

    /// Exact-integer floor of both endpoints, if they agree.
    pub fn common_floor(&self) -> Option<Integer> {
        let (a, _) = self.lo.to_integer_round(Round::Down)?;
        let (b, _) = self.hi.to_integer_round(Round::Down)?;
        (a == b).then_some(a)
    }

    pub fn midpoint(&self) -> Float {
        let prec = self.precision_bits() + 1;
        Float::with_val(prec, &self.lo + &self.hi) / 2u32
    }
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]@{}",
            self.lo.to_string_radix_round(10, Some(20), Round::Down),
            self.hi.to_string_radix_round(10, Some(20), Round::Up),
            self.precision_bits()
        )
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Exact decimal expansion of a finite binary float.
pub fn exact_decimal(x: &Float) -> String {
    let r = x.to_rational().expect("finite float");
    rational_to_exact_decimal(&r).expect("binary floats have terminating expansions")
}

/// Exact decimal expansion of a rational whose denominator is `2^a 5^b`.
pub fn rational_to_exact_decimal(r: &Rational) -> Option<String> {
    let den = r.denom().clone();
    let twos = den.find_one(0).unwrap_or(0);
    let mut rest = Integer::from(&den >> twos);
    let mut fives = 0u32;
    while rest.is_divisible_u(5) {
        rest = rest.div_exact_u(5);
        fives += 1;
    }
    if rest != 1 {
        return None;
    }
    let places = twos.max(fives);
    let scale = Integer::from(Integer::u_pow_u(2, places - twos))
        * Integer::from(Integer::u_pow_u(5, places - fives));
    let scaled = Integer::from(r.numer() * scale);
    let neg = scaled.cmp0() == Ordering::Less;
    let digits = Integer::from(scaled.abs_ref()).to_string();
    let places = places as usize;
    let body = if places == 0 {
        digits
    } else {
        let padded = format!("{:0>width$}", digits, width = places + 1);
        let (int, frac) = padded.split_at(padded.len() - places);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    };
    Some(if neg { format!("-{body}") } else { body })
}

/// Parse a terminating decimal string exactly.
pub fn parse_exact_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num = Integer::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let den = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
    let r = Rational::from((num, den));
    Some(if neg { -r } else { r })
}

/// Rebuild a float from its exact decimal expansion at the given precision.
pub fn float_from_exact_decimal(s: &str, prec: u32) -> Option<Float> {
    let r = parse_exact_decimal(s)?;
    let (f, ord) = Float::with_val_round(prec, &r, Round::Nearest);
    (ord == Ordering::Equal).then_some(f)
}
