//! Interval certificates for the a-priori inequalities satisfied by α(k)
//! and its derived constants.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use super::root::lower_bracket;
use super::{AnalyticError, DerivedConstants, PrecisionPolicy, RealInterval};

fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from(Integer::from(1) << e as u32)
    } else {
        Rational::from((Integer::from(1), Integer::from(1) << (-e) as u32))
    }
}

/// `2(1 - 2^-k) < lo` and `hi < 2` for the certified root.
pub fn root_in_bracket(consts: &DerivedConstants) -> bool {
    let root = &consts.root;
    root.lo > lower_bracket(root.k) && root.hi < 2 && root.verify()
}

/// `1/2 < f_k(α) < 3/4`.
pub fn f_alpha_in_range(consts: &DerivedConstants) -> bool {
    consts
        .f_alpha
        .strictly_inside(&Rational::from((1, 2)), &Rational::from((3, 4)))
}

/// `3 - 4/2^k < 2α - 1 < 3`.
pub fn two_alpha_minus_one_in_range(consts: &DerivedConstants) -> bool {
    let k = consts.k as i64;
    consts
        .two_alpha_minus_one
        .strictly_inside(&(Rational::from(3) - pow2(2 - k)), &Rational::from(3))
}

/// `1 / log α < 2.1`, i.e. `log α > 10/21`.
pub fn inverse_log_alpha_bound(consts: &DerivedConstants) -> bool {
    *consts.log_alpha.lo() > Rational::from((10, 21))
}

/// `|f_k(α) - 1/2| < 2k / 2^k`.
pub fn f_alpha_near_half(consts: &DerivedConstants) -> bool {
    let k = consts.k as i64;
    let half = RealInterval::from_rational(&Rational::from((1, 2)), consts.precision_bits());
    let gap = consts.f_alpha.sub(&half).mag();
    gap < Rational::from(2 * k) * pow2(-k)
}

/// `|(2α - 1) - 3| < 4 / 2^k`.
pub fn two_alpha_minus_one_near_three(consts: &DerivedConstants) -> bool {
    let k = consts.k as i64;
    let three = RealInterval::from_rational(&Rational::from(3), consts.precision_bits());
    let gap = consts.two_alpha_minus_one.sub(&three).mag();
    gap < pow2(2 - k)
}

/// Certify `|α^(n-1) - 2^(n-1)| < 2^n / 2^(k/2)` in the normalized form
/// `|(α/2)^(n-1) - 1|^2 < 2^(2-k)`, escalating precision until the
/// enclosure decides the inequality.
pub fn alpha_power_near_two_power(
    consts: &DerivedConstants,
    n: i64,
    policy: &PrecisionPolicy,
) -> Result<bool, AnalyticError> {
    let k = consts.k;
    let e = i32::try_from(n - 1).map_err(|_| AnalyticError::DomainViolation("index too large"))?;
    if e < 0 {
        return Err(AnalyticError::DomainViolation("index must be at least 1"));
    }
    let bound = pow2(2 - k as i64);
    let n_bits = 64 - (n.unsigned_abs()).leading_zeros();
    let mut prec = (k as u32 / 2 + n_bits + 32).max(consts.precision_bits());
    loop {
        policy.check(prec)?;
        let root = if consts.root.width_within(prec + n_bits + 4) {
            consts.root.clone()
        } else {
            super::dominant_root(k, prec + n_bits + 4, policy)?
        };
        let half_alpha = RealInterval::from_rationals(
            &Rational::from(&root.lo / 2u32),
            &Rational::from(&root.hi / 2u32),
            prec + n_bits + 8,
        );
        let one = RealInterval::from_rational(&Rational::from(1), prec);
        let gap = half_alpha.pow_i(e)?.sub(&one).mag();
        let sq_hi = Float::with_val_round(prec, gap.square_ref(), Round::Up).0;
        if sq_hi < bound {
            return Ok(true);
        }
        let gap_lo_sq = {
            let p = half_alpha.pow_i(e)?.sub(&one);
            // lower bound on |x - 1| over the enclosure
            let lo_abs = if p.lo().is_sign_positive() {
                p.lo().clone()
            } else if p.hi().is_sign_negative() {
                Float::with_val(p.hi().prec(), -p.hi())
            } else {
                Float::new(prec)
            };
            Float::with_val_round(prec, lo_abs.square_ref(), Round::Down).0
        };
        if gap_lo_sq >= bound {
            return Ok(false);
        }
        prec *= 2;
    }
}
