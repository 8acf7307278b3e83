//! Closed-form bounds: Matveev's inequality, the Guzmán–Luca lemma, the
//! upper bounds on `log n` and `n`, and the inequality chains of the
//! case analysis.
//!
//! Every upper bound is evaluated in MPFR with rounding toward `+∞`;
//! quantities that enter as subtrahends or divisors are rounded the other
//! way. Decimal constants such as `1.4e27` are converted exactly from
//! rationals.

use std::collections::BTreeMap;

use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, Pow, PowAssignRound};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Working precision of every bound evaluation.
pub const PREC: u32 = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("domain error: {0}")]
    Domain(String),
}

fn float_up<T>(v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(PREC, v, Round::Up).0
}

fn float_down<T>(v: T) -> Float
where
    Float: rug::ops::AssignRound<T, Round = Round, Ordering = std::cmp::Ordering>,
{
    Float::with_val_round(PREC, v, Round::Down).0
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn ln_up(x: &Float) -> Float {
    let mut r = x.clone();
    r.ln_round(Round::Up);
    r
}

fn ln_down(x: &Float) -> Float {
    let mut r = x.clone();
    r.ln_round(Round::Down);
    r
}

fn mul_up(a: &Float, b: &Float) -> Float {
    let mut r = a.clone();
    r.mul_assign_round(b, Round::Up);
    r
}

fn add_up(a: &Float, b: &Float) -> Float {
    let mut r = a.clone();
    r.add_assign_round(b, Round::Up);
    r
}

fn pow_up(a: &Float, e: &Float) -> Float {
    let mut r = a.clone();
    r.pow_assign_round(e, Round::Up);
    r
}

fn powu_up(a: &Float, e: u32) -> Float {
    let mut r = a.clone();
    r.pow_assign_round(e, Round::Up);
    r
}

/// Parameters of one application of Matveev's theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct MatveevInstance {
    pub t: u32,
    pub d: u32,
    pub b: Float,
    pub a: Vec<Float>,
}

impl MatveevInstance {
    pub fn new(d: u32, b: Float, a: Vec<Float>) -> Result<Self, BoundsError> {
        let t = a.len() as u32;
        if t == 0 {
            return Err(BoundsError::Precondition("t must be at least 1".into()));
        }
        if d == 0 {
            return Err(BoundsError::Precondition("D must be at least 1".into()));
        }
        if b < 1 {
            return Err(BoundsError::Precondition(format!(
                "B = {} is below 1",
                b.to_f64()
            )));
        }
        let floor = ratio(16, 100);
        if let Some(bad) = a.iter().find(|x| **x < floor) {
            return Err(BoundsError::Precondition(format!(
                "A_i = {} is below 0.16",
                bad.to_f64()
            )));
        }
        Ok(Self { t, d, b, a })
    }
}

/// `1.4 · 30^(t+3) · t^4.5 · D² (1 + log D)(1 + log B) · A_1 ⋯ A_t`, the
/// magnitude `M` with `log |Γ| > -M`.
pub fn matveev_log_lower_bound(inst: &MatveevInstance) -> Float {
    let t = Float::with_val(PREC, inst.t);
    let d = Float::with_val(PREC, inst.d);
    let mut m = float_up(ratio(14, 10));
    m = mul_up(&m, &powu_up(&Float::with_val(PREC, 30), inst.t + 3));
    m = mul_up(&m, &pow_up(&t, &Float::with_val(PREC, 4.5)));
    m = mul_up(&m, &mul_up(&d, &d));
    m = mul_up(&m, &add_up(&ln_up(&d), &Float::with_val(PREC, 1)));
    m = mul_up(&m, &add_up(&ln_up(&inst.b), &Float::with_val(PREC, 1)));
    for a in &inst.a {
        m = mul_up(&m, a);
    }
    m
}

/// `2^m · T · (log T)^m`: every `x > 1` with `x / (log x)^m < T` lies below it.
pub fn guz_bound(m: u32, t: &Float) -> Result<Float, BoundsError> {
    if m == 0 {
        return Err(BoundsError::Precondition("m must be at least 1".into()));
    }
    let threshold = Integer::from(Integer::from(4 * m * m).pow(m));
    if *t <= threshold {
        return Err(BoundsError::Precondition(format!(
            "T = {} must exceed (4m^2)^m = {threshold}",
            t.to_f64()
        )));
    }
    let lt = ln_up(t);
    let mut r = powu_up(&Float::with_val(PREC, 2), m);
    r = mul_up(&r, t);
    Ok(mul_up(&r, &powu_up(&lt, m)))
}

/// `35 s log s + 3 s log k + 3 log(12 s + k)`.
pub fn lemma31_bound(s: u32, k: &Float) -> Result<Float, BoundsError> {
    if s < 2 {
        return Err(BoundsError::Precondition(format!(
            "s = {s} must be at least 2"
        )));
    }
    if *k < 2 {
        return Err(BoundsError::Precondition("k must be at least 2".into()));
    }
    let sf = Float::with_val(PREC, s);
    let a = mul_up(&Float::with_val(PREC, 35 * s), &ln_up(&sf));
    let b = mul_up(&Float::with_val(PREC, 3 * s), &ln_up(k));
    let c = mul_up(
        &Float::with_val(PREC, 3),
        &ln_up(&add_up(&Float::with_val(PREC, 12 * s), k)),
    );
    Ok(add_up(&add_up(&a, &b), &c))
}

/// `1.4 · 10^27 · k^7 · (log k)^3`. Takes a real `k` so the large-k branch can
/// pass `1.64e20` directly.
pub fn lemma41a_bound(k: &Float) -> Result<Float, BoundsError> {
    if *k < 2 {
        return Err(BoundsError::Precondition("k must be at least 2".into()));
    }
    let c = float_up(Rational::from(
        Integer::from(14) * Integer::from(Integer::u_pow_u(10, 26)),
    ));
    let r = mul_up(&c, &powu_up(k, 7));
    Ok(mul_up(&r, &powu_up(&ln_up(k), 3)))
}

/// Upper bound on `k` for `k > 1000` from the small-`n` branch with `s = 4`:
/// `3 · 10^8 · 4^6.5 · (60 log 4)^4 · log 4`.
pub fn lemma41b_k_bound() -> Float {
    let four = Float::with_val(PREC, 4);
    let l4 = ln_up(&four);
    let mut r = float_up(Rational::from(
        Integer::from(3) * Integer::from(Integer::u_pow_u(10, 8)),
    ));
    r = mul_up(&r, &pow_up(&four, &Float::with_val(PREC, 6.5)));
    r = mul_up(&r, &powu_up(&mul_up(&Float::with_val(PREC, 60), &l4), 4));
    mul_up(&r, &l4)
}

/// `(1/86) log log n`, rounded down: it is a lower bound on `P(L_n)`.
pub fn t11_threshold(n: &Integer) -> Result<Float, BoundsError> {
    if *n <= 2 {
        return Err(BoundsError::Domain(format!(
            "log log n needs n >= 3, got {n}"
        )));
    }
    let nf = float_down(n);
    let ll = ln_down(&ln_down(&nf));
    let mut r = ll;
    r.div_assign_round(86u32, Round::Down);
    Ok(r)
}

/// `2^(k/2)`, the `n` threshold separating the two cases.
pub fn case_split_n(k: u32) -> Float {
    let mut r = Float::with_val(PREC, 1u32) << (k / 2);
    if k % 2 == 1 {
        let mut s2 = Float::with_val(PREC, 2u32);
        s2.sqrt_round(Round::Up);
        r = mul_up(&r, &s2);
    }
    r
}

/// Which inequality direction a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `value` is an upper bound for the named quantity.
    Upper,
    /// `value` is a lower bound for the named quantity.
    Lower,
    /// `value` is the left side of `lhs < rhs`, checked numerically.
    Holds,
    /// Same shape as `Holds`, but the inequality was refuted.
    Fails,
}

/// One evaluated bound with its inputs, as stored in certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    pub value: String,
    pub side: Side,
}

fn show(x: &Float) -> String {
    x.to_string_radix(10, Some(12))
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, String)], value: &Float, side: Side) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            value: show(value),
            side,
        }
    }

    pub fn upper(name: &str, inputs: &[(&str, String)], value: &Float) -> Self {
        Self::new(name, inputs, value, Side::Upper)
    }

    fn compare(name: &str, inputs: &[(&str, String)], lhs: &Float, rhs: &Float) -> Self {
        let mut r = Self::new(
            name,
            inputs,
            lhs,
            if lhs < rhs { Side::Holds } else { Side::Fails },
        );
        r.inputs.insert("rhs".into(), show(rhs));
        r
    }

    pub fn holds(&self) -> bool {
        self.side != Side::Fails
    }
}

/// A composed evaluator: each step is a numeric inequality at the given
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub name: String,
    pub steps: Vec<BoundReport>,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(BoundReport::holds)
    }

    pub fn first_failure(&self) -> Option<&BoundReport> {
        self.steps.iter().find(|s| !s.holds())
    }
}

fn s_log_s(s: u32) -> Float {
    let sf = Float::with_val(PREC, s);
    mul_up(&sf, &ln_up(&sf))
}

fn lower_s_log_s(s: u32) -> Float {
    let sf = Float::with_val(PREC, s);
    let mut r = ln_down(&sf);
    r.mul_assign_round(&sf, Round::Down);
    r
}

/// Both branches after the lemma: `log n < 46 s log s` when `k ≤ s`, and
/// `log n < 46 s log k` when `s < k`.
pub fn branch_after_lemma31(s: u32, k: u32) -> Result<BoundReport, BoundsError> {
    let kf = Float::with_val(PREC, k);
    let lhs = lemma31_bound(s, &kf)?;
    let inputs = [("s", s.to_string()), ("k", k.to_string())];
    let (name, base) = if k <= s {
        ("log n < 46 s log s", Float::with_val(PREC, s))
    } else {
        ("log n < 46 s log k", kf)
    };
    let mut rhs = ln_down(&base);
    rhs.mul_assign_round(46 * s, Round::Down);
    Ok(BoundReport::compare(name, &inputs, &lhs, &rhs))
}

/// The large-`n` case (`n ≥ 2^(k/2)`): `k < 2143 s log s`,
/// `log k < 14 log s`, and `log n < 77 s log s + 3 log(2155 s²) < 86 s log s`,
/// each evaluated at `s`.
///
/// `k` is taken at its extreme admissible value: the Guz bound applied to
/// `T = 133 s`.
pub fn large_n_chain(s: u32) -> Result<ChainReport, BoundsError> {
    if s < 2 {
        return Err(BoundsError::Precondition(format!(
            "s = {s} must be at least 2"
        )));
    }
    let inputs = [("s", s.to_string())];
    let mut steps = Vec::new();

    let t = Float::with_val(PREC, 133 * s);
    let k_max = guz_bound(1, &t)?;
    let mut rhs = lower_s_log_s(s);
    rhs.mul_assign_round(2143u32, Round::Down);
    steps.push(BoundReport::compare(
        "k < 2143 s log s",
        &inputs,
        &k_max,
        &rhs,
    ));

    let k_cap = mul_up(&Float::with_val(PREC, 2143), &s_log_s(s));
    let log_k = ln_up(&k_cap);
    let mut rhs = ln_down(&Float::with_val(PREC, s));
    rhs.mul_assign_round(14u32, Round::Down);
    steps.push(BoundReport::compare(
        "log k < 14 log s",
        &inputs,
        &log_k,
        &rhs,
    ));

    // lemma31_bound with k at its cap; valid because the bound increases in k.
    let log_n = lemma31_bound(s, &k_cap)?;
    let sf = Float::with_val(PREC, s);
    let mut inner = Float::with_val(PREC, 2155u32);
    inner.mul_assign_round(&sf, Round::Down);
    inner.mul_assign_round(&sf, Round::Down);
    let mut mid = lower_s_log_s(s);
    mid.mul_assign_round(77u32, Round::Down);
    let mut tail = ln_down(&inner);
    tail.mul_assign_round(3u32, Round::Down);
    mid.add_assign_round(&tail, Round::Down);
    steps.push(BoundReport::compare(
        "log n < 77 s log s + 3 log(2155 s^2)",
        &inputs,
        &log_n,
        &mid,
    ));

    let mid_up = add_up(
        &mul_up(&Float::with_val(PREC, 77), &s_log_s(s)),
        &mul_up(
            &Float::with_val(PREC, 3),
            &ln_up(&mul_up(&Float::with_val(PREC, 2155), &mul_up(&sf, &sf))),
        ),
    );
    let mut rhs = lower_s_log_s(s);
    rhs.mul_assign_round(86u32, Round::Down);
    steps.push(BoundReport::compare(
        "77 s log s + 3 log(2155 s^2) < 86 s log s",
        &inputs,
        &mid_up,
        &rhs,
    ));

    Ok(ChainReport {
        name: "large-n case".into(),
        steps,
    })
}

/// The small-`n` case (`n < 2^(k/2)`): `k < 6e8 s^6.5 (60 log s)^s log s` and
/// `log k < 26 s log s`, evaluated at `s`.
pub fn small_n_chain(s: u32) -> Result<ChainReport, BoundsError> {
    if s < 2 {
        return Err(BoundsError::Precondition(format!(
            "s = {s} must be at least 2"
        )));
    }
    let inputs = [("s", s.to_string())];
    let sf = Float::with_val(PREC, s);
    let ls = ln_up(&sf);
    let sixty_ls = mul_up(&Float::with_val(PREC, 60), &ls);
    let mut steps = Vec::new();

    // k / log k < 1.4e7 s^5.5 (60 log s)^s
    let mut t = float_up(Rational::from(14 * 10i64.pow(6)));
    t = mul_up(&t, &pow_up(&sf, &Float::with_val(PREC, 5.5)));
    t = mul_up(&t, &powu_up(&sixty_ls, s));
    let k_max = guz_bound(1, &t)?;

    let mut rhs = float_down(Rational::from(6 * 10i64.pow(8)));
    let mut p = Float::with_val(PREC, &sf);
    p.pow_assign_round(&Float::with_val(PREC, 6.5), Round::Down);
    rhs.mul_assign_round(&p, Round::Down);
    let mut q = ln_down(&sf);
    q.mul_assign_round(60u32, Round::Down);
    q.pow_assign_round(s, Round::Down);
    rhs.mul_assign_round(&q, Round::Down);
    rhs.mul_assign_round(&ln_down(&sf), Round::Down);
    steps.push(BoundReport::compare(
        "k < 6e8 s^6.5 (60 log s)^s log s",
        &inputs,
        &k_max,
        &rhs,
    ));

    let mut cap = float_up(Rational::from(6 * 10i64.pow(8)));
    cap = mul_up(&cap, &pow_up(&sf, &Float::with_val(PREC, 6.5)));
    cap = mul_up(&cap, &powu_up(&sixty_ls, s));
    cap = mul_up(&cap, &ls);
    let log_k = ln_up(&cap);
    let mut rhs = lower_s_log_s(s);
    rhs.mul_assign_round(26u32, Round::Down);
    steps.push(BoundReport::compare(
        "log k < 26 s log s",
        &inputs,
        &log_k,
        &rhs,
    ));

    Ok(ChainReport {
        name: "small-n case".into(),
        steps,
    })
}
