use rug::float::Round;
use rug::ops::{AddAssignRound, DivAssignRound, MulAssignRound, SubAssignRound};
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::basis::solve;
use super::{LatticeError, ReducedBasis};

/// Which branch of the distance lemma was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaCase {
    InLattice,
    OutOfLattice,
}

#[derive(Debug, Clone, PartialEq)]
pub struct C1Bound {
    pub c1_sq: Rational,
    pub c2: Rational,
    pub sigma: Rational,
    pub case: SigmaCase,
}

/// Lower bound `c₁² = σ² ||b₁||² / c₂` on `l(L, y)²`, with
/// `c₂ = max_j ||b₁||² / ||b*_j||²`.
///
/// For `y ∉ L`, `σ` is the distance to the nearest integer of the last
/// nonzero coordinate of `z = B⁻¹ y`; for `y ∈ L`, `σ = 1`.
pub fn c1_lower_bound(reduced: &ReducedBasis, y: &[Rational]) -> Result<C1Bound, LatticeError> {
    let n = reduced.dim();
    if y.len() != n {
        return Err(LatticeError::Shape(format!(
            "target has length {}, lattice dimension is {n}",
            y.len()
        )));
    }
    let b1 = Rational::from(reduced.first_norm_sq());
    let c2 = reduced
        .gs
        .norms_sq
        .iter()
        .map(|bs| Rational::from(&b1 / bs))
        .max()
        .expect("nonempty basis");
    let z = solve(&reduced.basis, y)?;
    let in_lattice = z.iter().all(|zi| *zi.denom() == 1);
    let (sigma, case) = if in_lattice {
        (Rational::from(1), SigmaCase::InLattice)
    } else {
        let zi = z.iter().rev().find(|zi| **zi != 0).expect("y is nonzero");
        let frac = Rational::from(zi - zi.clone().floor());
        let other = Rational::from(1) - &frac;
        (frac.min(other), SigmaCase::OutOfLattice)
    };
    let c1_sq = Rational::from(sigma.square_ref()) * b1 / &c2;
    Ok(C1Bound {
        c1_sq,
        c2,
        sigma,
        case,
    })
}

/// Result of applying the reduction lemma.
#[derive(Debug, Clone, PartialEq)]
pub enum DewegerOutcome {
    /// `H ≤ bound` unless the form is the degenerate one (every coefficient
    /// except the last is zero).
    Bound { h: Float, s: Float, t: Float },
    /// `c₁² < T² + S`; the caller should enlarge `C`.
    HypothesisFailed { s: Float, t: Float },
}

impl DewegerOutcome {
    pub fn bound(&self) -> Option<&Float> {
        match self {
            Self::Bound { h, .. } => Some(h),
            Self::HypothesisFailed { .. } => None,
        }
    }

    pub fn s_t(&self) -> (&Float, &Float) {
        match self {
            Self::Bound { s, t, .. } | Self::HypothesisFailed { s, t } => (s, t),
        }
    }
}

/// `S = Σ_{i<dim} X_i²` and `T = (1 + Σ X_i) / 2`, both rounded up.
pub fn s_and_t(x: &[Float], prec: u32) -> (Float, Float) {
    let dim = x.len();
    let mut s = Float::new(prec);
    for xi in &x[..dim.saturating_sub(1)] {
        let sq = Float::with_val_round(prec, xi.square_ref(), Round::Up).0;
        s.add_assign_round(&sq, Round::Up);
    }
    let mut t = Float::with_val(prec, 1);
    for xi in x {
        t.add_assign_round(xi, Round::Up);
    }
    t.div_assign_round(2u32, Round::Up);
    (s, t)
}

/// `H ≤ (log(C c₃) - log(√(c₁² - S) - T)) / c₄`, rounded up throughout.
///
/// `x` are upper bounds on the coefficients, `c3` an upper bound and `c4` a
/// lower bound for the constants of `|Λ| ≤ c₃ exp(-c₄ H)`.
pub fn deweger_bound(
    c1_sq: &Rational,
    x: &[Float],
    c3: &Float,
    c4: &Float,
    c: &Integer,
) -> Result<DewegerOutcome, LatticeError> {
    if x.is_empty() {
        return Err(LatticeError::Shape("no coefficient bounds".into()));
    }
    if *c3 <= 0 || *c4 <= 0 || x.iter().any(|xi| *xi < 0) || *c <= 0 {
        return Err(LatticeError::Parameter(
            "c3, c4, C must be positive and X_i nonnegative".into(),
        ));
    }
    let bits = c1_sq.numer().significant_bits() + c.significant_bits();
    let prec = 256 + bits;
    let (s, t) = s_and_t(x, prec);

    // c₁² ≥ T² + S, decided exactly on the rational side.
    let t_sq = Rational::from(t.to_rational().unwrap().square_ref());
    let need = t_sq + s.to_rational().unwrap();
    if *c1_sq < need {
        return Ok(DewegerOutcome::HypothesisFailed { s, t });
    }
    let mut gap = Float::with_val_round(prec, c1_sq, Round::Down).0;
    gap.sub_assign_round(&s, Round::Down);
    gap.sqrt_round(Round::Down);
    gap.sub_assign_round(&t, Round::Down);
    if gap <= 0 {
        // Equality case; the lemma gives nothing usable.
        return Ok(DewegerOutcome::HypothesisFailed { s, t });
    }
    gap.ln_round(Round::Down);

    let mut top = Float::with_val_round(prec, c, Round::Up).0;
    top.mul_assign_round(c3, Round::Up);
    top.ln_round(Round::Up);
    top.sub_assign_round(&gap, Round::Up);
    top.div_assign_round(c4, Round::Up);
    Ok(DewegerOutcome::Bound { h: top, s, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lll_reduce, LatticeBasis};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn identity(n: usize) -> ReducedBasis {
        let cols: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| (i == j) as i64).collect())
            .collect();
        lll_reduce(&LatticeBasis::from_i64_columns(&cols).unwrap(), &q(3, 4)).unwrap()
    }

    #[test]
    fn identity_in_lattice() {
        let r = identity(3);
        let c = c1_lower_bound(&r, &[q(0, 1), q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(c.c1_sq, 1);
        assert_eq!(c.c2, 1);
        assert_eq!(c.case, SigmaCase::InLattice);
    }

    #[test]
    fn identity_half_point() {
        let r = identity(2);
        let c = c1_lower_bound(&r, &[q(0, 1), q(1, 2)]).unwrap();
        assert_eq!(c.sigma, q(1, 2));
        assert_eq!(c.c1_sq, q(1, 4));
        assert_eq!(c.case, SigmaCase::OutOfLattice);
        assert!(c1_lower_bound(&r, &[q(0, 1)]).is_err());
    }

    #[test]
    fn reference_instances() {
        let f = |x: f64| Float::with_val(256, x);
        let ln = |x: f64| Float::with_val(256, x).ln();
        let c1 = |s: &str| Rational::from(Integer::from_str_radix(s, 10).unwrap());

        // First round of the large-k chain: C = 10^695, X_i = 4.6e173.
        let x = vec![f(4.6e173); 4];
        let out = deweger_bound(
            &c1(&format!("1{}", "0".repeat(350))),
            &x,
            &f(72.0),
            &Float::with_val(256, 2).ln(),
            &Integer::from(Integer::u_pow_u(10, 695)),
        )
        .unwrap();
        let h = out.bound().unwrap().to_f64();
        assert!((h - 1733.0).abs() < 2.0, "{h}");
        let (s, t) = out.s_t();
        // Three squares, not four: the last coefficient does not enter S.
        let big = |v: &str| Float::with_val(256, Float::parse(v).unwrap());
        let ratio = Float::with_val(256, s / &big("6.348e347")).to_f64();
        assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
        assert!((t.to_f64() / 9.2e173 - 1.0).abs() < 1e-3);

        // Second round: C = 10^220, X_i = 4.6e54.
        let x = vec![f(4.6e54); 4];
        let out = deweger_bound(
            &c1(&format!("1{}", "0".repeat(111))),
            &x,
            &f(72.0),
            &ln(2.0),
            &Integer::from(Integer::u_pow_u(10, 220)),
        )
        .unwrap();
        let k_bound = 2.0 * out.bound().unwrap().to_f64();
        assert!((k_bound - 1106.0).abs() < 4.0, "{k_bound}");
    }

    #[test]
    fn hypothesis_failure_is_typed() {
        let x = vec![Float::with_val(64, 10.0); 3];
        let out = deweger_bound(
            &q(1, 1),
            &x,
            &Float::with_val(64, 1),
            &Float::with_val(64, 1),
            &Integer::from(10),
        )
        .unwrap();
        assert!(matches!(out, DewegerOutcome::HypothesisFailed { .. }));
    }
}
