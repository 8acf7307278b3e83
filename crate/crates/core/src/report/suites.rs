use rayon::prelude::*;
use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    alpha_power_near_two_power, binet_residual, constants_for, dominant_root, f_alpha_in_range,
    f_alpha_near_half, inverse_log_alpha_bound, lower_bracket, two_alpha_minus_one_in_range,
    two_alpha_minus_one_near_three, AnalyticError, PrecisionPolicy,
};
use crate::sequence::{check_identities, KParams, SequenceError};
use crate::smooth::{verify_t11, FactorBudget, SmoothError};

/// Outcome of one check suite: how many individual checks ran and a line
/// per failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            checked: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.failures.is_empty()
    }

    fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        self.failures.extend(other.failures);
        self
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn collect<E: Send>(suite: &str, parts: Vec<Result<SuiteReport, E>>) -> Result<SuiteReport, E> {
    parts
        .into_iter()
        .try_fold(SuiteReport::new(suite), |acc, p| Ok(acc.merge(p?)))
}

/// Closed forms and the strict upper bound for `2 ≤ k ≤ k_max`, up to
/// `n = max(n_hi, 2k + 2)`.
pub fn identity_suite(k_max: usize, n_hi: i64) -> Result<SuiteReport, SequenceError> {
    let parts = (2..=k_max.max(2))
        .into_par_iter()
        .map(|k| {
            let params = KParams::new(k)?;
            let r = check_identities(params, n_hi.max(2 * k as i64 + 2));
            let mut out = SuiteReport::new("identities");
            out.checked = r.checked;
            if let Some(f) = r.first_failure {
                out.failures.push(format!(
                    "k={k} n={}: {:?} fails, L_n={} reference={}",
                    f.n, f.identity, f.value, f.reference
                ));
            }
            Ok(out)
        })
        .collect();
    collect("identities", parts)
}

/// `|L_n - f_k(α)(2α - 1)α^(n-1)| < 3/2` for `k_lo ≤ k ≤ k_hi`,
/// `1 ≤ n ≤ n_max`.
pub fn binet_suite(
    k_lo: usize,
    k_hi: usize,
    n_max: i64,
    policy: &PrecisionPolicy,
) -> Result<SuiteReport, AnalyticError> {
    let three_halves = Rational::from((3, 2));
    let parts = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let consts = constants_for(k, 128, policy)?;
            let mut out = SuiteReport::new("binet");
            for n in 1..=n_max {
                let r = binet_residual(&consts, n, policy)?;
                out.check(r.mag() < three_halves, || {
                    format!("k={k} n={n}: |residual| <= {}", r.mag().to_f64())
                });
            }
            Ok(out)
        })
        .collect();
    collect("binet", parts)
}

/// Certified root brackets inside `(2(1 - 2^-k), 2)` for `2 ≤ k ≤ k_max`.
pub fn root_suite(k_max: usize, policy: &PrecisionPolicy) -> Result<SuiteReport, AnalyticError> {
    let parts = (2..=k_max.max(2))
        .into_par_iter()
        .map(|k| {
            let root = dominant_root(k, 64, policy)?;
            let mut out = SuiteReport::new("roots");
            out.check(
                root.verify() && root.lo > lower_bracket(k) && root.hi < 2,
                || format!("k={k}: bracket [{}, {}] not certified", root.lo, root.hi),
            );
            Ok(out)
        })
        .collect();
    collect("roots", parts)
}

/// Sample indices for the power comparison: below `2^(k/2)`, capped at
/// `2^21`.
fn power_samples(k: usize) -> Vec<i64> {
    let limit = if k / 2 >= 21 {
        1i64 << 21
    } else {
        1i64 << (k / 2)
    };
    let mut ns: Vec<i64> = [2, 3, limit / 3 + 1, limit - 1]
        .into_iter()
        .filter(|&n| n >= 2 && n < limit)
        .collect();
    ns.dedup();
    ns
}

/// The range and closeness statements for `f_k(α)`, `2α - 1` and `log α`
/// for `2 ≤ k ≤ k_max`, and `|α^(n-1) - 2^(n-1)| < 2^n / 2^(k/2)` at a few
/// `n` below `2^(k/2)`.
pub fn analytic_suite(
    k_max: usize,
    policy: &PrecisionPolicy,
) -> Result<SuiteReport, AnalyticError> {
    let parts = (2..=k_max.max(2))
        .into_par_iter()
        .map(|k| {
            // Gaps of order 2^-k must be resolved.
            let c = constants_for(k, 128.max(k as u32 + 64), policy)?;
            let mut out = SuiteReport::new("analytic");
            let named = [
                ("f(alpha) in (1/2, 3/4)", f_alpha_in_range(&c)),
                (
                    "2alpha-1 in (3 - 2^(2-k), 3)",
                    two_alpha_minus_one_in_range(&c),
                ),
                ("log alpha > 10/21", inverse_log_alpha_bound(&c)),
                ("|f(alpha) - 1/2| < 2k/2^k", f_alpha_near_half(&c)),
                (
                    "|2alpha - 1 - 3| < 2^(2-k)",
                    two_alpha_minus_one_near_three(&c),
                ),
            ];
            for (name, ok) in named {
                out.check(ok, || format!("k={k}: {name}"));
            }
            for n in power_samples(k) {
                let ok = alpha_power_near_two_power(&c, n, policy)?;
                out.check(ok, || format!("k={k} n={n}: alpha^(n-1) not near 2^(n-1)"));
            }
            Ok(out)
        })
        .collect();
    collect("analytic", parts)
}

/// `P(L_n) > (1/86) log log n` for `k_lo ≤ k ≤ k_hi`, `k < n ≤ n_max`.
pub fn t11_suite(
    k_lo: usize,
    k_hi: usize,
    n_max: i64,
    budget: &FactorBudget,
) -> Result<SuiteReport, SmoothError> {
    let r = verify_t11(k_lo, k_hi, n_max, budget)?;
    let mut out = SuiteReport::new("t11");
    out.checked = r.checked;
    for f in &r.failures {
        out.failures.push(format!(
            "k={} n={}: P={} below {}",
            f.k,
            f.n,
            f.p,
            f.threshold.to_f64()
        ));
    }
    for s in &r.skipped {
        out.failures.push(format!(
            "k={} n={}: cofactor {} not factored within budget",
            s.k, s.n, s.cofactor
        ));
    }
    Ok(out)
}
