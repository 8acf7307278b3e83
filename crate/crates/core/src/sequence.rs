//! Exact generation of k-generalized Lucas numbers.
//!
//! The sequence starts from `L_{2-k} = … = L_{-1} = 0`, `L_0 = 2`, `L_1 = 1`
//! and every later term is the sum of the `k` terms before it. Terms are
//! produced by streaming a window of the last `k` values forward; no table of
//! earlier terms is ever kept, so a full range `k + 1 ..= n` costs `O(k)`
//! integers of memory.

use std::collections::VecDeque;

use rug::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("order k must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("index {n} is below the first index {first} of the order-{k} sequence")]
    IndexOutOfDomain { k: usize, n: i64, first: i64 },
    #[error("empty index range {lo}..={hi}")]
    EmptyRange { lo: i64, hi: i64 },
}

/// Order of the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct KParams {
    k: usize,
}

impl KParams {
    pub fn new(k: usize) -> Result<Self, SequenceError> {
        if k < 2 {
            return Err(SequenceError::InvalidOrder(k));
        }
        Ok(Self { k })
    }

    pub fn k(self) -> usize {
        self.k
    }

    /// Smallest index at which the sequence is defined, `2 - k`.
    pub fn first_index(self) -> i64 {
        2 - self.k as i64
    }

    fn check_index(self, n: i64) -> Result<(), SequenceError> {
        if n < self.first_index() {
            return Err(SequenceError::IndexOutOfDomain {
                k: self.k,
                n,
                first: self.first_index(),
            });
        }
        Ok(())
    }
}

impl TryFrom<usize> for KParams {
    type Error = SequenceError;

    fn try_from(k: usize) -> Result<Self, Self::Error> {
        Self::new(k)
    }
}

impl From<KParams> for usize {
    fn from(p: KParams) -> usize {
        p.k
    }
}

/// The last `k` terms `L_{n_head-k+1} … L_{n_head}` plus their running sum,
/// which is the next term `L_{n_head+1}`.
#[derive(Debug, Clone)]
pub struct SequenceWindow {
    k: usize,
    n_head: i64,
    terms: VecDeque<Integer>,
    sum: Integer,
}

impl SequenceWindow {
    /// Window holding the initial terms `L_{2-k} … L_1`.
    pub fn new(params: KParams) -> Self {
        let k = params.k();
        let mut terms: VecDeque<Integer> = (0..k - 2).map(|_| Integer::new()).collect();
        terms.push_back(Integer::from(2));
        terms.push_back(Integer::from(1));
        Self {
            k,
            n_head: 1,
            terms,
            sum: Integer::from(3),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_head(&self) -> i64 {
        self.n_head
    }

    pub fn head(&self) -> &Integer {
        self.terms.back().expect("window is never empty")
    }

    /// Term `L_n` if it is still inside the window.
    pub fn get(&self, n: i64) -> Option<&Integer> {
        let oldest = self.n_head - self.k as i64 + 1;
        if n < oldest || n > self.n_head {
            return None;
        }
        self.terms.get((n - oldest) as usize)
    }

    /// Shift the window one index forward: one big-integer addition and one
    /// subtraction regardless of `k`.
    pub fn advance(&mut self) {
        let next = self.sum.clone();
        let dropped = self.terms.pop_front().expect("window is never empty");
        self.sum += &next;
        self.sum -= dropped;
        self.terms.push_back(next);
        self.n_head += 1;
    }

    pub fn advance_to(&mut self, n: i64) {
        while self.n_head < n {
            self.advance();
        }
    }
}

/// `L_n^{(k)}` exactly.
pub fn term(params: KParams, n: i64) -> Result<Integer, SequenceError> {
    params.check_index(n)?;
    let mut window = SequenceWindow::new(params);
    window.advance_to(n);
    Ok(window.get(n).expect("index inside window").clone())
}

/// Iterator over `(n, L_n)` for consecutive `n` in an inclusive range.
#[derive(Debug, Clone)]
pub struct Terms {
    window: SequenceWindow,
    next_n: i64,
    hi: i64,
}

impl Iterator for Terms {
    type Item = (i64, Integer);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_n > self.hi {
            return None;
        }
        let n = self.next_n;
        self.window.advance_to(n);
        self.next_n += 1;
        Some((n, self.window.get(n).expect("index inside window").clone()))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.hi - self.next_n + 1).max(0) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Terms {}

pub fn stream(params: KParams, n_lo: i64, n_hi: i64) -> Result<Terms, SequenceError> {
    params.check_index(n_lo)?;
    if n_hi < n_lo {
        return Err(SequenceError::EmptyRange { lo: n_lo, hi: n_hi });
    }
    Ok(Terms {
        window: SequenceWindow::new(params),
        next_n: n_lo,
        hi: n_hi,
    })
}

/// `3 * 2^(n-2)`, the closed form on `2 <= n <= k` and a strict upper bound
/// beyond it.
pub fn power_of_two_family(n: i64) -> Integer {
    debug_assert!(n >= 2);
    Integer::from(3) << (n - 2) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `L_n = 3 * 2^(n-2)` for `2 <= n <= k`.
    Family,
    /// `L_{k+1} = 3 * 2^(k-1) - 2`.
    FirstBreak,
    /// `L_n < 3 * 2^(n-2)` for `n >= k + 1`.
    StrictlyBelow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityFailure {
    pub n: i64,
    pub identity: Identity,
    pub value: Integer,
    pub reference: Integer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub k: usize,
    pub n_hi: i64,
    pub checked: usize,
    pub first_failure: Option<IdentityFailure>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Check the closed forms on `2 <= n <= min(k, n_hi)`, the value at `k + 1`
/// and the strict bound up to `n_hi`. Failures are reported, never raised.
pub fn check_identities(params: KParams, n_hi: i64) -> IdentityReport {
    let k = params.k() as i64;
    let mut report = IdentityReport {
        k: params.k(),
        n_hi,
        checked: 0,
        first_failure: None,
    };
    if n_hi < 2 {
        return report;
    }
    let terms = stream(params, 2, n_hi).expect("range starts inside the domain");
    for (n, value) in terms {
        let family = power_of_two_family(n);
        let (identity, ok, reference) = if n <= k {
            (Identity::Family, value == family, family)
        } else if n == k + 1 {
            let reference = family - 2u32;
            (Identity::FirstBreak, value == reference, reference)
        } else {
            (Identity::StrictlyBelow, value < family, family)
        };
        report.checked += 1;
        if !ok {
            report.first_failure = Some(IdentityFailure {
                n,
                identity,
                value,
                reference,
            });
            break;
        }
    }
    report
}
