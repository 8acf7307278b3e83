//! Sieving k-generalized Lucas numbers for {2, 3, 5, 7}-smooth terms, and
//! largest prime factors for spot checks of the lower bound on `P(L_n)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::mpsc;
use std::sync::OnceLock;

use rayon::prelude::*;
use rug::integer::IsPrime;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::t11_threshold;
use crate::sequence::{stream, term, KParams, SequenceError};
use crate::serde_num;

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("factoring budget exhausted on cofactor {cofactor}")]
    Resource { cofactor: Integer },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const SMOOTH_PRIMES: [u32; 4] = [2, 3, 5, 7];

/// `N = 2^a 3^b 5^c 7^d · remainder`, with `gcd(remainder, 210) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothFactorization {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
    #[serde(with = "serde_num::integer")]
    pub remainder: Integer,
}

impl SmoothFactorization {
    pub fn is_smooth(&self) -> bool {
        self.remainder == 1
    }

    pub fn exponents(&self) -> [u32; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn reconstruct(&self) -> Integer {
        let mut n = self.remainder.clone();
        for (p, e) in SMOOTH_PRIMES.iter().zip(self.exponents()) {
            n *= Integer::from(Integer::u_pow_u(*p, e));
        }
        n
    }
}

fn strip(m: &mut Integer, p: u32) -> u32 {
    if p == 2 {
        let e = m.find_one(0).unwrap_or(0);
        *m >>= e;
        return e;
    }
    let mut e = 0;
    while m.is_divisible_u(p) {
        m.div_exact_u_mut(p);
        e += 1;
    }
    e
}

pub fn smooth_part(n: &Integer) -> Result<SmoothFactorization, SmoothError> {
    if *n < 1 {
        return Err(SmoothError::Domain(format!(
            "smooth part needs N >= 1, got {n}"
        )));
    }
    let mut m = n.clone();
    let [a, b, c, d] = SMOOTH_PRIMES.map(|p| strip(&mut m, p));
    Ok(SmoothFactorization {
        a,
        b,
        c,
        d,
        remainder: m,
    })
}

/// Exponents when `n` is 7-smooth. `scratch` avoids an allocation per call.
fn smooth_exponents(n: &Integer, scratch: &mut Integer) -> Option<[u32; 4]> {
    use rug::Assign;
    scratch.assign(n);
    let a = strip(scratch, 2);
    // Only odd multiples of 3, 5, 7 are left; anything else fails fast.
    let b = strip(scratch, 3);
    let c = strip(scratch, 5);
    let d = strip(scratch, 7);
    (*scratch == 1).then_some([a, b, c, d])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub k: usize,
    pub n: i64,
    #[serde(with = "serde_num::integer")]
    pub value: Integer,
    pub factorization: SmoothFactorization,
}

/// Smooth terms of order `k` with `k + 1 <= n <= n_hi`.
pub fn scan_k(k: usize, n_hi: i64) -> Result<Vec<SolutionRecord>, SmoothError> {
    let params = KParams::new(k)?;
    let lo = k as i64 + 1;
    if n_hi < lo {
        return Ok(Vec::new());
    }
    let mut scratch = Integer::new();
    let mut out = Vec::new();
    for (n, value) in stream(params, lo, n_hi)? {
        if let Some([a, b, c, d]) = smooth_exponents(&value, &mut scratch) {
            out.push(SolutionRecord {
                k,
                n,
                value,
                factorization: SmoothFactorization {
                    a,
                    b,
                    c,
                    d,
                    remainder: Integer::from(1),
                },
            });
        }
    }
    Ok(out)
}

fn check_range(k_lo: usize, k_hi: usize) -> Result<(), SmoothError> {
    if k_lo < 2 || k_hi < k_lo {
        return Err(SmoothError::Domain(format!(
            "need 2 <= k_lo <= k_hi, got {k_lo}..={k_hi}"
        )));
    }
    Ok(())
}

/// All sporadic smooth terms for `k_lo <= k <= k_hi`, `k < n <= n_hi(k)`,
/// in ascending `(k, n)` order. Sharded by `k` over the rayon pool.
pub fn search<F>(k_lo: usize, k_hi: usize, n_hi: F) -> Result<Vec<SolutionRecord>, SmoothError>
where
    F: Fn(usize) -> i64 + Sync,
{
    check_range(k_lo, k_hi)?;
    let shards: Vec<Vec<SolutionRecord>> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| scan_k(k, n_hi(k)))
        .collect::<Result<_, _>>()?;
    Ok(shards.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub records: Vec<SolutionRecord>,
    /// Shards taken from the checkpoint instead of recomputed.
    pub resumed: usize,
    pub computed: usize,
}

/// Completed shards read back from a checkpoint: `k -> (n_hi, hits)`.
fn read_checkpoint(path: &Path) -> Result<BTreeMap<usize, (i64, Vec<i64>)>, SmoothError> {
    let mut hits: BTreeMap<usize, BTreeSet<i64>> = BTreeMap::new();
    let mut done = BTreeMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parsed = match parts.as_slice() {
            [k, n, status] => k
                .parse::<usize>()
                .ok()
                .zip(n.parse::<i64>().ok())
                .map(|kn| (kn, *status)),
            _ => None,
        };
        // A torn final line from an interrupted write is dropped; its shard
        // has no "done" marker and will be recomputed.
        let Some(((k, n), status)) = parsed else {
            log::warn!("checkpoint line {} ignored: {line:?}", i + 1);
            continue;
        };
        match status {
            "smooth" => {
                hits.entry(k).or_default().insert(n);
            }
            "done" => {
                done.insert(k, n);
            }
            other => log::warn!("checkpoint line {}: unknown status {other:?}", i + 1),
        }
    }
    Ok(done
        .into_iter()
        .map(|(k, n_hi)| {
            let ns = hits
                .remove(&k)
                .unwrap_or_default()
                .into_iter()
                .filter(|&n| n <= n_hi)
                .collect();
            (k, (n_hi, ns))
        })
        .collect())
}

fn ends_with_newline(path: &Path) -> std::io::Result<bool> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = File::open(path)?;
    let len = f.metadata()?.len();
    if len == 0 {
        return Ok(true);
    }
    f.seek(SeekFrom::Start(len - 1))?;
    let mut last = [0u8];
    f.read_exact(&mut last)?;
    Ok(last[0] == b'\n')
}

/// [`search`] with an append-only checkpoint: one `k n smooth` line per hit
/// and a `k n_hi done` line per finished shard, fsync'd per shard by a single
/// writer. With `resume`, finished shards are read back (their values are
/// recomputed from `(k, n)`); otherwise the file is truncated first.
pub fn search_checkpointed<F>(
    k_lo: usize,
    k_hi: usize,
    n_hi: F,
    path: &Path,
    resume: bool,
) -> Result<SearchOutcome, SmoothError>
where
    F: Fn(usize) -> i64 + Sync,
{
    check_range(k_lo, k_hi)?;
    let previous = if resume {
        read_checkpoint(path)?
    } else {
        BTreeMap::new()
    };
    let mut records: BTreeMap<usize, Vec<SolutionRecord>> = BTreeMap::new();
    let mut pending = Vec::new();
    let mut resumed = 0;
    for k in k_lo..=k_hi {
        match previous.get(&k) {
            Some((done_hi, ns)) if *done_hi == n_hi(k) => {
                let mut shard = Vec::with_capacity(ns.len());
                for &n in ns {
                    let value = term(KParams::new(k)?, n)?;
                    let factorization = smooth_part(&value)?;
                    if !factorization.is_smooth() {
                        return Err(SmoothError::Checkpoint(format!(
                            "L_{n}^({k}) is recorded smooth but is not"
                        )));
                    }
                    shard.push(SolutionRecord {
                        k,
                        n,
                        value,
                        factorization,
                    });
                }
                records.insert(k, shard);
                resumed += 1;
            }
            Some((done_hi, _)) => {
                return Err(SmoothError::Checkpoint(format!(
                    "k={k} was finished up to n={done_hi}, but this run asks for n={}",
                    n_hi(k)
                )));
            }
            None => pending.push(k),
        }
    }

    let mut file = OpenOptions::new()
        .create(true)
        .append(resume)
        .write(true)
        .truncate(!resume)
        .open(path)?;
    if resume && !ends_with_newline(path)? {
        // Terminate a torn line so appended records start on their own.
        file.write_all(b"\n")?;
    }
    let (tx, rx) = mpsc::channel::<(usize, i64, Vec<SolutionRecord>)>();
    let computed = pending.len();
    let writer = std::thread::spawn(
        move || -> Result<Vec<(usize, Vec<SolutionRecord>)>, std::io::Error> {
            let mut got = Vec::new();
            for (k, hi, shard) in rx {
                let mut buf = String::new();
                for r in &shard {
                    buf.push_str(&format!("{} {} smooth\n", r.k, r.n));
                }
                buf.push_str(&format!("{k} {hi} done\n"));
                file.write_all(buf.as_bytes())?;
                file.sync_data()?;
                got.push((k, shard));
            }
            Ok(got)
        },
    );
    let scanned: Result<(), SmoothError> = pending.par_iter().try_for_each_with(tx, |tx, &k| {
        let hi = n_hi(k);
        let shard = scan_k(k, hi)?;
        // A closed channel means the writer failed; its error is reported below.
        let _ = tx.send((k, hi, shard));
        Ok(())
    });
    let written = writer.join().expect("checkpoint writer panicked")?;
    scanned?;
    records.extend(written);
    Ok(SearchOutcome {
        records: records.into_values().flatten().collect(),
        resumed,
        computed,
    })
}

/// `(k, n)` with `2 <= n <= k <= k_max` where `L_n` is not `2^(n-2) · 3`.
pub fn family_mismatches(k_max: usize) -> Result<Vec<(usize, i64)>, SmoothError> {
    let mut bad = Vec::new();
    for k in 2..=k_max {
        for (n, v) in stream(KParams::new(k)?, 2, k as i64)? {
            let f = smooth_part(&v)?;
            if f.exponents() != [n as u32 - 2, 1, 0, 0] || !f.is_smooth() {
                bad.push((k, n));
            }
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorBudget {
    /// Composite cofactors above this size are refused.
    pub max_bits: u32,
    /// Iterations of one rho run before it gives up.
    pub rho_iterations: u64,
    pub rho_attempts: u32,
}

impl Default for FactorBudget {
    fn default() -> Self {
        Self {
            max_bits: 400,
            rho_iterations: 1 << 24,
            rho_attempts: 8,
        }
    }
}

pub const TRIAL_LIMIT: u32 = 1_000_000;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                for j in (i * i..=n).step_by(i) {
                    sieve[j] = false;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u32).collect()
    })
}

fn is_prime(n: &Integer) -> bool {
    // Baillie–PSW plus 30 Miller–Rabin rounds with random bases.
    n.is_probably_prime(30) != IsPrime::No
}

/// Brent's cycle variant of Pollard rho with batched gcds.
fn brent_rho(n: &Integer, c: u32, max_iter: u64) -> Option<Integer> {
    const BATCH: u64 = 128;
    let f = |y: &mut Integer| {
        y.square_mut();
        *y += c;
        *y %= n;
    };
    let mut y = Integer::from(2);
    let mut x = Integer::new();
    let mut ys = Integer::new();
    let mut q = Integer::from(1);
    let mut g = Integer::from(1);
    let mut r: u64 = 1;
    let mut spent: u64 = 0;
    while g == 1 {
        x.clone_from(&y);
        for _ in 0..r {
            f(&mut y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys.clone_from(&y);
            for _ in 0..BATCH.min(r - k) {
                f(&mut y);
                q *= Integer::from(&x - &y).abs();
                q %= n;
            }
            g = Integer::from(q.gcd_ref(n));
            k += BATCH;
        }
        spent += r;
        if spent > max_iter {
            return None;
        }
        r *= 2;
    }
    if g == *n {
        loop {
            f(&mut ys);
            g = Integer::from(Integer::from(&x - &ys).abs().gcd_ref(n));
            if g > 1 {
                break;
            }
        }
    }
    (g != *n).then_some(g)
}

/// `P(N)`, the largest prime factor, with `P(0) = P(±1) = 1`.
///
/// Trial division to 10^6, then Brent's rho on what is left; factors are
/// accepted as prime by a strong probable-prime test.
pub fn largest_prime_factor(n: &Integer, budget: &FactorBudget) -> Result<Integer, SmoothError> {
    let mut m = Integer::from(n.abs_ref());
    if m <= 1 {
        return Ok(Integer::from(1));
    }
    let mut best = Integer::from(1);
    for &p in small_primes() {
        if m.is_divisible_u(p) {
            best = Integer::from(p);
            while m.is_divisible_u(p) {
                m.div_exact_u_mut(p);
            }
        }
        if m == 1 || Integer::from(p) * p > m {
            break;
        }
    }
    if m == 1 {
        return Ok(best);
    }
    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c == 1 {
            continue;
        }
        // Trial division has passed sqrt(c) or every factor exceeds 10^6.
        let below_trial_sq = c <= Integer::from(TRIAL_LIMIT) * TRIAL_LIMIT;
        if below_trial_sq || is_prime(&c) {
            best = best.max(c);
            continue;
        }
        if c.significant_bits() > budget.max_bits {
            return Err(SmoothError::Resource { cofactor: c });
        }
        let split = (1..=budget.rho_attempts).find_map(|s| brent_rho(&c, s, budget.rho_iterations));
        match split {
            Some(d) => {
                let e = Integer::from(&c / &d);
                stack.push(d);
                stack.push(e);
            }
            None => return Err(SmoothError::Resource { cofactor: c }),
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T11Pair {
    pub k: usize,
    pub n: i64,
    #[serde(with = "serde_num::integer")]
    pub p: Integer,
    #[serde(with = "serde_num::float")]
    pub threshold: Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T11Skip {
    pub k: usize,
    pub n: i64,
    #[serde(with = "serde_num::integer")]
    pub cofactor: Integer,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct T11Report {
    pub checked: usize,
    pub failures: Vec<T11Pair>,
    pub skipped: Vec<T11Skip>,
    /// Pair with the least `P - threshold`.
    pub tightest: Option<T11Pair>,
    #[serde(with = "serde_num::float_opt")]
    pub max_threshold: Option<Float>,
}

impl T11Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.skipped.is_empty() && self.checked > 0
    }
}

/// Check `P(L_n) > (1/86) log log n` for `k_lo <= k <= k_hi`, `k < n <= n_hi`.
pub fn verify_t11(
    k_lo: usize,
    k_hi: usize,
    n_hi: i64,
    budget: &FactorBudget,
) -> Result<T11Report, SmoothError> {
    check_range(k_lo, k_hi)?;
    type Row = Result<(T11Pair, Option<Integer>), SmoothError>;
    let rows: Vec<Vec<Row>> = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let lo = k as i64 + 1;
            if n_hi < lo {
                return Ok(Vec::new());
            }
            let rows = stream(KParams::new(k)?, lo, n_hi)?
                .map(|(n, v)| {
                    let threshold = t11_threshold(&Integer::from(n))
                        .map_err(|e| SmoothError::Domain(e.to_string()))?;
                    match largest_prime_factor(&v, budget) {
                        Ok(p) => Ok((T11Pair { k, n, p, threshold }, None)),
                        Err(SmoothError::Resource { cofactor }) => Ok((
                            T11Pair {
                                k,
                                n,
                                p: Integer::new(),
                                threshold,
                            },
                            Some(cofactor),
                        )),
                        Err(e) => Err(e),
                    }
                })
                .collect();
            Ok(rows)
        })
        .collect::<Result<_, SmoothError>>()?;

    let mut report = T11Report::default();
    let mut tightest_margin: Option<Float> = None;
    for row in rows.into_iter().flatten() {
        let (pair, skipped) = row?;
        if report
            .max_threshold
            .as_ref()
            .map_or(true, |m| pair.threshold > *m)
        {
            report.max_threshold = Some(pair.threshold.clone());
        }
        if let Some(cofactor) = skipped {
            report.skipped.push(T11Skip {
                k: pair.k,
                n: pair.n,
                cofactor,
            });
            continue;
        }
        report.checked += 1;
        let margin = Float::with_val(pair.threshold.prec(), &pair.p) - &pair.threshold;
        // The threshold is rounded down at 128 bits; demand a margin well
        // above that rounding error.
        if margin <= (Float::with_val(64, 1) >> 100) {
            report.failures.push(pair.clone());
        }
        if tightest_margin.as_ref().map_or(true, |m| margin < *m) {
            tightest_margin = Some(margin);
            report.tightest = Some(pair);
        }
    }
    Ok(report)
}
