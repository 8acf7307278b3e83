use rug::{Float, Integer};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Certificate, CertificateKind, PipelineConfig};
use crate::analytic::{
    dominant_root, rational_to_exact_decimal, AnalyticError, PrecisionPolicy, Sign,
};
use crate::bounds::{lemma41a_bound, lemma41b_k_bound, PREC};
use crate::lattice::{LargeKChain, LatticeError, ReductionCertificate, SmallKSweep};
use crate::smooth::SolutionRecord;

fn plain(x: &Float) -> String {
    x.to_string_radix(10, Some(20))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootOutputs {
    pub k: usize,
    pub digits: usize,
    pub precision_bits: u32,
    /// Exact decimal endpoints of the certified bracket.
    pub lo: String,
    pub hi: String,
    pub sign_lo: Sign,
    pub sign_hi: Sign,
    /// α truncated to `digits` places.
    pub truncated: String,
}

/// α(k) to `digits` decimal places, truncated. The bracket is narrowed until
/// both endpoints agree on every printed digit.
pub fn root_certificate(
    k: usize,
    digits: usize,
    policy: &PrecisionPolicy,
) -> Result<Certificate, AnalyticError> {
    // log2(10) < 3.33
    let mut bits = (digits as u32 * 333).div_ceil(100) + 8;
    loop {
        let root = dominant_root(k, bits, policy)?;
        if let Some(truncated) = root.truncated_decimal(digits) {
            let out = RootOutputs {
                k,
                digits,
                precision_bits: bits,
                lo: rational_to_exact_decimal(&root.lo).expect("dyadic endpoint"),
                hi: rational_to_exact_decimal(&root.hi).expect("dyadic endpoint"),
                sign_lo: root.sign_lo,
                sign_hi: root.sign_hi,
                truncated,
            };
            let inputs = json!({ "k": k, "digits": digits });
            return Ok(Certificate::new(CertificateKind::Root, &inputs, &out).expect("plain JSON"));
        }
        log::trace!("root k={k}: {bits} bits straddle a digit boundary");
        bits += 32;
    }
}

#[derive(Serialize)]
struct SmallKEntry<'a> {
    k: usize,
    status: &'static str,
    /// Bound on `n - 1`, when certified.
    h: Option<String>,
    error: Option<String>,
    certificate: Option<&'a ReductionCertificate>,
}

fn small_k_entry(k: usize, r: &Result<ReductionCertificate, LatticeError>) -> SmallKEntry<'_> {
    match r {
        Ok(c) => SmallKEntry {
            k,
            status: "ok",
            h: c.h_bound.as_ref().map(plain),
            error: None,
            certificate: Some(c),
        },
        Err(LatticeError::HypothesisFailed(c)) => SmallKEntry {
            k,
            status: "failed",
            h: None,
            error: Some(LatticeError::HypothesisFailed(c.clone()).to_string()),
            certificate: Some(c),
        },
        Err(e) => SmallKEntry {
            k,
            status: "failed",
            h: None,
            error: Some(e.to_string()),
            certificate: None,
        },
    }
}

/// Per-`k` reductions with the overall maximum, or the list of orders where
/// the reduction hypothesis could not be met.
pub fn small_k_certificate(cfg: &PipelineConfig, sweep: &SmallKSweep) -> Certificate {
    let small = cfg.small_k();
    let inputs = json!({
        "k_lo": cfg.reduce_k.lo,
        "k_hi": cfg.reduce_k.hi,
        "c": small.c.to_string(),
        "c3": plain(&small.c3),
        "retry_factor": small.reduction.retry_factor.to_string(),
        "max_retries": small.reduction.max_retries,
    });
    let failed: Vec<usize> = sweep.failures().map(|(k, _)| k).collect();
    let max = sweep
        .max_bound()
        .map(|(k, h)| json!({ "k": k, "h": plain(h) }));
    let entries: Vec<SmallKEntry> = sweep
        .results
        .iter()
        .map(|(k, r)| small_k_entry(*k, r))
        .collect();
    let outputs = json!({
        "all_certified": failed.is_empty(),
        "max_bound": max,
        "failed_k": failed,
        "entries": entries,
    });
    Certificate::new(CertificateKind::Reduction, &inputs, &outputs).expect("plain JSON")
}

/// The iterated large-`k` chain and how it ended.
pub fn large_k_certificate(
    cfg: &PipelineConfig,
    start: (&Float, &Float),
    result: &Result<LargeKChain, LatticeError>,
) -> Certificate {
    let large = cfg.large_k();
    let inputs = json!({
        "start_k": plain(start.0),
        "start_n": plain(start.1),
        "target": large.target.to_string(),
        "c3": plain(&large.c3),
        "margin": large.margin,
        "max_rounds": large.max_rounds,
    });
    let (status, chain, error) = match result {
        Ok(c) => ("reached", Some(c), None),
        Err(LatticeError::Divergence(c)) => (
            "divergence",
            Some(&**c),
            Some(result.as_ref().unwrap_err().to_string()),
        ),
        Err(LatticeError::RoundLimit(c)) => (
            "round_limit",
            Some(&**c),
            Some(result.as_ref().unwrap_err().to_string()),
        ),
        Err(e) => ("error", None, Some(e.to_string())),
    };
    let k_bounds: Vec<String> = chain
        .map(|c| c.rounds.iter().map(|r| r.k_bound.to_string()).collect())
        .unwrap_or_default();
    let outputs = json!({
        "status": status,
        "k_bounds": k_bounds,
        "error": error,
        "chain": chain,
    });
    Certificate::new(CertificateKind::Reduction, &inputs, &outputs).expect("plain JSON")
}

pub fn search_certificate(
    k_lo: usize,
    k_hi: usize,
    n_max: i64,
    records: &[SolutionRecord],
) -> Certificate {
    let inputs = json!({ "k_lo": k_lo, "k_hi": k_hi, "n_min": "k+1", "n_max": n_max });
    let outputs = json!({ "count": records.len(), "records": records });
    Certificate::new(CertificateKind::Sweep, &inputs, &outputs).expect("plain JSON")
}

/// The a-priori bounds that seed both reductions: `n` at `k = 1000` and
/// the bound on `k` with the matching bound on `n`.
pub fn start_bounds_certificate() -> Result<Certificate, crate::bounds::BoundsError> {
    let n1000 = lemma41a_bound(&Float::with_val(PREC, 1000))?;
    let k_max = lemma41b_k_bound();
    let n_at_k_max = lemma41a_bound(&Float::with_val(PREC, &k_max))?;
    let k_int = k_max.to_integer().unwrap_or_else(Integer::new);
    let outputs = json!({
        "n_bound_at_k_1000": plain(&n1000),
        "k_bound": plain(&k_max),
        "k_bound_floor": k_int.to_string(),
        "n_bound_at_k_bound": plain(&n_at_k_max),
    });
    let inputs = json!({ "precision_bits": PREC });
    Ok(Certificate::new(CertificateKind::Bound, &inputs, &outputs).expect("plain JSON"))
}
