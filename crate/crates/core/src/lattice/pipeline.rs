//! The two reduction pipelines: one 7-dimensional form per small `k`, and the
//! iterated 4-dimensional form over the primes up to 7 for large `k`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use rug::float::Round;
use rug::ops::MulAssignRound;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::{
    build_lattice, c1_lower_bound, deweger_bound, lll_reduce, EliminatedRelation, Generator,
    LatticeBasis, LatticeError, LinearForm,
};
use crate::analytic::{constants_for, derived_constants, DerivedConstants, PrecisionPolicy};
use crate::bounds::{lemma41a_bound, PREC};
use crate::serde_num;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionConfig {
    pub y_param: Rational,
    /// `C` is multiplied by this when `c₁² < T² + S`.
    pub retry_factor: Integer,
    pub max_retries: u32,
    pub policy: PrecisionPolicy,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            y_param: Rational::from((3, 4)),
            retry_factor: Integer::from(Integer::u_pow_u(10, 5)),
            max_retries: 5,
            policy: PrecisionPolicy::default(),
        }
    }
}

/// Everything needed to re-check one application of the reduction lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub k: Option<usize>,
    pub generators: Vec<Generator>,
    #[serde(with = "serde_num::integer")]
    pub c: Integer,
    #[serde(with = "serde_num::integer_vec")]
    pub eta_floors: Vec<Integer>,
    #[serde(with = "serde_num::float_vec")]
    pub x: Vec<Float>,
    #[serde(with = "serde_num::float")]
    pub x0: Float,
    #[serde(with = "serde_num::rational")]
    pub c1_sq: Rational,
    #[serde(with = "serde_num::float")]
    pub s: Float,
    #[serde(with = "serde_num::float")]
    pub t: Float,
    /// Already multiplied by `|scale|`.
    #[serde(with = "serde_num::float")]
    pub c3: Float,
    #[serde(with = "serde_num::float")]
    pub c4: Float,
    /// `None` when `c₁² < T² + S`. Otherwise `H` is at most this, or the
    /// form is degenerate (only the last coefficient nonzero).
    #[serde(with = "serde_num::float_opt")]
    pub h_bound: Option<Float>,
    /// The reduced form is `scale` times the original one.
    #[serde(with = "serde_num::integer")]
    pub scale: Integer,
    pub eliminated: Vec<EliminatedRelation>,
    pub attempts: u32,
    pub lll_swaps: u64,
    pub eta_precision: u32,
}

impl ReductionCertificate {
    /// `c₁² ≥ T² + S`, exactly.
    pub fn hypothesis_holds(&self) -> bool {
        let t = self.t.to_rational().expect("finite");
        let need = Rational::from(t.square_ref()) + self.s.to_rational().expect("finite");
        self.c1_sq >= need
    }

    pub fn bound_f64(&self) -> Option<f64> {
        self.h_bound.as_ref().map(Float::to_f64)
    }
}

fn logs_within(c: &DerivedConstants, bits: u32) -> bool {
    c.log_alpha.width_within(bits)
        && c.log_f_alpha.width_within(bits)
        && c.log_two_alpha_minus_one.width_within(bits)
}

/// Build the lattice for `form` at scale `c`, doubling the working precision
/// while some floor is ambiguous.
fn certified_lattice(
    form: &LinearForm,
    consts: &mut Option<DerivedConstants>,
    c: &Integer,
    policy: &PrecisionPolicy,
) -> Result<(LatticeBasis, Vec<Integer>, u32), LatticeError> {
    let needs_alpha = form
        .generators
        .iter()
        .any(|g| !matches!(g, Generator::Prime(_)));
    let mut prec = c.significant_bits() + 64;
    loop {
        policy.check(prec)?;
        if needs_alpha {
            let k = form
                .k
                .ok_or_else(|| LatticeError::Parameter("form over α without k".into()))?;
            let fresh = match consts.as_ref() {
                Some(cur) if logs_within(cur, prec) => None,
                // Headroom so that a few enlargements of C reuse the constants.
                Some(cur) => Some(derived_constants(&cur.root, prec + 96, policy)?),
                None => Some(constants_for(k, prec + 96, policy)?),
            };
            if let Some(f) = fresh {
                *consts = Some(f);
            }
        }
        let etas = form.etas(consts.as_ref(), prec + 8)?;
        match build_lattice(&etas, c) {
            Ok((basis, floors)) => return Ok((basis, floors, prec)),
            Err(LatticeError::AmbiguousFloor { index }) => {
                log::trace!("floor {index} ambiguous at {prec} bits, doubling");
                prec *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn max_of(x: &[Float]) -> Float {
    x.iter()
        .fold(Float::new(PREC), |m, v| if *v > m { v.clone() } else { m })
}

/// Reduce one linear form: build, LLL, `c₁` with `y = 0`, then the lemma.
///
/// When the hypothesis fails, exact multiplicative relations visible in the
/// reduced basis are eliminated first (at the same `C`); only when none is
/// found is `C` enlarged.
pub fn reduce_form(
    mut form: LinearForm,
    consts: Option<DerivedConstants>,
    c_start: &Integer,
    c3: &Float,
    c4: &Float,
    cfg: &ReductionConfig,
) -> Result<ReductionCertificate, LatticeError> {
    let mut consts = consts;
    let mut c = c_start.clone();
    let mut retries = 0;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let (basis, floors, prec) = certified_lattice(&form, &mut consts, &c, &cfg.policy)?;
        let reduced = lll_reduce(&basis, &cfg.y_param)?;
        let zero = vec![Rational::new(); form.dim()];
        let c1 = c1_lower_bound(&reduced, &zero)?;
        let x = form.bounds();
        let mut c3_eff = Float::with_val_round(
            PREC.max(c3.prec()),
            &Integer::from(form.scale.abs_ref()),
            Round::Up,
        )
        .0;
        c3_eff.mul_assign_round(c3, Round::Up);
        let outcome = deweger_bound(&c1.c1_sq, &x, &c3_eff, c4, &c)?;
        let (s, t) = outcome.s_t();
        let cert = ReductionCertificate {
            k: form.k,
            generators: form.generators.clone(),
            c: c.clone(),
            eta_floors: floors,
            x0: max_of(&x),
            x,
            c1_sq: c1.c1_sq,
            s: s.clone(),
            t: t.clone(),
            c3: c3_eff,
            c4: c4.clone(),
            h_bound: outcome.bound().cloned(),
            scale: form.scale.clone(),
            eliminated: form.eliminated.clone(),
            attempts,
            lll_swaps: reduced.swaps,
            eta_precision: prec,
        };
        if cert.h_bound.is_some() {
            return Ok(cert);
        }
        if form.dim() > 2 {
            if let Some(r) = form.find_relations(&reduced).first() {
                let removed = form.eliminate(r);
                log::debug!("k={:?}: eliminated {removed} via {r:?}", form.k);
                continue;
            }
        }
        if retries == cfg.max_retries {
            return Err(LatticeError::HypothesisFailed(Box::new(cert)));
        }
        retries += 1;
        c *= &cfg.retry_factor;
        log::debug!(
            "k={:?}: hypothesis failed, retry {retries} with larger C",
            form.k
        );
    }
}

pub fn small_k_generators() -> Vec<Generator> {
    use Generator::*;
    vec![
        Prime(2),
        Prime(3),
        Prime(5),
        Prime(7),
        TwoAlphaMinusOne,
        Alpha,
        FAlpha,
    ]
}

pub fn large_k_generators() -> Vec<Generator> {
    [2, 3, 5, 7].into_iter().map(Generator::Prime).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmallKConfig {
    pub c: Integer,
    pub c3: Float,
    pub reduction: ReductionConfig,
}

impl Default for SmallKConfig {
    fn default() -> Self {
        Self {
            c: Integer::from(Integer::u_pow_u(10, 355)),
            c3: Float::with_val(PREC, 12),
            reduction: ReductionConfig::default(),
        }
    }
}

/// `n - 1 ≤ H` for the form in the seven logarithms attached to `k`, with
/// every coefficient bounded by `n_cap`, `c₃ = 12` and `c₄ = log α`.
pub fn reduce_small_k_case(
    k: usize,
    n_cap: &Float,
    cfg: &SmallKConfig,
) -> Result<ReductionCertificate, LatticeError> {
    if k < 2 {
        return Err(LatticeError::Parameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let consts = constants_for(k, 64, &cfg.reduction.policy)?;
    let c4 = consts.log_alpha.lo().clone();
    let form = LinearForm::new(Some(k), small_k_generators(), vec![n_cap.clone(); 7]);
    reduce_form(form, Some(consts), &cfg.c, &cfg.c3, &c4, &cfg.reduction)
}

#[derive(Debug, Clone)]
pub struct SmallKSweep {
    pub results: Vec<(usize, Result<ReductionCertificate, LatticeError>)>,
}

impl SmallKSweep {
    /// Largest bound and where it occurs; `None` if any `k` failed.
    pub fn max_bound(&self) -> Option<(usize, &Float)> {
        let mut best: Option<(usize, &Float)> = None;
        for (k, r) in &self.results {
            let h = r.as_ref().ok()?.h_bound.as_ref()?;
            if best.map_or(true, |(_, b)| h > b) {
                best = Some((*k, h));
            }
        }
        best
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &LatticeError)> {
        self.results
            .iter()
            .filter_map(|(k, r)| r.as_ref().err().map(|e| (*k, e)))
    }
}

/// Run the small-`k` reduction for every `k` in range, in parallel. The
/// coefficient cap for each `k` is the a-priori bound on `n`. Results come
/// back in `k` order.
pub fn small_k_sweep(ks: RangeInclusive<usize>, cfg: &SmallKConfig) -> SmallKSweep {
    let results = ks
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let r = lemma41a_bound(&Float::with_val(PREC, k))
                .map_err(LatticeError::from)
                .and_then(|cap| reduce_small_k_case(k, &cap, cfg));
            match &r {
                Ok(c) => log::info!("k={k}: n-1 <= {}", c.bound_f64().unwrap_or(f64::NAN)),
                Err(e) => log::warn!("k={k}: {e}"),
            }
            (k, r)
        })
        .collect();
    SmallKSweep { results }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeKConfig {
    pub c3: Float,
    /// Extra decimal digits on top of `⌈dim · log10 X₀⌉`.
    pub margin: u32,
    /// Stop once the bound on `k` is below this.
    pub target: Integer,
    pub max_rounds: u32,
    pub reduction: ReductionConfig,
}

impl Default for LargeKConfig {
    fn default() -> Self {
        Self {
            c3: Float::with_val(PREC, 72),
            margin: 0,
            target: Integer::from(1000),
            max_rounds: 12,
            reduction: ReductionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeKRound {
    pub round: u32,
    #[serde(with = "serde_num::float")]
    pub n_in: Float,
    pub certificate: ReductionCertificate,
    /// `⌊2H⌋`.
    #[serde(with = "serde_num::integer")]
    pub k_bound: Integer,
    /// A-priori bound on `n` at `k_bound`.
    #[serde(with = "serde_num::float")]
    pub n_bound: Float,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeKChain {
    #[serde(with = "serde_num::float")]
    pub start_k: Float,
    #[serde(with = "serde_num::float")]
    pub start_n: Float,
    #[serde(with = "serde_num::integer")]
    pub target: Integer,
    pub rounds: Vec<LargeKRound>,
}

impl LargeKChain {
    pub fn final_k_bound(&self) -> Integer {
        match self.rounds.last() {
            Some(r) => r.k_bound.clone(),
            None => self.start_k.to_integer().unwrap_or_default(),
        }
    }

    pub fn reached_target(&self) -> bool {
        self.final_k_bound() < self.target
    }
}

/// `10^(⌈dim · log10 x0⌉ + margin)`, with the logarithm rounded up.
pub fn scale_for(x0: &Float, dim: u32, margin: u32) -> Integer {
    let mut e = Float::with_val_round(PREC, x0.log10_ref(), Round::Up).0;
    e.mul_assign_round(dim, Round::Up);
    let digits = e.ceil().to_u32_saturating().unwrap_or(0) + margin;
    Integer::from(Integer::u_pow_u(10, digits))
}

/// Iterate the 4-dimensional reduction from `(k_bound, n_bound)`: each round
/// bounds `k/2`, and the new `k` bound feeds the a-priori bound on `n`.
pub fn reduce_large_k_case(
    k_bound: &Float,
    n_bound: &Float,
    cfg: &LargeKConfig,
) -> Result<LargeKChain, LatticeError> {
    if *k_bound <= cfg.target {
        return Err(LatticeError::Parameter(format!(
            "starting k bound {k_bound} is already below the target"
        )));
    }
    let mut chain = LargeKChain {
        start_k: k_bound.clone(),
        start_n: n_bound.clone(),
        target: cfg.target.clone(),
        rounds: Vec::new(),
    };
    let c4 = Float::with_val_round(PREC, rug::float::Constant::Log2, Round::Down).0;
    let mut k_prev = k_bound.clone();
    let mut n = n_bound.clone();
    for round in 1..=cfg.max_rounds {
        let c = scale_for(&n, 4, cfg.margin);
        let form = LinearForm::new(None, large_k_generators(), vec![n.clone(); 4]);
        let certificate = reduce_form(form, None, &c, &cfg.c3, &c4, &cfg.reduction)?;
        let mut twice = certificate
            .h_bound
            .clone()
            .expect("reduce_form returns a bound");
        twice.mul_assign_round(2u32, Round::Up);
        let k_new = twice.floor().to_integer().expect("finite");
        let n_next = lemma41a_bound(&Float::with_val(PREC, &k_new))?;
        log::info!("round {round}: k <= {k_new}, n < {}", n_next.to_f64());
        let stalled = k_new >= k_prev;
        chain.rounds.push(LargeKRound {
            round,
            n_in: n.clone(),
            certificate,
            k_bound: k_new.clone(),
            n_bound: n_next.clone(),
        });
        if k_new < cfg.target {
            return Ok(chain);
        }
        if stalled {
            return Err(LatticeError::Divergence(Box::new(chain)));
        }
        k_prev = Float::with_val(PREC, &k_new);
        n = n_next;
    }
    Err(LatticeError::RoundLimit(Box::new(chain)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Complete;

    #[test]
    fn scale_rule() {
        assert_eq!(
            scale_for(&Float::with_val(PREC, 4.6e173), 4, 0),
            Integer::u_pow_u(10, 695).complete()
        );
        assert_eq!(
            scale_for(&Float::with_val(PREC, 4.62e50), 7, 0),
            Integer::u_pow_u(10, 355).complete()
        );
        assert_eq!(
            scale_for(&Float::with_val(PREC, 4.6e54), 4, 1),
            Integer::u_pow_u(10, 220).complete()
        );
    }

    #[test]
    fn tiny_c_retries_then_fails() {
        let cfg = SmallKConfig {
            c: Integer::from(10),
            reduction: ReductionConfig {
                max_retries: 2,
                ..ReductionConfig::default()
            },
            ..SmallKConfig::default()
        };
        match reduce_small_k_case(5, &Float::with_val(PREC, 1e30), &cfg) {
            Err(LatticeError::HypothesisFailed(cert)) => {
                assert_eq!(cert.c, Integer::u_pow_u(10, 11).complete());
                assert!(!cert.hypothesis_holds());
                assert!(cert.h_bound.is_none());
            }
            other => panic!("{other:?}"),
        }
    }
}
