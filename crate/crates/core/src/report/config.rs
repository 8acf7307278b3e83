use std::fmt;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use rug::{Float, Integer};
use thiserror::Error;

use crate::analytic::PrecisionPolicy;
use crate::bounds::PREC;
use crate::lattice::{LargeKConfig, ReductionConfig, SmallKConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
}

/// Inclusive range written `a..b`; a single number `a` means `a..a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub lo: i64,
    pub hi: i64,
}

impl Span {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    /// As a range of orders; negative endpoints clamp to zero.
    pub fn orders(&self) -> RangeInclusive<usize> {
        (self.lo.max(0) as usize)..=(self.hi.max(0) as usize)
    }
}

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                (num(a)?, num(b)?)
            }
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        let span = Span { lo, hi };
        if span.is_empty() {
            return Err(format!("empty range {s}"));
        }
        Ok(span)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Settings shared by the end-to-end commands. Defaults give the reference
/// computation: `C = 10^355` for `k ≤ 1000`, the search up to `n = 1449`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub precision_start_bits: u32,
    pub precision_cap_bits: u32,
    /// Extra digits of `C` in the large-`k` rounds.
    pub c_margin: u32,
    /// `C = 10^small_k_c_digits` for the small-`k` lattices.
    pub small_k_c_digits: u32,
    /// `C` grows by `10^retry_factor_digits` per retry.
    pub retry_factor_digits: u32,
    pub max_retries: u32,
    pub max_rounds: u32,
    pub large_k_target: u64,
    pub reduce_k: Span,
    pub search_k: Span,
    pub search_n_max: i64,
    /// `None` uses every logical core.
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
    pub checkpoint: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let policy = PrecisionPolicy::default();
        Self {
            precision_start_bits: policy.start_bits,
            precision_cap_bits: policy.cap_bits,
            c_margin: 0,
            small_k_c_digits: 355,
            retry_factor_digits: 5,
            max_retries: 5,
            max_rounds: 12,
            large_k_target: 1000,
            reduce_k: Span::new(2, 1000),
            search_k: Span::new(2, 1000),
            search_n_max: 1449,
            workers: None,
            output_dir: PathBuf::from("klucas-out"),
            checkpoint: PathBuf::from("klucas-out/search.ckpt"),
        }
    }
}

pub const CONFIG_KEYS: [&str; 14] = [
    "precision_start_bits",
    "precision_cap_bits",
    "c_margin",
    "small_k_c_digits",
    "retry_factor_digits",
    "max_retries",
    "max_rounds",
    "large_k_target",
    "reduce_k",
    "search_k",
    "search_n_max",
    "workers",
    "output_dir",
    "checkpoint",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

impl PipelineConfig {
    /// Defaults overlaid with a `key = value` file. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_kv(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "precision_start_bits" => self.precision_start_bits = parse(key, value)?,
            "precision_cap_bits" => self.precision_cap_bits = parse(key, value)?,
            "c_margin" => self.c_margin = parse(key, value)?,
            "small_k_c_digits" => self.small_k_c_digits = parse(key, value)?,
            "retry_factor_digits" => self.retry_factor_digits = parse(key, value)?,
            "max_retries" => self.max_retries = parse(key, value)?,
            "max_rounds" => self.max_rounds = parse(key, value)?,
            "large_k_target" => self.large_k_target = parse(key, value)?,
            "reduce_k" => self.reduce_k = parse(key, value)?,
            "search_k" => self.search_k = parse(key, value)?,
            "search_n_max" => self.search_n_max = parse(key, value)?,
            "workers" => self.workers = Some(parse(key, value)?),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "checkpoint" => self.checkpoint = PathBuf::from(value),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Numeric settings must be positive (the `C` margin may be zero) and
    /// order ranges must start at 2.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: String, reason: &str| {
            Err(ConfigError::Value {
                key: key.into(),
                value,
                reason: reason.into(),
            })
        };
        for (key, v) in [
            ("precision_start_bits", self.precision_start_bits as u64),
            ("precision_cap_bits", self.precision_cap_bits as u64),
            ("small_k_c_digits", self.small_k_c_digits as u64),
            ("retry_factor_digits", self.retry_factor_digits as u64),
            ("max_retries", self.max_retries as u64),
            ("max_rounds", self.max_rounds as u64),
            ("large_k_target", self.large_k_target),
        ] {
            if v == 0 {
                return bad(key, v.to_string(), "must be positive");
            }
        }
        if self.precision_start_bits > self.precision_cap_bits {
            return bad(
                "precision_start_bits",
                self.precision_start_bits.to_string(),
                "exceeds precision_cap_bits",
            );
        }
        if self.workers == Some(0) {
            return bad("workers", "0".into(), "must be positive");
        }
        for (key, span) in [("reduce_k", self.reduce_k), ("search_k", self.search_k)] {
            if span.is_empty() || span.lo < 2 {
                return bad(key, span.to_string(), "need 2 <= lo <= hi");
            }
        }
        if self.search_n_max < 1 {
            return bad(
                "search_n_max",
                self.search_n_max.to_string(),
                "must be positive",
            );
        }
        Ok(())
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy {
            start_bits: self.precision_start_bits,
            cap_bits: self.precision_cap_bits,
        }
    }

    pub fn reduction(&self) -> ReductionConfig {
        ReductionConfig {
            retry_factor: Integer::from(Integer::u_pow_u(10, self.retry_factor_digits)),
            max_retries: self.max_retries,
            policy: self.policy(),
            ..ReductionConfig::default()
        }
    }

    pub fn small_k(&self) -> SmallKConfig {
        SmallKConfig {
            c: Integer::from(Integer::u_pow_u(10, self.small_k_c_digits)),
            reduction: self.reduction(),
            ..SmallKConfig::default()
        }
    }

    pub fn large_k(&self) -> LargeKConfig {
        LargeKConfig {
            margin: self.c_margin,
            target: Integer::from(self.large_k_target),
            max_rounds: self.max_rounds,
            reduction: self.reduction(),
            ..LargeKConfig::default()
        }
    }

    /// Settings in `key = value` form, readable by [`PipelineConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line(
            "precision_start_bits",
            self.precision_start_bits.to_string(),
        );
        line("precision_cap_bits", self.precision_cap_bits.to_string());
        line("c_margin", self.c_margin.to_string());
        line("small_k_c_digits", self.small_k_c_digits.to_string());
        line("retry_factor_digits", self.retry_factor_digits.to_string());
        line("max_retries", self.max_retries.to_string());
        line("max_rounds", self.max_rounds.to_string());
        line("large_k_target", self.large_k_target.to_string());
        line("reduce_k", self.reduce_k.to_string());
        line("search_k", self.search_k.to_string());
        line("search_n_max", self.search_n_max.to_string());
        if let Some(w) = self.workers {
            line("workers", w.to_string());
        }
        line("output_dir", self.output_dir.display().to_string());
        line("checkpoint", self.checkpoint.display().to_string());
        out
    }
}

/// Starting point of the large-`k` chain: the small-`n` bound on `k` and
/// the a-priori bound on `n` there.
pub fn large_k_start() -> Result<(Float, Float), crate::bounds::BoundsError> {
    let k = crate::bounds::lemma41b_k_bound();
    let n = crate::bounds::lemma41a_bound(&Float::with_val(PREC, &k))?;
    Ok((k, n))
}
