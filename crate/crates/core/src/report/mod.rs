//! Configuration, certificate documents and the check suites behind the
//! command-line tool.

mod certs;
mod config;
mod suites;

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use certs::{
    large_k_certificate, root_certificate, search_certificate, small_k_certificate,
    start_bounds_certificate, RootOutputs,
};
pub use config::{large_k_start, ConfigError, PipelineConfig, Span, CONFIG_KEYS};
pub use suites::{analytic_suite, binet_suite, identity_suite, root_suite, t11_suite, SuiteReport};

pub const TOOL_NAME: &str = "klucas";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Root,
    Bound,
    Reduction,
    Sweep,
}

/// One self-describing JSON document. Numbers that may exceed 64 bits are
/// strings throughout `inputs` and `outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub tool: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub inputs: Value,
    pub outputs: Value,
}

impl Certificate {
    pub fn new<I: Serialize, O: Serialize>(
        kind: CertificateKind,
        inputs: &I,
        outputs: &O,
    ) -> serde_json::Result<Self> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Ok(Self {
            kind,
            tool: TOOL_NAME.into(),
            tool_version: TOOL_VERSION.into(),
            timestamp,
            inputs: serde_json::to_value(inputs)?,
            outputs: serde_json::to_value(outputs)?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("values are plain JSON");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// The document with the timestamp zeroed, for rerun comparisons.
    pub fn without_timestamp(&self) -> Self {
        Self {
            timestamp: 0,
            ..self.clone()
        }
    }

    /// Decode the outputs into their typed form.
    pub fn outputs_as<T: for<'de> Deserialize<'de>>(&self) -> serde_json::Result<T> {
        T::deserialize(&self.outputs)
    }
}

/// Run `f` on a dedicated pool of `workers` threads, or on the global pool
/// (one thread per logical core) when `None`.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> Result<R, rayon::ThreadPoolBuildError>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match workers {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()?
            .install(f)),
    }
}
