use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use klucas::analytic::AnalyticError;
use klucas::bounds::lemma41a_bound;
use klucas::bounds::PREC;
use klucas::lattice::{
    reduce_large_k_case, reduce_small_k_case, small_k_sweep, LatticeError, SmallKSweep,
};
use klucas::report::{self, Certificate, PipelineConfig, Span, SuiteReport};
use klucas::sequence::{stream, term, KParams, SequenceError};
use klucas::smooth::{search_checkpointed, FactorBudget, SmoothError, SolutionRecord};
use log::LevelFilter;
use rug::Float;

#[derive(Parser)]
#[command(
    name = "klucas",
    version,
    about = "k-generalized Lucas numbers: terms, roots, bounds and the smooth-term search"
)]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true, env = "KLUCAS_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (default: all logical cores)
    #[arg(long, global = true, env = "KLUCAS_WORKERS")]
    workers: Option<usize>,
    /// Override one configuration key; repeatable, wins over the file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for certificate files
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Verbosity::Normal)]
    log: Verbosity,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Verbosity {
    Quiet,
    Normal,
    Trace,
}

#[derive(Subcommand)]
enum Command {
    /// Print L_n for one index or an inclusive range
    Seq(SeqArgs),
    /// Certified decimal digits of the dominant root α(k)
    Root(RootArgs),
    /// Lattice reduction of the small-k or large-k linear forms
    Reduce(ReduceArgs),
    /// Search for 7-smooth terms past the power-of-two family
    Search(SearchArgs),
    /// Run a check suite
    Verify(VerifyArgs),
    /// Reduce, then search with the certified bound, end to end
    Certify,
}

#[derive(Args)]
struct SeqArgs {
    #[arg(long)]
    k: usize,
    #[arg(
        long,
        allow_negative_numbers = true,
        conflicts_with = "range",
        required_unless_present = "range"
    )]
    n: Option<i64>,
    /// Inclusive range a..b
    #[arg(long, allow_hyphen_values = true)]
    range: Option<Span>,
}

#[derive(Args)]
struct RootArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 30)]
    digits: usize,
    /// Print the certificate instead of the digits
    #[arg(long)]
    json: bool,
    /// Also write the certificate here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Case {
    SmallK,
    LargeK,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    case: Case,
    /// Single order (small-k only)
    #[arg(long, conflicts_with = "k_range")]
    k: Option<usize>,
    /// Orders a..b (small-k only)
    #[arg(long)]
    k_range: Option<Span>,
}

#[derive(Args)]
struct SearchArgs {
    /// Orders a..b
    #[arg(long)]
    k: Option<Span>,
    #[arg(long)]
    n_max: Option<i64>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Reuse finished shards from the checkpoint
    #[arg(long)]
    resume: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Identities,
    Binet,
    Roots,
    Analytic,
    T11,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, default_value_t = 50)]
    k_max: usize,
    /// Orders a..b (binet, t11)
    #[arg(long)]
    k: Option<Span>,
    #[arg(long)]
    n_max: Option<i64>,
}

/// Exit statuses: 0 ok, 1 a check failed, 2 bad usage, 3 resources.
enum Failure {
    Check(String),
    Usage(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<SequenceError> for Failure {
    fn from(e: SequenceError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<AnalyticError> for Failure {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::PrecisionExhausted { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SmoothError> for Failure {
    fn from(e: SmoothError) -> Self {
        match e {
            SmoothError::Domain(_) | SmoothError::Sequence(_) => Failure::Usage(e.to_string()),
            SmoothError::Checkpoint(_) => Failure::Check(e.to_string()),
            SmoothError::Resource { .. } | SmoothError::Io(_) => Failure::Resource(e.to_string()),
        }
    }
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Parameter(_) | LatticeError::Shape(_) => Failure::Usage(e.to_string()),
            LatticeError::Analytic(a) => a.into(),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Resource(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            PipelineConfig::from_kv(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => PipelineConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(d) = &cli.output_dir {
        cfg.checkpoint = d.join("search.ckpt");
        cfg.output_dir = d.clone();
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn write_certificate(cfg: &PipelineConfig, name: &str, cert: &Certificate) -> io::Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    fs::write(&path, cert.to_json())?;
    Ok(path)
}

fn out() -> io::StdoutLock<'static> {
    io::stdout().lock()
}

fn cmd_seq(a: &SeqArgs) -> Outcome {
    let params = KParams::new(a.k)?;
    let mut o = out();
    match (a.n, a.range) {
        (Some(n), _) => writeln!(o, "{}", term(params, n)?)?,
        (None, Some(r)) => {
            let terms: Vec<String> = stream(params, r.lo, r.hi)?
                .map(|(_, v)| v.to_string())
                .collect();
            writeln!(o, "{}", terms.join(" "))?;
        }
        (None, None) => return Err(Failure::Usage("give --n or --range".into())),
    }
    Ok(())
}

fn cmd_root(cfg: &PipelineConfig, a: &RootArgs) -> Outcome {
    if a.k < 2 {
        return Err(Failure::Usage(format!("k must be at least 2, got {}", a.k)));
    }
    let cert = report::root_certificate(a.k, a.digits, &cfg.policy())?;
    let outputs: report::RootOutputs = cert.outputs_as().expect("own schema");
    if let Some(p) = &a.out {
        fs::write(p, cert.to_json())?;
    }
    let mut o = out();
    if a.json {
        write!(o, "{}", cert.to_json())?;
    } else {
        writeln!(o, "{}", outputs.truncated)?;
    }
    Ok(())
}

fn small_k_summary(sweep: &SmallKSweep, span: Span) -> (String, bool) {
    let failed: Vec<usize> = sweep.failures().map(|(k, _)| k).collect();
    if failed.is_empty() {
        let (k, h) = sweep.max_bound().expect("nonempty sweep");
        let h = h.to_f64();
        let verdict = if h <= 1500.0 { "<=1500" } else { ">1500" };
        (
            format!(
                "max n-1 bound over k in [{}, {}]: {h:.1} at k={k} ({verdict})",
                span.lo, span.hi
            ),
            h <= 1500.0,
        )
    } else {
        let best = sweep
            .results
            .iter()
            .filter_map(|(k, r)| Some((*k, r.as_ref().ok()?.bound_f64()?)))
            .fold(None, |m: Option<(usize, f64)>, (k, h)| match m {
                Some((_, b)) if b >= h => m,
                _ => Some((k, h)),
            });
        let mut s = format!(
            "reduction hypothesis failed for {} of {} orders (first k={}, last k={})",
            failed.len(),
            sweep.results.len(),
            failed[0],
            failed[failed.len() - 1]
        );
        if let Some((k, h)) = best {
            s.push_str(&format!(
                "; max n-1 bound over certified orders: {h:.1} at k={k}"
            ));
        }
        (s, false)
    }
}

fn run_small_k(cfg: &PipelineConfig, span: Span) -> Result<(SmallKSweep, String, bool), Failure> {
    let small = cfg.small_k();
    let sweep = report::with_workers(cfg.workers, || small_k_sweep(span.orders(), &small))
        .map_err(|e| Failure::Resource(e.to_string()))?;
    let cert = report::small_k_certificate(
        &PipelineConfig {
            reduce_k: span,
            ..cfg.clone()
        },
        &sweep,
    );
    let path = write_certificate(cfg, "reduce-small-k.json", &cert)?;
    let (summary, ok) = small_k_summary(&sweep, span);
    Ok((
        sweep,
        format!("{summary}\ncertificate: {}", path.display()),
        ok,
    ))
}

fn run_large_k(cfg: &PipelineConfig) -> Result<(String, bool), Failure> {
    let (k0, n0) = report::large_k_start().map_err(|e| Failure::Check(e.to_string()))?;
    let large = cfg.large_k();
    let result = report::with_workers(cfg.workers, || reduce_large_k_case(&k0, &n0, &large))
        .map_err(|e| Failure::Resource(e.to_string()))?;
    let cert = report::large_k_certificate(cfg, (&k0, &n0), &result);
    let path = write_certificate(cfg, "reduce-large-k.json", &cert)?;
    let (chain, ok) = match &result {
        Ok(c) => (c, true),
        Err(LatticeError::Divergence(c)) | Err(LatticeError::RoundLimit(c)) => (&**c, false),
        Err(e) => return Err(e.clone().into()),
    };
    let ks: Vec<String> = chain.rounds.iter().map(|r| r.k_bound.to_string()).collect();
    let summary = if ok {
        format!(
            "k bounds per round: {}; k < {} after {} rounds",
            ks.join(" -> "),
            chain.target,
            chain.rounds.len()
        )
    } else {
        format!(
            "k bounds per round: {}; stopped above {}: {}",
            ks.join(" -> "),
            chain.target,
            result.as_ref().unwrap_err()
        )
    };
    Ok((format!("{summary}\ncertificate: {}", path.display()), ok))
}

fn cmd_reduce(cfg: &PipelineConfig, a: &ReduceArgs) -> Outcome {
    match a.case {
        Case::SmallK => {
            if let Some(k) = a.k {
                let cap = lemma41a_bound(&Float::with_val(PREC, k))
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                let r = reduce_small_k_case(k, &cap, &cfg.small_k());
                let (cert, ok) = match &r {
                    Ok(c) => (c, true),
                    Err(LatticeError::HypothesisFailed(c)) => (&**c, false),
                    Err(e) => return Err(e.clone().into()),
                };
                let doc = Certificate::new(
                    report::CertificateKind::Reduction,
                    &serde_json::json!({ "k": k, "n_cap": cap.to_string_radix(10, Some(20)) }),
                    cert,
                )
                .expect("plain JSON");
                let path = write_certificate(cfg, &format!("reduce-small-k-{k}.json"), &doc)?;
                let mut o = out();
                match cert.bound_f64() {
                    Some(h) if ok => writeln!(
                        o,
                        "k={k}: n-1 <= {h:.1} (C has {} digits, {} attempts)",
                        cert.c.to_string().len(),
                        cert.attempts
                    )?,
                    _ => writeln!(o, "k={k}: {}", r.as_ref().unwrap_err())?,
                }
                writeln!(o, "certificate: {}", path.display())?;
                return if ok {
                    Ok(())
                } else {
                    Err(Failure::Check(format!("k={k}: reduction failed")))
                };
            }
            let span = a.k_range.unwrap_or(cfg.reduce_k);
            if span.lo < 2 {
                return Err(Failure::Usage("orders start at 2".into()));
            }
            let (_, summary, ok) = run_small_k(cfg, span)?;
            writeln!(out(), "{summary}")?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Check("small-k reduction incomplete".into()))
            }
        }
        Case::LargeK => {
            if a.k.is_some() || a.k_range.is_some() {
                return Err(Failure::Usage(
                    "--k and --k-range apply to the small-k case".into(),
                ));
            }
            let (summary, ok) = run_large_k(cfg)?;
            writeln!(out(), "{summary}")?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Check(
                    "large-k chain did not reach the target".into(),
                ))
            }
        }
    }
}

fn print_records(records: &[SolutionRecord]) -> io::Result<()> {
    let mut o = out();
    for r in records {
        let [a, b, c, d] = r.factorization.exponents();
        writeln!(
            o,
            "k={} n={} L={} = 2^{a} 3^{b} 5^{c} 7^{d}",
            r.k, r.n, r.value
        )?;
    }
    Ok(())
}

fn run_search(
    cfg: &PipelineConfig,
    span: Span,
    n_max: i64,
    checkpoint: &Path,
    resume: bool,
) -> Result<Vec<SolutionRecord>, Failure> {
    if span.lo < 2 {
        return Err(Failure::Usage("orders start at 2".into()));
    }
    let (lo, hi) = (span.lo as usize, span.hi as usize);
    if let Some(dir) = checkpoint.parent() {
        fs::create_dir_all(dir)?;
    }
    let outcome = report::with_workers(cfg.workers, || {
        search_checkpointed(lo, hi, |_| n_max, checkpoint, resume)
    })
    .map_err(|e| Failure::Resource(e.to_string()))??;
    log::info!(
        "{} shards resumed, {} computed",
        outcome.resumed,
        outcome.computed
    );
    let cert = report::search_certificate(lo, hi, n_max, &outcome.records);
    let path = write_certificate(cfg, "search.json", &cert)?;
    print_records(&outcome.records)?;
    writeln!(
        out(),
        "{} records for k in [{lo}, {hi}], k < n <= {n_max}\ncertificate: {}",
        outcome.records.len(),
        path.display()
    )?;
    Ok(outcome.records)
}

fn cmd_search(cfg: &PipelineConfig, a: &SearchArgs) -> Outcome {
    let span = a.k.unwrap_or(cfg.search_k);
    let n_max = a.n_max.unwrap_or(cfg.search_n_max);
    let ckpt = a
        .checkpoint
        .clone()
        .unwrap_or_else(|| cfg.checkpoint.clone());
    if !a.resume && ckpt.exists() {
        fs::remove_file(&ckpt)?;
    }
    run_search(cfg, span, n_max, &ckpt, a.resume).map(|_| ())
}

fn cmd_verify(cfg: &PipelineConfig, a: &VerifyArgs) -> Outcome {
    let policy = cfg.policy();
    let span = a.k.unwrap_or(Span::new(2, a.k_max as i64));
    if span.lo < 2 {
        return Err(Failure::Usage("orders start at 2".into()));
    }
    let (lo, hi) = (span.lo as usize, span.hi as usize);
    let report: SuiteReport =
        report::with_workers(cfg.workers, || -> Result<SuiteReport, Failure> {
            Ok(match a.suite {
                Suite::Identities => report::identity_suite(hi, a.n_max.unwrap_or(200))?,
                Suite::Binet => report::binet_suite(lo, hi, a.n_max.unwrap_or(200), &policy)?,
                Suite::Roots => report::root_suite(hi, &policy)?,
                Suite::Analytic => report::analytic_suite(hi, &policy)?,
                Suite::T11 => {
                    report::t11_suite(lo, hi, a.n_max.unwrap_or(100), &FactorBudget::default())?
                }
            })
        })
        .map_err(|e| Failure::Resource(e.to_string()))??;
    let mut o = out();
    for f in &report.failures {
        writeln!(o, "FAIL {f}")?;
    }
    let verdict = if report.passed() { "pass" } else { "fail" };
    writeln!(o, "{}: {verdict} ({} checks)", report.suite, report.checked)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("{} suite failed", report.suite)))
    }
}

/// Small-k reduction, large-k chain, then the search up to the certified
/// bound. When some order is not certified the configured bound is kept
/// and the run ends with a check failure.
fn cmd_certify(cfg: &PipelineConfig) -> Outcome {
    let bounds = report::start_bounds_certificate().map_err(|e| Failure::Check(e.to_string()))?;
    let path = write_certificate(cfg, "bounds.json", &bounds)?;
    writeln!(out(), "a-priori bounds: {}", path.display())?;

    let (sweep, summary, small_ok) = run_small_k(cfg, cfg.reduce_k)?;
    writeln!(out(), "{summary}")?;
    let (summary, large_ok) = run_large_k(cfg)?;
    writeln!(out(), "{summary}")?;

    let n_max = match sweep.max_bound() {
        Some((_, h)) if small_ok => {
            let n = h.to_f64().floor() as i64 + 1;
            log::info!("search bound from the reduction: n <= {n}");
            n
        }
        _ => {
            log::warn!(
                "reduction incomplete; searching up to the configured n <= {}",
                cfg.search_n_max
            );
            cfg.search_n_max
        }
    };
    if cfg.checkpoint.exists() {
        fs::remove_file(&cfg.checkpoint)?;
    }
    run_search(cfg, cfg.search_k, n_max, &cfg.checkpoint, false)?;
    if small_ok && large_ok {
        Ok(())
    } else {
        Err(Failure::Check(
            "reduction steps did not certify the full range".into(),
        ))
    }
}

fn run(cli: &Cli) -> Outcome {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Seq(a) => cmd_seq(a),
        Command::Root(a) => cmd_root(&cfg, a),
        Command::Reduce(a) => cmd_reduce(&cfg, a),
        Command::Search(a) => cmd_search(&cfg, a),
        Command::Verify(a) => cmd_verify(&cfg, a),
        Command::Certify => cmd_certify(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.log {
        Verbosity::Quiet => LevelFilter::Error,
        Verbosity::Normal => LevelFilter::Warn,
        Verbosity::Trace => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("klucas: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
