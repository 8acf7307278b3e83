use klucas::analytic::{parse_exact_decimal, PrecisionPolicy};
use klucas::report::*;
use klucas::smooth::{search, FactorBudget};
use proptest::prelude::*;
use rug::Rational;

#[test]
fn defaults_give_the_reference_run() {
    let cfg = PipelineConfig::default();
    cfg.validate().unwrap();
    assert_eq!(cfg.search_n_max, 1449);
    assert_eq!((cfg.search_k.lo, cfg.search_k.hi), (2, 1000));
    assert_eq!(cfg.small_k().c.to_string().len(), 356);
    assert_eq!(cfg.reduction().retry_factor, 100_000);
    assert_eq!(cfg.large_k().target, 1000);
}

#[test]
fn kv_round_trip_and_errors() {
    let text = "\n# comment\nsearch_k = 3..9\nworkers=2\nc_margin = 4\noutput_dir = out/x\n";
    let cfg = PipelineConfig::from_kv(text).unwrap();
    assert_eq!(cfg.search_k, Span::new(3, 9));
    assert_eq!(cfg.workers, Some(2));
    assert_eq!(cfg.c_margin, 4);
    assert_eq!(PipelineConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    for key in CONFIG_KEYS {
        assert!(cfg.to_kv().contains(key), "{key}");
    }

    assert_eq!(
        PipelineConfig::from_kv("a\n"),
        Err(ConfigError::Syntax { line: 1 })
    );
    assert!(matches!(
        PipelineConfig::from_kv("nope = 1"),
        Err(ConfigError::UnknownKey(_))
    ));
    for bad in [
        "max_retries = 0",
        "workers = 0",
        "search_k = 1..5",
        "reduce_k = 9..3",
        "search_n_max = -4",
        "precision_start_bits = 4096\nprecision_cap_bits = 1024",
        "max_rounds = x",
    ] {
        assert!(
            matches!(PipelineConfig::from_kv(bad), Err(ConfigError::Value { .. })),
            "{bad}"
        );
    }
}

#[test]
fn spans() {
    assert_eq!("2..1000".parse::<Span>().unwrap(), Span::new(2, 1000));
    assert_eq!("2..=4".parse::<Span>().unwrap(), Span::new(2, 4));
    assert_eq!("7".parse::<Span>().unwrap(), Span::new(7, 7));
    assert_eq!("-3..1".parse::<Span>().unwrap(), Span::new(-3, 1));
    assert!("5..4".parse::<Span>().is_err());
    assert!("a..4".parse::<Span>().is_err());
    assert_eq!(Span::new(2, 4).orders().count(), 3);
}

proptest! {
    #[test]
    fn span_display_parses_back(lo in -1000i64..1000, len in 0i64..1000) {
        let s = Span::new(lo, lo + len);
        prop_assert_eq!(s.to_string().parse::<Span>().unwrap(), s);
    }
}

#[test]
fn root_certificate_is_exact_and_stable() {
    let policy = PrecisionPolicy::default();
    let a = root_certificate(3, 25, &policy).unwrap();
    let b = root_certificate(3, 25, &policy).unwrap();
    assert_eq!(a.without_timestamp(), b.without_timestamp());
    assert_eq!(
        a.without_timestamp().to_json(),
        b.without_timestamp().to_json()
    );
    assert_eq!(a.kind, CertificateKind::Root);
    assert_eq!(a.tool_version, env!("CARGO_PKG_VERSION"));

    let out: RootOutputs = a.outputs_as().unwrap();
    assert_eq!(out.truncated, "1.8392867552141611325518525");
    // Endpoints are exact; Ψ_3 changes sign between them.
    let lo = parse_exact_decimal(&out.lo).unwrap();
    let hi = parse_exact_decimal(&out.hi).unwrap();
    let psi = |x: &Rational| {
        let x2 = Rational::from(x * x);
        Rational::from(&x2 * x) - x2 - x - 1u32
    };
    assert!(psi(&lo) < 0 && psi(&hi) > 0);

    let back = Certificate::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
}

#[test]
fn search_certificate_keeps_big_values_as_strings() {
    let recs = search(10, 10, |_| 20).unwrap();
    let cert = search_certificate(10, 10, 20, &recs);
    assert_eq!(cert.kind, CertificateKind::Sweep);
    assert_eq!(cert.outputs["count"], 1);
    assert_eq!(cert.outputs["records"][0]["value"], "24500");
    assert_eq!(Certificate::from_json(&cert.to_json()).unwrap(), cert);
}

#[test]
fn start_bounds() {
    let cert = start_bounds_certificate().unwrap();
    let v = |key: &str| cert.outputs[key].as_str().unwrap().parse::<f64>().unwrap();
    assert!((v("n_bound_at_k_1000") / 4.62e50 - 1.0).abs() < 0.01);
    assert!((v("k_bound") / 1.64e20 - 1.0).abs() < 0.01);
    assert!(v("n_bound_at_k_bound") < 4.6e173);
    let (k, n) = large_k_start().unwrap();
    assert_eq!(k.to_f64(), v("k_bound"));
    // Both sit just under the reference values 1.64e20 and 4.6e173.
    assert!(k.to_f64() < 1.64e20 && n.to_f64() > 4.2e173 && n.to_f64() < 4.6e173);
}

#[test]
fn suites_pass_on_small_ranges() {
    let policy = PrecisionPolicy::default();
    let r = identity_suite(12, 60).unwrap();
    assert!(r.passed(), "{r:?}");
    // n from 2 to max(60, 2k + 2) for each k.
    assert_eq!(r.checked, 11 * 59);
    assert!(binet_suite(2, 6, 80, &policy).unwrap().passed());
    assert_eq!(binet_suite(2, 6, 80, &policy).unwrap().checked, 5 * 80);
    assert!(root_suite(40, &policy).unwrap().passed());
    let a = analytic_suite(24, &policy).unwrap();
    assert!(a.passed(), "{a:?}");
    assert!(t11_suite(2, 4, 40, &FactorBudget::default())
        .unwrap()
        .passed());
    assert!(t11_suite(1, 4, 40, &FactorBudget::default()).is_err());
}

#[test]
fn workers_pool() {
    let n = with_workers(Some(2), rayon::current_num_threads).unwrap();
    assert_eq!(n, 2);
    assert_eq!(with_workers(None, || 7).unwrap(), 7);
}
