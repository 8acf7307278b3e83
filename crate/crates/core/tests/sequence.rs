use klucas::sequence::*;
use proptest::prelude::*;
use rug::Integer;

/// Terms `L_{2-k} … L_{n}` by summing the previous `k` entries one at a time.
fn naive(k: usize, n: i64) -> Vec<Integer> {
    let mut v: Vec<Integer> = vec![Integer::new(); k - 2];
    v.push(Integer::from(2));
    v.push(Integer::from(1));
    let first = 2 - k as i64;
    while (v.len() as i64) + first <= n {
        let mut s = Integer::new();
        for t in &v[v.len() - k..] {
            s += t;
        }
        v.push(s);
    }
    v
}

fn kp(k: usize) -> KParams {
    KParams::new(k).unwrap()
}

#[test]
fn lucas_numbers() {
    // k = 2 gives the Lucas numbers; L_n is the nearest integer to φ^n.
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    for n in 2..70 {
        let expect = phi.powi(n as i32).round() as u64;
        assert_eq!(term(kp(2), n).unwrap(), expect, "n={n}");
    }
}

#[test]
fn known_small_values() {
    let k3: Vec<Integer> = stream(kp(3), 0, 7).unwrap().map(|(_, v)| v).collect();
    assert_eq!(k3, [2, 1, 3, 6, 10, 19, 35, 64]);
    assert_eq!(term(kp(4), 8).unwrap(), 160);
    assert_eq!(term(kp(3), 12).unwrap(), 1350);
    assert_eq!(term(kp(3), 15).unwrap(), 8400);
}

#[test]
fn identities_up_to_fifty() {
    for k in 2..=50 {
        let r = check_identities(kp(k), 3 * k as i64 + 10);
        assert!(r.passed(), "k={k}: {:?}", r.first_failure);
    }
}

#[test]
fn window_stepping() {
    let mut w = SequenceWindow::new(kp(4));
    w.advance_to(30);
    assert_eq!(w.n_head(), 30);
    let oracle = naive(4, 30);
    for n in 27..=30 {
        assert_eq!(w.get(n).unwrap(), &oracle[(n + 2) as usize]);
    }
    assert!(w.get(26).is_none());
}

proptest! {
    #[test]
    fn term_matches_naive(k in 2usize..25, n in -23i64..300) {
        let first = 2 - k as i64;
        match term(kp(k), n) {
            Ok(v) => {
                prop_assert!(n >= first);
                prop_assert_eq!(&v, &naive(k, n)[(n - first) as usize]);
            }
            Err(SequenceError::IndexOutOfDomain { .. }) => prop_assert!(n < first),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn stream_matches_term(k in 2usize..20, lo in 0i64..100, len in 0i64..50) {
        let got: Vec<(i64, Integer)> = stream(kp(k), lo, lo + len).unwrap().collect();
        prop_assert_eq!(got.len() as i64, len + 1);
        for (n, v) in got {
            prop_assert_eq!(v, term(kp(k), n).unwrap());
        }
    }

    #[test]
    fn bit_length_at_most_n(k in 2usize..40, n in 1i64..2000) {
        prop_assert!(term(kp(k), n).unwrap().significant_bits() as i64 <= n);
    }
}

#[test]
fn errors() {
    assert!(matches!(
        KParams::new(1),
        Err(SequenceError::InvalidOrder(1))
    ));
    assert!(matches!(
        stream(kp(3), 5, 4),
        Err(SequenceError::EmptyRange { lo: 5, hi: 4 })
    ));
    assert!(stream(kp(3), -2, 4).is_err());
}
