use klucas::analytic::RealInterval;
use klucas::lattice::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

mod common;
use common::{check_lll_case, closest_exact};

fn q34() -> Rational {
    Rational::from((3, 4))
}

fn to_cols(cols: &[Vec<i64>]) -> LatticeBasis {
    LatticeBasis::from_i64_columns(cols).unwrap()
}

#[test]
fn random_lattices_against_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut swaps = 0;
    for case in 0..200 {
        swaps += check_lll_case(&mut rng).unwrap_or_else(|e| panic!("case {case}: {e}"));
    }
    assert!(swaps > 100, "the sample should exercise swaps, got {swaps}");
}

fn norm_sq(v: &[i64]) -> Rational {
    Rational::from(v.iter().map(|&x| x as i128 * x as i128).sum::<i128>())
}

#[test]
fn small_dim3_lll_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let cols: Vec<Vec<i64>> = (0..3)
            .map(|_| (0..3).map(|_| rng.gen_range(-50..=50)).collect())
            .collect();
        let Ok(b) = LatticeBasis::from_i64_columns(&cols) else {
            continue;
        };
        let r = lll_reduce(&b, &q34()).unwrap();
        let radius = cols.iter().map(|c| norm_sq(c)).min().unwrap();
        let lambda1 = closest_exact(
            &cols,
            &[Rational::new(), Rational::new(), Rational::new()],
            &radius,
            true,
        );
        assert!(Rational::from(r.first_norm_sq()) <= lambda1 << 2u32);
    }
}

proptest! {
    #[test]
    fn gram_schmidt_reconstructs(entries in proptest::collection::vec(-50i64..=50, 9)) {
        let cols: Vec<Vec<i64>> = entries.chunks(3).map(<[i64]>::to_vec).collect();
        prop_assume!(LatticeBasis::from_i64_columns(&cols).is_ok());
        let b = to_cols(&cols);
        let gs = gram_schmidt(&b).unwrap();
        let back = gs.reconstruct();
        for (col, rec) in cols.iter().zip(&back) {
            for (x, r) in col.iter().zip(rec) {
                prop_assert_eq!(Rational::from(*x), r.clone());
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let ip: Rational = gs.b_star[i].iter().zip(&gs.b_star[j]).map(|(a, b)| Rational::from(a * b)).sum();
                prop_assert_eq!(ip, 0);
            }
        }
    }

    #[test]
    fn lll_parameter_range(num in 1i64..100) {
        let y = Rational::from((num, 100));
        let b = to_cols(&[vec![7, 3], vec![2, 9]]);
        let r = lll_reduce(&b, &y);
        if y > Rational::from((1, 4)) {
            let r = r.unwrap();
            prop_assert!(is_reduced(&r.gs, &y));
        } else {
            prop_assert!(r.is_err());
        }
    }
}

/// A planted small form: `x_d η_d + Σ x_i log p_i = 2^-m` with `η_d` chosen to
/// make it so. The lemma must return a bound no smaller than `m`.
#[test]
fn planted_forms_are_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let primes = [2u32, 3, 5, 7];
    let prec = 3000;
    for case in 0..24 {
        let dim = rng.gen_range(3..=4);
        let xmax: i64 = 10i64.pow(rng.gen_range(2..=6));
        let mut x: Vec<i64> = (0..dim)
            .map(|_| rng.gen_range(1..=xmax) * if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        x[dim - 1] = x[dim - 1].abs();
        let m: u32 = rng.gen_range(40..400);

        let mut sum = RealInterval::from_integer(&Integer::new(), prec);
        let mut etas = Vec::new();
        for i in 0..dim - 1 {
            let e = RealInterval::ln_u(primes[i], prec);
            sum = sum.add(&e.scale(&Integer::from(x[i])));
            etas.push(e);
        }
        let rho = RealInterval::from_rational(&Rational::from((1, Integer::from(1) << m)), prec);
        let last = rho
            .sub(&sum)
            .div(&RealInterval::from_integer(
                &Integer::from(x[dim - 1]),
                prec,
            ))
            .unwrap();
        etas.push(last);

        let bounds: Vec<Float> = (0..dim).map(|_| Float::with_val(64, xmax)).collect();
        let c3 = Float::with_val(64, 1);
        let c4 = Float::with_val_round(64, Constant::Log2, Round::Down).0;
        let digits = (dim as f64 * (xmax as f64).log10()).ceil() as u32 + 2;
        // C must also be large enough that the planted vector is not short.
        let mut c = Integer::from(Integer::u_pow_u(10, digits)) + (Integer::from(xmax * 100) << m);
        let mut done = false;
        for _ in 0..12 {
            let (basis, _) = build_lattice(&etas, &c).unwrap();
            let r = lll_reduce(&basis, &q34()).unwrap();
            let c1 = c1_lower_bound(&r, &vec![Rational::new(); dim]).unwrap();
            if let Some(h) = deweger_bound(&c1.c1_sq, &bounds, &c3, &c4, &c)
                .unwrap()
                .bound()
            {
                assert!(*h >= m, "case {case}: bound {h} below planted {m}");
                done = true;
                break;
            }
            c *= 1000;
        }
        assert!(done, "case {case}: hypothesis never held");
    }
}

#[test]
fn ambiguous_floor_needs_more_precision() {
    // Coarse enclosures of log 2 cannot fix the floor of 10^60 log 2.
    let eta = RealInterval::ln_u(2, 80);
    let other = RealInterval::ln_u(3, 400);
    let c = Integer::from(Integer::u_pow_u(10, 60));
    assert!(matches!(
        build_lattice(&[eta, other.clone()], &c),
        Err(LatticeError::AmbiguousFloor { index: 0 })
    ));
    let fine = RealInterval::ln_u(2, 400);
    let (_, floors) = build_lattice(&[fine, other], &c).unwrap();
    let direct = Float::with_val(600, Constant::Log2) * &c;
    assert_eq!(floors[0], direct.floor().to_integer().unwrap());
}
