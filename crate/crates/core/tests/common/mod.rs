//! Oracles shared by the lattice, bounds and acceptance tests.
#![allow(dead_code)]

use klucas::bounds::guz_bound;
use klucas::lattice::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};

/// Fincke–Pohst enumeration over `Bz` near `target`, with floating-point
/// pruning and exact rational distances. Returns the least exact `||Bz - y||²`
/// over all `z` (excluding `z = 0` when `skip_zero`).
pub fn closest_exact(
    cols: &[Vec<i64>],
    y: &[Rational],
    radius_sq: &Rational,
    skip_zero: bool,
) -> Rational {
    let n = cols.len();
    let bf: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| c.iter().map(|&x| x as f64).collect())
        .collect();
    let mut bstar: Vec<Vec<f64>> = Vec::new();
    let mut bn = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = bf[i].clone();
        for j in 0..i {
            let m = bf[i].iter().zip(&bstar[j]).map(|(a, b)| a * b).sum::<f64>() / bn[j];
            mu[i][j] = m;
            for (vc, bc) in v.iter_mut().zip(&bstar[j]) {
                *vc -= m * bc;
            }
        }
        bn[i] = v.iter().map(|x| x * x).sum();
        bstar.push(v);
    }
    // Coordinates of y in the basis, through the Gram–Schmidt frame.
    let yf: Vec<f64> = y.iter().map(Rational::to_f64).collect();
    let mut c = vec![0.0; n];
    for j in (0..n).rev() {
        let mut s = yf.iter().zip(&bstar[j]).map(|(a, b)| a * b).sum::<f64>() / bn[j];
        for i in j + 1..n {
            s -= mu[i][j] * c[i];
        }
        c[j] = s;
    }
    let r = radius_sq.to_f64() * (1.0 + 1e-6) + 1e-6;
    let mut best: Option<Rational> = None;
    let mut z = vec![0i64; n];
    fn rec(
        j: usize,
        partial: f64,
        r: f64,
        z: &mut Vec<i64>,
        ctx: &(Vec<f64>, Vec<Vec<f64>>, Vec<f64>),
        visit: &mut dyn FnMut(&[i64]),
    ) {
        let (c, mu, bn) = ctx;
        let n = z.len();
        let mut center = c[j];
        for i in j + 1..n {
            center -= mu[i][j] * (z[i] as f64 - c[i]);
        }
        let w = ((r - partial) / bn[j]).max(0.0).sqrt();
        let lo = (center - w).ceil() as i64;
        let hi = (center + w).floor() as i64;
        for v in lo..=hi {
            z[j] = v;
            let d = v as f64 - center;
            let p = partial + d * d * bn[j];
            if p > r {
                continue;
            }
            if j == 0 {
                visit(z);
            } else {
                rec(j - 1, p, r, z, ctx, visit);
            }
        }
    }
    let ctx = (c, mu, bn);
    let mut visit = |z: &[i64]| {
        if skip_zero && z.iter().all(|&x| x == 0) {
            return;
        }
        let mut d = Rational::new();
        for row in 0..n {
            let mut v = -y[row].clone();
            for (j, zj) in z.iter().enumerate() {
                v += Rational::from(cols[j][row] * zj);
            }
            d += Rational::from(v.square_ref());
        }
        if best.as_ref().map_or(true, |b| d < *b) {
            best = Some(d);
        }
    };
    rec(n - 1, 0.0, r, &mut z, &ctx, &mut visit);
    best.expect("radius covers at least one point")
}

pub fn random_basis(rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let dim = rng.gen_range(2..=4);
    loop {
        let cols: Vec<Vec<i64>> = if rng.gen_bool(0.5) {
            (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1000..=1000)).collect())
                .collect()
        } else {
            // A small basis mixed by unimodular column operations, kept within 10³.
            let mut cols: Vec<Vec<i64>> = (0..dim)
                .map(|_| (0..dim).map(|_| rng.gen_range(-20..=20)).collect())
                .collect();
            for _ in 0..60 {
                let (a, b) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
                let m = rng.gen_range(-3..=3);
                if a == b || m == 0 {
                    continue;
                }
                let next: Vec<i64> = cols[a]
                    .iter()
                    .zip(&cols[b])
                    .map(|(x, y)| x + m * y)
                    .collect();
                if next.iter().all(|x| x.abs() <= 1000) {
                    cols[a] = next;
                }
            }
            cols
        };
        if LatticeBasis::from_i64_columns(&cols).is_ok() {
            return cols;
        }
    }
}

/// Reduce one random basis and compare with enumeration: both reduction
/// conditions, the unimodular transform, the LLL factor, and c₁ against the
/// exact minimum and the exact distance to an off-lattice target.
/// Returns the number of swaps.
pub fn check_lll_case(rng: &mut ChaCha8Rng) -> Result<u64, String> {
    let q34 = Rational::from((3, 4));
    let cols = random_basis(rng);
    let dim = cols.len();
    let b = LatticeBasis::from_i64_columns(&cols).map_err(|e| e.to_string())?;
    let r = lll_reduce(&b, &q34).map_err(|e| e.to_string())?;
    let fail = |what: &str| Err(format!("{what} for basis {cols:?}"));

    if !is_reduced(&r.gs, &q34) {
        return fail("not reduced");
    }
    if apply_transform(&b, &r.transform) != r.basis.columns().to_vec() {
        return fail("transform does not map the input to the output");
    }
    if determinant(&transform_rows(&r.transform)).abs() != 1 {
        return fail("transform not unimodular");
    }
    if r.basis.determinant().abs() != b.determinant().abs() {
        return fail("determinant changed");
    }

    // Shortest vector by enumeration. Any lattice vector bounds the radius;
    // b1 is one, by the transform check above.
    let zero = vec![Rational::new(); dim];
    let first = Rational::from(r.first_norm_sq());
    let lambda1 = closest_exact(&cols, &zero, &first, true);
    if first > lambda1.clone() << (dim as u32 - 1) {
        return fail("LLL factor exceeded");
    }
    let c1 = c1_lower_bound(&r, &zero).map_err(|e| e.to_string())?;
    if c1.case != SigmaCase::InLattice || c1.c1_sq > lambda1 {
        return fail("c1² above λ1²");
    }

    // A target off the lattice.
    let y: Vec<Rational> = (0..dim)
        .map(|_| Rational::from((rng.gen_range(-1000..=1000), 7)))
        .collect();
    let babai = babai_distance(&r, &y);
    let dist = closest_exact(&cols, &y, &babai, false);
    let c1 = c1_lower_bound(&r, &y).map_err(|e| e.to_string())?;
    match c1.case {
        SigmaCase::OutOfLattice if c1.c1_sq > dist => fail("c1² above l(L, y)²"),
        SigmaCase::InLattice if dist != 0 => fail("target misclassified as a lattice point"),
        _ => Ok(r.swaps),
    }
}

/// Every integer `x ≥ 2` with `x / (log x)^m < T` lies below the bound.
///
/// Integers up to `min(10·bound, 10^8)` are scanned one by one. Beyond
/// `e^m` the map `x ↦ x/(log x)^m` is increasing, so the tail past the scan
/// is covered once the scan itself has passed the bound.
pub fn guz_exhaustive(m: u32, t: f64) -> Result<(), String> {
    let bound = guz_bound(m, &Float::with_val(128, t))
        .map_err(|e| e.to_string())?
        .to_f64();
    let limit = (10.0 * bound).min(1e8) as u64;
    if bound <= (m as f64).exp() {
        return Err(format!("m={m} T={t}: bound {bound} below e^m"));
    }
    let g = |x: f64| x / x.ln().powi(m as i32);
    if (limit as f64) < bound && g(bound.ceil()) < t {
        return Err(format!("m={m} T={t}: tail not covered"));
    }
    let largest = (2..=limit).rev().find(|&x| g(x as f64) < t).unwrap_or(0);
    if largest as f64 >= bound {
        return Err(format!("m={m} T={t}: x={largest} >= {bound}"));
    }
    Ok(())
}

pub fn transform_rows(u: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = u.len();
    (0..n)
        .map(|i| (0..n).map(|j| u[j][i].clone()).collect())
        .collect()
}

/// Exact squared distance from `y` to the lattice point given by rounding the
/// coordinates of `y` in the reduced basis.
pub fn babai_distance(r: &ReducedBasis, y: &[Rational]) -> Rational {
    let z = solve(&r.basis, y).unwrap();
    let n = y.len();
    let mut d = Rational::new();
    for row in 0..n {
        let mut v = -y[row].clone();
        for (j, zj) in z.iter().enumerate() {
            let rounded = zj.clone().round();
            v += Rational::from(&r.basis.column(j)[row] * rounded.numer());
        }
        d += Rational::from(v.square_ref());
    }
    d
}
