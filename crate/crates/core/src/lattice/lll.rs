use rug::{Assign, Integer, Rational};

use super::basis::{
    determinant, dot, gram_schmidt, mat_mul_cols, transpose, GramSchmidtData, LatticeBasis,
};
use super::LatticeError;

/// LLL-reduced basis with its exact Gram–Schmidt data and the unimodular
/// transform `U` such that `reduced = input · U`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    pub basis: LatticeBasis,
    pub gs: GramSchmidtData,
    /// Columns of `U`.
    pub transform: Vec<Vec<Integer>>,
    pub y_param: Rational,
    pub swaps: u64,
}

impl ReducedBasis {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `||b_1||²`.
    pub fn first_norm_sq(&self) -> Integer {
        dot(self.basis.column(0), self.basis.column(0))
    }
}

/// Size reduction and the Lovász condition, checked in exact arithmetic.
pub fn is_reduced(gs: &GramSchmidtData, y: &Rational) -> bool {
    let n = gs.norms_sq.len();
    let half = Rational::from((1, 2));
    for i in 1..n {
        for j in 0..i {
            if Rational::from(gs.mu[i][j].abs_ref()) > half {
                return false;
            }
        }
        // ||b*_i + μ b*_{i-1}||² = B_i + μ² B_{i-1}, by orthogonality.
        let mu = &gs.mu[i][i - 1];
        let lhs =
            Rational::from(&gs.norms_sq[i]) + Rational::from(mu.square_ref()) * &gs.norms_sq[i - 1];
        if lhs < Rational::from(y * &gs.norms_sq[i - 1]) {
            return false;
        }
    }
    true
}

/// Integral LLL after Cohen (Algorithm 2.6.7), with all Gram–Schmidt data
/// kept as the integers `d_i` and `λ_{i,j} = d_j μ_{i,j}`.
///
/// Every output is re-checked from scratch: exact Gram–Schmidt on the
/// reduced basis, both reduction conditions, `input · U = reduced`, and
/// `det U = ±1`.
pub fn lll_reduce(basis: &LatticeBasis, y_param: &Rational) -> Result<ReducedBasis, LatticeError> {
    let quarter = Rational::from((1, 4));
    if *y_param <= quarter || *y_param >= 1 {
        return Err(LatticeError::Parameter(format!(
            "LLL parameter {y_param} outside (1/4, 1)"
        )));
    }
    let n = basis.dim();
    let (p, q) = (y_param.numer().clone(), y_param.denom().clone());

    // 1-based working arrays, as in the reference.
    let mut b: Vec<Vec<Integer>> = std::iter::once(Vec::new())
        .chain(basis.columns().iter().cloned())
        .collect();
    let mut h: Vec<Vec<Integer>> = std::iter::once(Vec::new())
        .chain((0..n).map(|j| (0..n).map(|i| Integer::from((i == j) as u32)).collect()))
        .collect();
    let mut d: Vec<Integer> = vec![Integer::new(); n + 1];
    let mut lam: Vec<Vec<Integer>> = vec![vec![Integer::new(); n + 1]; n + 1];
    d[0] = Integer::from(1);
    d[1] = dot(&b[1], &b[1]);
    if d[1] == 0 {
        return Err(LatticeError::Rank);
    }
    let mut swaps = 0u64;
    let mut k = 2usize;
    let mut kmax = 1usize;
    let mut tmp = Integer::new();

    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u *= &d[i];
                    tmp.assign(&lam[k][i] * &lam[j][i]);
                    u -= &tmp;
                    u.div_exact_mut(&d[i - 1]);
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u == 0 {
                        return Err(LatticeError::Rank);
                    }
                    d[k] = u;
                }
            }
        }
        reduce(k, k - 1, &mut b, &mut h, &d, &mut lam);
        // Lovász: q (d_k d_{k-2} + λ²) >= p d_{k-1}²
        let lhs = {
            let mut t = Integer::from(&d[k] * &d[k - 2]);
            t += Integer::from(lam[k][k - 1].square_ref());
            t * &q
        };
        let rhs = Integer::from(d[k - 1].square_ref()) * &p;
        if lhs < rhs {
            swap(k, kmax, &mut b, &mut h, &mut d, &mut lam);
            swaps += 1;
            if k > 2 {
                k -= 1;
            }
        } else {
            for l in (1..k - 1).rev() {
                reduce(k, l, &mut b, &mut h, &d, &mut lam);
            }
            k += 1;
        }
    }

    let reduced = LatticeBasis::from_columns_unchecked(b.into_iter().skip(1).collect());
    let transform: Vec<Vec<Integer>> = h.into_iter().skip(1).collect();
    let gs = gram_schmidt(&reduced)?;
    if !is_reduced(&gs, y_param) {
        return Err(LatticeError::PostCheck("reduction conditions violated"));
    }
    if basis.mul(&transform) != reduced.columns() {
        return Err(LatticeError::PostCheck(
            "input · U differs from the reduced basis",
        ));
    }
    let det = determinant(&transpose(&transform));
    if det.clone().abs() != 1 {
        return Err(LatticeError::PostCheck("transform is not unimodular"));
    }
    log::trace!("LLL dim {n}: {swaps} swaps");
    Ok(ReducedBasis {
        basis: reduced,
        gs,
        transform,
        y_param: y_param.clone(),
        swaps,
    })
}

/// Size-reduce `b_k` against `b_l`.
fn reduce(
    k: usize,
    l: usize,
    b: &mut [Vec<Integer>],
    h: &mut [Vec<Integer>],
    d: &[Integer],
    lam: &mut [Vec<Integer>],
) {
    let twice = Integer::from(&lam[k][l] << 1);
    if twice.cmp_abs(&d[l]) != std::cmp::Ordering::Greater {
        return;
    }
    // Nearest integer to λ/d, ties toward -∞ via floor((2λ + d) / 2d).
    let num = twice + &d[l];
    let den = Integer::from(&d[l] << 1);
    let qv = num.div_rem_floor(den).0;
    let (lo, hi) = b.split_at_mut(k);
    axpy(&mut hi[0], &qv, &lo[l]);
    let (lo, hi) = h.split_at_mut(k);
    axpy(&mut hi[0], &qv, &lo[l]);
    lam[k][l] -= Integer::from(&qv * &d[l]);
    for i in 1..l {
        let t = Integer::from(&qv * &lam[l][i]);
        lam[k][i] -= t;
    }
}

/// `v -= q w`.
fn axpy(v: &mut [Integer], q: &Integer, w: &[Integer]) {
    for (a, c) in v.iter_mut().zip(w) {
        if *c != 0 {
            *a -= Integer::from(q * c);
        }
    }
}

fn swap(
    k: usize,
    kmax: usize,
    b: &mut [Vec<Integer>],
    h: &mut [Vec<Integer>],
    d: &mut [Integer],
    lam: &mut [Vec<Integer>],
) {
    b.swap(k, k - 1);
    h.swap(k, k - 1);
    for j in 1..k - 1 {
        let t = std::mem::take(&mut lam[k][j]);
        lam[k][j] = std::mem::replace(&mut lam[k - 1][j], t);
    }
    let l = lam[k][k - 1].clone();
    let bb =
        (Integer::from(&d[k - 2] * &d[k]) + Integer::from(l.square_ref())).div_exact(&d[k - 1]);
    for i in k + 1..=kmax {
        let t = lam[i][k].clone();
        let mut nk = Integer::from(&d[k] * &lam[i][k - 1]);
        nk -= Integer::from(&l * &t);
        nk.div_exact_mut(&d[k - 1]);
        let mut nk1 = Integer::from(&bb * &t);
        nk1 += Integer::from(&l * &nk);
        nk1.div_exact_mut(&d[k]);
        lam[i][k] = nk;
        lam[i][k - 1] = nk1;
    }
    d[k - 1] = bb;
}

/// Columns `input · U`, re-exported for callers holding only the transform.
pub fn apply_transform(basis: &LatticeBasis, u: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    mat_mul_cols(basis.columns(), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_quarters() -> Rational {
        Rational::from((3, 4))
    }

    #[test]
    fn identity_unchanged() {
        let cols: Vec<Vec<i64>> = (0..3)
            .map(|i| (0..3).map(|j| (i == j) as i64).collect())
            .collect();
        let b = LatticeBasis::from_i64_columns(&cols).unwrap();
        let r = lll_reduce(&b, &three_quarters()).unwrap();
        assert_eq!(r.basis, b);
        assert_eq!(r.swaps, 0);
    }

    #[test]
    fn short_vector_found() {
        let b = LatticeBasis::from_i64_columns(&[vec![1, 1], vec![0, 2]]).unwrap();
        let r = lll_reduce(&b, &three_quarters()).unwrap();
        assert!(r.first_norm_sq() <= 2);
    }

    #[test]
    fn classic_example() {
        // Standard textbook instance; the reduced basis is (0,1,0), (1,0,1), (-1,0,2).
        let b = LatticeBasis::from_i64_columns(&[vec![1, 1, 1], vec![-1, 0, 2], vec![3, 5, 6]])
            .unwrap();
        let r = lll_reduce(&b, &three_quarters()).unwrap();
        assert_eq!(r.first_norm_sq(), 1);
        assert_eq!(r.basis.determinant().abs(), b.determinant().abs());
    }

    #[test]
    fn rejects_bad_parameter() {
        let b = LatticeBasis::from_i64_columns(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(lll_reduce(&b, &Rational::from((1, 4))).is_err());
        assert!(lll_reduce(&b, &Rational::from(1)).is_err());
    }
}
