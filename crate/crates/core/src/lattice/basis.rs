use rug::{Integer, Rational};

use super::LatticeError;

/// Square integer matrix stored by columns; the columns are the basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    columns: Vec<Vec<Integer>>,
}

impl LatticeBasis {
    /// Columns must be square and linearly independent.
    pub fn from_columns(columns: Vec<Vec<Integer>>) -> Result<Self, LatticeError> {
        let dim = columns.len();
        if dim == 0 || columns.iter().any(|c| c.len() != dim) {
            return Err(LatticeError::Shape(format!(
                "expected a square matrix of dimension {dim}"
            )));
        }
        let b = Self { columns };
        if b.determinant() == 0 {
            return Err(LatticeError::Rank);
        }
        Ok(b)
    }

    /// Row-major convenience constructor.
    pub fn from_rows(rows: &[Vec<Integer>]) -> Result<Self, LatticeError> {
        Self::from_columns(transpose(rows))
    }

    pub fn from_i64_columns(columns: &[Vec<i64>]) -> Result<Self, LatticeError> {
        Self::from_columns(
            columns
                .iter()
                .map(|c| c.iter().map(|&x| Integer::from(x)).collect())
                .collect(),
        )
    }

    pub(crate) fn from_columns_unchecked(columns: Vec<Vec<Integer>>) -> Self {
        Self { columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<Integer>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[Integer] {
        &self.columns[j]
    }

    pub fn into_columns(self) -> Vec<Vec<Integer>> {
        self.columns
    }

    pub fn rows(&self) -> Vec<Vec<Integer>> {
        transpose(&self.columns)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Integer {
        determinant(&self.rows())
    }

    /// `self · u`, for an integer matrix `u` given by columns.
    pub fn mul(&self, u: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
        mat_mul_cols(&self.columns, u)
    }
}

pub(crate) fn transpose(m: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = m.len();
    if n == 0 {
        return Vec::new();
    }
    let w = m[0].len();
    (0..w)
        .map(|j| (0..n).map(|i| m[i][j].clone()).collect())
        .collect()
}

/// Product of two matrices stored by columns.
pub(crate) fn mat_mul_cols(a: &[Vec<Integer>], b: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let rows = a.first().map_or(0, Vec::len);
    b.iter()
        .map(|bc| {
            (0..rows)
                .map(|i| {
                    let mut s = Integer::new();
                    for (j, coef) in bc.iter().enumerate() {
                        if *coef != 0 {
                            s += Integer::from(&a[j][i] * coef);
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Bareiss determinant of a square matrix given by rows.
pub fn determinant(rows: &[Vec<Integer>]) -> Integer {
    let n = rows.len();
    let mut m: Vec<Vec<Integer>> = rows.to_vec();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&i| m[i][k] != 0) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&m[i][j] * &m[k][k]) - Integer::from(&m[i][k] * &m[k][j]);
                m[i][j] = v.div_exact(&prev);
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return Integer::from(1);
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

pub(crate) fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    let mut s = Integer::new();
    for (x, y) in a.iter().zip(b) {
        s += Integer::from(x * y);
    }
    s
}

fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    let mut s = Rational::new();
    for (x, y) in a.iter().zip(b) {
        s += Rational::from(x * y);
    }
    s
}

/// Exact Gram–Schmidt data: `b_i = b*_i + Σ_{j<i} μ_{i,j} b*_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSchmidtData {
    pub b_star: Vec<Vec<Rational>>,
    /// Lower-triangular; `mu[i][j]` for `j < i`, with `mu[i][i] = 1`.
    pub mu: Vec<Vec<Rational>>,
    pub norms_sq: Vec<Rational>,
}

impl GramSchmidtData {
    /// Recombine into the original columns; exact.
    pub fn reconstruct(&self) -> Vec<Vec<Rational>> {
        let n = self.b_star.len();
        (0..n)
            .map(|i| {
                let mut v = self.b_star[i].clone();
                for j in 0..i {
                    for (vc, bc) in v.iter_mut().zip(&self.b_star[j]) {
                        *vc += Rational::from(&self.mu[i][j] * bc);
                    }
                }
                v
            })
            .collect()
    }
}

pub fn gram_schmidt(basis: &LatticeBasis) -> Result<GramSchmidtData, LatticeError> {
    let n = basis.dim();
    let cols: Vec<Vec<Rational>> = basis
        .columns()
        .iter()
        .map(|c| c.iter().map(Rational::from).collect())
        .collect();
    let mut b_star: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut norms_sq: Vec<Rational> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rational::new(); n]; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot_q(&cols[i], &b_star[j]) / &norms_sq[j];
            for (vc, bc) in v.iter_mut().zip(&b_star[j]) {
                *vc -= Rational::from(&m * bc);
            }
            mu[i][j] = m;
        }
        mu[i][i] = Rational::from(1);
        let nrm = dot_q(&v, &v);
        if nrm == 0 {
            return Err(LatticeError::Rank);
        }
        norms_sq.push(nrm);
        b_star.push(v);
    }
    Ok(GramSchmidtData {
        b_star,
        mu,
        norms_sq,
    })
}

/// Solve `B z = y` exactly for the basis matrix `B` (columns) by Gaussian
/// elimination over the rationals.
pub fn solve(basis: &LatticeBasis, y: &[Rational]) -> Result<Vec<Rational>, LatticeError> {
    let n = basis.dim();
    if y.len() != n {
        return Err(LatticeError::Shape(format!(
            "target has length {}, lattice dimension is {n}",
            y.len()
        )));
    }
    let rows = basis.rows();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| {
            let mut row: Vec<Rational> = r.iter().map(Rational::from).collect();
            row.push(yi.clone());
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| m[i][k] != 0).ok_or(LatticeError::Rank)?;
        m.swap(k, p);
        let piv = m[k][k].clone();
        for v in m[k].iter_mut().skip(k) {
            *v /= &piv;
        }
        for i in 0..n {
            if i != k && m[i][k] != 0 {
                let f = m[i][k].clone();
                let (src, dst) = if i < k {
                    let (a, b) = m.split_at_mut(k);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[k], &mut b[0])
                };
                for j in k..=n {
                    dst[j] -= Rational::from(&f * &src[j]);
                }
            }
        }
    }
    Ok(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn two_dim_projection() {
        let b = LatticeBasis::from_i64_columns(&[vec![1, 0], vec![1, 2]]).unwrap();
        let gs = gram_schmidt(&b).unwrap();
        assert_eq!(gs.b_star[1], vec![q(0, 1), q(2, 1)]);
        assert_eq!(gs.mu[1][0], 1);
    }

    #[test]
    fn identity_is_orthonormal() {
        let cols: Vec<Vec<i64>> = (0..4)
            .map(|i| (0..4).map(|j| (i == j) as i64).collect())
            .collect();
        let b = LatticeBasis::from_i64_columns(&cols).unwrap();
        let gs = gram_schmidt(&b).unwrap();
        for i in 0..4 {
            assert_eq!(gs.norms_sq[i], 1);
            for j in 0..i {
                assert_eq!(gs.mu[i][j], 0);
            }
        }
    }

    #[test]
    fn dependent_columns_rejected() {
        assert!(matches!(
            LatticeBasis::from_i64_columns(&[vec![1, 2], vec![2, 4]]),
            Err(LatticeError::Rank)
        ));
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let rows: Vec<Vec<Integer>> = [[2i64, -3, 1], [4, 0, 5], [-1, 7, 3]]
            .iter()
            .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
            .collect();
        // 2(0·3 - 5·7) + 3(4·3 + 5) + 1(28 - 0) = -70 + 51 + 28
        assert_eq!(determinant(&rows), 9);
        let mut swapped = rows.clone();
        swapped.swap(0, 1);
        assert_eq!(determinant(&swapped), -9);
    }

    #[test]
    fn solve_roundtrip() {
        let b =
            LatticeBasis::from_i64_columns(&[vec![2, 1, 0], vec![0, 3, 1], vec![1, 0, 5]]).unwrap();
        let z = vec![q(1, 2), q(-3, 1), q(2, 7)];
        let y: Vec<Rational> = (0..3)
            .map(|i| {
                (0..3).fold(Rational::new(), |acc, j| {
                    acc + Rational::from(&z[j] * &b.column(j)[i])
                })
            })
            .collect();
        assert_eq!(solve(&b, &y).unwrap(), z);
    }
}
