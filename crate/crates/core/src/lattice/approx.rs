//! Approximation lattices for small linear forms in logarithms, and exact
//! detection of multiplicative relations among the generators.

use std::fmt;

use rug::float::Round;
use rug::ops::{AddAssignRound, MulAssignRound};
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use super::{LatticeBasis, LatticeError, ReducedBasis};
use crate::analytic::{DerivedConstants, RealInterval};

/// `I_(dim-1) ⊕ ⌊C η⌋`: identity in the
/// first `dim - 1` rows, floors in the last row. Returns the floors too.
pub fn build_lattice(
    etas: &[RealInterval],
    c: &Integer,
) -> Result<(LatticeBasis, Vec<Integer>), LatticeError> {
    let dim = etas.len();
    if dim < 2 {
        return Err(LatticeError::Shape("need at least two logarithms".into()));
    }
    let mut floors = Vec::with_capacity(dim);
    for (i, eta) in etas.iter().enumerate() {
        let scaled = eta.scale(c);
        match scaled.common_floor() {
            Some(f) => floors.push(f),
            None => return Err(LatticeError::AmbiguousFloor { index: i }),
        }
    }
    let columns: Vec<Vec<Integer>> = (0..dim)
        .map(|j| {
            let mut col: Vec<Integer> = (0..dim - 1)
                .map(|i| Integer::from((i == j) as u32))
                .collect();
            col.push(floors[j].clone());
            col
        })
        .collect();
    let basis = LatticeBasis::from_columns(columns)?;
    Ok((basis, floors))
}

/// Positive real algebraic numbers whose logarithms enter the forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Generator {
    Prime(u32),
    TwoAlphaMinusOne,
    Alpha,
    FAlpha,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Prime(p) => write!(f, "log {p}"),
            Generator::TwoAlphaMinusOne => write!(f, "log(2α-1)"),
            Generator::Alpha => write!(f, "log α"),
            Generator::FAlpha => write!(f, "log f_k(α)"),
        }
    }
}

impl Generator {
    /// Enclosure of the logarithm.
    pub fn log(
        &self,
        consts: Option<&DerivedConstants>,
        prec: u32,
    ) -> Result<RealInterval, LatticeError> {
        let need = || {
            consts
                .ok_or_else(|| LatticeError::Parameter(format!("{self} needs the constants of α")))
        };
        Ok(match self {
            Generator::Prime(p) => RealInterval::ln_u(*p, prec),
            Generator::TwoAlphaMinusOne => need()?.log_two_alpha_minus_one.clone(),
            Generator::Alpha => need()?.log_alpha.clone(),
            Generator::FAlpha => need()?.log_f_alpha.clone(),
        })
    }

    /// Numerator and denominator as integer polynomials in α (ascending
    /// coefficients).
    fn as_fraction(&self, k: usize) -> (Vec<Integer>, Vec<Integer>) {
        let c = |v: &[i64]| v.iter().map(|&x| Integer::from(x)).collect::<Vec<_>>();
        match self {
            Generator::Prime(p) => (c(&[*p as i64]), c(&[1])),
            Generator::TwoAlphaMinusOne => (c(&[-1, 2]), c(&[1])),
            Generator::Alpha => (c(&[0, 1]), c(&[1])),
            Generator::FAlpha => (c(&[-1, 1]), c(&[-2 * k as i64, k as i64 + 1])),
        }
    }
}

/// Integer polynomials reduced modulo `Ψ_k`, i.e. elements of `Z[α]`.
struct ModPsi {
    k: usize,
}

impl ModPsi {
    fn reduce(&self, mut p: Vec<Integer>) -> Vec<Integer> {
        let k = self.k;
        // x^k = x^(k-1) + … + 1
        while p.len() > k {
            let top = p.pop().unwrap();
            if top != 0 {
                let d = p.len();
                for c in &mut p[d - k..] {
                    *c += &top;
                }
            }
        }
        p.resize(k, Integer::new());
        p
    }

    fn mul(&self, a: &[Integer], b: &[Integer]) -> Vec<Integer> {
        let mut out = vec![Integer::new(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if *y != 0 {
                    out[i + j] += Integer::from(x * y);
                }
            }
        }
        self.reduce(out)
    }

    fn pow(&self, base: &[Integer], mut e: u64) -> Vec<Integer> {
        let mut acc = self.reduce(vec![Integer::from(1)]);
        let mut b = self.reduce(base.to_vec());
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }
}

/// Exact test of `Π γ_i^(r_i) = 1` in `Q(α)`. `Ψ_k` is irreducible, so equality
/// of the reduced representatives in `Z[α]` decides it.
pub fn is_multiplicative_relation(k: usize, gens: &[Generator], r: &[i64]) -> bool {
    let ring = ModPsi { k };
    let mut lhs = ring.reduce(vec![Integer::from(1)]);
    let mut rhs = lhs.clone();
    for (g, &e) in gens.iter().zip(r) {
        if e == 0 {
            continue;
        }
        let (num, den) = g.as_fraction(k);
        let m = e.unsigned_abs();
        let (a, b) = if e > 0 { (num, den) } else { (den, num) };
        lhs = ring.mul(&lhs, &ring.pow(&a, m));
        rhs = ring.mul(&rhs, &ring.pow(&b, m));
    }
    lhs == rhs
}

/// One exact relation removed from a form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminatedRelation {
    pub generators: Vec<Generator>,
    pub exponents: Vec<i64>,
    pub removed: Generator,
}

/// A linear form `τ = Σ x_i log γ_i` whose coefficients are integer
/// combinations of the original coefficients, after eliminating exact
/// relations. The current form equals `scale · τ_original`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub k: Option<usize>,
    pub generators: Vec<Generator>,
    /// Row `i` expresses current coefficient `i` in the original ones.
    pub combination: Vec<Vec<Integer>>,
    pub scale: Integer,
    pub original_bounds: Vec<Float>,
    pub eliminated: Vec<EliminatedRelation>,
}

/// Largest entry size accepted when scanning reduced bases for relations.
pub const RELATION_ENTRY_CAP: i64 = 64;

impl LinearForm {
    pub fn new(k: Option<usize>, generators: Vec<Generator>, bounds: Vec<Float>) -> Self {
        let n = generators.len();
        assert_eq!(n, bounds.len());
        Self {
            k,
            generators,
            combination: (0..n)
                .map(|i| (0..n).map(|j| Integer::from((i == j) as u32)).collect())
                .collect(),
            scale: Integer::from(1),
            original_bounds: bounds,
            eliminated: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// `X'_i = Σ_c |M_ic| X_c`, rounded up.
    pub fn bounds(&self) -> Vec<Float> {
        let prec = self
            .original_bounds
            .iter()
            .map(Float::prec)
            .max()
            .unwrap_or(64);
        self.combination
            .iter()
            .map(|row| {
                let mut x = Float::new(prec);
                for (m, xc) in row.iter().zip(&self.original_bounds) {
                    if *m != 0 {
                        let mut t =
                            Float::with_val_round(prec, &Integer::from(m.abs_ref()), Round::Up).0;
                        t.mul_assign_round(xc, Round::Up);
                        x.add_assign_round(&t, Round::Up);
                    }
                }
                x
            })
            .collect()
    }

    pub fn etas(
        &self,
        consts: Option<&DerivedConstants>,
        prec: u32,
    ) -> Result<Vec<RealInterval>, LatticeError> {
        self.generators
            .iter()
            .map(|g| g.log(consts, prec))
            .collect()
    }

    /// Remove one generator using `Σ r_i log γ_i = 0`: multiply the form by
    /// `r_j` and substitute. The generator with the smallest nonzero `|r_j|`
    /// goes, highest index on ties.
    pub fn eliminate(&mut self, r: &[i64]) -> Generator {
        let j = (0..r.len())
            .filter(|&i| r[i] != 0)
            .min_by_key(|&i| (r[i].unsigned_abs(), std::cmp::Reverse(i)))
            .expect("relation is nonzero");
        let rj = r[j];
        let removed = self.generators[j];
        self.eliminated.push(EliminatedRelation {
            generators: self.generators.clone(),
            exponents: r.to_vec(),
            removed,
        });
        let row_j = self.combination[j].clone();
        let mut next = Vec::with_capacity(self.dim() - 1);
        for (i, row) in self.combination.iter().enumerate() {
            if i == j {
                continue;
            }
            next.push(
                row.iter()
                    .zip(&row_j)
                    .map(|(a, b)| Integer::from(a * rj) - Integer::from(b * r[i]))
                    .collect(),
            );
        }
        self.combination = next;
        self.generators.remove(j);
        self.scale *= rj;
        removed
    }

    /// Certified relations among the current generators found as columns of
    /// the LLL transform.
    ///
    /// A column `u` is a candidate when its entries are small and the last
    /// lattice coordinate `Σ u_i ⌊C η_i⌋` is no larger than `Σ |u_i|`, which
    /// an exact relation forces. Candidates are then decided exactly.
    pub fn find_relations(&self, reduced: &ReducedBasis) -> Vec<Vec<i64>> {
        // Forms over the primes alone live in Q; any modulus will do.
        let k = self.k.unwrap_or(2);
        let dim = self.dim();
        let mut found = Vec::new();
        for (col, u) in reduced.basis.columns().iter().zip(&reduced.transform) {
            let small = u.iter().all(|x| {
                x.cmp_abs(&Integer::from(RELATION_ENTRY_CAP)) != std::cmp::Ordering::Greater
            });
            if !small || u.iter().all(|x| *x == 0) {
                continue;
            }
            let r: Vec<i64> = u.iter().map(|x| x.to_i64().unwrap()).collect();
            let l1: i64 = r.iter().map(|x| x.abs()).sum();
            if col[dim - 1].cmp_abs(&Integer::from(l1)) == std::cmp::Ordering::Greater {
                continue;
            }
            if is_multiplicative_relation(k, &self.generators, &r) {
                log::debug!("exact relation {r:?} among {:?}", self.generators);
                found.push(r);
            }
        }
        found
    }
}
