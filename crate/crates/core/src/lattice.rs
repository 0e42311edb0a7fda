//! Integer symmetric bilinear forms of rank 1 to 4.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::IntMatrix;
use crate::{Error, Result};

pub const MAX_RANK: usize = 4;

/// Coefficient vector of a class with respect to the lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(#[serde(with = "crate::intser::vec")] pub Vec<BigInt>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); rank])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LatticeVector(self.0.iter().map(|x| x * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    /// `Some(m)` with `self = m * base`, if such an integer exists.
    pub fn multiple_of(&self, base: &LatticeVector) -> Option<BigInt> {
        let (i, b) = base.0.iter().enumerate().find(|(_, b)| !b.is_zero())?;
        let (m, r) = self.0[i].div_rem(b);
        if !r.is_zero() {
            return None;
        }
        (base.scale(&m) == *self).then_some(m)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize) -> Self {
        Signature { positive, negative }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.positive == 1 && self.negative >= 1
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.positive, self.negative)
    }
}

/// A nondegenerate integral symmetric bilinear form on a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GramLattice {
    gram: IntMatrix,
    #[serde(skip)]
    det: BigInt,
}

impl GramLattice {
    pub fn new(gram: IntMatrix) -> Result<Self> {
        let n = gram.nrows();
        if !gram.is_square() {
            return Err(Error::NotSquare {
                rows: n,
                row: 0,
                cols: gram.ncols(),
            });
        }
        if !(1..=MAX_RANK).contains(&n) {
            return Err(Error::UnsupportedRank(n));
        }
        for i in 0..n {
            for j in i + 1..n {
                if gram.get(i, j) != gram.get(j, i) {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let det = gram.determinant()?;
        if det.is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(GramLattice { gram, det })
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                row,
                cols: r.len(),
            });
        }
        Self::new(IntMatrix::new(rows)?)
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(IntMatrix::from_i64(rows))
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        self.gram.get(i, j)
    }

    fn check_dim(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `uᵀ · gram · v`.
    pub fn inner(&self, u: &LatticeVector, v: &LatticeVector) -> Result<BigInt> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        let gv = self.gram.mul_vec(v.coords())?;
        Ok(u.0.iter().zip(&gv).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self, v: &LatticeVector) -> Result<BigInt> {
        self.inner(v, v)
    }

    /// `gram · v`, the functional `inner(·, v)` in coordinates.
    pub fn pair_with(&self, v: &LatticeVector) -> Result<Vec<BigInt>> {
        self.check_dim(v)?;
        self.gram.mul_vec(v.coords())
    }

    pub fn determinant(&self) -> &BigInt {
        &self.det
    }

    /// Counts of positive and negative squares after exact rational
    /// congruence diagonalization.
    pub fn signature(&self) -> Signature {
        let (positive, negative) = diagonal_signs(&self.gram);
        debug_assert_eq!(positive + negative, self.rank());
        Signature { positive, negative }
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.entry(i, i).is_even())
    }

    /// Gram matrix in the basis given by the columns of `basis`: `Bᵀ G B`.
    pub fn change_basis(&self, basis: &IntMatrix) -> Result<GramLattice> {
        GramLattice::new(basis.transpose().mul(&self.gram)?.mul(basis)?)
    }
}

impl fmt::Display for GramLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.gram.fmt(f)
    }
}

pub fn is_primitive(v: &LatticeVector) -> Result<bool> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.content().is_one())
}

/// Signs of the pivots of a congruence diagonalization over Q.
///
/// Zero pivots are repaired by replacing `e_i` with `e_i + e_j` for a pair
/// with nonzero off-diagonal entry; in a block with zero diagonal that yields
/// the nonzero value `2 * a_ij`. A fully zero trailing block is degenerate and
/// contributes neither sign.
fn diagonal_signs(gram: &IntMatrix) -> (usize, usize) {
    let n = gram.nrows();
    let mut a: Vec<Vec<BigRational>> = gram
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        let pivot = (k..n).find(|&i| !a[i][i].is_zero()).or_else(|| {
            let (i, j) = (k..n)
                .flat_map(|i| (k..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())?;
            // row_i += row_j, col_i += col_j
            for c in 0..n {
                let t = a[j][c].clone();
                a[i][c] += t;
            }
            for r in 0..n {
                let t = a[r][j].clone();
                a[r][i] += t;
            }
            Some(i)
        });
        let Some(p) = pivot else { break };
        a.swap(p, k);
        for r in a.iter_mut() {
            r.swap(p, k);
        }
        let d = a[k][k].clone();
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let factor = &a[r][k] / &d;
            for c in k..n {
                let t = &factor * &a[k][c];
                a[r][c] -= t;
            }
            for rr in k..n {
                let t = &factor * &a[rr][k];
                a[rr][r] -= t;
            }
        }
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    (pos, neg)
}
