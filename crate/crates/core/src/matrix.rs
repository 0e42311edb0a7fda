//! Small dense integer matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-major integer matrix. Acts on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntMatrix {
    #[serde(with = "crate::intser::rows")]
    rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: rows[i].len(),
                });
            }
        }
        if n == 0 || m == 0 {
            return Err(Error::Usage("empty matrix".into()));
        }
        Ok(IntMatrix { rows })
    }

    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        Self::new(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("well-formed literal matrix")
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        IntMatrix {
            rows: vec![vec![BigInt::zero(); m]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out.rows[i][i] = BigInt::one();
        }
        out
    }

    pub fn diagonal(entries: &[BigInt]) -> Self {
        let mut out = Self::zeros(entries.len(), entries.len());
        for (i, d) in entries.iter().enumerate() {
            out.rows[i][i] = d.clone();
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<BigInt>> {
        self.rows
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let (n, m) = (self.nrows(), self.ncols());
        let mut out = Self::zeros(m, n);
        for i in 0..n {
            for j in 0..m {
                out.rows[j][i] = self.rows[i][j].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.ncols() != other.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                found: other.nrows(),
            });
        }
        let mut out = Self::zeros(self.nrows(), other.ncols());
        for i in 0..self.nrows() {
            for k in 0..self.ncols() {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.ncols() {
                    out.rows[i][j] += a * &other.rows[k][j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if self.ncols() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                found: v.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|x| x * k).collect())
                .collect(),
        }
    }

    pub fn neg(&self) -> IntMatrix {
        self.scale(&BigInt::from(-1))
    }

    /// `self^k` by repeated squaring; square matrices only.
    pub fn pow(&self, mut k: u64) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.nrows(),
                row: 0,
                cols: self.ncols(),
            });
        }
        let mut base = self.clone();
        let mut acc = Self::identity(self.nrows());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && self.rows.iter().enumerate().all(|(i, r)| {
                r.iter()
                    .enumerate()
                    .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
            })
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.nrows(),
                row: 0,
                cols: self.ncols(),
            });
        }
        let n = self.nrows();
        let mut a = self.rows.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        Ok(sign * &a[n - 1][n - 1])
    }

    /// Adjugate matrix, so that `self * adj = det * I`.
    pub fn adjugate(&self) -> Result<IntMatrix> {
        let n = self.nrows();
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: n,
                row: 0,
                cols: self.ncols(),
            });
        }
        if n == 1 {
            return Ok(Self::identity(1));
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let minor: Vec<Vec<BigInt>> = self
                    .rows
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| r != j)
                    .map(|(_, row)| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != i)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let d = IntMatrix { rows: minor }.determinant()?;
                out.rows[i][j] = if (i + j).is_even() { d } else { -d };
            }
        }
        Ok(out)
    }

    /// Exact inverse of a unimodular matrix.
    pub fn unimodular_inverse(&self) -> Result<IntMatrix> {
        let det = self.determinant()?;
        if !det.abs().is_one() {
            return Err(Error::Usage(format!(
                "matrix is not unimodular (determinant {det})"
            )));
        }
        Ok(self.adjugate()?.scale(&det))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in r.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Floor of the square root of a nonnegative integer.
pub(crate) fn isqrt(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_negative());
    n.sqrt()
}

/// `Some(r)` with `r * r == n` when `n` is a perfect square.
pub(crate) fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g >= 0`.
pub(crate) fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_small_cases() {
        let g = IntMatrix::from_i64(&[[4, 20], [20, 4]]);
        assert_eq!(g.determinant().unwrap(), BigInt::from(-384));
        let z = IntMatrix::from_i64(&[[0, 1, 2], [0, 3, 4], [0, 5, 6]]);
        assert!(z.determinant().unwrap().is_zero());
        let p = IntMatrix::from_i64(&[[0, 1, 0], [1, 0, 0], [0, 0, 1]]);
        assert_eq!(p.determinant().unwrap(), BigInt::from(-1));
        let m = IntMatrix::from_i64(&[[2, -1, 0, 3], [1, 4, 2, 0], [0, 5, -3, 1], [7, 0, 1, 2]]);
        // value cross-checked with an external CAS
        assert_eq!(m.determinant().unwrap(), BigInt::from(358));
    }

    #[test]
    fn adjugate_and_inverse() {
        let m = IntMatrix::from_i64(&[[10, 1], [-1, 0]]);
        let inv = m.unimodular_inverse().unwrap();
        assert_eq!(inv, IntMatrix::from_i64(&[[0, -1], [1, 10]]));
        assert!(m.mul(&inv).unwrap().is_identity());
        let bad = IntMatrix::from_i64(&[[2, 0], [0, 1]]);
        assert!(bad.unimodular_inverse().is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let m = IntMatrix::from_i64(&[[10, 1], [-1, 0]]);
        let mut acc = IntMatrix::identity(2);
        for k in 0..8 {
            assert_eq!(m.pow(k).unwrap(), acc);
            acc = acc.mul(&m).unwrap();
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![BigInt::from(1)], vec![BigInt::from(1), BigInt::from(2)]];
        assert!(IntMatrix::new(rows).is_err());
    }
}
