//! Lattice isometries: validation, cone preservation, order, characteristic
//! data and orbits of a polarization.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::lattice::{GramLattice, LatticeVector};
use crate::matrix::{exact_sqrt, IntMatrix};
use crate::{Error, Result};

/// Every finite-order element of GL₂(Z) has order 1, 2, 3, 4 or 6.
pub const RANK2_ORDER_BOUND: u64 = 12;

/// `MᵀGM = G` exactly.
pub fn is_isometry(g: &GramLattice, m: &IntMatrix) -> Result<bool> {
    if m.nrows() != g.rank() || m.ncols() != g.rank() {
        return Err(Error::DimensionMismatch {
            expected: g.rank(),
            found: if m.nrows() != g.rank() {
                m.nrows()
            } else {
                m.ncols()
            },
        });
    }
    Ok(m.transpose().mul(g.gram())?.mul(m)? == *g.gram())
}

/// An integer matrix known to preserve the Gram matrix of its lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsometryMatrix {
    matrix: IntMatrix,
    lattice: GramLattice,
}

impl IsometryMatrix {
    pub fn new(lattice: &GramLattice, matrix: IntMatrix) -> Result<Self> {
        if !is_isometry(lattice, &matrix)? {
            return Err(Error::Usage(format!(
                "{matrix} is not an isometry of {lattice}"
            )));
        }
        Ok(IsometryMatrix {
            matrix,
            lattice: lattice.clone(),
        })
    }

    pub fn identity(lattice: &GramLattice) -> Self {
        IsometryMatrix {
            matrix: IntMatrix::identity(lattice.rank()),
            lattice: lattice.clone(),
        }
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn apply(&self, v: &LatticeVector) -> Result<LatticeVector> {
        Ok(LatticeVector::new(self.matrix.mul_vec(v.coords())?))
    }

    pub fn compose(&self, other: &IsometryMatrix) -> Result<IsometryMatrix> {
        Ok(IsometryMatrix {
            matrix: self.matrix.mul(&other.matrix)?,
            lattice: self.lattice.clone(),
        })
    }

    pub fn inverse(&self) -> Result<IsometryMatrix> {
        Ok(IsometryMatrix {
            matrix: self.matrix.unimodular_inverse()?,
            lattice: self.lattice.clone(),
        })
    }

    pub fn pow(&self, k: u64) -> Result<IsometryMatrix> {
        Ok(IsometryMatrix {
            matrix: self.matrix.pow(k)?,
            lattice: self.lattice.clone(),
        })
    }

    pub fn neg(&self) -> IsometryMatrix {
        IsometryMatrix {
            matrix: self.matrix.neg(),
            lattice: self.lattice.clone(),
        }
    }
}

/// Whether `M` maps the positive cone containing `h` to itself.
///
/// For a form of signature `(1, n)` an isometry maps the positive cone to
/// itself or to its negative, so the sign of `inner(M h, h)` decides.
pub fn preserves_positive_cone(
    g: &GramLattice,
    m: &IsometryMatrix,
    h: &LatticeVector,
) -> Result<bool> {
    if g.signature().positive != 1 {
        return Err(Error::Usage(format!(
            "positive cone needs signature (1, n), got {}",
            g.signature()
        )));
    }
    let n = g.norm(h)?;
    if !n.is_positive() {
        return Err(Error::NotPositive(n.to_string()));
    }
    Ok(g.inner(&m.apply(h)?, h)?.is_positive())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum OrderResult {
    Finite(u64),
    Infinite,
}

pub fn order(m: &IsometryMatrix) -> Result<OrderResult> {
    if m.matrix.nrows() != 2 {
        return Err(Error::Usage(format!(
            "order detection is only supported in rank 2, got rank {}",
            m.matrix.nrows()
        )));
    }
    let mut power = m.matrix.clone();
    for k in 1..=RANK2_ORDER_BOUND {
        if power.is_identity() {
            return Ok(OrderResult::Finite(k));
        }
        power = power.mul(&m.matrix)?;
    }
    Ok(OrderResult::Infinite)
}

/// Exact real quadratic number `p + q·√d`, with `d` squarefree and `d ≥ 2`
/// whenever `q ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    pub p: BigRational,
    pub q: BigRational,
    pub d: BigInt,
}

impl QuadraticIrrational {
    pub fn rational(p: BigRational) -> Self {
        QuadraticIrrational {
            p,
            q: BigRational::zero(),
            d: BigInt::one(),
        }
    }

    /// `(p_num + q_num·√radicand) / den`, normalized.
    pub fn from_parts(p_num: &BigInt, q_num: &BigInt, radicand: &BigInt, den: &BigInt) -> Self {
        let (k, d) = squarefree_split(radicand);
        let q = BigRational::new(q_num * k, den.clone());
        let p = BigRational::new(p_num.clone(), den.clone());
        if d.is_one() || q.is_zero() {
            let extra = if d.is_one() { q } else { BigRational::zero() };
            return Self::rational(p + extra);
        }
        QuadraticIrrational { p, q, d }
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// Exact comparison `|self| > 1`.
    pub fn abs_exceeds_one(&self) -> bool {
        let one = BigRational::one();
        if self.is_rational() {
            return self.p.abs() > one;
        }
        // |p + q√d| > 1  ⇔  p + q√d > 1  or  p + q√d < −1
        greater_than(&self.p, &self.q, &self.d, &one)
            || greater_than(&(-&self.p), &(-&self.q), &self.d, &one)
    }
}

/// Exact test `p + q√d > c` for squarefree `d ≥ 2`.
fn greater_than(p: &BigRational, q: &BigRational, d: &BigInt, c: &BigRational) -> bool {
    let lhs = p - c; // need q√d > −lhs
    let dq2 = q * q * BigRational::from_integer(d.clone());
    match (q.is_positive(), lhs.is_negative()) {
        (true, false) => true,
        (true, true) => dq2 > &lhs * &lhs,
        (false, false) => q.is_zero() && lhs.is_positive() || dq2 < &lhs * &lhs,
        (false, true) => false,
    }
}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.p);
        }
        let sign = if self.q.is_negative() { "-" } else { "+" };
        let q = self.q.abs();
        let coeff = if q.is_one() {
            String::new()
        } else {
            q.to_string()
        };
        if self.p.is_zero() {
            let lead = if self.q.is_negative() { "-" } else { "" };
            write!(f, "{lead}{coeff}√{}", self.d)
        } else {
            write!(f, "{} {sign} {coeff}√{}", self.p, self.d)
        }
    }
}

impl Serialize for QuadraticIrrational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `n = k²·d` with `d` squarefree (sign kept on `d`).
fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    if n.is_zero() {
        return (BigInt::zero(), BigInt::one());
    }
    let mut rest = n.abs();
    let mut k = BigInt::one();
    let mut d = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0u32;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            e += 1;
        }
        k *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= &p;
        }
        p += 1;
    }
    d *= rest;
    if n.is_negative() {
        d = -d;
    }
    (k, d)
}

/// `λ² − trace·λ + det` and its dominant real root when it has one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharPoly {
    #[serde(with = "crate::intser")]
    pub trace: BigInt,
    #[serde(with = "crate::intser")]
    pub det: BigInt,
    /// Real root of largest absolute value (the positive one on ties).
    pub dominant_root: Option<QuadraticIrrational>,
}

impl CharPoly {
    pub fn discriminant(&self) -> BigInt {
        &self.trace * &self.trace - BigInt::from(4) * &self.det
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("λ²")?;
        let linear = -&self.trace;
        if !linear.is_zero() {
            let sign = if linear.is_negative() { '-' } else { '+' };
            if linear.abs().is_one() {
                write!(f, " {sign} λ")?;
            } else {
                write!(f, " {sign} {}λ", linear.abs())?;
            }
        }
        if !self.det.is_zero() {
            let sign = if self.det.is_negative() { '-' } else { '+' };
            write!(f, " {sign} {}", self.det.abs())?;
        }
        Ok(())
    }
}

pub fn char_poly_rank2(m: &IsometryMatrix) -> Result<CharPoly> {
    let a = &m.matrix;
    if a.nrows() != 2 {
        return Err(Error::Usage("characteristic data is only computed in rank 2".into()));
    }
    let trace = a.get(0, 0) + a.get(1, 1);
    let det = a.determinant()?;
    let disc = &trace * &trace - BigInt::from(4) * &det;
    let dominant_root = if disc.is_negative() {
        None
    } else {
        let sign = if trace.is_negative() {
            BigInt::from(-1)
        } else {
            BigInt::one()
        };
        Some(match exact_sqrt(&disc) {
            Some(r) => QuadraticIrrational::rational(BigRational::new(&trace + sign * r, 2.into())),
            None => QuadraticIrrational::from_parts(&trace, &sign, &disc, &BigInt::from(2)),
        })
    };
    Ok(CharPoly {
        trace,
        det,
        dominant_root,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitPoint {
    pub k: u64,
    pub class: LatticeVector,
    /// `inner(M^k h, h)`.
    #[serde(with = "crate::intser")]
    pub degree: BigInt,
}

/// `(k, M^k h, inner(M^k h, h))` for `k = 0..=k_max`.
pub fn polarization_orbit(
    g: &GramLattice,
    m: &IsometryMatrix,
    h: &LatticeVector,
    k_max: u64,
) -> Result<Vec<OrbitPoint>> {
    let mut out = Vec::new();
    let mut current = h.clone();
    for k in 0..=k_max {
        out.push(OrbitPoint {
            k,
            degree: g.inner(&current, h)?,
            class: current.clone(),
        });
        if k < k_max {
            current = m.apply(&current)?;
        }
    }
    Ok(out)
}

pub fn moves_polarization(m: &IsometryMatrix, h: &LatticeVector) -> Result<bool> {
    Ok(m.apply(h)? != *h)
}
