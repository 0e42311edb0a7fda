//! Brute-force verifiers.
//!
//! Each oracle recomputes a quantity by exhaustive search along a route that
//! shares no code path with the decision procedure it checks: value scans over
//! a box, a box radius derived from the orthogonal decomposition along `h`,
//! linear Pell scans, and discriminant actions tracked on the columns of `G⁻¹`
//! instead of Smith generators.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::certificate::LowDegreeClass;
use crate::discgroup::ActionOrder;
use crate::lattice::{GramLattice, LatticeVector};
use crate::matrix::{exact_sqrt, isqrt, IntMatrix};
use crate::quadform::PellSolution;
use crate::{Error, Result};

pub const DEFAULT_BOX_RADIUS: u64 = 50;

/// All integer vectors with coordinates in `[−radius, radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxScan {
    radius: u64,
}

impl BoxScan {
    pub fn new(radius: u64) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Usage("box radius must be at least 1".into()));
        }
        Ok(BoxScan { radius })
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    /// Vectors of the given rank in lexicographic order.
    pub fn vectors(&self, rank: usize) -> impl Iterator<Item = LatticeVector> {
        let r = self.radius as i64;
        let side = (2 * r + 1) as u64;
        let total = side.pow(rank as u32);
        (0..total).map(move |mut idx| {
            let mut coords = vec![BigInt::zero(); rank];
            for slot in coords.iter_mut().rev() {
                *slot = BigInt::from((idx % side) as i64 - r);
                idx /= side;
            }
            LatticeVector::new(coords)
        })
    }
}

/// Every norm attained by a nonzero vector of the box, with its first witness
/// in lexicographic order.
pub fn brute_values(g: &GramLattice, radius: u64) -> Result<BTreeMap<BigInt, LatticeVector>> {
    if g.rank() > 2 {
        return Err(Error::Usage("value scans are limited to rank ≤ 2".into()));
    }
    let scan = BoxScan::new(radius)?;
    let mut out = BTreeMap::new();
    for v in scan.vectors(g.rank()) {
        if v.is_zero() {
            continue;
        }
        out.entry(g.norm(&v)?).or_insert(v);
    }
    Ok(out)
}

/// A box radius that provably contains every class `C` with
/// `0 < C·h < bound` and `C² > 0`.
///
/// Write `C = (C·h / h²) h + t v` with `v` spanning `h^⊥`. Then
/// `C² = (C·h)²/h² + t² v²` with `v² < 0`, so `t² |v²| < bound² / h²`, and
/// each coordinate obeys `|C_i| < bound |h_i| / h² + bound |v_i| / √(h² |v²|)`.
pub fn required_low_degree_radius(g: &GramLattice, h: &LatticeVector, bound: u64) -> Result<u64> {
    if g.rank() != 2 {
        return Err(Error::Usage("low-degree scans need a rank-2 lattice".into()));
    }
    let h2 = g.norm(h)?;
    if !h2.is_positive() {
        return Err(Error::NotPositive(h2.to_string()));
    }
    let gh = g.pair_with(h)?;
    let gcd = gh[0].gcd(&gh[1]);
    let v = LatticeVector::new(vec![-&gh[1] / &gcd, &gh[0] / &gcd]);
    let v2 = g.norm(&v)?;
    if !v2.is_negative() {
        return Err(Error::Internal(format!(
            "orthogonal complement of h has nonnegative norm {v2}"
        )));
    }
    let b = BigInt::from(bound);
    let root = isqrt(&(&h2 * (-&v2))).max(BigInt::one());
    let mut radius = BigInt::zero();
    for i in 0..2 {
        let along = BigRational::new(&b * h.coords()[i].abs(), h2.clone());
        let across = BigRational::new(&b * v.coords()[i].abs(), root.clone());
        let r = (along + across).floor().to_integer() + 1;
        radius = radius.max(r);
    }
    radius
        .to_u64()
        .ok_or_else(|| Error::Usage(format!("required box radius {radius} is too large")))
}

/// Every class of the box with `0 < C·h < bound` and `C² > 0`, sorted by
/// `(degree, coordinates)`.
pub fn brute_low_degree(
    g: &GramLattice,
    h: &LatticeVector,
    bound: u64,
    radius: u64,
) -> Result<Vec<LowDegreeClass>> {
    let needed = required_low_degree_radius(g, h, bound)?;
    if radius < needed {
        return Err(Error::Usage(format!(
            "box radius {radius} does not cover the degree window; need at least {needed}"
        )));
    }
    let b = BigInt::from(bound);
    let mut out = Vec::new();
    for c in BoxScan::new(radius)?.vectors(2) {
        let degree = g.inner(&c, h)?;
        if !degree.is_positive() || degree >= b {
            continue;
        }
        let square = g.norm(&c)?;
        if !square.is_positive() {
            continue;
        }
        out.push(LowDegreeClass {
            multiple_of_h: c.multiple_of(h),
            class: c,
            degree,
            square,
        });
    }
    out.sort_by(|a, b| (&a.degree, &a.class).cmp(&(&b.degree, &b.class)));
    Ok(out)
}

/// Smallest `y` in `1..=y_max` with `D y² + 1` a perfect square.
pub fn brute_pell(d: &BigInt, y_max: u64) -> Option<PellSolution> {
    (1..=y_max).find_map(|y| {
        let y = BigInt::from(y);
        exact_sqrt(&(d * &y * &y + 1)).map(|x| PellSolution {
            x,
            y,
            d: d.clone(),
            n: BigInt::one(),
        })
    })
}

/// Least `n ≥ 1` such that `Mⁿ` fixes every dual-basis vector `G⁻¹ e_j`
/// modulo the lattice.
pub fn brute_action_order(g: &GramLattice, m: &IntMatrix, cap: u64) -> Result<ActionOrder> {
    if m.transpose().mul(g.gram())?.mul(m)? != *g.gram() {
        return Err(Error::Usage(format!("{m} is not an isometry of {g}")));
    }
    let det = g.determinant().clone();
    let adj = g.gram().adjugate()?;
    let reduce = |w: Vec<BigRational>| -> Vec<BigRational> {
        w.into_iter().map(|x| &x - x.floor()).collect()
    };
    let start: Vec<Vec<BigRational>> = (0..g.rank())
        .map(|j| {
            reduce(
                adj.column(j)
                    .into_iter()
                    .map(|x| BigRational::new(x, det.clone()))
                    .collect(),
            )
        })
        .collect();
    let mut current = start.clone();
    for n in 1..=cap {
        current = current
            .into_iter()
            .map(|w| {
                let image = m
                    .rows()
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&w)
                            .fold(BigRational::zero(), |s, (a, x)| s + x * a)
                    })
                    .collect();
                reduce(image)
            })
            .collect();
        if current == start {
            return Ok(ActionOrder::Finite(n));
        }
    }
    Ok(ActionOrder::ExceededCap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> GramLattice {
        GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap()
    }

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn box_vectors_are_exhaustive() {
        let scan = BoxScan::new(2).unwrap();
        let all: Vec<_> = scan.vectors(2).collect();
        assert_eq!(all.len(), 25);
        assert_eq!(all[0], LatticeVector::from_i64(&[-2, -2]));
        assert_eq!(all[24], LatticeVector::from_i64(&[2, 2]));
        assert!(BoxScan::new(0).is_err());
    }

    #[test]
    fn value_scan_on_the_quartic_lattice() {
        let values = brute_values(&quartic(), 50).unwrap();
        assert!(!values.contains_key(&big(0)));
        assert!(!values.contains_key(&big(-2)));
        let min_positive = values.keys().find(|t| t.is_positive()).unwrap();
        assert_eq!(*min_positive, big(4));
        assert!(values.keys().all(|t| t.is_multiple_of(&big(4))));
    }

    #[test]
    fn value_scan_includes_basis_norms() {
        for rows in [[[2, 3], [3, 2]], [[0, 1], [1, 0]], [[4, 6], [6, 4]]] {
            let g = GramLattice::from_i64(&rows).unwrap();
            let values = brute_values(&g, 1).unwrap();
            assert!(values.contains_key(g.entry(0, 0)));
            assert!(values.contains_key(g.entry(1, 1)));
        }
        let u = GramLattice::from_i64(&[[0, 1], [1, 0]]).unwrap();
        let w = &brute_values(&u, 1).unwrap()[&big(0)];
        assert!(!w.is_zero());
    }

    #[test]
    fn low_degree_scans() {
        let h = LatticeVector::from_i64(&[1, 0]);
        let r = required_low_degree_radius(&quartic(), &h, 16).unwrap();
        let classes = brute_low_degree(&quartic(), &h, 16, r).unwrap();
        let coords: Vec<_> = classes.iter().map(|c| c.class.clone()).collect();
        assert_eq!(
            coords,
            vec![
                LatticeVector::from_i64(&[1, 0]),
                LatticeVector::from_i64(&[2, 0]),
                LatticeVector::from_i64(&[3, 0]),
            ]
        );
        assert!(brute_low_degree(&quartic(), &h, 4, r).unwrap().is_empty());
        assert!(brute_low_degree(&quartic(), &h, 16, 0).is_err());

        let control = GramLattice::from_i64(&[[4, 6], [6, 4]]).unwrap();
        let r = required_low_degree_radius(&control, &h, 16).unwrap();
        let classes = brute_low_degree(&control, &h, 16, r).unwrap();
        assert!(classes
            .iter()
            .any(|c| c.class == LatticeVector::from_i64(&[0, 1]) && c.multiple_of_h.is_none()));
    }

    #[test]
    fn pell_scans() {
        let s = brute_pell(&big(24), 10).unwrap();
        assert_eq!((s.x, s.y), (big(5), big(1)));
        let s = brute_pell(&big(2), 10).unwrap();
        assert_eq!((s.x, s.y), (big(3), big(2)));
        assert!(brute_pell(&big(61), 10).is_none());
    }

    #[test]
    fn action_order_scans() {
        let g = quartic();
        assert_eq!(
            brute_action_order(&g, &IntMatrix::identity(2), 384).unwrap(),
            ActionOrder::Finite(1)
        );
        let neg = brute_action_order(&g, &IntMatrix::identity(2).neg(), 384).unwrap();
        assert_eq!(neg, ActionOrder::Finite(2));
        assert!(brute_action_order(&g, &IntMatrix::from_i64(&[[1, 1], [0, 1]]), 10).is_err());
    }
}
