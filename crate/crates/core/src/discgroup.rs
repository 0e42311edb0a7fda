//! Smith normal form and the discriminant group `L*/L` of a lattice.
//!
//! For `U·G·V = D` with `D = diag(d_1, …, d_n)`, the dual lattice is
//! `G⁻¹ Zⁿ` and `L*/L ≅ ⊕ Z/d_i` with generators `V e_i / d_i`. A dual vector
//! `w` has generator coordinates `(U G w)_i mod d_i`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::lattice::GramLattice;
use crate::matrix::IntMatrix;
use crate::{Error, Result};

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.nrows().min(self.d.ncols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }
}

fn swap_cols(a: &mut [Vec<BigInt>], i: usize, j: usize) {
    for r in a.iter_mut() {
        r.swap(i, j);
    }
}

/// `row_dst -= q * row_src`
fn row_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let src_row = a[src].clone();
    for (x, s) in a[dst].iter_mut().zip(&src_row) {
        *x -= q * s;
    }
}

/// `col_dst -= q * col_src`
fn col_axpy(a: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for r in a.iter_mut() {
        let s = r[src].clone();
        r[dst] -= q * s;
    }
}

/// Smith normal form by elementary row and column operations, pivoting on
/// the smallest nonzero entry of the remaining block.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (n, k) = (m.nrows(), m.ncols());
    let mut a = m.rows().to_vec();
    let mut u = IntMatrix::identity(n).into_rows();
    let mut v = IntMatrix::identity(k).into_rows();

    for t in 0..n.min(k) {
        loop {
            let pivot = (t..n)
                .flat_map(|i| (t..k).map(move |j| (i, j)))
                .filter(|&(i, j)| !a[i][j].is_zero())
                .min_by(|&(i, j), &(p, q)| a[i][j].abs().cmp(&a[p][q].abs()));
            let Some((pi, pj)) = pivot else {
                break;
            };
            a.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut a, t, pj);
            swap_cols(&mut v, t, pj);

            let p = a[t][t].clone();
            for i in t + 1..n {
                let q = &a[i][t] / &p;
                if !q.is_zero() {
                    row_axpy(&mut a, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                }
            }
            for j in t + 1..k {
                let q = &a[t][j] / &p;
                if !q.is_zero() {
                    col_axpy(&mut a, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                }
            }
            let dirty = (t + 1..n).any(|i| !a[i][t].is_zero())
                || (t + 1..k).any(|j| !a[t][j].is_zero());
            if dirty {
                continue;
            }
            let offender = (t + 1..n)
                .find(|&i| (t + 1..k).any(|j| !a[i][j].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    row_axpy(&mut a, t, i, &BigInt::from(-1));
                    row_axpy(&mut u, t, i, &BigInt::from(-1));
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }

    SmithDecomposition {
        u: IntMatrix::new(u).expect("square"),
        d: IntMatrix::new(a).expect("same shape"),
        v: IntMatrix::new(v).expect("square"),
    }
}

/// A vector with rational coordinates in the lattice basis.
pub type DualVector = Vec<BigRational>;

pub fn to_rational(v: &[BigInt]) -> DualVector {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

fn apply_rational(m: &IntMatrix, w: &[BigRational]) -> DualVector {
    m.rows()
        .iter()
        .map(|r| {
            r.iter()
                .zip(w)
                .map(|(a, b)| b * a)
                .fold(BigRational::zero(), |s, x| s + x)
        })
        .collect()
}

/// `G · w`, which must be integral for `w ∈ L*`.
fn pair_dual(g: &GramLattice, w: &[BigRational]) -> Result<Vec<BigInt>> {
    if w.len() != g.rank() {
        return Err(Error::DimensionMismatch {
            expected: g.rank(),
            found: w.len(),
        });
    }
    apply_rational(g.gram(), w)
        .into_iter()
        .map(|x| {
            if x.is_integer() {
                Ok(x.to_integer())
            } else {
                Err(Error::Usage(format!("vector is not in the dual lattice (pairing {x})")))
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscriminantGroup {
    #[serde(with = "crate::intser::vec")]
    pub invariant_factors: Vec<BigInt>,
    #[serde(serialize_with = "serialize_rational_vectors")]
    pub generators: Vec<DualVector>,
    #[serde(skip)]
    gram: GramLattice,
    /// Rows of `U` belonging to the nontrivial factors.
    #[serde(skip)]
    coordinate_rows: Vec<Vec<BigInt>>,
}

fn serialize_rational_vectors<S: serde::Serializer>(
    vs: &[DualVector],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(vs.len()))?;
    for v in vs {
        let strs: Vec<String> = v.iter().map(ToString::to_string).collect();
        seq.serialize_element(&strs)?;
    }
    seq.end()
}

impl DiscriminantGroup {
    pub fn new(g: &GramLattice) -> Self {
        let snf = smith_normal_form(g.gram());
        let mut invariant_factors = Vec::new();
        let mut generators = Vec::new();
        let mut coordinate_rows = Vec::new();
        for (i, d) in snf.diagonal().into_iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let gen = snf
                .v
                .column(i)
                .into_iter()
                .map(|x| BigRational::new(x, d.clone()))
                .collect();
            generators.push(gen);
            coordinate_rows.push(snf.u.rows()[i].clone());
            invariant_factors.push(d);
        }
        DiscriminantGroup {
            invariant_factors,
            generators,
            gram: g.clone(),
            coordinate_rows,
        }
    }

    pub fn gram(&self) -> &GramLattice {
        &self.gram
    }

    pub fn order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty()
    }

    /// Generator coordinates of a dual vector, reduced modulo the factors.
    pub fn coordinates(&self, w: &[BigRational]) -> Result<Vec<BigInt>> {
        let z = pair_dual(&self.gram, w)?;
        Ok(self
            .coordinate_rows
            .iter()
            .zip(&self.invariant_factors)
            .map(|(row, d)| {
                let c: BigInt = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                c.mod_floor(d)
            })
            .collect())
    }

    /// The dual vector `Σ c_i g_i`.
    pub fn element(&self, coords: &[BigInt]) -> DualVector {
        let mut out = vec![BigRational::zero(); self.gram.rank()];
        for (c, g) in coords.iter().zip(&self.generators) {
            for (o, x) in out.iter_mut().zip(g) {
                *o += x * c;
            }
        }
        out
    }

    /// Map induced on `L*/L` by an isometry `M` of the lattice.
    pub fn induced_action(&self, m: &IntMatrix) -> Result<DiscAction> {
        check_isometry(&self.gram, m)?;
        let k = self.generators.len();
        let mut matrix = vec![vec![BigInt::zero(); k]; k];
        for (j, gen) in self.generators.iter().enumerate() {
            let image = apply_rational(m, gen);
            for (i, c) in self.coordinates(&image)?.into_iter().enumerate() {
                matrix[i][j] = c;
            }
        }
        Ok(DiscAction {
            factors: self.invariant_factors.clone(),
            matrix,
        })
    }
}

fn check_isometry(g: &GramLattice, m: &IntMatrix) -> Result<()> {
    if m.nrows() != g.rank() || m.ncols() != g.rank() {
        return Err(Error::DimensionMismatch {
            expected: g.rank(),
            found: m.nrows(),
        });
    }
    if m.transpose().mul(g.gram())?.mul(m)? != *g.gram() {
        return Err(Error::Usage(format!("{m} is not an isometry of {g}")));
    }
    Ok(())
}

pub fn discriminant_group(g: &GramLattice) -> DiscriminantGroup {
    DiscriminantGroup::new(g)
}

/// `q(w) = wᵀ G w mod 2` in `[0, 2)` for an even lattice and `w ∈ L*`.
pub fn disc_quadratic_value(g: &GramLattice, w: &[BigRational]) -> Result<BigRational> {
    if !g.is_even() {
        return Err(Error::Usage("discriminant quadratic form needs an even lattice".into()));
    }
    let gw = pair_dual(g, w)?;
    let q: BigRational = w
        .iter()
        .zip(&gw)
        .map(|(a, b)| a * b)
        .fold(BigRational::zero(), |s, x| s + x);
    Ok(mod_two(&q))
}

fn mod_two(q: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let k = (q / &two).floor();
    q - k * two
}

/// An endomorphism of `⊕ Z/d_i`, as a matrix acting on generator coordinates;
/// row `i` is reduced modulo `d_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscAction {
    #[serde(with = "crate::intser::vec")]
    pub factors: Vec<BigInt>,
    #[serde(with = "crate::intser::rows")]
    pub matrix: Vec<Vec<BigInt>>,
}

impl DiscAction {
    pub fn identity(factors: &[BigInt]) -> Self {
        let k = factors.len();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        DiscAction {
            factors: factors.to_vec(),
            matrix,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.iter().zip(&self.factors).enumerate().all(|(i, (row, d))| {
            row.iter().enumerate().all(|(j, x)| {
                let target = if i == j { BigInt::one() } else { BigInt::zero() };
                (x - target).is_multiple_of(d)
            })
        })
    }

    pub fn apply(&self, coords: &[BigInt]) -> Vec<BigInt> {
        self.matrix
            .iter()
            .zip(&self.factors)
            .map(|(row, d)| {
                let s: BigInt = row.iter().zip(coords).map(|(a, b)| a * b).sum();
                s.mod_floor(d)
            })
            .collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &DiscAction) -> DiscAction {
        let k = self.factors.len();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let s: BigInt = (0..k)
                            .map(|l| &self.matrix[i][l] * &other.matrix[l][j])
                            .sum();
                        s.mod_floor(&self.factors[i])
                    })
                    .collect()
            })
            .collect();
        DiscAction {
            factors: self.factors.clone(),
            matrix,
        }
    }
}

impl fmt::Display for DiscAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = IntMatrix::new(self.matrix.clone());
        match m {
            Ok(m) => write!(f, "{m}"),
            Err(_) => write!(f, "[]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionOrder {
    Finite(u64),
    ExceededCap,
}

impl ActionOrder {
    pub fn value(&self) -> Option<u64> {
        match self {
            ActionOrder::Finite(n) => Some(*n),
            ActionOrder::ExceededCap => None,
        }
    }
}

/// Least `n ≥ 1` with `aⁿ = id`, by iterate-and-compare up to `cap`.
pub fn action_order(a: &DiscAction, cap: u64) -> ActionOrder {
    let mut power = a.clone();
    for n in 1..=cap {
        if power.is_identity() {
            return ActionOrder::Finite(n);
        }
        power = power.compose(a);
    }
    ActionOrder::ExceededCap
}

/// Default iteration cap: the group order, saturated to `u64`.
pub fn default_cap(group: &DiscriminantGroup) -> u64 {
    group.order().to_u64().unwrap_or(u64::MAX).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(big(n), big(d))
    }

    fn check_snf(m: &IntMatrix) -> SmithDecomposition {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).unwrap().mul(&s.v).unwrap(), s.d);
        assert!(s.u.determinant().unwrap().abs().is_one());
        assert!(s.v.determinant().unwrap().abs().is_one());
        s
    }

    #[test]
    fn snf_examples() {
        let id = IntMatrix::identity(2);
        let s = check_snf(&id);
        assert_eq!((s.u, s.d, s.v), (id.clone(), id.clone(), id));
        let s = check_snf(&IntMatrix::from_i64(&[[4, 20], [20, 4]]));
        assert_eq!(s.diagonal(), vec![big(4), big(96)]);
        let s = check_snf(&IntMatrix::from_i64(&[[2, 0], [0, 3]]));
        assert_eq!(s.diagonal(), vec![big(1), big(6)]);
    }

    #[test]
    fn snf_rectangular_and_singular() {
        let s = check_snf(&IntMatrix::from_i64(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]));
        assert_eq!(s.diagonal(), vec![big(2), big(6), big(12)]);
        let s = check_snf(&IntMatrix::from_i64(&[[1, 2], [2, 4], [3, 6]]));
        assert_eq!(s.diagonal(), vec![big(1), big(0)]);
        let s = check_snf(&IntMatrix::from_i64(&[[0, 0, 0], [0, 0, 0]]));
        assert_eq!(s.diagonal(), vec![big(0), big(0)]);
    }

    #[test]
    fn discriminant_group_examples() {
        let g = GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap();
        let dg = discriminant_group(&g);
        assert_eq!(dg.invariant_factors, vec![big(4), big(96)]);
        assert_eq!(dg.order(), big(384));
        for (gen, d) in dg.generators.iter().zip(&dg.invariant_factors) {
            let scaled: Vec<BigRational> = gen.iter().map(|x| x * d).collect();
            assert!(scaled.iter().all(|x| x.is_integer()));
            assert!(pair_dual(&g, gen).is_ok());
        }

        let u = GramLattice::from_i64(&[[0, 1], [1, 0]]).unwrap();
        assert!(discriminant_group(&u).is_trivial());

        let d = GramLattice::from_i64(&[[2, 0], [0, -2]]).unwrap();
        assert_eq!(discriminant_group(&d).invariant_factors, vec![big(2), big(2)]);
    }

    #[test]
    fn generator_coordinates_are_unit_vectors() {
        let g = GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap();
        let dg = discriminant_group(&g);
        for (i, gen) in dg.generators.iter().enumerate() {
            let c = dg.coordinates(gen).unwrap();
            for (j, x) in c.iter().enumerate() {
                assert_eq!(*x, if i == j { big(1) } else { big(0) });
            }
        }
    }

    #[test]
    fn quadratic_values() {
        let d = GramLattice::from_i64(&[[2, 0], [0, -2]]).unwrap();
        assert_eq!(
            disc_quadratic_value(&d, &[rat(1, 2), rat(0, 1)]).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            disc_quadratic_value(&d, &[rat(0, 1), rat(1, 2)]).unwrap(),
            rat(3, 2)
        );
        assert!(disc_quadratic_value(&d, &[rat(1, 3), rat(0, 1)]).is_err());

        let g = GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap();
        assert_eq!(
            disc_quadratic_value(&g, &to_rational(&[big(3), big(-7)])).unwrap(),
            rat(0, 1)
        );
        let odd = GramLattice::from_i64(&[[1, 0], [0, -1]]).unwrap();
        assert!(disc_quadratic_value(&odd, &[rat(1, 1), rat(0, 1)]).is_err());
    }

    #[test]
    fn induced_action_examples() {
        let g = GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap();
        let dg = discriminant_group(&g);
        let id = dg.induced_action(&IntMatrix::identity(2)).unwrap();
        assert!(id.is_identity());
        assert_eq!(action_order(&id, 384), ActionOrder::Finite(1));

        let neg = dg.induced_action(&IntMatrix::identity(2).neg()).unwrap();
        assert_eq!(action_order(&neg, 384), ActionOrder::Finite(2));

        let not_iso = IntMatrix::from_i64(&[[1, 1], [0, 1]]);
        assert!(dg.induced_action(&not_iso).is_err());
    }

    #[test]
    fn negation_is_trivial_on_two_torsion() {
        let g = GramLattice::from_i64(&[[2, 0], [0, -2]]).unwrap();
        let dg = discriminant_group(&g);
        let neg = dg.induced_action(&IntMatrix::identity(2).neg()).unwrap();
        assert_eq!(action_order(&neg, 4), ActionOrder::Finite(1));
    }

    #[test]
    fn order_cap() {
        let g = GramLattice::from_i64(&[[4, 20], [20, 4]]).unwrap();
        let dg = discriminant_group(&g);
        let sigma = IntMatrix::from_i64(&[[10, 1], [-1, 0]]);
        let a = dg.induced_action(&sigma).unwrap();
        assert_eq!(action_order(&a, 1), ActionOrder::ExceededCap);
    }
}
