//! Binary quadratic forms attached to rank-2 lattices.
//!
//! Representability of a value `t` by `f(x, y) = a x² + b xy + c y²` is
//! decided by a staged pipeline: content divisibility, a congruence filter on
//! small moduli, and finally an exact search over the finitely many solution
//! classes of the completed-square Pell equation `u² − D y² = 4 a t`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{GramLattice, LatticeVector};
use crate::matrix::{exact_sqrt, isqrt, IntMatrix};
use crate::{Error, Result};

/// Default congruence-filter moduli.
pub const DEFAULT_MODULI: [u32; 4] = [3, 5, 8, 16];

/// Trial divisions allowed when factoring a split (square-discriminant) form.
const DIVISOR_TRIAL_LIMIT: u64 = 1_000_000;

/// `f(x, y) = a x² + b xy + c y²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryForm {
    #[serde(with = "crate::intser")]
    pub a: BigInt,
    #[serde(with = "crate::intser")]
    pub b: BigInt,
    #[serde(with = "crate::intser")]
    pub c: BigInt,
}

impl BinaryForm {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Self {
        BinaryForm { a, b, c }
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Self {
        Self::new(a.into(), b.into(), c.into())
    }

    /// The norm form of a rank-2 lattice: `(G11, 2 G12, G22)`.
    pub fn from_lattice(g: &GramLattice) -> Result<Self> {
        if g.rank() != 2 {
            return Err(Error::Usage(format!(
                "binary form needs a rank-2 lattice, got rank {}",
                g.rank()
            )));
        }
        Ok(BinaryForm {
            a: g.entry(0, 0).clone(),
            b: g.entry(0, 1) * 2,
            c: g.entry(1, 1).clone(),
        })
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + &self.b * x * y + &self.c * y * y
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    /// gcd(a, b, c), always positive for a nonzero form.
    pub fn content(&self) -> BigInt {
        self.a.gcd(&self.b).gcd(&self.c)
    }

    pub fn primitive_part(&self) -> BinaryForm {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        BinaryForm::new(&self.a / &g, &self.b / &g, &self.c / &g)
    }

    /// `f ∘ M`, with `M` acting on the column `(x, y)`.
    pub fn compose(&self, m: &IntMatrix) -> BinaryForm {
        let (p, q, r, s) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        // f(px + qy, rx + sy)
        let a = self.eval(p, r);
        let c = self.eval(q, s);
        let b = BigInt::from(2) * &self.a * p * q
            + &self.b * (p * s + q * r)
            + BigInt::from(2) * &self.c * r * s;
        BinaryForm::new(a, b, c)
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

pub fn content(f: &BinaryForm) -> BigInt {
    f.content()
}

/// An integral binary form with nonzero discriminant has a nontrivial zero
/// iff its discriminant is a perfect square.
pub fn represents_zero_nontrivially(f: &BinaryForm) -> bool {
    exact_sqrt(&f.discriminant()).is_some()
}

/// A nonzero `(x, y)` with `f(x, y) = 0`, normalized to a positive first
/// nonzero coordinate and coprime entries.
pub fn zero_witness(f: &BinaryForm) -> Option<(BigInt, BigInt)> {
    let s = exact_sqrt(&f.discriminant())?;
    let (x, y) = if f.a.is_zero() {
        (BigInt::one(), BigInt::zero())
    } else {
        // x / y = (−b + s) / 2a is a rational root
        let num = -&f.b + &s;
        let den = BigInt::from(2) * &f.a;
        let g = num.gcd(&den);
        (num / &g, den / &g)
    };
    debug_assert!(f.eval(&x, &y).is_zero());
    Some(normalize_sign(x, y))
}

fn normalize_sign(x: BigInt, y: BigInt) -> (BigInt, BigInt) {
    if x.is_negative() || (x.is_zero() && y.is_negative()) {
        (-x, -y)
    } else {
        (x, y)
    }
}

/// A solution of `x² − D y² = N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PellSolution {
    #[serde(with = "crate::intser")]
    pub x: BigInt,
    #[serde(with = "crate::intser")]
    pub y: BigInt,
    #[serde(with = "crate::intser")]
    pub d: BigInt,
    #[serde(with = "crate::intser")]
    pub n: BigInt,
}

impl PellSolution {
    pub fn is_valid(&self) -> bool {
        &self.x * &self.x - &self.d * &self.y * &self.y == self.n
    }
}

impl fmt::Display for PellSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Minimal positive solution of `x² − D y² = 1` from the periodic continued
/// fraction of `√D`.
pub fn pell_fundamental(d: &BigInt) -> Result<PellSolution> {
    if !d.is_positive() {
        return Err(Error::Usage(format!("Pell parameter must be positive, got {d}")));
    }
    let a0 = isqrt(d);
    if &a0 * &a0 == *d {
        return Err(Error::Usage(format!("Pell parameter {d} is a perfect square")));
    }
    let (mut m, mut den, mut a) = (BigInt::zero(), BigInt::one(), a0.clone());
    let (mut p_prev, mut p) = (BigInt::one(), a0.clone());
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    loop {
        if &p * &p - d * &q * &q == BigInt::one() {
            return Ok(PellSolution {
                x: p,
                y: q,
                d: d.clone(),
                n: BigInt::one(),
            });
        }
        m = &den * &a - &m;
        den = (d - &m * &m) / &den;
        a = (&a0 + &m) / &den;
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
    }
}

/// Why a value is provably not represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoReason {
    ContentDivisibility,
    CongruenceFilter,
    NonsquareDiscriminant,
    PellExhausted,
    FactorExhausted,
}

impl NoReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoReason::ContentDivisibility => "content-divisibility",
            NoReason::CongruenceFilter => "congruence-filter",
            NoReason::NonsquareDiscriminant => "nonsquare-discriminant",
            NoReason::PellExhausted => "pell-exhausted",
            NoReason::FactorExhausted => "factor-exhausted",
        }
    }
}

impl fmt::Display for NoReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Representation {
    Yes { witness: LatticeVector },
    No { reason: NoReason, detail: String },
    Unknown { detail: String },
}

impl Representation {
    pub fn is_yes(&self) -> bool {
        matches!(self, Representation::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Representation::No { .. })
    }

    pub fn reason(&self) -> Option<NoReason> {
        match self {
            Representation::No { reason, .. } => Some(*reason),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&LatticeVector> {
        match self {
            Representation::Yes { witness } => Some(witness),
            _ => None,
        }
    }

    fn no(reason: NoReason, detail: impl Into<String>) -> Self {
        Representation::No {
            reason,
            detail: detail.into(),
        }
    }

    fn yes(x: BigInt, y: BigInt) -> Self {
        Representation::Yes {
            witness: LatticeVector::new(vec![x, y]),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub moduli: Vec<u32>,
    pub search_bound: u64,
}

impl SearchConfig {
    pub fn new(search_bound: u64) -> Self {
        SearchConfig {
            moduli: DEFAULT_MODULI.to_vec(),
            search_bound,
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self::new(1000)
    }
}

/// Decide whether the norm form of `g` takes the value `t` on a nonzero vector.
pub fn represents_value(g: &GramLattice, t: &BigInt, search_bound: u64) -> Result<Representation> {
    represents_value_with(g, t, &SearchConfig::new(search_bound))
}

pub fn represents_value_with(
    g: &GramLattice,
    t: &BigInt,
    config: &SearchConfig,
) -> Result<Representation> {
    let f = BinaryForm::from_lattice(g)?;
    if !g.determinant().is_negative() {
        return Err(Error::Usage(format!(
            "representability needs an indefinite form, signature is {}",
            g.signature()
        )));
    }

    if t.is_zero() {
        return Ok(match zero_witness(&f) {
            Some((x, y)) => Representation::yes(x, y),
            None => Representation::no(
                NoReason::NonsquareDiscriminant,
                format!(
                    "discriminant {} of the primitive form {} is not a square",
                    f.primitive_part().discriminant(),
                    f.primitive_part()
                ),
            ),
        });
    }

    let content = f.content();
    if !t.is_multiple_of(&content) {
        return Ok(Representation::no(
            NoReason::ContentDivisibility,
            format!("every value is divisible by the content {content}"),
        ));
    }
    let fp = f.primitive_part();
    let tp = t / &content;

    for &k in &config.moduli {
        if !congruence_admits(&fp, &tp, k) {
            return Ok(Representation::no(
                NoReason::CongruenceFilter,
                format!("{tp} is not a value of {fp} modulo {k}"),
            ));
        }
    }

    let disc = fp.discriminant();
    let rep = match exact_sqrt(&disc) {
        Some(s) => split_form_search(&fp, &tp, &s),
        None => pell_class_search(&fp, &tp, config.search_bound)?,
    };
    if let Representation::Yes { witness } = &rep {
        debug_assert_eq!(g.norm(witness)?, *t);
    }
    Ok(rep)
}

fn congruence_admits(f: &BinaryForm, t: &BigInt, k: u32) -> bool {
    let kk = BigInt::from(k);
    let target = t.mod_floor(&kk);
    (0..k).any(|x| {
        let x = BigInt::from(x);
        (0..k).any(|y| f.eval(&x, &BigInt::from(y)).mod_floor(&kk) == target)
    })
}

/// Exact search for a primitive form `f` of nonsquare discriminant `D`.
///
/// With `u = 2 a x + b y`, `f(x, y) = t` becomes `u² − D y² = N := 4 a t`.
/// The proper automorphs of `f` are `±η^k` for the unit `η = (s + r√D)/2`
/// of the minimal solution of `s² − D r² = 4`, and they act on solutions
/// without leaving the lattice. Moving `u + y√D` into the window
/// `[√|N|/√η, √|N|·√η)` bounds every orbit representative by
/// `4 D y² ≤ |N| (s − 2)` for `N > 0` and `4 D y² ≤ |N| (s + 2)` for `N < 0`.
fn pell_class_search(f: &BinaryForm, t: &BigInt, search_bound: u64) -> Result<Representation> {
    let d = f.discriminant();
    let n = BigInt::from(4) * &f.a * t;
    let (s, _) = minimal_automorph_unit(&d)?;
    let shift = if n.is_positive() { &s - 2 } else { &s + 2 };
    let y_bound = isqrt(&(n.abs() * shift / (BigInt::from(4) * &d)));
    let cap = BigInt::from(search_bound);
    let truncated = y_bound > cap;
    let scan_to = if truncated { cap } else { y_bound.clone() };

    let two_a = BigInt::from(2) * &f.a;
    let mut y = BigInt::zero();
    while y <= scan_to {
        for y in [y.clone(), -&y] {
            // a x² + (b y) x + (c y² − t) = 0 has discriminant D y² + 4 a t
            let Some(root) = exact_sqrt(&(&d * &y * &y + &n)) else {
                continue;
            };
            for num in [&root - &f.b * &y, -&root - &f.b * &y] {
                if num.is_multiple_of(&two_a) {
                    let x = num / &two_a;
                    debug_assert_eq!(f.eval(&x, &y), *t);
                    return Ok(Representation::yes(x, y));
                }
            }
        }
        y += 1;
    }
    if truncated {
        return Ok(Representation::Unknown {
            detail: format!(
                "class representatives reach |y| = {y_bound}, beyond the search bound {search_bound}"
            ),
        });
    }
    Ok(Representation::no(
        NoReason::PellExhausted,
        format!("no automorph class of u² − {d}·y² = {n} has a representative with |y| ≤ {y_bound}"),
    ))
}

/// A primitive form with square discriminant `s²` splits into linear factors;
/// a value `t ≠ 0` is decided by running over the divisors of `4 a t`.
fn split_form_search(f: &BinaryForm, t: &BigInt, s: &BigInt) -> Representation {
    if f.a.is_zero() && f.c.is_zero() {
        // f = b·xy with b = ±1
        return Representation::yes(t * &f.b, BigInt::one());
    }
    let swapped = f.a.is_zero();
    let g = if swapped {
        BinaryForm::new(f.c.clone(), f.b.clone(), f.a.clone())
    } else {
        f.clone()
    };
    // 4a·f = L1·L2 with L1 = 2a x + (b+s) y, L2 = 2a x + (b−s) y
    let n = BigInt::from(4) * &g.a * t;
    let abs_n = n.abs();
    let limit = isqrt(&abs_n);
    if limit.to_u64().is_none_or(|l| l > DIVISOR_TRIAL_LIMIT) {
        return Representation::Unknown {
            detail: format!("{abs_n} is too large to factor by trial division"),
        };
    }
    let two_a = BigInt::from(2) * &g.a;
    let two_s = BigInt::from(2) * s;
    let mut i = BigInt::one();
    while i <= limit {
        if abs_n.is_multiple_of(&i) {
            let j = &abs_n / &i;
            for d1 in [i.clone(), -&i, j.clone(), -&j] {
                let d2 = &n / &d1;
                let ynum = &d1 - &d2;
                if !ynum.is_multiple_of(&two_s) {
                    continue;
                }
                let y = ynum / &two_s;
                let xnum = &d1 - (&g.b + s) * &y;
                if !xnum.is_multiple_of(&two_a) {
                    continue;
                }
                let x = xnum / &two_a;
                debug_assert_eq!(g.eval(&x, &y), *t);
                return if swapped {
                    Representation::yes(y, x)
                } else {
                    Representation::yes(x, y)
                };
            }
        }
        i += 1;
    }
    Representation::no(
        NoReason::FactorExhausted,
        format!("no divisor pair of {n} yields an integral point"),
    )
}

/// Minimal `(t, u)` with `u > 0` and `t² − D u² = 4`.
///
/// For `D ≢ 1 (mod 4)` both `t` and `u` are forced even (and `u` too unless
/// `4 | D`), which reduces to `x² − D' y² = 1`. For `D ≡ 1 (mod 4)` every
/// solution with `D ≥ 17` gives a convergent `p/q` of `(1 + √D)/2` via
/// `t = 2p − q`, `u = q`; the two smaller discriminants are covered by a short
/// direct scan.
pub fn minimal_automorph_unit(d: &BigInt) -> Result<(BigInt, BigInt)> {
    let four = BigInt::from(4);
    if !d.is_positive() || exact_sqrt(d).is_some() {
        return Err(Error::Usage(format!(
            "automorph units need a positive nonsquare discriminant, got {d}"
        )));
    }
    let residue = d.mod_floor(&four);
    if residue.is_zero() {
        let s = pell_fundamental(&(d / &four))?;
        return Ok((s.x * 2, s.y));
    }
    if !residue.is_one() {
        let s = pell_fundamental(d)?;
        return Ok((s.x * 2, s.y * 2));
    }
    for u in 1..=16u32 {
        let u = BigInt::from(u);
        if let Some(t) = exact_sqrt(&(&four + d * &u * &u)) {
            return Ok((t, u));
        }
    }
    let root = isqrt(d);
    let (mut pp, mut qq) = (BigInt::one(), BigInt::from(2));
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    // the period of a reduced irrational of discriminant D is far below 4D
    let limit = d * 4 + 64;
    let mut steps = BigInt::zero();
    while steps < limit {
        let a = Integer::div_floor(&(&pp + &root), &qq);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        let t: BigInt = &p * 2 - &q;
        if t.is_positive() && &t * &t - d * &q * &q == four {
            return Ok((t, q.clone()));
        }
        pp = &a * &qq - &pp;
        qq = (d - &pp * &pp) / &qq;
        steps += 1;
    }
    Err(Error::Internal(format!(
        "no solution of t² − {d}u² = 4 within the continued fraction period"
    )))
}

/// The standard proper automorph `[[(t − b u)/2, −c u], [a u, (t + b u)/2]]`
/// from the minimal solution of `t² − disc·u² = 4`.
pub fn automorph_generator(f: &BinaryForm) -> Result<IntMatrix> {
    if !f.content().is_one() {
        return Err(Error::Usage(format!("form {f} is not primitive")));
    }
    let disc = f.discriminant();
    if !disc.is_positive() {
        return Err(Error::Usage(format!("form {f} is not indefinite")));
    }
    if exact_sqrt(&disc).is_some() {
        return Err(Error::Usage(format!(
            "form {f} has square discriminant {disc}"
        )));
    }
    let (t, u) = minimal_automorph_unit(&disc)?;
    let bu = &f.b * &u;
    let m = IntMatrix::new(vec![
        vec![(&t - &bu) / 2, -&f.c * &u],
        vec![&f.a * &u, (&t + &bu) / 2],
    ])?;
    debug_assert_eq!(f.compose(&m), *f);
    Ok(m)
}
