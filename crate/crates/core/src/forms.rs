//! Classically integral positive-definite binary quadratic forms.
//!
//! A form `(a, b, c)` stands for `a x² + 2b xy + c y²`, i.e. the Gram matrix
//! `((a, b), (b, c))`. Equivalence is under the full group `GL₂(ℤ)`, acting by
//! `F ↦ Tᵗ F T`, so improper changes of basis are allowed and every class has a
//! unique representative in the domain `0 ≤ 2b ≤ a ≤ c`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bigjson;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("form ({a}, {b}, {c}) is not positive definite")]
    NotPositiveDefinite { a: BigInt, b: BigInt, c: BigInt },
    #[error("matrix has determinant {0}, expected ±1")]
    NotUnimodular(BigInt),
}

/// Gram data `(a, b, c)` of the binary form `a x² + 2b xy + c y²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryForm {
    #[serde(with = "bigjson")]
    pub a: BigInt,
    #[serde(with = "bigjson")]
    pub b: BigInt,
    #[serde(with = "bigjson")]
    pub c: BigInt,
}

impl BinaryForm {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    /// `a·c − b²`.
    pub fn det(&self) -> BigInt {
        &self.a * &self.c - &self.b * &self.b
    }

    /// True iff `gcd(a, b, c) = 1`.
    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c).is_one()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a.is_positive() && self.det().is_positive()
    }

    /// Value of the form at `(x, y)`.
    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        &self.a * x * x + BigInt::from(2) * &self.b * x * y + &self.c * y * y
    }

    /// `Tᵗ F T`.
    pub fn transform(&self, t: &Unimodular2) -> BinaryForm {
        let [[p, q], [r, s]] = &t.m;
        let two = BigInt::from(2);
        let a = &self.a * p * p + &two * &self.b * p * r + &self.c * r * r;
        let b = &self.a * p * q + &self.b * (p * s + q * r) + &self.c * r * s;
        let c = &self.a * q * q + &two * &self.b * q * s + &self.c * s * s;
        BinaryForm { a, b, c }
    }

    fn ensure_positive(&self) -> Result<(), FormError> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(FormError::NotPositiveDefinite {
                a: self.a.clone(),
                b: self.b.clone(),
                c: self.c.clone(),
            })
        }
    }

    /// Whether the form lies in the canonical domain `0 ≤ 2b ≤ a ≤ c`.
    pub fn is_reduced(&self) -> bool {
        !self.b.is_negative() && BigInt::from(2) * &self.b <= self.a && self.a <= self.c
    }

    /// Gauss reduction into `0 ≤ 2b ≤ a ≤ c`.
    ///
    /// Returns the reduced form together with the accumulated change of basis
    /// `T`, so that `reduced = Tᵗ F T`.
    pub fn reduce(&self) -> Result<(BinaryForm, Unimodular2), FormError> {
        self.ensure_positive()?;
        let mut f = self.clone();
        let mut t = Unimodular2::identity();
        loop {
            // translate b into (-a/2, a/2]
            let k = round_div(&f.b, &f.a);
            if !k.is_zero() {
                let step = Unimodular2::raw([
                    [BigInt::one(), -k],
                    [BigInt::zero(), BigInt::one()],
                ]);
                f = f.transform(&step);
                t = t.mul(&step);
            }
            if f.a > f.c {
                let swap = Unimodular2::raw([
                    [BigInt::zero(), BigInt::one()],
                    [BigInt::one(), BigInt::zero()],
                ]);
                f = f.transform(&swap);
                t = t.mul(&swap);
            } else {
                break;
            }
        }
        if f.b.is_negative() {
            let flip = Unimodular2::raw([
                [BigInt::one(), BigInt::zero()],
                [BigInt::zero(), -BigInt::one()],
            ]);
            f = f.transform(&flip);
            t = t.mul(&flip);
        }
        debug_assert!(f.is_reduced());
        debug_assert_eq!(self.transform(&t), f);
        Ok((f, t))
    }

    /// A witness `T` with `other = Tᵗ self T`, or `None` if the forms are inequivalent.
    pub fn is_equivalent(&self, other: &BinaryForm) -> Result<Option<Unimodular2>, FormError> {
        let (r1, t1) = self.reduce()?;
        let (r2, t2) = other.reduce()?;
        if r1 != r2 {
            return Ok(None);
        }
        let w = t1.mul(&t2.inverse());
        debug_assert_eq!(&self.transform(&w), other);
        Ok(Some(w))
    }

    /// Ordering key `(a, c, b)` used for sorted representative lists.
    fn sort_key(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.a, &self.c, &self.b)
    }
}

impl PartialOrd for BinaryForm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BinaryForm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Nearest integer to `num / den` (ties toward +∞), `den > 0`.
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (two * num + den).div_floor(&(BigInt::from(2) * den))
}

/// A 2×2 integer matrix of determinant ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[[BigIntJson; 2]; 2]", into = "[[BigIntJson; 2]; 2]")]
pub struct Unimodular2 {
    m: [[BigInt; 2]; 2],
}

impl Unimodular2 {
    pub fn new(m: [[BigInt; 2]; 2]) -> Result<Self, FormError> {
        let u = Self { m };
        let det = u.det();
        if det.abs().is_one() {
            Ok(u)
        } else {
            Err(FormError::NotUnimodular(det))
        }
    }

    pub fn from_i64(m: [[i64; 2]; 2]) -> Result<Self, FormError> {
        Self::new(m.map(|row| row.map(BigInt::from)))
    }

    fn raw(m: [[BigInt; 2]; 2]) -> Self {
        debug_assert!((&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]).abs().is_one());
        Self { m }
    }

    pub fn identity() -> Self {
        Self::raw([
            [BigInt::one(), BigInt::zero()],
            [BigInt::zero(), BigInt::one()],
        ])
    }

    pub fn entries(&self) -> &[[BigInt; 2]; 2] {
        &self.m
    }

    pub fn det(&self) -> BigInt {
        &self.m[0][0] * &self.m[1][1] - &self.m[0][1] * &self.m[1][0]
    }

    pub fn mul(&self, rhs: &Unimodular2) -> Unimodular2 {
        let a = &self.m;
        let b = &rhs.m;
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        Self::raw([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    pub fn inverse(&self) -> Unimodular2 {
        let det = self.det();
        let [[p, q], [r, s]] = &self.m;
        // det is ±1, so dividing by it is multiplying by it
        Self::raw([[s * &det, -q * &det], [-r * &det, p * &det]])
    }
}

/// JSON wrapper that writes small integers as numbers and huge ones as strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BigIntJson(#[serde(with = "bigjson")] pub BigInt);

impl TryFrom<[[BigIntJson; 2]; 2]> for Unimodular2 {
    type Error = FormError;
    fn try_from(m: [[BigIntJson; 2]; 2]) -> Result<Self, FormError> {
        Unimodular2::new(m.map(|row| row.map(|x| x.0)))
    }
}

impl From<Unimodular2> for [[BigIntJson; 2]; 2] {
    fn from(u: Unimodular2) -> Self {
        u.m.map(|row| row.map(BigIntJson))
    }
}

/// All reduced forms of determinant `d`, sorted by `(a, c, b)`.
///
/// Reduced positive forms satisfy `3a² ≤ 4d`, which bounds the outer loop.
pub fn enumerate_reduced(d: &BigInt, primitive_only: bool) -> Vec<BinaryForm> {
    let mut out = Vec::new();
    if !d.is_positive() {
        return out;
    }
    let a_max = (BigInt::from(4) * d / 3u32).sqrt();
    let mut a = BigInt::one();
    while a <= a_max {
        let mut b = BigInt::zero();
        while BigInt::from(2) * &b <= a {
            let num = d + &b * &b;
            if num.is_multiple_of(&a) {
                let c = &num / &a;
                if c >= a {
                    let f = BinaryForm::new(a.clone(), b.clone(), c);
                    if !primitive_only || f.is_primitive() {
                        out.push(f);
                    }
                }
            }
            b += 1u32;
        }
        a += 1u32;
    }
    out.sort();
    out
}

/// Number of `GL₂(ℤ)`-classes of primitive positive forms of determinant `d`.
pub fn class_number_tilde(d: &BigInt) -> usize {
    enumerate_reduced(d, true).len()
}
