//! Endomorphisms of a product `E₁ × … × Eₙ` of pairwise isogenous elliptic
//! curves without complex multiplication, as integer coefficient matrices.
//!
//! Every `Hom(E_j, E_i)` is free of rank one. The curves are realized as
//! `E_j = ℂ/(ℤ + a_j z ℤ)`, and the generator `τ^(j→i)` is multiplication by
//! `r_ij = a_i / gcd(a_i, a_j)`, of degree `d_ij = a_i a_j / gcd(a_i, a_j)²`.
//! A coefficient matrix `C` stands for the endomorphism whose `(i, j)` block
//! is `c_ij τ^(j→i)`; in the basis `e_i` of `ℂⁿ` its analytic matrix is the
//! integer matrix `(c_ij r_ij)`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::forms::{class_number_tilde, enumerate_reduced, BinaryForm, FormError, Unimodular2};
use crate::lattice::{classify_unimodular, ClassifyOptions, LatticeError, Parity};
use crate::linalg::{det_bigint, leading_minors};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EndoError {
    #[error("invalid degrees: {0}")]
    InvalidDegrees(String),
    #[error("operands use different isogeny configurations")]
    ConfigMismatch,
    #[error("expected {expected} coefficients, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("coefficient matrix is not symmetric")]
    NotHermitian,
    #[error("operation needs two factors, got {0}")]
    WrongRank(usize),
    #[error("form is not primitive")]
    NotPrimitive,
    #[error("form has determinant {got}, expected {expected}")]
    DeterminantMismatch { expected: BigInt, got: BigInt },
    #[error("pattern has determinant {0}, expected ±1")]
    NotUnit(BigInt),
    #[error("coefficient does not fit in 64 bits")]
    Overflow,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Degrees `a = (1, a₂, …, aₙ)` of the minimal isogenies `E₁ → E_j`, with
/// the derived generator data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsogenyConfig {
    degrees: Vec<u64>,
    r: Vec<u64>,
    d: Vec<u64>,
    m: Vec<u64>,
}

impl IsogenyConfig {
    pub fn new(degrees: &[u64]) -> Result<Self, EndoError> {
        if degrees.is_empty() {
            return Err(EndoError::InvalidDegrees("no degrees given".into()));
        }
        if degrees[0] != 1 {
            return Err(EndoError::InvalidDegrees("first degree must be 1".into()));
        }
        if degrees.contains(&0) {
            return Err(EndoError::InvalidDegrees("degrees must be positive".into()));
        }
        let n = degrees.len();
        let a = degrees;
        let g = |i: usize, j: usize| a[i].gcd(&a[j]);
        let mut r = vec![0; n * n];
        let mut d = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                r[i * n + j] = a[i] / g(i, j);
                d[i * n + j] = (a[i] / g(i, j))
                    .checked_mul(a[j] / g(i, j))
                    .ok_or_else(|| EndoError::InvalidDegrees("degrees too large".into()))?;
            }
        }
        let mut m = vec![0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let num = a[j] * g(i, k);
                    let den = g(i, j) * g(j, k);
                    assert_eq!(num % den, 0, "composition constant is not integral");
                    let mijk = num / den;
                    assert_eq!(
                        mijk as u128 * mijk as u128 * d[i * n + k] as u128,
                        d[i * n + j] as u128 * d[j * n + k] as u128,
                        "degrees are not multiplicative"
                    );
                    m[(i * n + j) * n + k] = mijk;
                }
            }
        }
        Ok(Self {
            degrees: degrees.to_vec(),
            r,
            d,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Minimal degree of an isogeny between `E_i` and `E_j`.
    pub fn min_degree(&self, i: usize, j: usize) -> u64 {
        self.d[i * self.n() + j]
    }

    /// Analytic value of `τ^(j→i)` in the chain realization.
    pub fn generator(&self, i: usize, j: usize) -> u64 {
        self.r[i * self.n() + j]
    }

    /// The integer `m` with `τ^(j→i) τ^(k→j) = m τ^(k→i)`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> u64 {
        let n = self.n();
        self.m[(i * n + j) * n + k]
    }

    /// Sub-configuration on the first `k` factors.
    fn leading(&self, k: usize) -> IsogenyConfig {
        IsogenyConfig::new(&self.degrees[..k]).expect("prefix of a valid configuration")
    }

    fn all_ones(&self) -> bool {
        self.degrees.iter().all(|&a| a == 1)
    }
}

impl Serialize for IsogenyConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DegreesJson {
            degrees: self.degrees.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IsogenyConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = DegreesJson::deserialize(d)?;
        IsogenyConfig::new(&j.degrees).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DegreesJson {
    degrees: Vec<u64>,
}

pub fn build_config(degrees: &[u64]) -> Result<IsogenyConfig, EndoError> {
    IsogenyConfig::new(degrees)
}

/// An element of `End(E₁ × … × Eₙ)` by its coefficient matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermEnd {
    config: IsogenyConfig,
    c: Vec<i64>,
}

impl HermEnd {
    pub fn new(config: &IsogenyConfig, coeffs: Vec<i64>) -> Result<Self, EndoError> {
        let n = config.n();
        if coeffs.len() != n * n {
            return Err(EndoError::Shape {
                expected: n * n,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            config: config.clone(),
            c: coeffs,
        })
    }

    pub fn from_rows(config: &IsogenyConfig, rows: &[Vec<i64>]) -> Result<Self, EndoError> {
        Self::new(config, rows.concat())
    }

    pub fn identity(config: &IsogenyConfig) -> Self {
        let n = config.n();
        let mut c = vec![0; n * n];
        for i in 0..n {
            c[i * n + i] = 1;
        }
        Self {
            config: config.clone(),
            c,
        }
    }

    pub fn zero(config: &IsogenyConfig) -> Self {
        let n = config.n();
        Self {
            config: config.clone(),
            c: vec![0; n * n],
        }
    }

    /// Coefficients uniform in `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(config: &IsogenyConfig, bound: i64, rng: &mut R) -> Self {
        let n = config.n();
        let c = (0..n * n).map(|_| rng.gen_range(-bound..=bound)).collect();
        Self {
            config: config.clone(),
            c,
        }
    }

    /// A random element with symmetric coefficients.
    pub fn random_hermitian<R: Rng + ?Sized>(config: &IsogenyConfig, bound: i64, rng: &mut R) -> Self {
        let mut a = Self::random(config, bound, rng);
        let n = config.n();
        for i in 0..n {
            for j in 0..i {
                a.c[i * n + j] = a.c[j * n + i];
            }
        }
        a
    }

    pub fn config(&self) -> &IsogenyConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn coeff(&self, i: usize, j: usize) -> i64 {
        self.c[i * self.n() + j]
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.c
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.c.chunks(self.n().max(1)).map(<[i64]>::to_vec).collect()
    }

    fn same_config(&self, other: &HermEnd) -> Result<(), EndoError> {
        if self.config == other.config {
            Ok(())
        } else {
            Err(EndoError::ConfigMismatch)
        }
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &HermEnd) -> Result<HermEnd, EndoError> {
        self.same_config(other)?;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(x, y)| x.checked_add(*y).ok_or(EndoError::Overflow))
            .collect::<Result<_, _>>()?;
        Ok(HermEnd {
            config: self.config.clone(),
            c,
        })
    }

    /// Composition: `(AB)_ik = Σ_j a_ij b_jk m(i, j, k)`.
    pub fn multiply(&self, other: &HermEnd) -> Result<HermEnd, EndoError> {
        self.same_config(other)?;
        let n = self.n();
        let mut c = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut s: i128 = 0;
                for j in 0..n {
                    let m = self.config.structure_constant(i, j, k) as i128;
                    s += self.coeff(i, j) as i128 * other.coeff(j, k) as i128 * m;
                }
                c[i * n + k] = s.try_into().map_err(|_| EndoError::Overflow)?;
            }
        }
        Ok(HermEnd {
            config: self.config.clone(),
            c,
        })
    }

    /// The Rosati involution, which transposes the coefficients.
    pub fn conj_transpose(&self) -> HermEnd {
        let n = self.n();
        let mut c = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                c[j * n + i] = self.c[i * n + j];
            }
        }
        HermEnd {
            config: self.config.clone(),
            c,
        }
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..i).all(|j| self.c[i * n + j] == self.c[j * n + i]))
    }

    /// Integer analytic matrix `(c_ij r_ij)` in the basis `e_i`.
    pub fn analytic_matrix(&self) -> Vec<BigInt> {
        let n = self.n();
        (0..n * n)
            .map(|idx| BigInt::from(self.c[idx]) * self.config.r[idx])
            .collect()
    }

    /// Real matrix `(c_ij √d_ij)` in the rescaled basis `√(Im z_i) e_i`.
    pub fn rescaled_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n();
        nalgebra::DMatrix::from_fn(n, n, |i, j| {
            self.coeff(i, j) as f64 * (self.config.min_degree(i, j) as f64).sqrt()
        })
    }

    /// Exact determinant. Up to rank 8 it is the sum over permutations, each
    /// term a product of integer cycle values; beyond that fraction-free
    /// elimination on the analytic matrix.
    pub fn det_int(&self) -> BigInt {
        let n = self.n();
        let a = self.analytic_matrix();
        if n > 8 {
            return det_bigint(n, a);
        }
        permutation_expansion(n, &a)
    }

    /// Exact leading principal minors, all of which are integers.
    fn minors(&self) -> Vec<BigInt> {
        leading_minors(self.n(), self.analytic_matrix())
    }

    pub fn is_positive_definite(&self) -> Result<bool, EndoError> {
        if !self.is_hermitian() {
            return Err(EndoError::NotHermitian);
        }
        let minors = self.minors();
        Ok(minors.len() == self.n() && minors.iter().all(Signed::is_positive))
    }

    /// Hermitian, positive definite and of determinant one.
    pub fn is_polarization_rep(&self) -> bool {
        self.is_hermitian() && self.is_positive_definite() == Ok(true) && self.det_int().is_one()
    }

    /// Leading principal submatrix on the first `k` factors.
    pub fn leading_block(&self, k: usize) -> HermEnd {
        let n = self.n();
        let config = self.config.leading(k);
        let c = (0..k * k).map(|idx| self.c[(idx / k) * n + idx % k]).collect();
        HermEnd { config, c }
    }
}

impl fmt::Display for HermEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("({})", r.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "({})", rows.join(", "))
    }
}

fn permutation_expansion(n: usize, a: &[BigInt]) -> BigInt {
    // Heap's algorithm with the running sign
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let term = |p: &[usize]| -> BigInt { (0..n).map(|i| &a[i * n + p[i]]).product() };
    let mut sign = 1i32;
    let mut total = term(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            let t = term(&perm);
            if sign > 0 {
                total += t;
            } else {
                total -= t;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

fn ensure_surface(a: &HermEnd) -> Result<u64, EndoError> {
    if a.n() != 2 {
        return Err(EndoError::WrongRank(a.n()));
    }
    Ok(a.config.min_degree(0, 1))
}

/// The binary form `(a₁₁, a₁₂ d, a₂₂ d)` attached to a symmetric element
/// of `End(E₁ × E₂)`, `d` the minimal degree.
pub fn phi_forward(a: &HermEnd) -> Result<BinaryForm, EndoError> {
    let d = ensure_surface(a)?;
    if !a.is_hermitian() {
        return Err(EndoError::NotHermitian);
    }
    let d = BigInt::from(d);
    Ok(BinaryForm::new(
        a.coeff(0, 0),
        BigInt::from(a.coeff(0, 1)) * &d,
        BigInt::from(a.coeff(1, 1)) * &d,
    ))
}

/// Lifts a primitive positive form of determinant `d` to a polarization
/// representative: returns `A` and `T ∈ GL₂(ℤ)` with `phi_forward(A) = Tᵗ B T`.
pub fn phi_surjective_lift(b: &BinaryForm, d: u64) -> Result<(HermEnd, Unimodular2), EndoError> {
    if !b.is_positive_definite() {
        return Err(FormError::NotPositiveDefinite {
            a: b.a.clone(),
            b: b.b.clone(),
            c: b.c.clone(),
        }
        .into());
    }
    let dd = BigInt::from(d);
    if b.det() != dd {
        return Err(EndoError::DeterminantMismatch {
            expected: dd,
            got: b.det(),
        });
    }
    if !b.is_primitive() {
        return Err(EndoError::NotPrimitive);
    }

    let (x0, y0) = unit_value_point(b, d);
    // complete (x0, y0) to a basis: x0 w - u y0 = 1
    let e = x0.extended_gcd(&y0);
    debug_assert!(e.gcd.is_one());
    let u_mat = Unimodular2::new([[x0.clone(), -e.y.clone()], [y0.clone(), e.x.clone()]])?;
    let b1 = b.transform(&u_mat);
    debug_assert_eq!(b1.a, b.eval(&x0, &y0));

    // b11 r + d s = 1
    let e = b1.a.extended_gcd(&dd);
    debug_assert!(e.gcd.is_one());
    let r = e.x;
    let shear = Unimodular2::new([
        [BigInt::one(), -(&b1.b * &r)],
        [BigInt::zero(), BigInt::one()],
    ])?;
    let b2 = b1.transform(&shear);
    let t = u_mat.mul(&shear);
    debug_assert_eq!(b.transform(&t), b2);
    assert!((&b2.b % &dd).is_zero() && (&b2.c % &dd).is_zero());

    let to_i64 = |x: BigInt| x.to_i64().ok_or(EndoError::Overflow);
    let config = IsogenyConfig::new(&[1, d])?;
    let a = HermEnd::from_rows(
        &config,
        &[
            vec![to_i64(b2.a.clone())?, to_i64(&b2.b / &dd)?],
            vec![to_i64(&b2.b / &dd)?, to_i64(&b2.c / &dd)?],
        ],
    )?;
    assert_eq!(phi_forward(&a)?, b2, "lift does not map back");
    assert!(a.is_polarization_rep(), "lift is not a polarization representative");
    Ok((a, t))
}

/// Coprime `(x₀, y₀)` with `gcd(B(x₀, y₀), d) = 1`: `(1, 0)` if it works,
/// otherwise the first hit scanning boxes of growing max-norm.
fn unit_value_point(b: &BinaryForm, d: u64) -> (BigInt, BigInt) {
    let dd = BigInt::from(d);
    if b.a.gcd(&dd).is_one() {
        return (BigInt::one(), BigInt::zero());
    }
    let cap = 4 * d.max(1) as i64;
    for radius in 1..=cap {
        for x in -radius..=radius {
            for y in -radius..=radius {
                if x.abs().max(y.abs()) != radius || x.gcd(&y) != 1 {
                    continue;
                }
                let (x, y) = (BigInt::from(x), BigInt::from(y));
                if b.eval(&x, &y).gcd(&dd).is_one() {
                    return (x, y);
                }
            }
        }
    }
    panic!("no point with a unit value found within max-norm {cap}");
}

/// `T̃ = ((t₁₁, t₁₂ d), (t₂₁, t₂₂))` for a unit coefficient pattern `T`.
pub fn transfer_matrix(t: &HermEnd) -> Result<Unimodular2, EndoError> {
    let d = ensure_surface(t)? as i64;
    let det = t.det_int();
    if !det.abs().is_one() {
        return Err(EndoError::NotUnit(det));
    }
    let m = Unimodular2::from_i64([
        [t.coeff(0, 0), t.coeff(0, 1) * d],
        [t.coeff(1, 0), t.coeff(1, 1)],
    ])?;
    assert_eq!(m.det(), det, "transfer matrix changes the determinant");
    Ok(m)
}

/// How a count was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    SelfProductLattice,
    SurfaceBinaryForm,
    BlockProduct,
}

impl fmt::Display for CountMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMethod::SelfProductLattice => "self_product_lattice",
            CountMethod::SurfaceBinaryForm => "surface_binary_form",
            CountMethod::BlockProduct => "block_product",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountDetails {
    Lattice {
        rank: usize,
        parities: Vec<Parity>,
        #[serde(with = "aut_list")]
        aut_orders: Vec<BigUint>,
    },
    Forms {
        d: u64,
        representatives: Vec<BinaryForm>,
    },
    Blocks {
        blocks: Vec<PolarizationCount>,
    },
}

mod aut_list {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Number of principal polarizations up to isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarizationCount {
    pub count: u64,
    pub method: CountMethod,
    pub details: CountDetails,
}

/// Input of [`count_polarizations`]: one isogeny class, or several mutually
/// non-isogenous ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountInput {
    Single(IsogenyConfig),
    Blocks { blocks: Vec<IsogenyConfig> },
}

pub fn count_polarizations(
    input: &CountInput,
    options: &ClassifyOptions,
) -> Result<PolarizationCount, EndoError> {
    match input {
        CountInput::Single(config) => count_single(config, options),
        CountInput::Blocks { blocks } => {
            if blocks.is_empty() {
                return Err(EndoError::InvalidDegrees("no blocks given".into()));
            }
            let parts = blocks
                .iter()
                .map(|b| count_single(b, options))
                .collect::<Result<Vec<_>, _>>()?;
            let count = parts
                .iter()
                .try_fold(1u64, |acc, p| acc.checked_mul(p.count))
                .ok_or(EndoError::Overflow)?;
            Ok(PolarizationCount {
                count,
                method: CountMethod::BlockProduct,
                details: CountDetails::Blocks { blocks: parts },
            })
        }
    }
}

fn count_single(config: &IsogenyConfig, options: &ClassifyOptions) -> Result<PolarizationCount, EndoError> {
    let n = config.n();
    if config.all_ones() {
        let c = classify_unimodular(n, options)?;
        if !c.complete {
            return Err(LatticeError::TimeBudgetExceeded.into());
        }
        return Ok(PolarizationCount {
            count: c.class_count() as u64,
            method: CountMethod::SelfProductLattice,
            details: CountDetails::Lattice {
                rank: n,
                parities: c.parities().collect(),
                aut_orders: c.aut_orders().cloned().collect(),
            },
        });
    }
    if n == 2 {
        let d = config.min_degree(0, 1);
        let dd = BigInt::from(d);
        let reps = enumerate_reduced(&dd, true);
        debug_assert_eq!(reps.len(), class_number_tilde(&dd));
        return Ok(PolarizationCount {
            count: reps.len() as u64,
            method: CountMethod::SurfaceBinaryForm,
            details: CountDetails::Forms {
                d,
                representatives: reps,
            },
        });
    }
    Err(EndoError::Unsupported(format!(
        "no class enumeration for {n} factors with degrees {:?}",
        config.degrees()
    )))
}
