//! Numerical checks of analytic and rational representations on products of
//! elliptic curves `E_i = ℂ/(ℤ + z_i ℤ)`.
//!
//! The lattice `Λ` of `ℂⁿ` has the ordered basis given by the columns of
//! `Π = (Iₙ Z)`, `Z = diag(z_i)`, and the alternating form of the product
//! polarization is `E = ((0, Iₙ), (−Iₙ, 0))` in that basis. An endomorphism
//! is a pair `(A, R)` with `A Π = Π R`.

use nalgebra::{Complex, DMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::endo::{HermEnd, IsogenyConfig};
use crate::linalg::IntMatrix;

pub type C64 = Complex<f64>;

/// Residual tolerance asserted when pairs are constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Tolerance for identities between derived matrices.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Relative tolerance for `det R = |det A|²`.
pub const DET_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PeriodError {
    #[error("modulus {0} is not in the upper half plane")]
    NotUpperHalfPlane(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("configuration has no exact chain moduli")]
    NotChain,
    #[error("matrix does not preserve the period lattice")]
    NotAnEndomorphism,
}

/// Exact moduli `z_j = a_j (p + i q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct ChainModuli {
    p: BigRational,
    q: BigRational,
    degrees: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodConfig {
    z: Vec<C64>,
    chain: Option<ChainModuli>,
}

fn ratio_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("rational out of range")
}

impl PeriodConfig {
    pub fn new(z: Vec<C64>) -> Result<Self, PeriodError> {
        if let Some(i) = z.iter().position(|w| w.im.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
            return Err(PeriodError::NotUpperHalfPlane(i));
        }
        Ok(Self { z, chain: None })
    }

    /// The chain realization `z_j = a_j z₁` with `z₁ = p + i q` exact.
    pub fn chain(p: BigRational, q: BigRational, degrees: &[u64]) -> Result<Self, PeriodError> {
        if !q.is_positive() {
            return Err(PeriodError::NotUpperHalfPlane(0));
        }
        let z1 = C64::new(ratio_f64(&p), ratio_f64(&q));
        let z = degrees.iter().map(|&a| z1 * a as f64).collect();
        Ok(Self {
            z,
            chain: Some(ChainModuli {
                p,
                q,
                degrees: degrees.to_vec(),
            }),
        })
    }

    /// The fixed test modulus `z₁ = 1/3 + i·7/5` chained by `degrees`.
    pub fn standard_chain(degrees: &[u64]) -> Self {
        let p = BigRational::new(1.into(), 3.into());
        let q = BigRational::new(7.into(), 5.into());
        Self::chain(p, q, degrees).expect("positive imaginary part")
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn moduli(&self) -> &[C64] {
        &self.z
    }

    pub fn chain_degrees(&self) -> Option<&[u64]> {
        self.chain.as_ref().map(|c| c.degrees.as_slice())
    }
}

/// `Π = (Iₙ Z)`.
pub fn period_matrix(cfg: &PeriodConfig) -> DMatrix<C64> {
    let n = cfg.n();
    DMatrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            if i == j {
                C64::one()
            } else {
                C64::zero()
            }
        } else if j - n == i {
            cfg.z[i]
        } else {
            C64::zero()
        }
    })
}

/// `E_{L₀} = ((0, Iₙ), (−Iₙ, 0))`.
pub fn e_l0(n: usize) -> IntMatrix {
    let mut e = IntMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        e.set(i, n + i, 1);
        e.set(n + i, i, -1);
    }
    e
}

/// Analytic and rational representation of one endomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoPair {
    pub a: DMatrix<C64>,
    pub r: IntMatrix,
}

fn check_shapes(pair: &EndoPair, n: usize) -> Result<(), PeriodError> {
    if pair.a.nrows() != n || pair.a.ncols() != n || pair.r.rows() != 2 * n || pair.r.cols() != 2 * n {
        return Err(PeriodError::ShapeMismatch(format!(
            "A is {}x{}, R is {}x{}, expected {n}x{n} and {m}x{m}",
            pair.a.nrows(),
            pair.a.ncols(),
            pair.r.rows(),
            pair.r.cols(),
            m = 2 * n
        )));
    }
    Ok(())
}

fn int_to_complex(r: &IntMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(r.rows(), r.cols(), |i, j| C64::new(r.get(i, j) as f64, 0.0))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|A Π − Π R|`.
pub fn endo_residual(pair: &EndoPair, cfg: &PeriodConfig) -> Result<f64, PeriodError> {
    check_shapes(pair, cfg.n())?;
    let pi = period_matrix(cfg);
    let lhs = &pair.a * &pi;
    let rhs = &pi * int_to_complex(&pair.r);
    Ok(max_abs(&(lhs - rhs)))
}

pub fn check_endo(pair: &EndoPair, cfg: &PeriodConfig, tol: f64) -> Result<bool, PeriodError> {
    Ok(endo_residual(pair, cfg)? <= tol)
}

/// `Im Z · Āᵗ · (Im Z)⁻¹`.
pub fn rosati_analytic(a: &DMatrix<C64>, cfg: &PeriodConfig) -> DMatrix<C64> {
    let n = cfg.n();
    DMatrix::from_fn(n, n, |i, j| a[(j, i)].conj() * (cfg.z[i].im / cfg.z[j].im))
}

/// `E⁻¹ Rᵗ E`.
pub fn rosati_rational(r: &IntMatrix) -> Result<IntMatrix, PeriodError> {
    if r.rows() != r.cols() || !r.rows().is_multiple_of(2) {
        return Err(PeriodError::ShapeMismatch(format!(
            "R is {}x{}, expected an even square matrix",
            r.rows(),
            r.cols()
        )));
    }
    let e = e_l0(r.rows() / 2);
    let e_inv = e.transpose();
    Ok(e_inv.mul(&r.transpose()).mul(&e))
}

/// `T⁻¹ A T` with `T = diag(√Im z_i)`.
pub fn rescale_basis(a: &DMatrix<C64>, cfg: &PeriodConfig) -> DMatrix<C64> {
    let n = cfg.n();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] * (cfg.z[j].im / cfg.z[i].im).sqrt())
}

fn close(x: &DMatrix<C64>, y: &DMatrix<C64>, tol: f64) -> bool {
    max_abs(&(x - y)) <= tol * 1f64.max(max_abs(x)).max(max_abs(y))
}

/// Whether `A` is fixed by the Rosati involution; asserts that this agrees
/// with the rescaled matrix being Hermitian.
pub fn verify_hermitian_criterion(
    pair: &EndoPair,
    cfg: &PeriodConfig,
    tol: f64,
) -> Result<bool, PeriodError> {
    check_shapes(pair, cfg.n())?;
    let symmetric = close(&rosati_analytic(&pair.a, cfg), &pair.a, tol);
    let scaled = rescale_basis(&pair.a, cfg);
    let hermitian = close(&scaled.adjoint(), &scaled, tol);
    assert_eq!(symmetric, hermitian, "Rosati-fixed and Hermitian tests disagree");
    Ok(symmetric)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    #[serde(with = "crate::bigjson")]
    pub det_r: BigInt,
    pub det_a_sq: f64,
    pub pass: bool,
}

/// Compares `det R` with `|det A|²`.
pub fn degree_checks(pair: &EndoPair, tol: f64) -> DegreeReport {
    let det_r = pair.r.det();
    let det_a_sq = pair.a.determinant().norm_sqr();
    let exact = det_r.to_f64().unwrap_or(f64::INFINITY);
    let pass = (exact - det_a_sq).abs() <= tol * 1f64.max(exact.abs());
    DegreeReport {
        det_r,
        det_a_sq,
        pass,
    }
}

/// The rational representation of an integer analytic matrix, by an exact
/// solve of `A Π = Π R` over `ℚ`. Fails unless `A Λ ⊆ Λ`.
pub fn rational_representation(a: &IntMatrix, cfg: &PeriodConfig) -> Result<IntMatrix, PeriodError> {
    let chain = cfg.chain.as_ref().ok_or(PeriodError::NotChain)?;
    let n = cfg.n();
    if a.rows() != n || a.cols() != n {
        return Err(PeriodError::ShapeMismatch(format!("A is {}x{}", a.rows(), a.cols())));
    }
    let q = |x: i64| BigRational::from_integer(BigInt::from(x));
    let zr: Vec<BigRational> = chain.degrees.iter().map(|&d| &chain.p * q(d as i64)).collect();
    let zi: Vec<BigRational> = chain.degrees.iter().map(|&d| &chain.q * q(d as i64)).collect();

    // real form of Π: rows (Re Π; Im Π)
    let m = 2 * n;
    let mut p = vec![BigRational::zero(); m * m];
    for i in 0..n {
        p[i * m + i] = BigRational::one();
        p[i * m + n + i] = zr[i].clone();
        p[(n + i) * m + n + i] = zi[i].clone();
    }
    // real form of A Π = (A | A Z)
    let mut rhs = vec![BigRational::zero(); m * m];
    for i in 0..n {
        for k in 0..n {
            let aik = q(a.get(i, k));
            rhs[i * m + k] = aik.clone();
            rhs[i * m + n + k] = &aik * &zr[k];
            rhs[(n + i) * m + n + k] = &aik * &zi[k];
        }
    }
    let sol = solve_exact(m, p, rhs);
    let mut r = IntMatrix::zeros(m, m);
    for (idx, x) in sol.into_iter().enumerate() {
        if !x.is_integer() {
            return Err(PeriodError::NotAnEndomorphism);
        }
        r.set(idx / m, idx % m, x.to_integer().to_i64().ok_or(PeriodError::NotAnEndomorphism)?);
    }
    Ok(r)
}

/// Solves `P X = B` for invertible `P` (all `m × m`, row-major).
fn solve_exact(m: usize, mut p: Vec<BigRational>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    for col in 0..m {
        let piv = (col..m).find(|&r| !p[r * m + col].is_zero()).expect("singular period matrix");
        if piv != col {
            for j in 0..m {
                p.swap(piv * m + j, col * m + j);
                b.swap(piv * m + j, col * m + j);
            }
        }
        let inv = p[col * m + col].recip();
        for j in 0..m {
            p[col * m + j] *= &inv;
            b[col * m + j] *= &inv;
        }
        for r in 0..m {
            if r == col || p[r * m + col].is_zero() {
                continue;
            }
            let f = p[r * m + col].clone();
            for j in 0..m {
                let t = &p[col * m + j] * &f;
                p[r * m + j] -= t;
                let t = &b[col * m + j] * &f;
                b[r * m + j] -= t;
            }
        }
    }
    b
}

/// The pair realizing a coefficient matrix on its chain configuration.
pub fn endo_pair_from(h: &HermEnd, cfg: &PeriodConfig) -> Result<EndoPair, PeriodError> {
    if cfg.chain_degrees() != Some(h.config().degrees()) {
        return Err(PeriodError::ShapeMismatch("configuration degrees differ".into()));
    }
    let n = h.n();
    let analytic: Vec<i64> = h
        .analytic_matrix()
        .iter()
        .map(|x| x.to_i64().expect("analytic entry out of range"))
        .collect();
    let a_int = IntMatrix::new(n, n, analytic);
    let r = rational_representation(&a_int, cfg)?;
    let pair = EndoPair {
        a: int_to_complex(&a_int),
        r,
    };
    assert!(
        endo_residual(&pair, cfg)? <= CONSTRUCTION_TOL,
        "constructed pair violates A Π = Π R"
    );
    Ok(pair)
}

/// A random endomorphism of a chain configuration with coefficients in
/// `[-bound, bound]`, returned with its coefficient matrix.
pub fn random_endo<R: Rng + ?Sized>(
    cfg: &PeriodConfig,
    bound: i64,
    rng: &mut R,
) -> Result<(HermEnd, EndoPair), PeriodError> {
    let degrees = cfg.chain_degrees().ok_or(PeriodError::NotChain)?;
    let config = IsogenyConfig::new(degrees).map_err(|e| PeriodError::ShapeMismatch(e.to_string()))?;
    let h = HermEnd::random(&config, bound, rng);
    let pair = endo_pair_from(&h, cfg)?;
    Ok((h, pair))
}

/// One named check in a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Worst residuals of the invariant checks over a batch of random trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub degrees: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Runs the invariant suite on `trials` random endomorphisms of the chain
/// configuration `degrees`. `tol` overrides the residual tolerance of the
/// analytic checks.
pub fn run_suite(degrees: &[u64], trials: usize, seed: u64, tol: Option<f64>) -> Result<SuiteReport, PeriodError> {
    use rand::SeedableRng;
    let cfg = PeriodConfig::standard_chain(degrees);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let endo_tol = tol.unwrap_or(CONSTRUCTION_TOL);
    let id_tol = tol.unwrap_or(IDENTITY_TOL);

    let mut worst = [0f64; 6];
    let mut failures = [0usize; 6];
    for trial in 0..trials {
        // alternate general and symmetric samples so both sides of the
        // Hermitian criterion are exercised
        let (h, pair) = if trial % 2 == 0 {
            random_endo(&cfg, 5, &mut rng)?
        } else {
            let degrees = cfg.chain_degrees().expect("chain");
            let config = IsogenyConfig::new(degrees).expect("valid degrees");
            let h = HermEnd::random_hermitian(&config, 5, &mut rng);
            let pair = endo_pair_from(&h, &cfg)?;
            (h, pair)
        };

        let eq2 = endo_residual(&pair, &cfg)?;
        let rosati = rosati_analytic(&pair.a, &cfg);
        let twice = rosati_analytic(&rosati, &cfg);
        let involution = max_abs(&(&twice - &pair.a));
        let rosati_pair = EndoPair {
            a: rosati.clone(),
            r: rosati_rational(&pair.r)?,
        };
        let consistency = endo_residual(&rosati_pair, &cfg)?;
        let reduction = max_abs(&(rescale_basis(&rosati, &cfg) - rescale_basis(&pair.a, &cfg).adjoint()));
        let criterion = verify_hermitian_criterion(&pair, &cfg, id_tol)?;
        let criterion_ok = criterion == h.is_hermitian();
        let degree = degree_checks(&pair, DET_REL_TOL);
        let degree_rel = {
            let exact = degree.det_r.to_f64().unwrap_or(f64::INFINITY);
            (exact - degree.det_a_sq).abs() / 1f64.max(exact.abs())
        };
        let polarization_ok = !h.is_polarization_rep() || degree.det_r.is_one();

        let values = [
            eq2,
            involution,
            consistency,
            reduction,
            if criterion_ok { 0.0 } else { 1.0 },
            if polarization_ok { degree_rel } else { f64::INFINITY },
        ];
        let tols = [endo_tol, id_tol, id_tol, id_tol, 0.0, DET_REL_TOL];
        for k in 0..6 {
            worst[k] = worst[k].max(values[k]);
            if values[k] > tols[k] || (k == 5 && !degree.pass) {
                failures[k] += 1;
            }
        }
    }

    let names = [
        "endomorphism_residual",
        "rosati_involution",
        "rosati_consistency",
        "rescaled_rosati_adjoint",
        "hermitian_criterion",
        "degree_determinant",
    ];
    let tols = [endo_tol, id_tol, id_tol, id_tol, 0.0, DET_REL_TOL];
    let checks: Vec<CheckResult> = (0..6)
        .map(|k| CheckResult {
            name: names[k].to_string(),
            residual: worst[k],
            tolerance: tols[k],
            pass: failures[k] == 0,
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        degrees: degrees.to_vec(),
        trials,
        seed,
        checks,
        pass,
    })
}
