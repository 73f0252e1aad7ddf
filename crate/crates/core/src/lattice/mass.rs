//! Exact masses of the unimodular genera.
//!
//! Every factor is a rational multiple of a power of `π`: the Gamma values,
//! the even zeta values and the Dirichlet beta values at odd arguments.
//! The powers cancel, and the exponent is tracked in quarters and checked.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A value `c · π^(q/4)`.
#[derive(Debug, Clone)]
struct PiMonomial {
    c: BigRational,
    q: i64,
}

impl PiMonomial {
    fn rational(c: BigRational) -> Self {
        Self { c, q: 0 }
    }

    fn mul(mut self, other: PiMonomial) -> Self {
        self.c *= other.c;
        self.q += other.q;
        self
    }

    fn into_rational(self) -> BigRational {
        assert_eq!(self.q, 0, "powers of pi do not cancel");
        self.c
    }
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn pow2(e: i64) -> BigRational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Bernoulli numbers `B_0..=B_m` with `B_1 = -1/2`.
fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for k in 1..=m {
        let mut s = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binomial(BigInt::from(k + 1), BigInt::from(j))) * bj;
        }
        b.push(-s / int(k as i64 + 1));
    }
    b
}

/// Euler number `E_m` (zero for odd `m`).
fn euler(m: usize) -> BigInt {
    if m % 2 == 1 {
        return BigInt::zero();
    }
    let mut e: Vec<BigInt> = vec![BigInt::one()];
    for k in 1..=m / 2 {
        let mut s = BigInt::zero();
        for (j, ej) in e.iter().enumerate() {
            s += binomial(BigInt::from(2 * k), BigInt::from(2 * j)) * ej;
        }
        e.push(-s);
    }
    e[m / 2].clone()
}

/// `Γ(j/2)`.
fn gamma_half(j: u64) -> PiMonomial {
    if j.is_multiple_of(2) {
        PiMonomial::rational(BigRational::from_integer(factorial(j / 2 - 1)))
    } else {
        // Γ(k + 1/2) = (2k)! / (4^k k!) · √π
        let k = (j - 1) / 2;
        let num = factorial(2 * k);
        let den = (BigInt::one() << (2 * k)) * factorial(k);
        PiMonomial {
            c: BigRational::new(num, den),
            q: 2,
        }
    }
}

/// `ζ(2i)`.
fn zeta_even(i: u64, bern: &[BigRational]) -> PiMonomial {
    let b = bern[2 * i as usize].abs();
    let c = b * pow2(2 * i as i64 - 1) / BigRational::from_integer(factorial(2 * i));
    PiMonomial { c, q: 8 * i as i64 }
}

/// Dirichlet beta `β(s)` for odd `s`.
fn beta_odd(s: u64) -> PiMonomial {
    let e = euler((s - 1) as usize).abs();
    let den = (BigInt::one() << (s + 1)) * factorial(s - 1);
    PiMonomial {
        c: BigRational::new(e, den),
        q: 4 * s as i64,
    }
}

/// The common factor `4 π^{-n(n+1)/4} ∏ Γ(j/2) ∏ ζ(2i)(1 - 2^{-2i})`, times the
/// extra `L`-value when `n` is even.
fn standard_mass(n: u64) -> BigRational {
    let bern = bernoulli(n as usize + 2);
    let mut acc = PiMonomial {
        c: int(4),
        q: -((n * (n + 1)) as i64),
    };
    for j in 1..=n {
        acc = acc.mul(gamma_half(j));
    }
    let s = n / 2;
    let top = if n.is_multiple_of(2) { s.saturating_sub(1) } else { s };
    for i in 1..=top {
        let factor = BigRational::one() - pow2(-2 * i as i64);
        acc = acc.mul(zeta_even(i, &bern)).mul(PiMonomial::rational(factor));
    }
    if n.is_multiple_of(2) && s > 0 {
        if s.is_multiple_of(2) {
            let factor = BigRational::one() - pow2(-(s as i64));
            acc = acc.mul(zeta_even(s / 2, &bern)).mul(PiMonomial::rational(factor));
        } else {
            acc = acc.mul(beta_odd(s));
        }
    }
    acc.into_rational()
}

/// Local factor at 2 for a form of dimension `t`; `sign` is ignored for odd `t`.
fn species_factor(t: u64, plus: bool) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if t == 0 {
        return half;
    }
    let k = t / 2;
    let mut den = int(2);
    if t % 2 == 1 {
        for i in 1..=k {
            den *= BigRational::one() - pow2(-2 * i as i64);
        }
    } else {
        for i in 1..k {
            den *= BigRational::one() - pow2(-2 * i as i64);
        }
        let last = pow2(-(k as i64));
        den *= if plus {
            BigRational::one() - last
        } else {
            BigRational::one() + last
        };
    }
    den.recip()
}

/// Mass `Σ 1/|Aut L|` of the odd unimodular lattices of rank `n`.
pub fn mass_odd_unimodular(n: u64) -> BigRational {
    assert!(n >= 1, "rank must be positive");
    let (t, plus) = match n % 8 {
        0 => (n - 2, true),
        4 => (n - 2, false),
        2 | 6 => (n - 1, true),
        1 | 7 => (n - 1, true),
        _ => (n - 1, false),
    };
    standard_mass(n) * species_factor(t, plus) / int(4)
}

/// Mass of the even unimodular lattices of rank `n` (zero unless `8 | n`).
pub fn mass_even_unimodular(n: u64) -> BigRational {
    assert!(n >= 1, "rank must be positive");
    if !n.is_multiple_of(8) {
        return BigRational::zero();
    }
    standard_mass(n) * species_factor(n, true) * pow2(-(n as i64))
}

/// Total mass of all positive-definite unimodular lattices of rank `n`.
pub fn mass_unimodular(n: u64) -> BigRational {
    mass_odd_unimodular(n) + mass_even_unimodular(n)
}
