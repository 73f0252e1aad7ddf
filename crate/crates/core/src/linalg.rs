//! Small dense integer matrices and exact determinant routines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Row-major `rows × cols` matrix of `i64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; `None` if the rows are ragged.
    pub fn from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        Some(Self::new(rows.len(), cols, rows.concat()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product; panics on shape mismatch or `i64` overflow.
    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = out.data[idx]
                        .checked_add(a.checked_mul(rhs.get(k, j)).expect("overflow"))
                        .expect("overflow");
                }
            }
        }
        out
    }

    /// `selfᵗ · g · self`.
    pub fn congruence(&self, g: &IntMatrix) -> IntMatrix {
        self.transpose().mul(&g.mul(self))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_bigint(&self) -> Vec<BigInt> {
        self.data.iter().map(|&x| BigInt::from(x)).collect()
    }

    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        det_bigint(self.rows, self.to_bigint())
    }

    /// Multiply vector `v` (length `cols`) by this matrix.
    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn det_bigint(n: usize, mut m: Vec<BigInt>) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k * n + k].is_zero() {
            match (k + 1..n).find(|&r| !m[r * n + k].is_zero()) {
                Some(r) => {
                    for j in 0..n {
                        m.swap(k * n + j, r * n + j);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                m[i * n + j] = v / &prev;
            }
        }
        prev = m[k * n + k].clone();
    }
    sign * &m[n * n - 1]
}

/// Leading principal minors `Δ₁, …, Δ_k` computed by Bareiss elimination
/// without pivoting. Stops (returning the minors so far, the last one zero)
/// at the first vanishing minor.
pub fn leading_minors(n: usize, mut m: Vec<BigInt>) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = m[k * n + k].clone();
        out.push(pivot.clone());
        if pivot.is_zero() {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i * n + j] * &pivot - &m[i * n + k] * &m[k * n + j];
                m[i * n + j] = v / &prev;
            }
        }
        prev = pivot;
    }
    out
}

/// Adjugate and determinant of a square integer matrix (`adj · m = det · I`).
pub fn adjugate(m: &IntMatrix) -> (Vec<BigInt>, BigInt) {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let det = m.det();
    if det.is_zero() {
        return (vec![BigInt::zero(); n * n], det);
    }
    // Gauss-Jordan over ℚ on [m | I]
    let mut a: Vec<BigRational> = m.data().iter().map(|&x| BigRational::from_integer(x.into())).collect();
    let mut inv: Vec<BigRational> = IntMatrix::identity(n)
        .data()
        .iter()
        .map(|&x| BigRational::from_integer(x.into()))
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r * n + col].is_zero()).expect("singular");
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
        }
        let p = a[col * n + col].clone();
        for j in 0..n {
            a[col * n + j] = &a[col * n + j] / &p;
            inv[col * n + j] = &inv[col * n + j] / &p;
        }
        for r in 0..n {
            if r == col || a[r * n + col].is_zero() {
                continue;
            }
            let q = a[r * n + col].clone();
            for j in 0..n {
                let t = &a[col * n + j] * &q;
                a[r * n + j] -= t;
                let t = &inv[col * n + j] * &q;
                inv[r * n + j] -= t;
            }
        }
    }
    let detq = BigRational::from_integer(det.clone());
    let adj = inv
        .into_iter()
        .map(|x| {
            let y = x * &detq;
            debug_assert!(y.is_integer());
            y.to_integer()
        })
        .collect();
    (adj, det)
}

/// Incremental linear-independence tracker over ℚ using primitive integer rows.
#[derive(Debug, Clone, Default)]
pub(crate) struct Echelon {
    rows: Vec<(usize, Vec<i128>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[i64]) -> Vec<i128> {
        let mut x: Vec<i128> = v.iter().map(|&a| a as i128).collect();
        for (p, row) in &self.rows {
            if x[*p] != 0 {
                let a = row[*p];
                let b = x[*p];
                for (xi, ri) in x.iter_mut().zip(row) {
                    *xi = *xi * a - b * ri;
                }
                normalize(&mut x);
            }
        }
        x
    }

    pub fn is_independent(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().any(|&a| a != 0)
    }

    /// Adds `v` if it is independent of the current rows; returns whether it was added.
    pub fn insert(&mut self, v: &[i64]) -> bool {
        let x = self.reduce(v);
        match x.iter().position(|&a| a != 0) {
            Some(p) => {
                self.rows.push((p, x));
                true
            }
            None => false,
        }
    }
}

fn normalize(x: &mut [i128]) {
    let g = x.iter().fold(0i128, |g, &a| g.gcd(&a));
    if g > 1 {
        for a in x.iter_mut() {
            *a /= g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinants() {
        let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(m.det(), BigInt::from(1));
        let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 3]]).unwrap();
        assert_eq!(m.det(), BigInt::from(-3));
        let m = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(m.det(), BigInt::from(0));
    }

    #[test]
    fn minors_of_identity_like() {
        let g = IntMatrix::from_rows(&[vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]).unwrap();
        let mins = leading_minors(3, g.to_bigint());
        assert_eq!(mins, vec![BigInt::from(2), BigInt::from(3), BigInt::from(4)]);
    }

    #[test]
    fn adjugate_inverts() {
        let m = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]).unwrap();
        let (adj, det) = adjugate(&m);
        for i in 0..3 {
            for j in 0..3 {
                let s: BigInt = (0..3)
                    .map(|k| &adj[i * 3 + k] * BigInt::from(m.get(k, j)))
                    .sum();
                let want = if i == j { det.clone() } else { BigInt::zero() };
                assert_eq!(s, want);
            }
        }
    }

    #[test]
    fn echelon_tracks_rank() {
        let mut e = Echelon::new();
        assert!(e.insert(&[1, 1, 0]));
        assert!(e.insert(&[1, -1, 0]));
        assert!(!e.is_independent(&[3, 5, 0]));
        assert!(e.insert(&[0, 0, 2]));
        assert_eq!(e.rank(), 3);
    }
}
