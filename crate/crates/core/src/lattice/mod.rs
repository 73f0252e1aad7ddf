//! Positive-definite integral lattices given by Gram matrices, and the
//! classification of unimodular ones up to isometry.

mod classify;
mod enumerate;
mod isometry;
mod key;
mod lll;
mod mass;
mod neighbor;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::linalg::{leading_minors, IntMatrix};

pub use classify::{class_number_h, classify_unimodular, ClassEntry, ClassifyOptions, GenusClassification};
pub use enumerate::short_vectors;
pub use isometry::{aut_order, is_isometric, IsometryWitness};
pub use key::canonical_key;
pub use lll::lll_reduce;
pub use mass::{mass_even_unimodular, mass_odd_unimodular, mass_unimodular};
pub use neighbor::{neighbor_at, two_neighbors};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("expected {expected} entries for rank {rank}, got {got}")]
    Shape { rank: usize, expected: usize, got: usize },
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("lattice has determinant {0}, expected 1")]
    NotUnimodular(BigInt),
    #[error("ranks differ: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("time budget exceeded")]
    TimeBudgetExceeded,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Even (type II) or odd (type I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Symmetric positive-definite integer Gram matrix of a lattice basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "GramJson", into = "GramJson")]
pub struct GramLattice {
    n: usize,
    g: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct GramJson {
    n: usize,
    g: Vec<Vec<i64>>,
}

impl TryFrom<GramJson> for GramLattice {
    type Error = LatticeError;
    fn try_from(j: GramJson) -> Result<Self, LatticeError> {
        if j.g.len() != j.n {
            return Err(LatticeError::Shape {
                rank: j.n,
                expected: j.n * j.n,
                got: j.g.iter().map(Vec::len).sum(),
            });
        }
        GramLattice::new(j.n, j.g.concat())
    }
}

impl From<GramLattice> for GramJson {
    fn from(l: GramLattice) -> Self {
        GramJson {
            n: l.n,
            g: l.rows(),
        }
    }
}

impl GramLattice {
    /// Validates symmetry and positive definiteness (exact leading minors).
    pub fn new(n: usize, g: Vec<i64>) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::ZeroRank);
        }
        if g.len() != n * n {
            return Err(LatticeError::Shape {
                rank: n,
                expected: n * n,
                got: g.len(),
            });
        }
        let l = Self { n, g };
        if !l.matrix().is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        let minors = leading_minors(n, l.matrix().to_bigint());
        if minors.len() < n || minors.iter().any(|m| !m.is_positive()) {
            return Err(LatticeError::NotPositiveDefinite);
        }
        Ok(l)
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, LatticeError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LatticeError::Shape {
                rank: n,
                expected: n * n,
                got: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn from_matrix(m: &IntMatrix) -> Result<Self, LatticeError> {
        if m.rows() != m.cols() {
            return Err(LatticeError::Shape {
                rank: m.rows(),
                expected: m.rows() * m.rows(),
                got: m.data().len(),
            });
        }
        Self::new(m.rows(), m.data().to_vec())
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(n: usize, g: Vec<i64>) -> Self {
        debug_assert!(Self::new(n, g.clone()).is_ok());
        Self { n, g }
    }

    /// The standard lattice `ℤⁿ`.
    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(n, IntMatrix::identity(n).data().to_vec())
    }

    /// Gram matrix of `E₈` in the basis of simple roots.
    pub fn e8() -> Self {
        // Dynkin diagram: chain 0-1-2-3-4-5-6 with node 7 attached to node 4
        let mut g = vec![0i64; 64];
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
        for i in 0..8 {
            g[i * 8 + i] = 2;
        }
        for (a, b) in edges {
            g[a * 8 + b] = -1;
            g[b * 8 + a] = -1;
        }
        Self::new_unchecked(8, g)
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &GramLattice) -> GramLattice {
        let n = self.n + other.n;
        let mut g = vec![0; n * n];
        for i in 0..self.n {
            for j in 0..self.n {
                g[i * n + j] = self.get(i, j);
            }
        }
        for i in 0..other.n {
            for j in 0..other.n {
                g[(self.n + i) * n + self.n + j] = other.get(i, j);
            }
        }
        Self::new_unchecked(n, g)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.g[i * self.n + j]
    }

    pub fn entries(&self) -> &[i64] {
        &self.g
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.g.chunks(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn matrix(&self) -> IntMatrix {
        IntMatrix::new(self.n, self.n, self.g.clone())
    }

    pub fn det(&self) -> BigInt {
        self.matrix().det()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().is_one()
    }

    pub(crate) fn ensure_unimodular(&self) -> Result<(), LatticeError> {
        let d = self.det();
        if d.is_one() {
            Ok(())
        } else {
            Err(LatticeError::NotUnimodular(d))
        }
    }

    /// Even iff every diagonal entry is even.
    pub fn parity(&self) -> Parity {
        if (0..self.n).all(|i| self.get(i, i) % 2 == 0) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// `vᵗ G v`.
    pub fn norm(&self, v: &[i64]) -> i64 {
        self.inner(v, v)
    }

    pub fn inner(&self, u: &[i64], v: &[i64]) -> i64 {
        let n = self.n;
        let mut s = 0i64;
        for i in 0..n {
            if u[i] == 0 {
                continue;
            }
            let row = &self.g[i * n..(i + 1) * n];
            let t: i64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            s += u[i] * t;
        }
        s
    }

    /// `G v`.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.g
            .chunks(self.n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Gram matrix `Uᵗ G U` of the basis given by the columns of `u`.
    /// Fails unless `u` is square of full rank.
    pub fn transform(&self, u: &IntMatrix) -> Result<GramLattice, LatticeError> {
        if u.rows() != self.n || u.cols() != self.n {
            return Err(LatticeError::RankMismatch(self.n, u.rows()));
        }
        GramLattice::from_matrix(&u.congruence(&self.matrix()))
    }

    /// Whitespace-separated text: first the rank, then the `n²` entries row by row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.g.chunks(self.n) {
            let line: Vec<String> = row.iter().map(i64::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, LatticeError> {
        let mut toks = text.split_whitespace();
        let n: usize = toks
            .next()
            .ok_or_else(|| LatticeError::Parse("empty input".into()))?
            .parse()
            .map_err(|e| LatticeError::Parse(format!("rank: {e}")))?;
        let g = toks
            .map(|t| t.parse::<i64>().map_err(|e| LatticeError::Parse(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, g)
    }
}

impl FromStr for GramLattice {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_text(s)
    }
}

impl fmt::Display for GramLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GramLattice::new(0, vec![]).is_err());
        assert_eq!(
            GramLattice::new(2, vec![1, 1, 0, 1]),
            Err(LatticeError::NotSymmetric)
        );
        assert_eq!(
            GramLattice::new(2, vec![1, 2, 2, 1]),
            Err(LatticeError::NotPositiveDefinite)
        );
        assert!(GramLattice::new(2, vec![2, 1, 1, 1]).is_ok());
    }

    #[test]
    fn e8_is_even_unimodular() {
        let e8 = GramLattice::e8();
        assert!(e8.is_unimodular());
        assert_eq!(e8.parity(), Parity::Even);
        assert_eq!(GramLattice::identity(5).parity(), Parity::Odd);
        let d = GramLattice::from_rows(&[vec![1, 0], vec![0, 2]]).unwrap();
        assert_eq!(d.parity(), Parity::Odd);
    }

    #[test]
    fn text_and_json_formats() {
        let l = GramLattice::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert_eq!(l.to_text(), "2\n2 1\n1 1\n");
        assert_eq!(GramLattice::from_text(&l.to_text()).unwrap(), l);
        let j = serde_json::to_string(&l).unwrap();
        assert_eq!(j, r#"{"n":2,"g":[[2,1],[1,1]]}"#);
        assert_eq!(serde_json::from_str::<GramLattice>(&j).unwrap(), l);
        assert!(serde_json::from_str::<GramLattice>(r#"{"n":2,"g":[[1,2],[2,1]]}"#).is_err());
        assert!(GramLattice::from_text("2\n1 0 0").is_err());
    }
}
