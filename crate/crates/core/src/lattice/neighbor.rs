//! Kneser 2-neighbors of unimodular lattices.
//!
//! For `v ∈ L \ 2L` with `(v, v) ≡ 0 (mod 4)`, the neighbor is
//! `M = L_v + ℤ·v/2` where `L_v = {x ∈ L : (x, v) even}`. The vectors `v`
//! and `v + 2e_k`, with `(v, e_k)` odd, give the two distinct neighbors that
//! share `L_v`, so scanning `v ∈ {0,1}ⁿ` and taking both reaches every
//! 2-neighbor.

use super::{GramLattice, LatticeError};
use crate::linalg::IntMatrix;

/// The 2-neighbor of `lattice` at `v`, or `None` if `v` is not admissible
/// (`v ∈ 2L` or `(v, v) ≢ 0 mod 4`).
pub fn neighbor_at(lattice: &GramLattice, v: &[i64]) -> Result<Option<GramLattice>, LatticeError> {
    lattice.ensure_unimodular()?;
    if v.len() != lattice.rank() {
        return Err(LatticeError::RankMismatch(lattice.rank(), v.len()));
    }
    Ok(neighbor_unchecked(lattice, v).map(|(m, _)| m))
}

/// Neighbor Gram matrix and the index `k` used to build it.
pub(crate) fn neighbor_unchecked(lattice: &GramLattice, v: &[i64]) -> Option<(GramLattice, usize)> {
    let n = lattice.rank();
    if lattice.norm(v).rem_euclid(4) != 0 {
        return None;
    }
    let u: Vec<i64> = lattice.apply(v).iter().map(|x| x.rem_euclid(2)).collect();
    let k = u.iter().position(|&x| x == 1)?;

    // basis of L_v: b_i = e_i - u_i e_k (i != k), b_k = 2 e_k
    let mut b = IntMatrix::zeros(n, n);
    for i in 0..n {
        if i == k {
            b.set(k, k, 2);
        } else {
            b.set(i, i, 1);
            b.set(k, i, -u[i]);
        }
    }
    // coordinates of v in that basis
    let mut a: Vec<i64> = v.to_vec();
    let s: i64 = v[k] + (0..n).filter(|&i| i != k).map(|i| v[i] * u[i]).sum::<i64>();
    debug_assert_eq!(s.rem_euclid(2), 0);
    a[k] = s / 2;
    let m = a.iter().position(|x| x.rem_euclid(2) == 1)?;

    // twice a basis of M: 2 b_j (j != m) and the sum of b_j over odd a_j
    let mut basis = IntMatrix::zeros(n, n);
    for j in 0..n {
        for r in 0..n {
            let val = if j == m {
                (0..n)
                    .filter(|&t| a[t].rem_euclid(2) == 1)
                    .map(|t| b.get(r, t))
                    .sum()
            } else {
                2 * b.get(r, j)
            };
            basis.set(r, j, val);
        }
    }
    let g4 = basis.congruence(&lattice.matrix());
    let mut g = Vec::with_capacity(n * n);
    for &x in g4.data() {
        assert_eq!(x % 4, 0, "neighbor Gram matrix is not integral");
        g.push(x / 4);
    }
    let out = GramLattice::new(n, g).expect("neighbor is not positive definite");
    assert!(out.is_unimodular(), "neighbor is not unimodular");
    Some((out, k))
}

/// Both neighbors sharing `L_v` for a 0/1 vector `v`.
pub(crate) fn neighbor_pair(lattice: &GramLattice, v: &[i64]) -> Option<[GramLattice; 2]> {
    let (first, k) = neighbor_unchecked(lattice, v)?;
    let mut w = v.to_vec();
    w[k] += 2;
    let (second, _) = neighbor_unchecked(lattice, &w).expect("shifted vector stays admissible");
    Some([first, second])
}

/// A characteristic vector (`(c, x) ≡ (x, x) mod 2` for all `x`) with 0/1
/// entries, or `None` for even lattices where it is zero.
pub(crate) fn characteristic_vector(lattice: &GramLattice) -> Option<Vec<i64>> {
    let n = lattice.rank();
    // solve G c = diag(G) over GF(2); G is invertible mod 2 when unimodular
    let mut rows: Vec<(Vec<u8>, u8)> = (0..n)
        .map(|i| {
            let row = (0..n).map(|j| lattice.get(i, j).rem_euclid(2) as u8).collect();
            (row, lattice.get(i, i).rem_euclid(2) as u8)
        })
        .collect();
    if rows.iter().all(|(_, d)| *d == 0) {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| rows[r].0[col] == 1)?;
        rows.swap(col, piv);
        let (prow, prhs) = rows[col].clone();
        for (r, (row, rhs)) in rows.iter_mut().enumerate() {
            if r != col && row[col] == 1 {
                row.iter_mut().zip(&prow).for_each(|(a, b)| *a ^= b);
                *rhs ^= prhs;
            }
        }
    }
    Some(rows.into_iter().map(|(_, rhs)| rhs as i64).collect())
}

pub(crate) fn bits_to_vec(bits: u64, n: usize) -> Vec<i64> {
    (0..n).map(|i| ((bits >> i) & 1) as i64).collect()
}

/// All 2-neighbors of a unimodular lattice, two per admissible class of
/// `v mod 2L`, in increasing order of `v` read as a bit string.
pub fn two_neighbors(lattice: &GramLattice) -> Result<Vec<GramLattice>, LatticeError> {
    lattice.ensure_unimodular()?;
    let n = lattice.rank();
    assert!(n < 63, "rank too large for exhaustive neighbor listing");
    let mut out = Vec::new();
    for bits in 1u64..(1u64 << n) {
        if let Some(pair) = neighbor_pair(lattice, &bits_to_vec(bits, n)) {
            out.extend(pair);
        }
    }
    Ok(out)
}

/// A seeded bijection of `[0, 2ⁿ)` used to scan neighbor vectors in a
/// scrambled but reproducible order.
#[derive(Debug, Clone)]
pub(crate) struct BitScrambler {
    n: u32,
    mask: u64,
    mult: [u64; 3],
    add: [u64; 3],
}

impl BitScrambler {
    pub fn new(n: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
        let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self {
            n: n as u32,
            mask,
            mult: std::array::from_fn(|_| rng.gen::<u64>() | 1),
            add: std::array::from_fn(|_| rng.gen::<u64>()),
        }
    }

    pub fn apply(&self, mut x: u64) -> u64 {
        let shift = (self.n / 2).max(1);
        for r in 0..3 {
            x = x.wrapping_mul(self.mult[r]).wrapping_add(self.add[r]) & self.mask;
            x ^= x >> shift;
        }
        x
    }
}
