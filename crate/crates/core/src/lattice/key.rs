//! Cheap isometry invariants used to bucket lattices before full tests.

use super::enumerate::short_vectors;
use super::lll::lll_reduce;
use super::{GramLattice, Parity};

/// Norm bound for the short-vector histogram in [`canonical_key`].
pub const KEY_NORM_BOUND: i64 = 4;

/// Determinant, parity and the counts of vectors of each norm up to
/// [`KEY_NORM_BOUND`], packed into bytes. Isometric lattices get equal keys.
pub fn canonical_key(lattice: &GramLattice) -> Vec<u8> {
    let (reduced, _) = lll_reduce(lattice);
    let mut counts = [0u64; KEY_NORM_BOUND as usize + 1];
    let vecs = short_vectors(&reduced, KEY_NORM_BOUND).expect("lattice is positive definite");
    for (_, norm) in vecs {
        counts[norm as usize] += 1;
    }
    let det = lattice.det().to_signed_bytes_le();
    let mut out = Vec::with_capacity(16 + det.len() + 8 * counts.len());
    out.extend((lattice.rank() as u64).to_le_bytes());
    out.extend((det.len() as u64).to_le_bytes());
    out.extend(det);
    out.push(match lattice.parity() {
        Parity::Even => 0,
        Parity::Odd => 1,
    });
    for c in &counts[1..] {
        out.extend(c.to_le_bytes());
    }
    out
}

/// [`canonical_key`] followed by the sorted component sizes of the graph on
/// vectors of norm at most 2 (both signs) joined by nonzero inner products.
/// This separates lattices such as `E₈ ⊕ E₈` and `D₁₆⁺` whose norm
/// histograms agree.
pub(crate) fn refined_key(lattice: &GramLattice) -> Vec<u8> {
    let (reduced, _) = lll_reduce(lattice);
    let mut out = canonical_key(&reduced);
    let vecs = super::enumerate::short_vectors_signed(&reduced, 2);
    let gv: Vec<Vec<i64>> = vecs.iter().map(|(v, _)| reduced.apply(v)).collect();
    let m = vecs.len();
    let mut comp = vec![usize::MAX; m];
    let mut sizes = Vec::new();
    for s in 0..m {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        let mut stack = vec![s];
        let mut size = 0u64;
        while let Some(x) = stack.pop() {
            size += 1;
            for y in 0..m {
                if comp[y] == usize::MAX && vecs[y].0.iter().zip(&gv[x]).map(|(a, b)| a * b).sum::<i64>() != 0 {
                    comp[y] = id;
                    stack.push(y);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    for s in sizes {
        out.extend(s.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;

    #[test]
    fn keys_separate_parity() {
        assert_ne!(
            canonical_key(&GramLattice::identity(8)),
            canonical_key(&GramLattice::e8())
        );
        assert_eq!(
            canonical_key(&GramLattice::identity(4)),
            canonical_key(&GramLattice::identity(4))
        );
    }

    #[test]
    fn keys_survive_basis_change() {
        let e8 = GramLattice::e8();
        let mut u = IntMatrix::identity(8);
        u.set(0, 5, 3);
        u.set(6, 2, -2);
        u.set(3, 7, 1);
        let moved = e8.transform(&u).unwrap();
        assert_eq!(canonical_key(&e8), canonical_key(&moved));
        assert_eq!(refined_key(&e8), refined_key(&moved));
    }
}
