//! Isometry testing and automorphism group orders by backtracking over
//! images of a fixed set of short basis vectors.
//!
//! The search picks `n` linearly independent short vectors `b₁…bₙ` of the
//! source lattice, ordered so that each has few candidate images given the
//! previous ones. An isometry is determined by the images `w₁…wₙ`, which must
//! reproduce every inner product `(bᵢ, bⱼ)`. Two pruning devices keep the
//! tree small:
//!
//! * candidate counts for every deeper level must match the source's counts;
//! * the multiset of inner-product profiles of all vectors up to a norm at
//!   which they generate the lattice must match the source's multiset.
//!
//! Automorphism orders come from a stabilizer chain: the orbit of `bᵢ` under
//! the pointwise stabilizer of `b₁…bᵢ₋₁` is built level by level from the
//! bottom up, and `|Aut| = ∏ |orbitᵢ|`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::enumerate::short_vectors_signed;
use super::lll::lll_reduce;
use super::{GramLattice, LatticeError};
use crate::linalg::{adjugate, Echelon, IntMatrix};

/// A change of basis `U` with `Uᵗ G₁ U = G₂`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryWitness {
    pub u: IntMatrix,
}

impl IsometryWitness {
    /// Checks `Uᵗ G₁ U = G₂` exactly.
    pub fn verifies(&self, from: &GramLattice, to: &GramLattice) -> bool {
        self.u.rows() == from.rank()
            && self.u.cols() == to.rank()
            && self.u.congruence(&from.matrix()) == to.matrix()
    }
}

/// All nonzero vectors of a lattice up to some norm, with both signs,
/// stored in the coordinates of the lattice's own basis.
#[derive(Debug, Clone)]
pub(crate) struct VectorSet {
    n: usize,
    coords: Vec<i64>,
    gcoords: Vec<i64>,
    norms: Vec<i64>,
    index: HashMap<Vec<i64>, u32>,
    bound: i64,
}

impl VectorSet {
    /// Enumerates on an LLL-reduced basis and maps back.
    pub fn new(lattice: &GramLattice, bound: i64) -> Self {
        let (reduced, u) = lll_reduce(lattice);
        let mut vecs: Vec<(Vec<i64>, i64)> = short_vectors_signed(&reduced, bound)
            .into_iter()
            .map(|(v, norm)| (u.mul_vec(&v), norm))
            .collect();
        vecs.sort_by(|(a, na), (b, nb)| na.cmp(nb).then_with(|| b.cmp(a)));
        Self::from_sorted(lattice, vecs, bound)
    }

    fn from_sorted(lattice: &GramLattice, vecs: Vec<(Vec<i64>, i64)>, bound: i64) -> Self {
        let n = lattice.rank();
        let mut coords = Vec::with_capacity(vecs.len() * n);
        let mut gcoords = Vec::with_capacity(vecs.len() * n);
        let mut norms = Vec::with_capacity(vecs.len());
        let mut index = HashMap::with_capacity(vecs.len());
        for (i, (v, norm)) in vecs.into_iter().enumerate() {
            gcoords.extend(lattice.apply(&v));
            coords.extend_from_slice(&v);
            norms.push(norm);
            index.insert(v, i as u32);
        }
        Self {
            n,
            coords,
            gcoords,
            norms,
            index,
            bound,
        }
    }

    /// The subset of vectors with norm at most `bound`.
    pub fn restrict(&self, lattice: &GramLattice, bound: i64) -> Self {
        let vecs: Vec<(Vec<i64>, i64)> = (0..self.len())
            .filter(|&i| self.norms[i] <= bound)
            .map(|i| (self.vec(i).to_vec(), self.norms[i]))
            .collect();
        Self::from_sorted(lattice, vecs, bound.min(self.bound))
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    #[inline]
    pub fn vec(&self, i: usize) -> &[i64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn norm(&self, i: usize) -> i64 {
        self.norms[i]
    }

    pub fn norms(&self) -> &[i64] {
        &self.norms
    }

    /// Inner product of vectors `a` and `b` of this set.
    #[inline]
    pub fn ip(&self, a: usize, b: usize) -> i64 {
        let x = &self.coords[a * self.n..(a + 1) * self.n];
        let y = &self.gcoords[b * self.n..(b + 1) * self.n];
        x.iter().zip(y).map(|(p, q)| p * q).sum()
    }

    pub fn find(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).map(|&i| i as usize)
    }
}

#[inline]
fn mix(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51afd7ed558ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ceb9fe1a85ec53);
    h ^ (h >> 33)
}

#[inline]
fn extend_hash(h: u64, ip: i64) -> u64 {
    mix(h ^ (ip as u64).wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x632be59bd9b4e019))
}

#[inline]
fn norm_hash(norm: i64) -> u64 {
    mix(norm as u64 ^ 0x5851f42d4c957f2d)
}

/// Source-side data for isometry searches from one lattice.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    lattice: GramLattice,
    vecs: VectorSet,
    check_bound: i64,
    basis: Vec<u32>,
    gram: Vec<i64>,
    adj: Vec<i128>,
    det_v: i128,
    ref_counts: Vec<Vec<u32>>,
    ref_hist: Vec<Vec<u64>>,
}

impl Prepared {
    pub fn new(lattice: &GramLattice) -> Self {
        let n = lattice.rank();
        let (span_bound, check_bound) = generating_bounds(lattice);
        let vecs = VectorSet::new(lattice, check_bound);
        let basis = choose_basis(&vecs, span_bound, n);
        let mut gram = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] = vecs.ip(basis[i] as usize, basis[j] as usize);
            }
        }
        let mut v = IntMatrix::zeros(n, n);
        for (k, &b) in basis.iter().enumerate() {
            for (r, &x) in vecs.vec(b as usize).iter().enumerate() {
                v.set(r, k, x);
            }
        }
        let (adj, det) = adjugate(&v);
        let adj = adj.iter().map(|x| x.to_i128().expect("adjugate overflow")).collect();
        let det_v = det.to_i128().expect("determinant overflow");

        // candidate counts per level, with the identity as partial assignment
        let mut ref_counts = vec![vec![0u32; n]; n + 1];
        let mut lists: Vec<Vec<u32>> = (0..n)
            .map(|l| {
                (0..vecs.len() as u32)
                    .filter(|&x| vecs.norm(x as usize) == gram[l * n + l])
                    .collect()
            })
            .collect();
        for j in 0..=n {
            for l in j..n {
                ref_counts[j][l] = lists[l].len() as u32;
            }
            if j == n {
                break;
            }
            let b = basis[j] as usize;
            for l in j + 1..n {
                let target = gram[l * n + j];
                lists[l].retain(|&x| vecs.ip(x as usize, b) == target);
            }
        }

        let mut hashes: Vec<u64> = vecs.norms().iter().map(|&m| norm_hash(m)).collect();
        let mut ref_hist = Vec::with_capacity(n);
        for j in 0..n {
            let mut h = hashes.clone();
            h.sort_unstable();
            ref_hist.push(h);
            let b = basis[j] as usize;
            for (x, hx) in hashes.iter_mut().enumerate() {
                *hx = extend_hash(*hx, vecs.ip(x, b));
            }
        }

        Self {
            lattice: lattice.clone(),
            vecs,
            check_bound,
            basis,
            gram,
            adj,
            det_v,
            ref_counts,
            ref_hist,
        }
    }

    /// Norm up to which a target's vectors must be supplied.
    pub fn check_bound(&self) -> i64 {
        self.check_bound
    }
}

/// Smallest norms at which short vectors span `ℚⁿ` and generate the lattice.
fn generating_bounds(lattice: &GramLattice) -> (i64, i64) {
    let n = lattice.rank();
    let (reduced, _) = lll_reduce(lattice);
    // the reduced basis itself generates, so its largest norm is a safe cap
    let max_diag = (0..n).map(|i| reduced.get(i, i)).max().unwrap_or(1);
    let mut span_bound = None;
    let mut bound = 1;
    loop {
        let vecs = short_vectors_signed(&reduced, bound);
        if span_bound.is_none() {
            let mut ech = Echelon::new();
            for (v, _) in &vecs {
                if ech.insert(v) && ech.rank() == n {
                    break;
                }
            }
            if ech.rank() == n {
                span_bound = Some(bound);
            }
        }
        if let Some(s) = span_bound {
            if generates(n, vecs.iter().map(|(v, _)| v.as_slice())) || bound >= max_diag {
                return (s, bound);
            }
        }
        bound += 1;
    }
}

/// Whether the given integer vectors generate `ℤⁿ`.
fn generates<'a>(n: usize, vecs: impl Iterator<Item = &'a [i64]>) -> bool {
    // incremental Hermite form with rows[p] having pivot in column p
    let mut rows: Vec<Option<Vec<i128>>> = vec![None; n];
    for v in vecs {
        let mut x: Vec<i128> = v.iter().map(|&a| a as i128).collect();
        for p in 0..n {
            if x[p] == 0 {
                continue;
            }
            match rows[p].take() {
                None => {
                    if x[p] < 0 {
                        x.iter_mut().for_each(|a| *a = -*a);
                    }
                    rows[p] = Some(x);
                    break;
                }
                Some(mut r) => {
                    // extended Euclid on (r[p], x[p])
                    while x[p] != 0 {
                        let q = r[p].div_euclid(x[p]);
                        for k in p..n {
                            r[k] -= q * x[k];
                        }
                        std::mem::swap(&mut r, &mut x);
                    }
                    if r[p] < 0 {
                        r.iter_mut().for_each(|a| *a = -*a);
                    }
                    // reduce tail entries to keep numbers small
                    for k in p + 1..n {
                        if let Some(rk) = &rows[k] {
                            if rk[k] != 0 {
                                let q = r[k].div_euclid(rk[k]);
                                if q != 0 {
                                    for t in k..n {
                                        r[t] -= q * rk[t];
                                    }
                                }
                            }
                        }
                    }
                    rows[p] = Some(r);
                }
            }
        }
        if unit_pivots(&rows) {
            return true;
        }
    }
    unit_pivots(&rows)
}

fn unit_pivots(rows: &[Option<Vec<i128>>]) -> bool {
    rows.iter().enumerate().all(|(p, r)| r.as_ref().is_some_and(|r| r[p] == 1))
}

/// Greedy choice of independent short vectors with few candidate images.
fn choose_basis(vecs: &VectorSet, span_bound: i64, n: usize) -> Vec<u32> {
    let pool: Vec<usize> = (0..vecs.len()).filter(|&i| vecs.norm(i) <= span_bound).collect();
    let mut sig: Vec<u64> = pool.iter().map(|&i| norm_hash(vecs.norm(i))).collect();
    let mut chosen = Vec::with_capacity(n);
    let mut ech = Echelon::new();
    while chosen.len() < n {
        let mut counts: HashMap<u64, u32> = HashMap::new();
        for &s in &sig {
            *counts.entry(s).or_default() += 1;
        }
        let mut best: Option<(u32, i64, usize)> = None;
        for (k, &i) in pool.iter().enumerate() {
            let key = (counts[&sig[k]], vecs.norm(i), k);
            if best.is_some_and(|b| key >= b) {
                continue;
            }
            if ech.is_independent(vecs.vec(i)) {
                best = Some(key);
            }
        }
        let (_, _, k) = best.expect("short vectors do not span");
        let b = pool[k];
        ech.insert(vecs.vec(b));
        chosen.push(b as u32);
        for (t, &i) in pool.iter().enumerate() {
            sig[t] = extend_hash(sig[t], vecs.ip(i, b));
        }
    }
    chosen
}

/// Depth-first search for isometries from a prepared source into a target.
struct Search<'a> {
    src: &'a Prepared,
    tgt: &'a VectorSet,
    n: usize,
    check: Vec<u32>,
    cand: Vec<Vec<Vec<u32>>>,
    hashes: Vec<Vec<u64>>,
    images: Vec<u32>,
    scratch: Vec<u64>,
    root_ok: bool,
    pub nodes: u64,
}

impl<'a> Search<'a> {
    fn new(src: &'a Prepared, tgt: &'a VectorSet) -> Self {
        let n = src.lattice.rank();
        assert!(tgt.bound() >= src.check_bound, "target vectors too short");
        let check: Vec<u32> = (0..tgt.len() as u32)
            .filter(|&x| tgt.norm(x as usize) <= src.check_bound)
            .collect();
        let mut cand = vec![vec![Vec::new(); n]; n + 1];
        for l in 0..n {
            let want = src.gram[l * n + l];
            cand[0][l] = check.iter().copied().filter(|&x| tgt.norm(x as usize) == want).collect();
        }
        let h0: Vec<u64> = check.iter().map(|&x| norm_hash(tgt.norm(x as usize))).collect();
        let mut hashes = vec![Vec::new(); n];
        hashes[0] = h0;
        let mut s = Self {
            src,
            tgt,
            n,
            check,
            cand,
            hashes,
            images: vec![0; n],
            scratch: Vec::new(),
            root_ok: true,
            nodes: 0,
        };
        s.root_ok = (0..n).all(|l| s.cand[0][l].len() as u32 == src.ref_counts[0][l])
            && s.hist_matches(0);
        s
    }

    fn hist_matches(&mut self, depth: usize) -> bool {
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.hashes[depth]);
        self.scratch.sort_unstable();
        self.scratch == self.src.ref_hist[depth]
    }

    /// Assigns image `w` to basis vector `depth`; returns false if pruned.
    fn fix(&mut self, depth: usize, w: u32) -> bool {
        self.nodes += 1;
        let n = self.n;
        self.images[depth] = w;
        let wi = w as usize;
        for l in depth + 1..n {
            let target = self.src.gram[l * n + depth];
            let (lo, hi) = self.cand.split_at_mut(depth + 1);
            let out = &mut hi[0][l];
            out.clear();
            out.extend(
                lo[depth][l]
                    .iter()
                    .copied()
                    .filter(|&y| self.tgt.ip(y as usize, wi) == target),
            );
            if out.len() as u32 != self.src.ref_counts[depth + 1][l] {
                return false;
            }
        }
        if depth + 1 < n {
            let (lo, hi) = self.hashes.split_at_mut(depth + 1);
            let next = &mut hi[0];
            next.clear();
            next.extend(
                self.check
                    .iter()
                    .zip(&lo[depth])
                    .map(|(&x, &h)| extend_hash(h, self.tgt.ip(x as usize, wi))),
            );
            if !self.hist_matches(depth + 1) {
                return false;
            }
        }
        true
    }

    fn leaf(&self) -> Option<IntMatrix> {
        let n = self.n;
        let mut x = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for k in 0..n {
                    let w = self.tgt.vec(self.images[k] as usize)[i] as i128;
                    s += w * self.src.adj[k * n + j];
                }
                if s % self.src.det_v != 0 {
                    return None;
                }
                x.set(i, j, (s / self.src.det_v) as i64);
            }
        }
        Some(x)
    }

    fn dfs(&mut self, depth: usize) -> Option<IntMatrix> {
        if depth == self.n {
            return self.leaf();
        }
        let cands = self.cand[depth][depth].clone();
        for w in cands {
            if self.fix(depth, w) {
                if let Some(x) = self.dfs(depth + 1) {
                    return Some(x);
                }
            }
        }
        None
    }

    /// Finds an isometry extending the given partial assignment of images.
    fn run(&mut self, prefix: &[u32]) -> Option<IntMatrix> {
        if !self.root_ok {
            return None;
        }
        for (d, &w) in prefix.iter().enumerate() {
            if !self.cand[d][d].contains(&w) || !self.fix(d, w) {
                return None;
            }
        }
        self.dfs(prefix.len())
    }

    /// Candidate images for level `prefix.len()` after fixing `prefix`.
    fn candidates_after(&mut self, prefix: &[u32]) -> Vec<u32> {
        if !self.root_ok {
            return Vec::new();
        }
        for (d, &w) in prefix.iter().enumerate() {
            if !self.fix(d, w) {
                return Vec::new();
            }
        }
        self.cand[prefix.len()][prefix.len()].clone()
    }
}

/// Searches for `U` with `Uᵗ G_target U = G_source`, i.e. an isometry from
/// the prepared source into the lattice whose vectors are `tgt`.
pub(crate) fn find_isometry(src: &Prepared, tgt: &VectorSet) -> Option<IntMatrix> {
    let mut s = Search::new(src, tgt);
    s.run(&[])
}

/// A witness `U` with `Uᵗ G₁ U = G₂`, or `None` when the lattices are not isometric.
pub fn is_isometric(
    l1: &GramLattice,
    l2: &GramLattice,
) -> Result<Option<IsometryWitness>, LatticeError> {
    if l1.rank() != l2.rank() || l1.det() != l2.det() || l1.parity() != l2.parity() {
        return Ok(None);
    }
    let src = Prepared::new(l2);
    let tgt = VectorSet::new(l1, src.check_bound());
    let found = find_isometry(&src, &tgt).map(|u| IsometryWitness { u });
    if let Some(w) = &found {
        assert!(w.verifies(l1, l2), "isometry search returned a bad witness");
    }
    Ok(found)
}

/// Stabilizer-chain data of an automorphism group.
#[derive(Debug, Clone)]
pub(crate) struct AutGroup {
    pub orbit_lengths: Vec<usize>,
}

impl AutGroup {
    pub fn order(&self) -> BigUint {
        self.orbit_lengths.iter().fold(BigUint::one(), |acc, &k| acc * k)
    }
}

pub(crate) fn automorphism_group(src: &Prepared) -> AutGroup {
    let n = src.lattice.rank();
    let vecs = &src.vecs;
    let m = vecs.len();
    let mut gens: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut orbit_lengths = vec![0usize; n];

    let orbit_of = |start: u32, gens: &[(usize, Vec<u32>)], level: usize| -> Vec<bool> {
        let mut seen = vec![false; m];
        seen[start as usize] = true;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for (lvl, perm) in gens {
                if *lvl < level {
                    continue;
                }
                let y = perm[x as usize];
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };

    for i in (0..n).rev() {
        let prefix: Vec<u32> = src.basis[..i].to_vec();
        let cands = Search::new(src, vecs).candidates_after(&prefix);
        let bi = src.basis[i];
        let mut orbit = orbit_of(bi, &gens, i);
        let mut failed = vec![false; m];
        for &x in &cands {
            if orbit[x as usize] || failed[x as usize] {
                continue;
            }
            let mut p = prefix.clone();
            p.push(x);
            let found = Search::new(src, vecs).run(&p);
            match found {
                Some(mat) => {
                    debug_assert_eq!(mat.congruence(&src.lattice.matrix()), src.lattice.matrix());
                    let perm = permutation_of(vecs, &mat);
                    gens.push((i, perm));
                    orbit = orbit_of(bi, &gens, i);
                }
                None => {
                    let o = orbit_of(x, &gens, i);
                    for (f, hit) in failed.iter_mut().zip(o) {
                        *f |= hit;
                    }
                }
            }
        }
        orbit_lengths[i] = orbit.iter().filter(|&&b| b).count();
    }
    AutGroup { orbit_lengths }
}

fn permutation_of(vecs: &VectorSet, mat: &IntMatrix) -> Vec<u32> {
    (0..vecs.len())
        .map(|i| {
            let img = mat.mul_vec(vecs.vec(i));
            vecs.find(&img).expect("automorphism does not preserve short vectors") as u32
        })
        .collect()
}

/// Exact order of `{U : Uᵗ G U = G}`.
pub fn aut_order(lattice: &GramLattice) -> Result<BigUint, LatticeError> {
    let src = Prepared::new(lattice);
    Ok(automorphism_group(&src).order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};

fn signed_permutation_order(n: usize) -> BigInt {
    let mut r = BigInt::one();
    for k in 1..=n {
        r *= BigInt::from(2 * k);
    }
    r
}

    fn z(n: usize) -> GramLattice {
        GramLattice::identity(n)
    }

    /// Counts automorphisms of small lattices by exhausting all matrices
    /// with entries in `[-1, 1]`.
    fn brute_aut(l: &GramLattice) -> usize {
        let n = l.rank();
        let g = l.matrix();
        let mut count = 0;
        let total = 3usize.pow((n * n) as u32);
        for code in 0..total {
            let mut c = code;
            let data: Vec<i64> = (0..n * n)
                .map(|_| {
                    let d = (c % 3) as i64 - 1;
                    c /= 3;
                    d
                })
                .collect();
            let u = IntMatrix::new(n, n, data);
            if u.congruence(&g) == g {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn small_identity_orders_match_brute_force() {
        for n in 1..=3 {
            let got = aut_order(&z(n)).unwrap();
            assert_eq!(got, BigUint::from(brute_aut(&z(n))));
            assert_eq!(BigInt::from(got), signed_permutation_order(n));
        }
    }

    #[test]
    fn a2_and_skewed_forms() {
        let a2 = GramLattice::from_rows(&[vec![2, -1], vec![-1, 2]]).unwrap();
        assert_eq!(aut_order(&a2).unwrap(), BigUint::from(12u32));
        let f = GramLattice::from_rows(&[vec![2, 1], vec![1, 3]]).unwrap();
        assert_eq!(aut_order(&f).unwrap(), BigUint::from(brute_aut(&f)));
        assert_eq!(aut_order(&GramLattice::identity(1)).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn identity_orders() {
        for n in [4usize, 6, 8] {
            let got = BigInt::from(aut_order(&z(n)).unwrap());
            assert_eq!(got, signed_permutation_order(n));
        }
    }

    #[test]
    fn e8_order() {
        assert_eq!(
            aut_order(&GramLattice::e8()).unwrap(),
            BigUint::from(696_729_600u64)
        );
    }

    #[test]
    fn isometry_examples() {
        let i8 = z(8);
        assert!(is_isometric(&i8, &GramLattice::e8()).unwrap().is_none());
        let i2 = z(2);
        let f = GramLattice::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
        let w = is_isometric(&i2, &f).unwrap().unwrap();
        assert!(w.verifies(&i2, &f));
    }

    #[test]
    fn isometry_to_transformed_copy() {
        let e8 = GramLattice::e8();
        let mut u = IntMatrix::identity(8);
        for (i, j, c) in [(0, 3, 2), (5, 1, -1), (7, 2, 1), (4, 6, 3)] {
            u.set(i, j, c);
        }
        assert!(u.det().abs().is_one());
        let moved = e8.transform(&u).unwrap();
        let w = is_isometric(&e8, &moved).unwrap().unwrap();
        assert!(w.verifies(&e8, &moved));
        let w = is_isometric(&moved, &e8).unwrap().unwrap();
        assert!(w.verifies(&moved, &e8));
        assert!(BigInt::from(1) == w.u.det().abs());
        let _ = BigInt::zero();
    }
}
