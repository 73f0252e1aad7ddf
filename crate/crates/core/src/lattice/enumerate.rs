//! Fincke-Pohst enumeration of short lattice vectors.

use super::{GramLattice, LatticeError};

/// All nonzero `v` with `vᵗ G v ≤ bound`, one of each pair `±v` (the one whose
/// first nonzero coordinate is positive), sorted by norm and then in
/// descending lexicographic order of coordinates.
pub fn short_vectors(
    lattice: &GramLattice,
    bound: i64,
) -> Result<Vec<(Vec<i64>, i64)>, LatticeError> {
    let mut out = Vec::new();
    for_each_short(lattice, bound, |v, norm| {
        let mut v = v.to_vec();
        if v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        out.push((v, norm));
    });
    out.sort_by(|(a, na), (b, nb)| na.cmp(nb).then_with(|| b.cmp(a)));
    Ok(out)
}

/// Calls `f` once for each pair `±v` of nonzero vectors of norm at most
/// `bound`, with the representative whose last nonzero coordinate is positive.
pub(crate) fn for_each_short(lattice: &GramLattice, bound: i64, mut f: impl FnMut(&[i64], i64)) {
    let n = lattice.rank();
    if bound <= 0 {
        return;
    }
    // Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    let mut q = vec![0f64; n * n];
    for i in 0..n {
        for j in i..n {
            q[i * n + j] = lattice.get(i, j) as f64;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            q[j * n + i] = q[i * n + j];
            q[i * n + j] /= q[i * n + i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k * n + l] -= q[k * n + i] * q[i * n + l];
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
    let eps = 1e-6 * (1.0 + bound as f64);

    let mut x = vec![0i64; n];
    let mut state = Enum {
        n,
        q: &q,
        diag: &diag,
        bound: bound as f64 + eps,
        lattice,
        int_bound: bound,
    };
    state.recurse(n, 0.0, true, &mut x, &mut f);
}

struct Enum<'a> {
    n: usize,
    q: &'a [f64],
    diag: &'a [f64],
    bound: f64,
    lattice: &'a GramLattice,
    int_bound: i64,
}

impl Enum<'_> {
    /// Assigns coordinate `level - 1` given coordinates `level..n` and their
    /// accumulated partial norm `used`.
    fn recurse(
        &mut self,
        level: usize,
        used: f64,
        all_zero: bool,
        x: &mut [i64],
        f: &mut impl FnMut(&[i64], i64),
    ) {
        if level == 0 {
            if all_zero {
                return;
            }
            let norm = self.lattice.norm(x);
            if norm <= self.int_bound {
                f(x, norm);
            }
            return;
        }
        let i = level - 1;
        let n = self.n;
        let center: f64 = -(i + 1..n).map(|j| self.q[i * n + j] * x[j] as f64).sum::<f64>();
        let rem = self.bound - used;
        if rem < 0.0 {
            return;
        }
        let radius = (rem / self.diag[i]).sqrt();
        let mut lo = (center - radius).ceil() as i64;
        let hi = (center + radius).floor() as i64;
        if all_zero {
            lo = lo.max(0);
        }
        for v in lo..=hi {
            let t = v as f64 - center;
            let add = self.diag[i] * t * t;
            if used + add > self.bound {
                continue;
            }
            x[i] = v;
            self.recurse(i, used + add, all_zero && v == 0, x, f);
        }
        x[i] = 0;
    }
}

/// All nonzero vectors of norm at most `bound`, both signs, with their norms.
pub(crate) fn short_vectors_signed(lattice: &GramLattice, bound: i64) -> Vec<(Vec<i64>, i64)> {
    let mut out = Vec::new();
    for_each_short(lattice, bound, |v, norm| {
        out.push((v.to_vec(), norm));
        out.push((v.iter().map(|x| -x).collect(), norm));
    });
    out
}
