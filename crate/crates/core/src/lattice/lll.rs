//! LLL reduction on a Gram matrix. Decisions use a floating Gram-Schmidt;
//! all basis updates are exact, so only the quality of the result (never its
//! correctness) depends on rounding.

use super::GramLattice;
use crate::linalg::IntMatrix;

const DELTA: f64 = 0.99;

/// Returns the reduced lattice and the change of basis `U` (columns are the
/// new basis vectors in old coordinates), so that `reduced = Uᵗ G U`.
pub fn lll_reduce(lattice: &GramLattice) -> (GramLattice, IntMatrix) {
    let n = lattice.rank();
    let mut g: Vec<i64> = lattice.entries().to_vec();
    let mut u = IntMatrix::identity(n);
    let mut mu = vec![0f64; n * n];
    let mut b = vec![0f64; n];

    let gso_row = |g: &[i64], mu: &mut [f64], b: &mut [f64], i: usize| {
        for j in 0..i {
            let mut s = g[i * n + j] as f64;
            for k in 0..j {
                s -= mu[j * n + k] * mu[i * n + k] * b[k];
            }
            mu[i * n + j] = s / b[j];
        }
        let mut s = g[i * n + i] as f64;
        for k in 0..i {
            s -= mu[i * n + k] * mu[i * n + k] * b[k];
        }
        b[i] = s;
    };

    gso_row(&g, &mut mu, &mut b, 0);
    let mut k = 1;
    while k < n {
        gso_row(&g, &mut mu, &mut b, k);
        for j in (0..k).rev() {
            let q = mu[k * n + j].round();
            if q == 0.0 {
                continue;
            }
            let q = q as i64;
            // b_k <- b_k - q b_j
            let gkj = g[k * n + j];
            let gjj = g[j * n + j];
            let gkk = g[k * n + k];
            for i in 0..n {
                if i != k {
                    let v = g[k * n + i] - q * g[j * n + i];
                    g[k * n + i] = v;
                    g[i * n + k] = v;
                }
            }
            g[k * n + k] = gkk - 2 * q * gkj + q * q * gjj;
            for r in 0..n {
                let v = u.get(r, k) - q * u.get(r, j);
                u.set(r, k, v);
            }
            for i in 0..j {
                mu[k * n + i] -= q as f64 * mu[j * n + i];
            }
            mu[k * n + j] -= q as f64;
        }
        gso_row(&g, &mut mu, &mut b, k);
        let m = mu[k * n + k - 1];
        if b[k] < (DELTA - m * m) * b[k - 1] {
            swap_basis(&mut g, &mut u, n, k - 1, k);
            gso_row(&g, &mut mu, &mut b, k - 1);
            k = k.saturating_sub(1).max(1);
            if k == 1 {
                gso_row(&g, &mut mu, &mut b, 0);
            }
        } else {
            k += 1;
        }
    }
    (GramLattice::new_unchecked(n, g), u)
}

fn swap_basis(g: &mut [i64], u: &mut IntMatrix, n: usize, a: usize, b: usize) {
    for i in 0..n {
        g.swap(a * n + i, b * n + i);
    }
    for i in 0..n {
        g.swap(i * n + a, i * n + b);
    }
    for r in 0..n {
        let t = u.get(r, a);
        u.set(r, a, u.get(r, b));
        u.set(r, b, t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_skewed_identity() {
        // basis (1,0), (7,1) of Z^2
        let l = GramLattice::from_rows(&[vec![1, 7], vec![7, 50]]).unwrap();
        let (r, u) = lll_reduce(&l);
        assert_eq!(u.congruence(&l.matrix()), r.matrix());
        assert_eq!(r.get(0, 0), 1);
        assert_eq!(r.get(1, 1), 1);
        assert_eq!(u.det().magnitude().to_string(), "1");
    }

    #[test]
    fn keeps_reduced_input() {
        let e8 = GramLattice::e8();
        let (r, u) = lll_reduce(&e8);
        assert_eq!(u.congruence(&e8.matrix()), r.matrix());
        assert!((0..8).all(|i| r.get(i, i) == 2));
    }
}
