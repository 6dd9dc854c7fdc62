//! Dense complex helpers for the small systems the decoders build.

use crate::channel::{C64, ZERO};

/// `log2 det(M)` for a Hermitian positive-definite `n x n` matrix stored
/// row-major. Returns `None` when the Cholesky factorization breaks down.
pub fn log2det_hpd(m: &[C64], n: usize) -> Option<f64> {
    debug_assert_eq!(m.len(), n * n);
    let mut l = vec![ZERO; n * n];
    let mut acc = 0.0;
    for j in 0..n {
        let mut d = m[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = C64::new(djj, 0.0);
        acc += d.log2();
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(acc)
}

/// `diag(noise) + A A^H` for the rows of `a` restricted to `cols`.
pub fn gram_plus_noise(rows: &[&[C64]], noise: &[f64], cols: &[usize]) -> Vec<C64> {
    let n = rows.len();
    let mut m = vec![ZERO; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = ZERO;
            for &c in cols {
                s += rows[i][c] * rows[j][c].conj();
            }
            m[i * n + j] = s;
            m[j * n + i] = s.conj();
        }
        m[i * n + i] += C64::new(noise[i], 0.0);
    }
    m
}

/// Largest singular value of a `2 x k` matrix given by its columns.
pub fn sigma_max_2xk(cols: &[[C64; 2]]) -> f64 {
    // eigenvalues of the 2x2 Hermitian W W^H
    let (mut p, mut q, mut r) = (0.0, 0.0, ZERO);
    for c in cols {
        p += c[0].norm_sqr();
        q += c[1].norm_sqr();
        r += c[0] * c[1].conj();
    }
    let mean = 0.5 * (p + q);
    let disc = (0.25 * (p - q) * (p - q) + r.norm_sqr()).sqrt();
    (mean + disc).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn log_det_of_diagonal_and_hermitian() {
        let m = [c(2.0, 0.0), ZERO, ZERO, c(8.0, 0.0)];
        assert!((log2det_hpd(&m, 2).unwrap() - 4.0).abs() < 1e-12);
        // [[2, i], [-i, 2]] has det 3
        let m = [c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        assert!((log2det_hpd(&m, 2).unwrap() - 3f64.log2()).abs() < 1e-12);
        let bad = [c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert!(log2det_hpd(&bad, 2).is_none());
    }

    #[test]
    fn gram_matches_hand_computation() {
        let r1 = [c(1.0, 0.0), c(0.0, 1.0)];
        let r2 = [c(2.0, 0.0), c(1.0, 0.0)];
        let m = gram_plus_noise(&[&r1, &r2], &[1.0, 0.5], &[0, 1]);
        assert_eq!(m[0], c(3.0, 0.0));
        assert_eq!(m[1], c(2.0, 1.0));
        assert_eq!(m[2], c(2.0, -1.0));
        assert_eq!(m[3], c(5.5, 0.0));
        let only_first = gram_plus_noise(&[&r1, &r2], &[1.0, 0.5], &[0]);
        assert_eq!(only_first[3], c(4.5, 0.0));
    }

    #[test]
    fn spectral_norm_of_small_matrices() {
        let id = [[c(1.0, 0.0), ZERO], [ZERO, c(1.0, 0.0)]];
        assert!((sigma_max_2xk(&id) - 1.0).abs() < 1e-12);
        let rank_one = [[c(1.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(1.0, 0.0)]];
        assert!((sigma_max_2xk(&rank_one) - 2.0).abs() < 1e-12);
    }
}
