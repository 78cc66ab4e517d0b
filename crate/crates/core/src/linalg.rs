//! Eigenvalues of symmetric tridiagonal and dense Hermitian matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (length n-1), by implicit-shift QL.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch { left: off.len() + 1, right: n });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NonConvergence(format!(
                    "tridiagonal QL did not converge; diag = {diag:?}, off = {off:?}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                // Plain sqrt: entries stay far from overflow and hypot is slow.
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of a dense Hermitian matrix stored row-major.
///
/// Householder reflections reduce the matrix to Hermitian tridiagonal form;
/// the moduli of its off-diagonal entries then give a real symmetric
/// tridiagonal matrix with the same spectrum.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch { left: a.len(), right: n * n });
    }
    let mut m = a.to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut p = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(1) {
        diag[k] = m[k * n + k].re;
        let len = n - k - 1;
        let x = |i: usize| m[(k + 1 + i) * n + k];
        let norm = (0..len).map(|i| x(i).norm_sqr()).sum::<f64>().sqrt();
        off[k] = norm;
        if norm == 0.0 {
            continue;
        }
        let x0 = x(0);
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in 0..len {
            v[i] = x(i);
        }
        v[0] -= alpha;
        let vn = (0..len).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for vi in v.iter_mut().take(len) {
            *vi /= vn;
        }
        // Trailing block B <- H B H with H = I - 2 v v*.
        let off_idx = |i: usize, j: usize| (k + 1 + i) * n + (k + 1 + j);
        for i in 0..len {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..len {
                s += m[off_idx(i, j)] * v[j];
            }
            p[i] = s;
        }
        let kk: Complex64 = (0..len).map(|i| v[i].conj() * p[i]).sum();
        for i in 0..len {
            p[i] -= kk * v[i];
        }
        for i in 0..len {
            for j in 0..len {
                m[off_idx(i, j)] -= 2.0 * (v[i] * p[j].conj() + p[i] * v[j].conj());
            }
        }
    }
    if n > 0 {
        diag[n - 1] = m[(n - 1) * n + (n - 1)].re;
    }
    tridiagonal_eigenvalues(&diag, &off)
}

/// Eigenvalues (ascending) of a dense real symmetric matrix stored row-major.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let c: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    hermitian_eigenvalues(&c, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_two_by_two() {
        let ev = tridiagonal_eigenvalues(&[1.0, 1.0], &[1.0]).unwrap();
        assert!((ev[0] - 0.0).abs() < 1e-15 && (ev[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // Eigenvalues of tridiag(-1, 2, -1) are 2 - 2 cos(k pi/(n+1)).
        let n = 12;
        let ev = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_matches_trace_identities() {
        let n = 3;
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let a = vec![
            2.0 * one, one + i, 0.5 * i,
            one - i, -one, 0.3 * one,
            -0.5 * i, 0.3 * one, 0.7 * one,
        ];
        let ev = hermitian_eigenvalues(&a, n).unwrap();
        let tr: f64 = ev.iter().sum();
        let tr2: f64 = ev.iter().map(|x| x * x).sum();
        let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        assert!((tr - 1.7).abs() < 1e-13);
        assert!((tr2 - fro).abs() < 1e-12);
    }
}
