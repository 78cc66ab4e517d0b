//! Symmetric (beta = 1) and Hermitian (beta = 2) matrix OU processes in their
//! isometric real coordinates, the spectral map onto DOU, and the matrix-level
//! closed forms that dominate the eigenvalue distances.
//!
//! Coordinates: a diagonal entry is kept as is, and an off-diagonal entry
//! (i < j) contributes `sqrt(2) Re h_ij` (and `sqrt(2) Im h_ij` for GUE), so
//! that `Tr(h^2)` is the squared Euclidean norm of the coordinates.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::rng::RngStream;
use crate::sde_kernels::{Observable, PathTable, SimPlan};
use crate::value::Extended;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Default cap on the matrix size.
pub const MAX_N: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Goe,
    Gue,
}

impl EnsembleKind {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta == 1.0 {
            Ok(EnsembleKind::Goe)
        } else if beta == 2.0 {
            Ok(EnsembleKind::Gue)
        } else {
            Err(Error::arg(format!("matrix route needs beta in {{1, 2}}, got {beta}")))
        }
    }

    pub fn beta(self) -> f64 {
        match self {
            EnsembleKind::Goe => 1.0,
            EnsembleKind::Gue => 2.0,
        }
    }

    /// Number of real coordinates.
    pub fn dim(self, n: usize) -> usize {
        match self {
            EnsembleKind::Goe => n * (n + 1) / 2,
            EnsembleKind::Gue => n * n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEnsemble {
    kind: EnsembleKind,
    n: usize,
    coords: Vec<f64>,
}

impl MatrixEnsemble {
    pub fn from_coords(kind: EnsembleKind, n: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::arg(format!("matrix size must lie in 1..={MAX_N}, got {n}")));
        }
        if coords.len() != kind.dim(n) {
            return Err(Error::DimensionMismatch { left: coords.len(), right: kind.dim(n) });
        }
        Ok(MatrixEnsemble { kind, n, coords })
    }

    /// The diagonal matrix with entries `x`.
    pub fn diagonal(kind: EnsembleKind, x: &[f64]) -> Result<Self> {
        let n = x.len();
        let mut m = MatrixEnsemble::from_coords(kind, n, vec![0.0; kind.dim(n)])?;
        for (i, &v) in x.iter().enumerate() {
            let k = m.diag_index(i);
            m.coords[k] = v;
        }
        Ok(m)
    }

    pub fn kind(&self) -> EnsembleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn diag_index(&self, i: usize) -> usize {
        match self.kind {
            EnsembleKind::Gue => i * self.n + i,
            // Row i of the upper triangle starts after rows of lengths n, n-1, ...
            EnsembleKind::Goe => i * self.n - i * i.saturating_sub(1) / 2,
        }
    }

    /// Dense row-major matrix.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        match self.kind {
            EnsembleKind::Gue => {
                for i in 0..n {
                    a[i * n + i] = Complex64::new(self.coords[i * n + i], 0.0);
                    for j in (i + 1)..n {
                        let re = self.coords[i * n + j] / SQRT2;
                        let im = self.coords[j * n + i] / SQRT2;
                        a[i * n + j] = Complex64::new(re, im);
                        a[j * n + i] = Complex64::new(re, -im);
                    }
                }
            }
            EnsembleKind::Goe => {
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        let v = if i == j { self.coords[k] } else { self.coords[k] / SQRT2 };
                        a[i * n + j] = Complex64::new(v, 0.0);
                        a[j * n + i] = Complex64::new(v, 0.0);
                        k += 1;
                    }
                }
            }
        }
        a
    }

    /// `Tr(h^2)` through the coordinates.
    pub fn trace_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }
}

/// Draw from GOE_n or GUE_n: all coordinates iid N(0, 1/n).
pub fn sample_ensemble(kind: EnsembleKind, n: usize, rng: &mut RngStream) -> Result<MatrixEnsemble> {
    let sd = 1.0 / (n as f64).sqrt();
    let coords = (0..kind.dim(n)).map(|_| sd * rng.normal()).collect();
    MatrixEnsemble::from_coords(kind, n, coords)
}

/// Exact transition of `dM = sqrt(2/n) dB - M dt` over `dt`, coordinatewise.
pub fn matrix_ou_step(m: &MatrixEnsemble, dt: f64, rng: &mut RngStream) -> Result<MatrixEnsemble> {
    if !(dt > 0.0) {
        return Err(Error::arg("dt must be positive"));
    }
    let decay = (-dt).exp();
    let sd = (-(-2.0 * dt).exp_m1() / m.n as f64).sqrt();
    let coords = m.coords.iter().map(|&c| c * decay + sd * rng.normal()).collect();
    Ok(MatrixEnsemble { kind: m.kind, n: m.n, coords })
}

/// Sorted spectrum.
pub fn eigenvalues(m: &MatrixEnsemble) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&m.to_dense(), m.n)
}

/// `(sum |l_i(A) - l_i(B)|^2, sum |A_ij - B_ij|^2)`; the first never exceeds
/// the second.
pub fn hoffman_wielandt_check(a: &MatrixEnsemble, b: &MatrixEnsemble) -> Result<(f64, f64)> {
    if a.kind != b.kind || a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.coords.len(), right: b.coords.len() });
    }
    let la = eigenvalues(a)?;
    let lb = eigenvalues(b)?;
    let lhs = la.iter().zip(&lb).map(|(x, y)| (x - y) * (x - y)).sum();
    let rhs = a.coords.iter().zip(&b.coords).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((lhs, rhs))
}

/// Chi-square between the matrix OU law at t (started from a matrix of
/// squared norm `norm2`) and the invariant ensemble. It bounds the same
/// divergence between the eigenvalue law and `P_n^beta`.
pub fn matrix_chi2(kind: EnsembleKind, n: usize, norm2: f64, t: f64) -> Extended {
    if t <= 0.0 {
        return Extended::Infinite;
    }
    let d = kind.dim(n) as f64;
    let q = (-2.0 * t).exp();
    let l = -0.5 * d * (-(q * q)).ln_1p() + n as f64 * norm2 * q / (1.0 + q);
    Extended::from_ln_1p(l)
}

/// Wasserstein distance between the matrix OU law at t and the ensemble; by
/// Hoffman-Wielandt it bounds the eigenvalue Wasserstein distance.
pub fn matrix_wasserstein(kind: EnsembleKind, n: usize, norm2: f64, t: f64) -> f64 {
    let d = kind.dim(n) as f64;
    let q = (-2.0 * t).exp();
    let s = (-(-2.0 * t).exp_m1()).sqrt();
    // Each coordinate contributes (sd_t - sd_inf)^2 = (1 - s)^2/n = q^2/(n (1+s)^2).
    (norm2 * q + d / n as f64 * q * q / ((1.0 + s) * (1.0 + s))).sqrt()
}

/// Eigenvalue paths of the matrix OU started from `diag(x0)`, recorded on the
/// plan's grid. Replica r uses stream `(base_seed, r)`.
pub fn matrix_paths(kind: EnsembleKind, x0: &[f64], plan: &SimPlan, observables: &[Observable]) -> Result<PathTable> {
    plan.validate()?;
    let start = MatrixEnsemble::diagonal(kind, x0)?;
    let per: Vec<Result<Vec<f64>>> = (0..plan.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(plan.base_seed, r as u64);
            let mut m = start.clone();
            let mut t = 0.0;
            let mut out = Vec::with_capacity(plan.t_grid.len() * observables.len());
            for &tg in &plan.t_grid {
                if tg > t {
                    m = matrix_ou_step(&m, tg - t, &mut rng)?;
                    t = tg;
                }
                let ev = eigenvalues(&m)?;
                out.extend(observables.iter().map(|o| o.eval(&ev)));
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::new();
    for v in per {
        values.extend(v?);
    }
    Ok(PathTable::from_parts(
        observables.iter().map(|o| o.name()).collect(),
        plan.t_grid.clone(),
        plan.replicas,
        values,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_is_an_isometry() {
        let mut rng = RngStream::new(4, 0);
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue] {
            let m = sample_ensemble(kind, 5, &mut rng).unwrap();
            let dense = m.to_dense();
            let fro: f64 = dense.iter().map(|z| z.norm_sqr()).sum();
            assert!((fro - m.trace_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        for kind in [EnsembleKind::Goe, EnsembleKind::Gue] {
            let m = MatrixEnsemble::diagonal(kind, &[3.0, -1.0, 2.0]).unwrap();
            let ev = eigenvalues(&m).unwrap();
            assert_eq!(ev, vec![-1.0, 2.0, 3.0]);
        }
    }

    #[test]
    fn wasserstein_matches_generic_formula() {
        // n^2 coordinates each N(c e^{-t}, (1-q)/n) against N(0, 1/n).
        let (n, norm2, t): (usize, f64, f64) = (3, 2.0, 0.7);
        let q = (-2.0 * t).exp();
        let d = (n * n) as f64;
        let direct = norm2 * q + d * ((1.0 - q) / n as f64).sqrt().mul_add(-1.0, (1.0 / n as f64).sqrt()).powi(2);
        assert!((matrix_wasserstein(EnsembleKind::Gue, n, norm2, t).powi(2) - direct).abs() < 1e-13);
    }
}
