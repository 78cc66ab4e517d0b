//! Closed-form distances and divergences between Gaussian laws, the Kraft and
//! Pinsker sandwich for total variation, the Gamma crossing event and the
//! tensorization rules.
//!
//! Conventions: `Hellinger` is `sqrt(1 - int sqrt(fg))` (so it lies in
//! [0, 1]), `Kullback` is the relative entropy of the first law with respect
//! to the second, `Chi2` is `int f^2/g - 1`, `Fisher` is
//! `E_f |grad log(f/g)|^2`, and `Wasserstein` is the quadratic transport
//! distance (not its square).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{integrate, quadratic_roots};
use crate::special::{erf, gamma_p, gamma_q, log1pmx, normal_interval, normal_pdf};
use crate::value::Extended;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Wasserstein,
    TV,
    Hellinger,
    Kullback,
    Chi2,
    Fisher,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Wasserstein,
        MetricKind::TV,
        MetricKind::Hellinger,
        MetricKind::Kullback,
        MetricKind::Chi2,
        MetricKind::Fisher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Wasserstein => "wasserstein",
            MetricKind::TV => "tv",
            MetricKind::Hellinger => "hellinger",
            MetricKind::Kullback => "kullback",
            MetricKind::Chi2 => "chi2",
            MetricKind::Fisher => "fisher",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wasserstein" | "w" => Ok(MetricKind::Wasserstein),
            "tv" => Ok(MetricKind::TV),
            "hellinger" => Ok(MetricKind::Hellinger),
            "kullback" | "kl" => Ok(MetricKind::Kullback),
            "chi2" => Ok(MetricKind::Chi2),
            "fisher" => Ok(MetricKind::Fisher),
            other => Err(Error::arg(format!("unknown metric '{other}'"))),
        }
    }

    /// Largest value the metric can take between probability laws.
    pub fn max_value(self) -> Extended {
        match self {
            MetricKind::TV | MetricKind::Hellinger => Extended::Finite(1.0),
            _ => Extended::Infinite,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    IsotropicDiag { var: f64, dim: usize },
    Full(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLaw {
    mean: Vec<f64>,
    cov: Covariance,
}

impl GaussianLaw {
    /// N(mean, var * I).
    pub fn isotropic(mean: Vec<f64>, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::arg(format!("variance must be positive, got {var}")));
        }
        if mean.is_empty() {
            return Err(Error::arg("dimension must be at least 1"));
        }
        let dim = mean.len();
        Ok(GaussianLaw { mean, cov: Covariance::IsotropicDiag { var, dim } })
    }

    /// One-dimensional N(m, var).
    pub fn scalar(m: f64, var: f64) -> Result<Self> {
        Self::isotropic(vec![m], var)
    }

    /// N(mean, cov) with a symmetric positive-definite covariance.
    pub fn full(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch { left: d, right: cov.nrows() });
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::arg("covariance is not symmetric"));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::arg("covariance is not positive definite"));
        }
        Ok(GaussianLaw { mean, cov: Covariance::Full(cov) })
    }

    /// N(mean, diag(vars)).
    pub fn diagonal(mean: Vec<f64>, vars: &[f64]) -> Result<Self> {
        if vars.len() != mean.len() {
            return Err(Error::DimensionMismatch { left: mean.len(), right: vars.len() });
        }
        if vars.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::arg("variances must be positive"));
        }
        Self::full(mean, DMatrix::from_diagonal(&DVector::from_column_slice(vars)))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Covariance {
        &self.cov
    }

    pub fn cov_matrix(&self) -> DMatrix<f64> {
        match &self.cov {
            Covariance::IsotropicDiag { var, dim } => DMatrix::identity(*dim, *dim) * *var,
            Covariance::Full(m) => m.clone(),
        }
    }

    /// Image law under x -> s x.
    pub fn scaled(&self, s: f64) -> Self {
        let mean = self.mean.iter().map(|m| m * s).collect();
        let cov = match &self.cov {
            Covariance::IsotropicDiag { var, dim } => Covariance::IsotropicDiag { var: var * s * s, dim: *dim },
            Covariance::Full(m) => Covariance::Full(m * (s * s)),
        };
        GaussianLaw { mean, cov }
    }

    fn iso_var(&self) -> Option<f64> {
        match self.cov {
            Covariance::IsotropicDiag { var, .. } => Some(var),
            Covariance::Full(_) => None,
        }
    }
}

/// Gamma law with shape and rate parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    shape: f64,
    rate: f64,
}

impl GammaLaw {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) {
            return Err(Error::arg("gamma law needs shape > 0 and rate > 0"));
        }
        Ok(GammaLaw { shape, rate })
    }
    pub fn shape(&self) -> f64 {
        self.shape
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }
    pub fn cdf(&self, x: f64) -> f64 {
        gamma_p(self.shape, self.rate * x)
    }
    pub fn sf(&self, x: f64) -> f64 {
        gamma_q(self.shape, self.rate * x)
    }
}

fn check_dims(p: &GaussianLaw, q: &GaussianLaw) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { left: p.dim(), right: q.dim() });
    }
    Ok(())
}

fn mean_gap2(p: &GaussianLaw, q: &GaussianLaw) -> f64 {
    p.mean.iter().zip(&q.mean).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Closed-form value of `kind` between `p` and `q`.
///
/// TV has no closed form here; use [`tv_gauss_bounds`] or, for isotropic
/// pairs, [`tv_isotropic_exact`].
pub fn gauss_distance(kind: MetricKind, p: &GaussianLaw, q: &GaussianLaw) -> Result<Extended> {
    check_dims(p, q)?;
    if kind == MetricKind::TV {
        return Err(Error::Unsupported(
            "no exact TV between general Gaussians; use tv_gauss_bounds".into(),
        ));
    }
    let dm2 = mean_gap2(p, q);
    match (p.iso_var(), q.iso_var()) {
        (Some(s1), Some(s2)) => Ok(isotropic(kind, p.dim() as f64, dm2, s1, s2)),
        _ => full(kind, p, q),
    }
}

/// Closed forms when both covariances are multiples of the identity.
fn isotropic(kind: MetricKind, d: f64, dm2: f64, s1: f64, s2: f64) -> Extended {
    match kind {
        MetricKind::Hellinger => {
            let u = (s1 - s2) * (s1 - s2) / (4.0 * s1 * s2);
            let ln_bc = -0.25 * d * u.ln_1p() - 0.25 * dm2 / (s1 + s2);
            Extended::Finite((-ln_bc.exp_m1()).max(0.0).sqrt())
        }
        MetricKind::Kullback => {
            let r = s1 / s2;
            Extended::Finite(0.5 * (dm2 / s2 - d * log1pmx(r - 1.0)))
        }
        MetricKind::Chi2 => {
            if 2.0 * s2 <= s1 {
                return Extended::Infinite;
            }
            let w = (s2 - s1) / s2;
            let l = -0.5 * d * (-w * w).ln_1p() + dm2 / (2.0 * s2 - s1);
            Extended::from_ln_1p(l)
        }
        MetricKind::Fisher => {
            Extended::Finite(dm2 / (s2 * s2) + d * (s2 - s1) * (s2 - s1) / (s2 * s2 * s1))
        }
        MetricKind::Wasserstein => {
            let g = s1.sqrt() - s2.sqrt();
            Extended::Finite((dm2 + d * g * g).sqrt())
        }
        MetricKind::TV => unreachable!("handled by caller"),
    }
}

fn ln_det_chol(m: &DMatrix<f64>) -> Option<(f64, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let ch = m.clone().cholesky()?;
    let l = ch.l_dirty();
    let ld = (0..m.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    Some((ld, ch))
}

fn sqrtm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

fn full(kind: MetricKind, p: &GaussianLaw, q: &GaussianLaw) -> Result<Extended> {
    let s1 = p.cov_matrix();
    let s2 = q.cov_matrix();
    let dm = DVector::from_iterator(p.dim(), p.mean.iter().zip(&q.mean).map(|(a, b)| a - b));
    let d = p.dim() as f64;
    let fail = || Error::NonConvergence("covariance factorization failed".into());
    Ok(match kind {
        MetricKind::Hellinger => {
            let sum = &s1 + &s2;
            let (ld1, _) = ln_det_chol(&s1).ok_or_else(fail)?;
            let (ld2, _) = ln_det_chol(&s2).ok_or_else(fail)?;
            let (lds, ch) = ln_det_chol(&sum).ok_or_else(fail)?;
            let quad = dm.dot(&ch.solve(&dm));
            let ln_bc = 0.25 * (ld1 + ld2) - 0.5 * (lds - d * 2f64.ln()) - 0.25 * quad;
            Extended::Finite((-ln_bc.exp_m1()).max(0.0).sqrt())
        }
        MetricKind::Kullback => {
            let (ld1, _) = ln_det_chol(&s1).ok_or_else(fail)?;
            let (ld2, ch2) = ln_det_chol(&s2).ok_or_else(fail)?;
            let quad = dm.dot(&ch2.solve(&dm));
            let tr = ch2.solve(&s1).trace();
            Extended::Finite((0.5 * (quad + tr - d + ld2 - ld1)).max(0.0))
        }
        MetricKind::Chi2 => {
            let m = &s2 * 2.0 - &s1;
            let Some((ldm, chm)) = ln_det_chol(&m) else {
                return Ok(Extended::Infinite);
            };
            let (ld1, _) = ln_det_chol(&s1).ok_or_else(fail)?;
            let (ld2, _) = ln_det_chol(&s2).ok_or_else(fail)?;
            let quad = dm.dot(&chm.solve(&dm));
            let l = ld2 - 0.5 * (ld1 + ldm) + quad;
            Extended::from_ln_1p(l.max(0.0))
        }
        MetricKind::Fisher => {
            let ch2 = s2.clone().cholesky().ok_or_else(fail)?;
            let ch1 = s1.clone().cholesky().ok_or_else(fail)?;
            let inv2 = ch2.inverse();
            let inv1 = ch1.inverse();
            let v = &inv2 * &dm;
            let tr = (&inv2 * &inv2 * &s1).trace() - 2.0 * inv2.trace() + inv1.trace();
            Extended::Finite((v.norm_squared() + tr).max(0.0))
        }
        MetricKind::Wasserstein => {
            let comm = &s1 * &s2 - &s2 * &s1;
            let tr = if comm.norm() <= 1e-10 * s1.norm() * s2.norm() {
                let g = sqrtm(&s1) - sqrtm(&s2);
                (&g * &g).trace()
            } else {
                let r1 = sqrtm(&s1);
                let cross = sqrtm(&(&r1 * &s2 * &r1));
                (&s1 + &s2 - cross * 2.0).trace()
            };
            Extended::Finite((dm.norm_squared() + tr.max(0.0)).sqrt())
        }
        MetricKind::TV => unreachable!("handled by caller"),
    })
}

/// Lower and upper bounds on TV from Hellinger (Kraft) and Kullback (Pinsker
/// in the form TV^2 <= 2 KL), capped at 1.
pub fn tv_gauss_bounds(p: &GaussianLaw, q: &GaussianLaw) -> Result<(f64, f64)> {
    let h = gauss_distance(MetricKind::Hellinger, p, q)?.to_f64();
    let kl = gauss_distance(MetricKind::Kullback, p, q)?.to_f64();
    Ok(tv_band_from(h, kl))
}

/// TV band from a Hellinger distance and a Kullback divergence.
pub fn tv_band_from(h: f64, kl: f64) -> (f64, f64) {
    let h2 = h * h;
    let lower = h2;
    let kraft = h * (2.0 - h2).max(0.0).sqrt();
    let pinsker = (2.0 * kl).sqrt();
    let upper = kraft.min(pinsker).min(1.0).max(lower);
    (lower, upper)
}

/// Exact TV between N(m1, v1) and N(m2, v2) on the line, by integrating
/// both densities over the interval where one dominates the other.
pub fn tv_scalar_exact(m1: f64, v1: f64, m2: f64, v2: f64) -> Result<f64> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::arg("variances must be positive"));
    }
    tv_isotropic_exact(1, (m1 - m2).abs(), v1, v2)
}

/// Exact TV between N(m e1, var_p I_d) and N(0, var_q I_d).
///
/// The event {f >= g} depends only on the coordinate along the mean gap and
/// the squared radius of the orthogonal part, whose conditional law is a
/// scaled chi-square. The remaining integral is one-dimensional.
pub fn tv_isotropic_exact(d: usize, mean_dist: f64, var_p: f64, var_q: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    if !(var_p > 0.0 && var_q > 0.0) {
        return Err(Error::arg("variances must be positive"));
    }
    let m = mean_dist.abs();
    if var_p == var_q {
        return Ok(erf(m / (2.0 * (2.0 * var_p).sqrt())));
    }
    // TV is symmetric; put the narrower law at the shifted mean.
    let (a, b) = if var_p < var_q { (var_p, var_q) } else { (var_q, var_p) };
    let gap = b - a;
    let c = gap / (a * b);
    let l = -(d as f64) * (-gap / b).ln_1p();
    // N(u) = l - (u-m)^2/a + u^2/b; event is R <= N(u)/c, R the orthogonal radius^2.
    let roots = |target: f64| quadratic_roots(-c, 2.0 * m / a, l - m * m / a - target);
    let Some((u_lo, u_hi)) = roots(0.0) else {
        return Ok(0.0);
    };
    let sa = a.sqrt();
    let sb = b.sqrt();
    if d == 1 {
        let pf = normal_interval((u_lo - m) / sa, (u_hi - m) / sa);
        let pg = normal_interval(u_lo / sb, u_hi / sb);
        return Ok((pf - pg).clamp(0.0, 1.0));
    }
    let k = 0.5 * (d as f64 - 1.0);
    const ZMAX: f64 = 38.0;
    let breaks_for = |scale: f64, to_z: &dyn Fn(f64) -> f64| -> Vec<f64> {
        // Reach deep into the upper chi-square tail: with nearly equal variances
        // the incomplete gamma steps sharply and a wide panel would hide it.
        let mut v = vec![0.0];
        for j in -10..=60 {
            let x = k + j as f64 * (2.0 * k).sqrt().max(1.0) * 0.5;
            if x <= 0.0 {
                continue;
            }
            if let Some((r1, r2)) = roots(scale * x) {
                v.push(to_z(r1));
                v.push(to_z(r2));
            }
        }
        v
    };
    // Part under the narrow law: u = m + sqrt(a) z, chi-square scale a.
    let two_ac = 2.0 * gap / b;
    let fz = |z: f64| {
        let u = m + sa * z;
        let nu = l - z * z + u * u / b;
        if nu <= 0.0 {
            0.0
        } else {
            normal_pdf(z) * gamma_p(k, nu / two_ac)
        }
    };
    let z_lo = ((u_lo - m) / sa).max(-ZMAX);
    let z_hi = ((u_hi - m) / sa).min(ZMAX);
    let pf = if z_lo < z_hi {
        let br = breaks_for(two_ac, &|u| (u - m) / sa);
        integrate(fz, z_lo, z_hi, &br, 1e-14, 1e-12)?.0
    } else {
        0.0
    };
    // Part under the wide law: u = sqrt(b) w, chi-square scale b.
    let two_bc = 2.0 * gap / a;
    let gw = |w: f64| {
        let u = sb * w;
        let nu = l - (u - m) * (u - m) / a + w * w;
        if nu <= 0.0 {
            0.0
        } else {
            normal_pdf(w) * gamma_p(k, nu / two_bc)
        }
    };
    let w_lo = (u_lo / sb).max(-ZMAX);
    let w_hi = (u_hi / sb).min(ZMAX);
    let pg = if w_lo < w_hi {
        let br = breaks_for(two_bc, &|u| u / sb);
        integrate(gw, w_lo, w_hi, &br, 1e-14, 1e-12)?.0
    } else {
        0.0
    };
    Ok((pf - pg).clamp(0.0, 1.0))
}

/// Discriminating event between the squared radius of the OU process at
/// time t (centered at its mean) and at equilibrium, in dimension n:
/// Gamma(n/2, n/(2(1-e^{-2t}))) against Gamma(n/2, n/2).
///
/// Returns the density crossing point and the exact TV.
pub fn tv_gamma_crossing(t: f64, n: usize) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("crossing needs t > 0, got {t}")));
    }
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let alpha = -(2.0 * t).exp_m1() * (-(-2.0 * t).exp()).ln_1p();
    let k = 0.5 * n as f64;
    let q = -(-2.0 * t).exp_m1();
    let eq = GammaLaw::new(k, k)?;
    let st = GammaLaw::new(k, k / q)?;
    let tv = (eq.sf(alpha) - st.sf(alpha)).clamp(0.0, 1.0);
    Ok((alpha, tv))
}

/// Combine per-coordinate values of `kind` into the value for the product laws.
pub fn tensorize(kind: MetricKind, components: &[Extended]) -> Result<Extended> {
    match kind {
        MetricKind::TV => Err(Error::Unsupported(
            "TV does not tensorize exactly; use tv_tensor_bounds".into(),
        )),
        MetricKind::Hellinger => {
            let mut s = 0.0;
            for c in components {
                let h = c.finite().filter(|h| (0.0..=1.0).contains(h)).ok_or_else(|| {
                    Error::arg("Hellinger components must lie in [0, 1]")
                })?;
                s += (-h * h).ln_1p();
            }
            Ok(Extended::Finite((-s.exp_m1()).max(0.0).sqrt()))
        }
        MetricKind::Kullback | MetricKind::Fisher => {
            if components.iter().any(|c| *c == Extended::Infinite) {
                return Ok(Extended::Infinite);
            }
            if components.iter().all(|c| c.is_finite()) {
                return Ok(Extended::Finite(components.iter().map(|c| c.to_f64()).sum()));
            }
            // Some terms exceed the f64 range: sum in log space.
            let lns: Vec<f64> = components.iter().map(|c| c.ln()).collect();
            let mx = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = lns.iter().map(|l| (l - mx).exp()).sum();
            Ok(Extended::from_ln(mx + s.ln()))
        }
        MetricKind::Chi2 => {
            let mut l = 0.0;
            for c in components {
                l += match *c {
                    Extended::Finite(v) => v.ln_1p(),
                    Extended::Huge { ln } => ln,
                    Extended::Infinite => return Ok(Extended::Infinite),
                };
            }
            Ok(Extended::from_ln_1p(l))
        }
        MetricKind::Wasserstein => {
            let mut s = 0.0;
            for c in components {
                let w = c.finite().ok_or_else(|| Error::arg("Wasserstein components must be finite"))?;
                s += w * w;
            }
            Ok(Extended::Finite(s.sqrt()))
        }
    }
}

/// `max_i TV_i <= TV(product) <= min(1, sum_i TV_i)`.
pub fn tv_tensor_bounds(components: &[f64]) -> (f64, f64) {
    let mx = components.iter().copied().fold(0.0, f64::max);
    let s: f64 = components.iter().sum();
    (mx, s.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_laws_are_at_zero() {
        let p = GaussianLaw::scalar(0.3, 1.7).unwrap();
        for k in [MetricKind::Hellinger, MetricKind::Kullback, MetricKind::Chi2, MetricKind::Fisher, MetricKind::Wasserstein] {
            assert_eq!(gauss_distance(k, &p, &p).unwrap(), Extended::Finite(0.0), "{k:?}");
        }
        assert_eq!(tv_gauss_bounds(&p, &p).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn chi2_unit_shift_is_e_minus_one() {
        let p = GaussianLaw::scalar(1.0, 1.0).unwrap();
        let q = GaussianLaw::scalar(0.0, 1.0).unwrap();
        let v = gauss_distance(MetricKind::Chi2, &p, &q).unwrap().to_f64();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn chi2_infinite_when_too_wide() {
        let p = GaussianLaw::scalar(0.0, 2.0).unwrap();
        let q = GaussianLaw::scalar(0.0, 1.0).unwrap();
        assert_eq!(gauss_distance(MetricKind::Chi2, &p, &q).unwrap(), Extended::Infinite);
    }

    #[test]
    fn tv_is_rejected_and_dims_checked() {
        let p = GaussianLaw::scalar(0.0, 1.0).unwrap();
        let q = GaussianLaw::isotropic(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(gauss_distance(MetricKind::TV, &p, &p), Err(Error::Unsupported(_))));
        assert!(matches!(gauss_distance(MetricKind::Kullback, &p, &q), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tv_bounds_unit_shift() {
        let p = GaussianLaw::scalar(1.0, 1.0).unwrap();
        let q = GaussianLaw::scalar(0.0, 1.0).unwrap();
        let (lo, hi) = tv_gauss_bounds(&p, &q).unwrap();
        assert!((lo - (1.0 - (-0.125f64).exp())).abs() < 1e-15);
        assert!((hi - (lo * (2.0 - lo)).sqrt()).abs() < 1e-15);
        let far = GaussianLaw::scalar(10.0, 1.0).unwrap();
        let hi_far = tv_gauss_bounds(&far, &q).unwrap().1;
        assert!(hi_far <= 1.0 && hi_far > 1.0 - 1e-10);
    }

    #[test]
    fn full_matches_isotropic_path() {
        let p = GaussianLaw::isotropic(vec![0.5, -0.2, 1.0], 0.7).unwrap();
        let q = GaussianLaw::isotropic(vec![0.0, 0.1, 0.3], 1.3).unwrap();
        let pf = GaussianLaw::full(p.mean().to_vec(), p.cov_matrix()).unwrap();
        let qf = GaussianLaw::full(q.mean().to_vec(), q.cov_matrix()).unwrap();
        for k in [MetricKind::Hellinger, MetricKind::Kullback, MetricKind::Chi2, MetricKind::Fisher, MetricKind::Wasserstein] {
            let a = gauss_distance(k, &p, &q).unwrap().to_f64();
            let b = gauss_distance(k, &pf, &qf).unwrap().to_f64();
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "{k:?}: {a} vs {b}");
        }
    }

    #[test]
    fn tensorize_examples() {
        let f = Extended::Finite;
        assert_eq!(tensorize(MetricKind::Kullback, &[f(0.5), f(0.5)]).unwrap(), f(1.0));
        assert_eq!(tensorize(MetricKind::Hellinger, &[f(0.3), f(0.0)]).unwrap().to_f64(), 0.3);
        assert!((tensorize(MetricKind::Chi2, &[f(1.0), f(1.0)]).unwrap().to_f64() - 3.0).abs() < 1e-15);
        assert!(tensorize(MetricKind::TV, &[f(0.1)]).is_err());
    }

    #[test]
    fn gamma_crossing_alpha_formula() {
        for &t in &[0.1, 0.5, 2.0] {
            let (alpha, tv) = tv_gamma_crossing(t, 10).unwrap();
            let e: f64 = (-2.0 * t).exp();
            let direct = -(2.0 * t).exp() * (1.0 - e).ln() * (1.0 - e);
            assert!((alpha - direct).abs() < 1e-13 * direct);
            assert!((0.0..=1.0).contains(&tv));
        }
        assert!(tv_gamma_crossing(0.0, 3).is_err());
        assert!(tv_gamma_crossing(30.0, 3).unwrap().1 < 1e-12);
    }

    #[test]
    fn isotropic_tv_equal_variance_closed_form() {
        let v = tv_isotropic_exact(5, 1.0, 0.5, 0.5).unwrap();
        assert!((v - erf(1.0 / (2.0 * 1f64.sqrt()))).abs() < 1e-15);
    }
}
