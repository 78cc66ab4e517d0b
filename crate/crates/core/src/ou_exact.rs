//! Exact distance-to-equilibrium for the n-dimensional OU process
//! `dZ = sqrt(2/n) dB - Z dt`, whose law at time t is
//! `N(z0 e^{-t}, (1 - e^{-2t})/n I)` and whose equilibrium is `N(0, I/n)`.
//!
//! All curves depend on the initial condition only through `n` and `|z0|^2`,
//! so they stay cheap for n in the millions.

use crate::error::{Error, Result};
use crate::gauss_metrics::{tv_band_from, tv_gamma_crossing, tv_isotropic_exact, GaussianLaw, MetricKind};
use crate::numeric::bisect;
use crate::special::erf;
use crate::table::{BoundType, CurveRow, CurveTable};
use crate::value::Extended;

/// Dimension and initial condition of the OU process.
#[derive(Debug, Clone, PartialEq)]
pub struct OuSpec {
    n: usize,
    z0: Vec<f64>,
    norm2: f64,
}

impl OuSpec {
    pub fn new(z0: Vec<f64>) -> Result<Self> {
        if z0.is_empty() {
            return Err(Error::arg("n must be at least 1"));
        }
        if z0.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("initial condition must be finite"));
        }
        let norm2 = z0.iter().map(|v| v * v).sum();
        Ok(OuSpec { n: z0.len(), z0, norm2 })
    }

    /// The constant vector of Euclidean norm `norm`.
    pub fn with_norm(n: usize, norm: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        if !(norm >= 0.0 && norm.is_finite()) {
            return Err(Error::arg("norm must be finite and nonnegative"));
        }
        let c = norm / (n as f64).sqrt();
        Ok(OuSpec { n, z0: vec![c; n], norm2: norm * norm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z0(&self) -> &[f64] {
        &self.z0
    }

    /// |z0|^2
    pub fn norm2(&self) -> f64 {
        self.norm2
    }
}

/// The limit `a` of `sqrt(n) |z0|^2`, which selects the profile shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRegime {
    a: f64,
}

impl ProfileRegime {
    pub fn new(a: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::arg(format!("profile parameter must lie in [0, inf], got {a}")));
        }
        Ok(ProfileRegime { a })
    }

    pub fn infinite() -> Self {
        ProfileRegime { a: f64::INFINITY }
    }

    pub fn a(self) -> f64 {
        self.a
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::arg(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// Law of Z_t. At t = 0 the law is a point mass, which has no density.
pub fn ou_law_at(spec: &OuSpec, t: f64) -> Result<GaussianLaw> {
    check_time(t)?;
    if t == 0.0 {
        return Err(Error::Degenerate("the law at t = 0 is a point mass".into()));
    }
    let decay = (-t).exp();
    let var = -(-2.0 * t).exp_m1() / spec.n as f64;
    GaussianLaw::isotropic(spec.z0.iter().map(|v| v * decay).collect(), var)
}

/// Distance between Law(Z_t) and equilibrium from `n` and `|z0|^2` only.
///
/// TV is the exact value through the one-dimensional reduction of the
/// isotropic pair. Wasserstein is the distance, not its square.
pub fn ou_distance(kind: MetricKind, n: usize, norm2: f64, t: f64) -> Result<Extended> {
    check_time(t)?;
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    let nf = n as f64;
    let q = (-2.0 * t).exp();
    // 1 - e^{-2t}
    let v = -(-2.0 * t).exp_m1();
    if t == 0.0 {
        return Ok(match kind {
            MetricKind::Wasserstein => Extended::Finite((norm2 + 1.0).sqrt()),
            other => other.max_value(),
        });
    }
    Ok(match kind {
        MetricKind::Hellinger => {
            let ln_bc = 0.25 * nf * (-(q * q) / ((2.0 - q) * (2.0 - q))).ln_1p()
                - 0.25 * nf * norm2 * q / (2.0 - q);
            Extended::Finite((-ln_bc.exp_m1()).clamp(0.0, 1.0).sqrt())
        }
        MetricKind::Kullback => Extended::Finite(0.5 * nf * (norm2 * q - q - (-q).ln_1p())),
        MetricKind::Chi2 => {
            let l = -0.5 * nf * (-(q * q)).ln_1p() + nf * norm2 * q / (1.0 + q);
            Extended::from_ln_1p(l)
        }
        MetricKind::Fisher => Extended::Finite(nf * nf * (norm2 * q + q * q / v)),
        MetricKind::Wasserstein => {
            // 2 (1 - sqrt(v) - q/2) = q^2 / (1 + sqrt(v))^2, free of cancellation.
            let s = v.sqrt();
            Extended::Finite((norm2 * q + q * q / ((1.0 + s) * (1.0 + s))).sqrt())
        }
        MetricKind::TV => Extended::Finite(ou_tv_exact(n, norm2, t)?),
    })
}

/// Exact TV between Law(Z_t) and equilibrium.
pub fn ou_tv_exact(n: usize, norm2: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let var = -(-2.0 * t).exp_m1() / nf;
    tv_isotropic_exact(n, norm2.sqrt() * (-t).exp(), var, 1.0 / nf)
}

pub(crate) fn check_grid(ts: &[f64]) -> Result<()> {
    for &t in ts {
        check_time(t)?;
    }
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::arg("time grid must be strictly increasing"));
    }
    Ok(())
}

/// One curve over a grid. TV is reported as its Kraft/Pinsker band (two rows
/// per time); use [`ou_tv_exact_curve`] for exact TV.
pub fn ou_distance_curve(spec: &OuSpec, kind: MetricKind, ts: &[f64]) -> Result<CurveTable> {
    check_grid(ts)?;
    let mut table = CurveTable::new();
    let row = |t: f64, metric: MetricKind, bt: BoundType, v: Extended| {
        CurveRow::exact("ou_curves", spec.n, 0.0, t, metric.name(), bt, v)
    };
    for &t in ts {
        if kind == MetricKind::TV {
            let h = ou_distance(MetricKind::Hellinger, spec.n, spec.norm2, t)?.to_f64();
            let kl = ou_distance(MetricKind::Kullback, spec.n, spec.norm2, t)?.to_f64();
            let (lo, hi) = tv_band_from(h, kl);
            table.push(row(t, kind, BoundType::Lower, Extended::Finite(lo)));
            table.push(row(t, kind, BoundType::Upper, Extended::Finite(hi)));
        } else {
            table.push(row(t, kind, BoundType::Exact, ou_distance(kind, spec.n, spec.norm2, t)?));
        }
    }
    Ok(table)
}

/// Exact TV rows over a grid.
pub fn ou_tv_exact_curve(spec: &OuSpec, ts: &[f64]) -> Result<CurveTable> {
    check_grid(ts)?;
    let mut table = CurveTable::new();
    for &t in ts {
        let v = ou_tv_exact(spec.n, spec.norm2, t)?;
        table.push(CurveRow::exact("ou_curves", spec.n, 0.0, t, "tv", BoundType::Exact, Extended::Finite(v)));
    }
    Ok(table)
}

/// Critical time of the distance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffTime {
    pub time: f64,
    /// Set for Wasserstein with a bounded initial norm: the curve then has a
    /// nondegenerate limit and no cutoff occurs.
    pub no_cutoff: bool,
}

pub fn cutoff_time(kind: MetricKind, n: usize, z0norm: f64) -> Result<CutoffTime> {
    if n == 0 {
        return Err(Error::arg("n must be at least 1"));
    }
    if !(z0norm >= 0.0) {
        return Err(Error::arg("initial norm must be nonnegative"));
    }
    let ln_n = (n as f64).ln();
    let ln_z = z0norm.ln();
    let time = match kind {
        MetricKind::TV | MetricKind::Hellinger | MetricKind::Kullback | MetricKind::Chi2 => {
            (0.5 * ln_n + ln_z).max(0.25 * ln_n)
        }
        MetricKind::Fisher => (ln_n + ln_z).max(0.5 * ln_n),
        MetricKind::Wasserstein => {
            let no_cutoff = !(z0norm > 1.0);
            return Ok(CutoffTime { time: if no_cutoff { 0.0 } else { ln_z }, no_cutoff });
        }
    };
    Ok(CutoffTime { time, no_cutoff: false })
}

/// Time `t_{n,b}` at which the profile is read off.
pub fn profile_time(kind: MetricKind, regime: ProfileRegime, n: usize, z0norm: f64, b: f64) -> Result<f64> {
    let ln_n = (n as f64).ln();
    let ln_z = z0norm.ln();
    let infinite = regime.a.is_infinite();
    Ok(match kind {
        MetricKind::TV | MetricKind::Hellinger | MetricKind::Kullback | MetricKind::Chi2 => {
            if infinite {
                ln_z + 0.5 * ln_n + b
            } else {
                0.25 * ln_n + b
            }
        }
        MetricKind::Fisher => {
            if infinite {
                ln_z + ln_n + b
            } else {
                0.5 * ln_n + b
            }
        }
        MetricKind::Wasserstein => ln_z + b,
    })
}

/// Limiting profile phi(b) of the distance at `t_{n,b}`.
pub fn profile_value(kind: MetricKind, regime: ProfileRegime, b: f64) -> Result<Extended> {
    let a = regime.a;
    let e2 = (-2.0 * b).exp();
    let e4 = e2 * e2;
    // Exponent combining the mean term and the variance term.
    let (mean_part, var_part) = if a.is_infinite() { (e2, 0.0) } else { (a * e2, e4) };
    Ok(match kind {
        MetricKind::Hellinger => {
            Extended::Finite((-(-(mean_part / 8.0 + var_part / 16.0)).exp_m1()).sqrt())
        }
        MetricKind::Kullback => Extended::Finite(0.5 * mean_part + 0.25 * var_part),
        MetricKind::Chi2 => Extended::from_ln_1p(mean_part + 0.5 * var_part),
        MetricKind::Fisher => Extended::Finite(mean_part + var_part),
        MetricKind::TV => Extended::Finite(erf((2.0 * mean_part + var_part).sqrt() / 4.0)),
        MetricKind::Wasserstein => {
            return Err(Error::Unsupported(
                "the Wasserstein profile lives on the log|z0| time scale; use wasserstein_profile".into(),
            ))
        }
    })
}

/// Wasserstein profile at `log|z0| + b` when `|z0| -> infinity`.
pub fn wasserstein_profile(b: f64) -> f64 {
    (-b).exp()
}

/// Limit of the squared Wasserstein curve when `|z0| -> alpha` stays bounded.
pub fn wasserstein2_bounded_limit(alpha: f64, t: f64) -> f64 {
    let q = (-2.0 * t).exp();
    alpha * alpha * q + 2.0 * (1.0 - (1.0 - q).sqrt() - 0.5 * q)
}

fn curve_at(kind: MetricKind, spec: &OuSpec, t: f64) -> Result<f64> {
    let v = ou_distance(kind, spec.n, spec.norm2, t)?;
    Ok(v.to_f64())
}

/// Smallest t with curve(t) <= eta, to 1e-9 in t.
///
/// The search horizon is `10 (1 + c)` with c the cutoff time.
pub fn mixing_time(kind: MetricKind, spec: &OuSpec, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::arg("threshold must be positive"));
    }
    if Extended::Finite(eta) >= kind.max_value() {
        return Ok(0.0);
    }
    if curve_at(kind, spec, 0.0)? <= eta {
        return Ok(0.0);
    }
    let c = cutoff_time(kind, spec.n, spec.norm2.sqrt())?.time.max(0.0);
    let horizon = 10.0 * (1.0 + c);
    let g = |t: f64| curve_at(kind, spec, t).map(|v| v.min(f64::MAX) - eta);
    if g(horizon)? > 0.0 {
        return Err(Error::Horizon { eta, horizon });
    }
    // Errors inside the closure are surfaced after the search.
    let mut failure = None;
    let t = bisect(
        |t| match g(t) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        horizon,
        1e-10,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Bias and variance terms of the triangle decomposition:
/// `A_t = dist(Law(Z_t), Law(Z_t - z0 e^{-t}))` and
/// `B_t = dist(Law(Z_t - z0 e^{-t}), equilibrium)`.
///
/// Only metrics that satisfy the triangle inequality are accepted.
pub fn competition_terms(kind: MetricKind, n: usize, norm2: f64, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    if !(t > 0.0) {
        return Err(Error::Degenerate("the decomposition needs t > 0".into()));
    }
    let nf = n as f64;
    let q = (-2.0 * t).exp();
    let var = -(-2.0 * t).exp_m1() / nf;
    // Mean gap squared over the common variance.
    let snr = norm2 * q / var;
    match kind {
        MetricKind::TV => {
            let a = erf(snr.sqrt() / (2.0 * std::f64::consts::SQRT_2));
            let (_, b) = tv_gamma_crossing(t, n)?;
            Ok((a, b))
        }
        MetricKind::Hellinger => {
            let a = (-(-snr / 8.0).exp_m1()).sqrt();
            let b = ou_distance(MetricKind::Hellinger, n, 0.0, t)?.to_f64();
            Ok((a, b))
        }
        other => Err(Error::Unsupported(format!(
            "{} does not satisfy the triangle inequality",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss_metrics::gauss_distance;

    #[test]
    fn mehler_arithmetic() {
        let spec = OuSpec::new(vec![1.0]).unwrap();
        let law = ou_law_at(&spec, std::f64::consts::LN_2).unwrap();
        assert!((law.mean()[0] - 0.5).abs() < 1e-15);
        let cov = law.cov_matrix();
        assert!((cov[(0, 0)] - 0.75).abs() < 1e-15);
        assert!(matches!(ou_law_at(&spec, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn closed_forms_agree_with_generic_gaussian_formulas() {
        let spec = OuSpec::new(vec![0.3, -1.2, 0.7, 2.0]).unwrap();
        let eq = GaussianLaw::isotropic(vec![0.0; 4], 0.25).unwrap();
        for &t in &[0.05, 0.4, 1.3, 4.0] {
            let law = ou_law_at(&spec, t).unwrap();
            for kind in [
                MetricKind::Hellinger,
                MetricKind::Kullback,
                MetricKind::Chi2,
                MetricKind::Fisher,
                MetricKind::Wasserstein,
            ] {
                let a = ou_distance(kind, 4, spec.norm2(), t).unwrap().to_f64();
                let b = gauss_distance(kind, &law, &eq).unwrap().to_f64();
                assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{kind:?} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn wasserstein_at_zero_start() {
        let w = ou_distance(MetricKind::Wasserstein, 7, 0.0, 1e-12).unwrap().to_f64();
        assert!((w - 1.0).abs() < 1e-5);
    }
}
