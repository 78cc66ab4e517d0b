//! DOU configurations: parameters, ordered states, energy, eigen-observables,
//! initial-condition builders, semicircle quantiles and exact equilibrium
//! sampling through the tridiagonal beta-Hermite model.

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;
use crate::numeric::bisect;
use crate::rng::RngStream;
use crate::sde_kernels::gamma_sample;
use crate::value::Extended;

/// Particle count and interaction strength. `beta` is 0 or at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DouParams {
    n: usize,
    beta: f64,
}

impl DouParams {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::arg(format!("beta must be finite and nonnegative, got {beta}")));
        }
        if beta > 0.0 && beta < 1.0 {
            return Err(Error::ExcludedRegime { beta });
        }
        Ok(DouParams { n, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Equilibrium mean of |x|^2, `1 + beta (n-1)/2`.
    pub fn beta_n(&self) -> f64 {
        1.0 + 0.5 * self.beta * (self.n as f64 - 1.0)
    }

    /// Degrees of freedom `n + beta n(n-1)/2` of the squared radius.
    pub fn radius_dof(&self) -> f64 {
        let n = self.n as f64;
        n + 0.5 * self.beta * n * (n - 1.0)
    }
}

/// A configuration sorted non-decreasingly, with its time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub x: Vec<f64>,
    pub t: f64,
}

impl ParticleState {
    pub fn new(x: Vec<f64>, t: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::arg("a configuration needs at least one particle"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("positions must be finite"));
        }
        if x.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::arg("positions must be sorted non-decreasingly"));
        }
        Ok(ParticleState { x, t })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.x.windows(2).all(|w| w[0] < w[1])
    }

    /// Smallest gap between neighbours (`inf` for one particle).
    pub fn min_gap(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `n sum x_i^2/2 + beta sum_{i>j} log(1/|x_i - x_j|)`; infinite when two
/// particles coincide and beta > 0.
pub fn energy(x: &[f64], params: &DouParams) -> Extended {
    let n = x.len() as f64;
    let confinement = 0.5 * n * x.iter().map(|v| v * v).sum::<f64>();
    if params.beta == 0.0 {
        return Extended::Finite(confinement);
    }
    let mut inter = 0.0;
    for i in 0..x.len() {
        for j in 0..i {
            let d = (x[i] - x[j]).abs();
            if d == 0.0 {
                return Extended::Infinite;
            }
            inter -= d.ln();
        }
    }
    Extended::Finite(confinement + params.beta * inter)
}

/// Sum of positions, the eigen-observable at spectral value -1.
pub fn pi_sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

/// Squared Euclidean norm; its equilibrium mean is [`DouParams::beta_n`].
pub fn radius2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Sort a configuration non-decreasingly.
pub fn reorder(x: &[f64]) -> ParticleState {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    ParticleState { x: v, t: 0.0 }
}

/// Width `eta = n^{-(kappa+1)}` of the uniform smearing around each particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerSpec {
    kappa: f64,
    eta: f64,
}

impl RegularizerSpec {
    pub fn new(kappa: f64, n: usize) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::arg(format!("kappa must be positive, got {kappa}")));
        }
        if n == 0 {
            return Err(Error::arg("n must be at least 1"));
        }
        Ok(RegularizerSpec { kappa, eta: (n as f64).powf(-(kappa + 1.0)) })
    }

    /// A spec with an explicit width, for limits and tests.
    pub fn with_eta(kappa: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::arg("eta must be positive"));
        }
        Ok(RegularizerSpec { kappa, eta })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// TV merge estimates need `kappa > 3/2`.
    pub fn check_tv_admissible(&self) -> Result<()> {
        if self.kappa > 1.5 {
            Ok(())
        } else {
            Err(Error::arg(format!("kappa must exceed 3/2 for TV experiments, got {}", self.kappa)))
        }
    }

    /// Left end of the interval of particle i (0-based): `x_i + 3(i+1) eta`.
    pub fn offset(&self, i: usize) -> f64 {
        3.0 * (i + 1) as f64 * self.eta
    }

    /// Relative entropy of the smeared law with respect to Lebesgue measure.
    pub fn entropy(&self, n: usize) -> f64 {
        -(n as f64) * self.eta.ln()
    }
}

/// Draw from the product of uniforms on `[x_i + 3 i eta, x_i + 3 i eta + eta]`.
pub fn regularize_initial(x0: &ParticleState, spec: &RegularizerSpec, rng: &mut RngStream) -> ParticleState {
    let x = x0
        .x
        .iter()
        .enumerate()
        .map(|(i, &xi)| xi + spec.offset(i) + spec.eta * rng.uniform())
        .collect();
    ParticleState { x, t: x0.t }
}

/// Distribution function of the semicircle law on `[-sqrt(2 beta), sqrt(2 beta)]`.
pub fn semicircle_cdf(x: f64, beta: f64) -> f64 {
    let r2 = 2.0 * beta;
    let r = r2.sqrt();
    if x <= -r {
        return 0.0;
    }
    if x >= r {
        return 1.0;
    }
    0.5 + (x * (r2 - x * x).sqrt() + r2 * (x / r).asin()) / (2.0 * std::f64::consts::PI * beta)
}

/// Quantiles of order i/n, i = 1..n, of the semicircle law.
pub fn semicircle_quantiles(params: &DouParams) -> Result<Vec<f64>> {
    let n = params.n;
    let beta = params.beta;
    if beta == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let r = (2.0 * beta).sqrt();
    (1..=n)
        .map(|i| {
            if i == n {
                return Ok(r);
            }
            let level = i as f64 / n as f64;
            bisect(|x| semicircle_cdf(x, beta) - level, -r, r, 1e-12)
        })
        .collect()
}

/// Quadratic Wasserstein distance between the empirical measure of `x` and
/// the semicircle quantile vector: `sqrt(mean (x_(i) - rho_i)^2)`.
pub fn wigner_distance(x: &[f64], params: &DouParams) -> Result<f64> {
    if x.len() != params.n {
        return Err(Error::DimensionMismatch { left: x.len(), right: params.n });
    }
    let rho = semicircle_quantiles(params)?;
    crate::stats::wasserstein_sorted(x, &rho)
}

/// Exact draw from the equilibrium `P_n^beta`, sorted.
///
/// Uses the tridiagonal model with N(0,1) diagonal and off-diagonal entries
/// `chi_{beta k}/sqrt(2)`, k = n-1..1, whose eigenvalue density is
/// proportional to `e^{-|l|^2/2} |Delta(l)|^beta`. Dividing by `sqrt(n)` maps
/// it onto `e^{-n|x|^2/2} |Delta(x)|^beta`.
pub fn equilibrium_sample(params: &DouParams, rng: &mut RngStream) -> Result<ParticleState> {
    let n = params.n;
    let scale = 1.0 / (n as f64).sqrt();
    let diag: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    if params.beta == 0.0 {
        let mut x: Vec<f64> = diag.iter().map(|v| v * scale).collect();
        x.sort_by(f64::total_cmp);
        return Ok(ParticleState { x, t: 0.0 });
    }
    // chi_nu / sqrt(2) = sqrt(Gamma(nu/2, 1)).
    let off: Vec<f64> = (1..n)
        .rev()
        .map(|k| gamma_sample(0.5 * params.beta * k as f64, rng).sqrt())
        .collect();
    let ev = tridiagonal_eigenvalues(&diag, &off)?;
    Ok(ParticleState { x: ev.into_iter().map(|v| v * scale).collect(), t: 0.0 })
}

/// First two moments of the mean-field limit of the empirical measure.
pub fn mean_field_moments(m: (f64, f64), beta: f64, t: f64) -> (f64, f64) {
    let q = (-2.0 * t).exp();
    (m.0 * (-t).exp(), m.1 * q - 0.5 * beta * (-2.0 * t).exp_m1())
}
