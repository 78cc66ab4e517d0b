//! Closed forms against independent quadrature.

mod common;

use common::{gauss_legendre, oracle_1d, rel_err, simpson};
use cutofflab::cutoff_lab::{
    douk_budget, empirical_tv_via_pi, expected_log_distance, lower_bound_curve, mehta_log_partition, mehta_log_partition_full,
    UniformComponent,
};
use cutofflab::dyson::{DouParams, ParticleState};
use cutofflab::gauss_metrics::{gauss_distance, tv_scalar_exact, GaussianLaw};
use cutofflab::matrix_ou::{matrix_chi2, EnsembleKind};
use cutofflab::rng::RngStream;
use cutofflab::MetricKind;

#[test]
fn gaussian_closed_forms_match_quadrature() {
    let mut rng = RngStream::new(101, 0);
    for _ in 0..10 {
        let m1 = 4.0 * rng.uniform() - 2.0;
        let m2 = 4.0 * rng.uniform() - 2.0;
        let v2 = 0.3 + 2.7 * rng.uniform();
        let v1 = v2 * (0.2 + 1.6 * rng.uniform());
        let p = GaussianLaw::scalar(m1, v1).unwrap();
        let q = GaussianLaw::scalar(m2, v2).unwrap();
        let o = oracle_1d(m1, v1, m2, v2);
        let get = |k| gauss_distance(k, &p, &q).unwrap().to_f64();
        assert!(rel_err(get(MetricKind::Hellinger), o.hellinger) < 1e-9);
        assert!(rel_err(get(MetricKind::Kullback), o.kullback) < 1e-9);
        assert!(rel_err(get(MetricKind::Chi2), o.chi2) < 1e-9);
        assert!(rel_err(get(MetricKind::Fisher), o.fisher) < 1e-9);
        assert!(rel_err(get(MetricKind::Wasserstein), o.wasserstein) < 1e-9);
        assert!(rel_err(tv_scalar_exact(m1, v1, m2, v2).unwrap(), o.tv) < 1e-9);
    }
}

#[test]
fn mehta_pair_matches_planar_quadrature() {
    // int int exp(-(x^2 + y^2)) (x - y)^2 dx dy by a tensor Simpson rule.
    let k = 600;
    let l = 9.0;
    let inner = |x: f64| simpson(|y| (-(x * x + y * y)).exp() * (x - y) * (x - y), -l, l, k);
    let oracle = simpson(inner, -l, l, k);
    let p = DouParams::new(2, 2.0).unwrap();
    assert!((mehta_log_partition_full(&p) - oracle.ln()).abs() < 1e-6);
    // The chamber carries half of it.
    assert!((mehta_log_partition(&p) - (0.5 * oracle).ln()).abs() < 1e-6);
}

#[test]
fn mehta_other_betas_match_rotated_quadrature() {
    // With u = x - y and v = x + y the pair integral separates:
    // (1/2) int e^{-v^2/2} dv * int e^{-u^2/2} |u|^beta du.
    for beta in [1.0, 4.0] {
        let gv = gauss_legendre(|v| (-0.5 * v * v).exp(), -12.0, 12.0, 200);
        let gu = 2.0 * gauss_legendre(|u: f64| (-0.5 * u * u).exp() * u.powf(beta), 0.0, 12.0, 200);
        let oracle = 0.5 * gv * gu;
        let p = DouParams::new(2, beta).unwrap();
        assert!((mehta_log_partition_full(&p) - oracle.ln()).abs() < 1e-9, "beta {beta}");
    }
}

#[test]
fn mehta_three_particles_match_cubature() {
    let k = 120;
    let l = 7.0;
    let f = |x: f64, y: f64, z: f64| {
        let d = (x - y) * (x - z) * (y - z);
        (-1.5 * (x * x + y * y + z * z)).exp() * d * d
    };
    let oracle = simpson(|x| simpson(|y| simpson(|z| f(x, y, z), -l, l, k), -l, l, k), -l, l, k);
    let p = DouParams::new(3, 2.0).unwrap();
    assert!((mehta_log_partition_full(&p) - oracle.ln()).abs() < 1e-6);
}

fn log_distance_oracle(a: &UniformComponent, b: &UniformComponent, panels: usize) -> f64 {
    let inner = |x: f64| {
        // Split at y = x when it falls inside, so the log singularity sits on an edge.
        if x > b.lo && x < b.hi() {
            gauss_legendre(|y| (x - y).abs().ln(), b.lo, x, panels) + gauss_legendre(|y| (x - y).abs().ln(), x, b.hi(), panels)
        } else {
            gauss_legendre(|y| (x - y).abs().ln(), b.lo, b.hi(), panels)
        }
    };
    gauss_legendre(inner, a.lo, a.hi(), panels) / (a.len * b.len)
}

#[test]
fn log_distance_matches_double_quadrature() {
    let u = |lo, len| UniformComponent::new(lo, len).unwrap();
    // Disjoint unit intervals: the expectation of log(1/|x - y|) lies in [-log 3, 0].
    let (a, b) = (u(0.0, 1.0), u(2.0, 1.0));
    let v = expected_log_distance(&a, &b).unwrap();
    assert!(-v >= -(3f64.ln()) && -v <= 0.0);
    assert!((v - log_distance_oracle(&a, &b, 40)).abs() < 1e-12);
    // Far apart and tiny.
    let (a, b) = (u(0.0, 1e-3), u(5.0, 2e-3));
    let d = expected_log_distance(&a, &b).unwrap() - log_distance_oracle(&a, &b, 10);
    assert!(d.abs() < 1e-12, "{d}");
    // Overlapping, different lengths.
    let (a, b) = (u(0.0, 1.0), u(0.5, 1.5));
    assert!((expected_log_distance(&a, &b).unwrap() - log_distance_oracle(&a, &b, 200)).abs() < 1e-4);
}

#[test]
fn pair_budget_energy_matches_quadrature() {
    // For two particles the mean energy is E[x1^2 + x2^2] + beta E log(1/|x1 - x2|).
    let comps = [UniformComponent::new(-1.0, 0.5).unwrap(), UniformComponent::new(0.3, 0.8).unwrap()];
    let p = DouParams::new(2, 2.0).unwrap();
    let budget = douk_budget(&comps, &p).unwrap();
    let (a, b) = (comps[0], comps[1]);
    let energy = |x: f64, y: f64| x * x + y * y - 2.0 * (x - y).abs().ln();
    let oracle = gauss_legendre(|x| gauss_legendre(|y| energy(x, y), b.lo, b.hi(), 20), a.lo, a.hi(), 20) / (a.len * b.len);
    assert!((budget.interaction_sum - oracle).abs() < 1e-12);
    assert!(budget.ordered_support);
    assert!((budget.entropy_sum - (-(0.5f64.ln()) - 0.8f64.ln())).abs() < 1e-15);
}

#[test]
fn unit_uniforms_have_zero_entropy() {
    let comps = vec![UniformComponent::new(0.0, 1.0).unwrap(); 4];
    let b = douk_budget(&comps, &DouParams::new(4, 1.0).unwrap()).unwrap();
    assert_eq!(b.entropy_sum, 0.0);
}

#[test]
fn projected_lower_bounds_match_quadrature() {
    let n = 9;
    let x0 = ParticleState::new(vec![0.4; n], 0.0).unwrap();
    let p = DouParams::new(n, 2.0).unwrap();
    let pi0 = 0.4 * n as f64;
    for t in [0.3, 1.0, 2.5] {
        let q = (-2.0 * t as f64).exp();
        let o = oracle_1d(pi0 * (-t as f64).exp(), 1.0 - q, 0.0, 1.0);
        let val = |k| lower_bound_curve(&x0, &p, k, &[t]).unwrap().rows[0].value.to_f64();
        assert!(rel_err(val(MetricKind::TV), o.tv) < 1e-9);
        assert!(rel_err(val(MetricKind::Hellinger), o.hellinger) < 1e-9);
        assert!(rel_err(val(MetricKind::Kullback), o.kullback) < 1e-9);
        assert!(rel_err(val(MetricKind::Chi2), o.chi2) < 1e-9);
        assert!(rel_err(val(MetricKind::Wasserstein), o.wasserstein / (n as f64).sqrt()) < 1e-9);
        let proj = empirical_tv_via_pi(&[pi0 * (-t as f64).exp()], pi0, t);
        // One sample passes KS trivially or not; only the exact part matters here.
        if let Ok(e) = proj {
            assert!(rel_err(e.exact, o.tv) < 1e-9);
        }
    }
}

#[test]
fn matrix_chi2_matches_coordinate_product() {
    // GUE with n = 2: four coordinates, each N(c e^{-t}, (1-q)/2) against N(0, 1/2).
    let coords: [f64; 4] = [0.7, -0.2, 0.5, 0.1];
    let norm2: f64 = coords.iter().map(|c| c * c).sum();
    let t: f64 = 0.6;
    let q = (-2.0 * t).exp();
    let mut prod = 1.0;
    for c in coords {
        prod *= 1.0 + oracle_1d(c * (-t).exp(), (1.0 - q) / 2.0, 0.0, 0.5).chi2;
    }
    let v = matrix_chi2(EnsembleKind::Gue, 2, norm2, t).to_f64();
    assert!(rel_err(v, prod - 1.0) < 1e-9);
}
