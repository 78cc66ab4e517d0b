use proptest::prelude::*;

use cutofflab::cutoff_lab::{entropy_upper_curve, initial_kl_bound, lower_bound_curve};
use cutofflab::dyson::{reorder, DouParams, ParticleState, RegularizerSpec};
use cutofflab::gauss_metrics::{gauss_distance, tensorize, tv_gauss_bounds, tv_scalar_exact, GaussianLaw};
use cutofflab::matrix_ou::{hoffman_wielandt_check, EnsembleKind, MatrixEnsemble};
use cutofflab::ou_exact::ou_distance;
use cutofflab::{BoundType, Extended, MetricKind};

fn val(kind: MetricKind, p: &GaussianLaw, q: &GaussianLaw) -> f64 {
    gauss_distance(kind, p, q).unwrap().to_f64()
}

fn law() -> impl Strategy<Value = (f64, f64)> {
    (-3.0..3.0f64, 0.2..4.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn divergence_inequalities((m1, v1) in law(), (m2, v2) in law()) {
        let p = GaussianLaw::scalar(m1, v1).unwrap();
        let q = GaussianLaw::scalar(m2, v2).unwrap();
        let tv = tv_scalar_exact(m1, v1, m2, v2).unwrap();
        let h = val(MetricKind::Hellinger, &p, &q);
        let kl = val(MetricKind::Kullback, &p, &q);
        let tol = 1e-12;
        prop_assert!(tv * tv <= 2.0 * kl + tol);
        prop_assert!(2.0 * h * h <= kl + tol);
        prop_assert!(h * h <= tv + tol);
        prop_assert!(tv <= h * (2.0 - h * h).sqrt() + tol);
        let c2 = gauss_distance(MetricKind::Chi2, &p, &q).unwrap();
        if let Some(c2) = c2.finite() {
            let chi = c2.sqrt();
            prop_assert!(kl <= 2.0 * chi + c2 + tol);
            prop_assert!(kl <= c2.ln_1p() + tol);
        }
        let (lo, hi) = tv_gauss_bounds(&p, &q).unwrap();
        prop_assert!(lo <= tv + tol && tv <= hi + tol);
    }

    #[test]
    fn metrics_tensorize(pairs in prop::collection::vec((law(), law()), 1..5)) {
        let (mp, vp): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(a, _)| *a).unzip();
        let (mq, vq): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(_, b)| *b).unzip();
        let p = GaussianLaw::diagonal(mp.clone(), &vp).unwrap();
        let q = GaussianLaw::diagonal(mq.clone(), &vq).unwrap();
        for kind in [MetricKind::Hellinger, MetricKind::Kullback, MetricKind::Chi2, MetricKind::Fisher, MetricKind::Wasserstein] {
            let parts: Vec<Extended> = (0..mp.len())
                .map(|i| {
                    let a = GaussianLaw::scalar(mp[i], vp[i]).unwrap();
                    let b = GaussianLaw::scalar(mq[i], vq[i]).unwrap();
                    gauss_distance(kind, &a, &b).unwrap()
                })
                .collect();
            let joint = gauss_distance(kind, &p, &q).unwrap();
            let combined = tensorize(kind, &parts).unwrap();
            match (joint.finite(), combined.finite()) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "{kind:?}: {a} vs {b}"),
                _ => prop_assert_eq!(joint.is_finite(), combined.is_finite()),
            }
        }
    }

    #[test]
    fn ou_curves_decrease_in_time(n in 1usize..200, norm2 in 0.01..100.0f64, t in 0.01..8.0f64, dt in 0.001..1.0f64) {
        for kind in [MetricKind::TV, MetricKind::Hellinger, MetricKind::Kullback, MetricKind::Chi2, MetricKind::Fisher, MetricKind::Wasserstein] {
            let a = ou_distance(kind, n, norm2, t).unwrap();
            let b = ou_distance(kind, n, norm2, t + dt).unwrap();
            prop_assert!(b.to_f64() <= a.to_f64() * (1.0 + 1e-12) + 1e-300, "{kind:?}");
        }
    }

    #[test]
    fn hoffman_wielandt(n in 1usize..9, beta in prop::sample::select(vec![1.0, 2.0]), seed in any::<u64>()) {
        let kind = EnsembleKind::from_beta(beta).unwrap();
        let mut rng = cutofflab::rng::RngStream::new(seed, 0);
        let d = kind.dim(n);
        let mut coords = |s: f64| (0..d).map(|_| s * rng.normal()).collect::<Vec<_>>();
        let a = MatrixEnsemble::from_coords(kind, n, coords(1.0)).unwrap();
        let b = MatrixEnsemble::from_coords(kind, n, coords(0.5)).unwrap();
        let (lhs, rhs) = hoffman_wielandt_check(&a, &b).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn reorder_sorts_and_permutes(x in prop::collection::vec(-10.0..10.0f64, 1..30)) {
        let r = reorder(&x);
        prop_assert!(r.x.windows(2).all(|w| w[0] <= w[1]));
        let mut s = x.clone();
        s.sort_by(f64::total_cmp);
        prop_assert_eq!(r.x, s);
    }

    #[test]
    fn entropy_budget_sandwich(n in 2usize..24, a in -2.0..2.0f64, beta in prop::sample::select(vec![1.0, 2.0, 4.0]), t in 0.0..6.0f64) {
        let x0 = ParticleState::new(vec![a; n], 0.0).unwrap();
        let p = DouParams::new(n, beta).unwrap();
        let spec = RegularizerSpec::new(2.0, n).unwrap();
        let k0 = initial_kl_bound(&x0, &p, &spec).unwrap();
        prop_assert!(k0 >= 0.0);
        let up = entropy_upper_curve(&x0, &p, &spec, &[t]).unwrap();
        let lo = lower_bound_curve(&x0, &p, MetricKind::TV, &[t]).unwrap();
        let upper_tv = up.select("tv", BoundType::Upper).next().unwrap().value.to_f64();
        let lower_tv = lo.rows[0].value.to_f64();
        prop_assert!(lower_tv <= upper_tv + 1e-12);
        let upper_kl = up.select("kullback", BoundType::Upper).next().unwrap().value.to_f64();
        let lower_kl = lower_bound_curve(&x0, &p, MetricKind::Kullback, &[t]).unwrap().rows[0].value.to_f64();
        prop_assert!(lower_kl <= upper_kl * (1.0 + 1e-12));
    }

    #[test]
    fn projected_lower_bound_below_exact_ou(n in 1usize..64, a in -3.0..3.0f64, t in 0.01..6.0f64) {
        // With beta = 0 the process is OU, so the projection can only lose information.
        let x0 = ParticleState::new(vec![a; n], 0.0).unwrap();
        let p = DouParams::new(n, 0.0).unwrap();
        let norm2 = n as f64 * a * a;
        for kind in [MetricKind::TV, MetricKind::Hellinger, MetricKind::Kullback, MetricKind::Chi2] {
            let lower = lower_bound_curve(&x0, &p, kind, &[t]).unwrap().rows[0].value.to_f64();
            let exact = ou_distance(kind, n, norm2, t).unwrap().to_f64();
            prop_assert!(lower <= exact * (1.0 + 1e-9) + 1e-15, "{kind:?}: {lower} > {exact}");
        }
    }
}
