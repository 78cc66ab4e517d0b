//! Test-local numerics, kept independent of the library's own quadrature.
#![allow(dead_code)]

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

pub fn gauss_pdf(x: f64, m: f64, v: f64) -> f64 {
    (-(x - m) * (x - m) / (2.0 * v)).exp() / (SQRT_2PI * v.sqrt())
}

/// Composite Simpson rule with `k` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: usize) -> f64 {
    let k = k + k % 2;
    let h = (b - a) / k as f64;
    let mut s = f(a) + f(b);
    for i in 1..k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Simpson over consecutive breakpoints, `k` panels per piece.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, pts: &[f64], k: usize) -> f64 {
    pts.windows(2).map(|w| simpson(&f, w[0], w[1], k)).sum()
}

/// Nodes and weights of 10-point Gauss-Legendre on [-1, 1].
const GL_X: [f64; 5] = [0.148_874_338_981_631_2, 0.433_395_394_129_247_2, 0.679_409_568_299_024_4, 0.865_063_366_688_984_5, 0.973_906_528_517_171_7];
const GL_W: [f64; 5] = [0.295_524_224_714_752_9, 0.269_266_719_309_996_4, 0.219_086_362_515_982_0, 0.149_451_349_150_580_6, 0.066_671_344_308_688_1];

/// Composite 10-point Gauss-Legendre with `k` panels; fine near integrable
/// endpoint singularities because no node sits on a panel edge.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / k as f64;
    let mut s = 0.0;
    for p in 0..k {
        let c = a + (p as f64 + 0.5) * h;
        for j in 0..5 {
            let d = 0.5 * h * GL_X[j];
            s += GL_W[j] * (f(c - d) + f(c + d));
        }
    }
    0.5 * h * s
}

/// Real roots of `log N(m1, v1) = log N(m2, v2)` sorted, for breakpoints.
pub fn density_crossings(m1: f64, v1: f64, m2: f64, v2: f64) -> Vec<f64> {
    // (x-m1)^2/v1 - (x-m2)^2/v2 + ln(v1/v2) = 0
    let a = 1.0 / v1 - 1.0 / v2;
    let b = -2.0 * (m1 / v1 - m2 / v2);
    let c = m1 * m1 / v1 - m2 * m2 / v2 + (v1 / v2).ln();
    let mut r = Vec::new();
    if a.abs() < 1e-300 {
        if b != 0.0 {
            r.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            r.push((-b - s) / (2.0 * a));
            r.push((-b + s) / (2.0 * a));
        }
    }
    r.sort_by(f64::total_cmp);
    r
}

fn ln_pdf(x: f64, m: f64, v: f64) -> f64 {
    -(x - m) * (x - m) / (2.0 * v) - 0.5 * (2.0 * std::f64::consts::PI * v).ln()
}

/// Quadrature values of (TV, Hellinger, KL(p|q), chi2(p|q), Fisher(p|q),
/// Wasserstein) for p = N(m1, v1), q = N(m2, v2) on the line. Chi-square is
/// `inf` when `2 v2 <= v1`.
pub struct Oracle1d {
    pub tv: f64,
    pub hellinger: f64,
    pub kullback: f64,
    pub chi2: f64,
    pub fisher: f64,
    pub wasserstein: f64,
}

pub fn oracle_1d(m1: f64, v1: f64, m2: f64, v2: f64) -> Oracle1d {
    const K: usize = 4000;
    let sd = v1.sqrt().max(v2.sqrt());
    let lo = m1.min(m2) - 16.0 * sd;
    let hi = m1.max(m2) + 16.0 * sd;
    let mut pts = vec![lo, hi];
    pts.extend(density_crossings(m1, v1, m2, v2).into_iter().filter(|&x| x > lo && x < hi));
    pts.extend([m1, m2]);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let p = |x: f64| ln_pdf(x, m1, v1).exp();
    let lr = |x: f64| ln_pdf(x, m1, v1) - ln_pdf(x, m2, v2);
    let tv = 0.5 * simpson_pieces(|x| (p(x) - ln_pdf(x, m2, v2).exp()).abs(), &pts, K);
    let bc = simpson_pieces(|x| (0.5 * (ln_pdf(x, m1, v1) + ln_pdf(x, m2, v2))).exp(), &pts, K);
    let kullback = simpson_pieces(|x| p(x) * lr(x), &pts, K);
    let chi2 = if 2.0 * v2 > v1 {
        // p^2/q is Gaussian-shaped with variance v1 v2 / (2 v2 - v1).
        let ve = v1 * v2 / (2.0 * v2 - v1);
        let me = (2.0 * m1 * v2 - m2 * v1) / (2.0 * v2 - v1);
        let w = 16.0 * ve.sqrt();
        simpson(|x| (2.0 * ln_pdf(x, m1, v1) - ln_pdf(x, m2, v2)).exp(), me - w, me + w, 4 * K) - 1.0
    } else {
        f64::INFINITY
    };
    let fisher = simpson_pieces(
        |x| {
            let g = -(x - m1) / v1 + (x - m2) / v2;
            g * g * p(x)
        },
        &pts,
        K,
    );
    let (s1, s2) = (v1.sqrt(), v2.sqrt());
    let w2 = simpson(
        |z| {
            let d = (s1 - s2) * z + m1 - m2;
            d * d * gauss_pdf(z, 0.0, 1.0)
        },
        -16.0,
        16.0,
        K,
    );
    Oracle1d { tv, hellinger: (1.0 - bc).max(0.0).sqrt(), kullback, chi2, fisher, wasserstein: w2.sqrt() }
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(1e-3)
}
