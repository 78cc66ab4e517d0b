//! Coupled pairs of DOU paths.
//!
//! The parallel coupling drives both copies with one Brownian motion. The
//! merge coupling shares the increment of coordinate i only while
//! `x_i == y_i` and uses an independent increment otherwise; the pair is
//! identified once the area `sum_i (y_i - x_i)` reaches zero.
//!
//! Coordinates of a merge pair are never reset individually. The interaction
//! terms cancel in the area, so it stays an exact OU chain driven by the
//! unmerged increments, at the price of occasional crossings `y_i < x_i`,
//! which are counted. Resetting crossed coordinates would keep the order but
//! add a reflection push that keeps the area away from zero.
//!
//! Both use the exponential-Euler update of [`crate::sde_kernels`] with an
//! extra acceptance test. Writing `d = y - x`, the drift part of one step is
//!
//! ```text
//! d'_i = e^{-h} d_i + (1 - e^{-h}) sum_j w_ij (d_j - d_i),
//! w_ij = (beta/n) / ((y_i - y_j)(x_i - x_j)),
//! ```
//!
//! a matrix with nonnegative entries and row sums `e^{-h}` as soon as
//! `(1 - e^{-h}) max_i sum_j w_ij <= e^{-h}`. Steps violating that bound are
//! split, so under shared noise the discrete pair keeps the ordering `y >= x`
//! and the decay `max_i d_i <= e^{-t} max_i d_i(0)` exactly, up to rounding.

use rayon::prelude::*;

use crate::dyson::{regularize_initial, DouParams, ParticleState, RegularizerSpec};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sde_kernels::{exp_euler, GAP_SHRINK_LIMIT, MIN_STEP_FRACTION, TAG_BRIDGE, TAG_REGULARIZE};
use crate::stats::{wilson_interval, Z95};
use crate::table::{BoundType, CurveRow, CurveTable};
use crate::value::Extended;

/// Substream of the increments that drive unmerged coordinates of `y`.
pub(crate) const TAG_INDEPENDENT: u64 = 0x696e_6465_7065;

/// Per-particle area below which the pair counts as merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Default censoring horizon of merge runs.
pub const CENSOR_HORIZON: f64 = 10.0;

/// Two configurations started with `y_i >= x_i`, and the bookkeeping of the
/// area process.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    /// Set once the area has hit zero; afterwards `y == x`.
    pub merged: bool,
    /// Accumulated quadratic variation of the area, `int (4/n) N_s ds`: each
    /// unmerged coordinate carries two independent increments of variance
    /// `2/n` per unit time.
    pub qv: f64,
}

impl CoupledPair {
    pub fn new(x: &ParticleState, y: &ParticleState) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::DimensionMismatch { left: x.n(), right: y.n() });
        }
        if x.x.iter().zip(&y.x).any(|(a, b)| b < a) {
            return Err(Error::arg("coupled pair needs y_i >= x_i for every i"));
        }
        let merged = x.x == y.x;
        Ok(CoupledPair { x: x.x.clone(), y: y.x.clone(), t: 0.0, merged, qv: 0.0 })
    }

    pub fn area(&self) -> f64 {
        self.y.iter().zip(&self.x).map(|(b, a)| b - a).sum()
    }

    pub fn merged_mask(&self) -> Vec<bool> {
        self.x.iter().zip(&self.y).map(|(a, b)| a == b).collect()
    }

    /// Number of coordinates where the copies differ.
    pub fn n_active(&self) -> usize {
        self.x.iter().zip(&self.y).filter(|(a, b)| a != b).count()
    }

    pub fn max_gap(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn euclidean_gap(&self) -> f64 {
        self.x.iter().zip(&self.y).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Noise {
    Shared,
    Switching,
}

/// Adaptive stepper for a pair. Rejected steps are halved with Brownian
/// bridge draws for both driving paths.
struct PairStepper {
    coef: f64,
    n: usize,
    noise: Noise,
    min_h: f64,
    drift: Vec<f64>,
    dy: Vec<f64>,
    cx: Vec<f64>,
    cy: Vec<f64>,
    crossings: u64,
}

impl PairStepper {
    fn new(params: &DouParams, noise: Noise, dt: f64) -> Self {
        let n = params.n();
        PairStepper {
            coef: params.beta() / n as f64,
            n,
            noise,
            min_h: MIN_STEP_FRACTION * dt,
            drift: vec![0.0; n],
            dy: vec![0.0; n],
            cx: vec![0.0; n],
            cy: vec![0.0; n],
            crossings: 0,
        }
    }

    fn chamber_ok(&self, old: &[f64], new: &[f64]) -> bool {
        if self.coef == 0.0 {
            return new.iter().all(|v| v.is_finite());
        }
        (1..self.n).all(|i| {
            let g = new[i] - new[i - 1];
            g > 0.0 && g >= GAP_SHRINK_LIMIT * (old[i] - old[i - 1])
        })
    }

    /// `(1 - e^{-h}) max_i sum_j w_ij <= e^{-h}`.
    fn contraction_ok(&self, x: &[f64], y: &[f64], h: f64) -> bool {
        if self.coef == 0.0 {
            return true;
        }
        let gain = -(-h).exp_m1();
        let decay = (-h).exp();
        (0..self.n).all(|i| {
            let s: f64 = (0..self.n)
                .filter(|&j| j != i)
                .map(|j| self.coef / ((y[i] - y[j]) * (x[i] - x[j])))
                .sum();
            gain * s <= decay
        })
    }

    /// Advance over `h`. In merge mode returns the elapsed time at which the
    /// area hit zero, if it did.
    fn advance(
        &mut self,
        pair: &mut CoupledPair,
        h: f64,
        db: &[f64],
        dw: &[f64],
        main: &RngStream,
    ) -> std::result::Result<Option<f64>, String> {
        let mut bridge: Option<RngStream> = None;
        let mut stack: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
        let (mut cur_h, mut cur_b, mut cur_w) = (h, db.to_vec(), dw.to_vec());
        let mut elapsed = 0.0;
        loop {
            for i in 0..self.n {
                let shared = self.noise == Noise::Shared || pair.x[i] == pair.y[i];
                self.dy[i] = if shared { cur_b[i] } else { cur_w[i] };
            }
            exp_euler(&pair.x, cur_h, &cur_b, self.coef, &mut self.drift, &mut self.cx);
            exp_euler(&pair.y, cur_h, &self.dy, self.coef, &mut self.drift, &mut self.cy);
            let mut ok = self.chamber_ok(&pair.x, &self.cx)
                && self.chamber_ok(&pair.y, &self.cy)
                && self.contraction_ok(&pair.x, &pair.y, cur_h);
            if !ok && 0.5 * cur_h < self.min_h {
                // Same floor repair as the single-process stepper.
                self.cx.sort_by(f64::total_cmp);
                self.cy.sort_by(f64::total_cmp);
                let strict = |v: &[f64]| v.iter().all(|a| a.is_finite()) && v.windows(2).all(|w| w[1] > w[0]);
                if !(strict(&self.cx) && strict(&self.cy)) {
                    return Err(format!("collision at the minimum step {:e}; x = {:?}, y = {:?}", self.min_h, pair.x, pair.y));
                }
                ok = true;
            }
            if ok {
                let active = pair.n_active() as f64;
                pair.qv += 4.0 / self.n as f64 * active * cur_h;
                elapsed += cur_h;
                if self.noise == Noise::Switching {
                    let raw_area: f64 = self.cy.iter().zip(&self.cx).map(|(b, a)| b - a).sum();
                    if raw_area <= self.n as f64 * MERGE_TOLERANCE {
                        pair.x.copy_from_slice(&self.cx);
                        pair.y.copy_from_slice(&self.cx);
                        pair.merged = true;
                        return Ok(Some(elapsed));
                    }
                    if self.cy.iter().zip(&self.cx).any(|(b, a)| b < a) {
                        self.crossings += 1;
                    }
                }
                pair.x.copy_from_slice(&self.cx);
                pair.y.copy_from_slice(&self.cy);
                match stack.pop() {
                    Some((nh, nb, nw)) => {
                        cur_h = nh;
                        cur_b = nb;
                        cur_w = nw;
                        continue;
                    }
                    None => return Ok(None),
                }
            }
            let half = 0.5 * cur_h;
            let b = bridge.get_or_insert_with(|| main.fork(TAG_BRIDGE ^ main.position()));
            let sd = (0.5 * half).sqrt();
            let fb: Vec<f64> = cur_b.iter().map(|&w| 0.5 * w + sd * b.normal()).collect();
            let fw: Vec<f64> = cur_w.iter().map(|&w| 0.5 * w + sd * b.normal()).collect();
            let sb = cur_b.iter().zip(&fb).map(|(w, f)| w - f).collect();
            let sw = cur_w.iter().zip(&fw).map(|(w, f)| w - f).collect();
            stack.push((half, sb, sw));
            cur_h = half;
            cur_b = fb;
            cur_w = fw;
        }
    }
}

fn check_pair_start(x0: &ParticleState, y0: &ParticleState, params: &DouParams) -> Result<()> {
    if x0.n() != params.n() || y0.n() != params.n() {
        return Err(Error::DimensionMismatch { left: x0.n(), right: params.n() });
    }
    if params.beta() >= 1.0 && !(x0.is_strictly_ordered() && y0.is_strictly_ordered()) {
        return Err(Error::Domain("coupled runs need strictly ordered starts for beta >= 1; regularize first".into()));
    }
    Ok(())
}

fn uniform_steps(span: f64, dt: f64) -> (usize, f64) {
    if span <= 0.0 {
        return (0, 0.0);
    }
    let k = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
    (k, span / k as f64)
}

/// Gaps of a parallel-coupled pair recorded on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPath {
    pub times: Vec<f64>,
    pub euclidean: Vec<f64>,
    pub max_gap: Vec<f64>,
    pub min_gap: Vec<f64>,
}

/// Run two copies from `x0` and `y0` with the same Brownian increments and
/// record `|X_t - Y_t|` and the extreme coordinate gaps on `t_grid`.
pub fn parallel_coupling_run(
    x0: &ParticleState,
    y0: &ParticleState,
    params: &DouParams,
    dt: f64,
    t_grid: &[f64],
    rng: &mut RngStream,
) -> Result<GapPath> {
    check_pair_start(x0, y0, params)?;
    if !(dt > 0.0) {
        return Err(Error::arg("dt must be positive"));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::arg("time grid must be nonnegative and strictly increasing"));
    }
    let n = params.n();
    let mut pair = CoupledPair { x: x0.x.clone(), y: y0.x.clone(), t: 0.0, merged: false, qv: 0.0 };
    let mut stepper = PairStepper::new(params, Noise::Shared, dt);
    let mut out = GapPath { times: t_grid.to_vec(), euclidean: vec![], max_gap: vec![], min_gap: vec![] };
    let mut db = vec![0.0; n];
    for &tg in t_grid {
        let (k, h) = uniform_steps(tg - pair.t, dt);
        for _ in 0..k {
            let sh = h.sqrt();
            db.iter_mut().for_each(|w| *w = sh * rng.normal());
            stepper
                .advance(&mut pair, h, &db, &db, rng)
                .map_err(|reason| Error::StepFailure { replica: rng.stream_id(), t: pair.t, reason })?;
            pair.t += h;
        }
        pair.t = pair.t.max(tg);
        let d: Vec<f64> = pair.y.iter().zip(&pair.x).map(|(b, a)| b - a).collect();
        out.euclidean.push(d.iter().map(|v| v * v).sum::<f64>().sqrt());
        out.max_gap.push(d.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        out.min_gap.push(d.iter().copied().fold(f64::INFINITY, f64::min));
    }
    Ok(out)
}

/// Merge-coupling run control.
#[derive(Debug, Clone, PartialEq)]
pub struct MergePlan {
    pub dt: f64,
    /// Runs still unmerged at this time are censored.
    pub horizon: f64,
    /// Times at which area and active count are recorded.
    pub t_grid: Vec<f64>,
}

impl MergePlan {
    pub fn new(dt: f64, horizon: f64, t_grid: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::arg("dt must be positive"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::arg("horizon must be positive"));
        }
        if t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
            return Err(Error::arg("record grid must be increasing within [0, horizon]"));
        }
        Ok(MergePlan { dt, horizon, t_grid })
    }
}

/// Result of one merge-coupling replica.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    /// Merge time, or `None` when censored at the horizon.
    pub tau: Option<f64>,
    pub initial_area: f64,
    /// Quadratic variation of the area accumulated up to `tau` (or the horizon).
    pub qv: f64,
    pub area: Vec<f64>,
    pub n_active: Vec<usize>,
    /// Largest `max_i (y_i - x_i) e^t / max_i (y_i(0) - x_i(0))` seen on the grid.
    pub max_gap_ratio: f64,
    /// Accepted substeps that ended with some `y_i < x_i`.
    pub crossings: u64,
}

/// Run the switching-noise pair from `(x0, y0)` until the area hits zero or
/// the horizon. Increments for `x` (and merged coordinates of `y`) come from
/// `rng`; those of unmerged coordinates from one fixed substream of it.
pub fn merge_coupling_from(
    x0: &ParticleState,
    y0: &ParticleState,
    params: &DouParams,
    plan: &MergePlan,
    rng: &mut RngStream,
) -> Result<MergeOutcome> {
    check_pair_start(x0, y0, params)?;
    let n = params.n();
    let mut pair = CoupledPair::new(x0, y0)?;
    let initial_area = pair.area();
    let initial_max = pair.max_gap();
    let mut stepper = PairStepper::new(params, Noise::Switching, plan.dt);
    let mut indep = rng.fork(TAG_INDEPENDENT);
    let mut db = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut out = MergeOutcome {
        tau: if pair.merged { Some(0.0) } else { None },
        initial_area,
        qv: 0.0,
        area: Vec::with_capacity(plan.t_grid.len()),
        n_active: Vec::with_capacity(plan.t_grid.len()),
        max_gap_ratio: if initial_max > 0.0 { 1.0 } else { 0.0 },
        crossings: 0,
    };
    let mut checkpoints = plan.t_grid.clone();
    if checkpoints.last().is_none_or(|&t| t < plan.horizon) {
        checkpoints.push(plan.horizon);
    }
    let mut gi = 0;
    for &tc in &checkpoints {
        if !pair.merged {
            let (k, h) = uniform_steps(tc - pair.t, plan.dt);
            for _ in 0..k {
                let sh = h.sqrt();
                db.iter_mut().for_each(|w| *w = sh * rng.normal());
                dw.iter_mut().for_each(|w| *w = sh * indep.normal());
                let hit = stepper
                    .advance(&mut pair, h, &db, &dw, rng)
                    .map_err(|reason| Error::StepFailure { replica: rng.stream_id(), t: pair.t, reason })?;
                if let Some(s) = hit {
                    out.tau = Some(pair.t + s);
                    out.qv = pair.qv;
                    break;
                }
                pair.t += h;
            }
            pair.t = pair.t.max(tc);
        }
        if gi < plan.t_grid.len() && plan.t_grid[gi] == tc {
            out.area.push(if pair.merged { 0.0 } else { pair.area() });
            out.n_active.push(if pair.merged { 0 } else { pair.n_active() });
            if initial_max > 0.0 && !pair.merged {
                out.max_gap_ratio = out.max_gap_ratio.max(pair.max_gap() * tc.exp() / initial_max);
            }
            gi += 1;
        }
    }
    if out.tau.is_none() {
        out.qv = pair.qv;
    }
    out.crossings = stepper.crossings;
    Ok(out)
}

/// Merge coupling with `y0` drawn from the regularized law around `x0`.
pub fn merge_coupling_run(
    x0: &ParticleState,
    params: &DouParams,
    spec: &RegularizerSpec,
    plan: &MergePlan,
    rng: &mut RngStream,
) -> Result<MergeOutcome> {
    let y0 = regularize_initial(x0, spec, &mut rng.fork(TAG_REGULARIZE));
    merge_coupling_from(x0, &y0, params, plan, rng)
}

/// Replica-parallel merge runs; replica r uses stream `(seed, r)`.
pub fn merge_coupling_replicas(
    x0: &ParticleState,
    params: &DouParams,
    spec: &RegularizerSpec,
    plan: &MergePlan,
    replicas: usize,
    seed: u64,
) -> Result<Vec<MergeOutcome>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| merge_coupling_run(x0, params, spec, plan, &mut RngStream::new(seed, r as u64)))
        .collect()
}

/// Summary of the shared-noise decay check over many replicas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub replicas: usize,
    /// Grid points with some `y_i < x_i`.
    pub ordering_violations: usize,
    /// Largest `max_gap(t) e^t / max_gap(0) - 1` over replicas and grid.
    pub max_excess: f64,
}

/// Shared-noise runs from `x0` and a regularized `y0 >= x0`, checking the
/// ordering and the exponential decay of the largest coordinate gap.
pub fn decay_check(
    x0: &ParticleState,
    params: &DouParams,
    spec: &RegularizerSpec,
    dt: f64,
    t_grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<DecayReport> {
    let per: Vec<Result<(usize, f64)>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64);
            let y0 = regularize_initial(x0, spec, &mut rng.fork(TAG_REGULARIZE));
            let m0 = y0.x.iter().zip(&x0.x).map(|(b, a)| b - a).fold(0.0, f64::max);
            let path = parallel_coupling_run(x0, &y0, params, dt, t_grid, &mut rng)?;
            let violations = path.min_gap.iter().filter(|&&g| g < 0.0).count();
            let excess = path
                .times
                .iter()
                .zip(&path.max_gap)
                .map(|(t, g)| g * t.exp() / m0 - 1.0)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((violations, excess))
        })
        .collect();
    let mut rep = DecayReport { replicas, ordering_violations: 0, max_excess: f64::NEG_INFINITY };
    for p in per {
        let (v, e) = p?;
        rep.ordering_violations += v;
        rep.max_excess = rep.max_excess.max(e);
    }
    Ok(rep)
}

/// One row of the tail experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub u: f64,
    /// Replicas with `<A>_tau >= a^2 u`, censored runs included.
    pub exceed: usize,
    pub replicas: usize,
    pub censored: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// The tail bound `4/sqrt(u)`.
    pub bound: f64,
}

/// Empirical tail of the area's quadratic variation at its hitting time of
/// zero, started from area `a` (each `y_i = x_i + a/n`).
pub fn supermartingale_tail_experiment(
    x0: &ParticleState,
    params: &DouParams,
    a: f64,
    u_grid: &[f64],
    replicas: usize,
    plan: &MergePlan,
    seed: u64,
) -> Result<Vec<TailRow>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::arg("initial area must be positive"));
    }
    if u_grid.iter().any(|&u| !(u >= 1.0)) {
        return Err(Error::arg("tail levels u must be at least 1"));
    }
    let shift = a / params.n() as f64;
    let y0 = ParticleState::new(x0.x.iter().map(|v| v + shift).collect(), 0.0)?;
    let outcomes: Vec<Result<MergeOutcome>> = (0..replicas)
        .into_par_iter()
        .map(|r| merge_coupling_from(x0, &y0, params, plan, &mut RngStream::new(seed, r as u64)))
        .collect();
    let mut qvs = Vec::with_capacity(replicas);
    for o in outcomes {
        let o = o?;
        qvs.push((o.qv, o.tau.is_none()));
    }
    let censored = qvs.iter().filter(|q| q.1).count();
    Ok(u_grid
        .iter()
        .map(|&u| {
            let level = a * a * u;
            let exceed = qvs.iter().filter(|(q, c)| *c || *q >= level).count();
            let (lo, hi) = wilson_interval(exceed, replicas, Z95);
            TailRow {
                u,
                exceed,
                replicas,
                censored,
                p_hat: exceed as f64 / replicas.max(1) as f64,
                wilson_lo: lo,
                wilson_hi: hi,
                bound: 4.0 / u.sqrt(),
            }
        })
        .collect())
}

/// Tail rows as a curve table; the `t` column carries the level u.
pub fn tail_table(rows: &[TailRow], params: &DouParams, seed: u64) -> CurveTable {
    let mut table = CurveTable::default();
    let (n, beta) = (params.n(), params.beta());
    for r in rows {
        let se = (r.p_hat * (1.0 - r.p_hat) / r.replicas as f64).sqrt();
        table.push(
            CurveRow::exact("coupling_tail", n, beta, r.u, "qv_tail", BoundType::Sample, Extended::Finite(r.p_hat))
                .with_mc(r.p_hat, se, r.replicas, seed),
        );
        table.push(CurveRow::exact("coupling_tail", n, beta, r.u, "qv_tail_wilson", BoundType::Upper, Extended::Finite(r.wilson_hi)));
        table.push(CurveRow::exact("coupling_tail", n, beta, r.u, "qv_tail_bound", BoundType::Upper, Extended::Finite(r.bound)));
    }
    table
}

/// Median merge time per n for `x0` at the semicircle quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeScalingRow {
    pub n: usize,
    /// Median over replicas, censored runs counted as `+inf`.
    pub median_tau: f64,
    pub censored: usize,
    /// `8 n^{3 - 2 kappa} log n`, the high-probability ceiling on tau.
    pub ceiling: f64,
}

pub fn merge_time_scaling(ns: &[usize], kappa: f64, beta: f64, replicas: usize, seed: u64) -> Result<Vec<MergeScalingRow>> {
    ns.iter()
        .map(|&n| {
            let params = DouParams::new(n, beta)?;
            let spec = RegularizerSpec::new(kappa, n)?;
            let x0 = ParticleState::new(crate::dyson::semicircle_quantiles(&params)?, 0.0)?;
            // Initial area is of order n^{1 - kappa}; resolve its square.
            let a0 = 1.5 * (n as f64).powf(1.0 - kappa);
            let dt = (a0 * a0 / 50.0).min(1e-3);
            let plan = MergePlan::new(dt, CENSOR_HORIZON, vec![])?;
            let outs = merge_coupling_replicas(&x0, &params, &spec, &plan, replicas, seed)?;
            let mut taus: Vec<f64> = outs.iter().map(|o| o.tau.unwrap_or(f64::INFINITY)).collect();
            taus.sort_by(f64::total_cmp);
            let nf = n as f64;
            Ok(MergeScalingRow {
                n,
                median_tau: taus[taus.len() / 2],
                censored: outs.iter().filter(|o| o.tau.is_none()).count(),
                ceiling: 8.0 * nf.powf(3.0 - 2.0 * kappa) * nf.ln(),
            })
        })
        .collect()
}
