//! Subcommand implementations. Each returns a curve table, except `figures`,
//! which writes its own files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use cutofflab::couplings::{decay_check, merge_coupling_replicas, parallel_coupling_run, supermartingale_tail_experiment, tail_table, MergePlan};
use cutofflab::cutoff_lab::{hellinger_figure, oudou_figure, pi_mean, radius2_mean, run_experiment, simulated_start_moments, ExperimentConfig};
use cutofflab::dyson::{equilibrium_sample, pi_sum, radius2, regularize_initial, semicircle_quantiles, wigner_distance, DouParams, ParticleState, RegularizerSpec};
use cutofflab::matrix_ou::{matrix_paths, EnsembleKind};
use cutofflab::ou_exact::{ou_distance_curve, ou_tv_exact, ou_distance, profile_time, profile_value, OuSpec, ProfileRegime};
use cutofflab::rng::RngStream;
use cutofflab::sde_kernels::{cir_moments, simulate_paths, CirParams, Observable, Scheme, SimPlan};
use cutofflab::stats::{mean_stderr, variance_stderr};
use cutofflab::{BoundType, CurveRow, CurveTable, Error, Extended, MetricKind};

use crate::args::{parse_grid, parse_list, parse_sizes, Cmd, Common, CouplingMode, Figure, Format};
use crate::svg;

/// A failure with its exit code: 2 for bad requests, 1 for runtime failures.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_config() { 2 } else { 1 }, message: e.to_string() }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) }
}

type Res<T> = std::result::Result<T, Failure>;

fn grid(s: &str) -> Res<Vec<f64>> {
    parse_grid(s).map_err(Failure::config)
}

pub fn run(cmd: &Cmd, common: &Common) -> Res<()> {
    let table = match cmd {
        Cmd::OuCurves { n, z0_norm2_over_n, metric, t_grid } => ou_curves(*n, *z0_norm2_over_n, metric, &grid(t_grid)?)?,
        Cmd::OuProfile { n, metric, a, z0_norm2, b_grid } => ou_profile(*n, metric, a, *z0_norm2, &grid(b_grid)?)?,
        Cmd::DouSim { n, beta, x0, t_grid, replicas, dt, scheme } => {
            let params = DouParams::new(*n, *beta)?;
            let x0 = parse_start(x0, &params)?;
            let plan = SimPlan { dt: *dt, scheme: Scheme::parse(scheme)?, replicas: *replicas, t_grid: grid(t_grid)?, base_seed: common.seed };
            dou_sim(&params, &x0, &plan)?
        }
        Cmd::EquilibriumCheck { n, beta, samples } => equilibrium_check(&DouParams::new(*n, *beta)?, *samples, common.seed)?,
        Cmd::MatrixCheck { n, beta, replicas, t_grid, dt } => {
            matrix_check(&DouParams::new(*n, *beta)?, *replicas, &grid(t_grid)?, *dt, common.seed)?
        }
        Cmd::Coupling { mode, n, beta, replicas, dt, a, u_grid, t_grid, kappa, horizon } => {
            let params = DouParams::new(*n, *beta)?;
            let spec = RegularizerSpec::new(*kappa, *n)?;
            let x0 = ParticleState::new(semicircle_quantiles(&params)?, 0.0)?;
            let ts = grid(t_grid)?;
            match mode {
                CouplingMode::Parallel => coupling_parallel(&params, &spec, &x0, *dt, &ts, *replicas, common.seed)?,
                CouplingMode::Merge => coupling_merge(&params, &spec, &x0, *dt, *horizon, &ts, *replicas, common.seed)?,
                CouplingMode::Tail => {
                    let us = parse_list(u_grid).map_err(Failure::config)?;
                    let plan = MergePlan::new(*dt, *horizon, Vec::new())?;
                    let rows = supermartingale_tail_experiment(&x0, &params, *a, &us, *replicas, &plan, common.seed)?;
                    tail_table(&rows, &params, common.seed)
                }
            }
        }
        Cmd::CutoffSweep { ns, betas, t_grid, a, kappa, replicas, dt } => {
            let config = ExperimentConfig {
                ns: parse_sizes(ns).map_err(Failure::config)?,
                betas: parse_list(betas).map_err(Failure::config)?,
                t_grid: grid(t_grid)?,
                a: *a,
                kappa: *kappa,
                replicas: *replicas,
                dt: *dt,
                seed: common.seed,
            };
            run_experiment(&config)?
        }
        Cmd::Figures { which, dt, horizon } => return figures(*which, *dt, *horizon, common),
    };
    emit(&table, common)
}

/// Writes the table to `--out` or standard output, plus the SVG on request.
fn emit(table: &CurveTable, common: &Common) -> Res<()> {
    let text = match common.format {
        Format::Csv => table.to_csv_string(),
        Format::Json => table.to_json_string() + "\n",
    };
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_fail(path, e))?,
        None => print!("{text}"),
    }
    if common.plot {
        let path = svg_path(common)?;
        let doc = svg::render("cutofflab", "t", &svg::table_series(table));
        std::fs::write(&path, doc).map_err(|e| io_fail(&path, e))?;
    }
    Ok(())
}

fn svg_path(common: &Common) -> Res<PathBuf> {
    common
        .out
        .as_ref()
        .map(|p| p.with_extension("svg"))
        .ok_or_else(|| Failure::config("--plot needs --out"))
}

fn metrics(spec: &str) -> Res<Vec<MetricKind>> {
    if spec == "all" {
        Ok(MetricKind::ALL.to_vec())
    } else {
        spec.split(',').map(|m| MetricKind::parse(m.trim()).map_err(Failure::from)).collect()
    }
}

fn ou_curves(n: usize, ratio: f64, metric: &str, ts: &[f64]) -> Res<CurveTable> {
    let spec = OuSpec::with_norm(n, (n as f64 * ratio).sqrt())?;
    let mut table = CurveTable::new();
    for kind in metrics(metric)? {
        table.extend(ou_distance_curve(&spec, kind, ts)?);
        if kind == MetricKind::TV {
            table.extend(cutofflab::ou_exact::ou_tv_exact_curve(&spec, ts)?);
        }
    }
    table.sort_canonical();
    Ok(table)
}

fn ou_profile(n: usize, metric: &str, a: &str, z0_norm2: Option<f64>, bs: &[f64]) -> Res<CurveTable> {
    let kind = MetricKind::parse(metric)?;
    let regime = if a == "inf" {
        ProfileRegime::infinite()
    } else {
        ProfileRegime::new(a.parse::<f64>().map_err(|_| Failure::config(format!("bad value '{a}' for --a")))?)?
    };
    let norm2 = z0_norm2.unwrap_or_else(|| {
        let a = if regime.a().is_finite() { regime.a() } else { 1e4 };
        a / (n as f64).sqrt()
    });
    let mut table = CurveTable::new();
    for &b in bs {
        let t = profile_time(kind, regime, n, norm2.sqrt(), b)?;
        if t < 0.0 {
            return Err(Failure::config(format!("profile time at b = {b} is negative; raise n or b")));
        }
        let v = if kind == MetricKind::TV { Extended::Finite(ou_tv_exact(n, norm2, t)?) } else { ou_distance(kind, n, norm2, t)? };
        table.push(CurveRow::exact("ou_profile", n, 0.0, t, kind.name(), BoundType::Exact, v));
        table.push(CurveRow::exact("ou_profile_limit", n, 0.0, b, kind.name(), BoundType::Exact, profile_value(kind, regime, b)?));
    }
    table.sort_canonical();
    Ok(table)
}

/// `semicircle`, `const:<a>`, or a comma list of sorted positions.
fn parse_start(s: &str, params: &DouParams) -> Res<ParticleState> {
    let x = if s == "semicircle" {
        semicircle_quantiles(params)?
    } else if let Some(a) = s.strip_prefix("const:") {
        let a: f64 = a.parse().map_err(|_| Failure::config(format!("bad constant in --x0 '{s}'")))?;
        vec![a; params.n()]
    } else {
        let x = parse_list(s).map_err(Failure::config)?;
        if x.len() != params.n() {
            return Err(Failure::config(format!("--x0 has {} entries but n = {}", x.len(), params.n())));
        }
        x
    };
    Ok(ParticleState::new(x, 0.0)?)
}

fn dou_sim(params: &DouParams, x0: &ParticleState, plan: &SimPlan) -> Res<CurveTable> {
    let paths = simulate_paths(plan, x0, params, &[Observable::Pi, Observable::Radius2])?;
    let (pi0, r0) = simulated_start_moments(x0, params)?;
    let mut table = CurveTable::new();
    for (ti, &t) in plan.t_grid.iter().enumerate() {
        for (k, metric, exact) in [(0, "pi_mean", pi_mean(pi0, t)), (1, "radius2_mean", radius2_mean(r0, params, t))] {
            let (m, se) = mean_stderr(&paths.column(ti, k));
            table.push(
                CurveRow::exact("dou_sim", params.n(), params.beta(), t, metric, BoundType::Exact, Extended::Finite(exact))
                    .with_mc(m, se, plan.replicas, plan.base_seed),
            );
        }
    }
    table.sort_canonical();
    Ok(table)
}

fn equilibrium_check(params: &DouParams, samples: usize, seed: u64) -> Res<CurveTable> {
    if samples < 2 {
        return Err(Failure::config("need at least two samples"));
    }
    let draws: Vec<cutofflab::Result<(f64, f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = equilibrium_sample(params, &mut RngStream::new(seed, i as u64))?;
            let w = if i == 0 { wigner_distance(&s.x, params)? } else { 0.0 };
            Ok((pi_sum(&s.x), radius2(&s.x), w))
        })
        .collect();
    let mut pis = Vec::with_capacity(samples);
    let mut r2s = Vec::with_capacity(samples);
    let mut w0 = 0.0;
    for (i, d) in draws.into_iter().enumerate() {
        let (p, r, w) = d?;
        pis.push(p);
        r2s.push(r);
        if i == 0 {
            w0 = w;
        }
    }
    let (n, beta) = (params.n(), params.beta());
    let (rm, rse) = mean_stderr(&r2s);
    let (pv, pse) = variance_stderr(&pis);
    let mut table = CurveTable::new();
    table.push(CurveRow::exact("equilibrium", n, beta, 0.0, "radius2_mean", BoundType::Exact, Extended::Finite(params.beta_n())).with_mc(rm, rse, samples, seed));
    table.push(CurveRow::exact("equilibrium", n, beta, 0.0, "pi_variance", BoundType::Exact, Extended::Finite(1.0)).with_mc(pv, pse, samples, seed));
    table.push(CurveRow::exact("equilibrium", n, beta, 0.0, "wigner_distance", BoundType::Sample, Extended::Finite(w0)));
    table.sort_canonical();
    Ok(table)
}

fn matrix_check(params: &DouParams, replicas: usize, ts: &[f64], dt: f64, seed: u64) -> Res<CurveTable> {
    let kind = EnsembleKind::from_beta(params.beta())?;
    let x0 = semicircle_quantiles(params)?;
    let obs = [Observable::Pi, Observable::Radius2, Observable::Radius4];
    let mplan = SimPlan { dt, scheme: Scheme::ExactOU, replicas, t_grid: ts.to_vec(), base_seed: seed };
    let dplan = SimPlan { scheme: Scheme::AdaptiveDOU, base_seed: seed.wrapping_add(1), ..mplan.clone() };
    let mat = matrix_paths(kind, &x0, &mplan, &obs)?;
    let dou = simulate_paths(&dplan, &ParticleState::new(x0.clone(), 0.0)?, params, &obs)?;
    let (pi0, r0) = (pi_sum(&x0), radius2(&x0));
    let cir = CirParams::dou_radius(params);
    let mut table = CurveTable::new();
    for (ti, &t) in ts.iter().enumerate() {
        let exact = [pi_mean(pi0, t), radius2_mean(r0, params, t), cir_moments(r0, t, &cir).1];
        for (k, o) in obs.iter().enumerate() {
            for (route, paths, s) in [("matrix", &mat, mplan.base_seed), ("dou", &dou, dplan.base_seed)] {
                let (m, se) = mean_stderr(&paths.column(ti, k));
                let metric = format!("{}_{route}", o.name());
                table.push(
                    CurveRow::exact("matrix_check", params.n(), params.beta(), t, &metric, BoundType::Exact, Extended::Finite(exact[k]))
                        .with_mc(m, se, replicas, s),
                );
            }
        }
    }
    table.sort_canonical();
    Ok(table)
}

fn coupling_parallel(
    params: &DouParams,
    spec: &RegularizerSpec,
    x0: &ParticleState,
    dt: f64,
    ts: &[f64],
    replicas: usize,
    seed: u64,
) -> Res<CurveTable> {
    let (n, beta) = (params.n(), params.beta());
    let y0 = regularize_initial(x0, spec, &mut RngStream::new(seed, u64::MAX));
    let m0 = y0.x.iter().zip(&x0.x).map(|(b, a)| b - a).fold(0.0, f64::max);
    let path = parallel_coupling_run(x0, &y0, params, dt, ts, &mut RngStream::new(seed, 0))?;
    let mut table = CurveTable::new();
    for (i, &t) in path.times.iter().enumerate() {
        let row = |metric: &str, bt: BoundType, v: f64| CurveRow::exact("coupling_parallel", n, beta, t, metric, bt, Extended::Finite(v));
        table.push(row("euclidean_gap", BoundType::Sample, path.euclidean[i]));
        table.push(row("max_gap", BoundType::Sample, path.max_gap[i]));
        table.push(row("max_gap_bound", BoundType::Upper, m0 * (-t).exp()));
    }
    if replicas > 0 && !ts.is_empty() {
        let rep = decay_check(x0, params, spec, dt, ts, replicas, seed)?;
        let t_end = *ts.last().expect("non-empty grid");
        let row = |metric: &str, v: f64| CurveRow::exact("coupling_parallel", n, beta, t_end, metric, BoundType::Sample, Extended::Finite(v));
        table.push(row("ordering_violations", rep.ordering_violations as f64).with_mc(rep.ordering_violations as f64, 0.0, replicas, seed));
        table.push(row("max_gap_excess", rep.max_excess).with_mc(rep.max_excess, 0.0, replicas, seed));
    }
    table.sort_canonical();
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn coupling_merge(
    params: &DouParams,
    spec: &RegularizerSpec,
    x0: &ParticleState,
    dt: f64,
    horizon: f64,
    ts: &[f64],
    replicas: usize,
    seed: u64,
) -> Res<CurveTable> {
    if replicas == 0 {
        return Err(Failure::config("merge runs need at least one replica"));
    }
    let (n, beta) = (params.n(), params.beta());
    let rec: Vec<f64> = ts.iter().copied().filter(|&t| t <= horizon).collect();
    let plan = MergePlan::new(dt, horizon, rec.clone())?;
    let outs = merge_coupling_replicas(x0, params, spec, &plan, replicas, seed)?;
    let mut table = CurveTable::new();
    for (i, &t) in rec.iter().enumerate() {
        let areas: Vec<f64> = outs.iter().map(|o| o.area[i]).collect();
        let (m, se) = mean_stderr(&areas);
        table.push(CurveRow::exact("coupling_merge", n, beta, t, "area_mean", BoundType::Sample, Extended::Finite(m)).with_mc(m, se, replicas, seed));
    }
    let mut taus: Vec<f64> = outs.iter().map(|o| o.tau.unwrap_or(f64::INFINITY)).collect();
    taus.sort_by(f64::total_cmp);
    let median = taus[taus.len() / 2];
    let merged: Vec<f64> = taus.iter().copied().filter(|t| t.is_finite()).collect();
    let censored = (replicas - merged.len()) as f64 / replicas as f64;
    let nf = n as f64;
    let ceiling = 8.0 * nf.powf(3.0 - 2.0 * spec.kappa()) * nf.ln();
    let row = |metric: &str, bt: BoundType, v: Extended| CurveRow::exact("coupling_merge", n, beta, horizon, metric, bt, v);
    let median_v = if median.is_finite() { Extended::Finite(median) } else { Extended::Infinite };
    let mut tau_row = row("merge_time_median", BoundType::Sample, median_v);
    if merged.len() >= 2 {
        let (m, se) = mean_stderr(&merged);
        tau_row = tau_row.with_mc(m, se, replicas, seed);
    }
    table.push(tau_row);
    table.push(row("censored_fraction", BoundType::Sample, Extended::Finite(censored)));
    table.push(row("merge_time_ceiling", BoundType::Upper, Extended::Finite(ceiling)));
    table.sort_canonical();
    Ok(table)
}

fn figures(which: Figure, dt: f64, horizon: f64, common: &Common) -> Res<()> {
    let dir = common.out.as_ref().ok_or_else(|| Failure::config("figures needs --out <directory>"))?;
    std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    let write = |name: &str, text: String| {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| io_fail(&p, e))
    };
    if matches!(which, Figure::All | Figure::Oudou) {
        let paths = oudou_figure(dt, horizon, common.seed)?;
        for tr in &paths {
            write(&format!("oudou_beta{}.csv", tr.beta), tr.to_csv())?;
        }
        if common.plot {
            let mut series = Vec::new();
            for tr in &paths {
                for i in 0..tr.states.first().map_or(0, Vec::len) {
                    series.push(svg::Series {
                        label: format!("beta={} x{}", tr.beta, i + 1),
                        points: tr.times.iter().zip(&tr.states).map(|(&t, x)| (t, x[i])).collect(),
                    });
                }
            }
            write("oudou.svg", svg::render("OU (beta = 0) and DOU (beta = 2), shared noise", "t", &series))?;
        }
    }
    if matches!(which, Figure::All | Figure::Hellinger) {
        let ts = parse_grid("0:10:201").map_err(Failure::config)?;
        let (table, half) = hellinger_figure(&ts)?;
        let text = match common.format {
            Format::Csv => table.to_csv_string(),
            Format::Json => table.to_json_string() + "\n",
        };
        write(&format!("hellinger.{}", if common.format == Format::Csv { "csv" } else { "json" }), text)?;
        eprintln!("hellinger curve crosses 1/2 at t = {half:.4} (log 50 = {:.4})", 50f64.ln());
        if common.plot {
            write("hellinger.svg", svg::render("Hellinger to equilibrium, n = 50", "t", &svg::table_series(&table)))?;
        }
    }
    Ok(())
}
