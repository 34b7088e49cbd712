//! Subcommand parameter sets and their implementations.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{command_params, parse_list};
use super::output::{Cell, OutputSet};
use crate::analysis::{kadanoff_product, local_slopes, power_law_fit, CorrelatorSeries, FitResult, WindowPolicy};
use crate::axioms::{random_balanced_config, run_axiom_suite};
use crate::bosonization::{geometric_grid, run_bosonization_suite, BosonParams};
use crate::error::{contract, LabError, Result};
use crate::ising::{default_origin, locate_critical_coupling, Direction, ExactIsing, IsingExactSpec};
use crate::mc::{
    locate_tc, measure_correlators, Algorithm, Boundary, Kernel, LatticeModel, MCRun, Observable, TcScan, Variant,
};
use crate::rng::Xoshiro256StarStar;
use crate::thirring::{compute_anomalies, Insertion, Normalization, Point, ThirringCorrelator, ThirringParams};
use crate::wti::{run_wti_suite, QuadratureSpec};

/// What a command hands back to the dispatcher.
pub struct Outcome {
    /// 0, or 3 when a `verify` check failed.
    pub exit_code: i32,
    /// Short JSON summary for standard output.
    pub summary: Value,
}

impl Outcome {
    fn ok(summary: Value) -> Self {
        Outcome { exit_code: 0, summary }
    }

    fn verdict(passed: bool, summary: Value) -> Self {
        Outcome {
            exit_code: if passed { 0 } else { 3 },
            summary,
        }
    }
}

fn thirring_params(lambda: f64, xi: f64, eta_plus: f64, lambda_max: f64) -> Result<ThirringParams> {
    let p = ThirringParams {
        lambda,
        xi,
        eta_plus,
        lambda_max,
        ..Default::default()
    };
    p.validate()?;
    Ok(p)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

command_params! {
    AnomaliesParams / AnomaliesArgs {
        lambda: f64 = 0.0,
        /// Regularization family parameter.
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
    }
}

pub fn thirring_anomalies(p: &AnomaliesParams, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    let an = compute_anomalies(&params)?;
    let payload = json!({ "params": params, "anomalies": an });
    out.json("json", &payload)?;
    Ok(Outcome::ok(payload))
}

command_params! {
    Eval2Params / Eval2Args {
        lambda: f64 = 0.0,
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
        r_min: f64 = 0.1,
        r_max: f64 = 10.0,
        points: usize = 32,
        /// Direction of `x` in radians.
        angle: f64 = 0.0,
    }
}

pub fn thirring_eval2(p: &Eval2Params, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    let corr = ThirringCorrelator::new(params, Normalization::default())?;
    let grid = geometric_grid(p.r_min, p.r_max, p.points)?;
    let mut rows = Vec::new();
    for r in grid {
        let x = Point::new(r * p.angle.cos(), r * p.angle.sin());
        let s = corr.two_point(x)?;
        let mut row: Vec<Cell> = vec![r.into(), x.x0.into(), x.x1.into()];
        for e in s.iter().flatten() {
            row.push(e.re.into());
            row.push(e.im.into());
        }
        rows.push(row);
    }
    let header = [
        "r", "x0", "x1", "s_pp_re", "s_pp_im", "s_pm_re", "s_pm_im", "s_mp_re", "s_mp_im", "s_mm_re", "s_mm_im",
    ];
    out.csv("csv", &header, &rows)?;
    let payload = json!({
        "params": params,
        "normalization": Normalization::default(),
        "anomalies": corr.anomalies,
        "rows": rows.len(),
    });
    out.json("json", &payload)?;
    Ok(Outcome::ok(payload))
}

command_params! {
    EvalnParams / EvalnArgs {
        lambda: f64 = 0.0,
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
        /// Number of psi (and of psi-bar) insertions.
        n: usize = 2,
        /// Random chirality-balanced configurations drawn from the seed.
        configs: usize = 10,
    }
}

fn describe(fs: &[Insertion]) -> String {
    fs.iter()
        .map(|f| {
            let c = if f.chirality.sign() > 0 { '+' } else { '-' };
            format!("{}:{}:{c}", super::output::format_real(f.point.x0), super::output::format_real(f.point.x1))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn thirring_evaln(p: &EvalnParams, seed: u64, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    contract!(p.n >= 1 && p.n <= crate::thirring::N_MAX, "n = {} outside [1, {}]", p.n, crate::thirring::N_MAX);
    let corr = ThirringCorrelator::new(params, Normalization::default())?;
    let free = ThirringCorrelator::free();
    let mut rows = Vec::new();
    for c in 0..p.configs {
        let mut rng = Xoshiro256StarStar::from_stream(seed, c as u64);
        let (xs, ys) = random_balanced_config(&mut rng, p.n);
        let v = corr.n_point(&xs, &ys)?;
        let w = free.wick_determinant(&xs, &ys)?;
        rows.push(vec![
            c.into(),
            v.re.into(),
            v.im.into(),
            w.re.into(),
            w.im.into(),
            describe(&xs).into(),
            describe(&ys).into(),
        ]);
    }
    out.csv(
        "csv",
        &["config", "value_re", "value_im", "free_wick_re", "free_wick_im", "psi", "psibar"],
        &rows,
    )?;
    let payload = json!({ "params": params, "anomalies": corr.anomalies, "n": p.n, "configs": p.configs, "seed": seed });
    out.json("json", &payload)?;
    Ok(Outcome::ok(payload))
}

command_params! {
    AxiomsParams / AxiomsArgs {
        lambda: f64 = 0.0,
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
        trials: usize = 100,
    }
}

pub fn verify_axioms(p: &AxiomsParams, seed: u64, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    let report = run_axiom_suite(&params, &Normalization::default(), p.trials, seed)?;
    let rows: Vec<Vec<Cell>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.property.clone().into(),
                c.worst.into(),
                c.tolerance.into(),
                c.passed.into(),
                c.samples.into(),
            ]
        })
        .collect();
    out.csv("csv", &["property", "worst", "tolerance", "passed", "samples"], &rows)?;
    out.json("json", &report)?;
    Ok(Outcome::verdict(report.all_passed, to_value(&report)))
}

command_params! {
    BosonizationParams / BosonizationArgs {
        lambda: f64 = 0.0,
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
        /// Boson coupling; `4 pi` at the free point.
        beta: f64 = 4.0 * std::f64::consts::PI,
        /// Infrared length of the boson propagator.
        ell: f64 = 1.0,
        r_min: f64 = 1.0,
        r_max: f64 = 100.0,
        points: usize = 24,
        trials: usize = 20,
    }
}

pub fn verify_bosonization(p: &BosonizationParams, seed: u64, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    let bp = BosonParams::new(p.beta, p.ell)?;
    let grid = geometric_grid(p.r_min, p.r_max, p.points)?;
    let report = run_bosonization_suite(&params, &bp, &grid, p.trials, seed)?;
    let s = &report.bilinear.series;
    let rows: Vec<Vec<Cell>> = s
        .separations
        .iter()
        .zip(&s.values)
        .map(|(&r, &v)| vec![r.into(), v.into()])
        .collect();
    out.csv("csv", &["r", "correlator"], &rows)?;
    out.json("json", &report)?;
    let summary = json!({
        "passed": report.passed(),
        "checks": report.checks,
        "bilinear_exponent": report.bilinear.exponent,
        "beta": report.beta,
    });
    Ok(Outcome::verdict(report.passed(), summary))
}

command_params! {
    WtiParams / WtiArgs {
        lambda: f64 = 0.0,
        xi: f64 = 0.5,
        eta_plus: f64 = 0.0,
        lambda_max: f64 = 0.5,
        x0: f64 = 0.0,
        x1: f64 = 0.0,
        y0: f64 = 1.3,
        y1: f64 = 0.4,
        /// Gauss–Legendre order of the smearing quadrature.
        order: usize = 16,
        radius_fraction: f64 = 0.25,
        eps_rel: f64 = 1e-3,
        degree: u32 = 4,
        convergence_tol: f64 = 1e-4,
    }
}

pub fn verify_wti(p: &WtiParams, out: &mut OutputSet) -> Result<Outcome> {
    let params = thirring_params(p.lambda, p.xi, p.eta_plus, p.lambda_max)?;
    let spec = QuadratureSpec {
        order: p.order,
        radius_fraction: p.radius_fraction,
        eps_rel: p.eps_rel,
        degree: p.degree,
        convergence_tol: p.convergence_tol,
    };
    let report = run_wti_suite(
        Point::new(p.x0, p.x1),
        Point::new(p.y0, p.y1),
        &params,
        &Normalization::default(),
        &spec,
    )?;
    out.json("json", &report)?;
    let summary = json!({
        "passed": report.passed(),
        "a": report.vector.coefficient,
        "a_bar": report.axial.coefficient,
        "a_reference": report.a_reference,
        "a_bar_reference": report.a_bar_reference,
        "tolerance": report.tolerance,
    });
    Ok(Outcome::verdict(report.passed(), summary))
}

fn window_policy(policy: &str, r_min: f64, r_max: f64, min_points: usize, slope_floor: f64) -> Result<WindowPolicy> {
    match policy {
        "fixed" => Ok(WindowPolicy::Fixed { r_min, r_max }),
        "plateau" => Ok(WindowPolicy::Plateau { min_points, slope_floor }),
        other => Err(LabError::Config(format!("policy must be \"fixed\" or \"plateau\", got {other:?}"))),
    }
}

fn slope_rows(series: &CorrelatorSeries) -> Vec<Vec<Cell>> {
    local_slopes(series)
        .iter()
        .map(|s| vec![s.r_lo.into(), s.r_hi.into(), s.slope.into(), s.error.into()])
        .collect()
}

const SLOPE_HEADER: [&str; 4] = ["r_lo", "r_hi", "slope", "error"];

command_params! {
    IsingExactParams / IsingExactArgs {
        #[doc = "Lattice side (even, at least 16)."]
        l: usize = 128,
        /// Coupling times inverse temperature, or "critical" to locate it.
        beta_j: String = "critical".into(),
        /// Largest tabulated separation; 0 selects L/4.
        r_table: usize = 0,
        policy: String = "fixed".into(),
        r_min: f64 = 4.0,
        /// Upper end of a fixed window; 0 selects L/4.
        r_max: f64 = 0.0,
        min_points: usize = 4,
        slope_floor: f64 = 0.02,
    }
}

pub fn ising_exact(p: &IsingExactParams, out: &mut OutputSet) -> Result<Outcome> {
    let (beta_j, critical) = if p.beta_j == "critical" {
        let c = locate_critical_coupling()?;
        (c.beta_j, Some(c))
    } else {
        let b = p
            .beta_j
            .parse::<f64>()
            .map_err(|_| LabError::Config(format!("beta_j must be a number or \"critical\", got {:?}", p.beta_j)))?;
        (b, None)
    };
    let spec = IsingExactSpec::new(p.l, beta_j)?;
    let r_table = if p.r_table == 0 { p.l / 4 } else { p.r_table };
    contract!(r_table >= 1 && r_table <= p.l / 4, "r_table = {r_table} outside [1, L/4]");
    let r_max = if p.r_max == 0.0 { (p.l / 4) as f64 } else { p.r_max };
    let policy = window_policy(&p.policy, p.r_min, r_max, p.min_points, p.slope_floor)?;

    let ising = ExactIsing::new(&spec)?;
    let origin = default_origin(p.l);
    let seps: Vec<usize> = (1..=r_table).collect();
    let series = ising.energy_correlator_series(origin, Direction::Horizontal, &seps)?;
    // the mirror image about the vertical centre line is an exact symmetry,
    // so the mismatch measures the floating-point error
    let mirror = (p.l - 1 - origin.0, origin.1);
    let mcols = ising.site_columns(mirror)?;
    let mut rows = Vec::new();
    for (i, &r) in seps.iter().enumerate() {
        let m = ising.site_energy_correlator(&mcols, (mirror.0 - r, mirror.1))?;
        rows.push(vec![r.into(), series.values[i].into(), (series.values[i] - m).abs().into()]);
    }
    out.csv("csv", &["x", "correlator", "error_estimate"], &rows)?;
    let fit = power_law_fit(&series, &policy)?;
    out.csv("slopes.csv", &SLOPE_HEADER, &slope_rows(&series))?;
    let payload = json!({
        "spec": spec,
        "critical_coupling": critical,
        "origin": origin,
        "log_partition_function": ising.log_partition_function(),
        "policy": policy,
        "fit": fit,
        "kappa": fit.kappa(),
        "kappa_stderr": fit.kappa_stderr(),
        "correlators": [series],
    });
    out.json("json", &payload)?;
    Ok(Outcome::ok(json!({ "beta_j": beta_j, "fit": fit, "kappa": fit.kappa() })))
}

/// Model family keys shared by `mc run` and `mc locate-tc`.
fn lattice_model(
    variant: &str,
    l: usize,
    j: f64,
    k: f64,
    beta_t: f64,
    boundary: &str,
    kernel: &str,
    kernel_rate: f64,
    kernel_amplitude: f64,
) -> Result<LatticeModel> {
    let variant = match variant {
        "nnn_ising" => Variant::NnnIsing,
        "dim" => Variant::Dim,
        v => return Err(LabError::Config(format!("variant must be \"nnn_ising\" or \"dim\", got {v:?}"))),
    };
    let boundary = match boundary {
        "open" => Boundary::Open,
        "periodic" => Boundary::Periodic,
        b => return Err(LabError::Config(format!("boundary must be \"open\" or \"periodic\", got {b:?}"))),
    };
    let kernel = match kernel {
        "onsite" => Kernel::Onsite,
        "exponential" => Kernel::exponential(kernel_rate, kernel_amplitude),
        k => return Err(LabError::Config(format!("kernel must be \"onsite\" or \"exponential\", got {k:?}"))),
    };
    let m = LatticeModel {
        variant,
        l,
        j,
        k,
        kernel,
        beta_t,
        boundary,
    };
    m.validate()?;
    Ok(m)
}

fn algorithm(name: &str) -> Result<Algorithm> {
    match name {
        "hybrid" => Ok(Algorithm::Hybrid),
        "metropolis" => Ok(Algorithm::Metropolis),
        a => Err(LabError::Config(format!("algorithm must be \"hybrid\" or \"metropolis\", got {a:?}"))),
    }
}

command_params! {
    McRunParams / McRunArgs {
        /// "nnn_ising" or "dim".
        variant: String = "nnn_ising".into(),
        l: usize = 64,
        j: f64 = 1.0,
        k: f64 = 0.05,
        beta_t: f64 = 0.41156,
        boundary: String = "open".into(),
        kernel: String = "onsite".into(),
        kernel_rate: f64 = 1.0,
        kernel_amplitude: f64 = 1.0,
        sweeps: usize = 20_000,
        thermalization: usize = 2_000,
        chains: usize = 4,
        stride: usize = 1,
        algorithm: String = "hybrid".into(),
        /// Comma-separated observable names, or "default".
        observables: String = "default".into(),
        /// Largest separation; 0 selects L/4.
        r_max: usize = 0,
    }
}

pub fn mc_run(p: &McRunParams, seed: u64, out: &mut OutputSet) -> Result<Outcome> {
    let model = lattice_model(
        &p.variant,
        p.l,
        p.j,
        p.k,
        p.beta_t,
        &p.boundary,
        &p.kernel,
        p.kernel_rate,
        p.kernel_amplitude,
    )?;
    let run = MCRun {
        sweeps: p.sweeps,
        thermalization: p.thermalization,
        seed,
        chains: p.chains,
        measurement_stride: p.stride,
        algorithm: algorithm(&p.algorithm)?,
    };
    let observables = if p.observables == "default" {
        Observable::defaults(model.variant)
    } else {
        parse_list::<String>("observables", &p.observables)?
            .iter()
            .map(|s| Observable::parse(s))
            .collect::<Result<_>>()?
    };
    let r_max = if p.r_max == 0 { p.l / 4 } else { p.r_max };
    let seps: Vec<usize> = (1..=r_max).collect();
    let res = measure_correlators(&model, &run, &observables, &seps)?;
    let mut rows = Vec::new();
    for s in &res.series {
        for (i, &r) in s.separations.iter().enumerate() {
            rows.push(vec![
                s.observable.name().into(),
                r.into(),
                s.mean[i].into(),
                s.jackknife_error[i].into(),
                s.chain_count.into(),
            ]);
        }
    }
    out.csv("csv", &["observable", "separation", "mean", "jackknife_error", "chain_count"], &rows)?;
    let correlators: Vec<CorrelatorSeries> = res.series.iter().map(|s| s.to_correlator_series()).collect();
    let payload = json!({
        "model": res.model,
        "run": res.run,
        "chains": res.chains,
        "block_length": res.block_length,
        "blocks": res.blocks,
        "warnings": res.warnings,
        "correlators": correlators,
    });
    out.json("json", &payload)?;
    Ok(Outcome::ok(json!({
        "model": res.model,
        "chains": res.chains,
        "blocks": res.blocks,
        "warnings": res.warnings,
    })))
}

command_params! {
    LocateTcParams / LocateTcArgs {
        variant: String = "nnn_ising".into(),
        j: f64 = 1.0,
        k: f64 = 0.05,
        kernel: String = "onsite".into(),
        kernel_rate: f64 = 1.0,
        kernel_amplitude: f64 = 1.0,
        sizes: String = "16,32,64".into(),
        beta_lo: f64 = 0.39,
        beta_hi: f64 = 0.43,
        grid_points: usize = 5,
        bootstrap: usize = 100,
        sweeps: usize = 4_000,
        thermalization: usize = 400,
        chains: usize = 4,
        stride: usize = 1,
        algorithm: String = "hybrid".into(),
    }
}

pub fn mc_locate_tc(p: &LocateTcParams, seed: u64, out: &mut OutputSet) -> Result<Outcome> {
    let sizes: Vec<usize> = parse_list("sizes", &p.sizes)?;
    let l0 = sizes.first().copied().unwrap_or(16);
    let model = lattice_model(
        &p.variant,
        l0,
        p.j,
        p.k,
        0.5 * (p.beta_lo + p.beta_hi),
        "periodic",
        &p.kernel,
        p.kernel_rate,
        p.kernel_amplitude,
    )?;
    let scan = TcScan {
        sizes,
        beta_lo: p.beta_lo,
        beta_hi: p.beta_hi,
        grid_points: p.grid_points,
        bootstrap: p.bootstrap,
    };
    let run = MCRun {
        sweeps: p.sweeps,
        thermalization: p.thermalization,
        seed,
        chains: p.chains,
        measurement_stride: p.stride,
        algorithm: algorithm(&p.algorithm)?,
    };
    let est = locate_tc(&model, &scan, &run)?;
    let rows: Vec<Vec<Cell>> = est
        .binder
        .iter()
        .map(|b| vec![b.l.into(), b.beta_t.into(), b.cumulant.into(), b.acceptance.into(), b.tau_energy.into()])
        .collect();
    out.csv("csv", &["L", "beta_t", "binder", "acceptance", "tau_energy"], &rows)?;
    let payload = json!({ "model": model, "scan": scan, "run": run, "estimate": est });
    out.json("json", &payload)?;
    Ok(Outcome::ok(json!({
        "beta_t": est.beta_t,
        "beta_j": est.beta_j,
        "stderr": est.stderr,
        "pair_crossings": est.pair_crossings,
        "warnings": est.warnings,
    })))
}

/// Header-driven reader for the correlator tables written by `mc run` and
/// `ising exact`.
fn series_from_csv(text: &str, label: &str) -> Result<CorrelatorSeries> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').map(str::trim).collect();
    let col = |names: &[&str]| header.iter().position(|h| names.contains(h));
    let sep = col(&["separation", "x", "r"])
        .ok_or_else(|| LabError::Config("CSV input needs a separation, x or r column".into()))?;
    let val =
        col(&["mean", "correlator"]).ok_or_else(|| LabError::Config("CSV input needs a mean or correlator column".into()))?;
    let err = col(&["jackknife_error"]);
    let obs = col(&["observable"]);
    let mut chosen: Option<String> = (!label.is_empty()).then(|| label.to_string());
    let (mut r, mut v, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for line in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if let Some(o) = obs {
            let name = cells.get(o).copied().unwrap_or_default();
            match &chosen {
                Some(c) if c != name => continue,
                Some(_) => {}
                None => chosen = Some(name.to_string()),
            }
        }
        let num = |i: usize| -> Result<f64> {
            cells
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| LabError::Config(format!("malformed CSV row {line:?}")))
        };
        r.push(num(sep)?);
        v.push(num(val)?);
        if let Some(i) = err {
            e.push(num(i)?);
        }
    }
    contract!(!r.is_empty(), "no rows for observable {label:?}");
    let s = CorrelatorSeries::exact(chosen.unwrap_or_else(|| "csv".into()), r, v);
    Ok(if err.is_some() { s.with_errors(e) } else { s })
}

#[derive(Deserialize)]
struct CorrelatorPayload {
    correlators: Vec<CorrelatorSeries>,
}

/// Loads one correlator series from a JSON payload (its `correlators` list)
/// or a CSV table. An empty `label` takes the first series.
pub fn load_series(path: &Path, label: &str) -> Result<CorrelatorSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "csv") {
        return series_from_csv(&text, label);
    }
    let payload: CorrelatorPayload = serde_json::from_str(&text)
        .map_err(|e| LabError::Config(format!("{}: no correlator list ({e})", path.display())))?;
    payload
        .correlators
        .into_iter()
        .find(|s| label.is_empty() || s.label == label)
        .ok_or_else(|| LabError::Config(format!("{}: no series labelled {label:?}", path.display())))
}

/// `K / J` recorded in an `mc run` payload, if any.
fn payload_lambda(path: &Path) -> Option<f64> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()?;
    let m: LatticeModel = serde_json::from_value(v.get("model")?.clone()).ok()?;
    Some(m.lambda())
}

command_params! {
    FitParams / FitArgs {
        /// JSON payload or CSV table holding the correlator.
        input: String = String::new(),
        /// Series label (observable name); empty takes the first.
        observable: String = String::new(),
        policy: String = "plateau".into(),
        r_min: f64 = 4.0,
        r_max: f64 = 16.0,
        min_points: usize = 4,
        slope_floor: f64 = 0.02,
    }
}

pub fn fit_powerlaw(p: &FitParams, out: &mut OutputSet) -> Result<Outcome> {
    contract!(!p.input.is_empty(), "an input file is required (--input)");
    let series = load_series(Path::new(&p.input), &p.observable)?;
    let policy = window_policy(&p.policy, p.r_min, p.r_max, p.min_points, p.slope_floor)?;
    let fit = power_law_fit(&series, &policy)?;
    out.csv("slopes.csv", &SLOPE_HEADER, &slope_rows(&series))?;
    let payload = json!({
        "series": series.label,
        "policy": policy,
        "fit": fit,
        "kappa": fit.kappa(),
        "kappa_stderr": fit.kappa_stderr(),
    });
    out.json("json", &payload)?;
    Ok(Outcome::ok(payload))
}

command_params! {
    KadanoffParams / KadanoffArgs {
        /// Payload or table with the O+ correlator.
        plus: String = String::new(),
        /// Payload or table with the O- correlator; empty reuses `plus`.
        minus: String = String::new(),
        plus_observable: String = "plus_Oplus".into(),
        minus_observable: String = "minus_Ominus".into(),
        policy: String = "plateau".into(),
        r_min: f64 = 4.0,
        r_max: f64 = 16.0,
        min_points: usize = 4,
        slope_floor: f64 = 0.02,
        /// Half-width of the band around 1 reported for the product.
        tolerance: f64 = 0.15,
    }
}

/// Sign of `kappa_+ - kappa_-` and whether the two exponents moved away from
/// 1 in opposite directions.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentShift {
    pub kappa_difference: f64,
    pub opposite_shifts: bool,
    pub lambda: Option<f64>,
}

pub fn report_kadanoff(p: &KadanoffParams, out: &mut OutputSet) -> Result<Outcome> {
    contract!(!p.plus.is_empty(), "the O+ input is required (--plus)");
    let minus_path = if p.minus.is_empty() { &p.plus } else { &p.minus };
    let policy = window_policy(&p.policy, p.r_min, p.r_max, p.min_points, p.slope_floor)?;
    let sp = load_series(Path::new(&p.plus), &p.plus_observable)?;
    let sm = load_series(Path::new(minus_path), &p.minus_observable)?;
    let fp: FitResult = power_law_fit(&sp, &policy)?;
    let fm: FitResult = power_law_fit(&sm, &policy)?;
    let product = kadanoff_product(&fp, &fm);
    let direction = ExponentShift {
        kappa_difference: product.kappa_plus - product.kappa_minus,
        opposite_shifts: (product.kappa_plus - 1.0) * (product.kappa_minus - 1.0) < 0.0,
        lambda: payload_lambda(Path::new(&p.plus)),
    };
    let within = (product.value - 1.0).abs() <= p.tolerance;
    let payload = json!({
        "fit_plus": fp,
        "fit_minus": fm,
        "product": product,
        "tolerance": p.tolerance,
        "within_tolerance": within,
        "direction": direction,
    });
    out.json("json", &payload)?;
    Ok(Outcome::ok(json!({ "product": product, "within_tolerance": within, "direction": direction })))
}
