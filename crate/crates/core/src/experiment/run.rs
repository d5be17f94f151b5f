//! Sweeps behind each experiment and the on-disk artifacts they produce.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ConfigError, ExperimentConfig, ExperimentKind, NoiseSpec, ProbeKind};
use crate::dfs::{
    block_decomposition, cramer_rao, decoherence_kernel, effective_density_matrix, off_block_magnitude, probe_in_generator_basis,
    qfi_block_bounds, qfi_exact, BlockConvention, BoundClass, DensityMatrix,
};
use crate::engine::{
    build_table, fisher_bruteforce_pair, fit_power_law, maximize_fisher, FisherResult, Interferometer,
    MaximizeOptions, PowerLawFit, PureProbeFisher,
};
use crate::error::Error;
use crate::noise::{NoiseDistribution, NoisePair};
use crate::noon::{fisher_histogram_study, noon_fisher_optimal, Histogram};
use crate::optimize::golden_max;
use crate::spin::SpinState;
use crate::states::{
    adiabatic_ground_state, coherent_x_state, diabatic_state_with, noon_state, random_state, twin_fock_state,
    DiabaticOptions, JointState,
};

/// Failure of a run, mapped onto process exit codes.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(Error),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "I/O failure: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => RunError::Io(m),
            other => RunError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

/// One CSV file worth of results.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, header: Vec<&'static str>) -> Self {
        Self {
            name: name.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// Header plus rows; floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match c {
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Float(v) if v.is_finite() => write!(out, "{v:.16e}").unwrap(),
                    Cell::Float(v) if v.is_nan() => out.push_str("nan"),
                    Cell::Float(v) => out.push_str(if *v > 0.0 { "inf" } else { "-inf" }),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Everything an experiment computed, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputRecord>,
    pub summary: serde_json::Value,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// Validates, computes and writes `<name>.csv` files plus `manifest.json`
/// into the configured output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Manifest, RunError> {
    cfg.validate()?;
    let start = Instant::now();
    let output = execute(cfg)?;
    let dir: &Path = &cfg.output;
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::new();
    for table in &output.tables {
        let text = table.to_csv();
        let file = format!("{}.csv", table.name);
        fs::write(dir.join(&file), &text)?;
        outputs.push(OutputRecord {
            file,
            sha256: sha256_hex(text.as_bytes()),
            rows: table.rows.len(),
        });
    }
    let manifest = Manifest {
        experiment: cfg.kind()?.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(cfg.to_toml_string().as_bytes()),
        seed: cfg.seed,
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
        summary: output.summary,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Io(e.to_string()))?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

/// Path of a table written by [`run`].
pub fn output_path(cfg: &ExperimentConfig, table: &str) -> PathBuf {
    cfg.output.join(format!("{table}.csv"))
}

/// Computes all tables of the configured experiment.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    match cfg.kind()? {
        ExperimentKind::NoonFi => noon_fi(cfg),
        ExperimentKind::ScanLambda => scan_lambda(cfg),
        ExperimentKind::ScanTau => scan_tau(cfg),
        ExperimentKind::ScanN => scan_n(cfg),
        ExperimentKind::NoiseHistogram => noise_histogram(cfg),
        ExperimentKind::QfiCheck => qfi_check(cfg),
    }
}

fn resolve(spec: &NoiseSpec) -> Result<NoiseDistribution, RunError> {
    spec.resolve().map_err(|e| RunError::Config(ConfigError(vec![e])))
}

fn maximize_opts(cfg: &ExperimentConfig) -> MaximizeOptions {
    MaximizeOptions {
        points: cfg.theta_points,
        tolerance: cfg.theta_tolerance,
    }
}

/// max over theta of F for identical probes in both interferometers.
pub fn probe_fisher(
    probe: &SpinState,
    interferometer: Interferometer,
    noise_total: &NoiseDistribution,
    opts: MaximizeOptions,
) -> Result<FisherResult, Error> {
    let table = build_table(probe, probe, interferometer, noise_total)?;
    maximize_fisher(&table, 2.0 * PI, opts)
}

/// Theta refinement used while searching a state parameter; the winner is
/// re-maximized with the configured tolerance.
fn search_opts(opts: MaximizeOptions) -> MaximizeOptions {
    MaximizeOptions {
        tolerance: opts.tolerance.max(1e-4),
        ..opts
    }
}

/// Best value of `f` over a positive grid, refined by golden search in log space.
fn optimize_parameter<F>(grid: &[f64], rel_tol: f64, mut f: F) -> Result<(f64, FisherResult), Error>
where
    F: FnMut(f64) -> Result<FisherResult, Error>,
{
    let mut best: Option<(usize, f64, FisherResult)> = None;
    for (i, &x) in grid.iter().enumerate() {
        let r = f(x)?;
        if best.as_ref().map_or(true, |b| r.fisher > b.2.fisher) {
            best = Some((i, x, r));
        }
    }
    let (i, x0, r0) = best.ok_or_else(|| Error::InvalidArgument("parameter grid is empty".into()))?;
    if grid.len() < 3 || grid.iter().any(|&x| x <= 0.0) {
        return Ok((x0, r0));
    }
    let lo = grid[i.saturating_sub(1)].ln();
    let hi = grid[(i + 1).min(grid.len() - 1)].ln();
    let mut cache: Vec<(f64, FisherResult)> = Vec::new();
    let (lx, _) = golden_max(
        |lx| {
            let r = f(lx.exp())?;
            let v = r.fisher;
            cache.push((lx, r));
            Ok(v)
        },
        lo,
        hi,
        rel_tol,
    )?;
    let refined = cache.into_iter().find(|(x, _)| *x == lx);
    Ok(match refined {
        Some((lx, r)) if r.fisher > r0.fisher => (lx.exp(), r),
        _ => (x0, r0),
    })
}

fn noon_fi(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut jobs = Vec::new();
    for &n in &cfg.n {
        for sm in &cfg.sigma_minus {
            for sp in &cfg.sigma_plus {
                jobs.push((n, sm, sp));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(n, sm, sp)| -> Result<Vec<Cell>, RunError> {
            let pair = NoisePair::new(resolve(sp)?, resolve(sm)?);
            let r = noon_fisher_optimal(n, &pair)?;
            let dtheta = if r.fisher > 0.0 {
                cramer_rao(r.fisher, cfg.repetitions)?
            } else {
                f64::INFINITY
            };
            Ok(vec![
                n.into(),
                sm.numeric().into(),
                sp.numeric().into(),
                r.theta.into(),
                r.fisher.into(),
                (r.fisher / (n * n) as f64).into(),
                dtheta.into(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "noon_fi",
        vec!["N", "sigma_minus", "sigma_plus", "theta", "F", "F_over_N2", "delta_theta"],
    );
    t.rows = rows;
    Ok(RunOutput {
        tables: vec![t],
        summary: serde_json::json!({ "points": jobs.len() }),
    })
}

fn scan_lambda(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut t = Table::new("scan_lambda", vec!["N", "sigma_plus", "lambda", "theta", "F", "F_over_N"]);
    let mut best = Vec::new();
    for &n in &cfg.n {
        for sp in &cfg.sigma_plus {
            let noise = resolve(sp)?;
            let mut top = (f64::NAN, f64::NEG_INFINITY);
            for lambda in cfg.lambda.values() {
                let probe = adiabatic_ground_state(n, lambda)?;
                let r = probe_fisher(&probe, cfg.interferometer, &noise, maximize_opts(cfg))?;
                if r.fisher > top.1 {
                    top = (lambda, r.fisher);
                }
                t.rows.push(vec![
                    n.into(),
                    sp.numeric().into(),
                    lambda.into(),
                    r.theta.into(),
                    r.fisher.into(),
                    (r.fisher / n as f64).into(),
                ]);
            }
            best.push(serde_json::json!({ "N": n, "sigma_plus": sp.to_string(), "lambda": top.0, "F": top.1 }));
        }
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: serde_json::json!({ "best": best }),
    })
}

fn diabatic_opts() -> DiabaticOptions {
    DiabaticOptions::default()
}

fn scan_tau(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut t = Table::new(
        "scan_tau",
        vec!["N", "sigma_plus", "tau", "delta", "axis", "theta", "F", "F_over_N"],
    );
    let mut best = Vec::new();
    for &n in &cfg.n {
        let states = cfg
            .tau
            .values()
            .into_iter()
            .map(|tau| diabatic_state_with(n, tau, &diabatic_opts()))
            .collect::<Result<Vec<_>, _>>()?;
        for sp in &cfg.sigma_plus {
            let noise = resolve(sp)?;
            let mut top = (f64::NAN, f64::NEG_INFINITY);
            for s in &states {
                let r = probe_fisher(&s.state, cfg.interferometer, &noise, maximize_opts(cfg))?;
                if r.fisher > top.1 {
                    top = (s.tau, r.fisher);
                }
                t.rows.push(vec![
                    n.into(),
                    sp.numeric().into(),
                    s.tau.into(),
                    s.delta.into(),
                    format!("{:?}", s.axis).to_lowercase().into(),
                    r.theta.into(),
                    r.fisher.into(),
                    (r.fisher / n as f64).into(),
                ]);
            }
            best.push(serde_json::json!({ "N": n, "sigma_plus": sp.to_string(), "tau": top.0, "F": top.1 }));
        }
    }
    Ok(RunOutput {
        tables: vec![t],
        summary: serde_json::json!({ "best": best }),
    })
}

/// max over theta of F for one probe family at one N; returns the family
/// parameter (Lambda or tau, NaN when fixed) and the maximization result.
pub fn scan_point(
    cfg: &ExperimentConfig,
    probe: ProbeKind,
    n: usize,
    noise_total: &NoiseDistribution,
) -> Result<(f64, FisherResult), Error> {
    scan_point_near(cfg, probe, n, noise_total, None)
}

/// Like [`scan_point`], but an optimized family parameter is first searched
/// inside `bracket` (lo, hi); the full grid is used when the optimum lands
/// on the bracket edge or no bracket is given.
pub fn scan_point_near(
    cfg: &ExperimentConfig,
    probe: ProbeKind,
    n: usize,
    noise_total: &NoiseDistribution,
    bracket: Option<(f64, f64)>,
) -> Result<(f64, FisherResult), Error> {
    let opts = maximize_opts(cfg);
    let fixed = |state: SpinState| probe_fisher(&state, cfg.interferometer, noise_total, opts).map(|r| (f64::NAN, r));
    let optimized = |grid: Vec<f64>, prepare: &dyn Fn(f64) -> Result<SpinState, Error>| {
        let eval = |x: f64| probe_fisher(&prepare(x)?, cfg.interferometer, noise_total, search_opts(opts));
        let x = match bracket.and_then(|b| search_bracket(b, cfg.param_tolerance, eval).transpose()) {
            Some(x) => x?,
            None => optimize_parameter(&grid, cfg.param_tolerance, eval)?.0,
        };
        probe_fisher(&prepare(x)?, cfg.interferometer, noise_total, opts).map(|r| (x, r))
    };
    match probe {
        ProbeKind::TwinFock => fixed(twin_fock_state(n)?),
        ProbeKind::Coherent => fixed(coherent_x_state(n)?),
        ProbeKind::Noon => {
            // Closed form with the beam-splitter readout.
            let pair = NoisePair::new(noise_total.clone(), NoiseDistribution::Delta);
            noon_fisher_optimal(n, &pair).map(|r| (f64::NAN, r))
        }
        ProbeKind::Adiabatic(lambda) => {
            probe_fisher(&adiabatic_ground_state(n, lambda)?, cfg.interferometer, noise_total, opts).map(|r| (lambda, r))
        }
        ProbeKind::Diabatic(tau) => {
            let s = diabatic_state_with(n, tau, &diabatic_opts())?;
            probe_fisher(&s.state, cfg.interferometer, noise_total, opts).map(|r| (tau, r))
        }
        ProbeKind::AdiabaticOpt => optimized(cfg.lambda.values(), &|lambda| adiabatic_ground_state(n, lambda)),
        ProbeKind::DiabaticOpt => optimized(cfg.tau.values(), &|tau| {
            diabatic_state_with(n, tau, &diabatic_opts()).map(|s| s.state)
        }),
    }
}

/// Golden search of `f` in log space over `bracket`; None when the optimum
/// sits on an edge, where the bracket evidently missed the peak.
fn search_bracket<F>(bracket: (f64, f64), rel_tol: f64, f: F) -> Result<Option<f64>, Error>
where
    F: Fn(f64) -> Result<FisherResult, Error>,
{
    let (lo, hi) = (bracket.0.ln(), bracket.1.ln());
    let (lx, _) = golden_max(|lx| f(lx.exp()).map(|r| r.fisher), lo, hi, rel_tol)?;
    let edge = 2.0 * rel_tol;
    Ok(if lx - lo < edge || hi - lx < edge { None } else { Some(lx.exp()) })
}

// Observed optima follow the two-point extrapolation to a few percent.
const BRACKET_FACTOR: f64 = 1.25;

/// Bracket for the next optimized parameter, extrapolated as a power law
/// in N from the last two optima and clipped to the configured grid.
fn predicted_bracket(history: &[(usize, f64)], n: usize, grid: &[f64]) -> Option<(f64, f64)> {
    let [(n1, x1), (n2, x2)] = history.get(history.len().checked_sub(2)?..)? else {
        return None;
    };
    if n1 == n2 || !(x1.is_finite() && x2.is_finite() && *x1 > 0.0 && *x2 > 0.0) {
        return None;
    }
    let slope = (x2 / x1).ln() / (*n2 as f64 / *n1 as f64).ln();
    let guess = x2 * (n as f64 / *n2 as f64).powf(slope);
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = ((guess / BRACKET_FACTOR).max(lo), (guess * BRACKET_FACTOR).min(hi));
    (a < b).then_some((a, b))
}

fn scan_n(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut t = Table::new("scan_n", vec!["probe", "sigma_plus", "N", "parameter", "theta", "F"]);
    let mut fits = Table::new("scan_n_fit", vec!["probe", "sigma_plus", "beta", "alpha", "rms", "points"]);
    let mut summary = Vec::new();
    for &probe in &cfg.probes {
        for sp in &cfg.sigma_plus {
            let noise = resolve(sp)?;
            let mut pts = Vec::new();
            let mut history = Vec::new();
            let grid = match probe {
                ProbeKind::AdiabaticOpt => cfg.lambda.values(),
                ProbeKind::DiabaticOpt => cfg.tau.values(),
                _ => Vec::new(),
            };
            for &n in &cfg.n {
                let bracket = predicted_bracket(&history, n, &grid);
                let (param, r) = scan_point_near(cfg, probe, n, &noise, bracket)?;
                history.push((n, param));
                pts.push((n as f64, r.fisher));
                t.rows.push(vec![
                    probe.to_string().into(),
                    sp.numeric().into(),
                    n.into(),
                    param.into(),
                    r.theta.into(),
                    r.fisher.into(),
                ]);
            }
            let fit: PowerLawFit = fit_power_law(&pts, cfg.fit_tail)?;
            fits.rows.push(vec![
                probe.to_string().into(),
                sp.numeric().into(),
                fit.beta.into(),
                fit.alpha.into(),
                fit.rms.into(),
                fit.points.into(),
            ]);
            summary.push(serde_json::json!({
                "probe": probe.to_string(),
                "sigma_plus": sp.to_string(),
                "beta": fit.beta,
                "alpha": fit.alpha,
                "rms": fit.rms,
            }));
        }
    }
    Ok(RunOutput {
        tables: vec![t, fits],
        summary: serde_json::json!({ "fits": summary }),
    })
}

fn noise_histogram(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut bins = Table::new("noise_histogram", vec!["N", "M", "bin_left", "bin_right", "count"]);
    let mut samples = Table::new("noise_histogram_samples", vec!["N", "M", "trial", "F_over_N2"]);
    let mut summary = Vec::new();
    for &n in &cfg.n {
        let sigma = cfg.peak_sigma.unwrap_or(2.0 * PI / n as f64);
        for &m in &cfg.peaks {
            let h = fisher_histogram_study(n, m, sigma, cfg.trials, cfg.seed)?;
            let h = Histogram::from_samples(h.samples, cfg.bins);
            for (i, c) in h.counts.iter().enumerate() {
                bins.rows.push(vec![
                    n.into(),
                    m.into(),
                    h.edges[i].into(),
                    h.edges[i + 1].into(),
                    Cell::Int(*c as i64),
                ]);
            }
            for (i, x) in h.samples.iter().enumerate() {
                samples.rows.push(vec![n.into(), m.into(), i.into(), (*x).into()]);
            }
            let mode = h.mode_bin();
            summary.push(serde_json::json!({
                "N": n,
                "M": m,
                "sigma": sigma,
                "mode_bin": [h.edges[mode], h.edges[mode + 1]],
                "fraction_0.2_0.3": h.fraction_within(0.2, 0.3),
            }));
        }
    }
    Ok(RunOutput {
        tables: vec![bins, samples],
        summary: serde_json::json!({ "histograms": summary }),
    })
}

/// Classical and quantum Fisher information of one probe pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiRow {
    pub theta: f64,
    pub classical: f64,
    pub quantum: f64,
    pub bound_general: f64,
    pub bound_separable: f64,
    pub variance_bound: f64,
}

/// Compares max_theta F with F_Q of the effective state and the block bounds.
/// Bounds are NaN unless the effective state is an exact mixture of fixed-M
/// blocks.
pub fn qfi_row(
    probe: &SpinState,
    interferometer: Interferometer,
    noise: &NoisePair,
    opts: MaximizeOptions,
) -> Result<QfiRow, Error> {
    let n = probe.n_particles();
    let classical = if noise.relative.is_delta() && noise.total.is_delta() {
        maximize_fisher(&PureProbeFisher::new(probe, interferometer)?, 2.0 * PI, opts)?
    } else if noise.relative.is_delta() {
        probe_fisher(probe, interferometer, &noise.total, opts)?
    } else {
        // Trapezoid nodes well past the 2N probability bandwidth so smooth
        // noise densities are integrated to rounding.
        let mesh = (4 * n + 4).max(128);
        let f = |theta: f64| fisher_bruteforce_pair(probe, probe, interferometer, noise, theta, mesh);
        maximize_fisher(&f, 2.0 * PI, opts)?
    };
    let g = probe_in_generator_basis(probe, interferometer)?;
    let rho = DensityMatrix::from_pure(&JointState::product(&g, &g));
    let kernel = decoherence_kernel(noise, n, n)?;
    let eff = effective_density_matrix(&rho, &kernel)?;
    let quantum = qfi_exact(&eff)?;
    let convention = if noise.relative.is_delta() {
        Some(BlockConvention::Sum)
    } else if noise.total.is_delta() {
        Some(BlockConvention::Difference)
    } else {
        None
    };
    let (bound_general, bound_separable, variance_bound) = match convention {
        Some(c) if off_block_magnitude(&eff, c) <= 1e-12 => {
            let blocks = block_decomposition(&eff, c);
            (
                qfi_block_bounds(&blocks, BoundClass::General)?,
                qfi_block_bounds(&blocks, BoundClass::Separable)?,
                blocks.variance_bound(),
            )
        }
        _ => (f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(QfiRow {
        theta: classical.theta,
        classical: classical.fisher,
        quantum,
        bound_general,
        bound_separable,
        variance_bound,
    })
}

fn qfi_check(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let mut t = Table::new(
        "qfi_check",
        vec![
            "N",
            "probe",
            "sigma_plus",
            "sigma_minus",
            "theta",
            "F",
            "F_Q",
            "bound_general",
            "bound_separable",
            "variance_bound",
        ],
    );
    let opts = MaximizeOptions {
        points: cfg.theta_points.min(128),
        tolerance: cfg.theta_tolerance,
    };
    let mut violations = 0usize;
    for &n in &cfg.n {
        let mut probes: Vec<(String, SpinState)> = Vec::new();
        for &p in &cfg.probes {
            let state = match p {
                ProbeKind::TwinFock => twin_fock_state(n)?,
                ProbeKind::Coherent => coherent_x_state(n)?,
                ProbeKind::Noon => noon_state(n)?,
                ProbeKind::Adiabatic(l) => adiabatic_ground_state(n, l)?,
                ProbeKind::Diabatic(tau) => diabatic_state_with(n, tau, &diabatic_opts())?.state,
                ProbeKind::AdiabaticOpt | ProbeKind::DiabaticOpt => {
                    return Err(RunError::Config(ConfigError(vec![format!(
                        "probes: '{p}' is not supported by qfi-check"
                    )])))
                }
            };
            probes.push((p.to_string(), state));
        }
        for r in 0..cfg.random_probes {
            let seed = crate::noon::trial_seed(cfg.seed, (n * 1000 + r) as u64);
            probes.push((format!("random:{r}"), random_state(n, seed)?));
        }
        for sp in &cfg.sigma_plus {
            for sm in &cfg.sigma_minus {
                let pair = NoisePair::new(resolve(sp)?, resolve(sm)?);
                let rows = probes
                    .par_iter()
                    .map(|(_, s)| qfi_row(s, cfg.interferometer, &pair, opts))
                    .collect::<Result<Vec<_>, _>>()?;
                for ((name, _), row) in probes.iter().zip(rows) {
                    if row.classical > row.quantum + 1e-8
                        || (row.bound_general.is_finite() && row.quantum > row.bound_general + 1e-8)
                    {
                        violations += 1;
                    }
                    t.rows.push(vec![
                        n.into(),
                        name.clone().into(),
                        sp.numeric().into(),
                        sm.numeric().into(),
                        row.theta.into(),
                        row.classical.into(),
                        row.quantum.into(),
                        row.bound_general.into(),
                        row.bound_separable.into(),
                        row.variance_bound.into(),
                    ]);
                }
            }
        }
    }
    let rows = t.rows.len();
    Ok(RunOutput {
        tables: vec![t],
        summary: serde_json::json!({ "rows": rows, "violations": violations }),
    })
}

#[cfg(test)]
mod tests {
    #[test]
    fn bracket_extrapolates_power_law() {
        let grid = [1.0, 1e4];
        let (lo, hi) = super::predicted_bracket(&[(100, 50.0), (200, 100.0)], 400, &grid).unwrap();
        assert!((lo - 200.0 / BRACKET_FACTOR).abs() < 1e-9 && (hi - 200.0 * BRACKET_FACTOR).abs() < 1e-9);
        assert!(super::predicted_bracket(&[(100, 50.0)], 400, &grid).is_none());
        assert!(super::predicted_bracket(&[(100, f64::NAN), (200, f64::NAN)], 400, &grid).is_none());
    }

    use super::*;
    use crate::experiment::config::Grid;

    fn cfg(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            experiment: Some(kind),
            ..Default::default()
        }
    }

    #[test]
    fn noon_fi_limits() {
        let c = ExperimentConfig {
            n: vec![10],
            sigma_minus: vec![NoiseSpec::Token("delta".into())],
            sigma_plus: vec![NoiseSpec::Token("delta".into()), NoiseSpec::Token("flat".into())],
            ..cfg(ExperimentKind::NoonFi)
        };
        let out = execute(&c).unwrap();
        let t = &out.tables[0];
        let f = t.column("F").unwrap();
        assert!((t.rows[0][f].as_f64().unwrap() - 100.0).abs() < 1e-9);
        assert!((t.rows[1][f].as_f64().unwrap() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn csv_is_deterministic() {
        let c = ExperimentConfig {
            n: vec![20],
            peaks: vec![5],
            trials: 20,
            seed: 11,
            ..cfg(ExperimentKind::NoiseHistogram)
        };
        let a = execute(&c).unwrap();
        let b = execute(&c).unwrap();
        assert_eq!(a.tables[0].to_csv(), b.tables[0].to_csv());
        assert_eq!(a.tables[1].to_csv(), b.tables[1].to_csv());
        let total: i64 = a.tables[0]
            .rows
            .iter()
            .map(|r| match r[4] {
                Cell::Int(c) => c,
                _ => 0,
            })
            .sum();
        assert_eq!(total, 20);
    }

    #[test]
    fn scan_lambda_small() {
        let c = ExperimentConfig {
            n: vec![8],
            sigma_plus: vec![NoiseSpec::Token("delta".into())],
            lambda: Grid::List(vec![0.0, 8.0]),
            theta_points: 64,
            ..cfg(ExperimentKind::ScanLambda)
        };
        let out = execute(&c).unwrap();
        let t = &out.tables[0];
        assert_eq!(t.rows.len(), 2);
        // Lambda = 0 is the coherent state: F = N without noise.
        let f = t.column("F").unwrap();
        assert!((t.rows[0][f].as_f64().unwrap() - 8.0).abs() < 1e-6);
    }

    #[test]
    fn qfi_check_has_no_violations() {
        let c = ExperimentConfig {
            n: vec![4],
            probes: vec![ProbeKind::TwinFock, ProbeKind::Noon],
            sigma_plus: vec![NoiseSpec::Width(0.5)],
            sigma_minus: vec![NoiseSpec::Token("delta".into())],
            random_probes: 2,
            theta_points: 64,
            ..cfg(ExperimentKind::QfiCheck)
        };
        let out = execute(&c).unwrap();
        assert_eq!(out.tables[0].rows.len(), 4);
        assert_eq!(out.summary["violations"], 0);
    }

    #[test]
    fn run_writes_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig {
            n: vec![4, 6],
            output: dir.path().to_path_buf(),
            ..cfg(ExperimentKind::NoonFi)
        };
        let m = run(&c).unwrap();
        assert_eq!(m.outputs.len(), 1);
        let text = fs::read_to_string(output_path(&c, "noon_fi")).unwrap();
        assert_eq!(sha256_hex(text.as_bytes()), m.outputs[0].sha256);
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn invalid_config_maps_to_exit_code_2() {
        let c = ExperimentConfig {
            n: vec![3],
            ..cfg(ExperimentKind::NoonFi)
        };
        assert_eq!(execute(&c).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn csv_formatting() {
        let mut t = Table::new("x", vec!["a", "b", "c"]);
        t.rows.push(vec![Cell::Int(3), Cell::Float(0.1), Cell::Float(f64::INFINITY)]);
        assert_eq!(t.to_csv(), "a,b,c\n3,1.0000000000000001e-1,inf\n");
    }
}
