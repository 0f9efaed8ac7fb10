//! Batch experiment runner: turns a validated [`ExperimentConfig`] into
//! deterministic artifact files.
//!
//! Every command builds its complete artifact set in memory first and only
//! then touches the filesystem, so a failing run leaves nothing behind
//! (files already flushed when a later write fails are removed again).
//! Artifacts are byte-deterministic for a fixed config: CSV cells carry
//! 17-significant-digit scientific floats with LF line endings, JSON uses
//! stable key order, and all randomness derives from the config seed. The
//! only exception is the run manifest written next to the primary artifact
//! (`<name>.manifest.json`), which records the config echo, crate version,
//! warnings, and wall time.
//!
//! A non-finite number anywhere in an artifact aborts the run: silent NaN
//! columns in regression baselines are worse than a failed job.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    adiabatic_path_bound, generator_distance_bound, optimal_total_time, phase_drift_rate,
    phase_estimation_requirements, second_order_shift_bound, sweep_derivative_bounds,
    sweep_total_bound, BoundReport, PathPoint, PATH_POINTS,
};
use crate::config::{CommandKind, ExperimentConfig, OutputFormat};
use crate::das::{das_sweep, ground_path_sampler, SweepResult};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense, interaction_constants};
use crate::linalg::hermitian_eig;
use crate::qpe::{qpe_trotter_shift, register_response, rpe_extract, rpe_extract_exact};
use crate::trotter::{
    effective_hamiltonian, error_decomposition_curve, leakage_rate, spectral_comparison,
};

/// Runner switches supplied by the front-end.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Treat violated bound preconditions as errors instead of warnings.
    pub strict: bool,
    /// Directory artifacts are rooted in (default: current directory).
    pub out_dir: Option<PathBuf>,
}

/// What a successful run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    /// Written files, primary artifact first, manifest last.
    pub artifacts: Vec<PathBuf>,
    /// Precondition warnings emitted in non-strict mode.
    pub warnings: Vec<String>,
}

/// Executes a validated config and writes its artifacts.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome> {
    let started = Instant::now();
    // Configs normally arrive via `parse_config`, but directly constructed
    // values must pass the same gate.
    config.validate()?;

    let mut bundle = Bundle::new(config, options.strict);
    match config.command {
        CommandKind::Spectrum => run_spectrum(config, &mut bundle)?,
        CommandKind::TrotterError => run_trotter_error(config, &mut bundle)?,
        CommandKind::DasSweep => run_das_sweep(config, &mut bundle)?,
        CommandKind::Qpe => run_qpe(config, &mut bundle)?,
        CommandKind::Rpe => run_rpe(config, &mut bundle)?,
        CommandKind::Bounds => run_bounds(config, &mut bundle)?,
        CommandKind::Leakage => run_leakage(config, &mut bundle)?,
    }

    let manifest = json!({
        "artifacts": bundle.names(),
        "command": config.command.name(),
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": started.elapsed().as_secs_f64(),
        "warnings": bundle.warnings,
    });
    let manifest_name = format!("{}.manifest.json", config.artifact_name());
    bundle.files.push((manifest_name, to_json_bytes(&manifest)?));

    let dir = options.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let artifacts = write_all(&dir, &bundle.files)?;
    Ok(RunOutcome { artifacts, warnings: bundle.warnings })
}

// ---------------------------------------------------------------------------
// Artifact bundle
// ---------------------------------------------------------------------------

struct Bundle {
    files: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
    strict: bool,
    primary: String,
}

impl Bundle {
    fn new(config: &ExperimentConfig, strict: bool) -> Self {
        Bundle {
            files: Vec::new(),
            warnings: Vec::new(),
            strict,
            primary: config.artifact_name(),
        }
    }

    fn push_primary(&mut self, bytes: Vec<u8>) {
        self.files.push((self.primary.clone(), bytes));
    }

    /// Name for a secondary artifact: the primary with its extension
    /// replaced by `suffix` (e.g. `sweep.csv` -> `sweep.summary.json`).
    fn sibling(&self, suffix: &str) -> String {
        let path = Path::new(&self.primary);
        path.with_extension(suffix).to_string_lossy().into_owned()
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|(name, _)| name.clone()).collect()
    }

    /// Folds a bound report into the run: violated preconditions are fatal
    /// in strict mode and recorded warnings otherwise.
    fn admit(&mut self, report: BoundReport) -> Result<BoundReport> {
        if !report.preconditions_met {
            let message = format!(
                "bound '{}' evaluated outside its validity region: {}",
                report.name,
                report.violated.join(", ")
            );
            if self.strict {
                return Err(Error::StrictViolation { message });
            }
            self.warnings.push(message);
        }
        Ok(report)
    }
}

// ---------------------------------------------------------------------------
// Serialization helpers
// ---------------------------------------------------------------------------

/// 17-significant-digit scientific notation: round-trippable and fixed
/// width-ish, the regression-artifact float format.
fn fmt_float(context: &str, x: f64) -> Result<String> {
    ensure_finite(context, [x])?;
    Ok(format!("{x:.16e}"))
}

fn ensure_finite(context: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in values {
        if !v.is_finite() {
            return Err(Error::NumericalFailure { context: context.to_string() });
        }
    }
    Ok(())
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::NumericalFailure {
        context: format!("json serialization: {e}"),
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// CSV table with a header row, comma separators, and LF terminators.
fn to_csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io_context = |e: csv::Error| Error::NumericalFailure {
        context: format!("csv encoding: {e}"),
    };
    writer.write_record(header).map_err(io_context)?;
    for row in rows {
        writer.write_record(&row).map_err(io_context)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::NumericalFailure { context: format!("csv encoding: {e}") })
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let mut written: Vec<PathBuf> = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let path = dir.join(name);
        let io_err = |source: std::io::Error| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let result = (|| {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent).map_err(io_err)?;
                }
            }
            fs::write(&path, bytes).map_err(io_err)
        })();
        if let Err(e) = result {
            // Failed runs must not leave partial artifact sets behind.
            for done in &written {
                let _ = fs::remove_file(done);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

/// Maps a reduced eigenphase in radians onto the register torus [0, 1).
fn register_phase(theta: f64) -> f64 {
    (theta / std::f64::consts::TAU).rem_euclid(1.0)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn run_spectrum(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let dt = config.params.dt.expect("validated");
    let model = build_dense(&config.build_model()?)?;
    let h_eff = effective_hamiltonian(&model.layers, dt)?;
    let cmp = spectral_comparison(&model.total, &h_eff)?;
    ensure_finite(
        "spectrum table",
        cmp.exact
            .iter()
            .chain(&cmp.effective)
            .chain(&cmp.shifts)
            .copied()
            .chain([cmp.max_abs_shift, cmp.weyl_bound, cmp.min_gap_exact]),
    )?;

    match config.format() {
        OutputFormat::Csv => {
            let rows = (0..cmp.exact.len())
                .map(|k| {
                    Ok(vec![
                        k.to_string(),
                        fmt_float("exact", cmp.exact[k])?,
                        fmt_float("effective", cmp.effective[k])?,
                        fmt_float("shift", cmp.shifts[k])?,
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            bundle.push_primary(to_csv_bytes(&["k", "exact", "effective", "shift"], rows)?);
        }
        OutputFormat::Json => bundle.push_primary(to_json_bytes(&cmp)?),
    }
    Ok(())
}

fn run_trotter_error(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let p = &config.params;
    let dt = p.dt.expect("validated");
    let steps = p.steps.as_deref().expect("validated");
    let level = p.k.unwrap_or(0);
    let model = build_dense(&config.build_model()?)?;
    let initial = hermitian_eig(&model.total)?.eigenvector(level)?;
    let curve = error_decomposition_curve(&model.layers, &initial, dt, steps)?;

    match config.format() {
        OutputFormat::Csv => {
            let rows = curve
                .iter()
                .map(|r| {
                    Ok(vec![
                        r.steps.to_string(),
                        fmt_float("t", r.t)?,
                        fmt_float("fidelity_error", r.fidelity_error)?,
                        fmt_float("phase_error", r.phase_error)?,
                        fmt_float("norm_error", r.norm_error)?,
                        fmt_float("euclidean_error", r.euclidean_error)?,
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let header = [
                "L",
                "t",
                "fidelity_error",
                "phase_error",
                "norm_error",
                "euclidean_error",
            ];
            bundle.push_primary(to_csv_bytes(&header, rows)?);
        }
        OutputFormat::Json => {
            for r in &curve {
                ensure_finite(
                    "trotter-error record",
                    [r.t, r.fidelity_error, r.phase_error, r.norm_error, r.euclidean_error],
                )?;
            }
            bundle.push_primary(to_json_bytes(&curve)?);
        }
    }
    Ok(())
}

fn sweep_summary(sweep: &SweepResult) -> Result<serde_json::Value> {
    ensure_finite("sweep summary", [sweep.turning_point_t])?;
    if let Some(slope) = sweep.slope_adb {
        ensure_finite("sweep slope", [slope])?;
    }
    Ok(json!({
        "m": sweep.steps,
        "prefix_len": sweep.prefix_len,
        "slope_adb": sweep.slope_adb,
        "target_index": sweep.target_index,
        "turning_point_T": sweep.turning_point_t,
    }))
}

fn run_das_sweep(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let (h_i, h_f) = config.build_pair()?;
    let times = config.sweep_times()?;
    let m = config.params.m.expect("validated");
    let sweep = das_sweep(&h_i, &h_f, &times, m)?;
    for r in &sweep.records {
        ensure_finite(
            "sweep record",
            [r.total_time, r.eps_adb_d, r.eps_tro, r.eps_tot_d, r.eps_dis_proxy],
        )?;
    }

    match config.format() {
        OutputFormat::Csv => {
            let rows = sweep
                .records
                .iter()
                .map(|r| {
                    Ok(vec![
                        fmt_float("T", r.total_time)?,
                        r.steps.to_string(),
                        fmt_float("eps_adb_d", r.eps_adb_d)?,
                        fmt_float("eps_tro", r.eps_tro)?,
                        fmt_float("eps_tot_d", r.eps_tot_d)?,
                        fmt_float("eps_dis_proxy", r.eps_dis_proxy)?,
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let header = ["T", "M", "eps_adb_d", "eps_tro", "eps_tot_d", "eps_dis_proxy"];
            bundle.push_primary(to_csv_bytes(&header, rows)?);
        }
        OutputFormat::Json => bundle.push_primary(to_json_bytes(&sweep)?),
    }
    let summary = sweep_summary(&sweep)?;
    let name = bundle.sibling("summary.json");
    bundle.files.push((name, to_json_bytes(&summary)?));
    Ok(())
}

fn run_qpe(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let p = &config.params;
    let dt = p.dt.expect("validated");
    let t0 = p.t0.expect("validated");
    let h = config.build_model()?;
    let shift = qpe_trotter_shift(&h, dt, t0, p.k.unwrap_or(0))?;
    ensure_finite(
        "phase shift record",
        [
            shift.effective_time,
            shift.theta_exact,
            shift.theta_eff,
            shift.raw_shift,
            shift.overlap_penalty,
        ],
    )?;

    match config.format() {
        OutputFormat::Csv => {
            let bits = p.register_bits.expect("validated");
            let phase_exact = register_phase(shift.theta_exact);
            let phase_eff = register_phase(shift.theta_eff);
            let outcomes = 1usize << bits;
            let rows = (0..outcomes)
                .map(|a| {
                    Ok(vec![
                        a.to_string(),
                        fmt_float("phase", a as f64 / outcomes as f64)?,
                        fmt_float("p_exact", register_response(bits, a, phase_exact))?,
                        fmt_float("p_eff", register_response(bits, a, phase_eff))?,
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            bundle.push_primary(to_csv_bytes(&["a", "phase", "p_exact", "p_eff"], rows)?);
            let name = bundle.sibling("summary.json");
            bundle.files.push((name, to_json_bytes(&shift)?));
        }
        OutputFormat::Json => bundle.push_primary(to_json_bytes(&shift)?),
    }
    Ok(())
}

fn run_rpe(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let p = &config.params;
    let dt = p.dt.expect("validated");
    let steps = p.steps.as_deref().expect("validated")[0];
    let (idx0, idx1) = (p.idx0.expect("validated"), p.idx1.expect("validated"));
    let h = config.build_model()?;
    let trotterized = rpe_extract(&h, dt, steps, idx0, idx1)?;
    let exact = rpe_extract_exact(&h, steps as f64 * dt, idx0, idx1)?;
    for r in [&trotterized, &exact] {
        ensure_finite(
            "phase reading",
            [r.p_alpha, r.p_beta, r.extracted_phase, r.predicted_phase],
        )?;
    }

    match config.format() {
        OutputFormat::Csv => {
            let row = |label: &str, r: &crate::qpe::RpeReading| {
                Ok(vec![
                    label.to_string(),
                    fmt_float("p_alpha", r.p_alpha)?,
                    fmt_float("p_beta", r.p_beta)?,
                    fmt_float("extracted_phase", r.extracted_phase)?,
                    fmt_float("predicted_phase", r.predicted_phase)?,
                ])
            };
            let rows = vec![row("exact", &exact)?, row("trotterized", &trotterized)?];
            let header =
                ["channel", "p_alpha", "p_beta", "extracted_phase", "predicted_phase"];
            bundle.push_primary(to_csv_bytes(&header, rows)?);
        }
        OutputFormat::Json => {
            bundle.push_primary(to_json_bytes(&json!({
                "exact": exact,
                "trotterized": trotterized,
            }))?);
        }
    }
    Ok(())
}

fn run_bounds(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let p = &config.params;
    let dt = p.dt.expect("validated");
    let h = config.build_model()?;
    let c = interaction_constants(&h, None)?;

    let mut reports: Vec<BoundReport> = vec![
        bundle.admit(phase_drift_rate(&c, dt)?)?,
        bundle.admit(generator_distance_bound(&c, dt)?)?,
    ];

    // Pair-aware sweep bounds exist only for the interpolation protocol.
    if config.model.kind == crate::config::ModelKind::Tfim {
        let (h_i, h_f) = config.build_pair()?;
        let pair = interaction_constants(&h_i, Some(&h_f))?;
        let dense_i = build_dense(&h_i)?.total;
        let dense_f = build_dense(&h_f)?.total;
        let sample = ground_path_sampler(&dense_i, &dense_f)?;
        let path_gap = min_path_gap(&sample)?;

        if let Some(m) = p.m {
            reports.push(bundle.admit(optimal_total_time(&pair, m)?)?);
            if let Some(t) = p.total_time {
                reports.push(bundle.admit(sweep_total_bound(&pair, t, m, path_gap)?)?);
                let (d1, d2) = sweep_derivative_bounds(&pair, t / m as f64)?;
                reports.push(bundle.admit(d1)?);
                reports.push(bundle.admit(d2)?);
            }
        }
        if let Some(t) = p.total_time {
            reports.push(bundle.admit(adiabatic_path_bound(t, &sample, PATH_POINTS)?)?);
        }
    }

    // Per-eigenstate second-order shift ceiling when the target level is
    // isolated.
    let model = build_dense(&h)?;
    let spectrum = hermitian_eig(&model.total)?;
    let level = p.k.unwrap_or(0);
    let gap = spectrum.gap_at(level)?;
    if gap > 0.0 {
        let norm_v =
            crate::linalg::operator_norm(&crate::trotter::leading_perturbation(&model.layers)?)?;
        reports.push(bundle.admit(second_order_shift_bound(&c, norm_v, gap, dt)?)?);
    }

    if let Some(xi) = p.xi {
        let t0 = p.t0.expect("validated");
        let scale = h.n_sites() as f64;
        let plan = phase_estimation_requirements(xi, t0, scale, Some(gap))?;
        reports.push(bundle.admit(plan.step)?);
        reports.push(bundle.admit(plan.steps)?);
        reports.push(bundle.admit(plan.depth)?);
    }

    reports.sort_by(|a, b| a.name.cmp(b.name));
    for r in &reports {
        ensure_finite_report(r)?;
    }

    match config.format() {
        OutputFormat::Csv => {
            let rows = reports
                .iter()
                .map(|r| {
                    Ok(vec![
                        r.name.to_string(),
                        fmt_float("value", r.value)?,
                        format!("{:?}", r.rigor).to_lowercase(),
                        r.preconditions_met.to_string(),
                        r.violated.join(";"),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            let header = ["name", "value", "rigor", "preconditions_met", "violated"];
            bundle.push_primary(to_csv_bytes(&header, rows)?);
        }
        OutputFormat::Json => bundle.push_primary(to_json_bytes(&reports)?),
    }
    Ok(())
}

fn ensure_finite_report(report: &BoundReport) -> Result<()> {
    // Infinity is a legitimate bound value (an empty certificate), but it
    // must arrive flagged through a violated precondition, never silently.
    if !report.value.is_finite() && report.preconditions_met {
        return Err(Error::NumericalFailure {
            context: format!("bound '{}' value", report.name),
        });
    }
    ensure_finite(report.name, report.inputs.values().copied())
}

fn min_path_gap(sample: impl Fn(f64) -> Result<PathPoint>) -> Result<f64> {
    let mut min_gap = f64::INFINITY;
    for i in 0..PATH_POINTS {
        let s = i as f64 / (PATH_POINTS - 1) as f64;
        let point = sample(s)?;
        min_gap = min_gap.min(point.gap);
    }
    if !(min_gap.is_finite() && min_gap > 0.0) {
        return Err(Error::GapCollapse { s: f64::NAN, gap: min_gap });
    }
    Ok(min_gap)
}

fn run_leakage(config: &ExperimentConfig, bundle: &mut Bundle) -> Result<()> {
    let p = &config.params;
    let dt = p.dt.expect("validated");
    let steps = p.steps.as_deref().expect("validated");
    let indices = p.indices.as_deref().expect("validated");
    let model = build_dense(&config.build_model()?)?;
    let report = leakage_rate(&model.layers, dt, indices, None, steps)?;
    ensure_finite(
        "leakage report",
        report
            .samples
            .iter()
            .map(|s| s.leakage)
            .chain([report.max_leakage, report.projector_distance, report.bound]),
    )?;

    match config.format() {
        OutputFormat::Csv => {
            let rows = report
                .samples
                .iter()
                .map(|s| Ok(vec![s.steps.to_string(), fmt_float("leakage", s.leakage)?]))
                .collect::<Result<Vec<_>>>()?;
            bundle.push_primary(to_csv_bytes(&["L", "leakage"], rows)?);
            let summary = json!({
                "bound": report.bound,
                "indices": report.indices,
                "max_leakage": report.max_leakage,
                "projector_distance": report.projector_distance,
            });
            let name = bundle.sibling("summary.json");
            bundle.files.push((name, to_json_bytes(&summary)?));
        }
        OutputFormat::Json => bundle.push_primary(to_json_bytes(&report)?),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
