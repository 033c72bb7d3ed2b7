//! Executes a validated spec and writes its output files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spinmon::haar_model::haar_mean_qfi_curve;
use spinmon::observables::reference_values;
use spinmon::scaling::beta_curve;
use spinmon::trajectory::{run_sweep, sigma_for, InitialCondition, RunConfig, SweepResult};
use spinmon::SpinQuantum;

use crate::spec::{ConfigError, ExperimentSpec, Mode};
use crate::table::{Cell, Table, OUTPUT_SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Compute(#[from] spinmon::Error),
    #[error("cannot write {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Tables produced by one run, before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Rows marked as failed or unconverged across all tables.
    pub failed_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub code_version: String,
    pub output_schema_version: u32,
    pub mode: Mode,
    pub seed: u64,
    /// Full spec after command-line overrides. Feeding this file back through
    /// `--config` repeats the run.
    pub config: ExperimentSpec,
    pub parallel: bool,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub rows: usize,
    pub failed_rows: usize,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn failed_rows(&self) -> usize {
        self.manifest.failed_rows
    }
}

const SWEEP_HEAD: [&str; 6] = ["N", "J", "k", "sigma", "sigma_over_sqrtJ", "sigma_over_J"];
const SWEEP_TAIL: [&str; 5] = ["sem", "n_traj", "steps", "seed", "status"];

fn status(error: Option<&str>) -> Cell {
    match error {
        None => "ok".into(),
        Some(msg) => format!("failed: {msg}").into(),
    }
}

/// Runs the spec in memory.
pub fn compute(spec: &ExperimentSpec) -> Result<Report, RunError> {
    spec.validate()?;
    match spec.mode {
        Mode::ReferenceTable => Ok(reference_table(spec)?),
        Mode::HaarCurve => haar_curve(spec),
        Mode::PureSweep | Mode::MixedSweep => {
            let sweep = run_sweep(&sweep_grid(spec)?)?;
            Ok(Report { failed_rows: sweep.failed(), tables: vec![sweep_table(spec, &sweep, spec.mode)?] })
        }
        Mode::BetaCurve => {
            let sweep = run_sweep(&sweep_grid(spec)?)?;
            let (grid, _) = spec.resolution_grid(true)?;
            let mut fits = Table::new(
                "fits",
                &["k", "sigma_over_sqrtJ", "beta", "beta_stderr", "c", "r_squared", "n_points", "sizes", "status"],
            );
            let mut failed = sweep.failed();
            for p in beta_curve(&sweep, &grid) {
                let sizes = p.sizes.iter().map(u32::to_string).collect::<Vec<_>>().join(";");
                let (beta, se, c, r2, n) = match &p.fit {
                    Some(f) => (f.beta, f.beta_stderr(), f.c, f.r_squared, f.n_points),
                    None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0),
                };
                if p.fit.is_none() {
                    failed += 1;
                }
                fits.push(vec![
                    p.k.into(),
                    p.sigma_over_sqrt_j.into(),
                    beta.into(),
                    se.into(),
                    c.into(),
                    r2.into(),
                    n.into(),
                    sizes.into(),
                    status(p.flag.as_deref()),
                ]);
            }
            Ok(Report { failed_rows: failed, tables: vec![sweep_table(spec, &sweep, Mode::PureSweep)?, fits] })
        }
    }
}

/// Grid order: `N`, then `k`, then resolution. The position in this order is
/// the grid index that keys each point's random streams.
pub fn sweep_grid(spec: &ExperimentSpec) -> Result<Vec<RunConfig>, RunError> {
    let (res, rescaled) = spec.resolution_grid(spec.mode == Mode::BetaCurve)?;
    let t = &spec.trajectory;
    let mixed = spec.mode == Mode::MixedSweep;
    let mut grid = Vec::new();
    for &n in &spec.grid.n {
        let q = SpinQuantum::new(n)?;
        for &k in &spec.grid.k {
            for &s in &res {
                let sigma = if rescaled { sigma_for(q, s) } else { s };
                let mut c = if mixed {
                    RunConfig::mixed(q, k, sigma, spec.seed)
                } else {
                    RunConfig::pure(q, k, sigma, spec.seed)
                        .with_initial(t.initial.unwrap_or(InitialCondition::RandomScs))
                };
                if let Some(steps) = t.steps {
                    c = c.with_steps(steps);
                }
                grid.push(c.with_trajectories(t.n_trajectories).with_burn_in(t.burn_in));
            }
        }
    }
    Ok(grid)
}

/// On a rescaled grid the `sigma_over_sqrtJ` column carries the grid value
/// itself rather than `σ/√J` recomputed, so rows from different `N` share
/// bit-identical keys.
fn sweep_table(spec: &ExperimentSpec, sweep: &SweepResult, mode: Mode) -> Result<Table, ConfigError> {
    let (res, rescaled) = spec.resolution_grid(false)?;
    let mut cols: Vec<&'static str> = SWEEP_HEAD.to_vec();
    if mode == Mode::MixedSweep {
        cols.push("mean_purity");
    } else {
        cols.extend(["mean_qfi", "mean_qfi_over_J2"]);
    }
    cols.extend(SWEEP_TAIL);
    let mut table = Table::new("results", &cols);
    for (i, r) in sweep.rows.iter().enumerate() {
        let rescaled_sigma = if rescaled { res[i % res.len()] } else { r.sigma_over_sqrt_j };
        let mut row: Vec<Cell> =
            vec![r.n.into(), r.j.into(), r.k.into(), r.sigma.into(), rescaled_sigma.into(), r.sigma_over_j.into()];
        row.push(r.mean.into());
        if mode != Mode::MixedSweep {
            row.push(r.mean_over_j2().into());
        }
        row.extend([r.sem.into(), r.n_trajectories.into(), r.steps.into(), r.seed.into(), status(r.error.as_deref())]);
        table.push(row);
    }
    Ok(table)
}

fn reference_table(spec: &ExperimentSpec) -> Result<Report, spinmon::Error> {
    let mut table = Table::new("results", &["N", "J", "state", "squeezing", "mean_qfi", "mean_qfi_over_J2"]);
    for &n in &spec.grid.n {
        let refs = reference_values(SpinQuantum::new(n)?, spec.grid.squeezing);
        for (label, value) in refs.rows() {
            table.push(vec![
                n.into(),
                refs.j.into(),
                label.into(),
                refs.squeezing.into(),
                value.into(),
                (value / (refs.j * refs.j)).into(),
            ]);
        }
    }
    Ok(Report { tables: vec![table], failed_rows: 0 })
}

fn haar_curve(spec: &ExperimentSpec) -> Result<Report, RunError> {
    let (res, rescaled) = spec.resolution_grid(false)?;
    let opts = spec.haar.options();
    let mut table = Table::new(
        "results",
        &[
            "J",
            "sigma",
            "sigma_over_sqrtJ",
            "sigma_over_J",
            "mean_qfi",
            "mean_qfi_over_J2",
            "mag_len_sq",
            "relative_change",
            "status",
        ],
    );
    let mut failed = 0;
    for j in spec.haar_spins() {
        let sigmas: Vec<f64> = res.iter().map(|&s| if rescaled { s * j.sqrt() } else { s }).collect();
        match haar_mean_qfi_curve(j, &sigmas, &opts) {
            Ok(points) => {
                for (p, &g) in points.iter().zip(&res) {
                    let st: Cell = if p.converged {
                        "ok".into()
                    } else {
                        failed += 1;
                        format!("not_converged: relative change {:e}", p.relative_change).into()
                    };
                    table.push(vec![
                        p.j.into(),
                        p.sigma.into(),
                        (if rescaled { g } else { p.sigma_over_sqrt_j }).into(),
                        p.sigma_over_j.into(),
                        p.mean_qfi.into(),
                        p.mean_qfi_over_j2.into(),
                        p.mag_len_sq.into(),
                        p.relative_change.into(),
                        st,
                    ]);
                }
            }
            Err(e) => {
                for (s, &g) in sigmas.into_iter().zip(&res) {
                    failed += 1;
                    let nan = f64::NAN;
                    table.push(vec![
                        j.into(),
                        s.into(),
                        (if rescaled { g } else { s / j.sqrt() }).into(),
                        (s / j).into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        nan.into(),
                        status(Some(&e.to_string())),
                    ]);
                }
            }
        }
    }
    Ok(Report { tables: vec![table], failed_rows: failed })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn write_json(path: &Path, value: &Value) -> Result<(), RunError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    std::io::Write::write_all(&mut w, b"\n").map_err(|e| io_err(path, e))
}

/// Validates, computes and writes `results.csv` / `results.json`, `fits.csv`
/// for `beta_curve`, and always `manifest.json`, into `spec.output.dir`.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let report = compute(spec)?;
    let wall = start.elapsed().as_secs_f64();

    let dir = spec.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let fmt = spec.output.format;
    let mut outputs = Vec::new();
    for t in &report.tables {
        if fmt.csv() {
            outputs.push(format!("{}.csv", t.name));
        }
    }
    if fmt.json() {
        outputs.push("results.json".to_string());
    }
    outputs.push("manifest.json".to_string());

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        output_schema_version: OUTPUT_SCHEMA_VERSION,
        mode: spec.mode,
        seed: spec.seed,
        config: spec.clone(),
        parallel: cfg!(feature = "parallel"),
        threads: spinmon::par::threads(),
        wall_time_seconds: wall,
        rows: report.tables.iter().map(|t| t.rows.len()).sum(),
        failed_rows: report.failed_rows,
        outputs,
    };

    if fmt.csv() {
        for t in &report.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            t.write_csv(BufWriter::new(file)).map_err(|e| io_err(&path, e))?;
        }
    }
    let manifest_json = serde_json::to_value(&manifest).expect("manifest serializes");
    if fmt.json() {
        let tables: serde_json::Map<String, Value> =
            report.tables.iter().map(|t| (t.name.to_string(), t.to_json())).collect();
        write_json(&dir.join("results.json"), &json!({ "manifest": manifest_json, "tables": tables }))?;
    }
    write_json(&dir.join("manifest.json"), &manifest_json)?;
    Ok(RunSummary { manifest, out_dir: dir })
}
