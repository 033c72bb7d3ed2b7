//! Hybrid unitary-monitored maps at the trajectory level and the
//! ensemble sweep that aggregates them.
//!
//! One step is `ψ → K_m U_KT ψ / sqrt(P(m))` with `m` sampled from the
//! post-unitary state; mixed runs apply `ρ → K_m U ρ U^† K_m / P(m)`. The
//! order parameter is recorded after the measurement of every step.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kicked_top::{FloquetPropagator, KickedTopParams};
use crate::measurement::GaussianMeasurement;
use crate::observables::{mean_qfi, mean_qfi_density, purity};
use crate::operators::{CollectiveOps, SpinQuantum};
use crate::par::{map_slice, Execution};
use crate::quadrature::KahanSum;
use crate::rng::trajectory_stream;
use crate::state::{spin_coherent, uniform_direction, DensityState, SpinState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Spin coherent state along a direction drawn uniformly on the sphere.
    RandomScs,
    FixedScs {
        theta: f64,
        phi: f64,
    },
    /// `I/d`; only valid for mixed runs.
    MaximallyMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    MeanQfi,
    Purity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub quantum: SpinQuantum,
    pub kt_params: KickedTopParams,
    pub sigma: f64,
    pub steps: usize,
    pub n_trajectories: usize,
    /// Leading steps excluded from the time average.
    pub burn_in: usize,
    pub seed: u64,
    pub initial_condition: InitialCondition,
}

impl RunConfig {
    /// Pure-state run from random coherent states: 40 steps, 50 trajectories.
    pub fn pure(quantum: SpinQuantum, k: f64, sigma: f64, seed: u64) -> Self {
        Self {
            quantum,
            kt_params: KickedTopParams::from_k(k),
            sigma,
            steps: 40,
            n_trajectories: 50,
            burn_in: 0,
            seed,
            initial_condition: InitialCondition::RandomScs,
        }
    }

    /// Purification run from `I/d` with `3N` steps.
    pub fn mixed(quantum: SpinQuantum, k: f64, sigma: f64, seed: u64) -> Self {
        Self {
            steps: 3 * quantum.particles() as usize,
            initial_condition: InitialCondition::MaximallyMixed,
            ..Self::pure(quantum, k, sigma, seed)
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_trajectories(mut self, n: usize) -> Self {
        self.n_trajectories = n;
        self
    }

    pub fn with_params(mut self, params: KickedTopParams) -> Self {
        self.kt_params = params;
        self
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial_condition = initial;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if self.burn_in >= self.steps {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be smaller than steps ({})",
                self.burn_in, self.steps
            )));
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidConfig("n_trajectories must be at least 1".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidResolution(self.sigma));
        }
        Ok(())
    }

    /// Observable recorded for this configuration's run kind.
    pub fn observable(&self) -> Observable {
        match self.initial_condition {
            InitialCondition::MaximallyMixed => Observable::Purity,
            _ => Observable::MeanQfi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<f64>,
    /// Mean QFI after each step (magnetization-length diagnostic for mixed runs).
    pub qfi_series: Vec<f64>,
    /// Purity after each step; mixed runs only.
    pub purity_series: Option<Vec<f64>>,
    /// Time average of the run's order parameter over `burn_in..steps`.
    pub time_avg: f64,
}

fn time_average(series: &[f64], burn_in: usize) -> f64 {
    let tail = &series[burn_in..];
    tail.iter().copied().collect::<KahanSum>().total() / tail.len() as f64
}

/// Shared, read-only pieces of a run: operators, propagator and measurement.
#[derive(Debug, Clone)]
pub struct Engine {
    ops: Arc<CollectiveOps>,
    propagator: Arc<FloquetPropagator>,
    measurement: GaussianMeasurement,
}

impl Engine {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let ops = Arc::new(CollectiveOps::new(config.quantum)?);
        let propagator = Arc::new(FloquetPropagator::build(&ops, config.kt_params)?);
        Self::from_parts(ops, propagator, config.sigma)
    }

    pub fn from_parts(ops: Arc<CollectiveOps>, propagator: Arc<FloquetPropagator>, sigma: f64) -> Result<Self> {
        let measurement = GaussianMeasurement::new(ops.quantum(), sigma)?;
        if propagator.quantum() != ops.quantum() {
            return Err(Error::DimensionMismatch { expected: ops.dim(), actual: propagator.quantum().dim() });
        }
        Ok(Self { ops, propagator, measurement })
    }

    pub fn ops(&self) -> &CollectiveOps {
        &self.ops
    }

    fn initial_pure<R: Rng>(&self, initial: InitialCondition, rng: &mut R) -> Result<SpinState> {
        let q = self.ops.quantum();
        match initial {
            InitialCondition::RandomScs => {
                let (theta, phi) = uniform_direction(rng);
                Ok(spin_coherent(q, theta, phi))
            }
            InitialCondition::FixedScs { theta, phi } => Ok(spin_coherent(q, theta, phi)),
            InitialCondition::MaximallyMixed => {
                Err(Error::InvalidConfig("pure trajectories need a coherent-state initial condition".into()))
            }
        }
    }

    pub fn run_pure(&self, config: &RunConfig, grid_index: u64, trajectory_index: u64) -> Result<TrajectoryRecord> {
        config.validate()?;
        let mut rng = trajectory_stream(config.seed, grid_index, trajectory_index);
        let mut psi = self.initial_pure(config.initial_condition, &mut rng)?;
        let mut outcomes = Vec::with_capacity(config.steps);
        let mut qfi_series = Vec::with_capacity(config.steps);
        for _ in 0..config.steps {
            let evolved = self.propagator.apply(&psi)?;
            let outcome = self.measurement.sample_outcome(&evolved, &mut rng)?;
            psi = self.measurement.posterior_update(&evolved, outcome.m)?;
            outcomes.push(outcome.m);
            qfi_series.push(mean_qfi(&psi, &self.ops).mean_qfi);
        }
        let time_avg = time_average(&qfi_series, config.burn_in);
        Ok(TrajectoryRecord { outcomes, qfi_series, purity_series: None, time_avg })
    }

    pub fn run_mixed(&self, config: &RunConfig, grid_index: u64, trajectory_index: u64) -> Result<TrajectoryRecord> {
        config.validate()?;
        let mut rng = trajectory_stream(config.seed, grid_index, trajectory_index);
        let mut rho = match config.initial_condition {
            InitialCondition::MaximallyMixed => DensityState::maximally_mixed(self.ops.quantum()),
            other => self.initial_pure(other, &mut rng)?.to_density(),
        };
        let mut outcomes = Vec::with_capacity(config.steps);
        let mut qfi_series = Vec::with_capacity(config.steps);
        let mut purity_series = Vec::with_capacity(config.steps);
        for _ in 0..config.steps {
            let evolved = self.propagator.apply_density(&rho)?;
            let outcome = self.measurement.sample_outcome_density(&evolved, &mut rng)?;
            rho = self.measurement.posterior_update_density(&evolved, outcome.m)?;
            outcomes.push(outcome.m);
            qfi_series.push(mean_qfi_density(&rho, &self.ops).mean_qfi);
            purity_series.push(purity(&rho));
        }
        let time_avg = time_average(&purity_series, config.burn_in);
        Ok(TrajectoryRecord { outcomes, qfi_series, purity_series: Some(purity_series), time_avg })
    }

    /// Dispatches on the configuration's initial condition.
    pub fn run(&self, config: &RunConfig, grid_index: u64, trajectory_index: u64) -> Result<TrajectoryRecord> {
        match config.observable() {
            Observable::MeanQfi => self.run_pure(config, grid_index, trajectory_index),
            Observable::Purity => self.run_mixed(config, grid_index, trajectory_index),
        }
    }
}

/// Single pure-state trajectory (grid index 0).
pub fn run_pure_trajectory(config: &RunConfig, trajectory_index: u64) -> Result<TrajectoryRecord> {
    Engine::new(config)?.run_pure(config, 0, trajectory_index)
}

/// Single density-matrix trajectory (grid index 0).
pub fn run_mixed_trajectory(config: &RunConfig, trajectory_index: u64) -> Result<TrajectoryRecord> {
    Engine::new(config)?.run_mixed(config, 0, trajectory_index)
}

/// One aggregated grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    pub j: f64,
    pub k: f64,
    pub sigma: f64,
    pub sigma_over_sqrt_j: f64,
    pub sigma_over_j: f64,
    pub observable: Observable,
    /// Ensemble mean of the per-trajectory time averages.
    pub mean: f64,
    /// Standard error of the mean, sample std / sqrt(n_trajectories).
    pub sem: f64,
    pub n_trajectories: usize,
    pub steps: usize,
    pub seed: u64,
    /// Set when the grid point could not be computed.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// Mean normalized by `J²`.
    pub fn mean_over_j2(&self) -> f64 {
        self.mean / (self.j * self.j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

/// Mean and standard error with compensated sums in index order.
pub fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().copied().collect::<KahanSum>().total() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<KahanSum>().total();
    let std = (ss / (n as f64 - 1.0)).sqrt();
    (mean, std / (n as f64).sqrt())
}

/// Runs every grid point with the default execution mode.
pub fn run_sweep(grid: &[RunConfig]) -> Result<SweepResult> {
    run_sweep_with(grid, Execution::default())
}

type PropKey = (u32, [u64; 7]);

/// Runs `n_trajectories` independent trajectories per grid point and
/// aggregates their time averages. Grid points that fail are reported with
/// an error marker; the output is independent of thread count.
pub fn run_sweep_with(grid: &[RunConfig], exec: Execution) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("sweep grid is empty".into()));
    }

    // Operators per N and propagators per (N, params), built once.
    let mut quanta: Vec<SpinQuantum> = grid.iter().map(|c| c.quantum).collect();
    quanta.sort_by_key(|q| q.particles());
    quanta.dedup();
    let ops: HashMap<u32, Result<Arc<CollectiveOps>>> = quanta
        .iter()
        .zip(map_slice(&quanta, exec, |q| CollectiveOps::new(*q).map(Arc::new)))
        .map(|(q, r)| (q.particles(), r))
        .collect();

    let mut prop_keys: Vec<(PropKey, KickedTopParams)> =
        grid.iter().map(|c| ((c.quantum.particles(), c.kt_params.cache_key()), c.kt_params)).collect();
    prop_keys.sort_by_key(|a| a.0);
    prop_keys.dedup_by(|a, b| a.0 == b.0);
    let built = map_slice(&prop_keys, exec, |(key, params)| match &ops[&key.0] {
        Ok(o) => FloquetPropagator::build(o, *params).map(Arc::new),
        Err(e) => Err(e.clone()),
    });
    let props: HashMap<PropKey, Result<Arc<FloquetPropagator>>> =
        prop_keys.into_iter().map(|(k, _)| k).zip(built).collect();

    let engines: Vec<Result<Engine>> = grid
        .iter()
        .map(|c| {
            c.validate()?;
            let o = ops[&c.quantum.particles()].clone()?;
            let p = props[&(c.quantum.particles(), c.kt_params.cache_key())].clone()?;
            Engine::from_parts(o, p, c.sigma)
        })
        .collect();

    let tasks: Vec<(usize, usize)> = grid
        .iter()
        .enumerate()
        .filter(|(g, _)| engines[*g].is_ok())
        .flat_map(|(g, c)| (0..c.n_trajectories).map(move |t| (g, t)))
        .collect();
    let results = map_slice(&tasks, exec, |&(g, t)| {
        let engine = engines[g].as_ref().expect("filtered to valid engines");
        engine.run(&grid[g], g as u64, t as u64).map(|r| r.time_avg)
    });

    let mut per_point: Vec<Vec<f64>> = vec![Vec::new(); grid.len()];
    let mut errors: Vec<Option<String>> = engines.iter().map(|e| e.as_ref().err().map(|e| e.to_string())).collect();
    for (&(g, _), r) in tasks.iter().zip(results) {
        match r {
            Ok(v) => per_point[g].push(v),
            Err(e) => {
                errors[g].get_or_insert_with(|| e.to_string());
            }
        }
    }

    let rows = grid
        .iter()
        .zip(per_point)
        .zip(errors)
        .map(|((c, values), error)| {
            let j = c.quantum.spin();
            let (mean, sem) = if error.is_none() { mean_and_sem(&values) } else { (f64::NAN, f64::NAN) };
            SweepRow {
                n: c.quantum.particles(),
                j,
                k: c.kt_params.k,
                sigma: c.sigma,
                sigma_over_sqrt_j: c.sigma / j.sqrt(),
                sigma_over_j: c.sigma / j,
                observable: c.observable(),
                mean,
                sem,
                n_trajectories: c.n_trajectories,
                steps: c.steps,
                seed: c.seed,
                error,
            }
        })
        .collect();
    Ok(SweepResult { rows })
}

/// Convenience: a single grid point.
pub fn run_point(config: &RunConfig, exec: Execution) -> Result<SweepRow> {
    let mut result = run_sweep_with(std::slice::from_ref(config), exec)?;
    let row = result.rows.remove(0);
    match &row.error {
        Some(msg) => Err(Error::InvalidConfig(msg.clone())),
        None => Ok(row),
    }
}

/// Per-N resolutions generated from a shared `σ/√J` grid.
pub fn sigma_for(quantum: SpinQuantum, sigma_over_sqrt_j: f64) -> f64 {
    sigma_over_sqrt_j * quantum.spin().sqrt()
}
