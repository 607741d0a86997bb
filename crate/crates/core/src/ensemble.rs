//! Reproducible Monte Carlo ensembles of the microscopic dynamics and
//! their comparison against the averaged solution.
//!
//! Every trajectory derives its RNG stream from the master seed and its
//! index, and results are reduced in index order, so a run is bitwise
//! reproducible for any worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::averaging::{
    haff_line, solve_averaged, AveragedSolution, DriftFunction, DEFAULT_ODE_STEPS,
    DEFAULT_QUAD_ORDER,
};
use crate::dissipation::{ModelSpec, RestitutionModel};
use crate::dynamics::{self, ExtPhasePoint};
use crate::error::{DynamicsError, EnsembleError, NumericError};
use crate::geometry::{TableGeometry, TableSpec};
use crate::numeric::{fit, kahan::KahanSum, seed};
use crate::{io, Error, Real};

/// Documented seed-derivation formula, embedded in reports.
pub const SEED_DERIVATION: &str =
    "seed_i = splitmix64_mix(master .wrapping_add((i + 1) * 0x9E3779B97F4A7C15))";

/// Initial condition of an ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InitialDistribution {
    /// `s` uniform on the boundary, `phi` with the invariant density
    /// `cos(phi)/2` via the inverse CDF `phi = arcsin(2u - 1)`.
    #[serde(rename = "invariant_measure")]
    InvariantMeasure,
    /// Points on a straight angle-graph over an arc of one scatterer.
    #[serde(rename = "boundary_curve")]
    BoundaryCurve {
        scatterer: usize,
        /// Local arc-length interval on the scatterer chart.
        s_range: [Real; 2],
        /// Angles at the two ends of the interval; the graph is linear.
        phi_range: [Real; 2],
    },
}

impl Default for InitialDistribution {
    fn default() -> Self {
        InitialDistribution::InvariantMeasure
    }
}

impl InitialDistribution {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InitialDistribution::InvariantMeasure => "invariant_measure",
            InitialDistribution::BoundaryCurve { .. } => "boundary_curve",
        }
    }

    /// Validate against a table (curve specs must lie in the chart and have
    /// a slope within the projected unstable-cone window).
    pub fn validate(&self, table: &TableGeometry) -> Result<(), EnsembleError> {
        match self {
            InitialDistribution::InvariantMeasure => Ok(()),
            InitialDistribution::BoundaryCurve { scatterer, s_range, phi_range } => {
                if *scatterer >= table.scatterers().len() {
                    return Err(EnsembleError::CurveSpec(format!(
                        "scatterer index {scatterer} out of range"
                    )));
                }
                let chart = table.chart_length(*scatterer);
                let [s_a, s_b] = *s_range;
                if !(0.0 <= s_a && s_a < s_b && s_b <= chart) {
                    return Err(EnsembleError::CurveSpec(format!(
                        "s_range [{s_a}, {s_b}] outside chart [0, {chart}]"
                    )));
                }
                let half_pi = std::f64::consts::FRAC_PI_2;
                let [phi_a, phi_b] = *phi_range;
                if phi_a.abs() >= half_pi || phi_b.abs() >= half_pi {
                    return Err(EnsembleError::CurveSpec(
                        "phi_range must stay inside (-pi/2, pi/2)".to_string(),
                    ));
                }
                let slope = (phi_b - phi_a) / (s_b - s_a);
                let lo = table.curvature_min();
                let hi = table.curvature_max() + 1.0 / table.tau_min();
                if !(lo <= slope && slope <= hi) {
                    return Err(EnsembleError::CurveSpec(format!(
                        "curve slope {slope} outside the cone window [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Draw one initial state with a caller-provided RNG.
pub fn sample_initial_with(
    table: &TableGeometry,
    dist: &InitialDistribution,
    c0: Real,
    rng: &mut impl Rng,
) -> ExtPhasePoint {
    match dist {
        InitialDistribution::InvariantMeasure => {
            let u1: Real = rng.gen();
            let u2: Real = rng.gen();
            let s = u1 * table.perimeter();
            let phi = (2.0 * u2 - 1.0).asin();
            ExtPhasePoint::new(s, phi, c0)
        }
        InitialDistribution::BoundaryCurve { scatterer, s_range, phi_range } => {
            let u: Real = rng.gen();
            let s_local = s_range[0] + u * (s_range[1] - s_range[0]);
            let w = (s_local - s_range[0]) / (s_range[1] - s_range[0]);
            let phi = phi_range[0] + w * (phi_range[1] - phi_range[0]);
            ExtPhasePoint::new(table.chart_offset(*scatterer) + s_local, phi, c0)
        }
    }
}

/// Draw one initial state from a seed (deterministic wrapper).
pub fn sample_initial(
    table: &TableGeometry,
    dist: &InitialDistribution,
    c0: Real,
    seed_value: u64,
) -> ExtPhasePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_value);
    sample_initial_with(table, dist, c0, &mut rng)
}

/// Why a slow path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Complete,
    /// Trajectory hit a grazing collision and was discarded at this step.
    DiscardedGrazing { step: u64 },
}

/// Piecewise-linear slow path: node `n` sits at slow time `t_bar = eps * n`.
#[derive(Debug, Clone)]
pub struct SlowPath {
    pub epsilon: Real,
    pub t_bar_end: Real,
    pub c_nodes: Vec<Real>,
    pub t_nodes: Vec<Real>,
    pub status: PathStatus,
}

impl SlowPath {
    pub fn is_complete(&self) -> bool {
        self.status == PathStatus::Complete
    }

    fn interp(nodes: &[Real], epsilon: Real, t_bar: Real) -> Real {
        if epsilon <= 0.0 || nodes.len() < 2 {
            return nodes[0];
        }
        let idx = (t_bar / epsilon).floor();
        let i = (idx as usize).min(nodes.len() - 2);
        let theta = (t_bar / epsilon - i as Real).clamp(0.0, 1.0);
        nodes[i] + theta * (nodes[i + 1] - nodes[i])
    }

    /// Interpolated speed at `t_bar`.
    pub fn c_at(&self, t_bar: Real) -> Real {
        Self::interp(&self.c_nodes, self.epsilon, t_bar)
    }

    /// Interpolated physical time at `t_bar`.
    pub fn t_at(&self, t_bar: Real) -> Real {
        Self::interp(&self.t_nodes, self.epsilon, t_bar)
    }
}

/// Run one trajectory for `ceil(t_bar_end / eps)` collisions, recording the
/// speed and physical time at every collision index.
pub fn run_slow_path(
    table: &TableGeometry,
    model: &RestitutionModel,
    x0: ExtPhasePoint,
    t_bar_end: Real,
) -> Result<SlowPath, EnsembleError> {
    let epsilon = model.epsilon();
    if model.is_elastic() {
        // The slow time never advances at epsilon = 0: the path is the
        // frozen initial speed and physical time stays at zero.
        return Ok(SlowPath {
            epsilon,
            t_bar_end,
            c_nodes: vec![x0.speed, x0.speed],
            t_nodes: vec![0.0, 0.0],
            status: PathStatus::Complete,
        });
    }
    let steps = (t_bar_end / epsilon).ceil() as u64;
    let mut c_nodes = Vec::with_capacity(steps as usize + 1);
    let mut t_nodes = Vec::with_capacity(steps as usize + 1);
    c_nodes.push(x0.speed);
    t_nodes.push(0.0);
    let mut state = x0;
    let mut time = KahanSum::<Real>::new();
    for n in 0..steps {
        match dynamics::collision_step(table, model, &state) {
            Ok(step) => {
                time.add(epsilon * step.tau / state.speed);
                state = step.next;
                c_nodes.push(state.speed);
                t_nodes.push(time.value());
            }
            Err(DynamicsError::Grazing { .. }) => {
                return Ok(SlowPath {
                    epsilon,
                    t_bar_end,
                    c_nodes,
                    t_nodes,
                    status: PathStatus::DiscardedGrazing { step: n + 1 },
                });
            }
            Err(fatal) => return Err(EnsembleError::Dynamics(fatal)),
        }
    }
    Ok(SlowPath { epsilon, t_bar_end, c_nodes, t_nodes, status: PathStatus::Complete })
}

/// Per-epsilon deviation statistics against the averaged solution.
///
/// `mean_sup_dev_*` aggregate per-path sup deviations;
/// `ensemble_mean_sup_dev_*` measure the pointwise ensemble-mean path.
/// Wall time is informational and kept out of serialized artifacts so that
/// reruns are bitwise identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub epsilon: Real,
    pub trajectories: usize,
    pub completed: usize,
    pub discarded_grazing: usize,
    pub mean_sup_dev_c: Real,
    pub median_sup_dev_c: Real,
    pub max_sup_dev_c: Real,
    pub mean_sup_dev_t: Real,
    pub median_sup_dev_t: Real,
    pub max_sup_dev_t: Real,
    pub ensemble_mean_sup_dev_c: Real,
    pub ensemble_mean_sup_dev_t: Real,
    #[serde(skip)]
    pub wall_seconds: Real,
}

/// Compare an ensemble of slow paths against the averaged solution on the
/// union of path and ODE node grids.
pub fn compare_to_averaged(
    paths: &[SlowPath],
    averaged: &AveragedSolution,
) -> Result<ConvergenceEntry, EnsembleError> {
    let complete: Vec<&SlowPath> = paths.iter().filter(|p| p.is_complete()).collect();
    if complete.is_empty() {
        return Err(EnsembleError::Numeric(NumericError::InsufficientData(
            "no complete trajectories".to_string(),
        )));
    }
    let epsilon = complete[0].epsilon;
    let t_end = complete[0].t_bar_end;
    if (t_end - averaged.t_bar_end).abs() > 1e-12 * t_end.max(1.0) {
        return Err(EnsembleError::GridMismatch(format!(
            "paths end at t_bar = {t_end}, averaged solution at {}",
            averaged.t_bar_end
        )));
    }
    // Union grid of path nodes and ODE nodes.
    let mut grid: Vec<Real> = Vec::new();
    let path_nodes = ((t_end / epsilon).ceil() as usize).max(1);
    for n in 0..=path_nodes {
        let tb = (epsilon * n as Real).min(t_end);
        grid.push(tb);
    }
    let ode_nodes = (t_end / averaged.step).round() as usize;
    for k in 0..=ode_nodes {
        grid.push((averaged.step * k as Real).min(t_end));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let reference: Vec<(Real, Real, Real)> = grid
        .iter()
        .map(|&tb| (tb, averaged.c_bar(tb), averaged.t_phys(tb)))
        .collect();

    let mut sup_c: Vec<Real> = Vec::with_capacity(complete.len());
    let mut sup_t: Vec<Real> = Vec::with_capacity(complete.len());
    let mut mean_c = vec![0.0; grid.len()];
    let mut mean_t = vec![0.0; grid.len()];
    for p in &complete {
        let mut worst_c: Real = 0.0;
        let mut worst_t: Real = 0.0;
        for (k, &(tb, cbar, tphys)) in reference.iter().enumerate() {
            let c = p.c_at(tb);
            let t = p.t_at(tb);
            worst_c = worst_c.max((c - cbar).abs());
            worst_t = worst_t.max((t - tphys).abs());
            mean_c[k] += c;
            mean_t[k] += t;
        }
        sup_c.push(worst_c);
        sup_t.push(worst_t);
    }
    let nf = complete.len() as Real;
    let mut ens_c: Real = 0.0;
    let mut ens_t: Real = 0.0;
    for (k, &(_, cbar, tphys)) in reference.iter().enumerate() {
        ens_c = ens_c.max((mean_c[k] / nf - cbar).abs());
        ens_t = ens_t.max((mean_t[k] / nf - tphys).abs());
    }

    let mean = |v: &[Real]| v.iter().sum::<Real>() / v.len() as Real;
    let median = |v: &mut Vec<Real>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if v.len() % 2 == 1 {
            v[v.len() / 2]
        } else {
            0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
        }
    };
    let discarded = paths.len() - complete.len();
    let mut sup_c_sorted = sup_c.clone();
    let mut sup_t_sorted = sup_t.clone();
    Ok(ConvergenceEntry {
        epsilon,
        trajectories: paths.len(),
        completed: complete.len(),
        discarded_grazing: discarded,
        mean_sup_dev_c: mean(&sup_c),
        median_sup_dev_c: median(&mut sup_c_sorted),
        max_sup_dev_c: sup_c.iter().cloned().fold(0.0, Real::max),
        mean_sup_dev_t: mean(&sup_t),
        median_sup_dev_t: median(&mut sup_t_sorted),
        max_sup_dev_t: sup_t.iter().cloned().fold(0.0, Real::max),
        ensemble_mean_sup_dev_c: ens_c,
        ensemble_mean_sup_dev_t: ens_t,
        wall_seconds: 0.0,
    })
}

/// Cooling-line fit of the ensemble: reciprocal speed against physical time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HaffFit {
    pub slope: Real,
    pub intercept: Real,
    /// `None` when the response is constant (no dissipation).
    pub r_squared: Option<Real>,
    pub points: usize,
    pub degenerate: bool,
}

/// Fit the cooling line through the ensemble-mean reciprocal speed at each
/// collision index against the ensemble-mean physical time, optionally
/// restricted to a physical-time window.
pub fn haff_fit(paths: &[SlowPath], window: Option<[Real; 2]>) -> Result<HaffFit, EnsembleError> {
    let complete: Vec<&SlowPath> = paths.iter().filter(|p| p.is_complete()).collect();
    if complete.is_empty() {
        return Err(EnsembleError::Numeric(NumericError::InsufficientData(
            "no complete trajectories".to_string(),
        )));
    }
    let nodes = complete.iter().map(|p| p.c_nodes.len()).min().unwrap();
    let mut xs = Vec::with_capacity(nodes);
    let mut ys = Vec::with_capacity(nodes);
    for n in 0..nodes {
        let mut t_acc = 0.0;
        let mut inv_acc = 0.0;
        for p in &complete {
            t_acc += p.t_nodes[n];
            inv_acc += 1.0 / p.c_nodes[n];
        }
        let t = t_acc / complete.len() as Real;
        let inv = inv_acc / complete.len() as Real;
        if let Some([lo, hi]) = window {
            if t < lo || t > hi {
                continue;
            }
        }
        xs.push(t);
        ys.push(inv);
    }
    let fit = fit::linear(&xs, &ys).map_err(EnsembleError::Numeric)?;
    Ok(HaffFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        points: fit.points,
        degenerate: fit.r_squared.is_none(),
    })
}

// ---------------------------------------------------------------------------
// Experiment configuration and driver
// ---------------------------------------------------------------------------

/// Inline model or path to a model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    Inline(ModelSpec),
    Path(String),
}

/// Experiment configuration as read from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Path to the table description file.
    pub table: String,
    pub model: ModelRef,
    pub c0: Real,
    #[serde(rename = "T_bar")]
    pub t_bar: Real,
    pub trajectories: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub initial: InitialDistribution,
    /// Output directory for artifacts.
    pub outputs: String,
    /// Optional epsilon sweep; defaults to the model's own epsilon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_sweep: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub haff_window: Option<[Real; 2]>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.trajectories == 0 {
            return Err(Error::Ensemble(EnsembleError::Config(
                "trajectory count must be positive".to_string(),
            )));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::Ensemble(EnsembleError::Config(format!(
                "c0 must be positive, got {}",
                self.c0
            ))));
        }
        if !(self.t_bar > 0.0) {
            return Err(Error::Ensemble(EnsembleError::Config(format!(
                "T_bar must be positive, got {}",
                self.t_bar
            ))));
        }
        Ok(())
    }

    /// Worker count: explicit config, else `HAFFSIM_WORKERS`, else the
    /// available parallelism.
    pub fn effective_workers(&self) -> usize {
        if let Some(w) = self.workers {
            return w.max(1);
        }
        if let Ok(env) = std::env::var("HAFFSIM_WORKERS") {
            if let Ok(w) = env.parse::<usize>() {
                return w.max(1);
            }
        }
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Full report of an ensemble experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub table_hash: String,
    pub initial_kind: String,
    pub seed_derivation: String,
    pub config: ExperimentConfig,
    pub entries: Vec<ConvergenceEntry>,
}

/// Run all trajectories of one epsilon level with a deterministic worker
/// pool: contiguous index chunks, per-index seeds, index-ordered results.
pub fn run_ensemble_paths(
    table: &TableGeometry,
    model: &RestitutionModel,
    dist: &InitialDistribution,
    c0: Real,
    t_bar: Real,
    trajectories: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<SlowPath>, EnsembleError> {
    dist.validate(table)?;
    let workers = workers.max(1).min(trajectories.max(1));
    let chunk = trajectories.div_ceil(workers);
    let mut slots: Vec<Option<Result<SlowPath, EnsembleError>>> =
        (0..trajectories).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
            let start = w * chunk;
            scope.spawn(move || {
                for (k, slot) in slot_chunk.iter_mut().enumerate() {
                    let index = (start + k) as u64;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, index));
                    let x0 = sample_initial_with(table, dist, c0, &mut rng);
                    *slot = Some(run_slow_path(table, model, x0, t_bar));
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("all slots filled"))
        .collect()
}

/// Artifacts and reports of a full experiment run.
pub struct EnsembleOutcome {
    pub report: EnsembleReport,
    pub averaged: AveragedSolution,
    pub paths_by_eps: Vec<(Real, Vec<SlowPath>)>,
    pub written: Vec<PathBuf>,
}

/// Execute an experiment config end to end, writing the path CSVs and
/// `report.json` into the output directory. Partial artifacts are removed
/// if a fatal error interrupts the run.
pub fn ensemble_driver(config: &ExperimentConfig) -> Result<EnsembleOutcome, Error> {
    let mut written: Vec<PathBuf> = Vec::new();
    match drive(config, &mut written) {
        Ok(outcome) => Ok(outcome),
        Err(e) => {
            for path in &written {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

fn drive(config: &ExperimentConfig, written: &mut Vec<PathBuf>) -> Result<EnsembleOutcome, Error> {
    config.validate()?;
    let table_text = std::fs::read_to_string(&config.table)
        .map_err(|e| Error::Config(format!("cannot read table file `{}`: {e}", config.table)))?;
    let table_spec: TableSpec = serde_json::from_str(&table_text)
        .map_err(|e| Error::Config(format!("table file `{}`: {e}", config.table)))?;
    let table = TableGeometry::from_spec(&table_spec).map_err(Error::Geometry)?;
    let model_spec = resolve_model(&config.model)?;
    let model = RestitutionModel::from_spec(&model_spec).map_err(Error::Model)?;

    let out_dir = Path::new(&config.outputs);
    std::fs::create_dir_all(out_dir)?;

    let quad_order = config.quad_order.unwrap_or(DEFAULT_QUAD_ORDER);
    let ode_steps = config.ode_steps.unwrap_or(DEFAULT_ODE_STEPS);
    let drift = DriftFunction::new(model.clone(), quad_order).map_err(Error::Numeric)?;
    let averaged = solve_averaged(config.c0, &drift, table.mean_free_path(), config.t_bar, ode_steps)
        .map_err(Error::Numeric)?;

    let eps_levels = config
        .eps_sweep
        .clone()
        .unwrap_or_else(|| vec![model.epsilon()]);
    let workers = config.effective_workers();

    let mut entries = Vec::new();
    let mut paths_by_eps = Vec::new();
    for &eps in &eps_levels {
        let member = model.with_epsilon(eps).map_err(Error::Model)?;
        let start = Instant::now();
        let paths = run_ensemble_paths(
            &table,
            &member,
            &config.initial,
            config.c0,
            config.t_bar,
            config.trajectories,
            config.master_seed,
            workers,
        )
        .map_err(Error::Ensemble)?;
        let wall = start.elapsed().as_secs_f64();
        let mut entry = compare_to_averaged(&paths, &averaged).map_err(Error::Ensemble)?;
        entry.wall_seconds = wall;
        entries.push(entry);

        let csv_path = out_dir.join(format!("paths_eps{eps:e}.csv"));
        io::atomic_write(&csv_path, paths_csv(&paths).as_bytes())?;
        written.push(csv_path);
        paths_by_eps.push((eps, paths));
    }

    let report = EnsembleReport {
        table_hash: io::table_hash(&table_spec),
        initial_kind: config.initial.kind_name().to_string(),
        seed_derivation: SEED_DERIVATION.to_string(),
        config: config.clone(),
        entries,
    };
    let report_path = out_dir.join("report.json");
    io::atomic_write(
        &report_path,
        serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Internal(e.to_string()))?
            .as_bytes(),
    )?;
    written.push(report_path);

    Ok(EnsembleOutcome { report, averaged, paths_by_eps, written: written.clone() })
}

/// Haff experiment: the ensemble run plus the cooling-line fit artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HaffReport {
    pub fit: HaffFit,
    pub theoretical_slope: Real,
    pub theoretical_intercept: Real,
    pub relative_slope_error: Real,
    pub window: Option<[Real; 2]>,
}

pub fn haff_driver(config: &ExperimentConfig) -> Result<(EnsembleOutcome, HaffReport), Error> {
    let outcome = ensemble_driver(config)?;
    let result = (|| -> Result<HaffReport, Error> {
        let table_text = std::fs::read_to_string(&config.table)?;
        let table_spec: TableSpec = serde_json::from_str(&table_text)
            .map_err(|e| Error::Config(format!("table file: {e}")))?;
        let table = TableGeometry::from_spec(&table_spec).map_err(Error::Geometry)?;
        let model = RestitutionModel::from_spec(&resolve_model(&config.model)?)
            .map_err(Error::Model)?;
        let line = haff_line(config.c0, &table, &model).map_err(Error::Model)?;
        let (_, paths) = outcome
            .paths_by_eps
            .last()
            .ok_or_else(|| Error::Internal("no paths produced".to_string()))?;
        let fit = haff_fit(paths, config.haff_window).map_err(Error::Ensemble)?;
        let relative = (fit.slope - line.slope).abs() / line.slope;
        Ok(HaffReport {
            fit,
            theoretical_slope: line.slope,
            theoretical_intercept: line.intercept,
            relative_slope_error: relative,
            window: config.haff_window,
        })
    })();
    match result {
        Ok(report) => {
            let path = Path::new(&config.outputs).join("haff_fit.json");
            io::atomic_write(
                &path,
                serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::Internal(e.to_string()))?
                    .as_bytes(),
            )?;
            let mut outcome = outcome;
            outcome.written.push(path);
            Ok((outcome, report))
        }
        Err(e) => {
            for path in &outcome.written {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

fn resolve_model(model: &ModelRef) -> Result<ModelSpec, Error> {
    match model {
        ModelRef::Inline(spec) => Ok(spec.clone()),
        ModelRef::Path(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read model file `{path}`: {e}")))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("model file `{path}`: {e}")))
        }
    }
}

/// Long-format CSV of an epsilon level: one row per path node.
pub fn paths_csv(paths: &[SlowPath]) -> String {
    let mut out = String::from("traj,n,tbar,c,t,status\n");
    for (i, p) in paths.iter().enumerate() {
        let status = match p.status {
            PathStatus::Complete => "complete",
            PathStatus::DiscardedGrazing { .. } => "discarded_grazing",
        };
        for (n, (&c, &t)) in p.c_nodes.iter().zip(&p.t_nodes).enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i,
                n,
                io::float17(p.epsilon * n as Real),
                io::float17(c),
                io::float17(t),
                status
            ));
        }
    }
    out
}
