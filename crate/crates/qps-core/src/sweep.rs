//! Configuration-driven parameter sweeps: Figure-style phase diagrams
//! (alpha or lambda against energy, colored by per-eigenstate IPR),
//! formula-vs-numeric Lyapunov scans, and acceleration scans — plus CSV/JSON
//! serialization and plot-script emission.
//!
//! Cells are independent tasks executed by a bounded worker pool; results are
//! gathered into pre-allocated slots indexed by cell id, so data files are a
//! pure function of the configuration regardless of thread count. Per-cell
//! failures are recorded in the cell's status field and never abort a sweep.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::Serialize;

use crate::analytic::{classify_regime_point, edge_residual, Regime};
use crate::cocycle::{lyapunov_phase_averaged, ComplexifiedPhase};
use crate::error::{Error, Result};
use crate::localization::ipr;
use crate::potentials::{canonicalize, PotentialModel};
use crate::spectrum::{
    approximate_spectrum, build_truncation, eigenpairs, pooled_spectrum, Frequency,
    PairSelection, QuasiPeriodicSetup,
};

/// Model family selector for sweep configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    Gps,
    AlmostMathieu,
    ShiftedGps,
    TanSquared,
}

/// Family plus fixed parameters; swept axes override per cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lambda: f64,
    pub alpha: f64,
}

impl ModelSpec {
    pub fn build(&self) -> PotentialModel {
        match self.kind {
            ModelKind::Gps => PotentialModel::Gps {
                lambda: self.lambda,
                alpha: self.alpha,
            },
            ModelKind::AlmostMathieu => PotentialModel::AlmostMathieu {
                lambda: self.lambda,
            },
            ModelKind::ShiftedGps => PotentialModel::ShiftedGps {
                lambda: self.lambda,
                alpha: self.alpha,
            },
            ModelKind::TanSquared => PotentialModel::TanSquared {
                lambda: self.lambda,
            },
        }
    }

    fn has_alpha(&self) -> bool {
        matches!(self.kind, ModelKind::Gps | ModelKind::ShiftedGps)
    }
}

/// Sweepable quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxisName {
    Alpha,
    Lambda,
    Energy,
    Theta,
}

impl AxisName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "alpha" => Some(AxisName::Alpha),
            "lambda" => Some(AxisName::Lambda),
            "E" | "e" | "energy" => Some(AxisName::Energy),
            "theta" => Some(AxisName::Theta),
            _ => None,
        }
    }
}

/// One swept axis: `steps >= 2` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn value(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::Config(format!(
                "axis needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(Error::Config(format!(
                "axis range [{}, {}] is not a valid interval",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Full sweep configuration. `energies`/`eps_list` feed the acceleration
/// scan; the other runs use `axes`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub model: ModelSpec,
    pub axes: Vec<Axis>,
    pub frequency: Frequency,
    pub theta: f64,
    pub truncation_size: usize,
    pub le_steps: u64,
    pub phases: usize,
    pub energies: Vec<f64>,
    pub eps_list: Vec<f64>,
    pub fd_step: f64,
    pub numeric_le: bool,
    pub threads: Option<usize>,
}

impl SweepConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            axes: Vec::new(),
            frequency: Frequency::GoldenMean,
            theta: 0.0,
            truncation_size: 500,
            le_steps: 20_000,
            phases: 4,
            energies: Vec::new(),
            eps_list: vec![0.0],
            fd_step: crate::cocycle::DEFAULT_FD_STEP,
            numeric_le: false,
            threads: None,
        }
    }

    fn validate_common(&self) -> Result<()> {
        self.frequency
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.axes.len() > 2 {
            return Err(Error::Config(format!(
                "at most 2 swept axes, got {}",
                self.axes.len()
            )));
        }
        for ax in &self.axes {
            ax.validate()?;
            if ax.name == AxisName::Alpha && !self.model.has_alpha() {
                return Err(Error::Config(
                    "alpha axis requires a model family with an alpha parameter".into(),
                ));
            }
        }
        if self.truncation_size < 2 {
            return Err(Error::Config(format!(
                "truncation size must be >= 2, got {}",
                self.truncation_size
            )));
        }
        if self.le_steps < 1000 {
            return Err(Error::Config(format!(
                "le_steps must be >= 1000, got {}",
                self.le_steps
            )));
        }
        if self.phases < 1 {
            return Err(Error::Config("phases must be >= 1".into()));
        }
        if self.fd_step <= 0.0 {
            return Err(Error::Config(format!(
                "finite-difference step must be > 0, got {}",
                self.fd_step
            )));
        }
        Ok(())
    }
}

/// Resolve the worker count: explicit config, then `QPS_THREADS`, then the
/// machine's available parallelism.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    if cfg!(target_arch = "wasm32") {
        return 1;
    }
    requested
        .or_else(|| {
            std::env::var("QPS_THREADS")
                .ok()
                .and_then(|s| s.parse::<usize>().ok())
        })
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Run `count` independent tasks on `threads` workers; results land in slots
/// indexed by task id, so the output order never depends on scheduling.
fn run_indexed<T, F>(count: usize, threads: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || count <= 1 {
        return (0..count).map(task).collect();
    }
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, T)>();
    let mut slots: Vec<Option<T>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    std::thread::scope(|scope| {
        for _ in 0..threads.min(count) {
            let tx = tx.clone();
            let next = &next;
            let task = &task;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                if tx.send((i, task(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        while let Ok((i, value)) = rx.recv() {
            slots[i] = Some(value);
        }
    });
    slots.into_iter().map(|s| s.expect("task slot filled")).collect()
}

/// One phase-diagram cell. `ipr` is the mean IPR of truncation eigenstates
/// whose eigenvalue falls in this cell's energy bin (absent when none do);
/// `edge_distance` is the signed residual `alpha E - 2 sgn(lambda)(1-|lambda|)`
/// in canonical parameters.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CellRecord {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub le_formula: Option<f64>,
    pub le_numeric: Option<f64>,
    pub regime: Option<Regime>,
    pub ipr: Option<f64>,
    pub edge_distance: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseDiagramGrid {
    pub axes: Vec<Axis>,
    /// Analytic mobility-edge overlay: (axis-0 value, E*) where defined.
    pub edge_curve: Option<Vec<[f64; 2]>>,
    /// Row-major in axis declaration order (axis 0 outermost).
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeComparisonRow {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub le_formula: Option<f64>,
    pub le_numeric: Option<f64>,
    pub gap: Option<f64>,
    pub in_spectrum: Option<bool>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeComparisonTable {
    pub axis: Axis,
    pub rows: Vec<LeComparisonRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AccelerationRow {
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub eps: f64,
    pub le: Option<f64>,
    pub omega: Option<f64>,
    /// Cross-check estimate at half the finite-difference step.
    pub omega_h2: Option<f64>,
    pub near_integer: Option<bool>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AccelerationTable {
    pub rows: Vec<AccelerationRow>,
}

/// Any sweep product, for uniform output emission.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum SweepResult {
    PhaseDiagram(PhaseDiagramGrid),
    LeComparison(LeComparisonTable),
    Acceleration(AccelerationTable),
}

fn model_with_axis(spec: &ModelSpec, name: AxisName, value: f64) -> ModelSpec {
    let mut out = *spec;
    match name {
        AxisName::Alpha => out.alpha = value,
        AxisName::Lambda => out.lambda = value,
        AxisName::Energy | AxisName::Theta => {}
    }
    out
}

/// Mobility-edge energy for a model in its own energy units (through the
/// canonical form, shifted back). None when degenerate.
fn model_edge_energy(model: &PotentialModel) -> Option<f64> {
    let c = canonicalize(model).ok()?;
    if c.alpha_eff == 0.0 || c.lambda_eff == 0.0 {
        return None;
    }
    Some(
        c.energy_shift
            + 2.0 * c.lambda_eff.signum() * (1.0 - c.lambda_eff.abs()) / c.alpha_eff,
    )
}

/// Figure-style phase diagram: axis 0 is alpha or lambda, axis 1 is energy.
/// Each column computes one truncation spectrum with eigenvectors; cells
/// aggregate per-eigenstate IPR into energy bins and carry the analytic
/// formula value, regime, and edge distance at the cell point.
pub fn run_phase_diagram(config: &SweepConfig) -> Result<PhaseDiagramGrid> {
    config.validate_common()?;
    if config.axes.len() != 2 {
        return Err(Error::Config(format!(
            "phase diagram needs exactly 2 axes, got {}",
            config.axes.len()
        )));
    }
    let a0 = config.axes[0];
    let a1 = config.axes[1];
    if !matches!(a0.name, AxisName::Alpha | AxisName::Lambda) || a1.name != AxisName::Energy {
        return Err(Error::Config(
            "phase diagram axes must be (alpha or lambda, E)".into(),
        ));
    }

    let threads = resolve_threads(config.threads);
    let e_values = a1.values();
    let e_step = (a1.max - a1.min) / (a1.steps - 1) as f64;

    struct Column {
        cells: Vec<CellRecord>,
        edge: Option<[f64; 2]>,
    }

    let columns: Vec<Column> = run_indexed(a0.steps, threads, |i| {
        let v0 = a0.value(i);
        let spec = model_with_axis(&config.model, a0.name, v0);
        let model = spec.build();
        let blank = |status: &str| -> Vec<CellRecord> {
            e_values
                .iter()
                .map(|&e| CellRecord {
                    alpha: spec.alpha,
                    lambda: spec.lambda,
                    energy: e,
                    le_formula: None,
                    le_numeric: None,
                    regime: None,
                    ipr: None,
                    edge_distance: None,
                    status: status.to_string(),
                })
                .collect()
        };

        let canon = match canonicalize(&model) {
            Ok(c) => c,
            Err(e) => {
                return Column {
                    cells: blank(&format!("error:{}", e.kind())),
                    edge: None,
                }
            }
        };
        let setup = QuasiPeriodicSetup::new(config.frequency, config.theta);
        let spectral = build_truncation(&model, &setup, 0, config.truncation_size as i64 - 1)
            .and_then(|op| eigenpairs(&op, PairSelection::All));
        let spectral = match spectral {
            Ok(s) => s,
            Err(e) => {
                return Column {
                    cells: blank(&format!("error:{}", e.kind())),
                    edge: None,
                }
            }
        };

        // per-eigenstate IPR pooled into energy bins
        let mut bin_sum = vec![0.0f64; a1.steps];
        let mut bin_count = vec![0usize; a1.steps];
        let vectors = spectral.eigenvectors.as_ref().expect("eigenpairs carry vectors");
        for (ev, vec) in spectral.eigenvalues.iter().zip(vectors) {
            let pos = (ev - a1.min) / e_step;
            let bin = pos.round();
            if bin >= 0.0 && (bin as usize) < a1.steps && (pos - bin).abs() <= 0.5 {
                if let Ok(p) = ipr(vec) {
                    bin_sum[bin as usize] += p;
                    bin_count[bin as usize] += 1;
                }
            }
        }

        let cells = e_values
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                let e_canon = e - canon.energy_shift;
                let point = classify_regime_point(canon.alpha_eff, canon.lambda_eff, e_canon);
                let le_numeric = if config.numeric_le {
                    lyapunov_phase_averaged(
                        &model,
                        config.frequency,
                        e,
                        ComplexifiedPhase::REAL,
                        config.le_steps,
                        config.phases,
                    )
                    .ok()
                    .map(|est| est.value)
                } else {
                    None
                };
                match point {
                    Ok(p) => CellRecord {
                        alpha: spec.alpha,
                        lambda: spec.lambda,
                        energy: e,
                        le_formula: Some(p.le_value),
                        le_numeric,
                        regime: Some(p.classification),
                        ipr: (bin_count[j] > 0).then(|| bin_sum[j] / bin_count[j] as f64),
                        edge_distance: edge_residual(canon.alpha_eff, canon.lambda_eff, e_canon),
                        status: "ok".into(),
                    },
                    Err(err) => CellRecord {
                        alpha: spec.alpha,
                        lambda: spec.lambda,
                        energy: e,
                        le_formula: None,
                        le_numeric,
                        regime: None,
                        ipr: (bin_count[j] > 0).then(|| bin_sum[j] / bin_count[j] as f64),
                        edge_distance: None,
                        status: format!("error:{}", err.kind()),
                    },
                }
            })
            .collect();

        Column {
            cells,
            edge: model_edge_energy(&model).map(|e_star| [v0, e_star]),
        }
    });

    let mut cells = Vec::with_capacity(a0.steps * a1.steps);
    let mut edge_curve = Vec::new();
    for col in columns {
        cells.extend(col.cells);
        if let Some(pt) = col.edge {
            edge_curve.push(pt);
        }
    }
    Ok(PhaseDiagramGrid {
        axes: vec![a0, a1],
        edge_curve: (!edge_curve.is_empty()).then_some(edge_curve),
        cells,
    })
}

/// Formula-vs-numeric comparison over one energy axis. The in-spectrum flag
/// marks energies within 0.05 of the phase-pooled truncation spectrum.
pub fn run_le_comparison(config: &SweepConfig) -> Result<LeComparisonTable> {
    config.validate_common()?;
    if config.axes.len() != 1 || config.axes[0].name != AxisName::Energy {
        return Err(Error::Config(
            "LE comparison sweeps exactly one E axis".into(),
        ));
    }
    let axis = config.axes[0];
    let model = config.model.build();
    model.validate().map_err(|e| Error::Config(e.to_string()))?;
    let canon = canonicalize(&model)?;
    let setup = QuasiPeriodicSetup::new(config.frequency, config.theta);
    let pooled = approximate_spectrum(&model, &setup, config.truncation_size, config.phases)
        .map(|pools| pooled_spectrum(&pools))?;
    let spectrum_distance = |e: f64| -> f64 {
        let idx = pooled.partition_point(|&x| x < e);
        let mut d = f64::INFINITY;
        if idx < pooled.len() {
            d = d.min((pooled[idx] - e).abs());
        }
        if idx > 0 {
            d = d.min((pooled[idx - 1] - e).abs());
        }
        d
    };

    let threads = resolve_threads(config.threads);
    let rows = run_indexed(axis.steps, threads, |i| {
        let e = axis.value(i);
        let formula =
            classify_regime_point(canon.alpha_eff, canon.lambda_eff, e - canon.energy_shift);
        let numeric = lyapunov_phase_averaged(
            &model,
            config.frequency,
            e,
            ComplexifiedPhase::REAL,
            config.le_steps,
            config.phases,
        );
        match (formula, numeric) {
            (Ok(p), Ok(est)) => LeComparisonRow {
                alpha: config.model.alpha,
                lambda: config.model.lambda,
                energy: e,
                le_formula: Some(p.le_value),
                le_numeric: Some(est.value),
                gap: Some((est.value - p.le_value).abs()),
                in_spectrum: Some(spectrum_distance(e) < 0.05),
                status: "ok".into(),
            },
            (f, n) => {
                let err = f.err().or(n.err()).expect("one side failed");
                LeComparisonRow {
                    alpha: config.model.alpha,
                    lambda: config.model.lambda,
                    energy: e,
                    le_formula: None,
                    le_numeric: None,
                    gap: None,
                    in_spectrum: Some(spectrum_distance(e) < 0.05),
                    status: format!("error:{}", err.kind()),
                }
            }
        }
    });
    Ok(LeComparisonTable { axis, rows })
}

/// Acceleration scan over `config.energies` x `config.eps_list`: per point,
/// the phase-averaged L(eps) and the finite difference
/// `(L(eps + h) - L(eps)) / (2 pi h)`, flagged when within 0.1 of an integer.
/// A second estimate at h/2 (`omega_h2`) cross-checks the step choice.
pub fn run_acceleration_scan(config: &SweepConfig) -> Result<AccelerationTable> {
    config.validate_common()?;
    if config.energies.is_empty() || config.eps_list.is_empty() {
        return Err(Error::Config(
            "acceleration scan needs at least one energy and one eps".into(),
        ));
    }
    let model = config.model.build();
    model.validate().map_err(|e| Error::Config(e.to_string()))?;
    let half = crate::potentials::strip_half_width(&model)?;
    let threads = resolve_threads(config.threads);
    let n_eps = config.eps_list.len();
    let count = config.energies.len() * n_eps;

    let rows = run_indexed(count, threads, |idx| {
        let e = config.energies[idx / n_eps];
        let eps = config.eps_list[idx % n_eps];
        let base = AccelerationRow {
            alpha: config.model.alpha,
            lambda: config.model.lambda,
            energy: e,
            eps,
            le: None,
            omega: None,
            omega_h2: None,
            near_integer: None,
            status: String::new(),
        };
        if eps < 0.0 || (eps + config.fd_step).abs() >= half {
            return AccelerationRow {
                status: "error:strip-violation".into(),
                ..base
            };
        }
        let le = |offset: f64| {
            lyapunov_phase_averaged(
                &model,
                config.frequency,
                e,
                ComplexifiedPhase::new(offset),
                config.le_steps,
                config.phases,
            )
        };
        let h = config.fd_step;
        match (le(eps), le(eps + h), le(eps + h / 2.0)) {
            (Ok(lo), Ok(hi), Ok(mid)) => {
                let omega = (hi.value - lo.value) / (std::f64::consts::TAU * h);
                let omega_h2 = (mid.value - lo.value) / (std::f64::consts::TAU * h / 2.0);
                AccelerationRow {
                    le: Some(lo.value),
                    omega: Some(omega),
                    omega_h2: Some(omega_h2),
                    near_integer: Some((omega - omega.round()).abs() <= 0.1),
                    status: "ok".into(),
                    ..base
                }
            }
            (lo, hi, mid) => {
                let err = lo
                    .err()
                    .or(hi.err())
                    .or(mid.err())
                    .expect("one side failed");
                AccelerationRow {
                    status: format!("error:{}", err.kind()),
                    ..base
                }
            }
        }
    });
    Ok(AccelerationTable { rows })
}

// ---------------------------------------------------------------------------
// output emission
// ---------------------------------------------------------------------------

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn regime_str(r: Option<Regime>) -> &'static str {
    match r {
        Some(Regime::PositiveLE) => "PositiveLE",
        Some(Regime::ZeroLE) => "ZeroLE",
        Some(Regime::Edge) => "Edge",
        None => "",
    }
}

/// Fixed grid CSV header.
pub const GRID_CSV_HEADER: &str =
    "alpha,lambda,E,le_formula,le_numeric,regime,ipr,edge_distance,status";

fn grid_csv(grid: &PhaseDiagramGrid) -> String {
    let mut out = String::with_capacity(64 * (grid.cells.len() + 1));
    out.push_str(GRID_CSV_HEADER);
    out.push('\n');
    for c in &grid.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.alpha,
            c.lambda,
            c.energy,
            fmt_opt_f64(c.le_formula),
            fmt_opt_f64(c.le_numeric),
            regime_str(c.regime),
            fmt_opt_f64(c.ipr),
            fmt_opt_f64(c.edge_distance),
            c.status
        ));
    }
    out
}

fn le_table_csv(table: &LeComparisonTable) -> String {
    let mut out = String::new();
    out.push_str("alpha,lambda,E,le_formula,le_numeric,gap,in_spectrum,status\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.alpha,
            r.lambda,
            r.energy,
            fmt_opt_f64(r.le_formula),
            fmt_opt_f64(r.le_numeric),
            fmt_opt_f64(r.gap),
            fmt_opt_bool(r.in_spectrum),
            r.status
        ));
    }
    out
}

fn accel_table_csv(table: &AccelerationTable) -> String {
    let mut out = String::new();
    out.push_str("alpha,lambda,E,eps,le,omega,omega_h2,near_integer,status\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.alpha,
            r.lambda,
            r.energy,
            r.eps,
            fmt_opt_f64(r.le),
            fmt_opt_f64(r.omega),
            fmt_opt_f64(r.omega_h2),
            fmt_opt_bool(r.near_integer),
            r.status
        ));
    }
    out
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    tool_version: &'static str,
    timestamp: &'a str,
    config: &'a SweepConfig,
    #[serde(flatten)]
    result: &'a SweepResult,
}

/// Emission options. `timestamp` is caller-supplied so data files stay a pure
/// function of the configuration (the JSON manifest quotes it verbatim).
#[derive(Debug, Clone)]
pub struct EmitOptions<'a> {
    pub format: OutputFormat,
    pub path: &'a Path,
    pub timestamp: &'a str,
    pub plot_script: bool,
}

/// Write the data file (CSV or JSON manifest) and, when requested, a
/// matplotlib plot script referencing the data file by file name. Returns the
/// written paths.
pub fn emit_outputs(
    result: &SweepResult,
    config: &SweepConfig,
    opts: &EmitOptions,
) -> Result<Vec<PathBuf>> {
    let data = match (opts.format, result) {
        (OutputFormat::Csv, SweepResult::PhaseDiagram(g)) => grid_csv(g),
        (OutputFormat::Csv, SweepResult::LeComparison(t)) => le_table_csv(t),
        (OutputFormat::Csv, SweepResult::Acceleration(t)) => accel_table_csv(t),
        (OutputFormat::Json, _) => {
            let manifest = Manifest {
                tool: "qps",
                tool_version: env!("CARGO_PKG_VERSION"),
                timestamp: opts.timestamp,
                config,
                result,
            };
            let mut s = serde_json::to_string_pretty(&manifest)?;
            s.push('\n');
            s
        }
    };
    let mut written = vec![opts.path.to_path_buf()];
    let mut f = std::fs::File::create(opts.path)?;
    f.write_all(data.as_bytes())?;

    if opts.plot_script {
        let script_path = plot_script_path(opts.path);
        let script = render_plot_script(result, opts);
        std::fs::write(&script_path, script)?;
        written.push(script_path);
    }
    Ok(written)
}

fn plot_script_path(data_path: &Path) -> PathBuf {
    let stem = data_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".into());
    data_path.with_file_name(format!("{stem}_plot.py"))
}

fn py_f64_list(values: impl Iterator<Item = f64>) -> String {
    let items: Vec<String> = values.map(|v| format!("{v:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn render_plot_script(result: &SweepResult, opts: &EmitOptions) -> String {
    let data_name = opts
        .path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data.csv".into());
    let loader = match opts.format {
        OutputFormat::Csv => {
            r#"
def load_rows(path):
    import csv
    with open(path, newline="") as f:
        return [dict(r) for r in csv.DictReader(f)]
"#
        }
        OutputFormat::Json => {
            r#"
def load_rows(path):
    import json
    with open(path) as f:
        doc = json.load(f)
    rows = doc.get("cells") or doc.get("rows") or []
    out = []
    for r in rows:
        d = dict(r)
        for k, v in list(d.items()):
            if v is None:
                d[k] = ""
        out.append(d)
    return out
"#
        }
    };

    match result {
        SweepResult::PhaseDiagram(grid) => {
            let x_name = match grid.axes[0].name {
                AxisName::Alpha => "alpha",
                AxisName::Lambda => "lambda",
                AxisName::Energy => "E",
                AxisName::Theta => "theta",
            };
            let (edge_x, edge_e) = match &grid.edge_curve {
                Some(pts) => (
                    py_f64_list(pts.iter().map(|p| p[0])),
                    py_f64_list(pts.iter().map(|p| p[1])),
                ),
                None => ("[]".into(), "[]".into()),
            };
            format!(
                r#"#!/usr/bin/env python3
"""Phase-diagram heatmap with the analytic mobility-edge overlay.

Reads {data_name} (next to this script) and writes {data_name}.png.
"""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
{loader}
X_NAME = "{x_name}"
EDGE_X = {edge_x}
EDGE_E = {edge_e}

rows = load_rows("{data_name}")
xs = sorted({{float(r[X_NAME]) for r in rows}})
es = sorted({{float(r["E"]) for r in rows}})
xi = {{v: i for i, v in enumerate(xs)}}
ei = {{v: i for i, v in enumerate(es)}}
img = np.full((len(es), len(xs)), np.nan)
for r in rows:
    if r["status"] != "ok" or r["ipr"] == "":
        continue
    img[ei[float(r["E"])], xi[float(r[X_NAME])]] = float(r["ipr"])

fig, ax = plt.subplots(figsize=(7, 5))
mesh = ax.pcolormesh(xs, es, img, shading="nearest", cmap="GnBu_r", vmin=0.0)
fig.colorbar(mesh, ax=ax, label="mean eigenstate IPR")
if EDGE_X:
    inside = [(x, e) for x, e in zip(EDGE_X, EDGE_E) if es[0] <= e <= es[-1]]
    if inside:
        ax.plot([p[0] for p in inside], [p[1] for p in inside], "r-", lw=1.5,
                label="mobility edge")
        ax.legend(loc="upper right")
ax.set_xlabel(X_NAME)
ax.set_ylabel("E")
fig.tight_layout()
fig.savefig("{data_name}.png", dpi=160)
print("wrote {data_name}.png")
"#
            )
        }
        SweepResult::LeComparison(_) => format!(
            r#"#!/usr/bin/env python3
"""Formula vs numeric Lyapunov exponent over the energy axis."""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
{loader}
rows = [r for r in load_rows("{data_name}") if r["status"] == "ok"]
es = [float(r["E"]) for r in rows]
formula = [float(r["le_formula"]) for r in rows]
numeric = [float(r["le_numeric"]) for r in rows]
in_spec = [str(r["in_spectrum"]).lower() == "true" for r in rows]

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(es, formula, "k-", lw=1.2, label="closed form")
ax.plot(es, numeric, "C0.", ms=3.5, label="transfer-matrix estimate")
spec_es = [e for e, s in zip(es, in_spec) if s]
if spec_es:
    ax.plot(spec_es, [-0.02] * len(spec_es), "|", color="C2", label="in spectrum")
ax.set_xlabel("E")
ax.set_ylabel("L(E)")
ax.legend()
fig.tight_layout()
fig.savefig("{data_name}.png", dpi=160)
print("wrote {data_name}.png")
"#
        ),
        SweepResult::Acceleration(_) => format!(
            r#"#!/usr/bin/env python3
"""Acceleration omega against eps, one line per energy."""
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from collections import defaultdict
{loader}
rows = [r for r in load_rows("{data_name}") if r["status"] == "ok"]
by_e = defaultdict(list)
for r in rows:
    by_e[float(r["E"])].append((float(r["eps"]), float(r["omega"])))

fig, ax = plt.subplots(figsize=(7, 4.5))
for e, pts in sorted(by_e.items()):
    pts.sort()
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=4, label=f"E = {{e:g}}")
ax.axhline(1.0, color="gray", lw=0.8, ls="--")
ax.axhline(0.0, color="gray", lw=0.8, ls="--")
ax.set_xlabel("eps")
ax.set_ylabel("omega")
ax.legend()
fig.tight_layout()
fig.savefig("{data_name}.png", dpi=160)
print("wrote {data_name}.png")
"#
        ),
    }
}
