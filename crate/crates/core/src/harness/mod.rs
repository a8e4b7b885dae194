//! Monte-Carlo drivers: NMSE-versus-SNR sweeps, runtime-versus-grid sweeps,
//! memory accounting and the CSV/summary plumbing behind them.
//!
//! Every trial draws its channel and noise from `trial_seed(master, trial)`,
//! and every requested method runs on that same measurement, so comparisons
//! between methods are paired. Trials run in parallel in the NMSE sweep; the
//! runtime sweep is sequential so the timings do not compete for cores.

pub mod config;
pub mod records;
pub mod summary;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::channel::{
    build_1d_sensing_matrix, build_dictionaries, build_selection_precoders, trial_seed,
    DictionaryPair, Scenario, SystemConfig, DEFAULT_ELEMENT_CAP,
};
use crate::error::{Error, Result};
use crate::estimators::{
    aod_stage, omp_1d, omp_2d, reconstruct_channel, somp_aoa_stage, Aggregation,
    DenseCoefficients, GridEstimate, Ls1dSolver, SimplifiedLs2d, StoppingRule, TwoStageResult,
};
use crate::linalg::{devec, CMatrix, C64};

pub use records::{emit_csv, nmse, read_csv, Method, Nmse, TrialRecord};
pub use summary::{summarize, SummaryRow};

/// SNR used by the runtime sweep.
pub const RUNTIME_SNR_DB: f64 = 10.0;

/// Default cap on the entries of the 1-D LS normal matrix (`grid_n⁴`).
pub const DEFAULT_LS1D_GRAM_CAP: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopKind {
    /// Select exactly `n_paths` atoms.
    #[default]
    Fixed,
    /// Stop once `‖residual‖_F ≤ epsilon_rel · ‖Ỹ‖_F`.
    Residual,
}

impl FromStr for StopKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(StopKind::Fixed),
            "residual" => Ok(StopKind::Residual),
            _ => Err(Error::Config(format!("unknown stopping policy `{s}`"))),
        }
    }
}

impl fmt::Display for StopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopKind::Fixed => "fixed",
            StopKind::Residual => "residual",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base_config: SystemConfig,
    pub snr_points_db: Vec<f64>,
    pub grid_sizes: Vec<usize>,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub output_path: PathBuf,
    /// Run a single noiseless point instead of the SNR list.
    pub noiseless: bool,
    /// Grid used by the dense LS baselines; `None` picks `min(n_x, n_y, grid_n)`.
    pub ls_grid_n: Option<usize>,
    pub stop: StopKind,
    pub epsilon_rel: f64,
    pub aggregation: Aggregation,
    pub element_cap: usize,
    pub ls1d_gram_cap: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            base_config: SystemConfig::default(),
            snr_points_db: vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0],
            grid_sizes: vec![16, 24, 32, 48, 64],
            trials: 100,
            methods: Method::ESTIMATORS.to_vec(),
            output_path: PathBuf::from("results.csv"),
            noiseless: false,
            ls_grid_n: None,
            stop: StopKind::Fixed,
            epsilon_rel: 1e-9,
            aggregation: Aggregation::L1,
            element_cap: DEFAULT_ELEMENT_CAP,
            ls1d_gram_cap: DEFAULT_LS1D_GRAM_CAP,
        }
    }
}

impl SweepSpec {
    fn validate_common(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if let Some(m) = self.methods.iter().find(|m| m.is_build_row()) {
            return Err(Error::Config(format!("{m} is a timing row, not a method")));
        }
        if !(self.epsilon_rel >= 0.0) {
            return Err(Error::Config("epsilon_rel must be non-negative".into()));
        }
        Ok(())
    }

    pub fn validate_nmse(&self) -> Result<()> {
        self.validate_common()?;
        if !self.noiseless && self.snr_points_db.is_empty() {
            return Err(Error::Config("no SNR points requested".into()));
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR points must be finite; use noiseless".into()));
        }
        self.base_config.validate()
    }

    pub fn validate_runtime(&self) -> Result<()> {
        self.validate_common()?;
        if self.grid_sizes.is_empty() {
            return Err(Error::Config("no grid sizes requested".into()));
        }
        if self.grid_sizes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("grid sizes must be sorted ascending".into()));
        }
        Ok(())
    }

    /// The SNR points of an NMSE sweep; `[+∞]` when noiseless.
    pub fn snr_points(&self) -> Vec<f64> {
        if self.noiseless {
            vec![f64::INFINITY]
        } else {
            self.snr_points_db.clone()
        }
    }

    fn resolved_ls_grid(&self, cfg: &SystemConfig) -> usize {
        self.ls_grid_n
            .unwrap_or_else(|| cfg.grid_n.min(cfg.n_x).min(cfg.n_y()))
    }
}

/// `(grid_n²·n_x·n_y, grid_n·(n_x + n_y))`: complex entries held by the 1-D
/// sensing matrix versus the two factored dictionaries.
pub fn memory_footprint(cfg: &SystemConfig) -> (usize, usize) {
    let n = cfg.grid_n;
    (n * n * cfg.n_x * cfg.n_y(), n * (cfg.n_x + cfg.n_y()))
}

/// Hash of the exact bits of a measurement.
pub fn measurement_hash(m: &CMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    m.shape().hash(&mut h);
    for z in m.as_slice() {
        z.re.to_bits().hash(&mut h);
        z.im.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Result of running one method on one scenario.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    pub channel_estimate: CMatrix,
    /// Recovered `(aoa_index, aod_index, weight)` atoms.
    pub atoms: Vec<(usize, usize, C64)>,
    pub nmse: Nmse,
    pub wall_time_s: f64,
    pub iterations: usize,
    /// Hash of the measurement this method was handed.
    pub input_hash: u64,
    /// Grid size of the dictionary this method searched.
    pub grid_n: usize,
}

/// Dictionaries and dictionary-only precomputation for one configuration,
/// shared read-only by every trial.
#[derive(Debug)]
pub struct Workspace {
    cfg: SystemConfig,
    dict: DictionaryPair,
    ls_dict: DictionaryPair,
    sensing: Option<Result<CMatrix>>,
    ls1d: Option<Result<Ls1dSolver>>,
    ls2d: Option<Result<SimplifiedLs2d>>,
    stop: StopKind,
    epsilon_rel: f64,
    aggregation: Aggregation,
    element_cap: usize,
    ls1d_gram_cap: usize,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed().as_secs_f64())
}

fn unprepared(what: &str) -> Error {
    Error::Config(format!("{what} was not prepared for this workspace"))
}

impl Workspace {
    /// Builds the dictionaries and everything the requested methods precompute.
    pub fn new(cfg: &SystemConfig, spec: &SweepSpec, methods: &[Method]) -> Result<Self> {
        let mut ws = Self::without_sensing(cfg, spec)?;
        ws.prepare(methods);
        Ok(ws)
    }

    /// Dictionaries only; call [`Workspace::prepare`] before running methods that precompute.
    pub fn without_sensing(cfg: &SystemConfig, spec: &SweepSpec) -> Result<Self> {
        let (f, w) = build_selection_precoders(cfg)?;
        let dict = build_dictionaries(cfg, &f, &w)?;
        let ls_cfg = SystemConfig {
            grid_n: spec.resolved_ls_grid(cfg),
            ..cfg.clone()
        };
        let ls_dict = build_dictionaries(&ls_cfg, &f, &w)?;
        Ok(Self {
            cfg: cfg.clone(),
            dict,
            ls_dict,
            sensing: None,
            ls1d: None,
            ls2d: None,
            stop: spec.stop,
            epsilon_rel: spec.epsilon_rel,
            aggregation: spec.aggregation,
            element_cap: spec.element_cap,
            ls1d_gram_cap: spec.ls1d_gram_cap,
        })
    }

    pub fn dictionaries(&self) -> &DictionaryPair {
        &self.dict
    }

    pub fn ls_dictionaries(&self) -> &DictionaryPair {
        &self.ls_dict
    }

    /// (Re)builds the precomputed state for `methods` and returns the wall time of
    /// every setup step that succeeded, tagged with its build-row method.
    /// Setup failures are kept and re-raised when the method runs.
    pub fn prepare(&mut self, methods: &[Method]) -> Vec<(Method, f64)> {
        let mut times = Vec::new();
        if methods.contains(&Method::Omp1d) {
            let (built, dt) = timed(|| build_1d_sensing_matrix(&self.dict, self.element_cap));
            if built.is_ok() {
                times.push((Method::Omp1dBuild, dt));
            }
            self.sensing = Some(built);
        }
        if methods.contains(&Method::Ls1d) {
            let m = self.ls_dict.grid_n();
            let gram_entries = (m * m).saturating_mul(m * m);
            let shared = self.ls_dict.grid_n() == self.dict.grid_n();
            let sensing = match &self.sensing {
                _ if gram_entries > self.ls1d_gram_cap => Err(Error::Resource {
                    what: "1-D LS normal matrix",
                    requested: gram_entries,
                    cap: self.ls1d_gram_cap,
                }),
                Some(s) if shared => s.clone(),
                _ => build_1d_sensing_matrix(&self.ls_dict, self.element_cap),
            };
            let (solver, dt) = timed(|| sensing.and_then(Ls1dSolver::new));
            if solver.is_ok() {
                times.push((Method::Ls1dBuild, dt));
            }
            self.ls1d = Some(solver);
        }
        if methods.contains(&Method::Ls2dSimple) {
            let (op, dt) = timed(|| SimplifiedLs2d::new(&self.ls_dict));
            if op.is_ok() {
                times.push((Method::Ls2dSimpleBuild, dt));
            }
            self.ls2d = Some(op);
        }
        times
    }

    fn pursuit_rule(&self, atoms: usize, norm: f64) -> Result<StoppingRule> {
        match self.stop {
            StopKind::Fixed => Ok(StoppingRule::fixed(self.cfg.n_paths)?.with_hard_cap(atoms)),
            StopKind::Residual => StoppingRule::residual(self.epsilon_rel * norm, atoms),
        }
    }

    /// Runs `method` on the scenario's measurement. Only the estimator call is timed.
    pub fn run(&self, method: Method, scenario: &Scenario) -> Result<MethodOutcome> {
        let y = &scenario.measurement;
        let input_hash = measurement_hash(y);
        let n = self.dict.grid_n();
        let (n_x, n_y) = (self.cfg.n_x, self.cfg.n_y());
        let y_norm = y.frobenius_norm();

        let (atoms, iterations, wall_time_s, dict) = match method {
            Method::Omp1d => {
                let sensing = match &self.sensing {
                    Some(s) => s.as_ref().map_err(Clone::clone)?,
                    None => return Err(unprepared("1-D sensing matrix")),
                };
                let rule = self.pursuit_rule((n * n).min(n_x * n_y), y_norm)?;
                let yv = y.clone().vec().into_vec();
                let (est, dt) = timed(|| omp_1d(&yv, sensing, &rule));
                let est = est?;
                (est.atoms(n), est.iterations, dt, &self.dict)
            }
            Method::Omp2d => {
                let rule = self.pursuit_rule((n * n).min(n_x * n_y), y_norm)?;
                let (est, dt) = timed(|| omp_2d(y, &self.dict, &rule));
                let est = est?;
                (est.atoms(n), est.iterations, dt, &self.dict)
            }
            Method::Somp2Stage => {
                let (result, dt) = timed(|| self.two_stage(y, y_norm));
                let result = result?;
                (result.atoms(n), result.iterations, dt, &self.dict)
            }
            Method::Ls1d => {
                let solver = match &self.ls1d {
                    Some(s) => s.as_ref().map_err(Clone::clone)?,
                    None => return Err(unprepared("1-D LS solver")),
                };
                let m = self.ls_dict.grid_n();
                let yv = y.clone().vec().into_vec();
                let (z, dt) = timed(|| solver.apply(&yv));
                let z = devec(CMatrix::column(z?), m, m)?;
                (DenseCoefficients(z).atoms(m), 1, dt, &self.ls_dict)
            }
            Method::Ls2dSimple => {
                let op = match &self.ls2d {
                    Some(s) => s.as_ref().map_err(Clone::clone)?,
                    None => return Err(unprepared("simplified 2-D LS operator")),
                };
                let (z, dt) = timed(|| op.apply(y));
                (DenseCoefficients(z?).atoms(self.ls_dict.grid_n()), 1, dt, &self.ls_dict)
            }
            build => return Err(Error::Config(format!("{build} is not an estimator"))),
        };

        let channel_estimate = reconstruct_channel(&AtomList(&atoms), dict)?;
        let nmse = nmse(&scenario.channel, &channel_estimate)?;
        Ok(MethodOutcome {
            method,
            channel_estimate,
            atoms,
            nmse,
            wall_time_s,
            iterations,
            input_hash,
            grid_n: dict.grid_n(),
        })
    }

    fn two_stage(&self, y: &CMatrix, y_norm: f64) -> Result<TwoStageResult> {
        let n = self.dict.grid_n();
        let aoa_rule = self.pursuit_rule(n.min(self.cfg.n_y()), y_norm)?;
        let stage1 = somp_aoa_stage(y, &self.dict.a_r_eff, &aoa_rule, self.aggregation)?;
        let l_sel = stage1.rows.len();
        let aod_rule = self.pursuit_rule(
            l_sel * n.min(self.cfg.n_x),
            stage1.coeff_matrix.frobenius_norm(),
        )?;
        let (triples, est) = aod_stage(&stage1.coeff_matrix, &self.dict.a_t_eff, &aod_rule)?;
        Ok(TwoStageResult {
            pairs: triples
                .into_iter()
                .map(|(l, j, g)| (stage1.rows[l], j, g))
                .collect(),
            iterations: l_sel + est.iterations,
            aoa_rows: stage1.rows,
            coeff_matrix: stage1.coeff_matrix,
        })
    }
}

struct AtomList<'a>(&'a [(usize, usize, C64)]);

impl GridEstimate for AtomList<'_> {
    fn atoms(&self, _grid_n: usize) -> Vec<(usize, usize, C64)> {
        self.0.to_vec()
    }
}

fn record_for(
    method: Method,
    outcome: &Result<MethodOutcome>,
    snr_db: f64,
    grid_n: usize,
    trial_index: usize,
    seed: u64,
) -> TrialRecord {
    match outcome {
        Ok(o) => TrialRecord {
            method,
            snr_db,
            grid_n: o.grid_n,
            trial_index,
            nmse: o.nmse,
            wall_time_s: o.wall_time_s,
            iterations: o.iterations,
            seed_used: seed,
        },
        Err(e) => {
            log::debug!("{method} failed on trial {trial_index} at {snr_db} dB: {e}");
            TrialRecord {
                method,
                snr_db,
                grid_n,
                trial_index,
                nmse: Nmse::Failed,
                wall_time_s: 0.0,
                iterations: 0,
                seed_used: seed,
            }
        }
    }
}

/// Configuration of one SNR point (`+∞` meaning noiseless).
pub fn config_at_snr(base: &SystemConfig, snr_db: f64) -> SystemConfig {
    if snr_db.is_infinite() {
        base.clone().noiseless()
    } else {
        base.clone().with_snr_db(snr_db)
    }
}

/// All methods on one trial. Estimator errors stay inside the returned vector.
pub fn run_trial(
    ws: &Workspace,
    base: &SystemConfig,
    methods: &[Method],
    snr_db: f64,
    seed: u64,
) -> Result<(Scenario, Vec<(Method, Result<MethodOutcome>)>)> {
    let cfg = config_at_snr(base, snr_db);
    let scenario = Scenario::generate(&cfg, seed)?;
    let outcomes = methods
        .iter()
        .map(|&m| (m, ws.run(m, &scenario)))
        .collect();
    Ok((scenario, outcomes))
}

/// NMSE versus SNR: every `(snr, trial)` pair runs every method on one shared measurement.
pub fn run_nmse_sweep(spec: &SweepSpec) -> Result<Vec<TrialRecord>> {
    spec.validate_nmse()?;
    let base = &spec.base_config;
    let ws = Workspace::new(base, spec, &spec.methods)?;
    let jobs: Vec<(f64, usize)> = spec
        .snr_points()
        .into_iter()
        .flat_map(|s| (0..spec.trials).map(move |t| (s, t)))
        .collect();

    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(snr, t)| {
            let seed = trial_seed(base.seed, t as u64);
            let (_, outcomes) = run_trial(&ws, base, &spec.methods, snr, seed)?;
            Ok(outcomes
                .iter()
                .map(|(m, o)| {
                    let grid = if matches!(m, Method::Ls1d | Method::Ls2dSimple) {
                        ws.ls_dict.grid_n()
                    } else {
                        base.grid_n
                    };
                    record_for(*m, o, snr, grid, t, seed)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut records: Vec<TrialRecord> = per_job.into_iter().flatten().collect();
    records::sort_records(&mut records);
    Ok(records)
}

/// Output of [`run_runtime_sweep`].
#[derive(Debug, Clone, Default)]
pub struct RuntimeReport {
    /// One row per (grid size, trial, method) that ran.
    pub records: Vec<TrialRecord>,
    /// Time spent building the 1-D sensing matrix, method `omp1d_build`.
    pub build_records: Vec<TrialRecord>,
    /// `(grid_n, method, reason)` for every method skipped at a size.
    pub skipped: Vec<(usize, Method, String)>,
}

impl RuntimeReport {
    pub fn all_records(&self) -> Vec<TrialRecord> {
        let mut v = self.records.clone();
        v.extend(self.build_records.iter().cloned());
        records::sort_records(&mut v);
        v
    }
}

/// Configuration of one runtime-sweep point: `n_x = n_y = grid_n`.
pub fn runtime_config(base: &SystemConfig, grid_n: usize) -> Result<SystemConfig> {
    if grid_n % base.n_rf != 0 {
        return Err(Error::Config(format!(
            "grid size {grid_n} is not a multiple of n_rf = {}",
            base.n_rf
        )));
    }
    let cfg = SystemConfig {
        grid_n,
        n_x: grid_n,
        q_slots: grid_n / base.n_rf,
        ..base.clone()
    }
    .with_snr_db(RUNTIME_SNR_DB);
    cfg.validate()?;
    Ok(cfg)
}

/// Wall time versus grid size, sequential, at 10 dB with `n_x = n_y = grid_n`.
///
/// Dictionary-only setup (sensing matrix, LS factors) is redone and timed for
/// every trial and reported under the build-row methods.
pub fn run_runtime_sweep(spec: &SweepSpec) -> Result<RuntimeReport> {
    spec.validate_runtime()?;
    let mut report = RuntimeReport::default();
    for &grid_n in &spec.grid_sizes {
        let cfg = runtime_config(&spec.base_config, grid_n)?;
        let local = SweepSpec {
            ls_grid_n: Some(grid_n),
            ..spec.clone()
        };
        let mut ws = Workspace::without_sensing(&cfg, &local)?;
        let mut active: Vec<Method> = spec.methods.clone();
        for t in 0..spec.trials {
            let seed = trial_seed(cfg.seed, t as u64);
            let scenario = Scenario::generate(&cfg, seed)?;
            for (m, dt) in ws.prepare(&active) {
                report.build_records.push(TrialRecord {
                    method: m,
                    snr_db: RUNTIME_SNR_DB,
                    grid_n,
                    trial_index: t,
                    nmse: Nmse::Failed,
                    wall_time_s: dt,
                    iterations: 0,
                    seed_used: seed,
                });
            }
            for m in active.clone() {
                let outcome = ws.run(m, &scenario);
                if let Err(e @ Error::Resource { .. }) = &outcome {
                    log::warn!("skipping {m} at grid_n = {grid_n}: {e}");
                    report.skipped.push((grid_n, m, e.to_string()));
                    active.retain(|&a| a != m);
                    continue;
                }
                report
                    .records
                    .push(record_for(m, &outcome, RUNTIME_SNR_DB, grid_n, t, seed));
            }
        }
    }
    records::sort_records(&mut report.records);
    Ok(report)
}
