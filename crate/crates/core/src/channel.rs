//! Scenario generation: array geometry, sparse geometric channels, the
//! selection precoder/combiner, pilots, noisy measurements and the angle
//! dictionaries the estimators search over.
//!
//! Angles are carried as spatial frequencies `f = d·sinθ/λ ∈ [-1/2, 1/2)`.
//! At half-wavelength spacing the DFT grid over `f` is orthogonal, which is
//! what makes the on-grid exact-recovery checks meaningful.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, C64, ONE, ZERO};

/// Default cap on the number of entries of a materialized 1-D sensing matrix.
pub const DEFAULT_ELEMENT_CAP: usize = 1 << 30;

/// Max |X·Xᴴ − σ_p²·I| tolerated when cancelling pilots.
pub const PILOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleMode {
    OnGrid,
    OffGrid,
}

impl fmt::Display for AngleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleMode::OnGrid => "on_grid",
            AngleMode::OffGrid => "off_grid",
        })
    }
}

impl FromStr for AngleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on_grid" | "on-grid" => Ok(AngleMode::OnGrid),
            "off_grid" | "off-grid" => Ok(AngleMode::OffGrid),
            _ => Err(Error::Config(format!("unknown angle mode `{s}`"))),
        }
    }
}

/// Pilot matrix family. Both satisfy `X·Xᴴ = σ_p²·I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PilotKind {
    Identity,
    /// Scaled unitary DFT matrix.
    Dft,
}

impl fmt::Display for PilotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PilotKind::Identity => "identity",
            PilotKind::Dft => "dft",
        })
    }
}

impl FromStr for PilotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(PilotKind::Identity),
            "dft" => Ok(PilotKind::Dft),
            _ => Err(Error::Config(format!("unknown pilot kind `{s}`"))),
        }
    }
}

/// Every dimension, power and seed of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n_rf: usize,
    /// Receive time slots; `n_y = q_slots · n_rf`.
    pub q_slots: usize,
    pub n_x: usize,
    /// Dictionary size per side.
    pub grid_n: usize,
    pub n_paths: usize,
    /// Antenna spacing over wavelength.
    pub spacing_ratio: f64,
    pub sigma_p2: f64,
    pub sigma_n2: f64,
    pub angle_mode: AngleMode,
    pub pilots: PilotKind,
    pub seed: u64,
}

impl Default for SystemConfig {
    /// 64×64 arrays, 4 RF chains, 3 paths, a 32-point grid and 12×12 measurements at 10 dB.
    fn default() -> Self {
        Self {
            n_t: 64,
            n_r: 64,
            n_rf: 4,
            q_slots: 3,
            n_x: 12,
            grid_n: 32,
            n_paths: 3,
            spacing_ratio: 0.5,
            sigma_p2: 1.0,
            sigma_n2: 0.1,
            angle_mode: AngleMode::OffGrid,
            pilots: PilotKind::Identity,
            seed: 0,
        }
    }
}

impl SystemConfig {
    pub fn n_y(&self) -> usize {
        self.q_slots * self.n_rf
    }

    /// Sets the noise power so that `σ_p²/σ_n²` equals `snr_db`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.sigma_n2 = self.sigma_p2 / 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn noiseless(mut self) -> Self {
        self.sigma_n2 = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_t == 0 || self.n_r == 0 || self.n_rf == 0 || self.q_slots == 0 {
            return fail("antenna, RF-chain and slot counts must be positive".into());
        }
        if self.n_x == 0 || self.grid_n == 0 || self.n_paths == 0 {
            return fail("n_x, grid_n and n_paths must be positive".into());
        }
        if self.n_x > self.n_t {
            return fail(format!("n_x = {} exceeds n_t = {}", self.n_x, self.n_t));
        }
        if self.n_y() > self.n_r {
            return fail(format!("n_y = {} exceeds n_r = {}", self.n_y(), self.n_r));
        }
        if self.n_paths > self.grid_n {
            return fail(format!(
                "n_paths = {} exceeds grid_n = {}",
                self.n_paths, self.grid_n
            ));
        }
        if !(self.spacing_ratio > 0.0) || !self.spacing_ratio.is_finite() {
            return fail("spacing_ratio must be positive".into());
        }
        if !(self.sigma_p2 > 0.0) || !self.sigma_p2.is_finite() {
            return fail("sigma_p2 must be positive".into());
        }
        if !(self.sigma_n2 >= 0.0) || !self.sigma_n2.is_finite() {
            return fail("sigma_n2 must be non-negative".into());
        }
        if self.grid_n > self.n_t.min(self.n_r) {
            log::warn!(
                "grid_n = {} exceeds min(n_t, n_r) = {}; full dictionaries are not orthogonal",
                self.grid_n,
                self.n_t.min(self.n_r)
            );
        }
        Ok(())
    }
}

/// Seed of trial `trial` under master seed `master`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master ^ trial
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ULA response `(1/√n)·exp(j·2π·spacing·k·sin)`, `k = 0..n`.
pub fn steering_vector(n_antennas: usize, spacing_ratio: f64, sin_angle: f64) -> Vec<C64> {
    steering_at(n_antennas, spacing_ratio * sin_angle)
}

/// ULA response at spatial frequency `freq`.
pub fn steering_at(n_antennas: usize, freq: f64) -> Vec<C64> {
    let amp = 1.0 / (n_antennas as f64).sqrt();
    (0..n_antennas)
        .map(|k| C64::from_polar(amp, 2.0 * PI * freq * k as f64))
        .collect()
}

/// DFT-bin grid `{-1/2 + i/n}` of spatial frequencies.
pub fn build_grid(grid_n: usize) -> Vec<f64> {
    (0..grid_n)
        .map(|i| -0.5 + i as f64 / grid_n as f64)
        .collect()
}

/// Grid index of `freq` if it lies on the `grid_n` grid (within 1e-12).
pub fn grid_index(freq: f64, grid_n: usize) -> Option<usize> {
    let pos = (freq + 0.5) * grid_n as f64;
    let i = pos.round();
    ((pos - i).abs() < 1e-12 * grid_n as f64 && i >= 0.0 && (i as usize) < grid_n)
        .then_some(i as usize)
}

fn standard_complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ground-truth sparse channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// Path gains including the `√(n_t·n_r/L)` normalization.
    pub gains: Vec<C64>,
    pub aoa_freqs: Vec<f64>,
    pub aod_freqs: Vec<f64>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `(aoa_index, aod_index)` of every path when all of them sit on the grid.
    pub fn grid_indices(&self, grid_n: usize) -> Option<Vec<(usize, usize)>> {
        self.aoa_freqs
            .iter()
            .zip(&self.aod_freqs)
            .map(|(&fr, &ft)| Some((grid_index(fr, grid_n)?, grid_index(ft, grid_n)?)))
            .collect()
    }
}

/// Draws path gains and angles.
pub fn generate_paths(cfg: &SystemConfig, rng: &mut impl Rng) -> Result<PathSet> {
    let l = cfg.n_paths;
    let (aoa_freqs, aod_freqs) = match cfg.angle_mode {
        AngleMode::OnGrid => {
            if l > cfg.grid_n {
                return Err(Error::Infeasible(format!(
                    "cannot draw {l} distinct angles from a {}-point grid",
                    cfg.grid_n
                )));
            }
            let grid = build_grid(cfg.grid_n);
            let aoa = sample(rng, cfg.grid_n, l).iter().map(|i| grid[i]).collect();
            let aod = sample(rng, cfg.grid_n, l).iter().map(|i| grid[i]).collect();
            (aoa, aod)
        }
        AngleMode::OffGrid => {
            let aoa = (0..l).map(|_| rng.random_range(-0.5..0.5)).collect();
            let aod = (0..l).map(|_| rng.random_range(-0.5..0.5)).collect();
            (aoa, aod)
        }
    };
    let scale = ((cfg.n_t * cfg.n_r) as f64 / l as f64).sqrt();
    let gains = (0..l).map(|_| standard_complex_normal(rng) * scale).collect();
    Ok(PathSet {
        gains,
        aoa_freqs,
        aod_freqs,
    })
}

/// `H = Σ_l z_l·a_r(f_r,l)·a_t(f_t,l)ᴴ`, an `n_r × n_t` matrix.
pub fn build_channel(paths: &PathSet, cfg: &SystemConfig) -> CMatrix {
    let mut h = CMatrix::zeros(cfg.n_r, cfg.n_t);
    for ((&z, &fr), &ft) in paths.gains.iter().zip(&paths.aoa_freqs).zip(&paths.aod_freqs) {
        let ar = steering_at(cfg.n_r, fr);
        let at = steering_at(cfg.n_t, ft);
        h.add_outer(z, &ar, &at).expect("steering lengths match the config");
    }
    h
}

fn selection(n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, k, |i, j| if i == j { ONE } else { ZERO })
}

/// Selection precoder `F = [I; 0]` (n_t × n_x) and combiner `W = [I; 0]` (n_r × n_y).
pub fn build_selection_precoders(cfg: &SystemConfig) -> Result<(CMatrix, CMatrix)> {
    if cfg.n_x > cfg.n_t || cfg.n_y() > cfg.n_r {
        return Err(Error::Config(format!(
            "selection needs n_x ≤ n_t and n_y ≤ n_r, got {} / {} and {} / {}",
            cfg.n_x,
            cfg.n_t,
            cfg.n_y(),
            cfg.n_r
        )));
    }
    Ok((selection(cfg.n_t, cfg.n_x), selection(cfg.n_r, cfg.n_y())))
}

/// `n_x × n_x` pilot matrix with `X·Xᴴ = σ_p²·I`.
pub fn build_pilots(cfg: &SystemConfig) -> CMatrix {
    let n = cfg.n_x;
    let amp = cfg.sigma_p2.sqrt();
    match cfg.pilots {
        PilotKind::Identity => CMatrix::identity(n).scale(C64::new(amp, 0.0)),
        PilotKind::Dft => {
            let a = amp / (n as f64).sqrt();
            CMatrix::from_fn(n, n, |i, k| {
                // reduce i·k mod n so the phase stays exact for large n
                let m = (i * k) % n;
                C64::from_polar(a, -2.0 * PI * m as f64 / n as f64)
            })
        }
    }
}

/// `Y = Wᴴ·H·F·X + Wᴴ·N` with `N` i.i.d. CN(0, σ_n²), `n_r × n_x`.
pub fn synthesize_measurements(
    h: &CMatrix,
    f: &CMatrix,
    w: &CMatrix,
    x: &CMatrix,
    cfg: &SystemConfig,
    rng: &mut impl Rng,
) -> Result<CMatrix> {
    let signal = w.adjoint_mul(&h.matmul(f)?.matmul(x)?)?;
    let sigma = cfg.sigma_n2.sqrt();
    let noise = CMatrix::from_fn(h.rows(), x.cols(), |_, _| {
        standard_complex_normal(rng) * sigma
    });
    signal.add(&w.adjoint_mul(&noise)?)
}

/// Removes the pilots: `Ỹ = Y·Xᴴ/σ_p²`.
pub fn cancel_pilots(y: &CMatrix, x: &CMatrix, cfg: &SystemConfig) -> Result<CMatrix> {
    let xxh = x.matmul(&x.adjoint())?;
    let deviation = xxh
        .sub(&CMatrix::identity(x.rows()).scale(C64::new(cfg.sigma_p2, 0.0)))?
        .max_abs();
    if deviation > PILOT_TOL * cfg.sigma_p2.max(1.0) {
        return Err(Error::Pilot { deviation });
    }
    Ok(y.matmul(&x.adjoint())?.scale(C64::new(1.0 / cfg.sigma_p2, 0.0)))
}

/// Angle dictionaries, both full (antenna domain) and effective (after F and W).
#[derive(Debug, Clone)]
pub struct DictionaryPair {
    /// `Wᴴ·Ā_R`, `n_y × grid_n`.
    pub a_r_eff: CMatrix,
    /// `Fᴴ·Ā_T`, `n_x × grid_n`.
    pub a_t_eff: CMatrix,
    pub a_r_full: CMatrix,
    pub a_t_full: CMatrix,
    pub grid: Vec<f64>,
}

impl DictionaryPair {
    pub fn grid_n(&self) -> usize {
        self.grid.len()
    }

    /// The `(rx, tx)` factor pair the 2-D estimators work on.
    pub fn effective(&self) -> Factors<'_> {
        Factors {
            rx: &self.a_r_eff,
            tx: &self.a_t_eff,
        }
    }
}

/// A separable 2-D dictionary: atom `(i, j)` is `rx[:, i]·tx[:, j]ᴴ`.
#[derive(Debug, Clone, Copy)]
pub struct Factors<'a> {
    pub rx: &'a CMatrix,
    pub tx: &'a CMatrix,
}

impl Factors<'_> {
    pub fn n_rx(&self) -> usize {
        self.rx.cols()
    }

    pub fn n_tx(&self) -> usize {
        self.tx.cols()
    }

    /// Flat index `n_rx·j + i` of atom `(i, j)`.
    pub fn flat(&self, i: usize, j: usize) -> usize {
        self.n_rx() * j + i
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        (k % self.n_rx(), k / self.n_rx())
    }
}

fn steering_matrix(n_antennas: usize, grid: &[f64]) -> CMatrix {
    let cols: Vec<Vec<C64>> = grid.iter().map(|&f| steering_at(n_antennas, f)).collect();
    let refs: Vec<&[C64]> = cols.iter().map(Vec::as_slice).collect();
    CMatrix::from_columns(&refs).expect("equal-length steering vectors")
}

/// Steering dictionaries on the `grid_n` DFT grid, and their effective versions.
pub fn build_dictionaries(cfg: &SystemConfig, f: &CMatrix, w: &CMatrix) -> Result<DictionaryPair> {
    let grid = build_grid(cfg.grid_n);
    let a_r_full = steering_matrix(cfg.n_r, &grid);
    let a_t_full = steering_matrix(cfg.n_t, &grid);
    let a_r_eff = w.adjoint_mul(&a_r_full)?;
    let a_t_eff = f.adjoint_mul(&a_t_full)?;
    Ok(DictionaryPair {
        a_r_eff,
        a_t_eff,
        a_r_full,
        a_t_full,
        grid,
    })
}

/// Rank-one atom `ã_R,i·ã_T,jᴴ` (0-based indices).
pub fn atom_2d(dict: &DictionaryPair, i: usize, j: usize) -> Result<CMatrix> {
    let n = dict.grid_n();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::Index {
                index: idx,
                bound: n,
            });
        }
    }
    let mut a = CMatrix::zeros(dict.a_r_eff.rows(), dict.a_t_eff.rows());
    a.add_outer(ONE, dict.a_r_eff.col(i), dict.a_t_eff.col(j))?;
    Ok(a)
}

/// The 1-D sensing matrix `conj(Ã_T) ⊗ Ã_R`; column `N·j + i` is `vec(atom_2d(i, j))`.
pub fn build_1d_sensing_matrix(dict: &DictionaryPair, element_cap: usize) -> Result<CMatrix> {
    let n = dict.grid_n();
    let requested = n
        .saturating_mul(n)
        .saturating_mul(dict.a_r_eff.rows())
        .saturating_mul(dict.a_t_eff.rows());
    if requested > element_cap {
        return Err(Error::Resource {
            what: "1-D sensing matrix",
            requested,
            cap: element_cap,
        });
    }
    Ok(kron(&dict.a_t_eff.conj(), &dict.a_r_eff))
}

/// Everything generated for one trial from a single seeded stream.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub paths: PathSet,
    pub channel: CMatrix,
    pub precoder: CMatrix,
    pub combiner: CMatrix,
    pub pilots: CMatrix,
    pub received: CMatrix,
    /// Measurement after pilot cancellation.
    pub measurement: CMatrix,
}

impl Scenario {
    /// Draws paths, then noise, from `seeded_rng(seed)`.
    pub fn generate(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = seeded_rng(seed);
        let paths = generate_paths(cfg, &mut rng)?;
        let channel = build_channel(&paths, cfg);
        let (precoder, combiner) = build_selection_precoders(cfg)?;
        let pilots = build_pilots(cfg);
        let received =
            synthesize_measurements(&channel, &precoder, &combiner, &pilots, cfg, &mut rng)?;
        let measurement = cancel_pilots(&received, &pilots, cfg)?;
        Ok(Self {
            paths,
            channel,
            precoder,
            combiner,
            pilots,
            received,
            measurement,
        })
    }

    pub fn dictionaries(&self, cfg: &SystemConfig) -> Result<DictionaryPair> {
        build_dictionaries(cfg, &self.precoder, &self.combiner)
    }
}
