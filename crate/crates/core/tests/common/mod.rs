#![allow(dead_code)]

use mmwave_cs::channel::{AngleMode, SystemConfig};
use mmwave_cs::linalg::{CMatrix, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) / 2f64.sqrt()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cn(rng))
}

pub fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n).map(|_| cn(rng)).collect()
}

pub fn to_na(m: &CMatrix) -> DMatrix<C64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<C64>) -> CMatrix {
    CMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

/// Least squares by SVD in nalgebra, independent of the crate's Cholesky path.
pub fn svd_lstsq(a: &CMatrix, b: &[C64]) -> Vec<C64> {
    let a = to_na(a);
    let b = DMatrix::from_column_slice(b.len(), 1, b);
    a.svd(true, true).solve(&b, 1e-13).unwrap().as_slice().to_vec()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max|a − b| / max(1, max|b|)`.
pub fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    max_abs_diff(a, b) / max_abs(b).max(1.0)
}

/// Single RF chain, `n_x` pilots and `n_y` slots so the effective sizes are
/// exactly `n_x` and `n_y`.
pub fn small_config(grid_n: usize, n_x: usize, n_y: usize, n_paths: usize) -> SystemConfig {
    SystemConfig {
        n_t: 64,
        n_r: 64,
        n_rf: 1,
        q_slots: n_y,
        n_x,
        grid_n,
        n_paths,
        angle_mode: AngleMode::OnGrid,
        ..SystemConfig::default()
    }
}
