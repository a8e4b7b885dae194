//! Greedy sparse recovery in the three frameworks (1-D OMP, two-stage SOMP,
//! 2-D OMP), the direct least-squares baselines, and channel reconstruction.
//!
//! All matching steps break ties towards the smallest flat index `N·j + i`,
//! so the 1-D and 2-D pursuits select identical supports on identical data.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::channel::{DictionaryPair, Factors};
use crate::error::{Error, Result};
use crate::linalg::{dotc, hermitian_solve, norm2, CMatrix, Cholesky, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    FixedIterations,
    ResidualThreshold,
}

/// When a pursuit stops.
///
/// In fixed mode exactly `max_iters` atoms are selected (never more than
/// `hard_cap`). In threshold mode the loop runs until the residual Frobenius
/// norm drops to `epsilon` or `hard_cap` atoms have been selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    mode: StopMode,
    max_iters: usize,
    epsilon: f64,
    hard_cap: usize,
}

impl StoppingRule {
    pub fn fixed(max_iters: usize) -> Result<Self> {
        Self::new(StopMode::FixedIterations, max_iters, 0.0, usize::MAX)
    }

    pub fn residual(epsilon: f64, hard_cap: usize) -> Result<Self> {
        Self::new(StopMode::ResidualThreshold, hard_cap.max(1), epsilon, hard_cap)
    }

    pub fn new(mode: StopMode, max_iters: usize, epsilon: f64, hard_cap: usize) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::Config("stopping rule needs max_iters ≥ 1".into()));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::Config("stopping rule needs epsilon ≥ 0".into()));
        }
        if mode == StopMode::FixedIterations && hard_cap < max_iters {
            return Err(Error::Config(format!(
                "hard_cap {hard_cap} is below max_iters {max_iters}"
            )));
        }
        Ok(Self {
            mode,
            max_iters,
            epsilon,
            hard_cap,
        })
    }

    /// Replaces the safety bound, keeping it at least `max_iters` in fixed mode.
    pub fn with_hard_cap(mut self, hard_cap: usize) -> Self {
        self.hard_cap = match self.mode {
            StopMode::FixedIterations => hard_cap.max(self.max_iters),
            StopMode::ResidualThreshold => hard_cap,
        };
        self
    }

    pub fn mode(&self) -> StopMode {
        self.mode
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn hard_cap(&self) -> usize {
        self.hard_cap
    }

    fn limit(&self, atoms: usize) -> usize {
        let n = match self.mode {
            StopMode::FixedIterations => self.max_iters.min(self.hard_cap),
            StopMode::ResidualThreshold => self.hard_cap,
        };
        n.min(atoms)
    }

    fn done(&self, iterations: usize, limit: usize, residual_norm: f64) -> bool {
        iterations >= limit
            || (self.mode == StopMode::ResidualThreshold && residual_norm <= self.epsilon)
    }
}

/// Recovered support, either as flat indices `N·j + i` or as `(i, j)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Support {
    Flat(Vec<usize>),
    Pairs(Vec<(usize, usize)>),
}

/// Flat index of `(i, j)` on an `n`-point grid.
pub fn pair_to_flat((i, j): (usize, usize), n: usize) -> usize {
    n * j + i
}

pub fn flat_to_pair(k: usize, n: usize) -> (usize, usize) {
    (k % n, k / n)
}

impl Support {
    pub fn len(&self) -> usize {
        match self {
            Support::Flat(v) => v.len(),
            Support::Pairs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_pairs(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Support::Flat(v) => v.iter().map(|&k| flat_to_pair(k, n)).collect(),
            Support::Pairs(v) => v.clone(),
        }
    }

    pub fn to_flat(&self, n: usize) -> Vec<usize> {
        match self {
            Support::Flat(v) => v.clone(),
            Support::Pairs(v) => v.iter().map(|&p| pair_to_flat(p, n)).collect(),
        }
    }
}

/// State after one pursuit iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    /// LS weights over the support selected so far, in selection order.
    pub weights: Vec<C64>,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseEstimate {
    pub support: Support,
    pub weights: Vec<C64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub history: Vec<Iterate>,
}

/// Strict argmax with ties going to the lowest index. `None` when every entry is masked.
fn argmax_unmasked(scores: impl Iterator<Item = f64>, mask: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.enumerate() {
        if mask[k] {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((k, s)),
        }
    }
    best.map(|(k, _)| k)
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// OMP on `y ≈ sensing · z`.
pub fn omp_1d(y: &[C64], sensing: &CMatrix, stop: &StoppingRule) -> Result<SparseEstimate> {
    let (m, n_atoms) = sensing.shape();
    if m == 0 || n_atoms == 0 {
        return Err(Error::Dimension("empty sensing matrix".into()));
    }
    if y.len() != m {
        return Err(Error::Dimension(format!(
            "measurement of length {} for a sensing matrix with {m} rows",
            y.len()
        )));
    }
    let norms = sensing.column_norms();
    let limit = stop.limit(n_atoms);
    let mut selected = vec![false; n_atoms];
    let mut support: Vec<usize> = Vec::new();
    let mut gram = CMatrix::zeros(0, 0);
    let mut rhs: Vec<C64> = Vec::new();
    let mut weights: Vec<C64> = Vec::new();
    let mut residual = y.to_vec();
    let mut residual_norm = norm2(&residual);
    let mut history = Vec::new();

    while !stop.done(support.len(), limit, residual_norm) {
        let corr = sensing.adjoint_mul_vec(&residual)?;
        let k = argmax_unmasked(
            corr.iter().zip(&norms).map(|(c, &n)| safe_ratio(c.norm(), n)),
            &selected,
        )
        .ok_or(Error::Exhausted)?;
        selected[k] = true;
        support.push(k);

        // grow the Gram system by one row and column
        let p = support.len();
        let mut next = CMatrix::zeros(p, p);
        for c in 0..p - 1 {
            for r in 0..p - 1 {
                next[(r, c)] = gram[(r, c)];
            }
        }
        let new_col = sensing.col(k);
        for (r, &s) in support.iter().enumerate() {
            let v = dotc(sensing.col(s), new_col);
            next[(r, p - 1)] = v;
            next[(p - 1, r)] = v.conj();
        }
        gram = next;
        rhs.push(dotc(new_col, y));

        weights = hermitian_solve(&gram, &rhs)
            .map_err(|e| e.in_context(format!("omp_1d iteration {p}")))?;

        residual.copy_from_slice(y);
        for (&s, &w) in support.iter().zip(&weights) {
            for (r, a) in residual.iter_mut().zip(sensing.col(s)) {
                *r -= a * w;
            }
        }
        residual_norm = norm2(&residual);
        history.push(Iterate {
            weights: weights.clone(),
            residual_norm,
        });
    }

    Ok(SparseEstimate {
        iterations: support.len(),
        support: Support::Flat(support),
        weights,
        residual_norm,
        history,
    })
}

/// Least squares over the full 1-D sensing matrix, `(ÃᴴÃ)⁻¹Ãᴴy`.
pub fn ls_1d_direct(y: &[C64], sensing: &CMatrix) -> Result<Vec<C64>> {
    Ls1dSolver::new(sensing.clone())?.apply(y)
}

/// [`ls_1d_direct`] with the normal matrix factored once for a fixed sensing matrix.
#[derive(Debug, Clone)]
pub struct Ls1dSolver {
    sensing: CMatrix,
    normal: Cholesky,
}

impl Ls1dSolver {
    pub fn new(sensing: CMatrix) -> Result<Self> {
        let (m, n) = sensing.shape();
        if n > m {
            return Err(Error::Singular {
                context: format!("ls_1d_direct: {n} unknowns from {m} measurements"),
                condition: f64::INFINITY,
            });
        }
        let normal = Cholesky::new(&sensing.gram()).map_err(|e| e.in_context("ls_1d_direct"))?;
        Ok(Self { sensing, normal })
    }

    pub fn apply(&self, y: &[C64]) -> Result<Vec<C64>> {
        let m = self.sensing.rows();
        if y.len() != m {
            return Err(Error::Dimension(format!(
                "measurement of length {} for a sensing matrix with {m} rows",
                y.len()
            )));
        }
        self.normal.solve(&self.sensing.adjoint_mul_vec(y)?)
    }
}

fn factor_norms(f: Factors<'_>) -> (Vec<f64>, Vec<f64>) {
    (f.rx.column_norms(), f.tx.column_norms())
}

/// Correlation matrix `rxᴴ·Y_r·tx`, normalized by the atom norms.
fn projections_2d(y_r: &CMatrix, f: Factors<'_>, rx_norms: &[f64], tx_norms: &[f64]) -> Result<CMatrix> {
    let t = y_r.matmul(f.tx)?;
    let mut c = f.rx.adjoint_mul(&t)?;
    for j in 0..c.cols() {
        let tn = tx_norms[j];
        for (i, v) in c.col_mut(j).iter_mut().enumerate() {
            *v = C64::new(safe_ratio(v.norm(), rx_norms[i] * tn), 0.0);
        }
    }
    Ok(c)
}

fn match_masked(
    y_r: &CMatrix,
    f: Factors<'_>,
    rx_norms: &[f64],
    tx_norms: &[f64],
    mask: &[bool],
) -> Result<(usize, usize)> {
    let c = projections_2d(y_r, f, rx_norms, tx_norms)?;
    // column-major storage of c is exactly flat-index order N·j + i
    let k = argmax_unmasked(c.as_slice().iter().map(|v| v.re), mask).ok_or(Error::Exhausted)?;
    Ok(f.pair(k))
}

fn check_measurement_shape(y: &CMatrix, f: Factors<'_>) -> Result<()> {
    if y.rows() != f.rx.rows() || y.cols() != f.tx.rows() {
        return Err(Error::Dimension(format!(
            "measurement is {}x{}, atoms are {}x{}",
            y.rows(),
            y.cols(),
            f.rx.rows(),
            f.tx.rows()
        )));
    }
    Ok(())
}

/// Best 2-D atom for the residual `y_r`, skipping `excluded` pairs.
pub fn match_2d(
    y_r: &CMatrix,
    dict: &DictionaryPair,
    excluded: &BTreeSet<(usize, usize)>,
) -> Result<(usize, usize)> {
    let f = dict.effective();
    check_measurement_shape(y_r, f)?;
    let mut mask = vec![false; f.n_rx() * f.n_tx()];
    for &(i, j) in excluded {
        if i < f.n_rx() && j < f.n_tx() {
            mask[f.flat(i, j)] = true;
        }
    }
    let (rn, tn) = factor_norms(f);
    match_masked(y_r, f, &rn, &tn, &mask)
}

fn ls_2d_factors(y: &CMatrix, f: Factors<'_>, support: &[(usize, usize)]) -> Result<Vec<C64>> {
    if support.is_empty() {
        return Err(Error::Dimension("empty support".into()));
    }
    let mut seen = BTreeSet::new();
    for &(i, j) in support {
        if i >= f.n_rx() {
            return Err(Error::Index {
                index: i,
                bound: f.n_rx(),
            });
        }
        if j >= f.n_tx() {
            return Err(Error::Index {
                index: j,
                bound: f.n_tx(),
            });
        }
        if !seen.insert((i, j)) {
            return Err(Error::Dimension(format!("atom ({i}, {j}) appears twice")));
        }
    }
    let p = support.len();
    let g: Vec<C64> = support
        .iter()
        .map(|&(i, j)| {
            let t = y.mul_vec(f.tx.col(j))?;
            Ok(dotc(f.rx.col(i), &t))
        })
        .collect::<Result<_>>()?;
    let mut q = CMatrix::zeros(p, p);
    for (a, &(iq, jq)) in support.iter().enumerate() {
        for (b, &(ip, jp)) in support.iter().enumerate() {
            // ⟨A_p, A_q⟩ = ⟨t_jp, t_jq⟩·⟨r_iq, r_ip⟩
            q[(a, b)] = dotc(f.tx.col(jp), f.tx.col(jq)) * dotc(f.rx.col(iq), f.rx.col(ip));
        }
    }
    hermitian_solve(&q, &g)
}

/// Least-squares weights of `y` on the listed 2-D atoms.
pub fn ls_2d(y: &CMatrix, dict: &DictionaryPair, support: &[(usize, usize)]) -> Result<Vec<C64>> {
    let f = dict.effective();
    check_measurement_shape(y, f)?;
    ls_2d_factors(y, f, support)
}

/// `y − Σ w·rx_i·tx_jᴴ`.
fn residual_2d(
    y: &CMatrix,
    f: Factors<'_>,
    support: &[(usize, usize)],
    weights: &[C64],
) -> Result<CMatrix> {
    let mut r = y.clone();
    for (&(i, j), &w) in support.iter().zip(weights) {
        r.add_outer(-w, f.rx.col(i), f.tx.col(j))?;
    }
    Ok(r)
}

/// 2-D OMP over an arbitrary separable factor pair.
pub fn omp_2d_factors(y: &CMatrix, f: Factors<'_>, stop: &StoppingRule) -> Result<SparseEstimate> {
    check_measurement_shape(y, f)?;
    let n_atoms = f.n_rx() * f.n_tx();
    if n_atoms == 0 {
        return Err(Error::Dimension("empty dictionary".into()));
    }
    let (rn, tn) = factor_norms(f);
    let limit = stop.limit(n_atoms);
    let mut mask = vec![false; n_atoms];
    let mut support: Vec<(usize, usize)> = Vec::new();
    let mut weights = Vec::new();
    let mut residual = y.clone();
    let mut residual_norm = residual.frobenius_norm();
    let mut history = Vec::new();

    while !stop.done(support.len(), limit, residual_norm) {
        let (i, j) = match_masked(&residual, f, &rn, &tn, &mask)?;
        mask[f.flat(i, j)] = true;
        support.push((i, j));
        weights = ls_2d_factors(y, f, &support)
            .map_err(|e| e.in_context(format!("omp_2d iteration {}", support.len())))?;
        residual = residual_2d(y, f, &support, &weights)?;
        residual_norm = residual.frobenius_norm();
        history.push(Iterate {
            weights: weights.clone(),
            residual_norm,
        });
    }

    Ok(SparseEstimate {
        iterations: support.len(),
        support: Support::Pairs(support),
        weights,
        residual_norm,
        history,
    })
}

/// 2-D OMP on the effective dictionaries.
pub fn omp_2d(y: &CMatrix, dict: &DictionaryPair, stop: &StoppingRule) -> Result<SparseEstimate> {
    omp_2d_factors(y, dict.effective(), stop)
}

/// Closed-form separable LS `(Ã_RᴴÃ_R)⁻¹Ã_RᴴYÃ_T(Ã_TᴴÃ_T)⁻¹` over the full grid.
pub fn simplified_ls_2d(y: &CMatrix, dict: &DictionaryPair) -> Result<CMatrix> {
    check_measurement_shape(y, dict.effective())?;
    SimplifiedLs2d::new(dict)?.apply(y)
}

/// [`simplified_ls_2d`] with the two pseudo-inverse factors formed once per dictionary,
/// so each measurement costs two matrix products.
#[derive(Debug, Clone)]
pub struct SimplifiedLs2d {
    /// `(Ã_RᴴÃ_R)⁻¹Ã_Rᴴ`, `grid_n × n_y`.
    left: CMatrix,
    /// `Ã_T(Ã_TᴴÃ_T)⁻¹`, `n_x × grid_n`.
    right: CMatrix,
}

impl SimplifiedLs2d {
    pub fn new(dict: &DictionaryPair) -> Result<Self> {
        let f = dict.effective();
        let pinv = |name: &str, a: &CMatrix| -> Result<CMatrix> {
            if a.cols() > a.rows() {
                return Err(Error::Singular {
                    context: format!(
                        "simplified_ls_2d {name} factor has {} columns but {} rows",
                        a.cols(),
                        a.rows()
                    ),
                    condition: f64::INFINITY,
                });
            }
            let chol = Cholesky::new(&a.gram())
                .map_err(|e| e.in_context(format!("simplified_ls_2d {name} factor")))?;
            chol.solve_matrix(&a.adjoint())
        };
        let left = pinv("rx", f.rx)?;
        // right-multiplying by G_T⁻¹ is the adjoint of a left solve, G_T being Hermitian
        let right = pinv("tx", f.tx)?.adjoint();
        Ok(Self { left, right })
    }

    pub fn apply(&self, y: &CMatrix) -> Result<CMatrix> {
        if y.rows() != self.left.cols() || y.cols() != self.right.rows() {
            return Err(Error::Dimension(format!(
                "measurement is {}x{}, expected {}x{}",
                y.rows(),
                y.cols(),
                self.left.cols(),
                self.right.rows()
            )));
        }
        self.left.matmul(&y.matmul(&self.right)?)
    }
}

/// Row-selection statistic for SOMP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Sum of correlation moduli across measurement columns.
    #[default]
    L1,
    /// Euclidean norm of the correlations across measurement columns.
    L2,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::L1 => "l1",
            Aggregation::L2 => "l2",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Aggregation::L1),
            "l2" => Ok(Aggregation::L2),
            _ => Err(Error::Config(format!("unknown SOMP aggregation `{s}`"))),
        }
    }
}

/// First-stage output: selected AoA rows and their refit coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaStage {
    pub rows: Vec<usize>,
    /// `|rows| × n_x`; row `l` holds the coefficients of AoA `rows[l]`.
    pub coeff_matrix: CMatrix,
    pub residual_norm: f64,
    pub history: Vec<f64>,
}

/// SOMP for the row-group sparse problem `Y ≈ Ã_R·Z_T`.
pub fn somp_aoa_stage(
    y: &CMatrix,
    a_r_eff: &CMatrix,
    stop: &StoppingRule,
    aggregation: Aggregation,
) -> Result<AoaStage> {
    let (m, n) = a_r_eff.shape();
    if n == 0 || m == 0 {
        return Err(Error::Dimension("empty dictionary".into()));
    }
    if y.rows() != m {
        return Err(Error::Dimension(format!(
            "measurement has {} rows, dictionary has {m}",
            y.rows()
        )));
    }
    let norms = a_r_eff.column_norms();
    let limit = stop.limit(n);
    let mut mask = vec![false; n];
    let mut rows: Vec<usize> = Vec::new();
    let mut coeff = CMatrix::zeros(0, y.cols());
    let mut residual = y.clone();
    let mut residual_norm = residual.frobenius_norm();
    let mut history = Vec::new();

    while !stop.done(rows.len(), limit, residual_norm) {
        let corr = a_r_eff.adjoint_mul(&residual)?;
        let scores = (0..n).map(|i| {
            let agg = match aggregation {
                Aggregation::L1 => corr.row(i).iter().map(|c| c.norm()).sum::<f64>(),
                Aggregation::L2 => corr.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            };
            safe_ratio(agg, norms[i])
        });
        let i = argmax_unmasked(scores, &mask).ok_or(Error::Exhausted)?;
        mask[i] = true;
        rows.push(i);

        let a_s = a_r_eff.select_columns(&rows);
        let chol = Cholesky::new(&a_s.gram())
            .map_err(|e| e.in_context(format!("somp iteration {}", rows.len())))?;
        let z = chol.solve_matrix(&a_s.adjoint_mul(y)?)?;
        residual = y.sub(&a_s.matmul(&z)?)?;
        residual_norm = residual.frobenius_norm();
        history.push(residual_norm);
        coeff = z;
    }

    Ok(AoaStage {
        rows,
        coeff_matrix: coeff,
        residual_norm,
        history,
    })
}

/// Second stage: 1-D OMP of `vec(Z̃_T)` against `conj(Ã_T) ⊗ I_L`, returning
/// `(row, aod_index, gain)` triples. The Kronecker sensing matrix is never formed;
/// it is the separable pair `(I_L, Ã_T)`.
pub fn aod_stage(
    coeff_matrix: &CMatrix,
    a_t_eff: &CMatrix,
    stop: &StoppingRule,
) -> Result<(Vec<(usize, usize, C64)>, SparseEstimate)> {
    let l_sel = coeff_matrix.rows();
    if l_sel == 0 {
        return Err(Error::Dimension("no AoA rows to resolve".into()));
    }
    let eye = CMatrix::identity(l_sel);
    let f = Factors {
        rx: &eye,
        tx: a_t_eff,
    };
    let est = omp_2d_factors(coeff_matrix, f, stop)?;
    let triples = est
        .support
        .to_pairs(l_sel)
        .into_iter()
        .zip(&est.weights)
        .map(|((l, j), &w)| (l, j, w))
        .collect();
    Ok((triples, est))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageResult {
    pub aoa_rows: Vec<usize>,
    pub coeff_matrix: CMatrix,
    /// `(aoa_index, aod_index, gain)`.
    pub pairs: Vec<(usize, usize, C64)>,
    pub iterations: usize,
}

/// AoA rows by SOMP, then AoDs by 1-D OMP on the reduced coefficient matrix.
pub fn two_stage_somp(
    y: &CMatrix,
    dict: &DictionaryPair,
    aoa_stop: &StoppingRule,
    aod_stop: &StoppingRule,
    aggregation: Aggregation,
) -> Result<TwoStageResult> {
    let stage1 = somp_aoa_stage(y, &dict.a_r_eff, aoa_stop, aggregation)?;
    let (triples, est) = aod_stage(&stage1.coeff_matrix, &dict.a_t_eff, aod_stop)?;
    let pairs = triples
        .into_iter()
        .map(|(l, j, g)| (stage1.rows[l], j, g))
        .collect();
    Ok(TwoStageResult {
        iterations: stage1.rows.len() + est.iterations,
        aoa_rows: stage1.rows,
        coeff_matrix: stage1.coeff_matrix,
        pairs,
    })
}

/// Anything that names weighted grid atoms `(aoa_index, aod_index, weight)`.
pub trait GridEstimate {
    fn atoms(&self, grid_n: usize) -> Vec<(usize, usize, C64)>;
}

impl GridEstimate for SparseEstimate {
    fn atoms(&self, grid_n: usize) -> Vec<(usize, usize, C64)> {
        self.support
            .to_pairs(grid_n)
            .into_iter()
            .zip(&self.weights)
            .map(|((i, j), &w)| (i, j, w))
            .collect()
    }
}

impl GridEstimate for TwoStageResult {
    fn atoms(&self, _grid_n: usize) -> Vec<(usize, usize, C64)> {
        self.pairs.clone()
    }
}

/// A full `grid_n × grid_n` coefficient matrix, as returned by the LS baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCoefficients(pub CMatrix);

impl GridEstimate for DenseCoefficients {
    fn atoms(&self, _grid_n: usize) -> Vec<(usize, usize, C64)> {
        let z = &self.0;
        (0..z.cols())
            .flat_map(|j| (0..z.rows()).map(move |i| (i, j, z[(i, j)])))
            .filter(|&(_, _, w)| w != ZERO)
            .collect()
    }
}

/// `Ĥ = Σ w·ā_R,i·ā_T,jᴴ` with the full antenna-domain dictionaries.
pub fn reconstruct_channel(est: &impl GridEstimate, dict: &DictionaryPair) -> Result<CMatrix> {
    let n = dict.grid_n();
    let mut h = CMatrix::zeros(dict.a_r_full.rows(), dict.a_t_full.rows());
    for (i, j, w) in est.atoms(n) {
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::Index {
                    index: idx,
                    bound: n,
                });
            }
        }
        h.add_outer(w, dict.a_r_full.col(i), dict.a_t_full.col(j))?;
    }
    Ok(h)
}
