//! Dense complex matrices and the structured identities shared by the estimators.
//!
//! Storage is column-major, so `vec` is a reshape of the backing buffer and
//! `devec` is its exact inverse. Kronecker and Khatri-Rao products follow the
//! usual conventions: `(A ⊗ B)[i·p + k, j·q + l] = A[i, j]·B[k, l]` (0-based).

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Max |Q - Qᴴ| accepted by [`hermitian_solve`], relative to max(1, max |Q|).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Condition estimate above which a Hermitian system is reported singular.
pub const CONDITION_CUTOFF: f64 = 1e12;

/// Conjugated dot product `Σ conj(a_k)·b_k`.
#[inline]
pub fn dotc(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

/// Euclidean norm of a complex slice.
pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense complex matrix in column-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl CMatrix {
    /// Wraps a column-major buffer.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices; handy for literals in tests.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
    }

    /// Column vector holding `v`.
    pub fn column(v: Vec<C64>) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v,
        }
    }

    /// Matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[&[C64]]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let data = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Ok(Self {
            rows,
            cols: columns.len(),
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    /// Sub-matrix made of the first `rows` rows.
    pub fn top_rows(&self, rows: usize) -> Self {
        let rows = rows.min(self.rows);
        Self::from_fn(rows, self.cols, |i, j| self[(i, j)])
    }

    /// Sub-matrix made of the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            data.extend_from_slice(self.col(j));
        }
        Self {
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { data, ..*self })
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: C64, other: &Self) -> Result<()> {
        self.check_same_shape(other, "axpy")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        Ok(())
    }

    /// `self += s·u·vᴴ`.
    pub fn add_outer(&mut self, s: C64, u: &[C64], v: &[C64]) -> Result<()> {
        if u.len() != self.rows || v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "outer product {}x{} into {}x{}",
                u.len(),
                v.len(),
                self.rows,
                self.cols
            )));
        }
        for (j, vj) in v.iter().enumerate() {
            let c = s * vj.conj();
            for (dst, ui) in self.col_mut(j).iter_mut().zip(u) {
                *dst += c * ui;
            }
        }
        Ok(())
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == ZERO {
                    continue;
                }
                for (d, a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · other` without forming the adjoint; every entry is a contiguous column dot.
    pub fn adjoint_mul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "adjoint_mul ({}x{})ᴴ · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.cols, other.cols, |i, j| {
            dotc(self.col(i), other.col(j))
        }))
    }

    /// `selfᴴ · v` for a plain vector.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.rows != v.len() {
            return Err(Error::Dimension(format!(
                "adjoint_mul_vec ({}x{})ᴴ · {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.cols).map(|j| dotc(self.col(j), v)).collect())
    }

    /// `self · v` for a plain vector.
    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "mul_vec {}x{} · {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![ZERO; self.rows];
        for (k, &b) in v.iter().enumerate() {
            for (d, a) in out.iter_mut().zip(self.col(k)) {
                *d += a * b;
            }
        }
        Ok(out)
    }

    /// Gram matrix `selfᴴ·self`, computed on one triangle and mirrored.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = dotc(self.col(i), self.col(j));
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    /// Euclidean norm of every column.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| norm2(self.col(j))).collect()
    }

    /// Stacks the columns into one column vector. Zero-copy.
    pub fn vec(self) -> Self {
        Self {
            rows: self.data.len(),
            cols: 1,
            data: self.data,
        }
    }

    /// Largest |Q[i,j] − conj(Q[j,i])|.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for j in 0..self.cols.min(self.rows) {
            for i in 0..=j {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

/// Standard Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    let mut out = CMatrix::zeros(m * p, n * q);
    for j in 0..n {
        for l in 0..q {
            let dst = out.col_mut(j * q + l);
            let bcol = b.col(l);
            for i in 0..m {
                let s = a[(i, j)];
                for (d, bv) in dst[i * p..(i + 1) * p].iter_mut().zip(bcol) {
                    *d = s * bv;
                }
            }
        }
    }
    out
}

/// Kronecker product of two plain vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Column-wise Kronecker product; column `l` is `kron(A[:, l], B[:, l])`.
pub fn khatri_rao(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "khatri_rao needs equal column counts, got {} and {}",
            a.cols(),
            b.cols()
        )));
    }
    let mut data = Vec::with_capacity(a.rows() * b.rows() * a.cols());
    for l in 0..a.cols() {
        data.extend(kron_vec(a.col(l), b.col(l)));
    }
    CMatrix::from_col_major(a.rows() * b.rows(), a.cols(), data)
}

/// Inverse of [`CMatrix::vec`].
pub fn devec(v: CMatrix, rows: usize, cols: usize) -> Result<CMatrix> {
    CMatrix::from_col_major(rows, cols, v.into_vec())
}

/// Trace inner product `tr(X·Aᴴ) = Σ X[i,j]·conj(A[i,j])`.
pub fn mat_inner(x: &CMatrix, a: &CMatrix) -> Result<C64> {
    if x.shape() != a.shape() {
        return Err(Error::Dimension(format!(
            "mat_inner {}x{} vs {}x{}",
            x.rows(),
            x.cols(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(dotc(a.as_slice(), x.as_slice()))
}

/// `uᴴ·X·v`, the trace inner product of `X` with the rank-one matrix `u·vᴴ`.
pub fn bilinear(u: &[C64], x: &CMatrix, v: &[C64]) -> Result<C64> {
    let xv = x.mul_vec(v)?;
    if u.len() != xv.len() {
        return Err(Error::Dimension(format!(
            "bilinear: {} vs {}",
            u.len(),
            xv.len()
        )));
    }
    Ok(dotc(u, &xv))
}

/// Cholesky factor `L` of a Hermitian positive-definite matrix, `Q = L·Lᴴ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
    condition: f64,
}

impl Cholesky {
    /// Factors `q` after checking it is Hermitian and symmetrising it.
    pub fn new(q: &CMatrix) -> Result<Self> {
        let n = q.rows();
        if q.cols() != n {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        let scale = q.max_abs().max(1.0);
        let deviation = q.hermitian_deviation();
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let singular = |condition| Error::Singular {
            context: "hermitian solve".into(),
            condition,
        };

        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = q[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(singular(f64::INFINITY));
            }
            let djj = d.sqrt();
            l[(j, j)] = C64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = 0.5 * (q[(i, j)] + q[(j, i)].conj());
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }

        let diag: Vec<f64> = (0..n).map(|i| l[(i, i)].re).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        let condition = if n == 0 { 1.0 } else { (max / min).powi(2) };
        if condition > CONDITION_CUTOFF {
            return Err(singular(condition));
        }
        Ok(Self { l, condition })
    }

    /// Lower bound on the 2-norm condition number, from the factor's diagonal.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `Q·z = g` in place.
    pub fn solve_in_place(&self, g: &mut [C64]) -> Result<()> {
        let n = self.dim();
        if g.len() != n {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for a {n}x{n} system",
                g.len()
            )));
        }
        let l = &self.l;
        for i in 0..n {
            let mut s = g[i];
            for k in 0..i {
                s -= l[(i, k)] * g[k];
            }
            g[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = g[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * g[k];
            }
            g[i] = s / l[(i, i)].re;
        }
        Ok(())
    }

    pub fn solve(&self, g: &[C64]) -> Result<Vec<C64>> {
        let mut z = g.to_vec();
        self.solve_in_place(&mut z)?;
        Ok(z)
    }

    /// Solves `Q·Z = G` column by column.
    pub fn solve_matrix(&self, g: &CMatrix) -> Result<CMatrix> {
        let mut z = g.clone();
        for j in 0..z.cols() {
            self.solve_in_place(z.col_mut(j))?;
        }
        Ok(z)
    }
}

/// Solves the Hermitian positive-definite system `Q·z = g`.
pub fn hermitian_solve(q: &CMatrix, g: &[C64]) -> Result<Vec<C64>> {
    Cholesky::new(q)?.solve(g)
}
