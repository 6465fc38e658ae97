//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here works on [`ComplexMatrix`], a plain row-major matrix of
//! `Complex64`. Sizes are desk scale (a few dozen rows at most), so the
//! algorithms favour accuracy and determinism over asymptotic speed: the
//! eigensolver is cyclic Jacobi with a fixed sweep order, and inverses go
//! through Cholesky.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Tolerance applied to `m - m†` when the caller asks for a strict check.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Negative eigenvalues down to `-NEGATIVE_CLAMP * ||m||` are treated as
/// round-off and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-6;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max |m - m^H| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },
    #[error("columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("vectors have zero dimension")]
    EmptyDimension,
    #[error("vectors do not share one dimension")]
    RaggedVectors,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Cutoffs deciding when an eigenvalue or singular value counts as zero:
/// `x <= max(abs, rel * x_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-9,
        }
    }
}

impl Cutoffs {
    pub fn threshold(&self, largest: f64) -> f64 {
        self.abs.max(self.rel * largest.abs())
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, data }
    }

    /// Real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows*cols");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    /// Stacks vectors of length `dim` as columns.
    pub fn from_columns(dim: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Self::zeros(dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length must equal dim");
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "hcat needs equal row counts");
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            if i == j {
                C64::new(self[(i, i)].re, 0.0)
            } else {
                (self[(i, j)] + self[(j, i)].conj()) * 0.5
            }
        })
    }

    /// Real part of `Tr(self · other)`, the Hilbert–Schmidt pairing for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral decomposition `m = V diag(values) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V f(Λ) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in mapped.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Indices of eigenvalues above the rank cutoff.
    pub fn above_cutoff(&self, cutoffs: Cutoffs) -> Vec<usize> {
        let thr = cutoffs.threshold(self.max_abs_value());
        (0..self.values.len())
            .filter(|&k| self.values[k] > thr)
            .collect()
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// With `hermitize` off the input must satisfy `||m - m†||_max <= 1e-9`;
/// either way the solver works on `(m + m†)/2`.
pub fn hermitian_eig(m: &ComplexMatrix, hermitize: bool) -> Result<HermitianEigen, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if !hermitize {
        let residual = m.hermitian_residual();
        if !(residual <= HERMITIAN_TOL) {
            return Err(LinalgError::NotHermitian { residual });
        }
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-18 * scale || r == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.select_columns(&order);
    Ok(HermitianEigen { values, vectors })
}

/// Orthonormalizes `vectors` by modified Gram–Schmidt with one
/// re-orthogonalization pass. Vectors whose residual norm is `<= tol` are
/// dropped.
pub fn gram_schmidt(vectors: &[Vec<C64>], tol: f64) -> Result<Vec<Vec<C64>>, LinalgError> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let dim = first.len();
    if dim == 0 {
        return Err(LinalgError::EmptyDimension);
    }
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(LinalgError::RaggedVectors);
    }
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _pass in 0..2 {
            for q in &out {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let nrm = norm(&w);
        if nrm > tol {
            out.push(w.into_iter().map(|z| z / nrm).collect());
        }
    }
    Ok(out)
}

/// Max entry of `|Q†Q - I|`.
pub fn orthonormality_residual(q: &ComplexMatrix) -> f64 {
    let g = &q.adjoint() * q;
    (&g - &ComplexMatrix::identity(q.cols)).max_abs()
}

/// Extends orthonormal columns to a square unitary whose leading columns
/// are the input. New columns come from the standard basis, greedily taking
/// the candidate with the largest residual after projection.
pub fn complete_to_unitary(cols: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = cols.rows;
    let k = cols.cols;
    if k > n {
        return Err(LinalgError::NotOrthonormal {
            residual: f64::INFINITY,
        });
    }
    let residual = orthonormality_residual(cols);
    if !(residual <= 1e-9) {
        return Err(LinalgError::NotOrthonormal { residual });
    }
    let mut basis = cols.columns();
    while basis.len() < n {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..n {
            let mut w = vec![C64::new(0.0, 0.0); n];
            w[e] = C64::new(1.0, 0.0);
            for _pass in 0..2 {
                for q in &basis {
                    let c = inner(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let nrm = norm(&w);
            if best.as_ref().is_none_or(|(b, _)| nrm > *b + 1e-12) {
                best = Some((nrm, w));
            }
        }
        let (nrm, w) = best.expect("n > 0 when columns are missing");
        basis.push(w.into_iter().map(|z| z / nrm).collect());
    }
    Ok(ComplexMatrix::from_columns(n, &basis))
}

fn check_psd_spectrum(eig: &HermitianEigen) -> Result<(), LinalgError> {
    let scale = eig.max_abs_value();
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -NEGATIVE_CLAMP * scale.max(f64::MIN_POSITIVE) && min < -1e-300 {
        return Err(LinalgError::NotPsd { min_eig: min });
    }
    Ok(())
}

/// Principal square root of a PSD matrix; eigenvalues slightly below zero
/// are clamped.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eig(m, false)?;
    check_psd_spectrum(&eig)?;
    Ok(eig.map_values(|x| x.max(0.0).sqrt()))
}

/// `F` with `F F† = m`, keeping only eigen-directions above the cutoff:
/// columns are `sqrt(λ_k) v_k`.
pub fn psd_factor(m: &ComplexMatrix, cutoffs: Cutoffs) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eig(m, false)?;
    check_psd_spectrum(&eig)?;
    let keep = eig.above_cutoff(cutoffs);
    let mut f = eig.vectors.select_columns(&keep);
    for (j, &k) in keep.iter().enumerate() {
        let s = eig.values[k].sqrt();
        for i in 0..f.rows {
            f[(i, j)] *= s;
        }
    }
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<C64>,
    /// `||a x - b||`.
    pub residual: f64,
}

/// Minimum-norm least-squares solution of `a x = b` through the spectral
/// pseudo-inverse; singular values `<= tol` count as zero.
pub fn least_squares_solve(
    a: &ComplexMatrix,
    b: &[C64],
    tol: f64,
) -> Result<LeastSquares, LinalgError> {
    if a.rows != b.len() {
        return Err(LinalgError::DimensionMismatch {
            left: a.shape(),
            right: (b.len(), 1),
        });
    }
    if a.rows == 0 || a.cols == 0 {
        return Err(LinalgError::EmptyDimension);
    }
    let gram = &a.adjoint() * a;
    let eig = hermitian_eig(&gram, true)?;
    let mut x = vec![C64::new(0.0, 0.0); a.cols];
    for k in 0..a.cols {
        let v = eig.vectors.column(k);
        let av = a.matvec(&v);
        // ||a v|| is the singular value, computed without squaring.
        let sigma = norm(&av);
        if sigma <= tol {
            continue;
        }
        let coeff = inner(&av, b) / (sigma * sigma);
        for (xi, vi) in x.iter_mut().zip(&v) {
            *xi += coeff * vi;
        }
    }
    let ax = a.matvec(&x);
    let residual = norm(
        &ax.iter()
            .zip(b)
            .map(|(p, q)| p - q)
            .collect::<Vec<_>>(),
    );
    Ok(LeastSquares {
        solution: x,
        residual,
    })
}

/// Smallest eigenvalue of a Hermitian matrix. A 0x0 matrix has none and
/// yields `+inf`.
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64, LinalgError> {
    let eig = hermitian_eig(h, false)?;
    Ok(eig.values.first().copied().unwrap_or(f64::INFINITY))
}

/// Fidelity `Tr sqrt(sqrt(b) a sqrt(b))` of two PSD operators, possibly
/// subnormalized.
///
/// Evaluated as the trace norm of `F_b† F_a` for PSD factors `F_a F_a† = a`,
/// which has the same nonzero spectrum and avoids taking square roots of
/// round-off noise.
pub fn fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, LinalgError> {
    a.check_same_shape(b)?;
    let fa = psd_factor(a, Cutoffs::default())?;
    let fb = psd_factor(b, Cutoffs::default())?;
    if fa.cols == 0 || fb.cols == 0 {
        return Ok(0.0);
    }
    trace_norm(&(&fb.adjoint() * &fa))
}

/// Sum of the singular values of `m`.
///
/// Read off the spectrum `±σ_k` of the Hermitian dilation
/// `[[0, m], [m†, 0]]`, which keeps small singular values at absolute
/// accuracy instead of taking square roots of `m m†`.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    let (r, c) = m.shape();
    let mut dil = ComplexMatrix::zeros(r + c, r + c);
    dil.set_submatrix(0, r, m);
    dil.set_submatrix(r, 0, &m.adjoint());
    let eig = hermitian_eig(&dil, false)?;
    Ok(0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix,
/// or `None` if a pivot is not strictly positive.
pub fn cholesky(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows;
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// `log det m` for Hermitian positive definite `m`.
pub fn log_det_hpd(m: &ComplexMatrix) -> Option<f64> {
    let l = cholesky(m)?;
    Some((0..l.rows).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub fn inverse_hpd(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let l = cholesky(m)?;
    let n = l.rows;
    // L^{-1} by forward substitution, then (L^{-1})† L^{-1}.
    let mut linv = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    let inv = &linv.adjoint() * &linv;
    Some(inv.hermitian_part())
}

/// Solves the normal equations `(jᵀ j) x = g` for a real `rows x cols`
/// matrix `j` (row-major) of full column rank, without forming `jᵀ j`.
///
/// Householder QR gives `j = Q R`; then `Rᵀ z = g` and `R x = z`. Returns
/// `(x, |z|²)`, where `|z|² = gᵀ x`, or `None` on a zero pivot.
pub fn real_normal_solve(
    j: &[f64],
    rows: usize,
    cols: usize,
    g: &[f64],
) -> Option<(Vec<f64>, f64)> {
    if rows < cols || j.len() != rows * cols || g.len() != cols {
        return None;
    }
    let mut a = j.to_vec();
    let mut v = vec![0.0; rows];
    for k in 0..cols {
        let norm = (k..rows).map(|i| a[i * cols + k].powi(2)).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return None;
        }
        let akk = a[k * cols + k];
        let alpha = if akk >= 0.0 { -norm } else { norm };
        for i in k..rows {
            v[i] = a[i * cols + k];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..rows).map(|i| v[i] * v[i]).sum();
        if vnorm2 > 0.0 {
            for c in (k + 1)..cols {
                let dot: f64 = (k..rows).map(|i| v[i] * a[i * cols + c]).sum();
                let f = 2.0 * dot / vnorm2;
                for i in k..rows {
                    a[i * cols + c] -= f * v[i];
                }
            }
        }
        a[k * cols + k] = alpha;
    }
    let r = |i: usize, c: usize| a[i * cols + c];
    let mut z = g.to_vec();
    for i in 0..cols {
        for k in 0..i {
            z[i] -= r(k, i) * z[k];
        }
        z[i] /= r(i, i);
    }
    let dec = z.iter().map(|x| x * x).sum();
    let mut x = z;
    for i in (0..cols).rev() {
        for k in (i + 1)..cols {
            x[i] -= r(i, k) * x[k];
        }
        x[i] /= r(i, i);
    }
    Some((x, dec))
}
