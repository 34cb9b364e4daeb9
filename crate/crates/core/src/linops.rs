//! Dense linear-algebra kernels.
//!
//! Vectors are plain `f64` slices; [`Matrix`] is a row-major dense matrix.
//! Everything here is sized for desk-scale problems (a few thousand
//! unknowns), so there is no blocking or BLAS dispatch. All routines are
//! deterministic: the same inputs give bit-identical outputs.

use thiserror::Error;

/// Errors raised by the linear-algebra kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is numerically rank deficient (|R[{index}][{index}]| = {value:e})")]
    RankDeficient { index: usize, value: f64 },
    #[error("thin QR needs rows >= cols, got {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },
}

fn check_len(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// Euclidean inner product.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64, LinalgError> {
    check_len(u.len(), v.len())?;
    Ok(dot_unchecked(u, v))
}

#[inline]
pub(crate) fn dot_unchecked(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    dot_unchecked(v, v).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
    check_len(y.len(), x.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

/// `u - v`.
pub fn sub(u: &[f64], v: &[f64]) -> Result<Vec<f64>, LinalgError> {
    check_len(u.len(), v.len())?;
    Ok(u.iter().zip(v).map(|(a, b)| a - b).collect())
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a `rows x cols` matrix from row-major storage.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(cols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Row-major entries; this is also the `vec` layout used for matrix
    /// variables throughout the crate.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.cols, v.len())?;
        Ok((0..self.rows)
            .map(|i| dot_unchecked(self.row(i), v))
            .collect())
    }

    /// `Aᵀ v`.
    pub fn matvec_t(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        check_len(self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    /// `A B`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        check_len(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, a) in self.row(i).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `Aᵀ B` without forming the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        check_len(self.rows, other.rows)?;
        let mut out = Matrix::zeros(self.cols, other.cols);
        for l in 0..self.rows {
            let arow = self.row(l);
            let brow = other.row(l);
            for (i, a) in arow.iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        check_len(self.rows, other.rows)?;
        check_len(self.cols, other.cols)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Frobenius norm, `sqrt(sum a_ij^2)`.
pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.frobenius_norm()
}

/// Householder vectors and the upper-triangular factor of a tall matrix.
///
/// `work` is overwritten: on return its lower trapezoid holds the
/// Householder vectors (unit leading entry implied) and `betas[j]` the
/// reflector scales; `diag` holds the diagonal of R before sign fixing.
struct Householder {
    work: Matrix,
    betas: Vec<f64>,
    diag: Vec<f64>,
}

fn householder(a: &Matrix) -> Householder {
    let (r, c) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut betas = vec![0.0; c];
    let mut diag = vec![0.0; c];
    for j in 0..c.min(r) {
        let mut sigma = 0.0;
        for i in (j + 1)..r {
            sigma += w.get(i, j) * w.get(i, j);
        }
        let x0 = w.get(j, j);
        if sigma == 0.0 {
            // Column already reduced; the reflector is the identity.
            betas[j] = 0.0;
            diag[j] = x0;
            continue;
        }
        let norm = (x0 * x0 + sigma).sqrt();
        // v0 = x0 - alpha with alpha = -sign(x0) * norm, computed without cancellation.
        let alpha = if x0 <= 0.0 { norm } else { -norm };
        let v0 = x0 - alpha;
        for i in (j + 1)..r {
            let v = w.get(i, j) / v0;
            w.set(i, j, v);
        }
        let vnorm2 = 1.0 + sigma / (v0 * v0);
        let beta = 2.0 / vnorm2;
        betas[j] = beta;
        diag[j] = alpha;
        w.set(j, j, alpha);
        // Apply (I - beta v vᵀ) to the trailing columns.
        for k in (j + 1)..c {
            let mut s = w.get(j, k);
            for i in (j + 1)..r {
                s += w.get(i, j) * w.get(i, k);
            }
            s *= beta;
            let wjk = w.get(j, k) - s;
            w.set(j, k, wjk);
            for i in (j + 1)..r {
                let v = w.get(i, k) - s * w.get(i, j);
                w.set(i, k, v);
            }
        }
    }
    Householder {
        work: w,
        betas,
        diag,
    }
}

fn upper_triangle(h: &Householder, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if j >= i { h.work.get(i, j) } else { 0.0 })
}

/// Thin QR factorization `A = Q R` of a tall matrix by Householder
/// reflections.
///
/// `Q` is `r x c` with orthonormal columns and `R` is `c x c` upper
/// triangular with a nonnegative diagonal, which makes the factorization
/// unique for full-rank input.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix), LinalgError> {
    let (r, c) = (a.rows, a.cols);
    if r < c {
        return Err(LinalgError::WideMatrix { rows: r, cols: c });
    }
    let h = householder(a);
    let tol = 1e-12 * a.frobenius_norm();
    for (j, d) in h.diag.iter().enumerate() {
        if !(d.abs() >= tol) || *d == 0.0 {
            return Err(LinalgError::RankDeficient {
                index: j,
                value: d.abs(),
            });
        }
    }

    // Accumulate Q = H_0 H_1 ... H_{c-1} applied to the first c columns of I.
    let mut q = Matrix::zeros(r, c);
    for j in 0..c {
        q.set(j, j, 1.0);
    }
    for j in (0..c).rev() {
        let beta = h.betas[j];
        if beta == 0.0 {
            continue;
        }
        for k in j..c {
            let mut s = q.get(j, k);
            for i in (j + 1)..r {
                s += h.work.get(i, j) * q.get(i, k);
            }
            s *= beta;
            let qjk = q.get(j, k) - s;
            q.set(j, k, qjk);
            for i in (j + 1)..r {
                let v = q.get(i, k) - s * h.work.get(i, j);
                q.set(i, k, v);
            }
        }
    }

    let mut rmat = upper_triangle(&h, c);
    for j in 0..c {
        if rmat.get(j, j) < 0.0 {
            for k in j..c {
                let v = -rmat.get(j, k);
                rmat.set(j, k, v);
            }
            for i in 0..r {
                let v = -q.get(i, j);
                q.set(i, j, v);
            }
        }
    }
    Ok((q, rmat))
}

/// All singular values in descending order.
///
/// The matrix is oriented tall, reduced to its triangular factor by
/// Householder QR, and the factor is diagonalized with one-sided (Hestenes)
/// Jacobi rotations. Working on the triangular factor rather than the Gram
/// matrix keeps small singular values accurate relative to their size.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let tall = if a.rows >= a.cols {
        a.clone()
    } else {
        a.transpose()
    };
    let n = tall.cols;
    let h = householder(&tall);
    // Columns of U = Rᵀ would work equally; rotate the columns of R.
    let mut u = upper_triangle(&h, n);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..n {
                    let up = u.get(i, p);
                    let uq = u.get(i, q);
                    u.set(i, p, cs * up - sn * uq);
                    u.set(i, q, sn * up + cs * uq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| u.get(i, j) * u.get(i, j))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value; zero for an empty matrix.
pub fn min_singular_value(a: &Matrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Largest singular value (spectral norm); zero for an empty matrix.
pub fn max_singular_value(a: &Matrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}
