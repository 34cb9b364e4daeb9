//! Finite-sum objectives and equality-constraint maps.
//!
//! A [`FiniteSum`] exposes `f(x) = (1/n) Σ f_i(x)` through per-sample
//! values and gradients; the full value and gradient are sample means. A
//! [`ConstraintMap`] exposes `c(x) ∈ R^m` and its Jacobian `J(x) ∈ R^{m×d}`,
//! with Jacobian-vector products that concrete maps may specialize to avoid
//! materializing `J`.
//!
//! Matrix-valued variables `W ∈ R^{d×k}` are vectorized row-major, i.e. the
//! same layout as [`Matrix::as_slice`].

use thiserror::Error;

use crate::linops::{dot_unchecked, thin_qr, LinalgError, Matrix};
use crate::rng::{Stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("sample index {index} out of range for {n} samples")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Oracle for `f(x) = (1/n) Σ_i f_i(x)`.
///
/// Sample indices are zero-based; callers guarantee `i < num_samples()`.
pub trait FiniteSum {
    fn num_samples(&self) -> usize;

    fn dim(&self) -> usize;

    fn sample_value(&self, i: usize, x: &[f64]) -> f64;

    /// `out += weight * ∇f_i(x)`.
    fn accumulate_sample_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]);

    fn sample_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.accumulate_sample_gradient(i, x, 1.0, &mut g);
        g
    }

    /// Mean of `f_i` over `batch` (repeats allowed).
    fn batch_value(&self, batch: &[usize], x: &[f64]) -> f64 {
        if let [i] = batch {
            return self.sample_value(*i, x);
        }
        let sum: f64 = batch.iter().map(|&i| self.sample_value(i, x)).sum();
        sum / batch.len() as f64
    }

    /// Mean of `∇f_i` over `batch` (repeats allowed).
    fn batch_gradient(&self, batch: &[usize], x: &[f64]) -> Vec<f64> {
        if let [i] = batch {
            return self.sample_gradient(*i, x);
        }
        let mut g = vec![0.0; self.dim()];
        for &i in batch {
            self.accumulate_sample_gradient(i, x, 1.0, &mut g);
        }
        let inv = 1.0 / batch.len() as f64;
        g.iter_mut().for_each(|v| *v *= inv);
        g
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.num_samples();
        let sum: f64 = (0..n).map(|i| self.sample_value(i, x)).sum();
        sum / n as f64
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.num_samples();
        let mut g = vec![0.0; self.dim()];
        for i in 0..n {
            self.accumulate_sample_gradient(i, x, 1.0, &mut g);
        }
        let inv = 1.0 / n as f64;
        g.iter_mut().for_each(|v| *v *= inv);
        g
    }
}

impl<T: FiniteSum + ?Sized> FiniteSum for &T {
    fn num_samples(&self) -> usize {
        (**self).num_samples()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        (**self).sample_value(i, x)
    }
    fn accumulate_sample_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        (**self).accumulate_sample_gradient(i, x, weight, out)
    }
    fn sample_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        (**self).sample_gradient(i, x)
    }
    fn batch_value(&self, batch: &[usize], x: &[f64]) -> f64 {
        (**self).batch_value(batch, x)
    }
    fn batch_gradient(&self, batch: &[usize], x: &[f64]) -> Vec<f64> {
        (**self).batch_gradient(batch, x)
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (**self).gradient(x)
    }
}

/// Equality constraints `c(x) = 0`.
pub trait ConstraintMap {
    fn num_constraints(&self) -> usize;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Vec<f64>;

    /// Dense Jacobian, `m x d`.
    fn jacobian(&self, x: &[f64]) -> Matrix;

    /// `J(x) v`.
    fn jvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        self.jacobian(x).matvec(v).expect("jvp dimension")
    }

    /// `J(x)ᵀ u`.
    fn vjp(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.jacobian(x).matvec_t(u).expect("vjp dimension")
    }
}

impl<T: ConstraintMap + ?Sized> ConstraintMap for &T {
    fn num_constraints(&self) -> usize {
        (**self).num_constraints()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Vec<f64> {
        (**self).value(x)
    }
    fn jacobian(&self, x: &[f64]) -> Matrix {
        (**self).jacobian(x)
    }
    fn jvp(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        (**self).jvp(x, v)
    }
    fn vjp(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        (**self).vjp(x, u)
    }
}

/// Least squares `f_i(x) = ½ (a_iᵀ x − b_i)²`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    design: Matrix,
    targets: Vec<f64>,
    solution: Option<Vec<f64>>,
}

impl LeastSquares {
    pub fn new(design: Matrix, targets: Vec<f64>) -> Result<Self, ProblemError> {
        if design.rows() != targets.len() || design.rows() == 0 {
            return Err(ProblemError::InvalidDimensions(format!(
                "design has {} rows but {} targets",
                design.rows(),
                targets.len()
            )));
        }
        Ok(Self {
            design,
            targets,
            solution: None,
        })
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// The interpolating point the problem was generated from, if any.
    pub fn solution(&self) -> Option<&[f64]> {
        self.solution.as_deref()
    }

    /// Per-sample smoothness constants `L_i = ‖a_i‖²` (exact for this family).
    pub fn sample_smoothness(&self) -> Vec<f64> {
        (0..self.design.rows())
            .map(|i| dot_unchecked(self.design.row(i), self.design.row(i)))
            .collect()
    }

    fn residual(&self, i: usize, x: &[f64]) -> f64 {
        dot_unchecked(self.design.row(i), x) - self.targets[i]
    }
}

impl FiniteSum for LeastSquares {
    fn num_samples(&self) -> usize {
        self.design.rows()
    }

    fn dim(&self) -> usize {
        self.design.cols()
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.residual(i, x);
        0.5 * r * r
    }

    fn accumulate_sample_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let s = weight * self.residual(i, x);
        for (o, a) in out.iter_mut().zip(self.design.row(i)) {
            *o += s * a;
        }
    }
}

/// Over-parameterized least squares that interpolates its data.
///
/// Rows `a_i` are standard normal and `b = A x*` for a standard-normal `x*`,
/// so every `f_i` vanishes together with its gradient at `x*`. Requires
/// `d > n`.
pub fn make_interpolating_least_squares(
    n: usize,
    d: usize,
    seed: u64,
) -> Result<LeastSquares, ProblemError> {
    if n == 0 || d <= n {
        return Err(ProblemError::InvalidDimensions(format!(
            "interpolating least squares needs d > n >= 1, got n={n}, d={d}"
        )));
    }
    let mut rng = StreamRng::new(seed, Stream::Data);
    let design = Matrix::from_fn(n, d, |_, _| rng.normal());
    let x_star = rng.normal_vec(d);
    let targets = design.matvec(&x_star)?;
    Ok(LeastSquares {
        design,
        targets,
        solution: Some(x_star),
    })
}

/// Separable quadratics `f_i(x) = ½ Σ_j w_ij (x_j − c_ij)²`.
///
/// Small closed-form test objectives: `½‖x‖²` is one sample with unit
/// weights and zero center.
#[derive(Debug, Clone)]
pub struct SeparableQuadratic {
    weights: Matrix,
    centers: Matrix,
}

impl SeparableQuadratic {
    pub fn new(weights: Matrix, centers: Matrix) -> Result<Self, ProblemError> {
        if weights.rows() != centers.rows()
            || weights.cols() != centers.cols()
            || weights.rows() == 0
        {
            return Err(ProblemError::InvalidDimensions(
                "weights and centers must share a nonempty shape".into(),
            ));
        }
        Ok(Self { weights, centers })
    }

    /// `½‖x‖²` in `dim` variables, as a single sample.
    pub fn half_squared_norm(dim: usize) -> Self {
        Self {
            weights: Matrix::from_fn(1, dim, |_, _| 1.0),
            centers: Matrix::zeros(1, dim),
        }
    }

    /// Per-sample smoothness constants `max_j w_ij`.
    pub fn sample_smoothness(&self) -> Vec<f64> {
        (0..self.weights.rows())
            .map(|i| {
                self.weights
                    .row(i)
                    .iter()
                    .fold(0.0_f64, |m, w| m.max(w.abs()))
            })
            .collect()
    }
}

impl FiniteSum for SeparableQuadratic {
    fn num_samples(&self) -> usize {
        self.weights.rows()
    }

    fn dim(&self) -> usize {
        self.weights.cols()
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        let w = self.weights.row(i);
        let c = self.centers.row(i);
        0.5 * x
            .iter()
            .zip(w)
            .zip(c)
            .map(|((xj, wj), cj)| wj * (xj - cj) * (xj - cj))
            .sum::<f64>()
    }

    fn accumulate_sample_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        let w = self.weights.row(i);
        let c = self.centers.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o += weight * w[j] * (x[j] - c[j]);
        }
    }
}

/// Parameters of the spiked data model `X = U Z + σ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedDataSpec {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SpikedDataSpec {
    pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.k == 0 || self.k >= self.d {
            return Err(ProblemError::InvalidDimensions(format!(
                "spiked model needs 0 < k < d, got k={}, d={}",
                self.k, self.d
            )));
        }
        if self.n == 0 {
            return Err(ProblemError::InvalidDimensions(
                "spiked model needs n >= 1".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(ProblemError::InvalidDimensions(format!(
                "noise_sigma must be finite and nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Draws a `d x n` data matrix from the spiked model.
///
/// `U` is a Gaussian `d x k` matrix orthonormalized by thin QR, `Z` is
/// `k x n` and `E` is `d x n`, all standard normal and drawn in that order
/// from the data stream.
pub fn spiked_data(spec: &SpikedDataSpec) -> Result<Matrix, ProblemError> {
    spec.validate()?;
    let (d, k, n) = (spec.d, spec.k, spec.n);
    let mut rng = StreamRng::new(spec.seed, Stream::Data);
    let gaussian = Matrix::from_fn(d, k, |_, _| rng.normal());
    let (basis, _) = thin_qr(&gaussian)?;
    let scores = Matrix::from_fn(k, n, |_, _| rng.normal());
    let noise = Matrix::from_fn(d, n, |_, _| rng.normal());
    let mut x = basis.matmul(&scores)?;
    if spec.noise_sigma > 0.0 {
        for (xi, ei) in x.as_mut_slice().iter_mut().zip(noise.as_slice()) {
            *xi += spec.noise_sigma * ei;
        }
    }
    Ok(x)
}

/// Orthogonal subspace fitting, `f_j(W) = ‖(I − W Wᵀ) x_j‖²` per data
/// column `x_j`, over `vec(W)` with `W ∈ R^{d×k}`.
#[derive(Debug, Clone)]
pub struct SubspaceFit {
    /// Data columns stored as rows (`n x d`).
    samples: Matrix,
    k: usize,
}

impl SubspaceFit {
    pub fn ambient_dim(&self) -> usize {
        self.samples.cols()
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    /// `‖(I − W Wᵀ) X‖_F² = n · f(W)`.
    pub fn total_loss(&self, w: &[f64]) -> f64 {
        self.samples.rows() as f64 * self.value(w)
    }

    /// Returns `(s, r)` with `s = Wᵀx` and `r = x − W s`.
    fn project(&self, j: usize, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let x = self.samples.row(j);
        let mut s = vec![0.0; k];
        for (xi, wrow) in x.iter().zip(w.chunks_exact(k)) {
            for (sl, wl) in s.iter_mut().zip(wrow) {
                *sl += wl * xi;
            }
        }
        let r = x
            .iter()
            .zip(w.chunks_exact(k))
            .map(|(xi, wrow)| xi - dot_unchecked(wrow, &s))
            .collect();
        (s, r)
    }
}

impl FiniteSum for SubspaceFit {
    fn num_samples(&self) -> usize {
        self.samples.rows()
    }

    fn dim(&self) -> usize {
        self.samples.cols() * self.k
    }

    fn sample_value(&self, j: usize, w: &[f64]) -> f64 {
        let (_, r) = self.project(j, w);
        dot_unchecked(&r, &r)
    }

    /// `∇f_j(W) = −2 (r sᵀ + x tᵀ)` with `t = Wᵀ r`.
    fn accumulate_sample_gradient(&self, j: usize, w: &[f64], weight: f64, out: &mut [f64]) {
        let k = self.k;
        let x = self.samples.row(j);
        let (s, r) = self.project(j, w);
        let mut t = vec![0.0; k];
        for (ri, wrow) in r.iter().zip(w.chunks_exact(k)) {
            for (tl, wl) in t.iter_mut().zip(wrow) {
                *tl += wl * ri;
            }
        }
        let scale = -2.0 * weight;
        for ((orow, ri), xi) in out.chunks_exact_mut(k).zip(&r).zip(x) {
            for l in 0..k {
                orow[l] += scale * (ri * s[l] + xi * t[l]);
            }
        }
    }
}

/// `c(W) = upper triangle (diagonal included) of WᵀW − I_k`, so
/// `m = k(k+1)/2`. Entries are ordered row by row: `(0,0), (0,1), …,
/// (0,k−1), (1,1), …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthogonalityConstraint {
    d: usize,
    k: usize,
}

impl OrthogonalityConstraint {
    pub fn new(d: usize, k: usize) -> Result<Self, ProblemError> {
        if k == 0 || k > d {
            return Err(ProblemError::InvalidDimensions(format!(
                "orthogonality constraint needs 0 < k <= d, got k={k}, d={d}"
            )));
        }
        Ok(Self { d, k })
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.k).flat_map(move |i| (i..self.k).map(move |j| (i, j)))
    }

    fn gram(&self, w: &[f64]) -> Matrix {
        let k = self.k;
        let mut g = Matrix::zeros(k, k);
        for wrow in w.chunks_exact(k) {
            for i in 0..k {
                for j in i..k {
                    let v = g.get(i, j) + wrow[i] * wrow[j];
                    g.set(i, j, v);
                }
            }
        }
        g
    }
}

impl ConstraintMap for OrthogonalityConstraint {
    fn num_constraints(&self) -> usize {
        self.k * (self.k + 1) / 2
    }

    fn dim(&self) -> usize {
        self.d * self.k
    }

    fn value(&self, w: &[f64]) -> Vec<f64> {
        let g = self.gram(w);
        self.pairs()
            .map(|(i, j)| {
                if i == j {
                    g.get(i, i) - 1.0
                } else {
                    g.get(i, j)
                }
            })
            .collect()
    }

    fn jacobian(&self, w: &[f64]) -> Matrix {
        let k = self.k;
        let mut jac = Matrix::zeros(self.num_constraints(), self.dim());
        for (row, (i, j)) in self.pairs().enumerate() {
            for a in 0..self.d {
                if i == j {
                    jac.set(row, a * k + i, 2.0 * w[a * k + i]);
                } else {
                    jac.set(row, a * k + i, w[a * k + j]);
                    jac.set(row, a * k + j, w[a * k + i]);
                }
            }
        }
        jac
    }

    /// Upper triangle of `WᵀV + VᵀW`.
    fn jvp(&self, w: &[f64], v: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut m = Matrix::zeros(k, k);
        for (wrow, vrow) in w.chunks_exact(k).zip(v.chunks_exact(k)) {
            for i in 0..k {
                for j in i..k {
                    let add = wrow[i] * vrow[j] + vrow[i] * wrow[j];
                    m.set(i, j, m.get(i, j) + add);
                }
            }
        }
        self.pairs().map(|(i, j)| m.get(i, j)).collect()
    }

    /// `W (U + Uᵀ)` where `U` is the upper-triangular matrix holding `u`.
    fn vjp(&self, w: &[f64], u: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut sym = Matrix::zeros(k, k);
        for ((i, j), ui) in self.pairs().zip(u) {
            if i == j {
                sym.set(i, i, 2.0 * ui);
            } else {
                sym.set(i, j, *ui);
                sym.set(j, i, *ui);
            }
        }
        let mut out = vec![0.0; self.dim()];
        for (orow, wrow) in out.chunks_exact_mut(k).zip(w.chunks_exact(k)) {
            for (l, wl) in wrow.iter().enumerate() {
                if *wl == 0.0 {
                    continue;
                }
                for (o, s) in orow.iter_mut().zip(sym.row(l)) {
                    *o += wl * s;
                }
            }
        }
        out
    }
}

/// Affine constraints `c(x) = A x − b`.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    matrix: Matrix,
    rhs: Vec<f64>,
}

impl LinearConstraint {
    pub fn new(matrix: Matrix, rhs: Vec<f64>) -> Result<Self, ProblemError> {
        if matrix.rows() != rhs.len() {
            return Err(ProblemError::InvalidDimensions(format!(
                "constraint matrix has {} rows but rhs has {} entries",
                matrix.rows(),
                rhs.len()
            )));
        }
        Ok(Self { matrix, rhs })
    }
}

impl ConstraintMap for LinearConstraint {
    fn num_constraints(&self) -> usize {
        self.matrix.rows()
    }

    fn dim(&self) -> usize {
        self.matrix.cols()
    }

    fn value(&self, x: &[f64]) -> Vec<f64> {
        (0..self.matrix.rows())
            .map(|i| dot_unchecked(self.matrix.row(i), x) - self.rhs[i])
            .collect()
    }

    fn jacobian(&self, _x: &[f64]) -> Matrix {
        self.matrix.clone()
    }

    fn jvp(&self, _x: &[f64], v: &[f64]) -> Vec<f64> {
        self.matrix.matvec(v).expect("jvp dimension")
    }

    fn vjp(&self, _x: &[f64], u: &[f64]) -> Vec<f64> {
        self.matrix.matvec_t(u).expect("vjp dimension")
    }
}

/// The empty constraint map (`m = 0`), for running the penalty solver on an
/// unconstrained problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoConstraints {
    pub dim: usize,
}

impl ConstraintMap for NoConstraints {
    fn num_constraints(&self) -> usize {
        0
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn jacobian(&self, _x: &[f64]) -> Matrix {
        Matrix::zeros(0, self.dim)
    }
    fn jvp(&self, _x: &[f64], _v: &[f64]) -> Vec<f64> {
        Vec::new()
    }
    fn vjp(&self, _x: &[f64], _u: &[f64]) -> Vec<f64> {
        vec![0.0; self.dim]
    }
}

/// Builds the subspace-fitting objective and its orthogonality constraint
/// from a `d x n` data matrix.
pub fn make_subspace_problem(
    data: &Matrix,
    k: usize,
) -> Result<(SubspaceFit, OrthogonalityConstraint), ProblemError> {
    let (d, n) = (data.rows(), data.cols());
    if k == 0 || k >= d || n == 0 {
        return Err(ProblemError::InvalidDimensions(format!(
            "subspace problem needs 0 < k < d and n >= 1, got d={d}, k={k}, n={n}"
        )));
    }
    let fit = SubspaceFit {
        samples: data.transpose(),
        k,
    };
    Ok((fit, OrthogonalityConstraint::new(d, k)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Gaussian,
    Orthonormal,
}

/// Seeded `vec(W)` for `W ∈ R^{d×k}`, drawn from the init stream.
pub fn random_init(
    d: usize,
    k: usize,
    seed: u64,
    mode: InitMode,
) -> Result<Vec<f64>, ProblemError> {
    let mut rng = StreamRng::new(seed, Stream::Init);
    let gaussian = Matrix::from_fn(d, k, |_, _| rng.normal());
    match mode {
        InitMode::Gaussian => Ok(gaussian.into_vec()),
        InitMode::Orthonormal => Ok(thin_qr(&gaussian)?.0.into_vec()),
    }
}

/// `‖WᵀW − I_k‖_F` for `vec(W)` with `k` columns.
pub fn orthogonality_error(w: &[f64], k: usize) -> f64 {
    let d = w.len() / k;
    let wm =
        Matrix::from_row_major(d, k, w.to_vec()).expect("vec(W) length must be a multiple of k");
    let gram = wm.t_matmul(&wm).expect("square gram");
    gram.sub(&Matrix::identity(k))
        .expect("k x k")
        .frobenius_norm()
}
