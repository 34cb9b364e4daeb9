//! Comparison methods for the constrained subspace experiments: plain SGD,
//! projected SGD and Riemannian gradient descent on the Stiefel manifold
//! (both retracting with thin QR), and a stochastic augmented Lagrangian.
//!
//! Matrices `W ∈ R^{d×k}` are passed as row-major `vec(W)`.

use thiserror::Error;

use crate::linops::{dot_unchecked, norm2, thin_qr, LinalgError, Matrix};
use crate::problems::{orthogonality_error, ConstraintMap, FiniteSum};
use crate::rng::{Stream, StreamRng};
use crate::trust_region::{draw_batch, iterations_per_epoch, ConfigError};

/// Measures how far an iterate is from the constraint set, for logging.
pub type Feasibility<'a> = &'a dyn Fn(&[f64]) -> f64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("retraction failed: {0}")]
    Retraction(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Sgd,
    SgdProj,
    RiemannianGd,
    AugLag,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Sgd => "sgd",
            BaselineMethod::SgdProj => "sgd_proj",
            BaselineMethod::RiemannianGd => "riemannian_gd",
            BaselineMethod::AugLag => "auglag",
        }
    }
}

/// How the augmented Lagrangian damps its multiplier update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierUpdate {
    /// `λ ← λ + λ_damp μ c(x)`.
    #[default]
    DampedIncrement,
    /// `λ ← λ_damp (λ + μ c(x))`.
    DampedMultiplier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugLagParams {
    pub inner_lr: f64,
    pub mu0: f64,
    pub mu_growth: f64,
    /// Epochs of mini-batch SGD per outer iteration.
    pub inner_epochs: usize,
    pub lambda_damp: f64,
    pub update: MultiplierUpdate,
}

impl Default for AugLagParams {
    fn default() -> Self {
        Self {
            inner_lr: 0.01,
            mu0: 0.1,
            mu_growth: 1.1,
            inner_epochs: 10,
            lambda_damp: 0.5,
            update: MultiplierUpdate::DampedIncrement,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    /// Step size (unused by the augmented Lagrangian, which has `inner_lr`).
    pub lr: f64,
    pub batch: usize,
    pub auglag: AugLagParams,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod) -> Self {
        Self {
            method,
            lr: 5e-2,
            batch: 32,
            auglag: AugLagParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(ConfigError::new(
                "lr",
                format!("must be finite and > 0, got {}", self.lr),
            ));
        }
        if self.batch == 0 {
            return Err(ConfigError::new("batch", "must be >= 1"));
        }
        if self.method == BaselineMethod::AugLag {
            let p = &self.auglag;
            if !(p.inner_lr.is_finite() && p.inner_lr > 0.0) {
                return Err(ConfigError::new(
                    "inner_lr",
                    format!("must be finite and > 0, got {}", p.inner_lr),
                ));
            }
            if !(p.mu0.is_finite() && p.mu0 >= 0.0) {
                return Err(ConfigError::new(
                    "mu0",
                    format!("must be finite and >= 0, got {}", p.mu0),
                ));
            }
            if !(p.mu_growth.is_finite() && p.mu_growth >= 1.0) {
                return Err(ConfigError::new(
                    "mu_growth",
                    format!("must be >= 1, got {}", p.mu_growth),
                ));
            }
            if p.inner_epochs == 0 {
                return Err(ConfigError::new("inner_epochs", "must be >= 1"));
            }
            if !(p.lambda_damp.is_finite() && p.lambda_damp >= 0.0) {
                return Err(ConfigError::new(
                    "lambda_damp",
                    format!("must be finite and >= 0, got {}", p.lambda_damp),
                ));
            }
        }
        Ok(())
    }
}

/// Mini-batch indices: `batch` uniform draws with replacement, or every
/// index once when `batch ≥ n`.
pub fn draw_minibatch(rng: &mut StreamRng, n: usize, batch: usize) -> Vec<usize> {
    draw_batch(rng, n, batch)
}

/// `x − lr · (mean gradient over a mini-batch)`.
pub fn sgd_step<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &[f64],
    lr: f64,
    rng: &mut StreamRng,
    batch: usize,
) -> Vec<f64> {
    let idx = draw_minibatch(rng, problem.num_samples(), batch);
    let g = problem.batch_gradient(&idx, x);
    x.iter().zip(&g).map(|(xi, gi)| xi - lr * gi).collect()
}

fn as_matrix(w: &[f64], k: usize) -> Matrix {
    Matrix::from_row_major(w.len() / k, k, w.to_vec())
        .expect("vec(W) length must be a multiple of k")
}

/// Q factor of the thin QR of `W` (with nonnegative `diag(R)`).
pub fn qr_retraction(w: &Matrix) -> Result<Matrix, LinalgError> {
    Ok(thin_qr(w)?.0)
}

/// `G − W sym(WᵀG)`: projection onto the tangent space of the Stiefel
/// manifold at `W`.
pub fn tangent_projection(w: &Matrix, g: &Matrix) -> Matrix {
    let wtg = w.t_matmul(g).expect("shapes agree");
    let k = wtg.rows();
    let sym = Matrix::from_fn(k, k, |i, j| 0.5 * (wtg.get(i, j) + wtg.get(j, i)));
    g.sub(&w.matmul(&sym).expect("shapes agree"))
        .expect("shapes agree")
}

/// Projected SGD: retract `W − lr G` by thin QR.
pub fn projected_sgd_step<P: FiniteSum + ?Sized>(
    problem: &P,
    w: &[f64],
    k: usize,
    lr: f64,
    rng: &mut StreamRng,
    batch: usize,
) -> Result<Vec<f64>, LinalgError> {
    let moved = sgd_step(problem, w, lr, rng, batch);
    Ok(qr_retraction(&as_matrix(&moved, k))?.into_vec())
}

/// Riemannian SGD: project the gradient onto the tangent space, step, and
/// retract by thin QR.
pub fn riemannian_gd_step<P: FiniteSum + ?Sized>(
    problem: &P,
    w: &[f64],
    k: usize,
    lr: f64,
    rng: &mut StreamRng,
    batch: usize,
) -> Result<Vec<f64>, LinalgError> {
    let idx = draw_minibatch(rng, problem.num_samples(), batch);
    let g = as_matrix(&problem.batch_gradient(&idx, w), k);
    let wm = as_matrix(w, k);
    let rg = tangent_projection(&wm, &g);
    let moved = Matrix::from_fn(wm.rows(), k, |i, j| wm.get(i, j) - lr * rg.get(i, j));
    Ok(qr_retraction(&moved)?.into_vec())
}

/// Objective and feasibility at the end of an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// Epochs completed (0 is the initial point).
    pub epoch: usize,
    /// Mean objective `f(x)`.
    pub objective: f64,
    pub feasibility: Option<f64>,
    /// `‖λ‖` (augmented Lagrangian only).
    pub multiplier_norm: Option<f64>,
    /// Penalty parameter in force (augmented Lagrangian only).
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub x: Vec<f64>,
    pub history: Vec<EpochRecord>,
    pub iterations: usize,
    pub grad_calls: usize,
    /// Largest feasibility error seen at any iterate, including `x0`.
    pub max_feasibility: Option<f64>,
    pub multiplier: Option<Vec<f64>>,
}

/// Runs SGD, projected SGD or Riemannian SGD for `epochs` epochs.
/// `feasibility`, when given, is evaluated at every iterate. The manifold
/// methods need the column count `k` of `W`.
pub fn run_first_order_baseline<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &BaselineConfig,
    k: Option<usize>,
    x0: Vec<f64>,
    seed: u64,
    epochs: usize,
    feasibility: Option<Feasibility<'_>>,
) -> Result<BaselineRun, BaselineError> {
    cfg.validate()?;
    let manifold_k = match cfg.method {
        BaselineMethod::Sgd => None,
        BaselineMethod::SgdProj | BaselineMethod::RiemannianGd => Some(
            k.filter(|&k| k > 0 && x0.len().is_multiple_of(k))
                .ok_or_else(|| {
                    ConfigError::new(
                        "k",
                        format!("{} needs the column count of W", cfg.method.name()),
                    )
                })?,
        ),
        BaselineMethod::AugLag => {
            return Err(
                ConfigError::new("method", "use auglag_run for the augmented Lagrangian").into(),
            )
        }
    };
    let n = problem.num_samples();
    let per_epoch = iterations_per_epoch(n, cfg.batch);
    let mut rng = StreamRng::new(seed, Stream::Sampling);
    let mut x = x0;
    let feas = |x: &[f64]| feasibility.map(|f| f(x));
    let mut max_feas = feas(&x);
    let mut history = vec![EpochRecord {
        epoch: 0,
        objective: problem.value(&x),
        feasibility: feas(&x),
        multiplier_norm: None,
        mu: None,
    }];
    let mut grad_calls = 0;
    for epoch in 1..=epochs {
        for _ in 0..per_epoch {
            x = match (cfg.method, manifold_k) {
                (BaselineMethod::SgdProj, Some(k)) => {
                    projected_sgd_step(problem, &x, k, cfg.lr, &mut rng, cfg.batch)?
                }
                (BaselineMethod::RiemannianGd, Some(k)) => {
                    riemannian_gd_step(problem, &x, k, cfg.lr, &mut rng, cfg.batch)?
                }
                _ => sgd_step(problem, &x, cfg.lr, &mut rng, cfg.batch),
            };
            grad_calls += cfg.batch.min(n);
            if let Some(f) = feas(&x) {
                max_feas = max_feas.map(|m| m.max(f));
            }
        }
        history.push(EpochRecord {
            epoch,
            objective: problem.value(&x),
            feasibility: feas(&x),
            multiplier_norm: None,
            mu: None,
        });
    }
    Ok(BaselineRun {
        x,
        history,
        iterations: epochs * per_epoch,
        grad_calls,
        max_feasibility: max_feas,
        multiplier: None,
    })
}

/// Gradient of `L_A` over a mini-batch: `∇f_B(x) + Jᵀ(λ + μ c(x))`.
fn augmented_gradient<P: FiniteSum + ?Sized, C: ConstraintMap + ?Sized>(
    problem: &P,
    constraints: &C,
    idx: &[usize],
    x: &[f64],
    lambda: &[f64],
    mu: f64,
) -> Vec<f64> {
    let mut g = problem.batch_gradient(idx, x);
    if constraints.num_constraints() > 0 {
        let c = constraints.value(x);
        let weights: Vec<f64> = lambda.iter().zip(&c).map(|(l, ci)| l + mu * ci).collect();
        for (gi, t) in g.iter_mut().zip(constraints.vjp(x, &weights)) {
            *gi += t;
        }
    }
    g
}

/// Stochastic augmented Lagrangian. Each outer iteration runs
/// `inner_epochs` epochs of mini-batch SGD on
/// `f(x) + λᵀc(x) + (μ/2)‖c(x)‖²`, then updates `λ` and grows `μ`.
/// `feasibility` defaults to `‖c(x)‖`.
pub fn auglag_run<P: FiniteSum + ?Sized, C: ConstraintMap + ?Sized>(
    problem: &P,
    constraints: &C,
    cfg: &BaselineConfig,
    x0: Vec<f64>,
    seed: u64,
    outer_iters: usize,
    feasibility: Option<Feasibility<'_>>,
) -> Result<BaselineRun, BaselineError> {
    let cfg = BaselineConfig {
        method: BaselineMethod::AugLag,
        ..cfg.clone()
    };
    cfg.validate()?;
    let p = &cfg.auglag;
    let n = problem.num_samples();
    let per_epoch = iterations_per_epoch(n, cfg.batch);
    let mut rng = StreamRng::new(seed, Stream::Sampling);
    let feas = |x: &[f64]| match feasibility {
        Some(f) => f(x),
        None => norm2(&constraints.value(x)),
    };
    let mut x = x0;
    let mut lambda = vec![0.0; constraints.num_constraints()];
    let mut mu = p.mu0;
    let mut max_feas = feas(&x);
    let mut history = vec![EpochRecord {
        epoch: 0,
        objective: problem.value(&x),
        feasibility: Some(feas(&x)),
        multiplier_norm: Some(0.0),
        mu: Some(mu),
    }];
    let mut grad_calls = 0;
    let mut epoch = 0;
    for _ in 0..outer_iters {
        for _ in 0..p.inner_epochs {
            for _ in 0..per_epoch {
                let idx = draw_minibatch(&mut rng, n, cfg.batch);
                let g = augmented_gradient(problem, constraints, &idx, &x, &lambda, mu);
                x.iter_mut()
                    .zip(&g)
                    .for_each(|(xi, gi)| *xi -= p.inner_lr * gi);
                grad_calls += idx.len();
                max_feas = max_feas.max(feas(&x));
            }
            epoch += 1;
            history.push(EpochRecord {
                epoch,
                objective: problem.value(&x),
                feasibility: Some(feas(&x)),
                multiplier_norm: Some(norm2(&lambda)),
                mu: Some(mu),
            });
        }
        let c = constraints.value(&x);
        for (l, ci) in lambda.iter_mut().zip(&c) {
            *l = match p.update {
                MultiplierUpdate::DampedIncrement => *l + p.lambda_damp * mu * ci,
                MultiplierUpdate::DampedMultiplier => p.lambda_damp * (*l + mu * ci),
            };
        }
        mu *= p.mu_growth;
        if let Some(last) = history.last_mut() {
            last.multiplier_norm = Some(norm2(&lambda));
        }
    }
    Ok(BaselineRun {
        x,
        history,
        iterations: epoch * per_epoch,
        grad_calls,
        max_feasibility: Some(max_feas),
        multiplier: Some(lambda),
    })
}

/// Feasibility measure for `vec(W)` with `k` columns: `‖WᵀW − I‖_F`.
pub fn stiefel_feasibility(k: usize) -> impl Fn(&[f64]) -> f64 {
    move |w| orthogonality_error(w, k)
}

/// `⟨A, B⟩_F`, used by the tangency checks.
pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    dot_unchecked(a.as_slice(), b.as_slice())
}
