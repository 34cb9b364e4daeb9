//! Quadratic-penalty trust-region method for equality constraints.
//!
//! The sampled objective is `φ_i(x) = f_i(x) + (μ/2)‖c(x)‖²` and the model
//! is `m(p) = gᵀp + ½ pᵀHp` with `H = I + μ JᵀJ` (Gauss-Newton curvature of
//! the penalty). `H` is only ever applied through Jacobian products.
//!
//! With `μ = 0` every penalty term is skipped, so the method reproduces the
//! first-order solver bit for bit under the same seed.

use crate::linops::{dot_unchecked, max_singular_value, norm2, singular_values};
use crate::problems::{ConstraintMap, FiniteSum, ProblemError};
use crate::rng::{Stream, StreamRng};
use crate::trust_region::CauchyStep;
use crate::trust_region::{
    clip_scale, draw_batch, drive, finish_iteration, model_decrease, Checkpoint, ConfigError,
    IterationRecord, RunResult, SolverState, StepError, StopRule, TrialStep, TrustRegionConfig,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    pub mu: f64,
    pub tr: TrustRegionConfig,
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(ConfigError::new(
                "mu",
                format!("must be finite and >= 0, got {}", self.mu),
            ));
        }
        self.tr.validate()
    }
}

/// A finite-sum problem with its penalized components `φ_i`.
#[derive(Debug, Clone)]
pub struct PenalizedOracle<P, C> {
    base: P,
    constraints: C,
    mu: f64,
}

impl<P: FiniteSum, C: ConstraintMap> PenalizedOracle<P, C> {
    pub fn new(base: P, constraints: C, mu: f64) -> Result<Self, ProblemError> {
        if base.dim() != constraints.dim() {
            return Err(ProblemError::InvalidDimensions(format!(
                "objective has dimension {} but constraints expect {}",
                base.dim(),
                constraints.dim()
            )));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(ProblemError::InvalidDimensions(format!(
                "penalty parameter must be >= 0, got {mu}"
            )));
        }
        Ok(Self {
            base,
            constraints,
            mu,
        })
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn constraints(&self) -> &C {
        &self.constraints
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn penalty_active(&self) -> bool {
        self.mu != 0.0 && self.constraints.num_constraints() > 0
    }

    /// `(μ/2)‖c(x)‖²`.
    pub fn penalty_value(&self, x: &[f64]) -> f64 {
        if !self.penalty_active() {
            return 0.0;
        }
        let c = self.constraints.value(x);
        0.5 * self.mu * dot_unchecked(&c, &c)
    }

    /// Adds `μ Jᵀc(x)` to `out`.
    fn add_penalty_gradient(&self, x: &[f64], out: &mut [f64]) {
        if !self.penalty_active() {
            return;
        }
        let c = self.constraints.value(x);
        let jtc = self.constraints.vjp(x, &c);
        for (o, v) in out.iter_mut().zip(&jtc) {
            *o += self.mu * v;
        }
    }

    fn check_index(&self, i: usize) -> Result<(), ProblemError> {
        let n = self.base.num_samples();
        if i >= n {
            return Err(ProblemError::IndexOutOfRange { index: i, n });
        }
        Ok(())
    }

    pub fn penalized_value(&self, i: usize, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_index(i)?;
        Ok(self.sample_value(i, x))
    }

    pub fn penalized_gradient(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_index(i)?;
        Ok(self.sample_gradient(i, x))
    }

    /// The penalty-model curvature at `x`.
    pub fn hessian_model<'a>(&'a self, x: &'a [f64]) -> HessianModel<'a, C> {
        HessianModel {
            constraints: &self.constraints,
            x,
            mu: self.mu,
        }
    }
}

impl<P: FiniteSum, C: ConstraintMap> FiniteSum for PenalizedOracle<P, C> {
    fn num_samples(&self) -> usize {
        self.base.num_samples()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn sample_value(&self, i: usize, x: &[f64]) -> f64 {
        let f = self.base.sample_value(i, x);
        if self.penalty_active() {
            f + self.penalty_value(x)
        } else {
            f
        }
    }

    fn accumulate_sample_gradient(&self, i: usize, x: &[f64], weight: f64, out: &mut [f64]) {
        self.base.accumulate_sample_gradient(i, x, weight, out);
        if self.penalty_active() {
            let mut pen = vec![0.0; out.len()];
            self.add_penalty_gradient(x, &mut pen);
            for (o, p) in out.iter_mut().zip(&pen) {
                *o += weight * p;
            }
        }
    }

    // The penalty does not depend on the sample, so batches add it once.
    fn batch_value(&self, batch: &[usize], x: &[f64]) -> f64 {
        let f = self.base.batch_value(batch, x);
        if self.penalty_active() {
            f + self.penalty_value(x)
        } else {
            f
        }
    }

    fn batch_gradient(&self, batch: &[usize], x: &[f64]) -> Vec<f64> {
        let mut g = self.base.batch_gradient(batch, x);
        self.add_penalty_gradient(x, &mut g);
        g
    }

    fn value(&self, x: &[f64]) -> f64 {
        let f = self.base.value(x);
        if self.penalty_active() {
            f + self.penalty_value(x)
        } else {
            f
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.base.gradient(x);
        self.add_penalty_gradient(x, &mut g);
        g
    }
}

/// Symmetric positive definite curvature used by the model `gᵀp + ½pᵀHp`.
pub trait CurvatureModel {
    /// `H v`.
    fn apply(&self, v: &[f64]) -> Vec<f64>;

    /// `gᵀ H g`.
    fn quad(&self, g: &[f64]) -> f64 {
        dot_unchecked(g, &self.apply(g))
    }
}

/// `H = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityModel;

impl CurvatureModel for IdentityModel {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }

    fn quad(&self, g: &[f64]) -> f64 {
        dot_unchecked(g, g)
    }
}

/// `H = I + μ J(x)ᵀJ(x)` applied through Jacobian products.
#[derive(Debug, Clone, Copy)]
pub struct HessianModel<'a, C: ?Sized> {
    constraints: &'a C,
    x: &'a [f64],
    mu: f64,
}

impl<'a, C: ConstraintMap + ?Sized> HessianModel<'a, C> {
    pub fn new(constraints: &'a C, x: &'a [f64], mu: f64) -> Self {
        Self { constraints, x, mu }
    }

    fn active(&self) -> bool {
        self.mu != 0.0 && self.constraints.num_constraints() > 0
    }

    /// `‖H‖₂ = 1 + μ σ_max(J)²`. Forms the Jacobian, so this is meant for
    /// diagnostics rather than the inner loop.
    pub fn norm_bound(&self) -> f64 {
        if !self.active() {
            return 1.0;
        }
        let s = max_singular_value(&self.constraints.jacobian(self.x));
        1.0 + self.mu * s * s
    }
}

impl<C: ConstraintMap + ?Sized> CurvatureModel for HessianModel<'_, C> {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        if self.active() {
            let jv = self.constraints.jvp(self.x, v);
            let jtjv = self.constraints.vjp(self.x, &jv);
            for (o, t) in out.iter_mut().zip(&jtjv) {
                *o += self.mu * t;
            }
        }
        out
    }

    fn quad(&self, g: &[f64]) -> f64 {
        let gg = dot_unchecked(g, g);
        if !self.active() {
            return gg;
        }
        let jg = self.constraints.jvp(self.x, g);
        gg + self.mu * dot_unchecked(&jg, &jg)
    }
}

/// Scale `a` of the model minimizer along `−g` inside the ball, given
/// `‖g‖²` and `gᵀHg`.
fn general_scale(gg: f64, quad: f64, delta: f64) -> f64 {
    let gnorm = gg.sqrt();
    let a_star = gg / quad;
    if a_star * gnorm <= delta {
        a_star
    } else {
        delta / gnorm
    }
}

/// Minimizer of `gᵀp + ½pᵀHp` along `−g` within `‖p‖ ≤ Δ`:
/// `a* = ‖g‖²/gᵀHg` when `a*‖g‖ ≤ Δ`, otherwise `a = Δ/‖g‖`.
pub fn cauchy_step_general(
    g: &[f64],
    model: &impl CurvatureModel,
    delta: f64,
    g_tol: f64,
) -> Result<(Vec<f64>, f64), StepError> {
    let gg = dot_unchecked(g, g);
    let gnorm = gg.sqrt();
    if gnorm <= g_tol {
        return Err(StepError::GradientVanished { norm: gnorm });
    }
    let a = general_scale(gg, model.quad(g), delta);
    Ok((g.iter().map(|gi| -a * gi).collect(), a))
}

/// `m(0) − m(−a g) = a‖g‖² − ½a² gᵀHg`.
pub fn predicted_reduction_general(g: &[f64], model: &impl CurvatureModel, a: f64) -> f64 {
    model_decrease(dot_unchecked(g, g), model.quad(g), a)
}

/// Stationarity and feasibility with the multiplier estimate `λ = μ c(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KktResidual {
    /// `‖∇f(x) + J(x)ᵀλ‖`.
    pub stationarity: f64,
    /// `‖c(x)‖`.
    pub feasibility: f64,
    pub multiplier: Vec<f64>,
    /// `‖∇f(x)‖`, kept for the feasibility bound.
    pub objective_grad_norm: f64,
}

/// KKT residual at `x` from full (deterministic) gradients.
pub fn kkt_residual<P: FiniteSum, C: ConstraintMap>(
    oracle: &PenalizedOracle<P, C>,
    x: &[f64],
) -> KktResidual {
    let grad_f = oracle.base.gradient(x);
    let objective_grad_norm = norm2(&grad_f);
    let c = oracle.constraints.value(x);
    let feasibility = norm2(&c);
    let multiplier: Vec<f64> = c.iter().map(|ci| oracle.mu * ci).collect();
    let stationarity = if oracle.penalty_active() {
        let jtl = oracle.constraints.vjp(x, &multiplier);
        norm2(
            &grad_f
                .iter()
                .zip(&jtl)
                .map(|(a, b)| a + b)
                .collect::<Vec<_>>(),
        )
    } else {
        objective_grad_norm
    };
    KktResidual {
        stationarity,
        feasibility,
        multiplier,
        objective_grad_norm,
    }
}

/// One iteration of the penalty method.
pub fn str_penalty_step<P: FiniteSum, C: ConstraintMap>(
    oracle: &PenalizedOracle<P, C>,
    state: SolverState,
    rng: &mut StreamRng,
    cfg: &PenaltyConfig,
) -> Result<(SolverState, IterationRecord), StepError> {
    let tr = &cfg.tr;
    let mut state = state;
    let samples = draw_batch(rng, oracle.num_samples(), tr.batch);
    let g = oracle.batch_gradient(&samples, &state.x);
    let f_before = oracle.batch_value(&samples, &state.x);
    state.grad_calls += samples.len();
    state.value_calls += samples.len();

    let gg = dot_unchecked(&g, &g);
    let gnorm = gg.sqrt();
    let step = if gnorm <= tr.g_tol {
        Err(StepError::GradientVanished { norm: gnorm })
    } else {
        let quad = oracle.hessian_model(&state.x).quad(&g);
        let a = general_scale(gg, quad, state.delta);
        // `a* = 1` exactly when H = I, so this mirrors the first-order cap.
        let a = clip_scale(if quad == gg { a.min(1.0) } else { a }, tr);
        Ok(CauchyStep {
            a,
            pred_red: model_decrease(gg, quad, a),
        })
    };
    let feasibility = (oracle.constraints.num_constraints() > 0)
        .then(|| norm2(&oracle.constraints.value(&state.x)));
    let eval_at = samples.clone();
    let trial = TrialStep {
        samples,
        g: &g,
        gnorm,
        f_before,
        step,
    };
    let (state, mut record) =
        finish_iteration(state, trial, tr, |xt| oracle.batch_value(&eval_at, xt))?;
    record.feasibility = feasibility;
    Ok((state, record))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyRunResult {
    pub run: RunResult,
    /// Residual at the final iterate.
    pub kkt: KktResidual,
    /// Largest `‖∇f‖` seen at checkpoints and the final iterate.
    pub g_hat: f64,
    /// Smallest `σ_min(J)` seen at the same points; `None` without
    /// constraints.
    pub sigma_min_hat: Option<f64>,
    /// Largest `‖J‖₂` seen at the same points.
    pub jacobian_norm_hat: Option<f64>,
}

/// Runs the penalty method from `x0` until `‖∇φ‖ ≤ stop.grad_tol` or the
/// budget is spent.
pub fn run_str_penalty<P: FiniteSum, C: ConstraintMap>(
    oracle: &PenalizedOracle<P, C>,
    cfg: &PenaltyConfig,
    x0: Vec<f64>,
    seed: u64,
    stop: StopRule,
) -> Result<PenaltyRunResult, ConfigError> {
    run_str_penalty_observed(oracle, cfg, x0, seed, stop, |_, _| {})
}

/// As [`run_str_penalty`], calling `observer(x_k, record)` after every
/// iteration.
pub fn run_str_penalty_observed<P: FiniteSum, C: ConstraintMap>(
    oracle: &PenalizedOracle<P, C>,
    cfg: &PenaltyConfig,
    x0: Vec<f64>,
    seed: u64,
    stop: StopRule,
    observer: impl FnMut(&[f64], &IterationRecord),
) -> Result<PenaltyRunResult, ConfigError> {
    cfg.validate()?;
    if (cfg.mu - oracle.mu).abs() > 0.0 {
        return Err(ConfigError::new(
            "mu",
            format!(
                "config has {} but the oracle was built with {}",
                cfg.mu, oracle.mu
            ),
        ));
    }
    if x0.len() != oracle.dim() {
        return Err(ConfigError::new(
            "x0",
            format!(
                "length {} does not match problem dimension {}",
                x0.len(),
                oracle.dim()
            ),
        ));
    }
    let constrained = oracle.constraints.num_constraints() > 0;
    let mut g_hat = 0.0_f64;
    let mut sigma_min_hat: Option<f64> = None;
    let mut jac_hat: Option<f64> = None;
    let mut track = |x: &[f64], kkt: &KktResidual| {
        g_hat = g_hat.max(kkt.objective_grad_norm);
        if constrained {
            let sv = singular_values(&oracle.constraints.jacobian(x));
            let (hi, lo) = (
                sv.first().copied().unwrap_or(0.0),
                sv.last().copied().unwrap_or(0.0),
            );
            sigma_min_hat = Some(sigma_min_hat.map_or(lo, |s| s.min(lo)));
            jac_hat = Some(jac_hat.map_or(hi, |s| s.max(hi)));
        }
    };

    let mut rng = StreamRng::new(seed, Stream::Sampling);
    let period = stop.period(oracle.num_samples(), cfg.tr.batch);
    let run = drive(
        SolverState::new(x0, cfg.tr.delta0),
        cfg.tr.max_iter,
        period,
        stop.grad_tol,
        |s| str_penalty_step(oracle, s, &mut rng, cfg),
        |x| {
            let kkt = kkt_residual(oracle, x);
            track(x, &kkt);
            Checkpoint {
                measure: kkt.stationarity,
                full_grad_norm: kkt.objective_grad_norm,
                stationarity: constrained.then_some(kkt.stationarity),
            }
        },
        observer,
    );
    let kkt = kkt_residual(oracle, &run.state.x);
    track(&run.state.x, &kkt);
    Ok(PenaltyRunResult {
        run,
        kkt,
        g_hat,
        sigma_min_hat,
        jacobian_norm_hat: jac_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{central_difference_gradient, relative_error};
    use crate::linops::Matrix;
    use crate::problems::{
        make_interpolating_least_squares, make_subspace_problem, random_init, spiked_data,
        InitMode, LinearConstraint, NoConstraints, OrthogonalityConstraint, SeparableQuadratic,
        SpikedDataSpec,
    };
    use crate::trust_region::run_str;

    /// min ½‖x‖² subject to x₁ = 1 in two dimensions.
    fn toy(mu: f64) -> PenalizedOracle<SeparableQuadratic, LinearConstraint> {
        let c = LinearConstraint::new(Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(), vec![1.0])
            .unwrap();
        PenalizedOracle::new(SeparableQuadratic::half_squared_norm(2), c, mu).unwrap()
    }

    fn subspace_oracle(
        mu: f64,
    ) -> (
        PenalizedOracle<crate::problems::SubspaceFit, OrthogonalityConstraint>,
        usize,
        usize,
    ) {
        let spec = SpikedDataSpec {
            d: 12,
            k: 3,
            n: 40,
            noise_sigma: 0.05,
            seed: 5,
        };
        let data = spiked_data(&spec).unwrap();
        let (fit, cons) = make_subspace_problem(&data, 3).unwrap();
        (PenalizedOracle::new(fit, cons, mu).unwrap(), 12, 3)
    }

    #[test]
    fn feasible_point_has_base_gradient() {
        let oracle = toy(10.0);
        let x = [1.0, 0.3];
        assert_eq!(
            oracle.penalized_gradient(0, &x).unwrap(),
            oracle.base().sample_gradient(0, &x)
        );
        assert_eq!(oracle.penalty_value(&x), 0.0);
    }

    #[test]
    fn zero_mu_is_base_oracle() {
        let oracle = toy(0.0);
        let x = [3.0, -2.0];
        assert_eq!(
            oracle.penalized_value(0, &x).unwrap(),
            oracle.base().sample_value(0, &x)
        );
        assert_eq!(
            oracle.penalized_gradient(0, &x).unwrap(),
            oracle.base().sample_gradient(0, &x)
        );
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            toy(1.0).penalized_value(1, &[0.0, 0.0]),
            Err(ProblemError::IndexOutOfRange { index: 1, n: 1 })
        ));
    }

    #[test]
    fn penalized_gradient_matches_finite_differences() {
        let (oracle, d, k) = subspace_oracle(3.0);
        for seed in 0..10 {
            let w = random_init(d, k, seed, InitMode::Gaussian).unwrap();
            let i = seed as usize % oracle.num_samples();
            let g = oracle.penalized_gradient(i, &w).unwrap();
            let fd = central_difference_gradient(|x| oracle.sample_value(i, x), &w);
            assert!(relative_error(&fd, &g) <= 1e-6, "seed {seed}");
        }
    }

    #[test]
    fn batch_matches_mean_of_samples() {
        let (oracle, d, k) = subspace_oracle(2.0);
        let w = random_init(d, k, 1, InitMode::Gaussian).unwrap();
        let batch = [0, 3, 3, 17];
        let mean_v = batch
            .iter()
            .map(|&i| oracle.sample_value(i, &w))
            .sum::<f64>()
            / 4.0;
        assert!((oracle.batch_value(&batch, &w) - mean_v).abs() <= 1e-12 * mean_v.abs());
        let mut mean_g = vec![0.0; w.len()];
        for &i in &batch {
            oracle.accumulate_sample_gradient(i, &w, 0.25, &mut mean_g);
        }
        assert!(relative_error(&oracle.batch_gradient(&batch, &w), &mean_g) <= 1e-12);
    }

    #[test]
    fn hessian_model_is_consistent() {
        let (oracle, d, k) = subspace_oracle(4.0);
        let w = random_init(d, k, 2, InitMode::Gaussian).unwrap();
        let h = oracle.hessian_model(&w);
        let mut rng = StreamRng::new(3, Stream::Probe);
        for _ in 0..20 {
            let u = rng.normal_vec(w.len());
            let v = rng.normal_vec(w.len());
            let q = h.quad(&u);
            let via_apply = dot_unchecked(&u, &h.apply(&u));
            assert!((q - via_apply).abs() <= 1e-12 * q);
            assert!(q >= dot_unchecked(&u, &u));
            let uv = dot_unchecked(&u, &h.apply(&v));
            let vu = dot_unchecked(&v, &h.apply(&u));
            assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(vu.abs()));
        }
        // ‖H‖ bounds the Rayleigh quotient.
        let u = rng.normal_vec(w.len());
        assert!(h.quad(&u) <= h.norm_bound() * dot_unchecked(&u, &u) * (1.0 + 1e-12));
    }

    #[test]
    fn general_step_examples() {
        struct Diag;
        impl CurvatureModel for Diag {
            fn apply(&self, v: &[f64]) -> Vec<f64> {
                vec![v[0], 2.0 * v[1]]
            }
        }
        let (p, a) = cauchy_step_general(&[0.0, 1.0], &Diag, 100.0, 0.0).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(p, vec![0.0, -0.5]);
        // Grid search over a confirms the interior minimizer.
        let m = |a: f64| -a + 0.5 * a * a * 2.0;
        let best = (0..=10_000)
            .map(|j| m(j as f64 / 5000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(m(a) <= best + 1e-15);

        let (p, a) = cauchy_step_general(&[3.0, 4.0], &IdentityModel, 0.1, 0.0).unwrap();
        assert!((a - 0.02).abs() < 1e-17);
        assert!((norm2(&p) - 0.1).abs() < 1e-15);

        let (_, a) = cauchy_step_general(&[3.0, 4.0], &IdentityModel, 10.0, 0.0).unwrap();
        assert_eq!(a, 1.0);
        assert!(matches!(
            cauchy_step_general(&[0.0, 0.0], &IdentityModel, 1.0, 1e-14),
            Err(StepError::GradientVanished { .. })
        ));
    }

    #[test]
    fn interior_prediction_closed_form() {
        let (oracle, d, k) = subspace_oracle(5.0);
        let w = random_init(d, k, 4, InitMode::Gaussian).unwrap();
        let h = oracle.hessian_model(&w);
        let g = oracle.gradient(&w);
        let (_, a) = cauchy_step_general(&g, &h, f64::MAX, 0.0).unwrap();
        let gg = dot_unchecked(&g, &g);
        let expected = 0.5 * gg * gg / h.quad(&g);
        let pred = predicted_reduction_general(&g, &h, a);
        assert!((pred - expected).abs() <= 1e-12 * expected);
        assert!(predicted_reduction_general(&g, &h, 0.0) == 0.0);
    }

    #[test]
    fn kkt_toy_problem() {
        let mu = 100.0;
        let oracle = toy(mu);
        // Penalty minimizer x = (μ/(1+μ), 0) is stationary for φ.
        let x = [mu / (1.0 + mu), 0.0];
        let kkt = kkt_residual(&oracle, &x);
        assert!(kkt.stationarity <= 1e-14);
        assert!((kkt.multiplier[0] + mu / (1.0 + mu)).abs() <= 1e-12);
        // Feasible but not stationary without a multiplier.
        let kkt = kkt_residual(&oracle, &[1.0, 0.0]);
        assert_eq!(kkt.feasibility, 0.0);
        assert_eq!(kkt.multiplier, vec![0.0]);
        assert_eq!(kkt.stationarity, 1.0);
    }

    #[test]
    fn stationarity_is_penalized_gradient_norm() {
        let (oracle, d, k) = subspace_oracle(1.5);
        for seed in 0..100 {
            let w = random_init(d, k, seed, InitMode::Gaussian).unwrap();
            let kkt = kkt_residual(&oracle, &w);
            let direct = norm2(&oracle.gradient(&w));
            assert!(
                (kkt.stationarity - direct).abs() <= 1e-12 * direct,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn zero_mu_reproduces_first_order_trace() {
        let problem = make_interpolating_least_squares(15, 40, 7).unwrap();
        let tr = TrustRegionConfig {
            max_iter: 1500,
            ..TrustRegionConfig::default()
        };
        let plain = run_str(&problem, &tr, vec![0.0; 40], 11, StopRule::new(1e-9)).unwrap();
        let oracle = PenalizedOracle::new(&problem, NoConstraints { dim: 40 }, 0.0).unwrap();
        let cfg = PenaltyConfig { mu: 0.0, tr };
        let pen = run_str_penalty(&oracle, &cfg, vec![0.0; 40], 11, StopRule::new(1e-9)).unwrap();
        assert_eq!(plain, pen.run);
        assert!(pen.sigma_min_hat.is_none());
    }

    #[test]
    fn zero_budget_returns_initial_state() {
        let oracle = toy(10.0);
        let cfg = PenaltyConfig {
            mu: 10.0,
            tr: TrustRegionConfig {
                max_iter: 0,
                ..TrustRegionConfig::default()
            },
        };
        let res = run_str_penalty(&oracle, &cfg, vec![0.5, 0.5], 0, StopRule::new(1e-3)).unwrap();
        assert!(res.run.trace.is_empty());
        assert_eq!(res.run.state.x, vec![0.5, 0.5]);
    }

    #[test]
    fn toy_run_satisfies_feasibility_bound() {
        let eps = 1e-2;
        let mu = 1.0 / eps;
        let oracle = toy(mu);
        let tr = TrustRegionConfig {
            delta0: 1.0,
            delta_max: 10.0,
            max_iter: 10_000,
            ..TrustRegionConfig::default()
        };
        let cfg = PenaltyConfig { mu, tr };
        let stop = StopRule {
            grad_tol: eps,
            eval_every: Some(1),
        };
        let res = run_str_penalty(&oracle, &cfg, vec![0.0, 1.0], 0, stop).unwrap();
        assert!(res.kkt.stationarity <= eps);
        let bound = (eps + res.g_hat) / (mu * res.sigma_min_hat.unwrap());
        assert!(res.kkt.feasibility <= bound);
        let again = run_str_penalty(&oracle, &cfg, vec![0.0, 1.0], 0, stop).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn records_feasibility_on_constrained_runs() {
        let (oracle, d, k) = subspace_oracle(1.0);
        let w0 = random_init(d, k, 0, InitMode::Orthonormal).unwrap();
        let tr = TrustRegionConfig {
            delta0: 0.2,
            delta_max: 5.0,
            c2: 0.9,
            nu1: 1.5,
            nu2: 2.0,
            batch: 8,
            max_iter: 50,
            ..TrustRegionConfig::default()
        };
        let res = run_str_penalty(
            &oracle,
            &PenaltyConfig { mu: 1.0, tr },
            w0,
            0,
            StopRule::new(0.0),
        )
        .unwrap();
        assert_eq!(res.run.trace.len(), 50);
        assert!(res.run.trace.iter().all(|r| r.feasibility.is_some()));
        assert!(res.run.trace[0].feasibility.unwrap() < 1e-12);
        assert!(res.run.trace[0].stationarity.is_some());
    }
}
