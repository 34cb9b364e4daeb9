//! First-order stochastic trust-region method.
//!
//! Each iteration samples a component (or a mini-batch of components),
//! takes the minimizer of `m(p) = gᵀp + ½‖p‖²` over `‖p‖ ≤ Δ`, and judges
//! the step by the ratio of the sampled decrease to the model decrease,
//! evaluated on the same sample. The closed-form step is `p = −a g` with
//! `a = min(1, Δ/‖g‖)`.
//!
//! Radius update, with `r` the ratio:
//!
//! | ratio            | new radius          |
//! |------------------|---------------------|
//! | `r < c1`         | `Δ / ν1`            |
//! | `r > c2`         | `min(ν2 Δ, Δ_max)`  |
//! | otherwise        | `Δ`                 |
//!
//! Boundary values `r = c1` and `r = c2` keep the radius.

use thiserror::Error;

use crate::linops::{dot_unchecked, norm2};
use crate::problems::FiniteSum;
use crate::rng::{Stream, StreamRng};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    /// The sampled gradient is at or below the cutoff. Not a failure: the
    /// iteration is recorded as a stationary-sample event.
    #[error("sampled gradient vanished (norm {norm:e})")]
    GradientVanished { norm: f64 },
    #[error("model predicted a nonpositive decrease ({value:e})")]
    NonpositivePrediction { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid `{key}`: {reason}")]
pub struct ConfigError {
    pub key: &'static str,
    pub reason: String,
}

impl ConfigError {
    pub(crate) fn new(key: &'static str, reason: impl Into<String>) -> Self {
        Self {
            key,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegionConfig {
    /// Initial radius, in `(0, delta_max]`.
    pub delta0: f64,
    /// Radius cap.
    pub delta_max: f64,
    /// Acceptance threshold.
    pub c0: f64,
    /// Shrink threshold.
    pub c1: f64,
    /// Expand threshold.
    pub c2: f64,
    /// Shrink divisor, `> 1`.
    pub nu1: f64,
    /// Expand factor, `> 1` unless `allow_nonstandard_nu2` is set.
    pub nu2: f64,
    /// Sampled gradients with norm at or below this are treated as zero.
    pub g_tol: f64,
    pub max_iter: usize,
    /// Optional clip on the step scale `a`.
    pub a_max: Option<f64>,
    /// Accept `0 < nu2 <= 1`, which shrinks the radius on very successful
    /// steps.
    pub allow_nonstandard_nu2: bool,
    /// Components averaged into one sample per iteration.
    pub batch: usize,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            delta0: 8.0,
            delta_max: 80.0,
            c0: 0.05,
            c1: 0.10,
            c2: 0.50,
            nu1: 2.0,
            nu2: 5.0,
            g_tol: 1e-14,
            max_iter: 10_000,
            a_max: None,
            allow_nonstandard_nu2: false,
            batch: 1,
        }
    }
}

impl TrustRegionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite_pos = |key, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        finite_pos("delta_max", self.delta_max)?;
        finite_pos("delta0", self.delta0)?;
        if self.delta0 > self.delta_max {
            return Err(ConfigError::new(
                "delta0",
                format!(
                    "must not exceed delta_max ({} > {})",
                    self.delta0, self.delta_max
                ),
            ));
        }
        if !(self.c0 > 0.0 && self.c0 <= self.c1 && self.c1 <= self.c2 && self.c2 < 1.0) {
            let key = if !(self.c0 > 0.0) {
                "c0"
            } else if !(self.c0 <= self.c1) {
                "c1"
            } else {
                "c2"
            };
            return Err(ConfigError::new(
                key,
                format!(
                    "thresholds must satisfy 0 < c0 <= c1 <= c2 < 1, got c0={}, c1={}, c2={}",
                    self.c0, self.c1, self.c2
                ),
            ));
        }
        if !(self.nu1 > 1.0 && self.nu1.is_finite()) {
            return Err(ConfigError::new(
                "nu1",
                format!("requires ν₁, ν₂ > 1, got nu1={}", self.nu1),
            ));
        }
        if !(self.nu2.is_finite() && self.nu2 > 0.0) {
            return Err(ConfigError::new(
                "nu2",
                format!("must be finite and > 0, got {}", self.nu2),
            ));
        }
        if self.nu2 <= 1.0 && !self.allow_nonstandard_nu2 {
            return Err(ConfigError::new(
                "nu2",
                format!(
                    "requires ν₁, ν₂ > 1, got nu2={}; set allow_nonstandard_nu2=true to run it anyway",
                    self.nu2
                ),
            ));
        }
        if !(self.g_tol >= 0.0) {
            return Err(ConfigError::new(
                "g_tol",
                format!("must be >= 0, got {}", self.g_tol),
            ));
        }
        if let Some(a) = self.a_max {
            if !(a > 0.0) {
                return Err(ConfigError::new("a_max", format!("must be > 0, got {a}")));
            }
        }
        if self.batch == 0 {
            return Err(ConfigError::new("batch", "must be >= 1"));
        }
        Ok(())
    }
}

/// Evolving solver state.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub delta: f64,
    /// Iterations executed.
    pub k: usize,
    pub n_success: usize,
    pub n_fail: usize,
    /// Per-sample gradient evaluations (the stochastic oracle budget).
    pub grad_calls: usize,
    /// Per-sample value evaluations.
    pub value_calls: usize,
    /// Full (deterministic) gradient evaluations used for stopping tests.
    pub full_evals: usize,
}

impl SolverState {
    pub fn new(x0: Vec<f64>, delta0: f64) -> Self {
        Self {
            x: x0,
            delta: delta0,
            k: 0,
            n_success: 0,
            n_fail: 0,
            grad_calls: 0,
            value_calls: 0,
            full_evals: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// The sampled gradient vanished; `x` and `Δ` were left unchanged.
    VanishedGradient,
}

/// Per-iteration telemetry.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Sampled component indices (one per batch slot).
    pub samples: Vec<usize>,
    pub grad_norm: f64,
    /// Step scale; `None` for vanished-gradient events.
    pub a: Option<f64>,
    pub r: Option<f64>,
    pub delta_before: f64,
    pub delta_after: f64,
    pub outcome: StepOutcome,
    pub pred_red: Option<f64>,
    pub actual_red: Option<f64>,
    /// Full gradient norm at `x_k`, when evaluated this iteration.
    pub full_grad_norm: Option<f64>,
    /// `‖c(x_k)‖` (constrained runs only).
    pub feasibility: Option<f64>,
    /// `‖∇φ(x_k)‖` when evaluated this iteration (constrained runs only).
    pub stationarity: Option<f64>,
    /// Sampled objective value at `x_k`.
    pub obj_sample: f64,
}

impl IterationRecord {
    pub fn sample_index(&self) -> usize {
        self.samples[0]
    }

    pub fn accepted(&self) -> bool {
        self.outcome == StepOutcome::Accepted
    }

    /// Step length `a ‖g‖`.
    pub fn step_norm(&self) -> Option<f64> {
        self.a.map(|a| a * self.grad_norm)
    }
}

/// Step scale and model decrease of a Cauchy-type step `p = −a g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyStep {
    pub a: f64,
    pub pred_red: f64,
}

/// Minimizer of `gᵀp + ½‖p‖²` over `‖p‖ ≤ Δ`: `p = −a g` with `a = 1` if
/// `‖g‖ ≤ Δ` and `a = Δ/‖g‖` otherwise.
pub fn cauchy_step_first_order(
    g: &[f64],
    delta: f64,
    g_tol: f64,
) -> Result<(Vec<f64>, f64), StepError> {
    let gnorm = norm2(g);
    if gnorm <= g_tol {
        return Err(StepError::GradientVanished { norm: gnorm });
    }
    let a = first_order_scale(gnorm, delta);
    Ok((g.iter().map(|gi| -a * gi).collect(), a))
}

#[inline]
fn first_order_scale(gnorm: f64, delta: f64) -> f64 {
    if gnorm <= delta {
        1.0
    } else {
        delta / gnorm
    }
}

/// `m(0) − m(p)` for `p = −a g` under the identity model:
/// `a ‖g‖² − ½ a² ‖g‖² = a (1 − a/2) ‖g‖²`.
pub fn predicted_reduction_first_order(g: &[f64], a: f64) -> f64 {
    let gg = dot_unchecked(g, g);
    model_decrease(gg, gg, a)
}

/// `a ‖g‖² − ½ a² gᵀHg`, shared by both model types so that the identity
/// model gives bit-identical results through either path.
#[inline]
pub(crate) fn model_decrease(gg: f64, quad: f64, a: f64) -> f64 {
    a * gg - 0.5 * a * a * quad
}

/// `(f_before − f_after) / pred_red`.
pub fn acceptance_ratio(f_before: f64, f_after: f64, pred_red: f64) -> Result<f64, StepError> {
    if !(pred_red > 0.0) {
        return Err(StepError::NonpositivePrediction { value: pred_red });
    }
    Ok((f_before - f_after) / pred_red)
}

pub fn radius_update(delta: f64, r: f64, cfg: &TrustRegionConfig) -> f64 {
    if r < cfg.c1 {
        delta / cfg.nu1
    } else if r > cfg.c2 {
        (cfg.nu2 * delta).min(cfg.delta_max)
    } else {
        delta
    }
}

/// `batch` uniform draws with replacement, or every index once when
/// `batch ≥ n`.
pub(crate) fn draw_batch(rng: &mut StreamRng, n: usize, batch: usize) -> Vec<usize> {
    if batch >= n {
        (0..n).collect()
    } else {
        (0..batch).map(|_| rng.index(n)).collect()
    }
}

pub(crate) fn clip_scale(a: f64, cfg: &TrustRegionConfig) -> f64 {
    match cfg.a_max {
        Some(cap) => a.min(cap),
        None => a,
    }
}

/// Everything an iteration needs after the model step has been chosen.
pub(crate) struct TrialStep<'a> {
    pub samples: Vec<usize>,
    pub g: &'a [f64],
    pub gnorm: f64,
    pub f_before: f64,
    pub step: Result<CauchyStep, StepError>,
}

/// Shared acceptance and radius logic. `eval_trial` evaluates the sampled
/// objective at the trial point.
pub(crate) fn finish_iteration(
    mut state: SolverState,
    trial: TrialStep<'_>,
    cfg: &TrustRegionConfig,
    eval_trial: impl FnOnce(&[f64]) -> f64,
) -> Result<(SolverState, IterationRecord), StepError> {
    let batch = trial.samples.len();
    let delta_before = state.delta;
    let k = state.k;
    let mut record = IterationRecord {
        k,
        samples: trial.samples,
        grad_norm: trial.gnorm,
        a: None,
        r: None,
        delta_before,
        delta_after: delta_before,
        outcome: StepOutcome::VanishedGradient,
        pred_red: None,
        actual_red: None,
        full_grad_norm: None,
        feasibility: None,
        stationarity: None,
        obj_sample: trial.f_before,
    };
    let step = match trial.step {
        Ok(step) => step,
        Err(StepError::GradientVanished { .. }) => {
            state.k += 1;
            state.n_fail += 1;
            return Ok((state, record));
        }
        Err(e) => return Err(e),
    };

    let x_trial: Vec<f64> = state
        .x
        .iter()
        .zip(trial.g)
        .map(|(xi, gi)| xi - step.a * gi)
        .collect();
    let f_after = eval_trial(&x_trial);
    state.value_calls += batch;
    let r = acceptance_ratio(trial.f_before, f_after, step.pred_red)?;
    let accepted = r > cfg.c0;
    if accepted {
        state.x = x_trial;
        state.n_success += 1;
    } else {
        state.n_fail += 1;
    }
    state.delta = radius_update(delta_before, r, cfg);
    state.k += 1;

    record.a = Some(step.a);
    record.r = Some(r);
    record.delta_after = state.delta;
    record.outcome = if accepted {
        StepOutcome::Accepted
    } else {
        StepOutcome::Rejected
    };
    record.pred_red = Some(step.pred_red);
    record.actual_red = Some(trial.f_before - f_after);
    Ok((state, record))
}

/// One iteration of the first-order method.
pub fn str_step<P: FiniteSum + ?Sized>(
    problem: &P,
    state: SolverState,
    rng: &mut StreamRng,
    cfg: &TrustRegionConfig,
) -> Result<(SolverState, IterationRecord), StepError> {
    let mut state = state;
    let samples = draw_batch(rng, problem.num_samples(), cfg.batch);
    let g = problem.batch_gradient(&samples, &state.x);
    let f_before = problem.batch_value(&samples, &state.x);
    state.grad_calls += samples.len();
    state.value_calls += samples.len();

    let gg = dot_unchecked(&g, &g);
    let gnorm = gg.sqrt();
    let step = if gnorm <= cfg.g_tol {
        Err(StepError::GradientVanished { norm: gnorm })
    } else {
        let a = clip_scale(first_order_scale(gnorm, state.delta), cfg);
        Ok(CauchyStep {
            a,
            pred_red: model_decrease(gg, gg, a),
        })
    };
    let eval_at = samples.clone();
    let trial = TrialStep {
        samples,
        g: &g,
        gnorm,
        f_before,
        step,
    };
    finish_iteration(state, trial, cfg, |xt| problem.batch_value(&eval_at, xt))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Stop once the deterministic gradient norm is at or below this.
    pub grad_tol: f64,
    /// Iterations between deterministic evaluations; `None` means once per
    /// epoch.
    pub eval_every: Option<usize>,
}

impl StopRule {
    pub fn new(grad_tol: f64) -> Self {
        Self {
            grad_tol,
            eval_every: None,
        }
    }

    /// Evaluation period in iterations for a problem with `n` samples drawn
    /// `batch` at a time.
    pub fn period(&self, n: usize, batch: usize) -> usize {
        self.eval_every
            .unwrap_or_else(|| iterations_per_epoch(n, batch))
            .max(1)
    }
}

/// Iterations that consume one epoch (`n` per-sample gradient calls).
pub fn iterations_per_epoch(n: usize, batch: usize) -> usize {
    n.div_ceil(batch.max(1)).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The deterministic stopping measure reached the tolerance.
    Converged,
    /// The iteration budget ran out.
    MaxIter,
    /// The model stopped predicting decrease (for example the radius
    /// underflowed).
    Stalled,
    /// A NaN or infinity appeared in the iterate or the sampled values.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<IterationRecord>,
    pub state: SolverState,
    pub termination: Termination,
    /// Deterministic stopping measure at the final iterate.
    pub final_measure: f64,
}

/// Deterministic quantities evaluated at scheduled checkpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Checkpoint {
    /// The quantity compared against the tolerance.
    pub measure: f64,
    pub full_grad_norm: f64,
    pub stationarity: Option<f64>,
}

/// Shared outer loop: periodic deterministic checks, budget, and early
/// exits. `step` performs one iteration; `checkpoint` evaluates the
/// deterministic measure at an iterate.
pub(crate) fn drive(
    mut state: SolverState,
    max_iter: usize,
    period: usize,
    tol: f64,
    mut step: impl FnMut(SolverState) -> Result<(SolverState, IterationRecord), StepError>,
    mut checkpoint: impl FnMut(&[f64]) -> Checkpoint,
    mut observer: impl FnMut(&[f64], &IterationRecord),
) -> RunResult {
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIter;
    let mut final_measure = None;
    while state.k < max_iter {
        let mut pending = None;
        if state.k.is_multiple_of(period) {
            let cp = checkpoint(&state.x);
            state.full_evals += 1;
            if cp.measure <= tol {
                termination = Termination::Converged;
                final_measure = Some(cp.measure);
                break;
            }
            pending = Some(cp);
        }
        let x_before = state.x.clone();
        let (next, mut record) = match step(state.clone()) {
            Ok(out) => out,
            Err(_) => {
                termination = Termination::Stalled;
                break;
            }
        };
        if let Some(cp) = pending {
            record.full_grad_norm = Some(cp.full_grad_norm);
            record.stationarity = cp.stationarity;
        }
        let finite = record.grad_norm.is_finite()
            && record.obj_sample.is_finite()
            && record.r.is_none_or(f64::is_finite)
            && record.actual_red.is_none_or(f64::is_finite);
        observer(&x_before, &record);
        trace.push(record);
        state = next;
        if !finite {
            termination = Termination::NonFinite;
            break;
        }
    }
    let final_measure = final_measure.unwrap_or_else(|| {
        state.full_evals += 1;
        checkpoint(&state.x).measure
    });
    if termination == Termination::MaxIter && final_measure <= tol {
        termination = Termination::Converged;
    }
    if !final_measure.is_finite() {
        termination = Termination::NonFinite;
    }
    RunResult {
        trace,
        state,
        termination,
        final_measure,
    }
}

/// Runs the first-order method from `x0` until the full gradient norm drops
/// to `stop.grad_tol` or `cfg.max_iter` iterations have been taken.
pub fn run_str<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &TrustRegionConfig,
    x0: Vec<f64>,
    seed: u64,
    stop: StopRule,
) -> Result<RunResult, ConfigError> {
    run_str_observed(problem, cfg, x0, seed, stop, |_, _| {})
}

/// As [`run_str`], calling `observer(x_k, record)` after every iteration.
pub fn run_str_observed<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &TrustRegionConfig,
    x0: Vec<f64>,
    seed: u64,
    stop: StopRule,
    observer: impl FnMut(&[f64], &IterationRecord),
) -> Result<RunResult, ConfigError> {
    cfg.validate()?;
    if x0.len() != problem.dim() {
        return Err(ConfigError::new(
            "x0",
            format!(
                "length {} does not match problem dimension {}",
                x0.len(),
                problem.dim()
            ),
        ));
    }
    let mut rng = StreamRng::new(seed, Stream::Sampling);
    let period = stop.period(problem.num_samples(), cfg.batch);
    Ok(drive(
        SolverState::new(x0, cfg.delta0),
        cfg.max_iter,
        period,
        stop.grad_tol,
        |s| str_step(problem, s, &mut rng, cfg),
        |x| {
            let g = norm2(&problem.gradient(x));
            Checkpoint {
                measure: g,
                full_grad_norm: g,
                stationarity: None,
            }
        },
        observer,
    ))
}
