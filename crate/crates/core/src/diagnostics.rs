//! Measurable stand-ins for the method's assumptions and convergence
//! bounds, and pass/fail checks over solver traces.
//!
//! Every check reports the two sides of its inequality, the margin
//! (`rhs − lhs`, positive when satisfied) and the estimated constant it
//! used, so a failure can be traced to either the solver or the estimate.

use std::fmt;

use thiserror::Error;

use crate::linops::{dot_unchecked, norm2};
use crate::penalty::KktResidual;
use crate::problems::FiniteSum;
use crate::trust_region::{IterationRecord, TrustRegionConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("full gradient vanishes at the probe (norm {norm:e})")]
    StationaryPoint { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Nothing to check (for example an empty qualifying prefix).
    Vacuous,
    /// A precondition did not hold; the reason is in `detail`.
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Vacuous => "vacuous",
            CheckStatus::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst-case left-hand side.
    pub lhs: f64,
    /// Right-hand side at the worst case.
    pub rhs: f64,
    /// `rhs − lhs` at the worst case.
    pub margin: f64,
    /// The estimated constant the bound was built from.
    pub constant: Option<(&'static str, f64)>,
    /// Iterations that qualified for the check.
    pub checked: usize,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, status: CheckStatus) -> Self {
        Self {
            name,
            status,
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            constant: None,
            checked: 0,
            detail: String::new(),
        }
    }

    fn vacuous(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            detail: detail.into(),
            ..Self::new(name, CheckStatus::Vacuous)
        }
    }

    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        Self {
            detail: detail.into(),
            ..Self::new(name, CheckStatus::Skipped)
        }
    }

    /// Pass/fail from `lhs ≤ rhs`.
    fn compare(name: &'static str, lhs: f64, rhs: f64, checked: usize) -> Self {
        let status = if lhs <= rhs {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
            checked,
            ..Self::new(name, status)
        }
    }

    fn with_constant(mut self, name: &'static str, value: f64) -> Self {
        self.constant = Some((name, value));
        self
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name, self.status)?;
        if self.lhs.is_finite() || self.rhs.is_finite() {
            write!(
                f,
                " lhs={:e} rhs={:e} margin={:e}",
                self.lhs, self.rhs, self.margin
            )?;
        }
        if let Some((name, v)) = self.constant {
            write!(f, " {name}={v:e}")?;
        }
        if self.checked > 0 {
            write!(f, " checked={}", self.checked)?;
        }
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Central-difference gradient with step `h = 1e-5 (1 + ‖x‖)`.
pub fn central_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let h = 1e-5 * (1.0 + norm2(x));
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let orig = probe[j];
            probe[j] = orig + h;
            let fp = f(&probe);
            probe[j] = orig - h;
            let fm = f(&probe);
            probe[j] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, or 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm2(a).max(norm2(b)).max(f64::MIN_POSITIVE);
    norm2(&diff) / scale
}

/// Largest relative error between `gradient` and central differences of
/// `value` over `probes`.
pub fn finite_difference_check(
    value: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64]) -> Vec<f64>,
    probes: &[Vec<f64>],
) -> f64 {
    probes
        .iter()
        .map(|x| relative_error(&central_difference_gradient(&value, x), &gradient(x)))
        .fold(0.0, f64::max)
}

/// `(1/n) Σ ‖∇f_i(x)‖² / ‖∇f(x)‖²` over every sample.
pub fn sgc_ratio<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &[f64],
    g_tol: f64,
) -> Result<f64, DiagnosticsError> {
    let full = problem.gradient(x);
    let full_sq = dot_unchecked(&full, &full);
    if full_sq.sqrt() <= g_tol {
        return Err(DiagnosticsError::StationaryPoint {
            norm: full_sq.sqrt(),
        });
    }
    let n = problem.num_samples();
    let mut g = vec![0.0; problem.dim()];
    let mut second_moment = 0.0;
    for i in 0..n {
        g.iter_mut().for_each(|v| *v = 0.0);
        problem.accumulate_sample_gradient(i, x, 1.0, &mut g);
        second_moment += dot_unchecked(&g, &g);
    }
    Ok(second_moment / n as f64 / full_sq)
}

/// Smoothness lower bounds from gradient differences at probe pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessEstimate {
    /// Per-sample estimates.
    pub per_sample: Vec<f64>,
    /// Estimate for the mean objective.
    pub mean: f64,
    /// Number of probe pairs used (pairs at distance zero are dropped).
    pub pairs: usize,
}

impl SmoothnessEstimate {
    pub fn max_sample(&self) -> f64 {
        self.per_sample.iter().copied().fold(0.0, f64::max)
    }
}

/// Max over probe pairs of `‖∇f_i(x) − ∇f_i(y)‖ / ‖x − y‖`, per sample and
/// for the mean.
pub fn estimate_smoothness<P: FiniteSum + ?Sized>(
    problem: &P,
    probes: &[Vec<f64>],
) -> SmoothnessEstimate {
    let n = problem.num_samples();
    let grads: Vec<Vec<Vec<f64>>> = probes
        .iter()
        .map(|x| (0..n).map(|i| problem.sample_gradient(i, x)).collect())
        .collect();
    let full: Vec<Vec<f64>> = probes.iter().map(|x| problem.gradient(x)).collect();
    let mut per_sample = vec![0.0_f64; n];
    let mut mean = 0.0_f64;
    let mut pairs = 0;
    for a in 0..probes.len() {
        for b in a + 1..probes.len() {
            let dist = norm2(&diff(&probes[a], &probes[b]));
            if dist == 0.0 {
                continue;
            }
            pairs += 1;
            for (i, l) in per_sample.iter_mut().enumerate() {
                *l = l.max(norm2(&diff(&grads[a][i], &grads[b][i])) / dist);
            }
            mean = mean.max(norm2(&diff(&full[a], &full[b])) / dist);
        }
    }
    SmoothnessEstimate {
        per_sample,
        mean,
        pairs,
    }
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Accepted iterations must satisfy
/// `2(1 − c0)/(L_max − c0) − 1e-9 ≤ a_k ≤ 1 + 1e-12`.
pub fn check_ak_bounds(trace: &[IterationRecord], l_max: f64, c0: f64) -> CheckResult {
    const NAME: &str = "check_ak_bounds";
    if !(l_max > c0) {
        return CheckResult::skipped(
            NAME,
            format!("requires L_max > c0, got L_max={l_max}, c0={c0}"),
        );
    }
    let lower = 2.0 * (1.0 - c0) / (l_max - c0);
    let accepted: Vec<f64> = trace
        .iter()
        .filter(|r| r.accepted())
        .filter_map(|r| r.a)
        .collect();
    if accepted.is_empty() {
        return CheckResult::vacuous(NAME, "no accepted iterations");
    }
    let a_min = accepted.iter().copied().fold(f64::INFINITY, f64::min);
    let a_max = accepted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Report whichever side is tighter.
    let low_margin = a_min - (lower - 1e-9);
    let high_margin = (1.0 + 1e-12) - a_max;
    let violations = accepted
        .iter()
        .filter(|&&a| a < lower - 1e-9 || a > 1.0 + 1e-12)
        .count();
    let result = if low_margin <= high_margin {
        CheckResult::compare(NAME, lower - 1e-9, a_min, accepted.len())
    } else {
        CheckResult::compare(NAME, a_max, 1.0 + 1e-12, accepted.len())
    };
    result.with_constant("L_max", l_max).with_detail(format!(
        "{violations} of {} accepted steps outside [{lower:e}, 1]",
        accepted.len()
    ))
}

/// Accepted single-sample iterations must satisfy
/// `a_k < 2(1 − c0)/(L_i − c0)`.
///
/// For a quadratic component whose curvature along `g` equals its
/// smoothness constant (least squares rows), the ratio is exactly
/// `(2 − a L_i)/(2 − a)`, so acceptance is equivalent to this cap.
pub fn check_accepted_step_cap(
    trace: &[IterationRecord],
    sample_smoothness: &[f64],
    c0: f64,
) -> CheckResult {
    const NAME: &str = "check_accepted_step_cap";
    let mut worst: Option<(f64, f64)> = None;
    let mut checked = 0;
    for rec in trace
        .iter()
        .filter(|r| r.accepted() && r.samples.len() == 1)
    {
        let l = sample_smoothness[rec.sample_index()];
        let Some(a) = rec.a else { continue };
        if l <= c0 {
            continue;
        }
        checked += 1;
        let cap = 2.0 * (1.0 - c0) / (l - c0);
        if worst.is_none_or(|(wa, wc)| cap - a < wc - wa) {
            worst = Some((a, cap));
        }
    }
    match worst {
        None => CheckResult::vacuous(NAME, "no accepted single-sample iterations with L_i > c0"),
        Some((a, cap)) => {
            let mut res = CheckResult::compare(NAME, a, cap, checked);
            if a == cap {
                res.status = CheckStatus::Fail;
            }
            res
        }
    }
}

/// Per-iteration `|m_k(p_k) − f(x_k + p_k)| / ‖p_k‖²`, where the model
/// includes the constant `f(x_k)` and `quad(x, g)` returns `gᵀH g` for the
/// model curvature at `x`. Requires the iterate `x_k` for each record.
///
/// The difference is formed from values of size `|f(x_k)|`, so on short
/// steps it is dominated by rounding. A floor of `8 ε` times the magnitudes
/// involved is subtracted before dividing by `‖p_k‖²`.
pub fn model_accuracy_ratios<P: FiniteSum + ?Sized>(
    problem: &P,
    trace: &[IterationRecord],
    iterates: &[Vec<f64>],
    quad: impl Fn(&[f64], &[f64]) -> f64,
) -> Vec<f64> {
    trace
        .iter()
        .zip(iterates)
        .filter_map(|(rec, x)| {
            let a = rec.a?;
            let g = problem.batch_gradient(&rec.samples, x);
            let gg = dot_unchecked(&g, &g);
            let f0 = problem.batch_value(&rec.samples, x);
            let model = f0 - a * gg + 0.5 * a * a * quad(x, &g);
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - a * gi).collect();
            let f1 = problem.batch_value(&rec.samples, &trial);
            let floor = 8.0 * f64::EPSILON * (f0.abs() + f1.abs() + a * gg + model.abs());
            Some(((model - f1).abs() - floor).max(0.0) / (a * a * gg))
        })
        .collect()
}

/// Estimated model-accuracy constant `M̂`; `None` without qualifying steps.
pub fn estimate_model_accuracy(ratios: &[f64]) -> Option<f64> {
    ratios.iter().copied().reduce(f64::max)
}

/// `M̂ ≤ bound` when a theoretical bound is known; otherwise `M̂` is only
/// reported.
pub fn check_model_accuracy(m_hat: Option<f64>, bound: Option<f64>) -> CheckResult {
    const NAME: &str = "check_model_accuracy";
    let Some(m_hat) = m_hat else {
        return CheckResult::vacuous(NAME, "no stored iterates to replay");
    };
    match bound {
        Some(b) => CheckResult::compare(NAME, m_hat, b, 1).with_constant("M_bound", b),
        None => CheckResult {
            lhs: m_hat,
            detail: "no theoretical bound supplied; M_hat reported only".into(),
            ..CheckResult::new(NAME, CheckStatus::Skipped)
        },
    }
}

/// `2 / (1 − c2)`.
pub fn r_const(c2: f64) -> f64 {
    2.0 / (1.0 - c2)
}

/// Length of the longest prefix whose sampled gradient norms are all at
/// least `eps`.
fn qualifying_prefix(trace: &[IterationRecord], eps: f64) -> usize {
    trace
        .iter()
        .position(|r| !(r.grad_norm >= eps))
        .unwrap_or(trace.len())
}

/// On the prefix where every `‖g_j‖ ≥ eps`: `Δ_k ≥ eps/(4 r M̂) − 1e-12`.
pub fn check_radius_lower_bound(
    trace: &[IterationRecord],
    eps: f64,
    m_hat: f64,
    c2: f64,
) -> CheckResult {
    const NAME: &str = "check_radius_lower_bound";
    if !(m_hat > 0.0) {
        return CheckResult::skipped(NAME, format!("requires M_hat > 0, got {m_hat}"));
    }
    let len = qualifying_prefix(trace, eps);
    if len == 0 {
        return CheckResult::vacuous(NAME, "empty prefix with ‖g‖ >= eps");
    }
    let bound = eps / (4.0 * r_const(c2) * m_hat) - 1e-12;
    let min_delta = trace[..len]
        .iter()
        .map(|r| r.delta_before)
        .fold(f64::INFINITY, f64::min);
    CheckResult::compare(NAME, bound, min_delta, len).with_constant("M_hat", m_hat)
}

/// On the prefix where every `‖g_j‖ ≥ eps`:
/// `n_fail / n_success ≤ log(4 r M̂ Δ̄ / eps) / log ν1 + 1`.
pub fn check_success_ratio(
    trace: &[IterationRecord],
    eps: f64,
    m_hat: f64,
    cfg: &TrustRegionConfig,
) -> CheckResult {
    const NAME: &str = "check_success_ratio";
    if !(m_hat > 0.0) {
        return CheckResult::skipped(NAME, format!("requires M_hat > 0, got {m_hat}"));
    }
    let len = qualifying_prefix(trace, eps);
    if len == 0 {
        return CheckResult::vacuous(NAME, "empty prefix with ‖g‖ >= eps");
    }
    let prefix = &trace[..len];
    let n_success = prefix.iter().filter(|r| r.accepted()).count();
    let n_fail = len - n_success;
    if n_success == 0 {
        return CheckResult::skipped(NAME, format!("no successful iteration among {len}"));
    }
    let ratio = n_fail as f64 / n_success as f64;
    let bound = (4.0 * r_const(cfg.c2) * m_hat * cfg.delta_max / eps).ln() / cfg.nu1.ln() + 1.0;
    CheckResult::compare(NAME, ratio, bound, len)
        .with_constant("M_hat", m_hat)
        .with_detail(format!("n_fail={n_fail} n_success={n_success}"))
}

/// `pred_red ≥ ½‖g‖ min(Δ, ‖g‖/‖H‖)` on every step, with a relative
/// rounding allowance of 1e-12. `norm_bound(k)` gives `‖H_k‖` for trace
/// position `k`.
pub fn check_cauchy_decrease(
    trace: &[IterationRecord],
    norm_bound: impl Fn(usize) -> f64,
) -> CheckResult {
    const NAME: &str = "check_cauchy_decrease";
    let mut worst: Option<(f64, f64)> = None;
    let mut checked = 0;
    for (k, rec) in trace.iter().enumerate() {
        let Some(pred) = rec.pred_red else { continue };
        checked += 1;
        let h = norm_bound(k);
        let rhs = 0.5 * rec.grad_norm * rec.delta_before.min(rec.grad_norm / h);
        // Compare in relative terms so tiny late steps weigh the same.
        let lhs = rhs * (1.0 - 1e-12);
        if worst.is_none_or(|(wl, wp)| pred / lhs < wp / wl) {
            worst = Some((lhs, pred));
        }
    }
    match worst {
        None => CheckResult::vacuous(NAME, "no steps taken"),
        Some((lhs, pred)) => CheckResult::compare(NAME, lhs, pred, checked),
    }
}

/// `‖c(x)‖ ≤ (eps + Ĝ)/(μ σ̂_min) + 1e-12` at a final iterate with
/// `‖∇φ‖ ≤ eps`.
pub fn check_feasibility_bound(
    kkt: &KktResidual,
    mu: f64,
    g_hat: f64,
    sigma_min_hat: Option<f64>,
    eps: f64,
) -> CheckResult {
    const NAME: &str = "check_feasibility_bound";
    if kkt.stationarity > eps {
        return CheckResult::skipped(
            NAME,
            format!(
                "precondition not met: stationarity {:e} > eps {eps:e}",
                kkt.stationarity
            ),
        );
    }
    let sigma = match sigma_min_hat {
        Some(s) if s > 0.0 => s,
        _ => {
            return CheckResult::skipped(
                NAME,
                "smallest Jacobian singular value is zero (LICQ fails)",
            )
        }
    };
    let bound = (eps + g_hat) / (mu * sigma) + 1e-12;
    CheckResult::compare(NAME, kkt.feasibility, bound, 1)
        .with_constant("sigma_min_hat", sigma)
        .with_detail(format!("G_hat={g_hat:e}"))
}

/// Estimated constants and check results for one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsReport {
    pub rho_hat: Option<f64>,
    pub tau_hat: Option<f64>,
    pub l_hat: Option<SmoothnessEstimate>,
    pub m_hat: Option<f64>,
    pub r_const: Option<f64>,
    pub sigma_min_hat: Option<f64>,
    pub g_hat: Option<f64>,
    pub c_c_hat: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl DiagnosticsReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.failed())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}
