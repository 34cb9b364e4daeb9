//! Diagnostics for trust-region traces, from a live run or from files.

use strop_core::diagnostics::{
    check_accepted_step_cap, check_ak_bounds, check_cauchy_decrease, check_feasibility_bound,
    check_model_accuracy, check_radius_lower_bound, check_success_ratio, estimate_model_accuracy,
    estimate_smoothness, model_accuracy_ratios, r_const, sgc_ratio, DiagnosticsReport,
};
use strop_core::linops::singular_values;
use strop_core::penalty::{kkt_residual, CurvatureModel, HessianModel, PenalizedOracle};
use strop_core::trust_region::IterationRecord;

use crate::config::{ExperimentConfig, MethodSpec};
use crate::instance::Instance;
use crate::output::Summary;

/// Tolerance used by the prefix checks when the run has no stopping
/// tolerance of its own.
pub const DEFAULT_CHECK_EPS: f64 = 1e-6;

/// Number of stored iterates used as probes for smoothness estimates.
const SMOOTHNESS_PROBES: usize = 8;

/// Iterates aligned with a trace: `points[j]` is the iterate before row `j`.
#[derive(Debug, Clone, Copy)]
pub struct StoredPath<'a> {
    pub points: &'a [Vec<f64>],
    pub final_x: &'a [f64],
}

/// Builds the full report for a trust-region trace. Checks that need stored
/// iterates are vacuous or omitted without them. Returns `None` for
/// baseline methods.
pub fn diagnose(
    instance: &Instance,
    config: &ExperimentConfig,
    trace: &[IterationRecord],
    path: Option<StoredPath<'_>>,
) -> Option<DiagnosticsReport> {
    let tr = config.method.trust_region()?;
    let mu = match &config.method {
        MethodSpec::StrPenalty(p) => p.mu,
        _ => 0.0,
    };
    let penalized = mu > 0.0 && instance.is_constrained();
    let eps = if config.run.eps > 0.0 {
        config.run.eps
    } else {
        DEFAULT_CHECK_EPS
    };
    let cons = instance.constraints();
    let oracle =
        PenalizedOracle::new(instance.objective(), cons, mu).expect("instance dimensions agree");
    let mut report = DiagnosticsReport {
        r_const: Some(r_const(tr.c2)),
        ..Default::default()
    };

    if let Some(p) = path {
        let x0 = p.points.first().map_or(p.final_x, Vec::as_slice);
        report.rho_hat = sgc_ratio(instance.objective(), x0, tr.g_tol).ok();
        if penalized {
            report.tau_hat = sgc_ratio(&oracle, x0, tr.g_tol).ok();
        }
        let stride = (p.points.len() / SMOOTHNESS_PROBES).max(1);
        let mut probes: Vec<Vec<f64>> = p
            .points
            .iter()
            .step_by(stride)
            .take(SMOOTHNESS_PROBES)
            .cloned()
            .collect();
        probes.push(p.final_x.to_vec());
        report.l_hat = Some(estimate_smoothness(&oracle, &probes));
    }

    let exact = if penalized {
        instance.penalized_sample_smoothness(mu)
    } else {
        instance.sample_smoothness()
    };
    if let Some(l) = &exact {
        let l_max = l.iter().copied().fold(0.0, f64::max);
        report.checks.push(check_ak_bounds(trace, l_max, tr.c0));
        report.checks.push(check_accepted_step_cap(trace, l, tr.c0));
    }

    // Model error is at most ½ max(L_i, 1) ‖p‖² for quadratic samples, so
    // `L_max` bounds the constant once it is at least one.
    let m_bound = instance
        .sample_smoothness()
        .map(|l| l.iter().copied().fold(1.0, f64::max));
    let quad = |x: &[f64], g: &[f64]| HessianModel::new(cons, x, mu).quad(g);
    report.m_hat = path.and_then(|p| {
        estimate_model_accuracy(&model_accuracy_ratios(&oracle, trace, p.points, quad))
    });
    report
        .checks
        .push(check_model_accuracy(report.m_hat, m_bound));

    if let Some(m) = report.m_hat.or(m_bound) {
        report
            .checks
            .push(check_radius_lower_bound(trace, eps, m, tr.c2));
        report.checks.push(check_success_ratio(trace, eps, m, tr));
    }

    if !penalized {
        report.checks.push(check_cauchy_decrease(trace, |_| 1.0));
    } else if let Some(p) = path {
        let bounds: Vec<f64> = p
            .points
            .iter()
            .map(|x| HessianModel::new(cons, x, mu).norm_bound())
            .collect();
        report
            .checks
            .push(check_cauchy_decrease(trace, |k| bounds[k]));
    }

    if penalized {
        if let Some(p) = path {
            let mut g_hat = 0.0_f64;
            let mut sigma_min = f64::INFINITY;
            let mut jac_norm = 0.0_f64;
            let checkpoints = trace
                .iter()
                .zip(p.points)
                .filter(|(r, _)| r.stationarity.is_some())
                .map(|(_, x)| x);
            for x in checkpoints
                .map(Vec::as_slice)
                .chain(std::iter::once(p.final_x))
            {
                g_hat = g_hat.max(kkt_residual(&oracle, x).objective_grad_norm);
                let sv = singular_values(&cons.jacobian(x));
                sigma_min = sigma_min.min(sv.last().copied().unwrap_or(0.0));
                jac_norm = jac_norm.max(sv.first().copied().unwrap_or(0.0));
            }
            let kkt = kkt_residual(&oracle, p.final_x);
            report.g_hat = Some(g_hat);
            report.sigma_min_hat = Some(sigma_min);
            report.c_c_hat = Some(jac_norm);
            report.checks.push(check_feasibility_bound(
                &kkt,
                mu,
                g_hat,
                Some(sigma_min),
                eps,
            ));
        }
    }
    Some(report)
}

/// Appends the report to a summary as `diag.*` and `check.*` entries.
pub fn summarize(report: &DiagnosticsReport, summary: &mut Summary) {
    let constants = [
        ("diag.rho_hat", report.rho_hat),
        ("diag.tau_hat", report.tau_hat),
        ("diag.L_hat_mean", report.l_hat.as_ref().map(|l| l.mean)),
        (
            "diag.L_hat_max_sample",
            report.l_hat.as_ref().map(|l| l.max_sample()),
        ),
        ("diag.M_hat", report.m_hat),
        ("diag.r_const", report.r_const),
        ("diag.sigma_min_hat", report.sigma_min_hat),
        ("diag.G_hat", report.g_hat),
        ("diag.C_c_hat", report.c_c_hat),
    ];
    for (key, value) in constants {
        if let Some(v) = value {
            summary.push_f64(key, v);
        }
    }
    for check in &report.checks {
        let text = check.to_string();
        let body = text
            .split_once(": ")
            .map_or(text.as_str(), |(_, rest)| rest);
        summary.push(format!("check.{}", check.name), body);
    }
    summary.push("diag.passed", report.passed());
}
