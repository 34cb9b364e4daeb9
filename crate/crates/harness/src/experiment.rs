//! Runs one configured experiment in memory.

use std::time::Instant;

use log::{debug, info};
use strop_core::baselines::{
    auglag_run, run_first_order_baseline, BaselineConfig, BaselineMethod, BaselineRun, Feasibility,
};
use strop_core::diagnostics::DiagnosticsReport;
use strop_core::penalty::{run_str_penalty_observed, PenalizedOracle, PenaltyConfig};
use strop_core::trust_region::{
    iterations_per_epoch, run_str_observed, IterationRecord, RunResult, StopRule, Termination,
    TrustRegionConfig,
};

use crate::config::{ExperimentConfig, MethodSpec};
use crate::error::HarnessError;
use crate::instance::Instance;
use crate::output::{EpochRow, Summary};
use crate::replay::{diagnose, summarize, StoredPath};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub method: String,
    /// Per-iteration records (trust-region methods only).
    pub trace: Vec<IterationRecord>,
    /// Iterates before each traced step, kept when storage or diagnostics
    /// were requested.
    pub points: Option<Vec<Vec<f64>>>,
    pub x: Vec<f64>,
    pub epochs: Vec<EpochRow>,
    pub summary: Summary,
    pub report: Option<DiagnosticsReport>,
    /// Set when a NaN or infinity was detected; `trace` and `epochs` are
    /// truncated before the first bad entry.
    pub nonfinite: Option<String>,
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIter => "max_iter",
        Termination::Stalled => "stalled",
        Termination::NonFinite => "non_finite",
    }
}

fn record_is_finite(rec: &IterationRecord) -> bool {
    let opts = [
        rec.a,
        rec.r,
        rec.pred_red,
        rec.actual_red,
        rec.full_grad_norm,
        rec.feasibility,
        rec.stationarity,
    ];
    [
        rec.grad_norm,
        rec.delta_before,
        rec.delta_after,
        rec.obj_sample,
    ]
    .iter()
    .all(|v| v.is_finite())
        && opts.iter().flatten().all(|v| v.is_finite())
}

fn row_is_finite(row: &EpochRow) -> bool {
    row.objective_total.is_finite() && row.feasibility.is_none_or(f64::is_finite)
}

/// Runs `config` on `instance` (which must have been built from
/// `config.problem`).
pub fn execute(config: &ExperimentConfig, instance: &Instance) -> Result<RunOutput, HarnessError> {
    let start = Instant::now();
    let x0 = instance.initial_point(&config.problem)?;
    info!(
        "running {} on {} (seed {}, {} samples, dim {})",
        config.method.name(),
        config.problem.family_name(),
        config.run.seed,
        instance.objective().num_samples(),
        instance.objective().dim()
    );
    let mut out = match &config.method {
        MethodSpec::Str(_) | MethodSpec::StrPenalty(_) => run_trust_region(config, instance, x0)?,
        MethodSpec::Baseline(b) => run_baseline(config, b, instance, x0)?,
    };
    out.summary
        .push_f64("wall_time_s", start.elapsed().as_secs_f64());
    info!(
        "{} finished in {:.3} s",
        out.method,
        start.elapsed().as_secs_f64()
    );
    Ok(out)
}

fn epoch_row(instance: &Instance, method: &str, epoch: usize, x: &[f64]) -> EpochRow {
    EpochRow {
        epoch,
        method: method.to_owned(),
        objective_total: instance.objective_total(x),
        feasibility: instance.feasibility(x),
    }
}

fn run_trust_region(
    config: &ExperimentConfig,
    instance: &Instance,
    x0: Vec<f64>,
) -> Result<RunOutput, HarnessError> {
    let method = config.method.name();
    let n = instance.objective().num_samples();
    let per_epoch = iterations_per_epoch(n, config.method.batch());
    let keep = config.run.store_full || config.run.diagnostics;
    let stop = StopRule {
        grad_tol: config.run.eps,
        eval_every: config.run.eval_every,
    };
    let mut epochs = Vec::new();
    let mut points = Vec::new();
    let observer = |x: &[f64], rec: &IterationRecord| {
        if rec.k.is_multiple_of(per_epoch) {
            epochs.push(epoch_row(instance, method, rec.k / per_epoch, x));
        }
        if keep {
            points.push(x.to_vec());
        }
        debug!(
            "k={} |g|={:e} delta={:e} outcome={:?}",
            rec.k, rec.grad_norm, rec.delta_before, rec.outcome
        );
    };
    let invalid = |e: strop_core::trust_region::ConfigError| {
        HarnessError::invalid(&format!("tr.{}", e.key), e.reason)
    };
    let mut summary = Summary::default();
    let run: RunResult = match &config.method {
        MethodSpec::Str(tr) => {
            let tr = TrustRegionConfig {
                max_iter: config.max_iter(),
                ..tr.clone()
            };
            let res = run_str_observed(
                instance.objective(),
                &tr,
                x0,
                config.run.seed,
                stop,
                observer,
            )
            .map_err(invalid)?;
            summary.push("method", method);
            summary.push("family", config.problem.family_name());
            summary.push("termination", termination_name(res.termination));
            summary.push_f64("final_grad_norm", res.final_measure);
            res
        }
        MethodSpec::StrPenalty(pc) => {
            let pc = PenaltyConfig {
                mu: pc.mu,
                tr: TrustRegionConfig {
                    max_iter: config.max_iter(),
                    ..pc.tr.clone()
                },
            };
            let oracle = PenalizedOracle::new(instance.objective(), instance.constraints(), pc.mu)?;
            let res = run_str_penalty_observed(&oracle, &pc, x0, config.run.seed, stop, observer)
                .map_err(invalid)?;
            summary.push("method", method);
            summary.push("family", config.problem.family_name());
            summary.push("termination", termination_name(res.run.termination));
            summary.push_f64("mu", pc.mu);
            summary.push_f64("final_grad_norm", res.kkt.objective_grad_norm);
            summary.push_f64("final_stationarity", res.kkt.stationarity);
            if instance.is_constrained() {
                summary.push_f64("final_feasibility", res.kkt.feasibility);
                summary.push_f64(
                    "final_multiplier_norm",
                    strop_core::linops::norm2(&res.kkt.multiplier),
                );
            }
            res.run
        }
        MethodSpec::Baseline(_) => unreachable!("baselines are dispatched separately"),
    };
    let state = &run.state;
    let final_epoch = state.k.div_ceil(per_epoch);
    if epochs.last().is_none_or(|r| r.epoch != final_epoch) {
        epochs.push(epoch_row(instance, method, final_epoch, &state.x));
    }

    let mut trace = run.trace;
    let mut nonfinite = None;
    if let Some(bad) = trace.iter().position(|r| !record_is_finite(r)) {
        nonfinite = Some(format!("non-finite value in iteration {}", trace[bad].k));
        trace.truncate(bad);
        points.truncate(bad);
    } else if run.termination == Termination::NonFinite || !state.x.iter().all(|v| v.is_finite()) {
        nonfinite = Some(format!("non-finite iterate after iteration {}", state.k));
    }
    if let Some(bad) = epochs.iter().position(|r| !row_is_finite(r)) {
        nonfinite
            .get_or_insert_with(|| format!("non-finite objective at epoch {}", epochs[bad].epoch));
        epochs.truncate(bad);
    }

    if let Some(f) = instance.feasibility(&state.x) {
        summary.push_f64("final_family_feasibility", f);
    }
    summary.push_f64("final_objective_total", instance.objective_total(&state.x));
    summary.push_f64("final_delta", state.delta);
    summary.push("iterations", state.k);
    summary.push("n_success", state.n_success);
    summary.push("n_fail", state.n_fail);
    summary.push("oracle_calls", state.grad_calls);
    summary.push("value_calls", state.value_calls);
    summary.push("deterministic_evals", state.full_evals);

    let report = if config.run.diagnostics && nonfinite.is_none() {
        let path = StoredPath {
            points: &points,
            final_x: &state.x,
        };
        let report = diagnose(instance, config, &trace, Some(path));
        if let Some(r) = &report {
            summarize(r, &mut summary);
        }
        report
    } else {
        None
    };
    Ok(RunOutput {
        method: method.to_owned(),
        trace,
        points: keep.then_some(points),
        x: state.x.clone(),
        epochs,
        summary,
        report,
        nonfinite,
    })
}

fn run_baseline(
    config: &ExperimentConfig,
    cfg: &BaselineConfig,
    instance: &Instance,
    x0: Vec<f64>,
) -> Result<RunOutput, HarnessError> {
    let method = cfg.method.name();
    let feasibility = |x: &[f64]| instance.feasibility(x).unwrap_or(0.0);
    let feas: Option<Feasibility<'_>> = instance.is_constrained().then_some(&feasibility);
    let epochs = config.epochs();
    let run: BaselineRun = match cfg.method {
        BaselineMethod::AugLag => {
            if !instance.is_constrained() {
                return Err(HarnessError::invalid(
                    "method",
                    "auglag needs a constrained problem family",
                ));
            }
            let outer = epochs.div_ceil(cfg.auglag.inner_epochs);
            auglag_run(
                instance.objective(),
                instance.constraints(),
                cfg,
                x0,
                config.run.seed,
                outer,
                feas,
            )?
        }
        BaselineMethod::SgdProj | BaselineMethod::RiemannianGd if instance.rank().is_none() => {
            return Err(HarnessError::invalid(
                "method",
                format!("{method} needs the subspace problem family"),
            ));
        }
        _ => run_first_order_baseline(
            instance.objective(),
            cfg,
            instance.rank(),
            x0,
            config.run.seed,
            epochs,
            feas,
        )?,
    };
    let n = instance.objective().num_samples() as f64;
    let mut rows: Vec<EpochRow> = run
        .history
        .iter()
        .map(|h| EpochRow {
            epoch: h.epoch,
            method: method.to_owned(),
            objective_total: h.objective * n,
            feasibility: h.feasibility,
        })
        .collect();
    let mut nonfinite = None;
    if let Some(bad) = rows.iter().position(|r| !row_is_finite(r)) {
        nonfinite = Some(format!("non-finite objective at epoch {}", rows[bad].epoch));
        rows.truncate(bad);
    } else if !run.x.iter().all(|v| v.is_finite()) {
        nonfinite = Some("non-finite final iterate".to_owned());
    }

    let mut summary = Summary::default();
    summary.push("method", method);
    summary.push("family", config.problem.family_name());
    summary.push("epochs", run.history.last().map_or(0, |h| h.epoch));
    if nonfinite.is_none() {
        summary.push_f64(
            "final_grad_norm",
            strop_core::linops::norm2(&instance.objective().gradient(&run.x)),
        );
        summary.push_f64("final_objective_total", instance.objective_total(&run.x));
        if let Some(f) = instance.feasibility(&run.x) {
            summary.push_f64("final_family_feasibility", f);
        }
        if let Some(m) = run.max_feasibility {
            summary.push_f64("max_family_feasibility", m);
        }
        if let Some(l) = &run.multiplier {
            summary.push_f64("final_multiplier_norm", strop_core::linops::norm2(l));
        }
    }
    summary.push("iterations", run.iterations);
    summary.push("oracle_calls", run.grad_calls);
    summary.push("deterministic_evals", run.history.len());
    Ok(RunOutput {
        method: method.to_owned(),
        trace: Vec::new(),
        points: None,
        x: run.x,
        epochs: rows,
        summary,
        report: None,
        nonfinite,
    })
}
