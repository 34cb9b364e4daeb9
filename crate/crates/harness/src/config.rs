//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, keys namespaced with dots (`tr.delta0`), `#`
//! starts a comment. Floats are written back with 17 significant digits so
//! a config survives a write/parse cycle bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use strop_core::baselines::{AugLagParams, BaselineConfig, BaselineMethod, MultiplierUpdate};
use strop_core::penalty::PenaltyConfig;
use strop_core::problems::SpikedDataSpec;
use strop_core::trust_region::{self, TrustRegionConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_owned(),
            reason: reason.into(),
        }
    }

    /// Re-keys a solver validation error under the config namespace.
    fn from_core(prefix: &str, err: trust_region::ConfigError) -> Self {
        ConfigError::Invalid {
            key: format!("{prefix}.{}", err.key),
            reason: err.reason,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "problem.family",
    "problem.n",
    "problem.d",
    "problem.k",
    "problem.noise_sigma",
    "problem.seed",
    "problem.init",
    "problem.data",
    "method",
    "tr.delta0",
    "tr.delta_max",
    "tr.c0",
    "tr.c1",
    "tr.c2",
    "tr.nu1",
    "tr.nu2",
    "tr.g_tol",
    "tr.a_max",
    "tr.allow_nonstandard_nu2",
    "penalty.mu",
    "baseline.lr",
    "auglag.inner_lr",
    "auglag.mu0",
    "auglag.mu_growth",
    "auglag.inner_epochs",
    "auglag.lambda_damp",
    "auglag.update",
    "run.seed",
    "run.batch",
    "run.max_iter",
    "run.epochs",
    "run.eps",
    "run.eval_every",
    "run.store_full",
    "run.diagnostics",
];

/// Raw assignments in file order, keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: line.to_owned(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    text: line.to_owned(),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    key: key.to_owned(),
                });
            }
            if entries.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: idx + 1,
                    key: key.to_owned(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ConfigError::invalid(key, format!("`{v}`: {e}")))
            })
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?.ok_or_else(|| ConfigError::Missing {
            key: key.to_owned(),
        })
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    Zeros,
    Gaussian,
    Orthonormal,
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zeros" => Ok(Init::Zeros),
            "gaussian" => Ok(Init::Gaussian),
            "orthonormal" => Ok(Init::Orthonormal),
            _ => Err("expected zeros, gaussian or orthonormal".into()),
        }
    }
}

impl Init {
    fn name(self) -> &'static str {
        match self {
            Init::Zeros => "zeros",
            Init::Gaussian => "gaussian",
            Init::Orthonormal => "orthonormal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Interpolating least squares with `n` standard-normal rows in `R^d`.
    LeastSquares { n: usize, d: usize },
    /// Orthogonal subspace fitting on spiked data, generated from the
    /// problem seed or loaded from `data`.
    Subspace {
        d: usize,
        k: usize,
        n: usize,
        noise_sigma: f64,
        data: Option<PathBuf>,
    },
    /// `min ½‖x‖²` subject to `x₁ = 1` in `R²`.
    ToyEquality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    pub seed: u64,
    pub init: Init,
}

impl ProblemSpec {
    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::LeastSquares { .. } => "least_squares",
            Family::Subspace { .. } => "subspace",
            Family::ToyEquality => "toy_equality",
        }
    }

    pub fn num_samples(&self) -> usize {
        match self.family {
            Family::LeastSquares { n, .. } | Family::Subspace { n, .. } => n,
            Family::ToyEquality => 1,
        }
    }

    pub fn spiked(&self) -> Option<SpikedDataSpec> {
        match self.family {
            Family::Subspace {
                d,
                k,
                n,
                noise_sigma,
                ..
            } => Some(SpikedDataSpec {
                d,
                k,
                n,
                noise_sigma,
                seed: self.seed,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Str(TrustRegionConfig),
    StrPenalty(PenaltyConfig),
    Baseline(BaselineConfig),
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Str(_) => "str",
            MethodSpec::StrPenalty(_) => "str_penalty",
            MethodSpec::Baseline(b) => b.method.name(),
        }
    }

    pub fn batch(&self) -> usize {
        match self {
            MethodSpec::Str(tr) => tr.batch,
            MethodSpec::StrPenalty(p) => p.tr.batch,
            MethodSpec::Baseline(b) => b.batch,
        }
    }

    pub fn trust_region(&self) -> Option<&TrustRegionConfig> {
        match self {
            MethodSpec::Str(tr) => Some(tr),
            MethodSpec::StrPenalty(p) => Some(&p.tr),
            MethodSpec::Baseline(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(usize),
    Epochs(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunControls {
    pub seed: u64,
    pub budget: Budget,
    /// Tolerance on the deterministic stopping measure (`0` runs the full
    /// budget).
    pub eps: f64,
    pub eval_every: Option<usize>,
    pub store_full: bool,
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub method: MethodSpec,
    pub run: RunControls,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        text.parse()
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let problem = parse_problem(raw)?;
        let run = parse_run(raw)?;
        let method = parse_method(raw, &run)?;
        Ok(Self {
            problem,
            method,
            run,
        })
    }

    /// Iteration budget for methods that step once per iteration.
    pub fn max_iter(&self) -> usize {
        match self.run.budget {
            Budget::Iterations(m) => m,
            Budget::Epochs(e) => {
                e * trust_region::iterations_per_epoch(
                    self.problem.num_samples(),
                    self.method.batch(),
                )
            }
        }
    }

    /// Epoch budget, rounding a partial epoch up.
    pub fn epochs(&self) -> usize {
        match self.run.budget {
            Budget::Epochs(e) => e,
            Budget::Iterations(m) => m.div_ceil(trust_region::iterations_per_epoch(
                self.problem.num_samples(),
                self.method.batch(),
            )),
        }
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        let p = &self.problem;
        put("problem.family", p.family_name().into());
        match &p.family {
            Family::LeastSquares { n, d } => {
                put("problem.n", n.to_string());
                put("problem.d", d.to_string());
            }
            Family::Subspace {
                d,
                k,
                n,
                noise_sigma,
                data,
            } => {
                put("problem.d", d.to_string());
                put("problem.k", k.to_string());
                put("problem.n", n.to_string());
                put("problem.noise_sigma", fmt_f64(*noise_sigma));
                if let Some(path) = data {
                    put("problem.data", path.display().to_string());
                }
            }
            Family::ToyEquality => {}
        }
        put("problem.seed", p.seed.to_string());
        put("problem.init", p.init.name().into());
        put("method", self.method.name().into());
        let tr = self.method.trust_region();
        if let Some(tr) = tr {
            put("tr.delta0", fmt_f64(tr.delta0));
            put("tr.delta_max", fmt_f64(tr.delta_max));
            put("tr.c0", fmt_f64(tr.c0));
            put("tr.c1", fmt_f64(tr.c1));
            put("tr.c2", fmt_f64(tr.c2));
            put("tr.nu1", fmt_f64(tr.nu1));
            put("tr.nu2", fmt_f64(tr.nu2));
            put("tr.g_tol", fmt_f64(tr.g_tol));
            if let Some(a) = tr.a_max {
                put("tr.a_max", fmt_f64(a));
            }
            put(
                "tr.allow_nonstandard_nu2",
                tr.allow_nonstandard_nu2.to_string(),
            );
        }
        match &self.method {
            MethodSpec::StrPenalty(pc) => put("penalty.mu", fmt_f64(pc.mu)),
            MethodSpec::Baseline(b) => {
                put("baseline.lr", fmt_f64(b.lr));
                let a = &b.auglag;
                put("auglag.inner_lr", fmt_f64(a.inner_lr));
                put("auglag.mu0", fmt_f64(a.mu0));
                put("auglag.mu_growth", fmt_f64(a.mu_growth));
                put("auglag.inner_epochs", a.inner_epochs.to_string());
                put("auglag.lambda_damp", fmt_f64(a.lambda_damp));
                let update = match a.update {
                    MultiplierUpdate::DampedIncrement => "increment",
                    MultiplierUpdate::DampedMultiplier => "multiplier",
                };
                put("auglag.update", update.into());
            }
            MethodSpec::Str(_) => {}
        }
        let r = &self.run;
        put("run.seed", r.seed.to_string());
        put("run.batch", self.method.batch().to_string());
        match r.budget {
            Budget::Iterations(m) => put("run.max_iter", m.to_string()),
            Budget::Epochs(e) => put("run.epochs", e.to_string()),
        }
        put("run.eps", fmt_f64(r.eps));
        if let Some(e) = r.eval_every {
            put("run.eval_every", e.to_string());
        }
        put("run.store_full", r.store_full.to_string());
        put("run.diagnostics", r.diagnostics.to_string());
        out
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        Self::from_raw(&RawConfig::parse(text)?)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_problem(raw: &RawConfig) -> Result<ProblemSpec, ConfigError> {
    let family_name: String = raw.required("problem.family")?;
    let family = match family_name.as_str() {
        "least_squares" => Family::LeastSquares {
            n: raw.required("problem.n")?,
            d: raw.required("problem.d")?,
        },
        "subspace" => Family::Subspace {
            d: raw.required("problem.d")?,
            k: raw.required("problem.k")?,
            n: raw.required("problem.n")?,
            noise_sigma: raw.or("problem.noise_sigma", SpikedDataSpec::DEFAULT_NOISE_SIGMA)?,
            data: raw.get("problem.data").map(PathBuf::from),
        },
        "toy_equality" => Family::ToyEquality,
        other => {
            return Err(ConfigError::invalid(
                "problem.family",
                format!("`{other}`: expected least_squares, subspace or toy_equality"),
            ))
        }
    };
    let default_init = match family {
        Family::Subspace { .. } => Init::Orthonormal,
        _ => Init::Zeros,
    };
    let spec = ProblemSpec {
        family,
        seed: raw.or("problem.seed", 0)?,
        init: raw.or("problem.init", default_init)?,
    };
    if let Some(s) = spec.spiked() {
        s.validate()
            .map_err(|e| ConfigError::invalid("problem", e.to_string()))?;
    }
    if let Family::LeastSquares { n, d } = spec.family {
        if n == 0 || d <= n {
            return Err(ConfigError::invalid(
                "problem.d",
                format!("needs d > n >= 1, got n={n}, d={d}"),
            ));
        }
    }
    Ok(spec)
}

fn parse_run(raw: &RawConfig) -> Result<RunControls, ConfigError> {
    let budget = match (raw.parsed("run.max_iter")?, raw.parsed("run.epochs")?) {
        (Some(m), None) => Budget::Iterations(m),
        (None, Some(e)) => Budget::Epochs(e),
        (None, None) => {
            return Err(ConfigError::Missing {
                key: "run.epochs".into(),
            })
        }
        (Some(_), Some(_)) => {
            return Err(ConfigError::invalid(
                "run.max_iter",
                "give either run.max_iter or run.epochs, not both",
            ))
        }
    };
    let eps: f64 = raw.or("run.eps", 0.0)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(ConfigError::invalid(
            "run.eps",
            format!("must be finite and >= 0, got {eps}"),
        ));
    }
    let eval_every: Option<usize> = raw.parsed("run.eval_every")?;
    if eval_every == Some(0) {
        return Err(ConfigError::invalid("run.eval_every", "must be >= 1"));
    }
    Ok(RunControls {
        seed: raw.or("run.seed", 0)?,
        budget,
        eps,
        eval_every,
        store_full: raw.or("run.store_full", false)?,
        diagnostics: raw.or("run.diagnostics", false)?,
    })
}

fn parse_trust_region(raw: &RawConfig, batch: usize) -> Result<TrustRegionConfig, ConfigError> {
    let defaults = TrustRegionConfig::default();
    let cfg = TrustRegionConfig {
        delta0: raw.required("tr.delta0")?,
        delta_max: raw.required("tr.delta_max")?,
        c0: raw.required("tr.c0")?,
        c1: raw.required("tr.c1")?,
        c2: raw.required("tr.c2")?,
        nu1: raw.required("tr.nu1")?,
        nu2: raw.required("tr.nu2")?,
        g_tol: raw.or("tr.g_tol", defaults.g_tol)?,
        max_iter: 0,
        a_max: raw.parsed("tr.a_max")?,
        allow_nonstandard_nu2: raw.or("tr.allow_nonstandard_nu2", false)?,
        batch,
    };
    cfg.validate()
        .map_err(|e| ConfigError::from_core("tr", e))?;
    Ok(cfg)
}

fn parse_method(raw: &RawConfig, run: &RunControls) -> Result<MethodSpec, ConfigError> {
    let name: String = raw.required("method")?;
    let baseline = match name.as_str() {
        "str" => {
            let tr = parse_trust_region(raw, raw.or("run.batch", 1)?)?;
            return Ok(MethodSpec::Str(tr));
        }
        "str_penalty" => {
            let tr = parse_trust_region(raw, raw.or("run.batch", 1)?)?;
            let mu = match raw.get("penalty.mu") {
                Some("auto") if run.eps > 0.0 => 1.0 / run.eps,
                Some("auto") => {
                    return Err(ConfigError::invalid(
                        "penalty.mu",
                        "`auto` sets μ = 1/run.eps and needs run.eps > 0",
                    ))
                }
                _ => raw.required("penalty.mu")?,
            };
            let cfg = PenaltyConfig { mu, tr };
            cfg.validate()
                .map_err(|e| ConfigError::from_core("penalty", e))?;
            return Ok(MethodSpec::StrPenalty(cfg));
        }
        "sgd" => BaselineMethod::Sgd,
        "sgd_proj" => BaselineMethod::SgdProj,
        "riemannian_gd" => BaselineMethod::RiemannianGd,
        "auglag" => BaselineMethod::AugLag,
        other => {
            return Err(ConfigError::invalid(
                "method",
                format!(
                    "`{other}`: expected str, str_penalty, sgd, sgd_proj, riemannian_gd or auglag"
                ),
            ))
        }
    };
    let mut cfg = BaselineConfig::new(baseline);
    cfg.lr = raw.or("baseline.lr", cfg.lr)?;
    cfg.batch = raw.or("run.batch", cfg.batch)?;
    let d = AugLagParams::default();
    let update = match raw.get("auglag.update") {
        None | Some("increment") => MultiplierUpdate::DampedIncrement,
        Some("multiplier") => MultiplierUpdate::DampedMultiplier,
        Some(other) => {
            return Err(ConfigError::invalid(
                "auglag.update",
                format!("`{other}`: expected increment or multiplier"),
            ))
        }
    };
    cfg.auglag = AugLagParams {
        inner_lr: raw.or("auglag.inner_lr", d.inner_lr)?,
        mu0: raw.or("auglag.mu0", d.mu0)?,
        mu_growth: raw.or("auglag.mu_growth", d.mu_growth)?,
        inner_epochs: raw.or("auglag.inner_epochs", d.inner_epochs)?,
        lambda_damp: raw.or("auglag.lambda_damp", d.lambda_damp)?,
        update,
    };
    cfg.validate().map_err(|e| {
        let prefix = if cfg.method == BaselineMethod::AugLag && !matches!(e.key, "lr" | "batch") {
            "auglag"
        } else if e.key == "batch" {
            "run"
        } else {
            "baseline"
        };
        ConfigError::from_core(prefix, e)
    })?;
    Ok(MethodSpec::Baseline(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    const STR_CFG: &str = "\
# least squares with the reference radius settings
problem.family = least_squares
problem.n = 50
problem.d = 200
method = str
tr.delta0 = 8
tr.delta_max = 80
tr.c0 = 0.05
tr.c1 = 0.1
tr.c2 = 0.5
tr.nu1 = 2
tr.nu2 = 5   # expansion
run.max_iter = 10000
run.eps = 1e-6
";

    fn err_key(text: &str) -> String {
        match text.parse::<ExperimentConfig>().unwrap_err() {
            ConfigError::Invalid { key, .. }
            | ConfigError::Missing { key }
            | ConfigError::UnknownKey { key } => key,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn parses_comments_and_namespaces() {
        let cfg: ExperimentConfig = STR_CFG.parse().unwrap();
        assert_eq!(cfg.problem.family, Family::LeastSquares { n: 50, d: 200 });
        assert_eq!(cfg.problem.init, Init::Zeros);
        let MethodSpec::Str(tr) = &cfg.method else {
            panic!("expected str")
        };
        assert_eq!(tr.nu2, 5.0);
        assert_eq!(tr.batch, 1);
        assert_eq!(cfg.max_iter(), 10_000);
        assert_eq!(cfg.epochs(), 200);
    }

    #[test]
    fn text_form_round_trips_bit_exactly() {
        let text = STR_CFG.replace("tr.delta0 = 8", "tr.delta0 = 7.1234567890123456789");
        let cfg: ExperimentConfig = text.parse().unwrap();
        let again: ExperimentConfig = cfg.to_text().parse().unwrap();
        assert_eq!(cfg, again);
        let MethodSpec::Str(tr) = &again.method else {
            panic!()
        };
        let expected: f64 = "7.1234567890123456789".parse().unwrap();
        assert_eq!(tr.delta0.to_bits(), expected.to_bits());
    }

    #[test]
    fn missing_radius_names_the_key() {
        let text = STR_CFG.replace("tr.delta0 = 8\n", "");
        let err = text.parse::<ExperimentConfig>().unwrap_err();
        assert!(err.to_string().contains("delta0"), "{err}");
    }

    #[test]
    fn shrinking_expansion_requires_flag() {
        let text = STR_CFG.replace("tr.nu2 = 5", "tr.nu2 = 0.5");
        let err = text.parse::<ExperimentConfig>().unwrap_err();
        assert!(err.to_string().contains("ν₁, ν₂ > 1"), "{err}");
        assert_eq!(err_key(&text), "tr.nu2");
        let allowed = format!("{text}tr.allow_nonstandard_nu2 = true\n");
        assert!(allowed.parse::<ExperimentConfig>().is_ok());
    }

    #[test]
    fn bad_values_name_their_keys() {
        assert_eq!(
            err_key(&STR_CFG.replace("tr.c1 = 0.1", "tr.c1 = abc")),
            "tr.c1"
        );
        assert_eq!(
            err_key(&STR_CFG.replace("tr.c1 = 0.1", "tr.c1 = 0.01")),
            "tr.c1"
        );
        assert_eq!(err_key(&format!("{STR_CFG}tr.bogus = 1\n")), "tr.bogus");
        assert_eq!(
            err_key(&STR_CFG.replace("run.max_iter = 10000\n", "")),
            "run.epochs"
        );
        assert_eq!(
            err_key(&STR_CFG.replace("method = str", "method = newton")),
            "method"
        );
    }

    #[test]
    fn syntax_and_duplicates_report_lines() {
        let err = RawConfig::parse("method = str\nmethod = sgd\n").unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 2, .. }));
        let err = RawConfig::parse("\n\nmethod str\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 3, .. }));
    }

    #[test]
    fn penalty_mu_auto_uses_tolerance() {
        let text = STR_CFG.replace("method = str", "method = str_penalty") + "penalty.mu = auto\n";
        let cfg: ExperimentConfig = text.parse().unwrap();
        let MethodSpec::StrPenalty(p) = cfg.method else {
            panic!()
        };
        assert_eq!(p.mu, 1e6);
    }

    #[test]
    fn baseline_defaults_and_epoch_budget() {
        let text = "problem.family = subspace\nproblem.d = 20\nproblem.k = 3\nproblem.n = 100\n\
                    method = auglag\nrun.epochs = 30\nauglag.update = multiplier\n";
        let cfg: ExperimentConfig = text.parse().unwrap();
        let MethodSpec::Baseline(b) = &cfg.method else {
            panic!()
        };
        assert_eq!(b.batch, 32);
        assert_eq!(b.auglag.update, MultiplierUpdate::DampedMultiplier);
        assert_eq!(cfg.problem.init, Init::Orthonormal);
        assert_eq!(cfg.max_iter(), 30 * 4);
        assert_eq!(cfg.to_text().parse::<ExperimentConfig>().unwrap(), cfg);
    }
}
