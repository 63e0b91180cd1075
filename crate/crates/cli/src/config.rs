//! Experiment configuration: a JSON document, optionally overridden by
//! command-line flags, validated in full before any sampling starts.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BiasSweep,
    MseSweep,
    RateScan,
    ModeCompare,
    Tune,
    Sample,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BiasSweep => "bias-sweep",
            Experiment::MseSweep => "mse-sweep",
            Experiment::RateScan => "rate-scan",
            Experiment::ModeCompare => "mode-compare",
            Experiment::Tune => "tune",
            Experiment::Sample => "sample",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tolerance. JSON has no infinity, so `"inf"` stands for the accept-all
/// sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Serialize for Tolerance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Tolerance {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Tolerance(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Tolerance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "+inf" => Ok(Tolerance(f64::INFINITY)),
            t => t
                .parse::<f64>()
                .map(Tolerance)
                .map_err(|_| format!("not a tolerance: {s:?}")),
        }
    }
}

/// Test function whose posterior expectation is estimated: the indicator of
/// `[lo, hi]`, written `[lo, hi]`, or the constant `"one"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    Indicator { lo: f64, hi: f64 },
    One,
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction::Indicator { lo: -0.5, hi: 0.5 }
    }
}

impl Serialize for TestFunction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            TestFunction::Indicator { lo, hi } => [lo, hi].serialize(s),
            TestFunction::One => s.serialize_str("one"),
        }
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bounds([f64; 2]),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Bounds([lo, hi]) => Ok(TestFunction::Indicator { lo, hi }),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "one" {
            return Ok(TestFunction::One);
        }
        let parts: Vec<&str> = s
            .trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .collect();
        match parts.as_slice() {
            [lo, hi] => {
                let lo = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
                let hi = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
                Ok(TestFunction::Indicator { lo, hi })
            }
            _ => Err(format!("expected \"one\" or \"lo,hi\", got {s:?}")),
        }
    }
}

/// Geometric tolerance grid from `from` to `to` with `points` entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRule {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl DeltaRule {
    pub fn grid(&self) -> Vec<f64> {
        abc_rates_core::analysis::geometric_levels(self.from, self.to / self.from, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModelConfig {
    pub a: f64,
    pub b: f64,
}

impl Default for CostModelConfig {
    fn default() -> Self {
        Self { a: 0.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub model: String,
    pub s_star: Vec<f64>,
    pub h: TestFunction,
    pub deltas: Option<Vec<Tolerance>>,
    pub delta_rule: Option<DeltaRule>,
    pub delta: Option<Tolerance>,
    pub n: Option<u64>,
    pub n_targets: Option<Vec<u64>>,
    pub k: Option<usize>,
    #[serde(alias = "N_hat")]
    pub n_hat: Option<u64>,
    pub kappa: Option<f64>,
    pub cost_grid: Option<Vec<f64>>,
    pub grid_points: usize,
    pub grid_span: f64,
    pub center: Option<f64>,
    pub weighted: bool,
    pub fallback_c: Option<f64>,
    pub q: Option<u32>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub cost_model: CostModelConfig,
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            model: "toy".into(),
            s_star: vec![1.0, 1.0],
            h: TestFunction::default(),
            deltas: None,
            delta_rule: None,
            delta: None,
            n: None,
            n_targets: None,
            k: None,
            n_hat: None,
            kappa: None,
            cost_grid: None,
            grid_points: 12,
            grid_span: 3.0,
            center: None,
            weighted: false,
            fallback_c: None,
            q: None,
            alpha: None,
            beta: None,
            seed: 0,
            threads: None,
            cost_model: CostModelConfig::default(),
            output_path: PathBuf::from("results"),
        }
    }
}

/// One problem found by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Summary dimension of the built-in model.
const TOY_Q: u32 = 2;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Tolerance grid from `deltas`, else from `delta_rule`.
    pub fn delta_grid(&self) -> Option<Vec<f64>> {
        match (&self.deltas, &self.delta_rule) {
            (Some(ds), _) => Some(ds.iter().map(|d| d.0).collect()),
            (None, Some(rule)) => Some(rule.grid()),
            (None, None) => None,
        }
    }

    pub fn s_star_pair(&self) -> [f64; 2] {
        [
            self.s_star.first().copied().unwrap_or(f64::NAN),
            self.s_star.get(1).copied().unwrap_or(f64::NAN),
        ]
    }

    /// Every violation, in a fixed order. An empty list means the config is
    /// runnable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut bad = |field: &'static str, message: String| v.push(Violation { field, message });

        let Some(experiment) = self.experiment else {
            bad("experiment", "missing".into());
            return v;
        };

        if self.model != "toy" {
            bad(
                "model",
                format!("unknown model {:?}; only \"toy\" is built in", self.model),
            );
        }
        if self.s_star.len() != 2 || self.s_star.iter().any(|x| !x.is_finite()) {
            bad(
                "s_star",
                format!("need two finite values, got {:?}", self.s_star),
            );
        }
        if let TestFunction::Indicator { lo, hi } = self.h {
            if !(lo < hi) {
                bad("h", format!("need lo < hi, got [{lo}, {hi}]"));
            }
        }
        if self.threads == Some(0) {
            bad("threads", "must be at least 1".into());
        }
        let CostModelConfig { a, b } = self.cost_model;
        if !(a >= 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            bad(
                "cost_model",
                format!("need a >= 0 and b > 0, got a = {a}, b = {b}"),
            );
        }

        let need_k = |bad: &mut dyn FnMut(&'static str, String), min: usize| match self.k {
            None => bad("k", "missing".into()),
            Some(k) if k < min => bad("k", format!("must be at least {min}, got {k}")),
            _ => {}
        };
        let check_grid = |bad: &mut dyn FnMut(&'static str, String)| -> Option<Vec<f64>> {
            if let Some(rule) = &self.delta_rule {
                if !(rule.from > 0.0
                    && rule.to > 0.0
                    && rule.from.is_finite()
                    && rule.to.is_finite())
                {
                    bad(
                        "delta_rule",
                        "from and to must be positive and finite".into(),
                    );
                    return None;
                }
                if rule.points == 0 {
                    bad("delta_rule", "points must be at least 1".into());
                    return None;
                }
            }
            match self.delta_grid() {
                None => {
                    bad("deltas", "missing (give deltas or delta_rule)".into());
                    None
                }
                Some(g) if g.is_empty() => {
                    bad("deltas", "empty".into());
                    None
                }
                Some(g) => {
                    if let Some(d) = g.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                        bad(
                            "deltas",
                            format!("every delta must be positive and finite, got {d}"),
                        );
                        return None;
                    }
                    Some(g)
                }
            }
        };

        match experiment {
            Experiment::BiasSweep => {
                check_grid(&mut bad);
                match self.n {
                    None => bad("n", "missing".into()),
                    Some(0) => bad("n", "must be at least 1".into()),
                    _ => {}
                }
                need_k(&mut bad, 2);
            }
            Experiment::MseSweep => {
                let grid = check_grid(&mut bad);
                need_k(&mut bad, 2);
                match (self.n, self.kappa) {
                    (Some(_), Some(_)) => bad("n", "give either n or kappa, not both".into()),
                    (None, None) => bad("n", "missing (give n or kappa)".into()),
                    (Some(0), None) => bad("n", "must be at least 1".into()),
                    (None, Some(kappa)) => {
                        if !(kappa > 0.0 && kappa.is_finite()) {
                            bad("kappa", format!("must be positive, got {kappa}"));
                        } else if let Some(g) = &grid {
                            let dmin = g.iter().copied().fold(f64::INFINITY, f64::min);
                            if kappa * dmin.powi(TOY_Q as i32) < 1.0 {
                                bad("kappa", format!("kappa·δ^q < 1 at delta = {dmin}"));
                            }
                        }
                    }
                    _ => {}
                }
                if self.fit_applicable() && grid.as_ref().is_some_and(|g| g.len() < 3) {
                    bad(
                        "deltas",
                        "need at least 3 tolerances to fit the MSE curve".into(),
                    );
                }
            }
            Experiment::RateScan => {
                match &self.cost_grid {
                    None => bad("cost_grid", "missing".into()),
                    Some(g) if g.len() < 3 => bad(
                        "cost_grid",
                        format!("need at least 3 levels, got {}", g.len()),
                    ),
                    Some(g) if g.iter().any(|c| !(*c > 0.0 && c.is_finite())) => bad(
                        "cost_grid",
                        "every level must be positive and finite".into(),
                    ),
                    _ => {}
                }
                need_k(&mut bad, 2);
                if self.grid_points < 3 {
                    bad(
                        "grid_points",
                        format!("must be at least 3, got {}", self.grid_points),
                    );
                }
                if !(self.grid_span >= 1.0 && self.grid_span.is_finite()) {
                    bad(
                        "grid_span",
                        format!("must be at least 1, got {}", self.grid_span),
                    );
                }
                if let Some(c) = self.center {
                    if !(c > 0.0 && c.is_finite()) {
                        bad("center", format!("must be positive, got {c}"));
                    }
                }
            }
            Experiment::ModeCompare => {
                match self.delta {
                    None => bad("delta", "missing".into()),
                    Some(Tolerance(d)) if !(d > 0.0 && d.is_finite()) => {
                        bad("delta", format!("must be positive and finite, got {d}"))
                    }
                    _ => {}
                }
                match (&self.n_targets, self.n) {
                    (None, None) => bad("n_targets", "missing (give n_targets or n)".into()),
                    (Some(t), _) if t.is_empty() || t.contains(&0) => {
                        bad("n_targets", "need one or more positive targets".into())
                    }
                    (None, Some(0)) => bad("n", "must be at least 1".into()),
                    _ => {}
                }
                need_k(&mut bad, 100);
                if let Some(c) = self.fallback_c {
                    if !c.is_finite() {
                        bad("fallback_c", "must be finite".into());
                    }
                }
            }
            Experiment::Tune => {
                match self.q {
                    None => bad("q", "missing".into()),
                    Some(0) => bad("q", "must be at least 1".into()),
                    _ => {}
                }
                match (self.alpha, self.beta) {
                    (Some(_), Some(_)) => {
                        bad("alpha", "give either alpha or beta, not both".into())
                    }
                    (None, None) => bad("alpha", "missing (give alpha or beta)".into()),
                    (Some(x), None) if !(x > 0.0 && x.is_finite()) => {
                        bad("alpha", format!("must be positive, got {x}"))
                    }
                    (None, Some(x)) if !(x > 0.0 && x.is_finite()) => {
                        bad("beta", format!("must be positive, got {x}"))
                    }
                    _ => {}
                }
            }
            Experiment::Sample => {
                match self.delta {
                    None => bad("delta", "missing".into()),
                    Some(Tolerance(d)) if !(d > 0.0) => {
                        bad("delta", format!("must be positive, got {d}"))
                    }
                    _ => {}
                }
                match (self.n, self.n_hat) {
                    (Some(_), Some(_)) => bad("n", "give either n or n_hat, not both".into()),
                    (None, None) => bad("n", "missing (give n or n_hat)".into()),
                    (Some(0), None) => bad("n", "must be at least 1".into()),
                    (None, Some(0)) => bad("n_hat", "must be at least 1".into()),
                    _ => {}
                }
            }
        }
        v
    }

    /// An MSE sweep fits the curve only in constant-cost mode.
    pub fn fit_applicable(&self) -> bool {
        self.kappa.is_some()
    }
}
