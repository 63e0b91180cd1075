//! Dispatch from a validated configuration to the analysis routines, and the
//! tables each experiment produces.

use std::fmt::Write as _;

use abc_rates_core::analysis::{
    bias_sweep, constant_cost_schedule, fit_mse_curve, fixed_mode_mse_ratio, mse_point,
    rate_experiment, scaling_advisor, theoretical_delta_exponent, theoretical_mse_exponent,
    AcceptanceProbability, GridCenter, Problem, RateConfig, ScalingTarget,
};
use abc_rates_core::toy::{
    ball_moments, bias_constant, d_opt, posterior_interval_probability, prior_interval_probability,
    IndicatorTest, ToyModel, DEFAULT_FD_STEP,
};
use abc_rates_core::{abc_rejection, AbcConfig, AbcError, AcceptanceNorm, CostModel, StopRule};

use crate::config::{Experiment, ExperimentConfig, TestFunction};
use crate::report::{format_short, ResultTable, Table};

/// Pilot used to centre the first rate-scan grid when no oracle is available.
const PILOT_PROPOSALS: u64 = 100_000;
const PILOT_ACCEPTANCE: f64 = 0.05;

/// The test function as a value that can be shared across worker threads.
#[derive(Debug, Clone, Copy)]
struct Test {
    indicator: Option<IndicatorTest>,
}

impl Test {
    fn new(h: TestFunction) -> Self {
        let indicator = match h {
            TestFunction::Indicator { lo, hi } => Some(IndicatorTest { lo, hi }),
            TestFunction::One => None,
        };
        Self { indicator }
    }

    fn eval(&self, theta: &[f64]) -> f64 {
        self.indicator.map_or(1.0, |t| t.eval(theta))
    }

    fn posterior_mean(&self, s_star: [f64; 2]) -> f64 {
        self.indicator
            .map_or(1.0, |t| posterior_interval_probability(s_star, &t))
    }

    fn prior_mean(&self) -> f64 {
        self.indicator
            .map_or(1.0, |t| prior_interval_probability(&t))
    }

    fn bias_constant(&self, s_star: [f64; 2]) -> f64 {
        self.indicator
            .map_or(0.0, |t| bias_constant(s_star, &t, DEFAULT_FD_STEP))
    }

    /// Acceptance probability from quadrature; it does not depend on `h`.
    fn acceptance_probability(&self, s_star: [f64; 2], delta: f64) -> Result<f64, AbcError> {
        let t = self.indicator.unwrap_or_default();
        Ok(ball_moments(s_star, delta, &t)?.p_delta)
    }
}

/// Runs the configured experiment. The configuration must already be valid.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultTable, AbcError> {
    let experiment = cfg
        .experiment
        .expect("validated config names an experiment");
    let s_star = cfg.s_star_pair();
    let model = ToyModel::new(s_star);
    let norm = AcceptanceNorm::euclidean(2);
    let test = Test::new(cfg.h);
    let problem = Problem::new(
        &model,
        &norm,
        &cfg.s_star,
        move |t: &[f64]| test.eval(t),
        test.posterior_mean(s_star),
    );
    let cost_model = CostModel::new(cfg.cost_model.a, cfg.cost_model.b)?;

    let mut result = ResultTable {
        tables: Vec::new(),
        summary: String::new(),
        stdout: Vec::new(),
        seed: cfg.seed,
        total_proposals: 0,
    };
    let out = &mut result;

    match experiment {
        Experiment::BiasSweep => {
            let deltas = cfg.delta_grid().expect("validated");
            let (n, k) = (cfg.n.expect("validated"), cfg.k.expect("validated"));
            let c = test.bias_constant(s_star);
            let rows = bias_sweep(&problem, &deltas, n, k, cfg.seed)?;
            let mut table = Table::new(
                experiment.name(),
                vec!["delta", "mean_bias", "std_error", "theory_bias"],
            );
            for r in &rows {
                table.push(vec![
                    r.delta.into(),
                    r.mean_bias.into(),
                    r.std_error.into(),
                    (c * r.delta * r.delta).into(),
                ]);
                out.total_proposals += r.total_proposals;
            }
            let _ = writeln!(
                out.summary,
                "Empirical bias of the estimate over {k} runs of n = {n} accepted samples per tolerance.\n\n\
                 - exact posterior expectation y = {}\n- bias constant C = {}\n",
                format_short(problem.y_exact),
                format_short(c)
            );
            let mut md = Table::new("", vec!["delta", "mean bias", "95% interval", "C·δ²"]);
            for r in &rows {
                let (lo, hi) = r.interval();
                md.push(vec![
                    r.delta.into(),
                    r.mean_bias.into(),
                    format!("[{}, {}]", format_short(lo), format_short(hi)).into(),
                    (c * r.delta * r.delta).into(),
                ]);
            }
            out.summary.push_str(&md.to_markdown());
            out.tables.push(table);
        }
        Experiment::MseSweep => {
            let mut deltas = cfg.delta_grid().expect("validated");
            deltas.sort_by(f64::total_cmp);
            let k = cfg.k.expect("validated");
            let ns = match (cfg.n, cfg.kappa) {
                (Some(n), _) => vec![n; deltas.len()],
                (None, Some(kappa)) => constant_cost_schedule(&deltas, kappa, 2)?,
                (None, None) => unreachable!("validated"),
            };
            let mut table = Table::new(
                experiment.name(),
                vec![
                    "delta",
                    "n",
                    "k",
                    "mse",
                    "se",
                    "mean_bias",
                    "variance",
                    "mean_proposals",
                ],
            );
            let mut curve = Vec::new();
            for (&delta, &n) in deltas.iter().zip(&ns) {
                let p = mse_point(&problem, delta, n, k, cfg.seed)?;
                table.push(vec![
                    p.delta.into(),
                    p.n.into(),
                    p.k.into(),
                    p.mse.into(),
                    p.se.into(),
                    p.mean_bias.into(),
                    p.variance.into(),
                    p.mean_proposals.into(),
                ]);
                curve.push((p.delta, p.mse));
                out.total_proposals += p.total_proposals;
            }
            let _ = writeln!(
                out.summary,
                "Mean squared error over {k} runs per tolerance.\n"
            );
            out.summary.push_str(&table.to_markdown());
            if let Some(kappa) = cfg.kappa {
                let _ = writeln!(
                    out.summary,
                    "\nConstant cost schedule n = round({kappa}·δ²).\n"
                );
                match fit_mse_curve(&curve, 2) {
                    Ok(fit) => {
                        let _ = writeln!(
                            out.summary,
                            "Fitted MSE(δ) = a·δ^-2 + b·δ^4 with a = {}, b = {}; minimum {} at δ* = {}.",
                            format_short(fit.a),
                            format_short(fit.b),
                            format_short(fit.mse_star),
                            format_short(fit.delta_star)
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(out.summary, "Curve fit failed: {e}.");
                    }
                }
            }
            out.tables.push(table);
        }
        Experiment::RateScan => {
            let center = match (cfg.center, test.indicator) {
                (Some(c), _) => GridCenter::Fixed(c),
                (None, Some(t)) => match d_opt(s_star, &t) {
                    Ok(d) => GridCenter::FromDOpt(d),
                    Err(_) => pilot_center(),
                },
                (None, None) => pilot_center(),
            };
            let rc = RateConfig {
                kappas: cfg.cost_grid.clone().expect("validated"),
                grid_points: cfg.grid_points,
                grid_span: cfg.grid_span,
                k: cfg.k.expect("validated"),
                center,
                cost_model,
                weighted: cfg.weighted,
            };
            let res = rate_experiment(&problem, &rc, cfg.seed)?;
            let min_cost = res
                .levels
                .iter()
                .map(|l| l.cost)
                .fold(f64::INFINITY, f64::min);

            let mut levels = Table::new(
                experiment.name(),
                vec![
                    "level",
                    "kappa",
                    "cost",
                    "relative_cost",
                    "center",
                    "a",
                    "b",
                    "delta_star",
                    "mse_star",
                    "status",
                ],
            );
            let mut points = Table::new(
                "rate-scan-points",
                vec![
                    "level",
                    "kappa",
                    "delta",
                    "n",
                    "mse",
                    "se",
                    "mean_proposals",
                ],
            );
            for (i, level) in res.levels.iter().enumerate() {
                let (a, b, ds, ms, status) = match &level.fit {
                    Ok(f) => (f.a, f.b, f.delta_star, f.mse_star, "ok".to_string()),
                    Err(e) => (
                        f64::NAN,
                        f64::NAN,
                        f64::NAN,
                        f64::NAN,
                        format!("excluded: {}", e.code()),
                    ),
                };
                levels.push(vec![
                    i.into(),
                    level.kappa.into(),
                    level.cost.into(),
                    (level.cost / min_cost).into(),
                    level.center.into(),
                    a.into(),
                    b.into(),
                    ds.into(),
                    ms.into(),
                    status.into(),
                ]);
                for p in &level.points {
                    points.push(vec![
                        i.into(),
                        level.kappa.into(),
                        p.delta.into(),
                        p.n.into(),
                        p.mse.into(),
                        p.se.into(),
                        p.mean_proposals.into(),
                    ]);
                    out.total_proposals += p.total_proposals;
                }
            }

            let _ = writeln!(
                out.summary,
                "Optimal tolerance and minimal MSE against cost, {} replicates per point, \
                 {}-point tolerance grids. Cost is in units of the cheapest level.\n",
                rc.k, rc.grid_points
            );
            out.summary.push_str(&levels.to_markdown());
            let _ = writeln!(out.summary);
            let mut grad = Table::new(
                "",
                vec!["Plot", "Gradient", "Standard error", "Theoretical gradient"],
            );
            grad.push(vec![
                "optimal δ vs cost".into(),
                res.delta_fit.gradient.into(),
                res.delta_fit.gradient_se.into(),
                theory_label(1, res.q + 4, theoretical_delta_exponent(res.q)).into(),
            ]);
            grad.push(vec![
                "MSE vs cost".into(),
                res.mse_fit.gradient.into(),
                res.mse_fit.gradient_se.into(),
                theory_label(4, res.q + 4, theoretical_mse_exponent(res.q)).into(),
            ]);
            out.summary.push_str(&grad.to_markdown());
            out.stdout.push(format!(
                "delta* gradient {} (se {}), MSE gradient {} (se {})",
                format_short(res.delta_fit.gradient),
                format_short(res.delta_fit.gradient_se),
                format_short(res.mse_fit.gradient),
                format_short(res.mse_fit.gradient_se)
            ));
            out.tables.push(levels);
            out.tables.push(points);
        }
        Experiment::ModeCompare => {
            let delta = cfg.delta.expect("validated").0;
            let k = cfg.k.expect("validated");
            let targets = cfg
                .n_targets
                .clone()
                .unwrap_or_else(|| vec![cfg.n.expect("validated")]);
            let fallback_c = cfg.fallback_c.unwrap_or_else(|| test.prior_mean());
            let p = test.acceptance_probability(s_star, delta)?;
            let mut table = Table::new(
                experiment.name(),
                vec![
                    "n_target",
                    "p_delta",
                    "n_hat",
                    "n",
                    "mse_fixed_proposals",
                    "se_fixed_proposals",
                    "mse_fixed_accepted",
                    "se_fixed_accepted",
                    "ratio",
                ],
            );
            for &target in &targets {
                let cmp = fixed_mode_mse_ratio(
                    &problem,
                    delta,
                    target,
                    k,
                    fallback_c,
                    AcceptanceProbability::Known(p),
                    cfg.seed,
                )?;
                table.push(vec![
                    target.into(),
                    cmp.p_delta.into(),
                    cmp.n_hat.into(),
                    cmp.n.into(),
                    cmp.fixed_proposals.mse.into(),
                    cmp.fixed_proposals.se.into(),
                    cmp.fixed_accepted.mse.into(),
                    cmp.fixed_accepted.se.into(),
                    cmp.ratio.into(),
                ]);
                out.total_proposals +=
                    cmp.fixed_proposals.total_proposals + cmp.fixed_accepted.total_proposals;
            }
            let _ = writeln!(
                out.summary,
                "Fixed-proposal against fixed-accepted stopping at δ = {delta}, {k} runs each, \
                 acceptance probability {} from quadrature, fallback estimate {}.\n",
                format_short(p),
                format_short(fallback_c)
            );
            out.summary.push_str(&table.to_markdown());
            out.tables.push(table);
        }
        Experiment::Tune => {
            let q = cfg.q.expect("validated");
            let (label, value, target) = match (cfg.alpha, cfg.beta) {
                (Some(a), _) => ("alpha", a, ScalingTarget::ErrorFactor(a)),
                (None, Some(b)) => ("beta", b, ScalingTarget::BudgetFactor(b)),
                (None, None) => unreachable!("validated"),
            };
            let adv = scaling_advisor(q, target)?;
            let mut table = Table::new(
                experiment.name(),
                vec![
                    "q",
                    "target",
                    "value",
                    "n_factor",
                    "delta_factor",
                    "cost_factor",
                    "error_factor",
                ],
            );
            table.push(vec![
                (q as u64).into(),
                label.into(),
                value.into(),
                adv.n_factor.into(),
                adv.delta_factor.into(),
                adv.cost_factor.into(),
                adv.error_factor.into(),
            ]);
            for (name, v) in [
                ("n_factor", adv.n_factor),
                ("delta_factor", adv.delta_factor),
                ("cost_factor", adv.cost_factor),
                ("error_factor", adv.error_factor),
            ] {
                out.stdout.push(format!("{name}={}", format_short(v)));
            }
            let _ = writeln!(
                out.summary,
                "Scaling of a pilot run for q = {q}, {label} = {value}.\n"
            );
            out.summary.push_str(&table.to_markdown());
            out.tables.push(table);
        }
        Experiment::Sample => {
            let delta = cfg.delta.expect("validated").0;
            let stop = match (cfg.n, cfg.n_hat) {
                (Some(n), _) => StopRule::accepted(n),
                (None, Some(n_hat)) => StopRule::proposals(n_hat, f64::NAN),
                (None, None) => unreachable!("validated"),
            };
            let run = abc_rejection(
                &model,
                &norm,
                &AbcConfig::new(cfg.s_star.clone(), delta, stop, cfg.seed),
            )?;
            let mut table = Table::new(
                experiment.name(),
                vec!["index", "proposal", "theta", "distance"],
            );
            for (j, theta) in run.samples().enumerate() {
                table.push(vec![
                    j.into(),
                    run.accepted_at[j].into(),
                    theta[0].into(),
                    run.distances[j].into(),
                ]);
            }
            out.total_proposals = run.n_proposals;
            out.stdout.push(format!(
                "accepted {} of {} proposals",
                run.n_accepted, run.n_proposals
            ));
            let _ = writeln!(
                out.summary,
                "Accepted {} of {} proposals at δ = {}.",
                run.n_accepted,
                run.n_proposals,
                format_short(delta)
            );
            out.tables.push(table);
        }
    }
    Ok(result)
}

fn pilot_center() -> GridCenter {
    GridCenter::Pilot {
        proposals: PILOT_PROPOSALS,
        acceptance_rate: PILOT_ACCEPTANCE,
    }
}

/// `-num/den ≈ value`, with the fraction reduced.
fn theory_label(num: u32, den: u32, value: f64) -> String {
    let g = gcd(num, den);
    format!("-{}/{} ≈ {:.3}", num / g, den / g, value)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// What a run would do, without simulating anything.
pub fn plan(cfg: &ExperimentConfig) -> Vec<String> {
    let experiment = cfg
        .experiment
        .expect("validated config names an experiment");
    let mut lines = vec![format!("experiment {experiment}, seed {}", cfg.seed)];
    match experiment {
        Experiment::BiasSweep => {
            let (n, k) = (cfg.n.unwrap_or(0), cfg.k.unwrap_or(0));
            for d in cfg.delta_grid().unwrap_or_default() {
                lines.push(format!("delta {d}: n {n}, k {k}"));
            }
        }
        Experiment::MseSweep => {
            let deltas = cfg.delta_grid().unwrap_or_default();
            let ns: Vec<u64> = match (cfg.n, cfg.kappa) {
                (Some(n), _) => vec![n; deltas.len()],
                (None, Some(kappa)) => {
                    constant_cost_schedule(&deltas, kappa, 2).unwrap_or_default()
                }
                _ => Vec::new(),
            };
            for (d, n) in deltas.iter().zip(ns) {
                lines.push(format!("delta {d}: n {n}, k {}", cfg.k.unwrap_or(0)));
            }
        }
        Experiment::RateScan => {
            for (i, kappa) in cfg.cost_grid.iter().flatten().enumerate() {
                lines.push(format!(
                    "level {i}: kappa {kappa}, {} tolerances over a span of {}, k {}",
                    cfg.grid_points,
                    cfg.grid_span,
                    cfg.k.unwrap_or(0)
                ));
            }
            lines.push(match cfg.center {
                Some(c) => {
                    format!("first grid centred on {c}, later grids on the previous optimum")
                }
                None => {
                    "first grid centred on the oracle schedule, later grids on the previous optimum"
                        .into()
                }
            });
        }
        Experiment::ModeCompare => {
            let targets = cfg
                .n_targets
                .clone()
                .or(cfg.n.map(|n| vec![n]))
                .unwrap_or_default();
            for t in targets {
                lines.push(format!(
                    "delta {}: target N̂·p {t}, k {} per mode",
                    cfg.delta.map_or(f64::NAN, |d| d.0),
                    cfg.k.unwrap_or(0)
                ));
            }
        }
        Experiment::Tune => {
            lines.push(format!(
                "q {:?}, alpha {:?}, beta {:?}",
                cfg.q, cfg.alpha, cfg.beta
            ));
        }
        Experiment::Sample => {
            lines.push(format!(
                "delta {}: n {:?}, n_hat {:?}",
                cfg.delta.map_or(f64::NAN, |d| d.0),
                cfg.n,
                cfg.n_hat
            ));
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Tolerance;
    use crate::report::Cell;

    #[test]
    fn fraction_labels() {
        assert_eq!(theory_label(1, 6, -1.0 / 6.0), "-1/6 ≈ -0.167");
        assert_eq!(theory_label(4, 6, -2.0 / 3.0), "-2/3 ≈ -0.667");
        assert_eq!(theory_label(4, 8, -0.5), "-1/2 ≈ -0.500");
    }

    #[test]
    fn bias_sweep_columns_and_theory() {
        let cfg = ExperimentConfig {
            experiment: Some(Experiment::BiasSweep),
            deltas: Some(vec![Tolerance(1.0), Tolerance(0.5)]),
            n: Some(20),
            k: Some(10),
            ..Default::default()
        };
        let res = run(&cfg).unwrap();
        let t = &res.tables[0];
        assert_eq!(
            t.columns,
            vec!["delta", "mean_bias", "std_error", "theory_bias"]
        );
        assert_eq!(t.rows.len(), 2);
        let Cell::Real(theory) = t.rows[1][3] else {
            panic!()
        };
        assert!((theory - 0.0323).abs() < 5e-4);
        assert!(res.total_proposals > 0);
    }

    #[test]
    fn accept_all_sample() {
        let cfg = ExperimentConfig {
            experiment: Some(Experiment::Sample),
            delta: Some(Tolerance(f64::INFINITY)),
            n: Some(10),
            ..Default::default()
        };
        let res = run(&cfg).unwrap();
        assert_eq!(res.tables[0].rows.len(), 10);
        assert_eq!(res.total_proposals, 10);
    }

    #[test]
    fn tune_prints_factors() {
        let cfg = ExperimentConfig {
            experiment: Some(Experiment::Tune),
            q: Some(2),
            alpha: Some(2.0),
            ..Default::default()
        };
        let res = run(&cfg).unwrap();
        assert_eq!(
            res.stdout,
            vec![
                "n_factor=4",
                "delta_factor=0.7071",
                "cost_factor=8",
                "error_factor=0.5"
            ]
        );
    }
}
