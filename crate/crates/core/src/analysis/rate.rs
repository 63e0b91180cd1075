//! Convergence-rate experiments: how the optimal tolerance and the minimal
//! MSE scale with computational cost, and how alternative tolerance
//! schedules compare.

use super::fit::{fit_mse_curve, fit_mse_curve_weighted, loglog_fit, MseFit, PowerLawFit};
use super::sweep::{constant_cost_schedule, mse_point, MsePoint};
use super::Problem;
use crate::error::{AbcError, Result};
use crate::sampler::{derive_replicate_seed, CostModel, ModelSpec, StopRule};

/// `-1/(q+4)`, the exponent of `δ*` against cost.
pub fn theoretical_delta_exponent(q: u32) -> f64 {
    -1.0 / (q as f64 + 4.0)
}

/// `-4/(q+4)`, the exponent of the optimal MSE against cost.
pub fn theoretical_mse_exponent(q: u32) -> f64 {
    -4.0 / (q as f64 + 4.0)
}

/// Asymptotic MSE-vs-cost exponent of the schedule `δ ∝ n^(-r)`:
/// MSE falls like `n^(-min(1, 4r))` while cost grows like `n^(1 + q·r)`.
pub fn schedule_mse_exponent(q: u32, r: f64) -> f64 {
    -(4.0 * r).min(1.0) / (1.0 + q as f64 * r)
}

/// `count` values from `first` to `first·span`, evenly spaced in log scale.
pub fn geometric_levels(first: f64, span: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![first],
        _ => (0..count)
            .map(|i| first * span.powf(i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// `points` tolerances spaced geometrically over `[center/√span, center·√span]`.
pub fn tolerance_grid(center: f64, span: f64, points: usize) -> Result<Vec<f64>> {
    if !(center > 0.0 && center.is_finite()) {
        return Err(AbcError::InvalidArgument(format!(
            "grid center must be positive, got {center}"
        )));
    }
    if !(span >= 1.0 && span.is_finite()) {
        return Err(AbcError::InvalidArgument(format!(
            "grid span must be at least 1, got {span}"
        )));
    }
    if points < 3 {
        return Err(AbcError::TooFewPoints {
            needed: 3,
            got: points,
        });
    }
    Ok(geometric_levels(center / span.sqrt(), span, points))
}

/// Tolerance at which a fraction `acceptance_rate` of `proposals`
/// accept-all pilot draws would have been accepted.
pub fn pilot_tolerance<M, H>(
    problem: &Problem<'_, M, H>,
    proposals: u64,
    acceptance_rate: f64,
    seed: u64,
) -> Result<f64>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    if !(acceptance_rate > 0.0 && acceptance_rate < 1.0) {
        return Err(AbcError::InvalidArgument(format!(
            "pilot acceptance rate must lie in (0, 1), got {acceptance_rate}"
        )));
    }
    let cfg = crate::sampler::AbcConfig::new(
        problem.s_star.to_vec(),
        f64::INFINITY,
        StopRule::proposals(proposals, f64::NAN),
        seed,
    );
    let run = crate::sampler::abc_rejection(problem.model, problem.norm, &cfg)?;
    let mut distances = run.distances;
    distances.sort_by(f64::total_cmp);
    let rank = (acceptance_rate * distances.len() as f64).ceil() as usize;
    match distances.get(rank.max(1) - 1) {
        Some(&d) if d > 0.0 => Ok(d),
        _ => Err(AbcError::PilotFailed { proposals }),
    }
}

/// Where the tolerance grid of the first cost level is centred. Later
/// levels centre on the previous level's fitted `δ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridCenter {
    Fixed(f64),
    /// Solve `δ = D·n^(-1/4)` with `n = κ·δ^q`.
    FromDOpt(f64),
    /// Pilot tolerance with the given acceptance rate.
    Pilot {
        proposals: u64,
        acceptance_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    /// Constant-cost levels: `n(δ) = round(κ·δ^q)` at each level.
    pub kappas: Vec<f64>,
    pub grid_points: usize,
    pub grid_span: f64,
    /// Replicates per (level, tolerance) point.
    pub k: usize,
    pub center: GridCenter,
    pub cost_model: CostModel,
    /// Fit each curve with weights `1/se²` instead of plain least squares.
    pub weighted: bool,
}

impl RateConfig {
    pub fn new(kappas: Vec<f64>, k: usize, center: GridCenter) -> Self {
        Self {
            kappas,
            grid_points: 12,
            grid_span: 3.0,
            k,
            center,
            cost_model: CostModel::default(),
            weighted: false,
        }
    }
}

/// One constant-cost level of a rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLevel {
    pub kappa: f64,
    pub center: f64,
    pub points: Vec<MsePoint>,
    /// Mean cost of one run, averaged over the grid.
    pub cost: f64,
    pub fit: std::result::Result<MseFit, AbcError>,
}

impl RateLevel {
    pub fn summary(&self) -> Option<LevelSummary> {
        self.fit.as_ref().ok().map(|fit| LevelSummary {
            cost: self.cost,
            delta_star: fit.delta_star,
            mse_star: fit.mse_star,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSummary {
    pub cost: f64,
    pub delta_star: f64,
    pub mse_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub q: u32,
    pub levels: Vec<RateLevel>,
    /// `log δ*` against `log cost`.
    pub delta_fit: PowerLawFit,
    /// `log MSE*` against `log cost`.
    pub mse_fit: PowerLawFit,
}

/// Power laws of `δ*` and `MSE*` against cost across levels.
pub fn fit_rate_levels(levels: &[LevelSummary]) -> Result<(PowerLawFit, PowerLawFit)> {
    if levels.len() < 3 {
        return Err(AbcError::TooFewPoints {
            needed: 3,
            got: levels.len(),
        });
    }
    let costs: Vec<f64> = levels.iter().map(|l| l.cost).collect();
    let deltas: Vec<f64> = levels.iter().map(|l| l.delta_star).collect();
    let mses: Vec<f64> = levels.iter().map(|l| l.mse_star).collect();
    Ok((loglog_fit(&costs, &deltas)?, loglog_fit(&costs, &mses)?))
}

/// For each `κ`, estimates the MSE over a tolerance grid at constant cost,
/// fits the MSE curve and extracts `(δ*, MSE*)`; then fits both against
/// cost. Levels whose fit fails are kept in the result but left out of the
/// power laws.
pub fn rate_experiment<M, H>(
    problem: &Problem<'_, M, H>,
    config: &RateConfig,
    base_seed: u64,
) -> Result<RateResult>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    if config.kappas.len() < 3 {
        return Err(AbcError::TooFewPoints {
            needed: 3,
            got: config.kappas.len(),
        });
    }
    let q = problem.model.dims().q as u32;
    let mut center = match config.center {
        GridCenter::Fixed(c) => c,
        GridCenter::FromDOpt(d) => (d.powi(4) / config.kappas[0]).powf(1.0 / (q as f64 + 4.0)),
        GridCenter::Pilot {
            proposals,
            acceptance_rate,
        } => pilot_tolerance(
            problem,
            proposals,
            acceptance_rate,
            derive_replicate_seed(base_seed, u64::MAX),
        )?,
    };

    let mut levels = Vec::with_capacity(config.kappas.len());
    for (i, &kappa) in config.kappas.iter().enumerate() {
        let level_center = center;
        let grid = tolerance_grid(level_center, config.grid_span, config.grid_points)?;
        let ns = constant_cost_schedule(&grid, kappa, q)?;
        let level_seed = derive_replicate_seed(base_seed, i as u64);
        let points = grid
            .iter()
            .zip(&ns)
            .map(|(&delta, &n)| mse_point(problem, delta, n, config.k, level_seed))
            .collect::<Result<Vec<_>>>()?;
        let cost = points
            .iter()
            .map(|p| config.cost_model.cost(p.mean_proposals))
            .sum::<f64>()
            / points.len() as f64;

        let curve: Vec<(f64, f64)> = points.iter().map(|p| (p.delta, p.mse)).collect();
        let fit = if config.weighted {
            let weights: Vec<f64> = points.iter().map(|p| 1.0 / (p.se * p.se)).collect();
            fit_mse_curve_weighted(&curve, &weights, q)
        } else {
            fit_mse_curve(&curve, q)
        };
        match &fit {
            Ok(f) => {
                log::info!(
                    "level {i}: kappa {kappa}, cost {cost:.4e}, delta* {:.5}, mse* {:.4e}",
                    f.delta_star,
                    f.mse_star
                );
                center = f.delta_star;
            }
            Err(e) => log::warn!("level {i} (kappa {kappa}) excluded: {e}"),
        }
        levels.push(RateLevel {
            kappa,
            center: level_center,
            points,
            cost,
            fit,
        });
    }

    let kept: Vec<LevelSummary> = levels.iter().filter_map(RateLevel::summary).collect();
    let (delta_fit, mse_fit) = fit_rate_levels(&kept)?;
    Ok(RateResult {
        q,
        levels,
        delta_fit,
        mse_fit,
    })
}

/// A tolerance schedule `δ = δ0·(n/n0)^(-exponent)` sampled at given
/// expected-cost multiples of the `(n0, δ0)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulePlan {
    pub n0: u64,
    pub delta0: f64,
    pub exponent: f64,
    pub q: u32,
    pub cost_ratios: Vec<f64>,
}

impl SchedulePlan {
    /// `(n, δ)` per cost ratio. Expected cost grows like `n^(1 + q·r)`, so
    /// `n = round(n0·c^(1/(1 + q·r)))`.
    pub fn grid(&self) -> Result<Vec<(u64, f64)>> {
        if self.n0 == 0 || !(self.delta0 > 0.0) || !(self.exponent > 0.0) || self.q == 0 {
            return Err(AbcError::InvalidArgument(format!(
                "invalid schedule plan: n0 = {}, delta0 = {}, exponent = {}, q = {}",
                self.n0, self.delta0, self.exponent, self.q
            )));
        }
        let growth = 1.0 / (1.0 + self.q as f64 * self.exponent);
        self.cost_ratios
            .iter()
            .map(|&c| {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(AbcError::NonPositiveInput(c));
                }
                let n = ((self.n0 as f64 * c.powf(growth)).round() as u64).max(1);
                let delta = self.delta0 * (n as f64 / self.n0 as f64).powf(-self.exponent);
                Ok((n, delta))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePoint {
    pub cost_ratio: f64,
    pub cost: f64,
    pub mse: MsePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleScan {
    pub exponent: f64,
    pub points: Vec<SchedulePoint>,
    /// `log MSE` against `log cost`.
    pub fit: PowerLawFit,
}

/// MSE along one tolerance schedule. Point `i` uses replicate seeds derived
/// from `derive_replicate_seed(base_seed, i)`, so scans of different
/// schedules with the same base seed share random numbers level by level.
pub fn schedule_scan<M, H>(
    problem: &Problem<'_, M, H>,
    plan: &SchedulePlan,
    k: usize,
    cost_model: &CostModel,
    base_seed: u64,
) -> Result<ScheduleScan>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    let grid = plan.grid()?;
    let points = grid
        .iter()
        .zip(&plan.cost_ratios)
        .enumerate()
        .map(|(i, (&(n, delta), &cost_ratio))| {
            let mse = mse_point(
                problem,
                delta,
                n,
                k,
                derive_replicate_seed(base_seed, i as u64),
            )?;
            Ok(SchedulePoint {
                cost_ratio,
                cost: cost_model.cost(mse.mean_proposals),
                mse,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let costs: Vec<f64> = points.iter().map(|p| p.cost).collect();
    let mses: Vec<f64> = points.iter().map(|p| p.mse.mse).collect();
    Ok(ScheduleScan {
        exponent: plan.exponent,
        fit: loglog_fit(&costs, &mses)?,
        points,
    })
}
