//! Replicate studies of ABC error against tolerance and cost.

pub mod fit;
pub mod modes;
pub mod rate;
pub mod scaling;
pub mod sweep;

pub use fit::{
    fit_mse_curve, fit_mse_curve_weighted, loglog_fit, optimal_delta, MseFit, PowerLawFit,
};
pub use modes::{fixed_mode_mse_ratio, AcceptanceProbability, ModeComparison};
pub use rate::{
    fit_rate_levels, geometric_levels, pilot_tolerance, rate_experiment, schedule_mse_exponent,
    schedule_scan, theoretical_delta_exponent, theoretical_mse_exponent, tolerance_grid,
    GridCenter, LevelSummary, RateConfig, RateLevel, RateResult, SchedulePlan, SchedulePoint,
    ScheduleScan,
};
pub use scaling::{scaling_advisor, ScalingAdvice, ScalingTarget};
pub use sweep::{bias_sweep, constant_cost_schedule, mse_point, BiasSweepRow, MsePoint};

use crate::error::Result;
use crate::sampler::{abc_rejection, derive_replicate_seed, posterior_estimate, AbcConfig};
use crate::sampler::{AcceptanceNorm, ModelSpec, StopRule};

/// A model, an acceptance norm, an observation and a test function together
/// with the exact value `y = E(h(θ) | S = s*)` the estimates are scored
/// against.
pub struct Problem<'a, M: ?Sized, H> {
    pub model: &'a M,
    pub norm: &'a AcceptanceNorm,
    pub s_star: &'a [f64],
    pub h: H,
    pub y_exact: f64,
}

impl<'a, M, H> Problem<'a, M, H>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(
        model: &'a M,
        norm: &'a AcceptanceNorm,
        s_star: &'a [f64],
        h: H,
        y_exact: f64,
    ) -> Self {
        Self {
            model,
            norm,
            s_star,
            h,
            y_exact,
        }
    }

    /// One ABC estimate of `y` and the number of proposals it took.
    pub fn estimate(&self, delta: f64, stop: StopRule, seed: u64) -> Result<Replicate> {
        let cfg = AbcConfig::new(self.s_star.to_vec(), delta, stop, seed);
        let run = abc_rejection(self.model, self.norm, &cfg)?;
        Ok(Replicate {
            estimate: posterior_estimate(&run, &self.h, stop.fallback()),
            proposals: run.n_proposals,
            accepted: run.n_accepted,
        })
    }

    /// `k` independent estimates with seeds `derive_replicate_seed(base_seed, j)`,
    /// returned in replicate order whatever the thread count.
    pub fn replicates(
        &self,
        delta: f64,
        stop: StopRule,
        k: usize,
        base_seed: u64,
    ) -> Result<Vec<Replicate>> {
        use rayon::prelude::*;
        (0..k as u64)
            .into_par_iter()
            .map(|j| self.estimate(delta, stop, derive_replicate_seed(base_seed, j)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicate {
    pub estimate: f64,
    pub proposals: u64,
    pub accepted: u64,
}

/// Mean and sample variance (divisor `k - 1`).
pub(crate) fn mean_and_sample_variance(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (k - 1.0))
}
