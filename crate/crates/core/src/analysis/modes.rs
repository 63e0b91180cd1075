//! Fixed-`n` against fixed-`N̂` stopping at equal expected sample size.

use super::sweep::{summarise_errors, MsePoint};
use super::Problem;
use crate::error::{AbcError, Result};
use crate::sampler::{derive_replicate_seed, ModelSpec, StopRule};

/// Where the acceptance probability `p_δ` used to size `N̂` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcceptanceProbability {
    Known(f64),
    /// Estimate from one fixed-proposal pilot run of this many proposals.
    Pilot {
        proposals: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeComparison {
    pub delta: f64,
    pub p_delta: f64,
    pub n_hat: u64,
    pub n: u64,
    pub fixed_proposals: MsePoint,
    pub fixed_accepted: MsePoint,
    /// `MSE(Ŷ) / MSE(Y)`, with `0/0` read as 1.
    pub ratio: f64,
}

/// Stream index reserved for the pilot run, away from replicate indices.
const PILOT_STREAM: u64 = u64::MAX;

/// Compares the fixed-proposal estimator with `N̂ = round(n_target/p_δ)` to
/// the fixed-accepted estimator with `n = ⌊N̂·p_δ⌋`. Both modes use the same
/// `k` replicate seeds.
#[allow(clippy::too_many_arguments)]
pub fn fixed_mode_mse_ratio<M, H>(
    problem: &Problem<'_, M, H>,
    delta: f64,
    n_target: u64,
    k: usize,
    fallback_c: f64,
    p: AcceptanceProbability,
    base_seed: u64,
) -> Result<ModeComparison>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    if k < 100 {
        return Err(AbcError::InvalidArgument(format!(
            "mode comparison needs k >= 100, got {k}"
        )));
    }
    if n_target == 0 {
        return Err(AbcError::InvalidArgument(
            "n_target must be at least 1".into(),
        ));
    }
    let p_delta = match p {
        AcceptanceProbability::Known(p) => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(AbcError::InvalidArgument(format!(
                    "acceptance probability must lie in (0, 1], got {p}"
                )));
            }
            p
        }
        AcceptanceProbability::Pilot { proposals } => {
            let seed = derive_replicate_seed(base_seed, PILOT_STREAM);
            let pilot =
                problem.estimate(delta, StopRule::proposals(proposals, fallback_c), seed)?;
            if pilot.accepted == 0 {
                return Err(AbcError::PilotFailed { proposals });
            }
            pilot.accepted as f64 / proposals as f64
        }
    };

    let n_hat = ((n_target as f64 / p_delta).round() as u64).max(1);
    let n = (n_hat as f64 * p_delta).floor() as u64;
    if n == 0 {
        return Err(AbcError::InvalidArgument(format!(
            "N̂·p = {} rounds down to zero accepted samples",
            n_hat as f64 * p_delta
        )));
    }

    let score = |stop: StopRule, n_label: u64| -> Result<MsePoint> {
        let reps = problem.replicates(delta, stop, k, base_seed)?;
        let errors: Vec<f64> = reps.iter().map(|r| r.estimate - problem.y_exact).collect();
        let total = reps.iter().map(|r| r.proposals).sum();
        Ok(summarise_errors(delta, n_label, &errors, total))
    };
    let fixed_proposals = score(StopRule::proposals(n_hat, fallback_c), n)?;
    let fixed_accepted = score(StopRule::accepted(n), n)?;

    let ratio = if fixed_proposals.mse == 0.0 && fixed_accepted.mse == 0.0 {
        1.0
    } else {
        fixed_proposals.mse / fixed_accepted.mse
    };
    Ok(ModeComparison {
        delta,
        p_delta,
        n_hat,
        n,
        fixed_proposals,
        fixed_accepted,
        ratio,
    })
}
