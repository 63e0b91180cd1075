//! How to scale a pilot run to reach a target error or spend a target budget.

use crate::error::{AbcError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingTarget {
    /// Divide the root mean squared error by `alpha`.
    ErrorFactor(f64),
    /// Multiply the computational budget by `beta`.
    BudgetFactor(f64),
}

/// Multipliers to apply to the pilot's `n`, `δ`, cost and RMSE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingAdvice {
    pub n_factor: f64,
    pub delta_factor: f64,
    pub cost_factor: f64,
    pub error_factor: f64,
}

/// Scaling rule along the optimal schedule `δ ∝ n^(-1/4)`, where cost grows
/// like `n^((q+4)/4)` and RMSE falls like `n^(-1/2)`.
pub fn scaling_advisor(q: u32, target: ScalingTarget) -> Result<ScalingAdvice> {
    if q == 0 {
        return Err(AbcError::InvalidArgument("q must be at least 1".into()));
    }
    let qf = q as f64;
    let n_factor = match target {
        ScalingTarget::ErrorFactor(alpha) => {
            check_factor("alpha", alpha)?;
            alpha * alpha
        }
        ScalingTarget::BudgetFactor(beta) => {
            check_factor("beta", beta)?;
            beta.powf(4.0 / (qf + 4.0))
        }
    };
    let (cost_factor, error_factor) = match target {
        ScalingTarget::ErrorFactor(alpha) => (alpha.powf((qf + 4.0) / 2.0), 1.0 / alpha),
        ScalingTarget::BudgetFactor(beta) => (beta, beta.powf(-2.0 / (qf + 4.0))),
    };
    Ok(ScalingAdvice {
        n_factor,
        delta_factor: n_factor.powf(-0.25),
        cost_factor,
        error_factor,
    })
}

fn check_factor(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AbcError::InvalidArgument(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}
