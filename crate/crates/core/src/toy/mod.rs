//! Bivariate Gaussian test problem with closed-form answers.
//!
//! `θ ~ N(0, 1)`, `X₁, X₂ | θ ~ N(θ, 1)` independently, `S(x) = x`. Then
//! `S ~ N(0, Σ)` with `Σ = [[2, 1], [1, 2]]` and `θ | S = s ~ N((s₁ + s₂)/3, 1/3)`,
//! so every quantity the convergence theory talks about can be evaluated
//! without sampling. The functions here take the observation and the
//! indicator interval as arguments so they double as generators for property
//! tests.

pub mod normal;
pub mod quadrature;

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

pub use normal::{std_normal_cdf, std_normal_pdf};

use crate::error::{AbcError, Result};
use crate::sampler::{AbcRng, Dims, ModelSpec};

const Q: usize = 2;
const POSTERIOR_VAR: f64 = 1.0 / 3.0;

/// Default finite-difference step for [`bias_constant`].
pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// Relative tolerance used by [`ball_moments`] between refinements.
pub const BALL_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModel {
    pub s_star: [f64; 2],
}

impl Default for ToyModel {
    fn default() -> Self {
        Self { s_star: [1.0, 1.0] }
    }
}

impl ToyModel {
    pub fn new(s_star: [f64; 2]) -> Self {
        Self { s_star }
    }

    /// Marginal covariance of the summary.
    pub fn summary_covariance() -> [[f64; 2]; 2] {
        [[2.0, 1.0], [1.0, 2.0]]
    }
}

impl ModelSpec for ToyModel {
    fn dims(&self) -> Dims {
        Dims { p: 1, d: 2, q: 2 }
    }

    fn prior_sample(&self, rng: &mut AbcRng, theta: &mut [f64]) {
        theta[0] = StandardNormal.sample(rng);
    }

    fn simulate(&self, theta: &[f64], rng: &mut AbcRng, data: &mut [f64]) {
        let e1: f64 = StandardNormal.sample(rng);
        let e2: f64 = StandardNormal.sample(rng);
        data[0] = theta[0] + e1;
        data[1] = theta[0] + e2;
    }

    fn summary(&self, data: &[f64], out: &mut [f64]) {
        out.copy_from_slice(data);
    }
}

/// Test function `h(θ) = 1{lo ≤ θ₁ ≤ hi}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorTest {
    pub lo: f64,
    pub hi: f64,
}

impl Default for IndicatorTest {
    fn default() -> Self {
        Self { lo: -0.5, hi: 0.5 }
    }
}

impl IndicatorTest {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(AbcError::InvalidArgument(format!(
                "indicator needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        if theta[0] >= self.lo && theta[0] <= self.hi {
            1.0
        } else {
            0.0
        }
    }

    /// `P(lo ≤ Z ≤ hi)` for `Z ~ N(mean, sd²)`.
    pub fn normal_probability(&self, mean: f64, sd: f64) -> f64 {
        std_normal_cdf((self.hi - mean) / sd) - std_normal_cdf((self.lo - mean) / sd)
    }
}

/// Posterior mean and standard deviation of θ given `S = s`.
pub fn posterior_params(s: [f64; 2]) -> (f64, f64) {
    ((s[0] + s[1]) / 3.0, POSTERIOR_VAR.sqrt())
}

/// `E(h(θ) | S = s)`.
pub fn posterior_interval_probability(s: [f64; 2], test: &IndicatorTest) -> f64 {
    let (mean, sd) = posterior_params(s);
    test.normal_probability(mean, sd)
}

/// `E(h(θ))` under the prior.
pub fn prior_interval_probability(test: &IndicatorTest) -> f64 {
    test.normal_probability(0.0, 1.0)
}

/// `Var(h(θ) | S = s)`; Bernoulli because `h` is an indicator.
pub fn posterior_variance(s: [f64; 2], test: &IndicatorTest) -> f64 {
    let y = posterior_interval_probability(s, test);
    y * (1.0 - y)
}

/// Marginal density of the summary, `φ₁ = f_S`.
pub fn f_s(s: [f64; 2]) -> f64 {
    let quad = s[0] * s[0] - s[0] * s[1] + s[1] * s[1];
    (-quad / 3.0).exp() / (2.0 * PI * 3.0_f64.sqrt())
}

/// `φ_h(s) = f_S(s) · E(h(θ) | S = s)`.
pub fn phi_h(s: [f64; 2], test: &IndicatorTest) -> f64 {
    f_s(s) * posterior_interval_probability(s, test)
}

/// Moments of `h(θ)` conditional on `S` landing in the ball `B(s*, δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMoments {
    pub delta: f64,
    /// `E(h(θ) | S ∈ B)`
    pub y_delta: f64,
    /// `Var(h(θ) | S ∈ B)`
    pub sigma2_delta: f64,
    /// `P(S ∈ B)`, the acceptance probability of one proposal.
    pub p_delta: f64,
}

/// Ball averages of `φ₁` and `φ_h` by adaptive polar quadrature.
pub fn ball_moments(s_star: [f64; 2], delta: f64, test: &IndicatorTest) -> Result<BallMoments> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(AbcError::InvalidArgument(format!(
            "ball radius must be positive and finite, got {delta}"
        )));
    }
    let res = quadrature::integrate_disk(s_star, delta, BALL_REL_TOL, |x, y| {
        let density = f_s([x, y]);
        (
            density,
            density * posterior_interval_probability([x, y], test),
        )
    })?;
    let p_delta = res.first;
    let y_delta = res.second / res.first;
    Ok(BallMoments {
        delta,
        y_delta,
        sigma2_delta: y_delta * (1.0 - y_delta),
        p_delta,
    })
}

/// Five-point-stencil Laplacian `Σᵢ (f(s + k eᵢ) - 2 f(s) + f(s - k eᵢ)) / k²`.
fn laplacian<F: Fn([f64; 2]) -> f64>(f: F, s: [f64; 2], step: f64) -> f64 {
    let centre = f(s);
    let ex = f([s[0] + step, s[1]]) - 2.0 * centre + f([s[0] - step, s[1]]);
    let ey = f([s[0], s[1] + step]) - 2.0 * centre + f([s[0], s[1] - step]);
    (ex + ey) / (step * step)
}

/// The constant `C(s*)` in `bias = C(s*)·δ² + O(δ³)`:
/// `(Δφ_h - y·Δφ₁) / (2(q+2)·φ₁)` at `s*`, with the Laplacians taken by
/// central second differences.
///
/// # Panics
/// If `fd_step` is outside `[1e-4, 1e-1]`.
pub fn bias_constant(s_star: [f64; 2], test: &IndicatorTest, fd_step: f64) -> f64 {
    assert!(
        (1e-4..=1e-1).contains(&fd_step),
        "finite-difference step must lie in [1e-4, 1e-1], got {fd_step}"
    );
    let phi1 = f_s(s_star);
    let y = phi_h(s_star, test) / phi1;
    let lap_h = laplacian(|s| phi_h(s, test), s_star, fd_step);
    let lap_1 = laplacian(f_s, s_star, fd_step);
    (lap_h - y * lap_1) / (2.0 * (Q as f64 + 2.0) * phi1)
}

/// `D_opt = (q·Var / (4 C²))^(1/4)`, the constant in the optimal schedule
/// `δₙ = D_opt · n^(-1/4)`.
pub fn d_opt_from(q: u32, variance: f64, c: f64) -> Result<f64> {
    if c.abs() <= 1e-10 {
        return Err(AbcError::DegenerateCurvature { c });
    }
    Ok((q as f64 * variance / (4.0 * c * c)).powf(0.25))
}

pub fn d_opt(s_star: [f64; 2], test: &IndicatorTest) -> Result<f64> {
    let c = bias_constant(s_star, test, DEFAULT_FD_STEP);
    d_opt_from(Q as u32, posterior_variance(s_star, test), c)
}
