//! Rejection ABC: propose from the prior, simulate, summarise, and keep the
//! parameter when the summary lands within `delta` of the observation.

mod model;
mod norm;
mod seed;

pub use model::{Dims, FnModel, ModelSpec, Whitened};
pub use norm::{whitening_transform, AcceptanceNorm};
pub use seed::{derive_replicate_seed, rng_from_seed, AbcRng};

use crate::error::{AbcError, Result};

/// Proposal cap applied in fixed-accepted mode unless overridden.
pub const DEFAULT_MAX_PROPOSALS: u64 = 100_000_000;

/// When the proposal loop stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Propose until exactly `n` parameters are accepted. Exceeding
    /// `max_proposals` is an error rather than a hang.
    FixedAccepted { n: u64, max_proposals: u64 },
    /// Draw exactly `n_hat` proposals. `fallback_c` is the estimate to report
    /// if none is accepted.
    FixedProposals { n_hat: u64, fallback_c: f64 },
}

impl StopRule {
    pub fn accepted(n: u64) -> Self {
        StopRule::FixedAccepted {
            n,
            max_proposals: DEFAULT_MAX_PROPOSALS,
        }
    }

    pub fn proposals(n_hat: u64, fallback_c: f64) -> Self {
        StopRule::FixedProposals { n_hat, fallback_c }
    }

    /// Estimate reported when a run accepts nothing.
    pub fn fallback(&self) -> f64 {
        match *self {
            StopRule::FixedProposals { fallback_c, .. } => fallback_c,
            StopRule::FixedAccepted { .. } => f64::NAN,
        }
    }
}

/// Configuration of a single ABC run.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcConfig {
    pub s_star: Vec<f64>,
    /// Acceptance radius in whitened units; `f64::INFINITY` accepts every
    /// proposal.
    pub delta: f64,
    pub stop: StopRule,
    pub seed: u64,
}

impl AbcConfig {
    pub fn new(s_star: Vec<f64>, delta: f64, stop: StopRule, seed: u64) -> Self {
        Self {
            s_star,
            delta,
            stop,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // `!(x > 0)` also rejects NaN
        if !(self.delta > 0.0) {
            return Err(AbcError::InvalidArgument(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        match self.stop {
            StopRule::FixedAccepted { n, max_proposals } => {
                if n == 0 {
                    return Err(AbcError::InvalidArgument("n must be at least 1".into()));
                }
                if max_proposals == 0 {
                    return Err(AbcError::InvalidArgument(
                        "max_proposals must be at least 1".into(),
                    ));
                }
            }
            StopRule::FixedProposals { n_hat, .. } => {
                if n_hat == 0 {
                    return Err(AbcError::InvalidArgument("N_hat must be at least 1".into()));
                }
            }
        }
        if self.s_star.iter().any(|x| !x.is_finite()) {
            return Err(AbcError::InvalidArgument(
                "observed summary must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Output of one ABC run.
#[derive(Debug, Clone, PartialEq)]
pub struct AbcRun {
    /// Accepted parameter vectors, concatenated (`p` values each).
    pub accepted: Vec<f64>,
    pub p: usize,
    pub n_accepted: u64,
    pub n_proposals: u64,
    /// Whitened distance of each accepted proposal.
    pub distances: Vec<f64>,
    /// Zero-based proposal index of each acceptance.
    pub accepted_at: Vec<u64>,
    pub delta: f64,
    pub seed: u64,
}

impl AbcRun {
    pub fn samples(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.accepted.chunks_exact(self.p)
    }

    pub fn sample(&self, j: usize) -> &[f64] {
        &self.accepted[j * self.p..(j + 1) * self.p]
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.n_accepted as f64 / self.n_proposals as f64
    }
}

/// Run the rejection algorithm.
///
/// The result is a pure function of `(model, norm, cfg)`: all randomness
/// comes from a generator seeded with `cfg.seed`. Acceptance is non-strict,
/// `‖W(S(X) - s*)‖₂ ≤ δ`, and `n_proposals` counts every loop iteration
/// including the accepted ones.
pub fn abc_rejection<M: ModelSpec + ?Sized>(
    model: &M,
    norm: &AcceptanceNorm,
    cfg: &AbcConfig,
) -> Result<AbcRun> {
    cfg.validate()?;
    let dims = model.dims();
    if cfg.s_star.len() != dims.q {
        return Err(AbcError::DimensionMismatch {
            what: "observed summary",
            expected: dims.q,
            actual: cfg.s_star.len(),
        });
    }
    if norm.dim() != dims.q {
        return Err(AbcError::DimensionMismatch {
            what: "acceptance norm",
            expected: dims.q,
            actual: norm.dim(),
        });
    }

    let mut rng = rng_from_seed(cfg.seed);
    let mut theta = vec![0.0; dims.p];
    let mut data = vec![0.0; dims.d];
    let mut summary = vec![0.0; dims.q];

    let (target, budget) = match cfg.stop {
        StopRule::FixedAccepted { n, max_proposals } => (n, max_proposals),
        StopRule::FixedProposals { n_hat, .. } => (u64::MAX, n_hat),
    };

    let mut accepted = Vec::new();
    let mut distances = Vec::new();
    let mut accepted_at = Vec::new();
    let mut n_accepted = 0u64;
    let mut n_proposals = 0u64;

    while n_accepted < target {
        if n_proposals == budget {
            if let StopRule::FixedAccepted { .. } = cfg.stop {
                return Err(AbcError::ProposalCapExceeded {
                    proposals: n_proposals,
                    accepted: n_accepted,
                });
            }
            break;
        }
        model.prior_sample(&mut rng, &mut theta);
        model.simulate(&theta, &mut rng, &mut data);
        model.summary(&data, &mut summary);
        let dist = norm.distance(&summary, &cfg.s_star);
        if dist <= cfg.delta {
            accepted.extend_from_slice(&theta);
            distances.push(dist);
            accepted_at.push(n_proposals);
            n_accepted += 1;
        }
        n_proposals += 1;
    }

    Ok(AbcRun {
        accepted,
        p: dims.p,
        n_accepted,
        n_proposals,
        distances,
        accepted_at,
        delta: cfg.delta,
        seed: cfg.seed,
    })
}

/// `(1/n) Σ h(θ_j)` over the accepted samples, or `fallback_c` when nothing
/// was accepted.
pub fn posterior_estimate<H>(run: &AbcRun, h: H, fallback_c: f64) -> f64
where
    H: Fn(&[f64]) -> f64,
{
    if run.n_accepted == 0 {
        return fallback_c;
    }
    run.samples().map(h).sum::<f64>() / run.n_accepted as f64
}

/// Cost of a run modelled as `a + b·N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub a: f64,
    pub b: f64,
}

impl CostModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(AbcError::InvalidArgument(format!(
                "cost model needs a >= 0 and b > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// One unit per proposal, no fixed overhead.
    pub fn proposals() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn cost(&self, n_proposals: f64) -> f64 {
        self.a + self.b * n_proposals
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::proposals()
    }
}

pub fn run_cost(run: &AbcRun, cm: &CostModel) -> f64 {
    cm.cost(run.n_proposals as f64)
}
