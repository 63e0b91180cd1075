use super::{mean_and_sample_variance, Problem};
use crate::error::{AbcError, Result};
use crate::sampler::{ModelSpec, StopRule};

/// Empirical bias at one tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSweepRow {
    pub delta: f64,
    /// Mean of `Y - y` over the replicates.
    pub mean_bias: f64,
    /// Standard error of `mean_bias` (sample standard deviation over `√k`).
    pub std_error: f64,
    pub k: usize,
    pub n: u64,
    pub mean_proposals: f64,
    pub total_proposals: u64,
}

impl BiasSweepRow {
    /// 95% interval, `mean ± 1.96 SE`.
    pub fn interval(&self) -> (f64, f64) {
        (
            self.mean_bias - 1.96 * self.std_error,
            self.mean_bias + 1.96 * self.std_error,
        )
    }
}

/// Mean squared error of the fixed-`n` estimator at one tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsePoint {
    pub delta: f64,
    pub n: u64,
    pub k: usize,
    /// Mean of `(Y - y)²`.
    pub mse: f64,
    /// Standard error of `mse`.
    pub se: f64,
    pub mean_bias: f64,
    /// Population variance (divisor `k`) of the estimates, so that
    /// `mse = variance + mean_bias²` holds exactly up to rounding.
    pub variance: f64,
    pub mean_proposals: f64,
    pub total_proposals: u64,
}

fn check_replicates(k: usize, n: u64) -> Result<()> {
    if k < 2 {
        return Err(AbcError::InvalidArgument(format!(
            "need at least 2 replicates, got {k}"
        )));
    }
    if n == 0 {
        return Err(AbcError::InvalidArgument("n must be at least 1".into()));
    }
    Ok(())
}

/// Empirical bias of `Y` at each tolerance, from `k` fixed-`n` runs per
/// tolerance. Replicate `j` uses the same seed at every tolerance. Rows come
/// back sorted by `delta`.
pub fn bias_sweep<M, H>(
    problem: &Problem<'_, M, H>,
    deltas: &[f64],
    n: u64,
    k: usize,
    base_seed: u64,
) -> Result<Vec<BiasSweepRow>>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    check_replicates(k, n)?;
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|delta| {
            let reps = problem.replicates(delta, StopRule::accepted(n), k, base_seed)?;
            let errors: Vec<f64> = reps.iter().map(|r| r.estimate - problem.y_exact).collect();
            let (mean_bias, var) = mean_and_sample_variance(&errors);
            let total: u64 = reps.iter().map(|r| r.proposals).sum();
            Ok(BiasSweepRow {
                delta,
                mean_bias,
                std_error: (var / k as f64).sqrt(),
                k,
                n,
                mean_proposals: total as f64 / k as f64,
                total_proposals: total,
            })
        })
        .collect()
}

/// Mean squared error over `k` fixed-`n` runs at tolerance `delta`.
pub fn mse_point<M, H>(
    problem: &Problem<'_, M, H>,
    delta: f64,
    n: u64,
    k: usize,
    base_seed: u64,
) -> Result<MsePoint>
where
    M: ModelSpec + ?Sized,
    H: Fn(&[f64]) -> f64 + Sync,
{
    check_replicates(k, n)?;
    let reps = problem.replicates(delta, StopRule::accepted(n), k, base_seed)?;
    let errors: Vec<f64> = reps.iter().map(|r| r.estimate - problem.y_exact).collect();
    let total: u64 = reps.iter().map(|r| r.proposals).sum();
    Ok(summarise_errors(delta, n, &errors, total))
}

pub(crate) fn summarise_errors(
    delta: f64,
    n: u64,
    errors: &[f64],
    total_proposals: u64,
) -> MsePoint {
    let k = errors.len();
    let squares: Vec<f64> = errors.iter().map(|e| e * e).collect();
    let (mse, sq_var) = mean_and_sample_variance(&squares);
    let (mean_bias, var) = mean_and_sample_variance(errors);
    MsePoint {
        delta,
        n,
        k,
        mse,
        se: (sq_var / k as f64).sqrt(),
        mean_bias,
        variance: var * (k as f64 - 1.0) / k as f64,
        mean_proposals: total_proposals as f64 / k as f64,
        total_proposals,
    }
}

/// Sample sizes `n(δ) = round(κ·δ^q)` that keep the expected cost, of order
/// `n·δ^(-q)`, the same at every tolerance.
pub fn constant_cost_schedule(deltas: &[f64], kappa: f64, q: u32) -> Result<Vec<u64>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(AbcError::InvalidArgument(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    deltas
        .iter()
        .map(|&delta| {
            let value = kappa * delta.powi(q as i32);
            if !(value >= 1.0) || !value.is_finite() {
                return Err(AbcError::ScheduleUnderflow { delta, value });
            }
            Ok(value.round() as u64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{AcceptanceNorm, Dims, FnModel};
    use crate::toy::{IndicatorTest, ToyModel};
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn schedule_examples() {
        assert_eq!(
            constant_cost_schedule(&[1.0, 0.5], 1000.0, 2).unwrap(),
            vec![1000, 250]
        );
        assert_eq!(constant_cost_schedule(&[0.2], 100.0, 1).unwrap(), vec![20]);
        let deltas = [0.3, 0.45, 0.7, 1.1];
        let ns = constant_cost_schedule(&deltas, 5000.0, 2).unwrap();
        for (d, n) in deltas.iter().zip(ns) {
            assert!((n as f64 / (d * d) - 5000.0).abs() <= 0.5 / (d * d));
        }
        assert!(matches!(
            constant_cost_schedule(&[0.01], 100.0, 2),
            Err(AbcError::ScheduleUnderflow { .. })
        ));
    }

    #[test]
    fn constant_test_function_has_zero_error() {
        let model = ToyModel::default();
        let norm = AcceptanceNorm::euclidean(2);
        let s = [1.0, 1.0];
        let problem = Problem::new(&model, &norm, &s, |_: &[f64]| 1.0, 1.0);
        let rows = bias_sweep(&problem, &[0.8, 0.5], 20, 10, 1).unwrap();
        assert_eq!(rows[0].delta, 0.5);
        for row in rows {
            assert_eq!(row.mean_bias, 0.0);
            assert_eq!(row.std_error, 0.0);
        }
        let point = mse_point(&problem, 0.5, 20, 10, 1).unwrap();
        assert_eq!(point.mse, 0.0);
    }

    #[test]
    fn mse_decomposes_into_variance_and_bias() {
        let model = ToyModel::default();
        let norm = AcceptanceNorm::euclidean(2);
        let s = [1.0, 1.0];
        let t = IndicatorTest::default();
        let problem = Problem::new(&model, &norm, &s, |th: &[f64]| t.eval(th), 0.3);
        let p = mse_point(&problem, 0.7, 50, 200, 9).unwrap();
        assert!((p.mse - (p.variance + p.mean_bias * p.mean_bias)).abs() <= 1e-12 * p.mse);
    }

    #[test]
    fn replicates_do_not_depend_on_thread_count() {
        let model = FnModel::new(
            Dims::new(1, 1, 1),
            |rng: &mut crate::AbcRng| vec![StandardNormal.sample(rng)],
            |t: &[f64], rng: &mut crate::AbcRng| {
                let e: f64 = StandardNormal.sample(rng);
                vec![t[0] + e]
            },
            |x: &[f64]| x.to_vec(),
        );
        let norm = AcceptanceNorm::euclidean(1);
        let s = [0.3];
        let problem = Problem::new(&model, &norm, &s, |t: &[f64]| t[0], 0.15);
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| bias_sweep(&problem, &[0.2, 0.4], 30, 64, 5).unwrap())
        };
        let one = run_with(1);
        let eight = run_with(8);
        assert_eq!(one, eight);
    }

    #[test]
    fn argument_checks() {
        let model = ToyModel::default();
        let norm = AcceptanceNorm::euclidean(2);
        let s = [1.0, 1.0];
        let problem = Problem::new(&model, &norm, &s, |_: &[f64]| 1.0, 1.0);
        assert!(bias_sweep(&problem, &[0.5], 10, 1, 0).is_err());
        assert!(mse_point(&problem, 0.5, 0, 10, 0).is_err());
    }
}
