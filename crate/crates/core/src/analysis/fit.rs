//! Least-squares fits: the constant-cost MSE curve `a·δ^(-q) + b·δ⁴` and
//! power laws on log-log axes.

use nalgebra::{DMatrix, DVector};

use crate::error::{AbcError, Result};

/// Fitted `MSE(δ) = a·δ^(-q) + b·δ⁴` and its minimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseFit {
    pub q: u32,
    /// Variance-side coefficient.
    pub a: f64,
    /// Squared-bias coefficient.
    pub b: f64,
    pub delta_star: f64,
    pub mse_star: f64,
    pub rss: f64,
}

impl MseFit {
    pub fn predict(&self, delta: f64) -> f64 {
        curve(self.a, self.b, self.q, delta)
    }
}

fn curve(a: f64, b: f64, q: u32, delta: f64) -> f64 {
    a * delta.powi(-(q as i32)) + b * delta.powi(4)
}

/// Ordinary least squares for `MSE(δ) = a·δ^(-q) + b·δ⁴`.
///
/// Fails with [`AbcError::NegativeCoefficient`] when the fitted curve has no
/// interior minimum (`a ≤ 0` or `b ≤ 0`).
pub fn fit_mse_curve(points: &[(f64, f64)], q: u32) -> Result<MseFit> {
    fit_mse_curve_weighted(points, &vec![1.0; points.len()], q)
}

/// Weighted least squares, minimising `Σ wᵢ (mseᵢ - a·δᵢ^(-q) - b·δᵢ⁴)²`.
/// Typical weights are `1/se²`.
pub fn fit_mse_curve_weighted(points: &[(f64, f64)], weights: &[f64], q: u32) -> Result<MseFit> {
    if points.len() < 3 {
        return Err(AbcError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if weights.len() != points.len() {
        return Err(AbcError::DimensionMismatch {
            what: "fit weights",
            expected: points.len(),
            actual: weights.len(),
        });
    }
    if q == 0 {
        return Err(AbcError::InvalidArgument("q must be at least 1".into()));
    }
    for (&(delta, mse), &w) in points.iter().zip(weights) {
        if !(delta > 0.0 && delta.is_finite() && mse.is_finite() && w > 0.0 && w.is_finite()) {
            return Err(AbcError::InvalidArgument(format!(
                "bad fit point (delta = {delta}, mse = {mse}, weight = {w})"
            )));
        }
    }

    let m = points.len();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut design = DMatrix::zeros(m, 2);
    let mut rhs = DVector::zeros(m);
    for (i, &(delta, mse)) in points.iter().enumerate() {
        design[(i, 0)] = sqrt_w[i] * delta.powi(-(q as i32));
        design[(i, 1)] = sqrt_w[i] * delta.powi(4);
        rhs[i] = sqrt_w[i] * mse;
    }
    let (a, b) = solve_two_column(design, &rhs)?;

    let rss = points
        .iter()
        .zip(weights)
        .map(|(&(delta, mse), w)| w * (mse - curve(a, b, q, delta)).powi(2))
        .sum();

    if !(a > 0.0 && b > 0.0) {
        return Err(AbcError::NegativeCoefficient { a, b });
    }
    let delta_star = optimal_delta(a, b, q)?;
    Ok(MseFit {
        q,
        a,
        b,
        delta_star,
        mse_star: curve(a, b, q, delta_star),
        rss,
    })
}

/// Least squares with column equilibration and an SVD solve; the basis
/// columns differ in scale by orders of magnitude over typical grids.
fn solve_two_column(mut design: DMatrix<f64>, rhs: &DVector<f64>) -> Result<(f64, f64)> {
    let mut scales = [0.0; 2];
    for (j, scale) in scales.iter_mut().enumerate() {
        *scale = design.column(j).norm();
        if *scale == 0.0 || !scale.is_finite() {
            return Err(AbcError::SingularDesign);
        }
        design.column_mut(j).scale_mut(1.0 / *scale);
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(AbcError::SingularDesign);
    }
    let coef = svd.solve(rhs, 0.0).map_err(|_| AbcError::SingularDesign)?;
    Ok((coef[0] / scales[0], coef[1] / scales[1]))
}

/// Minimiser `(q·a / (4b))^(1/(q+4))` of `a·δ^(-q) + b·δ⁴`.
pub fn optimal_delta(a: f64, b: f64, q: u32) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && q >= 1) {
        return Err(AbcError::InvalidCoefficients { a, b, q });
    }
    let q = q as f64;
    Ok((q * a / (4.0 * b)).powf(1.0 / (q + 4.0)))
}

/// `log y = intercept + gradient · log x`, i.e. `y = A·x^B` with
/// `A = exp(intercept)`, `B = gradient`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub gradient: f64,
    pub intercept: f64,
    /// Standard OLS standard error of the slope.
    pub gradient_se: f64,
    pub n_points: usize,
}

impl PowerLawFit {
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.gradient * x.ln()).exp()
    }
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(AbcError::DimensionMismatch {
            what: "log-log fit ys",
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(AbcError::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    if let Some(&bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(AbcError::NonPositiveInput(bad));
    }

    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(AbcError::SingularDesign);
    }
    let gradient = sxy / sxx;
    let intercept = my - gradient * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - gradient * x).powi(2))
        .sum();
    Ok(PowerLawFit {
        gradient,
        intercept,
        gradient_se: (rss / (n - 2.0) / sxx).sqrt(),
        n_points: lx.len(),
    })
}
