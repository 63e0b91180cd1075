use nalgebra::DMatrix;

use crate::error::{AbcError, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-12;

/// The acceptance norm `‖s‖_A = sqrt(sᵀ A⁻¹ s)`, stored together with the
/// symmetric inverse square root `W = A^(-1/2)` so that `‖s‖_A = ‖W s‖₂`.
#[derive(Debug, Clone)]
pub struct AcceptanceNorm {
    a: DMatrix<f64>,
    w: DMatrix<f64>,
    // row-major copy of `w` for the hot loop
    w_rows: Vec<f64>,
    identity: bool,
}

impl AcceptanceNorm {
    /// The Euclidean norm on `R^q` (`A = W = I`).
    pub fn euclidean(q: usize) -> Self {
        let eye = DMatrix::identity(q, q);
        Self::from_parts(eye.clone(), eye)
    }

    fn from_parts(a: DMatrix<f64>, w: DMatrix<f64>) -> Self {
        let q = a.nrows();
        let identity = a == DMatrix::identity(q, q);
        let w_rows = (0..q)
            .flat_map(|i| (0..q).map(move |j| (i, j)))
            .map(|(i, j)| w[(i, j)])
            .collect();
        Self {
            a,
            w,
            w_rows,
            identity,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn whitening(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn is_euclidean(&self) -> bool {
        self.identity
    }

    /// `out = W·s`.
    pub fn apply(&self, s: &[f64], out: &mut [f64]) {
        let q = self.dim();
        debug_assert_eq!(s.len(), q);
        if self.identity {
            out.copy_from_slice(s);
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w_rows[i * q..(i + 1) * q];
            *o = row.iter().zip(s).map(|(w, x)| w * x).sum();
        }
    }

    /// `‖W (s - s_star)‖₂`.
    pub fn distance(&self, s: &[f64], s_star: &[f64]) -> f64 {
        let q = self.dim();
        debug_assert_eq!(s.len(), q);
        debug_assert_eq!(s_star.len(), q);
        if self.identity {
            return s
                .iter()
                .zip(s_star)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
        let mut total = 0.0;
        for i in 0..q {
            let row = &self.w_rows[i * q..(i + 1) * q];
            let v: f64 = row
                .iter()
                .zip(s.iter().zip(s_star))
                .map(|(w, (x, y))| w * (x - y))
                .sum();
            total += v * v;
        }
        total.sqrt()
    }
}

/// Build the acceptance norm for a symmetric positive-definite `A`, with
/// `W = V diag(λ^(-1/2)) Vᵀ` from the symmetric eigendecomposition.
///
/// Symmetry is checked entrywise against `1e-12 · max(1, max|A_ij|)`; an
/// eigenvalue at or below `1e-12 · λ_max` is treated as not positive.
pub fn whitening_transform(a: &DMatrix<f64>) -> Result<AcceptanceNorm> {
    let q = a.nrows();
    if q == 0 || a.ncols() != q {
        return Err(AbcError::DimensionMismatch {
            what: "acceptance matrix columns",
            expected: q,
            actual: a.ncols(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(AbcError::InvalidArgument(
            "acceptance matrix has non-finite entries".into(),
        ));
    }

    let scale = a.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut max_asym = 0.0_f64;
    for i in 0..q {
        for j in (i + 1)..q {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOL * scale {
        return Err(AbcError::NonSymmetric {
            max_asymmetry: max_asym,
        });
    }

    let eig = a.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if lmax <= 0.0 || lmin <= EIGEN_FLOOR * lmax {
        return Err(AbcError::NotPositiveDefinite { eigenvalue: lmin });
    }

    let v = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let w = v * inv_sqrt * v.transpose();
    let w = (&w + w.transpose()) * 0.5;

    Ok(AcceptanceNorm::from_parts(a.clone(), w))
}
