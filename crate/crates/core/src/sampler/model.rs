use super::{AbcRng, AcceptanceNorm};

/// Dimensions of a model: parameter `p`, raw data `d`, summary `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl Dims {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        assert!(p > 0 && d > 0 && q > 0, "model dimensions must be positive");
        Self { p, d, q }
    }
}

/// A generative model the sampler can draw from.
///
/// Implementations write into caller-owned buffers whose lengths are exactly
/// the declared dimensions, so the proposal loop does not allocate.
/// `summary` must be deterministic.
pub trait ModelSpec: Sync {
    fn dims(&self) -> Dims;

    /// Draw a parameter vector from the prior into `theta` (length `p`).
    fn prior_sample(&self, rng: &mut AbcRng, theta: &mut [f64]);

    /// Simulate data given `theta` into `data` (length `d`).
    fn simulate(&self, theta: &[f64], rng: &mut AbcRng, data: &mut [f64]);

    /// Reduce `data` to its summary statistic in `out` (length `q`).
    fn summary(&self, data: &[f64], out: &mut [f64]);
}

impl<M: ModelSpec + ?Sized> ModelSpec for &M {
    fn dims(&self) -> Dims {
        (**self).dims()
    }

    fn prior_sample(&self, rng: &mut AbcRng, theta: &mut [f64]) {
        (**self).prior_sample(rng, theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut AbcRng, data: &mut [f64]) {
        (**self).simulate(theta, rng, data)
    }

    fn summary(&self, data: &[f64], out: &mut [f64]) {
        (**self).summary(data, out)
    }
}

/// A model assembled from three closures.
///
/// Each closure returns an owned vector; a vector of the wrong length is a
/// contract violation and panics.
pub struct FnModel<P, S, T> {
    dims: Dims,
    prior: P,
    simulate: S,
    summary: T,
}

impl<P, S, T> FnModel<P, S, T>
where
    P: Fn(&mut AbcRng) -> Vec<f64> + Sync,
    S: Fn(&[f64], &mut AbcRng) -> Vec<f64> + Sync,
    T: Fn(&[f64]) -> Vec<f64> + Sync,
{
    pub fn new(dims: Dims, prior: P, simulate: S, summary: T) -> Self {
        Self {
            dims,
            prior,
            simulate,
            summary,
        }
    }
}

impl<P, S, T> ModelSpec for FnModel<P, S, T>
where
    P: Fn(&mut AbcRng) -> Vec<f64> + Sync,
    S: Fn(&[f64], &mut AbcRng) -> Vec<f64> + Sync,
    T: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn dims(&self) -> Dims {
        self.dims
    }

    fn prior_sample(&self, rng: &mut AbcRng, theta: &mut [f64]) {
        theta.copy_from_slice(&(self.prior)(rng));
    }

    fn simulate(&self, theta: &[f64], rng: &mut AbcRng, data: &mut [f64]) {
        data.copy_from_slice(&(self.simulate)(theta, rng));
    }

    fn summary(&self, data: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&(self.summary)(data));
    }
}

/// Wraps a model so its summary becomes `W·S(x)` for the whitening matrix of
/// `norm`. Running the wrapped model under the Euclidean norm (with the
/// observation whitened the same way) makes the same acceptance decisions as
/// running the original model under `norm`.
pub struct Whitened<'a, M> {
    inner: M,
    norm: &'a AcceptanceNorm,
}

impl<'a, M: ModelSpec> Whitened<'a, M> {
    pub fn new(inner: M, norm: &'a AcceptanceNorm) -> Self {
        assert_eq!(inner.dims().q, norm.dim(), "norm dimension must match q");
        Self { inner, norm }
    }
}

impl<M: ModelSpec> ModelSpec for Whitened<'_, M> {
    fn dims(&self) -> Dims {
        self.inner.dims()
    }

    fn prior_sample(&self, rng: &mut AbcRng, theta: &mut [f64]) {
        self.inner.prior_sample(rng, theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut AbcRng, data: &mut [f64]) {
        self.inner.simulate(theta, rng, data)
    }

    fn summary(&self, data: &[f64], out: &mut [f64]) {
        let mut raw = vec![0.0; out.len()];
        self.inner.summary(data, &mut raw);
        self.norm.apply(&raw, out);
    }
}
