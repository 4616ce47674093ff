//! Density-weighted integration of surrogates and the error measures used
//! to compare them against the underlying model.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hdmr::{CutHdmrExpansion, ModelOracle, Prediction};
use crate::model::CvtHdmrModel;
use crate::space::{Point, ProductDensity, SampleSet};

/// Anything that maps a point to a response vector: an expansion, a
/// dispatched model, or the averaging baseline.
pub trait Surrogate: Sync {
    fn input_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn predict(&self, x: &Point) -> Result<Prediction>;
    /// The single expansion behind this surrogate, when there is one
    /// (needed by the per-term integration route).
    fn as_expansion(&self) -> Option<&CutHdmrExpansion> {
        None
    }
}

impl Surrogate for CutHdmrExpansion {
    fn input_dim(&self) -> usize {
        self.input_dim()
    }
    fn out_dim(&self) -> usize {
        self.out_dim()
    }
    fn predict(&self, x: &Point) -> Result<Prediction> {
        self.evaluate(x)
    }
    fn as_expansion(&self) -> Option<&CutHdmrExpansion> {
        Some(self)
    }
}

impl Surrogate for CvtHdmrModel {
    fn input_dim(&self) -> usize {
        self.input_dim()
    }
    fn out_dim(&self) -> usize {
        self.out_dim()
    }
    fn predict(&self, x: &Point) -> Result<Prediction> {
        self.predict(x)
    }
    fn as_expansion(&self) -> Option<&CutHdmrExpansion> {
        if self.cluster_count() == 1 {
            Some(self.expansion(0))
        } else {
            None
        }
    }
}

/// Averaging view of a model: predictions are the unweighted mean of all
/// expansions instead of the nearest-centroid dispatch.
pub struct AverageOf<'a>(pub &'a CvtHdmrModel);

impl Surrogate for AverageOf<'_> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }
    fn out_dim(&self) -> usize {
        self.0.out_dim()
    }
    fn predict(&self, x: &Point) -> Result<Prediction> {
        self.0.predict_average(x)
    }
}

/// First `n` primes (Halton bases).
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes.iter().all(|&p| c % p != 0) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Radical inverse of `n` in the given base; the Halton sequence in one
/// dimension. Stateless by index, so evaluation order never matters.
pub fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut x = 0.0;
    let mut scale = inv;
    while n > 0 {
        x += (n % base) as f64 * scale;
        n /= base;
        scale *= inv;
    }
    x
}

/// Point `index` (1-based; index 0 would be the origin) of the Halton
/// sequence in the unit cube, one prime base per dimension, no scrambling
/// or leaping.
pub fn halton_point(index: u64, bases: &[u64]) -> Vec<f64> {
    bases.iter().map(|&b| radical_inverse(index, b)).collect()
}

const QMC_CHUNK: u64 = 1 << 14;

/// Mean of `f` over `points` Halton points mapped through the density's
/// per-dimension quantiles. Chunks have fixed boundaries and are reduced in
/// index order, so the result is bit-identical regardless of thread count.
pub fn qmc_mean<F>(f: F, density: &ProductDensity, points: u64, out_dim: usize) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> Result<Vec<f64>> + Sync,
{
    if points == 0 {
        return Err(Error::InvalidParameter("need at least one integration point".into()));
    }
    let dim = density.dim();
    let bases = first_primes(dim);
    let chunk_count = points.div_ceil(QMC_CHUNK);
    let partials: Vec<Result<Vec<f64>>> = (0..chunk_count)
        .into_par_iter()
        .map(|c| {
            let lo = c * QMC_CHUNK + 1;
            let hi = (c * QMC_CHUNK + QMC_CHUNK).min(points) + 1;
            let mut acc = vec![0.0; out_dim];
            for idx in lo..hi {
                let u = halton_point(idx, &bases);
                let coords: Vec<f64> =
                    u.iter().enumerate().map(|(i, &v)| density.marginal_quantile(i, v)).collect();
                let x = Point::new(coords)?;
                let v = f(&x)?;
                for (a, b) in acc.iter_mut().zip(&v) {
                    *a += b;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0.0; out_dim];
    for part in partials {
        let part = part?;
        for (t, p) in total.iter_mut().zip(&part) {
            *t += p;
        }
    }
    for t in &mut total {
        *t /= points as f64;
    }
    Ok(total)
}

/// How [`integrate_surrogate`] evaluates the integral.
#[derive(Clone, Copy, Debug)]
pub enum IntegrationMethod {
    /// Quasi-Monte-Carlo average over a Halton sequence (any density).
    Qmc { points: u64 },
    /// Per-term tensor Gauss-Legendre with density weighting; uniform
    /// densities only, and only when every retained term has at most three
    /// variables.
    PerTermTensor { order: usize },
}

impl Default for IntegrationMethod {
    fn default() -> Self {
        IntegrationMethod::Qmc { points: 1 << 20 }
    }
}

/// Integral of the surrogate against the density, one value per output
/// component.
pub fn integrate_surrogate(
    surrogate: &dyn Surrogate,
    density: &ProductDensity,
    method: IntegrationMethod,
) -> Result<Vec<f64>> {
    if surrogate.input_dim() != density.dim() {
        return Err(Error::DimensionMismatch {
            expected: density.dim(),
            got: surrogate.input_dim(),
        });
    }
    match method {
        IntegrationMethod::Qmc { points } => qmc_mean(
            |x| surrogate.predict(x).map(|p| p.values),
            density,
            points,
            surrogate.out_dim(),
        ),
        IntegrationMethod::PerTermTensor { order } => {
            let exp = surrogate.as_expansion().ok_or_else(|| {
                Error::UnsupportedMethod(
                    "per-term integration needs a single expansion, not a dispatched model".into(),
                )
            })?;
            integrate_expansion_terms(exp, density, order)
        }
    }
}

/// Integrates each retained component term by tensor Gauss-Legendre and sums
/// them. Uniform densities only; any term with more than three variables is
/// refused (the tensor grids grow too fast to be worth it).
pub fn integrate_expansion_terms(
    exp: &CutHdmrExpansion,
    density: &ProductDensity,
    order: usize,
) -> Result<Vec<f64>> {
    let ProductDensity::UniformBox { bounds } = density else {
        return Err(Error::UnsupportedMethod(
            "per-term tensor integration supports uniform densities only".into(),
        ));
    };
    if bounds.len() != exp.input_dim() {
        return Err(Error::DimensionMismatch { expected: exp.input_dim(), got: bounds.len() });
    }
    if exp.index_sets().iter().any(|s| s.len() > 3) {
        return Err(Error::UnsupportedMethod(
            "per-term tensor integration is limited to terms with at most 3 variables".into(),
        ));
    }
    let (gl_nodes, gl_weights) = gauss_legendre(order);
    let m = exp.out_dim();

    // slice integrals first, then the component recursion on numbers
    let sets = exp.index_sets().to_vec();
    let mut slice_int: Vec<Vec<f64>> = Vec::with_capacity(sets.len());
    for set in &sets {
        let s = set.len();
        let mut acc = vec![0.0; m];
        let mut idx = vec![0usize; s];
        let cells: usize = order.pow(s as u32);
        for _ in 0..cells {
            let mut w = 1.0;
            let coords: Vec<f64> = set
                .iter()
                .zip(&idx)
                .map(|(&d, &k)| {
                    // map [-1,1] to [a,b]; uniform weighting normalizes each
                    // dimension's weights to sum to one
                    let (a, b) = bounds[d];
                    w *= 0.5 * gl_weights[k];
                    a + 0.5 * (b - a) * (gl_nodes[k] + 1.0)
                })
                .collect();
            let v = exp.eval_slice(set, &coords)?;
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += w * b;
            }
            for j in (0..s).rev() {
                idx[j] += 1;
                if idx[j] < order {
                    break;
                }
                idx[j] = 0;
            }
        }
        slice_int.push(acc);
    }

    let lookup: std::collections::HashMap<&[usize], usize> =
        sets.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let mut comp_int: Vec<Vec<f64>> = Vec::with_capacity(sets.len());
    let mut total = exp.zeroth_order().to_vec();
    for (t, set) in sets.iter().enumerate() {
        let mut c = slice_int[t].clone();
        for (v, f) in c.iter_mut().zip(exp.zeroth_order()) {
            *v -= f;
        }
        let s = set.len();
        for mask in 1..(1u32 << s) - 1 {
            let sub: Vec<usize> = (0..s).filter(|&j| mask >> j & 1 == 1).map(|j| set[j]).collect();
            let sub_idx = lookup[sub.as_slice()];
            for (v, w) in c.iter_mut().zip(&comp_int[sub_idx]) {
                *v -= w;
            }
        }
        for (t_acc, v) in total.iter_mut().zip(&c) {
            *t_acc += v;
        }
        comp_int.push(c);
    }
    Ok(total)
}

/// Relative integral error |reference - estimate| / |reference|.
pub fn relative_integral_error(reference: f64, surrogate_integral: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((reference - surrogate_integral).abs() / reference.abs())
}

/// Reference integral of a raw model by Halton QMC, with a two-half-sequence
/// gap as a resolution diagnostic.
#[derive(Clone, Debug)]
pub struct ReferenceIntegral {
    pub value: Vec<f64>,
    /// |first-half estimate - second-half estimate| per component.
    pub half_gap: Vec<f64>,
}

pub fn reference_integral(
    oracle: &ModelOracle,
    density: &ProductDensity,
    points: u64,
) -> Result<ReferenceIntegral> {
    let half = (points / 2).max(1);
    let m = oracle.output_dim();
    let first = qmc_mean(|x| oracle.call(x.coords()), density, half, m)?;
    let full = qmc_mean(|x| oracle.call(x.coords()), density, 2 * half, m)?;
    // second-half mean from the two prefix means
    let value = full.clone();
    let half_gap = first
        .iter()
        .zip(&full)
        .map(|(a, f)| {
            let second = 2.0 * f - a;
            (a - second).abs()
        })
        .collect();
    Ok(ReferenceIntegral { value, half_gap })
}

/// Sample error statistics of a surrogate against the true model.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorStats {
    /// Mean of the per-sample relative squared error.
    pub mean: f64,
    /// Unbiased sample variance of the same quantity.
    pub variance: f64,
    pub samples_used: usize,
    /// Samples dropped because the true response had zero norm.
    pub samples_excluded: usize,
}

/// Relative squared error rho(x) = ||u - u_hat||^2 / ||u||^2 averaged over a
/// test set, computing true responses through the metered oracle.
pub fn error_stats(
    surrogate: &dyn Surrogate,
    oracle: &ModelOracle,
    test: &SampleSet,
) -> Result<ErrorStats> {
    let truths: Vec<Result<Vec<f64>>> = if oracle.reentrant() {
        test.points().par_iter().map(|x| oracle.call(x.coords())).collect()
    } else {
        test.points().iter().map(|x| oracle.call(x.coords())).collect()
    };
    let truths: Result<Vec<Vec<f64>>> = truths.into_iter().collect();
    error_stats_with_truth(surrogate, test, &truths?)
}

/// Same statistics with precomputed true responses (one expensive sweep can
/// serve many surrogates).
pub fn error_stats_with_truth(
    surrogate: &dyn Surrogate,
    test: &SampleSet,
    truths: &[Vec<f64>],
) -> Result<ErrorStats> {
    if truths.len() != test.len() {
        return Err(Error::InvalidParameter(format!(
            "{} true responses for {} test samples",
            truths.len(),
            test.len()
        )));
    }
    let rhos: Vec<Result<Option<f64>>> = test
        .points()
        .par_iter()
        .zip(truths.par_iter())
        .map(|(x, truth)| {
            let norm_sq: f64 = truth.iter().map(|v| v * v).sum();
            if norm_sq == 0.0 {
                return Ok(None);
            }
            let pred = surrogate.predict(x)?;
            let err_sq: f64 = pred
                .values
                .iter()
                .zip(truth)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            Ok(Some(err_sq / norm_sq))
        })
        .collect();

    let rhos: Result<Vec<Option<f64>>> = rhos.into_iter().collect();
    stats_from_rhos(&rhos?)
}

/// Aggregates per-sample relative squared errors (`None` marks an excluded
/// zero-norm sample) into mean and unbiased variance.
pub fn stats_from_rhos(rhos: &[Option<f64>]) -> Result<ErrorStats> {
    let used: Vec<f64> = rhos.iter().flatten().copied().collect();
    let excluded = rhos.len() - used.len();
    if used.is_empty() {
        return Err(Error::InvalidParameter("every test sample had a zero-norm response".into()));
    }
    let n = used.len() as f64;
    let mean = used.iter().sum::<f64>() / n;
    let variance = if used.len() < 2 {
        0.0
    } else {
        used.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    };
    Ok(ErrorStats { mean, variance, samples_used: used.len(), samples_excluded: excluded })
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
