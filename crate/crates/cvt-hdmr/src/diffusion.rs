//! Stochastic diffusion benchmark: a lognormal coefficient field driven by a
//! discrete Karhunen-Loeve expansion, discretized with a 5-point finite
//! difference scheme on the unit square and solved by conjugate gradients.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hdmr::ModelFn;
use crate::rng::SplitMix64;

/// Largest grid the dense covariance eigensolver runs on directly; finer
/// grids get coarse-grid modes interpolated up (the kernel is long-range
/// smooth, so its leading spectrum is already resolved there).
const KL_DIRECT_LIMIT: usize = 31;

/// Default squared-distance scale of the covariance kernel
/// `exp(-||x - x'||^2 / corr)`.
pub const DEFAULT_CORRELATION: f64 = 0.5;

/// Grid nodes including the boundary: `side = n + 2` per direction, spacing
/// `h = 1/(n+1)`, row-major with x fastest.
#[derive(Clone, Copy, Debug)]
struct Grid {
    n: usize,
    side: usize,
    h: f64,
}

impl Grid {
    fn new(n: usize) -> Self {
        Grid { n, side: n + 2, h: 1.0 / (n as f64 + 1.0) }
    }

    fn node(&self, idx: usize) -> (f64, f64) {
        let ix = idx % self.side;
        let iy = idx / self.side;
        (ix as f64 * self.h, iy as f64 * self.h)
    }

    fn count(&self) -> usize {
        self.side * self.side
    }
}

/// Discrete Karhunen-Loeve basis: descending eigenvalues and node-sampled
/// modes, orthonormal under the h^2-weighted inner product.
#[derive(Clone, Debug)]
pub struct KlBasis {
    pub lambdas: Vec<f64>,
    /// One node field per eigenvalue, over the full (n+2)^2 grid.
    pub modes: Vec<Vec<f64>>,
    /// Fraction of the covariance trace captured by the retained modes.
    pub captured_fraction: f64,
}

fn covariance_matrix(grid: Grid, correlation: f64) -> Vec<f64> {
    let count = grid.count();
    let coords: Vec<(f64, f64)> = (0..count).map(|i| grid.node(i)).collect();
    let mut c = vec![0.0; count * count];
    for i in 0..count {
        for j in i..count {
            let dx = coords[i].0 - coords[j].0;
            let dy = coords[i].1 - coords[j].1;
            let v = (-(dx * dx + dy * dy) / correlation).exp();
            c[i * count + j] = v;
            c[j * count + i] = v;
        }
    }
    c
}

fn matvec(c: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &c[i * n..(i + 1) * n];
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Leading eigenpairs of a dense symmetric matrix by power iteration with
/// projection deflation. Residual tolerance is relative to the largest
/// eigenvalue found.
fn dominant_eigenpairs(c: &[f64], dim: usize, count: usize, tol: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let max_iter = 20_000;
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(count);
    let mut rng = SplitMix64::new(0x6b6c);
    for k in 0..count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.next_f64() - 0.5).collect();
        orthogonalize(&mut v, &pairs);
        normalize(&mut v);
        let mut w = vec![0.0; dim];
        let mut lambda = 0.0;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            matvec(c, &v, &mut w);
            orthogonalize(&mut w, &pairs);
            lambda = dot(&v, &w);
            residual = w
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                .sum::<f64>()
                .sqrt();
            let scale = pairs.first().map_or(lambda.abs(), |p| p.0);
            normalize(&mut w);
            std::mem::swap(&mut v, &mut w);
            if residual <= tol * scale.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        let scale = pairs.first().map_or(lambda.abs(), |p| p.0);
        if residual > tol * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NonConvergence(format!(
                "eigenpair {k}: residual {residual:.3e} after {max_iter} iterations (tol {tol:.1e})"
            )));
        }
        fix_sign(&mut v);
        pairs.push((lambda, v.clone()));
    }
    // symmetry-degenerate pairs can emerge a few ulps out of order
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(pairs)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    for x in v {
        *x /= norm;
    }
}

fn orthogonalize(v: &mut [f64], pairs: &[(f64, Vec<f64>)]) {
    for _ in 0..2 {
        for (_, u) in pairs {
            let c = dot(v, u);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= c * y;
            }
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut lead = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[lead].abs() {
            lead = i;
        }
    }
    if v[lead] < 0.0 {
        for x in v {
            *x = -*x;
        }
    }
}

/// Extracts the `count` dominant eigenpairs of the covariance kernel on the
/// grid with `n` interior nodes per side, scaled to the continuum convention
/// (lambda = h^2 * matrix eigenvalue, modes normalized to h^2-unit norm).
///
/// Grids beyond 31 interior nodes are served from a 31-node computation with
/// modes bilinearly interpolated up and re-orthonormalized.
pub fn kl_decompose(n: usize, correlation: f64, count: usize) -> Result<KlBasis> {
    let grid = Grid::new(n);
    if count == 0 || count > grid.count() {
        return Err(Error::InvalidParameter(format!(
            "mode count must be in 1..={}, got {count}",
            grid.count()
        )));
    }
    if !(correlation > 0.0) {
        return Err(Error::InvalidParameter("correlation scale must be positive".into()));
    }

    let base_n = n.min(KL_DIRECT_LIMIT);
    let base = Grid::new(base_n);
    let c = covariance_matrix(base, correlation);
    let pairs = dominant_eigenpairs(&c, base.count(), count, 1e-10)?;

    let trace = base.h * base.h * base.count() as f64; // kernel diagonal is 1
    let lambdas: Vec<f64> = pairs.iter().map(|(mu, _)| base.h * base.h * mu).collect();
    let captured_fraction = lambdas.iter().sum::<f64>() / trace;

    let mut modes: Vec<Vec<f64>> = if base_n == n {
        pairs
            .iter()
            .map(|(_, v)| v.iter().map(|x| x / base.h).collect())
            .collect()
    } else {
        pairs
            .iter()
            .map(|(_, v)| {
                (0..grid.count())
                    .map(|idx| {
                        let (x, y) = grid.node(idx);
                        bilinear(v, base, x, y) / base.h
                    })
                    .collect()
            })
            .collect()
    };

    // h^2-weighted Gram-Schmidt; exact on the direct path, repairs the small
    // orthogonality drift bilinear interpolation introduces.
    let w = grid.h * grid.h;
    for k in 0..modes.len() {
        let (done, rest) = modes.split_at_mut(k);
        let vk = &mut rest[0];
        for uj in done.iter() {
            let c = w * dot(vk, uj);
            for (x, y) in vk.iter_mut().zip(uj) {
                *x -= c * y;
            }
        }
        let norm = (w * dot(vk, vk)).sqrt();
        for x in vk.iter_mut() {
            *x /= norm;
        }
    }

    Ok(KlBasis { lambdas, modes, captured_fraction })
}

fn bilinear(field: &[f64], grid: Grid, x: f64, y: f64) -> f64 {
    let fx = (x / grid.h).min((grid.side - 1) as f64);
    let fy = (y / grid.h).min((grid.side - 1) as f64);
    let ix = (fx as usize).min(grid.side - 2);
    let iy = (fy as usize).min(grid.side - 2);
    let tx = fx - ix as f64;
    let ty = fy - iy as f64;
    let at = |i: usize, j: usize| field[j * grid.side + i];
    (1.0 - tx) * (1.0 - ty) * at(ix, iy)
        + tx * (1.0 - ty) * at(ix + 1, iy)
        + (1.0 - tx) * ty * at(ix, iy + 1)
        + tx * ty * at(ix + 1, iy + 1)
}

/// Nodal solution field on the full grid, zero on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldResponse {
    pub interior_per_side: usize,
    pub values: Vec<f64>,
}

impl FieldResponse {
    /// CSV of `x,y,u` rows over all nodes.
    pub fn to_csv(&self) -> String {
        let grid = Grid::new(self.interior_per_side);
        let mut out = String::from("x,y,u\n");
        for (idx, v) in self.values.iter().enumerate() {
            let (x, y) = grid.node(idx);
            out.push_str(&format!("{x},{y},{v}\n"));
        }
        out
    }
}

type SourceFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// The Dirichlet diffusion problem `-div(a grad u) = f` on the unit square
/// with `u = 0` on the boundary and a lognormal coefficient driven by the
/// truncated KL expansion of a Gaussian covariance kernel.
pub struct DiffusionProblem {
    grid: Grid,
    kl: KlBasis,
    scale: f64,
    prefactor: f64,
    source: Arc<SourceFn>,
    cg_tol: f64,
}

impl DiffusionProblem {
    /// Standard configuration: source `4 + sin(2 pi x) sin(4 pi y)`,
    /// coefficient `a = exp(1.2 sum sqrt(lambda_i) mode_i xi_i) / 10`,
    /// kernel scale 0.5.
    pub fn new(interior_per_side: usize, kl_terms: usize) -> Result<Self> {
        let kl = kl_decompose(interior_per_side, DEFAULT_CORRELATION, kl_terms)?;
        Ok(DiffusionProblem {
            grid: Grid::new(interior_per_side),
            kl,
            scale: 1.2,
            prefactor: 0.1,
            source: Arc::new(|x, y| {
                4.0 + (2.0 * std::f64::consts::PI * x).sin() * (4.0 * std::f64::consts::PI * y).sin()
            }),
            cg_tol: 1e-10,
        })
    }

    /// Same diffusion field with a custom source term.
    pub fn with_source(mut self, source: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(source);
        self
    }

    pub fn kl(&self) -> &KlBasis {
        &self.kl
    }

    pub fn input_dim(&self) -> usize {
        self.kl.lambdas.len()
    }

    /// Output length: all grid nodes including the boundary.
    pub fn field_len(&self) -> usize {
        self.grid.count()
    }

    pub fn mesh_size(&self) -> f64 {
        self.grid.h
    }

    /// Nodal diffusion coefficient for a parameter realization; strictly
    /// positive everywhere.
    pub fn assemble_diffusion(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: xi.len() });
        }
        let count = self.grid.count();
        let mut exponent = vec![0.0; count];
        for (i, &x) in xi.iter().enumerate() {
            let weight = self.kl.lambdas[i].sqrt() * x;
            for (e, m) in exponent.iter_mut().zip(&self.kl.modes[i]) {
                *e += weight * m;
            }
        }
        Ok(exponent
            .into_iter()
            .map(|e| self.prefactor * (self.scale * e).exp())
            .collect())
    }

    /// Solves the Dirichlet problem for one realization: 5-point finite
    /// differences with arithmetic-mean face coefficients, conjugate
    /// gradients to relative residual 1e-10.
    pub fn solve(&self, xi: &[f64]) -> Result<FieldResponse> {
        let a = self.assemble_diffusion(xi)?;
        let grid = self.grid;
        let n = grid.n;
        let side = grid.side;
        let inv_h2 = 1.0 / (grid.h * grid.h);

        // interior unknowns in row-major order
        let unknowns = n * n;
        let full_idx = |k: usize| {
            let ix = k % n + 1;
            let iy = k / n + 1;
            iy * side + ix
        };
        let mut b = vec![0.0; unknowns];
        for (k, bv) in b.iter_mut().enumerate() {
            let (x, y) = grid.node(full_idx(k));
            *bv = (self.source)(x, y);
        }

        // face coefficients: arithmetic mean of the nodal field
        let apply = |u: &[f64], out: &mut [f64]| {
            for k in 0..unknowns {
                let f = full_idx(k);
                let (ix, iy) = (k % n, k / n);
                let ae = 0.5 * (a[f] + a[f + 1]);
                let aw = 0.5 * (a[f] + a[f - 1]);
                let an = 0.5 * (a[f] + a[f + side]);
                let as_ = 0.5 * (a[f] + a[f - side]);
                let uc = u[k];
                let ue = if ix + 1 < n { u[k + 1] } else { 0.0 };
                let uw = if ix > 0 { u[k - 1] } else { 0.0 };
                let un = if iy + 1 < n { u[k + n] } else { 0.0 };
                let us = if iy > 0 { u[k - n] } else { 0.0 };
                out[k] = (ae * (uc - ue) + aw * (uc - uw) + an * (uc - un) + as_ * (uc - us)) * inv_h2;
            }
        };

        let b_norm = dot(&b, &b).sqrt();
        let mut u = vec![0.0; unknowns];
        let max_iter = 10 * unknowns;
        let mut total_iters = 0usize;
        let mut true_rel = f64::INFINITY;
        // CG with a recomputed-residual check; restart if the recursive
        // residual drifted optimistically.
        for _restart in 0..4 {
            let mut r = vec![0.0; unknowns];
            apply(&u, &mut r);
            for (rv, (&bv, _)) in r.iter_mut().zip(b.iter().zip(0..)) {
                *rv = bv - *rv;
            }
            let mut p = r.clone();
            let mut rs = dot(&r, &r);
            let mut ap = vec![0.0; unknowns];
            while total_iters < max_iter {
                if rs.sqrt() <= self.cg_tol * b_norm {
                    break;
                }
                total_iters += 1;
                apply(&p, &mut ap);
                let alpha = rs / dot(&p, &ap);
                for (uv, pv) in u.iter_mut().zip(&p) {
                    *uv += alpha * pv;
                }
                for (rv, av) in r.iter_mut().zip(&ap) {
                    *rv -= alpha * av;
                }
                let rs_new = dot(&r, &r);
                let beta = rs_new / rs;
                rs = rs_new;
                for (pv, rv) in p.iter_mut().zip(&r) {
                    *pv = rv + beta * *pv;
                }
            }
            let mut check = vec![0.0; unknowns];
            apply(&u, &mut check);
            let true_res: f64 = check
                .iter()
                .zip(&b)
                .map(|(c, bv)| (bv - c) * (bv - c))
                .sum::<f64>()
                .sqrt();
            true_rel = true_res / b_norm;
            if true_rel <= self.cg_tol {
                break;
            }
            if total_iters >= max_iter {
                break;
            }
        }
        if true_rel > self.cg_tol {
            return Err(Error::NonConvergence(format!(
                "conjugate gradients stalled at relative residual {true_rel:.3e} after {total_iters} iterations"
            )));
        }

        let mut values = vec![0.0; grid.count()];
        for (k, &uv) in u.iter().enumerate() {
            values[full_idx(k)] = uv;
        }
        Ok(FieldResponse { interior_per_side: n, values })
    }
}

/// [`DiffusionProblem`] as a model oracle (response = full nodal field).
pub struct DiffusionOracle {
    problem: Arc<DiffusionProblem>,
}

impl DiffusionOracle {
    pub fn new(problem: Arc<DiffusionProblem>) -> Self {
        DiffusionOracle { problem }
    }

    pub fn problem(&self) -> &DiffusionProblem {
        &self.problem
    }
}

impl ModelFn for DiffusionOracle {
    fn input_dim(&self) -> usize {
        self.problem.input_dim()
    }
    fn output_dim(&self) -> usize {
        self.problem.field_len()
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.problem.solve(x)?.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Jacobi rotation eigensolver: the independent full-decomposition oracle
    /// for small grids.
    fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off.sqrt() < 1e-13 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut eigs: Vec<(f64, Vec<f64>)> = (0..n)
            .map(|j| (a[j * n + j], (0..n).map(|i| v[i * n + j]).collect()))
            .collect();
        eigs.sort_by(|x, y| y.0.total_cmp(&x.0));
        let lambdas = eigs.iter().map(|e| e.0).collect();
        let vecs = eigs.into_iter().map(|e| e.1).collect();
        (lambdas, vecs)
    }

    #[test]
    fn eigenvalues_are_positive_and_descending() {
        let kl = kl_decompose(15, DEFAULT_CORRELATION, 5).unwrap();
        for w in kl.lambdas.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(*kl.lambdas.last().unwrap() > 0.0);
        assert!(kl.captured_fraction > 0.0 && kl.captured_fraction <= 1.0);
    }

    #[test]
    fn power_iteration_matches_dense_oracle_at_n8() {
        let grid = Grid::new(8);
        let c = covariance_matrix(grid, DEFAULT_CORRELATION);
        let dim = grid.count();
        let (oracle_lams, _) = jacobi_eigen(c.clone(), dim);
        let pairs = dominant_eigenpairs(&c, dim, 5, 1e-10).unwrap();
        for (k, (mu, vec)) in pairs.iter().enumerate() {
            assert!(
                (mu - oracle_lams[k]).abs() <= 1e-8 * oracle_lams[0],
                "eigenvalue {k}: {mu} vs {}",
                oracle_lams[k]
            );
            // residual against the original matrix
            let mut w = vec![0.0; dim];
            matvec(&c, vec, &mut w);
            let res: f64 = w
                .iter()
                .zip(vec)
                .map(|(a, b)| (a - mu * b) * (a - mu * b))
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-8 * oracle_lams[0], "residual {res} for pair {k}");
        }
        // trace identity: all eigenvalues sum to trace(C) = node count
        let total: f64 = oracle_lams.iter().sum();
        assert!((total - dim as f64).abs() < 1e-8 * dim as f64);
        let captured: f64 = pairs.iter().map(|p| p.0).sum();
        assert!(captured > 0.0 && captured <= total);
    }

    #[test]
    fn modes_are_orthonormal_in_the_weighted_inner_product() {
        for n in [15usize, 35] {
            let kl = kl_decompose(n, DEFAULT_CORRELATION, 5).unwrap();
            let h = 1.0 / (n as f64 + 1.0);
            for i in 0..5 {
                for j in i..5 {
                    let ip: f64 = h * h * dot(&kl.modes[i], &kl.modes[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).abs() < 1e-8, "n={n}, <{i},{j}> = {ip}");
                }
            }
        }
    }

    #[test]
    fn interpolated_modes_keep_the_coarse_spectrum() {
        let coarse = kl_decompose(31, DEFAULT_CORRELATION, 5).unwrap();
        let fine = kl_decompose(63, DEFAULT_CORRELATION, 5).unwrap();
        for (a, b) in coarse.lambdas.iter().zip(&fine.lambdas) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn zero_parameters_give_the_constant_field() {
        let prob = DiffusionProblem::new(15, 5).unwrap();
        let a = prob.assemble_diffusion(&[0.0; 5]).unwrap();
        for v in a {
            assert_eq!(v, 0.1);
        }
    }

    #[test]
    fn log_of_the_field_is_linear_in_the_parameters() {
        let prob = DiffusionProblem::new(15, 5).unwrap();
        let xi = [0.4, -1.2, 0.7, 0.1, -0.5];
        let doubled: Vec<f64> = xi.iter().map(|v| 2.0 * v).collect();
        let a1 = prob.assemble_diffusion(&xi).unwrap();
        let a2 = prob.assemble_diffusion(&doubled).unwrap();
        for (x, y) in a1.iter().zip(&a2) {
            let l1 = (x / 0.1).ln();
            let l2 = (y / 0.1).ln();
            assert!((l2 - 2.0 * l1).abs() < 1e-10 * l1.abs().max(1.0));
        }
    }

    #[test]
    fn field_respects_the_eigen_interval_bound() {
        let prob = DiffusionProblem::new(15, 5).unwrap();
        let kl = prob.kl();
        // sum of per-mode sup contributions bounds the exponent for |xi| <= 3
        let mut budget = 0.0;
        for (lam, mode) in kl.lambdas.iter().zip(&kl.modes) {
            let sup = mode.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            budget += lam.sqrt() * sup * 3.0;
        }
        let lo = 0.1 * (-1.2 * budget).exp();
        let hi = 0.1 * (1.2 * budget).exp();
        let xi = [2.9, -3.0, 1.5, -0.2, 3.0];
        for v in prob.assemble_diffusion(&xi).unwrap() {
            assert!(v > lo && v < hi);
        }
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        // a = 0.1 and f = 0.2 pi^2 sin(pi x) sin(pi y) force u = sin sin
        let pi = std::f64::consts::PI;
        let mut errors = Vec::new();
        for g in [3u32, 4] {
            let n = (1usize << g) - 1;
            let prob = DiffusionProblem::new(n, 5)
                .unwrap()
                .with_source(move |x, y| 0.2 * pi * pi * (pi * x).sin() * (pi * y).sin());
            let sol = prob.solve(&[0.0; 5]).unwrap();
            let grid = Grid::new(n);
            let err = sol
                .values
                .iter()
                .enumerate()
                .map(|(idx, &u)| {
                    let (x, y) = grid.node(idx);
                    (u - (pi * x).sin() * (pi * y).sin()).abs()
                })
                .fold(0.0_f64, f64::max);
            errors.push(err);
        }
        let order = (errors[0] / errors[1]).log2();
        assert!(order >= 1.85, "observed order {order} ({errors:?})");
    }

    #[test]
    fn positive_source_gives_positive_interior_solution() {
        let prob = DiffusionProblem::new(15, 5).unwrap();
        let sol = prob.solve(&[0.3, -0.8, 0.2, 1.1, -0.4]).unwrap();
        let grid = Grid::new(15);
        for idx in 0..grid.count() {
            let (x, y) = grid.node(idx);
            let interior = x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0;
            if interior {
                assert!(sol.values[idx] > 0.0);
            } else {
                assert_eq!(sol.values[idx], 0.0);
            }
        }
    }

    #[test]
    fn even_source_with_constant_field_gives_a_symmetric_solution() {
        let prob = DiffusionProblem::new(15, 5)
            .unwrap()
            .with_source(|x, y| (std::f64::consts::PI * x).sin() * (1.0 + y * (1.0 - y)));
        let sol = prob.solve(&[0.0; 5]).unwrap();
        let side = 17;
        let sup = sol.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for iy in 0..side {
            for ix in 0..side {
                let mirrored = sol.values[iy * side + (side - 1 - ix)];
                let v = sol.values[iy * side + ix];
                assert!((v - mirrored).abs() <= 1e-9 * sup);
            }
        }
    }

    #[test]
    fn solve_is_bit_reproducible() {
        let prob = DiffusionProblem::new(15, 5).unwrap();
        let xi = [0.7, -0.3, 1.2, 0.05, -1.7];
        let a = prob.solve(&xi).unwrap();
        let b = prob.solve(&xi).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn field_export_has_one_row_per_node() {
        let prob = DiffusionProblem::new(7, 3).unwrap();
        let sol = prob.solve(&[0.1, 0.2, -0.1]).unwrap();
        let csv = sol.to_csv();
        assert_eq!(csv.lines().count(), 1 + 9 * 9);
        assert!(csv.starts_with("x,y,u\n"));
    }
}

