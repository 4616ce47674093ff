//! Anchored cut-HDMR expansions with tensor-slice Lagrange interpolation.
//!
//! A cut-HDMR expansion decomposes a p-variate model around an anchor point
//! into a constant term (the model response at the anchor) plus component
//! functions over growing coordinate subsets. Each retained component is
//! recovered from model evaluations on an axis-aligned slice through the
//! anchor; slices are either tabulated on tensor node grids and
//! Lagrange-interpolated, or (for cheap analytic models) evaluated directly.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::NodeSet;
use crate::space::Point;

/// A deterministic input-to-response map with an evaluation meter.
///
/// Implementations must be pure: the same input always yields the same
/// output. `reentrant` advertises that concurrent calls are safe; builders
/// fall back to a serial, deterministic evaluation order otherwise.
pub trait ModelFn: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn reentrant(&self) -> bool {
        true
    }
}

/// Adapter turning a closure into a [`ModelFn`].
pub struct FnModel<F> {
    input_dim: usize,
    output_dim: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(input_dim: usize, output_dim: usize, f: F) -> Self {
        FnModel { input_dim, output_dim, f }
    }
}

impl FnModel<()> {
    /// Scalar-output convenience wrapper.
    pub fn scalar<G>(input_dim: usize, g: G) -> FnModel<impl Fn(&[f64]) -> Vec<f64> + Send + Sync>
    where
        G: Fn(&[f64]) -> f64 + Send + Sync,
    {
        FnModel::new(input_dim, 1, move |x: &[f64]| vec![g(x)])
    }
}

impl<F> ModelFn for FnModel<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.input_dim
    }
    fn output_dim(&self) -> usize {
        self.output_dim
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
}

/// Shared handle around a [`ModelFn`] that counts underlying evaluations.
/// Clones share the counter; cache hits in builders never touch it.
#[derive(Clone)]
pub struct ModelOracle {
    f: Arc<dyn ModelFn>,
    evals: Arc<AtomicU64>,
}

impl ModelOracle {
    pub fn new(f: Arc<dyn ModelFn>) -> Self {
        ModelOracle { f, evals: Arc::new(AtomicU64::new(0)) }
    }

    pub fn from_model(f: impl ModelFn + 'static) -> Self {
        ModelOracle::new(Arc::new(f))
    }

    pub fn input_dim(&self) -> usize {
        self.f.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.f.output_dim()
    }

    pub fn reentrant(&self) -> bool {
        self.f.reentrant()
    }

    /// Metered evaluation; failures carry the offending point.
    pub fn call(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.f.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.f.input_dim(), got: x.len() });
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        self.f.evaluate(x).map_err(|e| Error::OracleFailure {
            point: x.to_vec(),
            reason: e.to_string(),
        })
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// The wrapped model itself. Calls through the returned handle are not
    /// metered; wrap it in a fresh `ModelOracle` for an independent counter.
    pub fn model_fn(&self) -> Arc<dyn ModelFn> {
        Arc::clone(&self.f)
    }
}

/// How component slices are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceMode {
    /// Tabulate slice responses on tensor node grids at build time and
    /// interpolate at query time. Queries never touch the model.
    Interpolated,
    /// Call the model directly at slice points during queries. Exact (no
    /// interpolation error); only sensible for cheap analytic models.
    Explicit,
}

/// Tabulated responses of one slice: an |dims|-dimensional tensor over the
/// node grids of `dims`, stored row-major with the response vector innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTable {
    pub dims: Vec<usize>,
    pub extents: Vec<usize>,
    pub values: Vec<f64>,
}

impl ComponentTable {
    fn grid_len(&self) -> usize {
        self.extents.iter().product()
    }
}

/// All strictly increasing index sets of size 1..=r over 0..p, ordered by
/// cardinality then lexicographically.
pub fn index_sets(p: usize, r: usize) -> Vec<Vec<usize>> {
    fn extend(p: usize, s: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == s {
            out.push(prefix.clone());
            return;
        }
        let lo = prefix.last().map_or(0, |&v| v + 1);
        for i in lo..p {
            prefix.push(i);
            extend(p, s, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for s in 1..=r.min(p) {
        extend(p, s, &mut Vec::new(), &mut out);
    }
    out
}

/// Construction cost of `anchors` truncated expansions with per-dimension
/// node counts `node_counts` and order `order`, with shared points (the
/// anchor and every lower-order slice) evaluated once:
/// `anchors * (1 + sum_{s<=r} sum_{i_s} prod_j (K_{i_j} - 1))`.
pub fn predicted_cost(node_counts: &[usize], order: usize, anchors: u64) -> u64 {
    // elementary symmetric polynomials of (K_i - 1), degrees 1..=order
    let r = order.min(node_counts.len());
    let mut e = vec![0u64; r + 1];
    e[0] = 1;
    for &k in node_counts {
        let v = (k - 1) as u64;
        for s in (1..=r).rev() {
            e[s] += e[s - 1] * v;
        }
    }
    anchors * (1 + e[1..].iter().sum::<u64>())
}

/// Same cost without slice-point deduplication: every grid point of every
/// slice counted, `anchors * (1 + sum_{s<=r} sum_{i_s} prod_j K_{i_j})`.
pub fn predicted_cost_raw(node_counts: &[usize], order: usize, anchors: u64) -> u64 {
    let r = order.min(node_counts.len());
    let mut e = vec![0u64; r + 1];
    e[0] = 1;
    for &k in node_counts {
        for s in (1..=r).rev() {
            e[s] += e[s - 1] * k as u64;
        }
    }
    anchors * (1 + e[1..].iter().sum::<u64>())
}

/// A query response plus a flag marking coordinates outside the node hull
/// (extrapolation is permitted, never an error).
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    pub extrapolated: bool,
}

/// One anchored, truncated cut-HDMR expansion.
pub struct CutHdmrExpansion {
    anchor: Point,
    f0: Vec<f64>,
    node_sets: Vec<NodeSet>,
    sets: Vec<Vec<usize>>,
    set_lookup: HashMap<Vec<usize>, usize>,
    tables: Vec<ComponentTable>,
    order: usize,
    out_dim: usize,
    explicit: Option<Arc<dyn ModelFn>>,
}

impl std::fmt::Debug for CutHdmrExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutHdmrExpansion")
            .field("anchor", &self.anchor)
            .field("order", &self.order)
            .field("out_dim", &self.out_dim)
            .field("index_sets", &self.sets.len())
            .field("explicit", &self.explicit.is_some())
            .finish()
    }
}


impl CutHdmrExpansion {
    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn zeroth_order(&self) -> &[f64] {
        &self.f0
    }

    pub fn node_sets(&self) -> &[NodeSet] {
        &self.node_sets
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn input_dim(&self) -> usize {
        self.anchor.dim()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn index_sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn tables(&self) -> &[ComponentTable] {
        &self.tables
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit.is_some()
    }

    /// Rebuilds an interpolated expansion from persisted parts.
    pub fn from_parts(
        anchor: Point,
        f0: Vec<f64>,
        mut node_sets: Vec<NodeSet>,
        tables: Vec<ComponentTable>,
        order: usize,
    ) -> Result<Self> {
        let p = anchor.dim();
        if node_sets.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: node_sets.len() });
        }
        for ns in &mut node_sets {
            ns.rebuild_weights();
        }
        let out_dim = f0.len();
        let sets = index_sets(p, order);
        if tables.len() != sets.len() {
            return Err(Error::Parse(format!(
                "expected {} component tables, found {}",
                sets.len(),
                tables.len()
            )));
        }
        for (set, table) in sets.iter().zip(&tables) {
            if &table.dims != set {
                return Err(Error::Parse(format!(
                    "component table for {:?} found where {:?} was expected",
                    table.dims, set
                )));
            }
            let extents: Vec<usize> = set.iter().map(|&d| node_sets[d].len()).collect();
            if table.extents != extents || table.values.len() != table.grid_len() * out_dim {
                return Err(Error::Parse(format!("component table for {:?} has wrong shape", set)));
            }
        }
        let set_lookup = sets.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Ok(CutHdmrExpansion {
            anchor,
            f0,
            node_sets,
            sets,
            set_lookup,
            tables,
            order,
            out_dim,
            explicit: None,
        })
    }

    fn slice_point(&self, set: &[usize], coords: &[f64]) -> Vec<f64> {
        let mut x = self.anchor.coords().to_vec();
        for (&d, &c) in set.iter().zip(coords) {
            x[d] = c;
        }
        x
    }

    /// Tensor-product Lagrange interpolation of the slice over `set` at
    /// `coords` (one coordinate per member of `set`). In explicit mode this
    /// calls the model at the slice point instead.
    pub fn eval_slice(&self, set: &[usize], coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != set.len() {
            return Err(Error::DimensionMismatch { expected: set.len(), got: coords.len() });
        }
        if let Some(f) = &self.explicit {
            return f.evaluate(&self.slice_point(set, coords));
        }
        let &t = self
            .set_lookup
            .get(set)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown index set {set:?}")))?;
        let table = &self.tables[t];
        let m = self.out_dim;

        // Contract one grid axis at a time, outermost first.
        let mut data: Vec<f64> = Vec::new();
        let mut first = true;
        for (axis, (&d, &c)) in set.iter().zip(coords).enumerate() {
            let weights = self.node_sets[d].basis(c);
            let k = table.extents[axis];
            let stride = if first {
                table.values.len() / k
            } else {
                data.len() / k
            };
            let src: &[f64] = if first { &table.values } else { &data };
            let mut out = vec![0.0; stride];
            for (i, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let block = &src[i * stride..(i + 1) * stride];
                for (o, &v) in out.iter_mut().zip(block) {
                    *o += w * v;
                }
            }
            data = out;
            first = false;
        }
        debug_assert_eq!(data.len(), m);
        Ok(data)
    }

    /// Component function over `set` at `coords`: the slice value minus all
    /// proper sub-components and the zeroth-order term, by memoized recursion
    /// over subsets. Vanishes when any coordinate sits on the anchor.
    pub fn eval_component(&self, set: &[usize], coords: &[f64]) -> Result<Vec<f64>> {
        if !self.set_lookup.contains_key(set) && self.explicit.is_none() {
            return Err(Error::InvalidParameter(format!("unknown index set {set:?}")));
        }
        let mut memo: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
        self.component_memo(set, coords, &mut memo)
    }

    fn component_memo(
        &self,
        set: &[usize],
        coords: &[f64],
        memo: &mut HashMap<Vec<usize>, Vec<f64>>,
    ) -> Result<Vec<f64>> {
        if let Some(v) = memo.get(set) {
            return Ok(v.clone());
        }
        let mut value = self.eval_slice(set, coords)?;
        for (v, f) in value.iter_mut().zip(&self.f0) {
            *v -= f;
        }
        let s = set.len();
        for mask in 1..(1u32 << s) - 1 {
            let sub: Vec<usize> = (0..s).filter(|&j| mask >> j & 1 == 1).map(|j| set[j]).collect();
            let sub_coords: Vec<f64> =
                (0..s).filter(|&j| mask >> j & 1 == 1).map(|j| coords[j]).collect();
            let sub_val = self.component_memo(&sub, &sub_coords, memo)?;
            for (v, w) in value.iter_mut().zip(&sub_val) {
                *v -= w;
            }
        }
        memo.insert(set.to_vec(), value.clone());
        Ok(value)
    }

    /// Whether `x` lies outside the node hull in any dimension.
    pub fn extrapolates(&self, x: &Point) -> bool {
        x.coords()
            .iter()
            .zip(&self.node_sets)
            .any(|(&c, ns)| ns.extrapolates(c))
    }

    /// Truncated expansion value at `x`: the zeroth-order term plus every
    /// retained component. Pure for interpolated expansions; explicit-slice
    /// expansions call the analytic model.
    pub fn evaluate(&self, x: &Point) -> Result<Prediction> {
        if x.dim() != self.anchor.dim() {
            return Err(Error::DimensionMismatch { expected: self.anchor.dim(), got: x.dim() });
        }
        let mut memo: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
        let mut total = self.f0.clone();
        for set in &self.sets {
            let coords: Vec<f64> = set.iter().map(|&d| x[d]).collect();
            let comp = self.component_memo(set, &coords, &mut memo)?;
            for (t, c) in total.iter_mut().zip(&comp) {
                *t += c;
            }
        }
        Ok(Prediction { values: total, extrapolated: self.extrapolates(x) })
    }
}

/// Builds one expansion around `anchor`.
///
/// Every slice point is keyed on its exact coordinate tuple, so points shared
/// between slices (every slice passes through the anchor) hit the cache and
/// are evaluated once; the oracle meter advances by exactly
/// [`predicted_cost`] with `anchors = 1`. Reentrant oracles are evaluated in
/// parallel, others serially in deterministic slice order.
pub fn build_expansion(
    oracle: &ModelOracle,
    anchor: &Point,
    node_sets: &[NodeSet],
    order: usize,
    mode: SliceMode,
) -> Result<CutHdmrExpansion> {
    let p = anchor.dim();
    if oracle.input_dim() != p {
        return Err(Error::DimensionMismatch { expected: oracle.input_dim(), got: p });
    }
    if order == 0 || order > p {
        return Err(Error::InvalidParameter(format!("order must be in 1..={p}, got {order}")));
    }
    if node_sets.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: node_sets.len() });
    }
    for (i, ns) in node_sets.iter().enumerate() {
        if ns.anchor_value().to_bits() != anchor[i].to_bits() {
            return Err(Error::InvalidParameter(format!(
                "node set {i} does not contain the anchor coordinate {}",
                anchor[i]
            )));
        }
    }

    let f0 = oracle.call(anchor.coords())?;
    let out_dim = f0.len();
    let sets = index_sets(p, order);

    if mode == SliceMode::Explicit {
        let set_lookup = sets.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        return Ok(CutHdmrExpansion {
            anchor: anchor.clone(),
            f0,
            node_sets: node_sets.to_vec(),
            sets,
            set_lookup,
            tables: Vec::new(),
            order,
            out_dim,
            explicit: Some(oracle.model_fn()),
        });
    }

    // Pass 1: walk every slice grid in canonical order, dedupe points by
    // exact bit pattern, and remember which response id each cell needs.
    let key_of = |x: &[f64]| -> Vec<u64> { x.iter().map(|v| v.to_bits()).collect() };
    let mut cache: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut pending: Vec<Vec<f64>> = Vec::new();
    cache.insert(key_of(anchor.coords()), 0);

    struct TablePlan {
        dims: Vec<usize>,
        extents: Vec<usize>,
        cells: Vec<usize>, // response id per grid cell, row-major
    }

    let mut plans: Vec<TablePlan> = Vec::with_capacity(sets.len());
    for set in &sets {
        let extents: Vec<usize> = set.iter().map(|&d| node_sets[d].len()).collect();
        let grid_len: usize = extents.iter().product();
        let mut cells = Vec::with_capacity(grid_len);
        let mut idx = vec![0usize; set.len()];
        for _ in 0..grid_len {
            let mut x = anchor.coords().to_vec();
            for (j, &d) in set.iter().enumerate() {
                x[d] = node_sets[d].nodes()[idx[j]];
            }
            let key = key_of(&x);
            let next_id = 1 + pending.len();
            let id = *cache.entry(key).or_insert_with(|| {
                pending.push(x);
                next_id
            });
            cells.push(id);
            // advance the row-major multi-index
            for j in (0..set.len()).rev() {
                idx[j] += 1;
                if idx[j] < extents[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        plans.push(TablePlan { dims: set.clone(), extents, cells });
    }

    // Pass 2: evaluate the deduplicated points.
    let evaluated: Vec<Result<Vec<f64>>> = if oracle.reentrant() {
        pending.par_iter().map(|x| oracle.call(x)).collect()
    } else {
        pending.iter().map(|x| oracle.call(x)).collect()
    };
    let mut responses: Vec<Vec<f64>> = Vec::with_capacity(1 + evaluated.len());
    responses.push(f0.clone());
    for r in evaluated {
        let r = r?;
        if r.len() != out_dim {
            return Err(Error::InvalidParameter(format!(
                "oracle output length changed from {out_dim} to {}",
                r.len()
            )));
        }
        responses.push(r);
    }

    // Pass 3: assemble the value tensors.
    let tables: Vec<ComponentTable> = plans
        .into_iter()
        .map(|plan| {
            let mut values = Vec::with_capacity(plan.cells.len() * out_dim);
            for &id in &plan.cells {
                values.extend_from_slice(&responses[id]);
            }
            ComponentTable { dims: plan.dims, extents: plan.extents, values }
        })
        .collect();

    let set_lookup = sets.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(CutHdmrExpansion {
        anchor: anchor.clone(),
        f0,
        node_sets: node_sets.to_vec(),
        sets,
        set_lookup,
        tables,
        order,
        out_dim,
        explicit: None,
    })
}
