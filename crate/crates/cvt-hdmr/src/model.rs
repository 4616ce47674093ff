//! Multiple-anchor cut-HDMR with nearest-centroid dispatch, plus the
//! single-anchor and expansion-averaging baselines.

use serde::{Deserialize, Serialize};

use crate::cvt::{self, LloydOptions, VoronoiPartition};
use crate::error::{Error, Result};
use crate::hdmr::{build_expansion, CutHdmrExpansion, ModelOracle, Prediction, SliceMode};
use crate::interp::{select_nodes, NodeSet};
use crate::rng::SplitMix64;
use crate::space::{Point, ProductDensity, SampleSet};

/// Where each anchor's interpolation nodes live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeScope {
    /// Nodes span the bounding box of the whole sample set (comparable
    /// against averaging baselines).
    GlobalBox,
    /// Nodes span each cluster's own bounding box, concentrating resolution
    /// where the expansion is actually dispatched.
    ClusterBox,
}

/// Build settings for [`CvtHdmrModel::build`].
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub clusters: usize,
    pub order: usize,
    pub nodes_per_dim: usize,
    pub node_scope: NodeScope,
    pub seed: u64,
    pub slice_mode: SliceMode,
    pub lloyd: LloydOptions,
}

impl BuildOptions {
    pub fn new(clusters: usize, order: usize, nodes_per_dim: usize) -> Self {
        BuildOptions {
            clusters,
            order,
            nodes_per_dim,
            node_scope: NodeScope::GlobalBox,
            seed: 0,
            slice_mode: SliceMode::Interpolated,
            lloyd: LloydOptions::default(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn node_scope(mut self, scope: NodeScope) -> Self {
        self.node_scope = scope;
        self
    }

    pub fn slice_mode(mut self, mode: SliceMode) -> Self {
        self.slice_mode = mode;
        self
    }
}

/// Build provenance kept alongside the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub seed: u64,
    pub order: usize,
    pub nodes_per_dim: usize,
    pub node_scope: NodeScope,
    /// Oracle evaluations consumed by this build (deduplicated).
    pub oracle_evals: u64,
    /// What the same build would cost without slice-point deduplication.
    pub raw_cost: u64,
}

/// L anchored expansions dispatched by nearest centroid.
#[derive(Debug)]
pub struct CvtHdmrModel {
    partition: VoronoiPartition,
    expansions: Vec<CutHdmrExpansion>,
    info: BuildInfo,
}

impl CvtHdmrModel {
    /// Clusters `xs` by Lloyd iteration, anchors one expansion on each
    /// centroid, and records the oracle evaluations consumed.
    pub fn build(oracle: &ModelOracle, xs: &SampleSet, opts: &BuildOptions) -> Result<Self> {
        let partition = cvt::lloyd(xs, opts.clusters, opts.seed, opts.lloyd)?;
        Self::from_partition(oracle, xs, partition, opts)
    }

    /// Builds expansions for an existing partition. The partition's
    /// centroids become the anchors.
    pub fn from_partition(
        oracle: &ModelOracle,
        xs: &SampleSet,
        partition: VoronoiPartition,
        opts: &BuildOptions,
    ) -> Result<Self> {
        let p = xs.dim();
        if opts.nodes_per_dim < 3 {
            return Err(Error::InvalidParameter(format!(
                "nodes per dimension must be at least 3, got {}",
                opts.nodes_per_dim
            )));
        }
        let global_box = xs.bounding_box();
        let before = oracle.eval_count();
        let mut expansions = Vec::with_capacity(partition.cluster_count());
        let mut raw_cost = 0u64;
        for (l, anchor) in partition.centroids.iter().enumerate() {
            let boxes: Vec<(f64, f64)> = match opts.node_scope {
                NodeScope::GlobalBox => global_box.clone(),
                NodeScope::ClusterBox => {
                    let members: Vec<usize> = partition
                        .assignments
                        .iter()
                        .enumerate()
                        .filter(|&(_, &c)| c == l)
                        .map(|(i, _)| i)
                        .collect();
                    cluster_box(xs, &members, &global_box)
                }
            };
            let node_sets: Vec<NodeSet> = boxes
                .iter()
                .zip(anchor.coords())
                .map(|(&(a, b), &c)| select_nodes(a, b, c, opts.nodes_per_dim))
                .collect::<Result<_>>()?;
            let counts: Vec<usize> = node_sets.iter().map(|ns| ns.len()).collect();
            raw_cost += crate::hdmr::predicted_cost_raw(&counts, opts.order.min(p), 1);
            expansions.push(build_expansion(oracle, anchor, &node_sets, opts.order, opts.slice_mode)?);
        }
        let info = BuildInfo {
            seed: opts.seed,
            order: opts.order,
            nodes_per_dim: opts.nodes_per_dim,
            node_scope: opts.node_scope,
            oracle_evals: oracle.eval_count() - before,
            raw_cost,
        };
        Ok(CvtHdmrModel { partition, expansions, info })
    }

    /// Wraps explicit anchors (single-anchor baselines are 1-anchor models,
    /// so every strategy shares this code path). Samples are assigned to
    /// their nearest anchor and energies are measured against the anchors.
    pub fn with_anchors(
        oracle: &ModelOracle,
        xs: &SampleSet,
        anchors: Vec<Point>,
        opts: &BuildOptions,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::InvalidParameter("need at least one anchor".into()));
        }
        let assignments = cvt::assign(xs, &anchors)?;
        let mut counts = vec![0usize; anchors.len()];
        for &l in &assignments {
            counts[l] += 1;
        }
        let (energies, total_energy) = cvt::energy(xs, &assignments, &anchors);
        let partition = VoronoiPartition {
            assignments,
            centroids: anchors,
            counts,
            energies,
            total_energy,
            converged: true,
            iterations: 0,
            energy_history: Vec::new(),
        };
        Self::from_partition(oracle, xs, partition, opts)
    }

    /// Rebuilds a model from persisted parts.
    pub fn from_parts(
        partition: VoronoiPartition,
        expansions: Vec<CutHdmrExpansion>,
        info: BuildInfo,
    ) -> Result<Self> {
        if expansions.len() != partition.cluster_count() {
            return Err(Error::Parse(format!(
                "{} expansions for {} centroids",
                expansions.len(),
                partition.cluster_count()
            )));
        }
        for (e, c) in expansions.iter().zip(&partition.centroids) {
            if e.anchor() != c {
                return Err(Error::Parse("expansion anchor differs from its centroid".into()));
            }
        }
        let (p, m, r) = (
            expansions[0].input_dim(),
            expansions[0].out_dim(),
            expansions[0].order(),
        );
        if expansions
            .iter()
            .any(|e| e.input_dim() != p || e.out_dim() != m || e.order() != r)
        {
            return Err(Error::Parse("expansions disagree on p, m, or order".into()));
        }
        Ok(CvtHdmrModel { partition, expansions, info })
    }

    pub fn partition(&self) -> &VoronoiPartition {
        &self.partition
    }

    pub fn expansions(&self) -> &[CutHdmrExpansion] {
        &self.expansions
    }

    pub fn expansion(&self, l: usize) -> &CutHdmrExpansion {
        &self.expansions[l]
    }

    pub fn cluster_count(&self) -> usize {
        self.expansions.len()
    }

    pub fn input_dim(&self) -> usize {
        self.expansions[0].input_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.expansions[0].out_dim()
    }

    pub fn build_info(&self) -> &BuildInfo {
        &self.info
    }

    /// Index of the expansion `predict` would dispatch to.
    pub fn dispatch_index(&self, x: &Point) -> usize {
        self.partition.nearest_centroid(x)
    }

    /// Response of the expansion whose centroid is nearest to `x` (lowest
    /// index on ties). Equivalent to a one-hot weighting of all expansions.
    pub fn predict(&self, x: &Point) -> Result<Prediction> {
        self.expansions[self.dispatch_index(x)].evaluate(x)
    }

    /// Unweighted mean of all expansion responses (the averaging baseline).
    pub fn predict_average(&self, x: &Point) -> Result<Prediction> {
        let mut acc = vec![0.0; self.out_dim()];
        let mut extrapolated = false;
        for e in &self.expansions {
            let pred = e.evaluate(x)?;
            extrapolated |= pred.extrapolated;
            for (a, v) in acc.iter_mut().zip(&pred.values) {
                *a += v;
            }
        }
        let inv = 1.0 / self.expansions.len() as f64;
        for a in &mut acc {
            *a *= inv;
        }
        Ok(Prediction { values: acc, extrapolated })
    }
}

fn cluster_box(xs: &SampleSet, members: &[usize], global_box: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let p = xs.dim();
    let mut bx = vec![(f64::INFINITY, f64::NEG_INFINITY); p];
    for &i in members {
        for (d, &c) in xs.point(i).coords().iter().enumerate() {
            bx[d].0 = bx[d].0.min(c);
            bx[d].1 = bx[d].1.max(c);
        }
    }
    // a dimension a cluster does not spread across falls back to the global box
    for d in 0..p {
        if !(bx[d].0 < bx[d].1) {
            bx[d] = global_box[d];
        }
    }
    bx
}

/// The sample whose response is closest (in l2) to the mean response over
/// the whole set; lowest index on ties. Responses are taken from `responses`
/// when given, otherwise computed through the metered oracle.
pub fn anchor_mean_point(
    oracle: &ModelOracle,
    xs: &SampleSet,
    responses: Option<&[Vec<f64>]>,
) -> Result<(usize, Point)> {
    if xs.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let computed;
    let responses: &[Vec<f64>] = match responses {
        Some(r) => {
            if r.len() != xs.len() {
                return Err(Error::InvalidParameter(format!(
                    "{} responses for {} samples",
                    r.len(),
                    xs.len()
                )));
            }
            r
        }
        None => {
            computed = xs
                .points()
                .iter()
                .map(|p| oracle.call(p.coords()))
                .collect::<Result<Vec<_>>>()?;
            &computed
        }
    };
    let m = responses[0].len();
    let mut mean = vec![0.0; m];
    for r in responses {
        for (a, v) in mean.iter_mut().zip(r) {
            *a += v;
        }
    }
    for a in &mut mean {
        *a /= responses.len() as f64;
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, r) in responses.iter().enumerate() {
        let d: f64 = r.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok((best, xs.point(best).clone()))
}

/// Source for [`anchor_random`].
pub enum RandomAnchor<'a> {
    /// One seeded draw from the density.
    Density(&'a ProductDensity),
    /// Uniform pick from an existing sample set.
    FromSamples(&'a SampleSet),
}

/// A seeded random anchor, either drawn fresh from the parameter space or
/// picked uniformly from a sample set.
pub fn anchor_random(source: RandomAnchor<'_>, seed: u64) -> Result<Point> {
    match source {
        RandomAnchor::Density(density) => {
            let draw = density.sample(1, seed)?;
            Ok(draw.point(0).clone())
        }
        RandomAnchor::FromSamples(xs) => {
            if xs.is_empty() {
                return Err(Error::EmptySampleSet);
            }
            let mut rng = SplitMix64::stream(seed, 0x616e63686f72);
            let i = (rng.next_u64() % xs.len() as u64) as usize;
            Ok(xs.point(i).clone())
        }
    }
}
