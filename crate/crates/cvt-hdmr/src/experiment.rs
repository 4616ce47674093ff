//! End-to-end benchmark experiments: configuration, the quadrature and
//! stochastic-diffusion sweeps, and CSV report assembly.
//!
//! Runners are pure with respect to their outputs: given the same
//! configuration they return byte-identical report files (wall-clock
//! timings are kept in dedicated columns/files that callers exclude when
//! comparing runs).

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvt::{self, LloydOptions, VoronoiPartition};
use crate::diffusion::{DiffusionOracle, DiffusionProblem};
use crate::error::{Error, Result};
use crate::hdmr::{predicted_cost, ModelOracle, SliceMode};
use crate::model::{
    anchor_mean_point, anchor_random, BuildOptions, CvtHdmrModel, NodeScope, RandomAnchor,
};
use crate::plot::{line_chart_svg, Series};
use crate::quad::{
    integrate_surrogate, qmc_mean, reference_integral, relative_integral_error, stats_from_rhos,
    ErrorStats, IntegrationMethod, Surrogate,
};
use crate::space::{ProductDensity, SampleSet};
use crate::testfns::QuadratureTestFn;

/// Which benchmark an [`ExperimentConfig`] drives. `Custom` runs the
/// quadrature pipeline with whatever densities and dimension the
/// configuration carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Quadrature,
    Diffusion,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub sample: u64,
    pub cluster: u64,
    pub test: u64,
    pub anchor: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baselines {
    pub random_anchor: bool,
    pub mean_point: bool,
    pub ave_hdmr: bool,
}

/// Full experiment configuration; round-trips losslessly through JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Input densities to sweep (the diffusion experiment uses the first and
    /// requires it to be standard normal).
    pub densities: Vec<ProductDensity>,
    pub sample_count: usize,
    pub cluster_counts: Vec<usize>,
    pub orders: Vec<usize>,
    pub nodes_per_dim: usize,
    pub node_scope: NodeScope,
    pub seeds: Seeds,
    pub output_dir: String,
    pub baselines: Baselines,
    /// Halton points for surrogate integrals.
    pub qmc_points: u64,
    /// Halton points for the reference integral.
    pub reference_points: u64,
    /// Monte-Carlo test sweep size (diffusion).
    pub test_samples: usize,
    /// Diffusion grid: 2^g - 1 interior nodes per side.
    pub grid_exponent: u32,
    /// Cluster counts rebuilt with cluster-box node scope (diffusion).
    pub cluster_box_counts: Vec<usize>,
}

impl ExperimentConfig {
    /// The quadrature benchmark at its standard scale: 20000 samples in six
    /// dimensions under uniform and Beta(0.9, 1.3) inputs.
    pub fn quadrature_default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Quadrature,
            densities: vec![
                ProductDensity::unit_box(6),
                ProductDensity::Beta { alpha: 0.9, beta: 1.3, dim: 6 },
            ],
            sample_count: 20_000,
            cluster_counts: vec![1, 2, 3, 4],
            orders: vec![1, 2, 3, 4, 5],
            nodes_per_dim: 7,
            node_scope: NodeScope::GlobalBox,
            seeds: Seeds { sample: 2024, cluster: 7, test: 4205, anchor: 99 },
            output_dir: "out/quadrature".into(),
            baselines: Baselines { random_anchor: true, mean_point: true, ave_hdmr: false },
            qmc_points: 1 << 20,
            reference_points: 1 << 22,
            test_samples: 0,
            grid_exponent: 6,
            cluster_box_counts: Vec::new(),
        }
    }

    /// The stochastic-diffusion benchmark at its standard scale: 5000
    /// standard-normal samples in five dimensions, order 2, seven nodes per
    /// direction, 5000-sample test sweep on a 2^-6 grid.
    pub fn diffusion_default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Diffusion,
            densities: vec![ProductDensity::StandardNormal { dim: 5 }],
            sample_count: 5_000,
            cluster_counts: vec![1, 2, 3, 4],
            orders: vec![2],
            nodes_per_dim: 7,
            node_scope: NodeScope::GlobalBox,
            seeds: Seeds { sample: 42, cluster: 7, test: 1234, anchor: 99 },
            output_dir: "out/diffusion".into(),
            baselines: Baselines { random_anchor: true, mean_point: true, ave_hdmr: true },
            qmc_points: 1 << 20,
            reference_points: 1 << 22,
            test_samples: 5_000,
            grid_exponent: 6,
            cluster_box_counts: vec![2, 3, 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.densities.is_empty() {
            return Err(Error::InvalidParameter("need at least one density".into()));
        }
        for d in &self.densities {
            d.validate()?;
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        if self.cluster_counts.is_empty() || self.cluster_counts.iter().any(|&l| l == 0) {
            return Err(Error::InvalidParameter("cluster counts must be positive".into()));
        }
        let p = self.densities[0].dim();
        if self.orders.is_empty() || self.orders.iter().any(|&r| r == 0 || r > p) {
            return Err(Error::InvalidParameter(format!("orders must lie in 1..={p}")));
        }
        if self.nodes_per_dim < 3 {
            return Err(Error::InvalidParameter("nodes per dimension must be at least 3".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// FNV-1a hash of the canonical JSON form; stamped into every CSV.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_json().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// One row of the generic report CSV
/// (`experiment,L,r,method,epsilon,E,V,evals,seconds`).
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub experiment: String,
    pub l: usize,
    pub r: usize,
    pub method: String,
    pub epsilon: Option<f64>,
    pub e: Option<f64>,
    pub v: Option<f64>,
    pub evals: u64,
    pub seconds: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn report_csv(hash: &str, rows: &[ReportRow]) -> String {
    let mut out = format!("# config {hash}\nexperiment,L,r,method,epsilon,E,V,evals,seconds\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.6}\n",
            r.experiment,
            r.l,
            r.r,
            r.method,
            opt(r.epsilon),
            opt(r.e),
            opt(r.v),
            r.evals,
            r.seconds
        ));
    }
    out
}

/// Strips the trailing (wall-clock) column from a report CSV so runs can be
/// compared byte-for-byte.
pub fn strip_seconds_column(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            if line.starts_with('#') {
                line.to_string()
            } else {
                match line.rfind(',') {
                    Some(pos) => line[..pos].to_string(),
                    None => line.to_string(),
                }
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

/// Named output files of one experiment run.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub files: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn write_to(&self, dir: impl AsRef<std::path::Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// The files relevant to determinism comparisons: timing files dropped,
    /// seconds column stripped from the report.
    pub fn deterministic_view(&self) -> Vec<(String, String)> {
        self.files
            .iter()
            .filter(|(name, _)| name != "timing.csv")
            .map(|(name, contents)| {
                if name == "report.csv" {
                    (name.clone(), strip_seconds_column(contents))
                } else {
                    (name.clone(), contents.clone())
                }
            })
            .collect()
    }
}

fn density_label(d: &ProductDensity) -> String {
    match d {
        ProductDensity::UniformBox { .. } => "uniform".into(),
        ProductDensity::Beta { alpha, beta, .. } => format!("beta({alpha},{beta})"),
        ProductDensity::StandardNormal { .. } => "normal".into(),
    }
}

/// Results of the quadrature-function experiment.
pub struct QuadratureResults {
    pub output: ExperimentOutput,
    pub rows: Vec<ReportRow>,
    /// (density label, L, total clustering energy)
    pub energies: Vec<(String, usize, f64)>,
    /// (density label, reference integral, half-sequence gap)
    pub references: Vec<(String, f64, f64)>,
}

impl QuadratureResults {
    pub fn epsilon(&self, density: &str, method: &str, l: usize, r: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|row| row.experiment == density && row.method == method && row.l == l && row.r == r)
            .and_then(|row| row.epsilon)
    }
}

/// Integration error sweep on the analytic quadrature test function.
///
/// For every configured density: draw the sample set, cluster it for each L,
/// and measure the relative integral error of explicit-slice expansions for
/// every anchor strategy and truncation order, against a quasi-Monte-Carlo
/// reference. Baseline strategies (random anchor, response-mean anchor) ride
/// along per the configuration toggles.
pub fn run_quadrature_experiment(config: &ExperimentConfig) -> Result<QuadratureResults> {
    config.validate()?;
    let p = config.densities[0].dim();
    let hash = config.hash();
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut energies = Vec::new();
    let mut references = Vec::new();
    let mut error_tables: Vec<(String, String)> = Vec::new();

    for density in &config.densities {
        if density.dim() != p {
            return Err(Error::InvalidParameter("densities must share one dimension".into()));
        }
        let label = density_label(density);
        let oracle = ModelOracle::from_model(QuadratureTestFn::new(p));
        let xs = density.sample(config.sample_count, config.seeds.sample)?;

        let reference = reference_integral(&oracle, density, config.reference_points)?;
        references.push((label.clone(), reference.value[0], reference.half_gap[0]));

        // cluster once per L and reuse the partitions for the model builds
        let mut partitions: Vec<(usize, VoronoiPartition)> = Vec::new();
        for &l in &config.cluster_counts {
            let part = cvt::lloyd(&xs, l, config.seeds.cluster, LloydOptions::default())?;
            energies.push((label.clone(), l, part.total_energy));
            partitions.push((l, part));
        }

        // anchor strategies: label, L, prebuilt anchors or partition
        enum Strategy {
            Anchors(Vec<crate::space::Point>),
            Partition(usize),
        }
        let mut strategies: Vec<(String, Strategy)> = Vec::new();
        if config.baselines.random_anchor {
            let a = anchor_random(RandomAnchor::Density(density), config.seeds.anchor)?;
            strategies.push(("random".into(), Strategy::Anchors(vec![a])));
        }
        if config.baselines.mean_point {
            let before = oracle.eval_count();
            let (_, a) = anchor_mean_point(&oracle, &xs, None)?;
            let scan = oracle.eval_count() - before;
            strategies.push(("mean-point".into(), Strategy::Anchors(vec![a])));
            rows.push(ReportRow {
                experiment: label.clone(),
                l: 1,
                r: 0,
                method: "mean-point-scan".into(),
                epsilon: None,
                e: None,
                v: None,
                evals: scan,
                seconds: 0.0,
            });
        }
        for (i, &l) in config.cluster_counts.iter().enumerate() {
            strategies.push((format!("cvt-L{l}"), Strategy::Partition(i)));
        }

        // wide error table in the benchmark layout: one row per strategy,
        // one column per truncation order
        let mut wide = format!("# config {hash}\nanchor");
        for &r in &config.orders {
            wide.push_str(&format!(",r{r}"));
        }
        wide.push('\n');

        for (name, strat) in &strategies {
            let mut wide_row = name.clone();
            for &r in &config.orders {
                let t0 = Instant::now();
                let before = oracle.eval_count();
                let opts = BuildOptions::new(1, r, config.nodes_per_dim)
                    .seed(config.seeds.cluster)
                    .node_scope(config.node_scope)
                    .slice_mode(SliceMode::Explicit);
                let model = match strat {
                    Strategy::Anchors(anchors) => {
                        let mut o = opts;
                        o.clusters = anchors.len();
                        CvtHdmrModel::with_anchors(&oracle, &xs, anchors.clone(), &o)?
                    }
                    Strategy::Partition(i) => {
                        let part = partitions[*i].1.clone();
                        let mut o = opts;
                        o.clusters = part.cluster_count();
                        CvtHdmrModel::from_partition(&oracle, &xs, part, &o)?
                    }
                };
                let integral = integrate_surrogate(
                    &model,
                    density,
                    IntegrationMethod::Qmc { points: config.qmc_points },
                )?[0];
                let eps = relative_integral_error(reference.value[0], integral)?;
                let evals = oracle.eval_count() - before;
                rows.push(ReportRow {
                    experiment: label.clone(),
                    l: model.cluster_count(),
                    r,
                    method: name.clone(),
                    epsilon: Some(eps),
                    e: None,
                    v: None,
                    evals,
                    seconds: t0.elapsed().as_secs_f64(),
                });
                wide_row.push_str(&format!(",{eps}"));
            }
            wide.push_str(&wide_row);
            wide.push('\n');
        }
        error_tables.push((format!("quadrature_errors_{}.csv", file_label(&label)), wide));
    }

    // assemble files
    let mut files = Vec::new();
    let mut energy_csv = format!("# config {hash}\ndistribution,L,E_total\n");
    for (d, l, e) in &energies {
        energy_csv.push_str(&format!("{d},{l},{e}\n"));
    }
    files.push(("quadrature_energy.csv".into(), energy_csv));
    let mut ref_csv = format!("# config {hash}\ndistribution,reference,half_gap,points\n");
    for (d, v, g) in &references {
        ref_csv.push_str(&format!("{d},{v},{g},{}\n", config.reference_points));
    }
    files.push(("reference.csv".into(), ref_csv));
    files.extend(error_tables);
    files.push(("report.csv".into(), report_csv(&hash, &rows)));
    files.push(("config.json".into(), config.to_json()));

    Ok(QuadratureResults { output: ExperimentOutput { files }, rows, energies, references })
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Per-sweep statistics of one model on the shared test set.
pub struct ModelSweep {
    pub dispatched: ErrorStats,
    pub averaged: ErrorStats,
    pub per_anchor: Vec<ErrorStats>,
}

/// Evaluates every expansion of a model over the test set once and derives
/// the dispatched, averaged, and per-anchor error statistics from the same
/// pass.
fn sweep_model(model: &CvtHdmrModel, test: &SampleSet, truths: &[Vec<f64>]) -> Result<ModelSweep> {
    let l_count = model.cluster_count();
    #[allow(clippy::type_complexity)]
    let per_sample: Vec<Result<(Vec<Option<f64>>, Option<f64>, Option<f64>)>> = test
        .points()
        .par_iter()
        .zip(truths.par_iter())
        .map(|(x, truth)| {
            let norm_sq: f64 = truth.iter().map(|v| v * v).sum();
            if norm_sq == 0.0 {
                return Ok((vec![None; l_count], None, None));
            }
            let m = truth.len();
            let mut avg = vec![0.0; m];
            let mut per = Vec::with_capacity(l_count);
            let dispatch = model.dispatch_index(x);
            let mut dispatched = 0.0;
            for l in 0..l_count {
                let pred = model.expansion(l).evaluate(x)?;
                let err_sq: f64 = pred
                    .values
                    .iter()
                    .zip(truth)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let rho = err_sq / norm_sq;
                per.push(Some(rho));
                if l == dispatch {
                    dispatched = rho;
                }
                for (a, v) in avg.iter_mut().zip(&pred.values) {
                    *a += v;
                }
            }
            let inv = 1.0 / l_count as f64;
            let avg_err: f64 = avg
                .iter()
                .zip(truth)
                .map(|(a, b)| (a * inv - b) * (a * inv - b))
                .sum();
            Ok((per, Some(dispatched), Some(avg_err / norm_sq)))
        })
        .collect();

    let mut per_anchor_rhos: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(test.len()); l_count];
    let mut cvt_rhos = Vec::with_capacity(test.len());
    let mut ave_rhos = Vec::with_capacity(test.len());
    for entry in per_sample {
        let (per, cvt, ave) = entry?;
        for (l, v) in per.into_iter().enumerate() {
            per_anchor_rhos[l].push(v);
        }
        cvt_rhos.push(cvt);
        ave_rhos.push(ave);
    }
    Ok(ModelSweep {
        dispatched: stats_from_rhos(&cvt_rhos)?,
        averaged: stats_from_rhos(&ave_rhos)?,
        per_anchor: per_anchor_rhos
            .iter()
            .map(|r| stats_from_rhos(r))
            .collect::<Result<_>>()?,
    })
}

/// Results of the stochastic-diffusion experiment.
pub struct DiffusionResults {
    pub output: ExperimentOutput,
    pub rows: Vec<ReportRow>,
    /// (L, E_total) clustering energies.
    pub energies: Vec<(usize, f64)>,
    /// (L, predicted evaluations, measured evaluations) build costs.
    pub costs: Vec<(usize, u64, u64)>,
    /// (L, anchor index, stats) for each global-box expansion standalone.
    pub per_anchor: Vec<(usize, usize, ErrorStats)>,
    /// (L, dispatched stats, averaged stats) for the global-box models.
    pub compare: Vec<(usize, ErrorStats, ErrorStats)>,
    /// (L, dispatched stats) for the cluster-box variants.
    pub cluster_box: Vec<(usize, ErrorStats)>,
    /// Response-mean-anchor baseline, when enabled.
    pub mean_point: Option<ErrorStats>,
    /// Random-anchor baseline, when enabled.
    pub random_anchor: Option<ErrorStats>,
    /// (mean seconds per solve, mean seconds per surrogate prediction).
    pub timing: (f64, f64),
}

/// Full surrogate benchmark on the stochastic diffusion problem: build
/// CVT-HDMR models for each cluster count, compare nearest-centroid dispatch
/// against expansion averaging and single-anchor baselines on a common
/// Monte-Carlo test sweep, and report clustering energies, build costs, and
/// timing.
pub fn run_diffusion_experiment(config: &ExperimentConfig) -> Result<DiffusionResults> {
    config.validate()?;
    let density = &config.densities[0];
    let ProductDensity::StandardNormal { dim: p } = density else {
        return Err(Error::InvalidParameter(
            "the diffusion experiment takes standard normal inputs".into(),
        ));
    };
    let p = *p;
    let n = (1usize << config.grid_exponent) - 1;
    let problem = Arc::new(DiffusionProblem::new(n, p)?);
    let oracle = ModelOracle::from_model(DiffusionOracle::new(Arc::clone(&problem)));
    let hash = config.hash();
    let r = config.orders[0];

    let xs = density.sample(config.sample_count, config.seeds.sample)?;
    let test = density.sample(config.test_samples, config.seeds.test)?;

    // one expensive truth sweep shared by every surrogate
    let t0 = Instant::now();
    let truths: Result<Vec<Vec<f64>>> = test
        .points()
        .par_iter()
        .map(|x| Ok(problem.solve(x.coords())?.values))
        .collect();
    let truths = truths?;
    let solve_wall = t0.elapsed().as_secs_f64() / config.test_samples.max(1) as f64;

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut energies = Vec::new();
    let mut costs = Vec::new();
    let mut per_anchor = Vec::new();
    let mut compare = Vec::new();
    let mut cluster_box_stats = Vec::new();

    let node_counts = vec![config.nodes_per_dim; p];
    let mut predict_probe: Option<f64> = None;

    for &l in &config.cluster_counts {
        let part = cvt::lloyd(&xs, l, config.seeds.cluster, LloydOptions::default())?;
        energies.push((l, part.total_energy));

        let before = oracle.eval_count();
        let t_build = Instant::now();
        let opts = BuildOptions::new(l, r, config.nodes_per_dim)
            .seed(config.seeds.cluster)
            .node_scope(NodeScope::GlobalBox);
        let model = CvtHdmrModel::from_partition(&oracle, &xs, part, &opts)?;
        let build_secs = t_build.elapsed().as_secs_f64();
        let measured = oracle.eval_count() - before;
        let predicted = predicted_cost(&node_counts, r, l as u64);
        costs.push((l, predicted, measured));

        let sweep = sweep_model(&model, &test, &truths)?;
        for (idx, stats) in sweep.per_anchor.iter().enumerate() {
            rows.push(ReportRow {
                experiment: "diffusion".into(),
                l,
                r,
                method: format!("single-anchor-{idx}"),
                epsilon: None,
                e: Some(stats.mean),
                v: Some(stats.variance),
                evals: measured / l as u64,
                seconds: 0.0,
            });
            per_anchor.push((l, idx, stats.clone()));
        }
        rows.push(ReportRow {
            experiment: "diffusion".into(),
            l,
            r,
            method: "cvt".into(),
            epsilon: None,
            e: Some(sweep.dispatched.mean),
            v: Some(sweep.dispatched.variance),
            evals: measured,
            seconds: build_secs,
        });
        if config.baselines.ave_hdmr {
            rows.push(ReportRow {
                experiment: "diffusion".into(),
                l,
                r,
                method: "ave".into(),
                epsilon: None,
                e: Some(sweep.averaged.mean),
                v: Some(sweep.averaged.variance),
                evals: measured,
                seconds: 0.0,
            });
        }
        compare.push((l, sweep.dispatched, sweep.averaged));

        if predict_probe.is_none() {
            let probes = test.points().iter().take(100);
            let t_pred = Instant::now();
            let mut count = 0usize;
            for x in probes {
                let _ = model.predict(x)?;
                count += 1;
            }
            predict_probe = Some(t_pred.elapsed().as_secs_f64() / count.max(1) as f64);
        }
    }

    for &l in &config.cluster_box_counts {
        let part = cvt::lloyd(&xs, l, config.seeds.cluster, LloydOptions::default())?;
        let before = oracle.eval_count();
        let opts = BuildOptions::new(l, r, config.nodes_per_dim)
            .seed(config.seeds.cluster)
            .node_scope(NodeScope::ClusterBox);
        let model = CvtHdmrModel::from_partition(&oracle, &xs, part, &opts)?;
        let measured = oracle.eval_count() - before;
        let sweep = sweep_model(&model, &test, &truths)?;
        rows.push(ReportRow {
            experiment: "diffusion".into(),
            l,
            r,
            method: "cvt-cluster-box".into(),
            epsilon: None,
            e: Some(sweep.dispatched.mean),
            v: Some(sweep.dispatched.variance),
            evals: measured,
            seconds: 0.0,
        });
        cluster_box_stats.push((l, sweep.dispatched));
    }

    let mut mean_point_stats = None;
    if config.baselines.mean_point {
        let before = oracle.eval_count();
        let (_, anchor) = anchor_mean_point(&oracle, &xs, None)?;
        let opts = BuildOptions::new(1, r, config.nodes_per_dim)
            .seed(config.seeds.cluster)
            .node_scope(NodeScope::GlobalBox);
        let model = CvtHdmrModel::with_anchors(&oracle, &xs, vec![anchor], &opts)?;
        let measured = oracle.eval_count() - before;
        let sweep = sweep_model(&model, &test, &truths)?;
        rows.push(ReportRow {
            experiment: "diffusion".into(),
            l: 1,
            r,
            method: "mean-point".into(),
            epsilon: None,
            e: Some(sweep.dispatched.mean),
            v: Some(sweep.dispatched.variance),
            evals: measured,
            seconds: 0.0,
        });
        mean_point_stats = Some(sweep.dispatched);
    }

    let mut random_stats = None;
    if config.baselines.random_anchor {
        let anchor = anchor_random(RandomAnchor::Density(density), config.seeds.anchor)?;
        let before = oracle.eval_count();
        let opts = BuildOptions::new(1, r, config.nodes_per_dim)
            .seed(config.seeds.cluster)
            .node_scope(NodeScope::GlobalBox);
        let model = CvtHdmrModel::with_anchors(&oracle, &xs, vec![anchor], &opts)?;
        let measured = oracle.eval_count() - before;
        let sweep = sweep_model(&model, &test, &truths)?;
        rows.push(ReportRow {
            experiment: "diffusion".into(),
            l: 1,
            r,
            method: "random".into(),
            epsilon: None,
            e: Some(sweep.dispatched.mean),
            v: Some(sweep.dispatched.variance),
            evals: measured,
            seconds: 0.0,
        });
        random_stats = Some(sweep.dispatched);
    }

    let predict_wall = predict_probe.unwrap_or(0.0);

    // files
    let mut files = Vec::new();
    let mut energy_csv = format!("# config {hash}\nL,E_total\n");
    for (l, e) in &energies {
        energy_csv.push_str(&format!("{l},{e}\n"));
    }
    files.push(("diffusion_energy.csv".into(), energy_csv));

    let mut cost_csv = format!("# config {hash}\nL,predicted_evals,measured_evals\n");
    for (l, pr, me) in &costs {
        cost_csv.push_str(&format!("{l},{pr},{me}\n"));
    }
    files.push(("diffusion_cost.csv".into(), cost_csv));

    let mut single_csv = format!("# config {hash}\nL,anchor,E,V\n");
    for (l, idx, st) in &per_anchor {
        single_csv.push_str(&format!("{l},{idx},{},{}\n", st.mean, st.variance));
    }
    files.push(("diffusion_single_anchor.csv".into(), single_csv));

    let mut compare_csv = format!("# config {hash}\nL,method,E,V\n");
    for (l, cvt_st, ave_st) in &compare {
        compare_csv.push_str(&format!("{l},cvt,{},{}\n", cvt_st.mean, cvt_st.variance));
        if config.baselines.ave_hdmr {
            compare_csv.push_str(&format!("{l},ave,{},{}\n", ave_st.mean, ave_st.variance));
        }
    }
    if let Some(st) = &mean_point_stats {
        compare_csv.push_str(&format!("1,mean-point,{},{}\n", st.mean, st.variance));
    }
    if let Some(st) = &random_stats {
        compare_csv.push_str(&format!("1,random,{},{}\n", st.mean, st.variance));
    }
    files.push(("diffusion_compare.csv".into(), compare_csv));

    let mut cb_csv = format!("# config {hash}\nL,E,V\n");
    for (l, st) in &cluster_box_stats {
        cb_csv.push_str(&format!("{l},{},{}\n", st.mean, st.variance));
    }
    files.push(("diffusion_clusterbox.csv".into(), cb_csv));

    let speedup = if predict_wall > 0.0 { solve_wall / predict_wall } else { 0.0 };
    let timing_csv = format!(
        "# config {hash}\nsolve_seconds,predict_seconds,speedup\n{solve_wall:.6e},{predict_wall:.6e},{speedup:.3}\n"
    );
    files.push(("timing.csv".into(), timing_csv));

    files.push(("report.csv".into(), report_csv(&hash, &rows)));
    files.push(("config.json".into(), config.to_json()));

    Ok(DiffusionResults {
        output: ExperimentOutput { files },
        rows,
        energies,
        costs,
        per_anchor,
        compare,
        cluster_box: cluster_box_stats,
        mean_point: mean_point_stats,
        random_anchor: random_stats,
        timing: (solve_wall, predict_wall),
    })
}

/// Builds epsilon-versus-order plot data (CSV series plus an SVG chart) from
/// report rows.
pub fn export_plots(rows: &[ReportRow], experiment_label: &str) -> Vec<(String, String)> {
    let mut methods: Vec<String> = Vec::new();
    for row in rows {
        if row.experiment == experiment_label
            && row.epsilon.is_some()
            && !methods.contains(&row.method)
        {
            methods.push(row.method.clone());
        }
    }
    let mut series = Vec::new();
    let mut csv = String::from("method,r,epsilon\n");
    for method in &methods {
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|row| row.experiment == experiment_label && &row.method == method)
            .filter_map(|row| row.epsilon.map(|e| (row.r as f64, e)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (r, e) in &pts {
            csv.push_str(&format!("{method},{r},{e}\n"));
        }
        series.push(Series { label: method.clone(), points: pts });
    }
    let svg = line_chart_svg(
        &format!("relative integral error, {experiment_label}"),
        "truncation order r",
        "epsilon",
        &series,
        true,
    );
    let stem = file_label(experiment_label);
    vec![
        (format!("eps_vs_r_{stem}.csv"), csv),
        (format!("eps_vs_r_{stem}.svg"), svg),
    ]
}

/// Convenience wrapper for the integrate CLI verb: integral of a surrogate
/// under its density by QMC, plus the relative error against a reference
/// when one is supplied.
pub fn integrate_with_reference(
    surrogate: &dyn Surrogate,
    density: &ProductDensity,
    points: u64,
    reference: Option<f64>,
) -> Result<(Vec<f64>, Option<f64>)> {
    let value = qmc_mean(
        |x| surrogate.predict(x).map(|p| p.values),
        density,
        points,
        surrogate.out_dim(),
    )?;
    let eps = match reference {
        Some(r) => Some(relative_integral_error(r, value[0])?),
        None => None,
    };
    Ok((value, eps))
}
