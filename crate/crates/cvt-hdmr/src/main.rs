//! Thin command-line front end over the library; all logic lives in
//! `cvt_hdmr::*`.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvt_hdmr::diffusion::{DiffusionOracle, DiffusionProblem};
use cvt_hdmr::experiment::{
    export_plots, run_diffusion_experiment, run_quadrature_experiment, ExperimentConfig,
    ReportRow,
};
use cvt_hdmr::model::BuildOptions;
use cvt_hdmr::persist;
use cvt_hdmr::quad::IntegrationMethod;
use cvt_hdmr::testfns::QuadratureTestFn;
use cvt_hdmr::{
    cvt, quad, CvtHdmrModel, Error, ModelOracle, NodeScope, ProductDensity, Result, SampleSet,
    SliceMode,
};

#[derive(Parser)]
#[command(name = "cvt-hdmr", about = "Clustering-based multiple-anchor cut-HDMR surrogates", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Uniform,
    Beta,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    GlobalBox,
    ClusterBox,
}

impl From<ScopeArg> for NodeScope {
    fn from(s: ScopeArg) -> NodeScope {
        match s {
            ScopeArg::GlobalBox => NodeScope::GlobalBox,
            ScopeArg::ClusterBox => NodeScope::ClusterBox,
        }
    }
}

#[derive(Args)]
struct DensityArgs {
    /// Input distribution (uniform is the unit box).
    #[arg(long, value_enum, default_value = "uniform")]
    dist: DistKind,
    /// Input dimension.
    #[arg(long, default_value_t = 6)]
    dim: usize,
    /// Beta shape alpha (beta distribution only).
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    /// Beta shape beta (beta distribution only).
    #[arg(long, default_value_t = 1.3)]
    beta: f64,
}

impl DensityArgs {
    fn density(&self) -> ProductDensity {
        match self.dist {
            DistKind::Uniform => ProductDensity::unit_box(self.dim),
            DistKind::Beta => ProductDensity::Beta { alpha: self.alpha, beta: self.beta, dim: self.dim },
            DistKind::Normal => ProductDensity::StandardNormal { dim: self.dim },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded sample set and write CSV plus metadata sidecar.
    Sample {
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 20_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Cluster a sample CSV by Lloyd iteration and export the partition.
    Cluster {
        /// Sample CSV written by `sample`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build a CVT-HDMR model over a built-in test model and save it.
    Build {
        /// Which test model to wrap: "quadrature" or "diffusion".
        #[arg(long, default_value = "quadrature")]
        model: String,
        #[command(flatten)]
        density: DensityArgs,
        #[arg(long, default_value_t = 5_000)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        clusters: usize,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 7)]
        nodes_per_dim: usize,
        #[arg(long, value_enum, default_value = "global-box")]
        node_scope: ScopeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Diffusion grid: 2^g - 1 interior nodes per side.
        #[arg(long, default_value_t = 6)]
        grid_exponent: u32,
        /// Output model path (JSON).
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Evaluate a saved model on points from a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Points CSV (header x1..xp).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "predictions.csv")]
        out: PathBuf,
    },
    /// Integrate a saved model against a density by quasi-Monte Carlo.
    Integrate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        density: DensityArgs,
        /// Halton points (log2).
        #[arg(long, default_value_t = 20)]
        points_log2: u32,
        /// Optional reference value for a relative-error printout.
        #[arg(long)]
        reference: Option<f64>,
    },
    /// Run a full benchmark experiment.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
    },
    /// Render error-versus-order plot data (CSV + SVG) from a report.
    ExportPlots {
        /// report.csv produced by an experiment run.
        #[arg(long)]
        report: PathBuf,
        /// Experiment label to plot (e.g. "uniform").
        #[arg(long, default_value = "uniform")]
        experiment: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Integration-error sweep on the analytic quadrature test function.
    Quadrature {
        /// Configuration JSON (defaults to the standard benchmark scale).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surrogate benchmark on the stochastic diffusion problem.
    Diffusion {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sample { density, count, seed, out } => {
            let d = density.density();
            let xs = d.sample(count, seed)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("samples.csv"), xs.to_csv())?;
            std::fs::write(out.join("samples.meta.json"), xs.metadata_json())?;
            println!("wrote {} samples to {}", count, out.display());
            Ok(())
        }
        Command::Cluster { input, density, clusters, seed, out } => {
            let text = std::fs::read_to_string(&input)?;
            let xs = SampleSet::parse_csv(&text, seed, density.density())?;
            let part = cvt::lloyd(&xs, clusters, seed, cvt::LloydOptions::default())?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("partition.csv"), part.assignments_csv())?;
            std::fs::write(out.join("centroids.csv"), part.centroids_csv())?;
            println!(
                "L={} E_total={} converged={} iterations={}",
                clusters, part.total_energy, part.converged, part.iterations
            );
            for (l, (e, n)) in part.energies.iter().zip(&part.counts).enumerate() {
                println!("cluster {l}: count={n} energy={e}");
            }
            Ok(())
        }
        Command::Build {
            model,
            density,
            count,
            clusters,
            order,
            nodes_per_dim,
            node_scope,
            seed,
            grid_exponent,
            out,
        } => {
            let d = density.density();
            let oracle = match model.as_str() {
                "quadrature" => ModelOracle::from_model(QuadratureTestFn::new(d.dim())),
                "diffusion" => {
                    let problem =
                        Arc::new(DiffusionProblem::new((1 << grid_exponent) - 1, d.dim())?);
                    ModelOracle::from_model(DiffusionOracle::new(problem))
                }
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown test model `{other}` (expected quadrature or diffusion)"
                    )))
                }
            };
            let xs = d.sample(count, seed)?;
            let opts = BuildOptions::new(clusters, order, nodes_per_dim)
                .seed(seed)
                .node_scope(node_scope.into())
                .slice_mode(SliceMode::Interpolated);
            let built = CvtHdmrModel::build(&oracle, &xs, &opts)?;
            persist::save_model(&built, &out)?;
            println!(
                "built L={} r={} K={} model with {} oracle evaluations -> {}",
                clusters,
                order,
                nodes_per_dim,
                built.build_info().oracle_evals,
                out.display()
            );
            Ok(())
        }
        Command::Predict { model, input, out } => {
            let m = persist::load_model(&model)?;
            let text = std::fs::read_to_string(&input)?;
            let pts = SampleSet::parse_csv(&text, 0, ProductDensity::unit_box(m.input_dim()))?;
            let mut csv = String::new();
            let header: Vec<String> = (1..=m.out_dim()).map(|i| format!("y{i}")).collect();
            csv.push_str(&header.join(","));
            csv.push_str(",extrapolated\n");
            for x in pts.points() {
                let pred = m.predict(x)?;
                let row: Vec<String> = pred.values.iter().map(|v| format!("{v}")).collect();
                csv.push_str(&row.join(","));
                csv.push_str(&format!(",{}\n", pred.extrapolated));
            }
            std::fs::write(&out, csv)?;
            println!("wrote {} predictions to {}", pts.len(), out.display());
            Ok(())
        }
        Command::Integrate { model, density, points_log2, reference } => {
            let m = persist::load_model(&model)?;
            let d = density.density();
            let value = quad::integrate_surrogate(
                &m,
                &d,
                IntegrationMethod::Qmc { points: 1u64 << points_log2 },
            )?;
            println!("integral: {value:?}");
            if let Some(r) = reference {
                let eps = quad::relative_integral_error(r, value[0])?;
                println!("relative error vs {r}: {eps}");
            }
            Ok(())
        }
        Command::Experiment { which } => match which {
            ExperimentCmd::Quadrature { config, out } => {
                let cfg = load_config(config, out, ExperimentConfig::quadrature_default)?;
                let res = run_quadrature_experiment(&cfg)?;
                res.output.write_to(&cfg.output_dir)?;
                for (d, l, e) in &res.energies {
                    println!("{d}: L={l} E_total={e}");
                }
                println!("report written to {}", cfg.output_dir);
                Ok(())
            }
            ExperimentCmd::Diffusion { config, out } => {
                let cfg = load_config(config, out, ExperimentConfig::diffusion_default)?;
                let res = run_diffusion_experiment(&cfg)?;
                res.output.write_to(&cfg.output_dir)?;
                for (l, predicted, measured) in &res.costs {
                    println!("L={l}: {measured} solves (predicted {predicted})");
                }
                let (solve, predict) = res.timing;
                if predict > 0.0 {
                    println!(
                        "solver {:.4}s/sample vs surrogate {:.6}s/sample (speedup {:.1}x)",
                        solve,
                        predict,
                        solve / predict
                    );
                }
                println!("report written to {}", cfg.output_dir);
                Ok(())
            }
        },
        Command::ExportPlots { report, experiment, out } => {
            let text = std::fs::read_to_string(&report)?;
            let rows = parse_report(&text)?;
            std::fs::create_dir_all(&out)?;
            for (name, contents) in export_plots(&rows, &experiment) {
                std::fs::write(out.join(&name), contents)?;
                println!("wrote {}", out.join(&name).display());
            }
            Ok(())
        }
    }
}

fn load_config(
    path: Option<PathBuf>,
    out: Option<PathBuf>,
    default: fn() -> ExperimentConfig,
) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => default(),
    };
    if let Some(dir) = out {
        cfg.output_dir = dir.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn parse_report(text: &str) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for line in text.lines().skip_while(|l| l.starts_with('#')).skip(1) {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() < 9 {
            return Err(Error::Parse(format!("short report row: {line}")));
        }
        let num = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| Error::Parse(format!("{line}: {e}")))
            }
        };
        rows.push(ReportRow {
            experiment: f[0].to_string(),
            l: f[1].parse().map_err(|e| Error::Parse(format!("{line}: {e}")))?,
            r: f[2].parse().map_err(|e| Error::Parse(format!("{line}: {e}")))?,
            method: f[3].to_string(),
            epsilon: num(f[4])?,
            e: num(f[5])?,
            v: num(f[6])?,
            evals: f[7].parse().map_err(|e| Error::Parse(format!("{line}: {e}")))?,
            seconds: f[8].parse().unwrap_or(0.0),
        });
    }
    Ok(rows)
}
