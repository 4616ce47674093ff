//! Desk-scale version of the quadrature integration benchmark: relative
//! integral errors for CVT anchors versus random and response-mean anchors,
//! across truncation orders.
//!
//! The full-scale run (20000 samples, 2^20 integration points, uniform and
//! beta densities) lives behind `cvt-hdmr experiment quadrature`.
//!
//!     cargo run --example quadrature_experiment

use cvt_hdmr::experiment::{
    export_plots, run_quadrature_experiment, Baselines, ExperimentConfig, ExperimentKind, Seeds,
};
use cvt_hdmr::{NodeScope, ProductDensity};

fn main() -> cvt_hdmr::Result<()> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Quadrature,
        densities: vec![ProductDensity::unit_box(6)],
        sample_count: 5_000,
        cluster_counts: vec![1, 2, 3, 4],
        orders: vec![1, 2, 3],
        nodes_per_dim: 7,
        node_scope: NodeScope::GlobalBox,
        seeds: Seeds { sample: 2024, cluster: 7, test: 4205, anchor: 99 },
        output_dir: "out/quadrature-desk".into(),
        baselines: Baselines { random_anchor: true, mean_point: true, ave_hdmr: false },
        qmc_points: 1 << 16,
        reference_points: 1 << 18,
        test_samples: 0,
        grid_exponent: 6,
        cluster_box_counts: vec![],
    };

    let res = run_quadrature_experiment(&cfg)?;
    for (d, v, gap) in &res.references {
        println!("{d} reference: {v:.6} (half gap {gap:.1e})");
    }
    println!("\nrelative integral errors:");
    println!("{:<12} {:>12} {:>12} {:>12}", "anchor", "r=1", "r=2", "r=3");
    for method in ["random", "mean-point", "cvt-L1", "cvt-L2", "cvt-L3", "cvt-L4"] {
        let mut line = format!("{method:<12}");
        for r in 1..=3 {
            let eps = res
                .rows
                .iter()
                .find(|row| row.method == method && row.r == r)
                .and_then(|row| row.epsilon)
                .unwrap_or(f64::NAN);
            line.push_str(&format!(" {eps:>12.3e}"));
        }
        println!("{line}");
    }

    res.output.write_to(&cfg.output_dir)?;
    for (name, contents) in export_plots(&res.rows, "uniform") {
        std::fs::write(format!("{}/{name}", cfg.output_dir), contents)?;
    }
    println!("\ntables and plots written to {}", cfg.output_dir);
    Ok(())
}
