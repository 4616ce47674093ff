//! Desk-scale version of the stochastic diffusion benchmark: clustering
//! energies, build costs, and error statistics for CVT dispatch versus
//! expansion averaging and single-anchor baselines.
//!
//! The full-scale run (5000 samples, 2^-6 grid, 5000-sample test sweep)
//! lives behind `cvt-hdmr experiment diffusion`.
//!
//!     cargo run --example diffusion_experiment

use cvt_hdmr::experiment::{
    run_diffusion_experiment, Baselines, ExperimentConfig, ExperimentKind, Seeds,
};
use cvt_hdmr::{NodeScope, ProductDensity};

fn main() -> cvt_hdmr::Result<()> {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::Diffusion,
        densities: vec![ProductDensity::StandardNormal { dim: 5 }],
        sample_count: 800,
        cluster_counts: vec![1, 2, 3],
        orders: vec![2],
        nodes_per_dim: 7,
        node_scope: NodeScope::GlobalBox,
        seeds: Seeds { sample: 2024, cluster: 7, test: 4205, anchor: 99 },
        output_dir: "out/diffusion-desk".into(),
        baselines: Baselines { random_anchor: true, mean_point: false, ave_hdmr: true },
        qmc_points: 1 << 10,
        reference_points: 1 << 10,
        test_samples: 400,
        grid_exponent: 5,
        cluster_box_counts: vec![2, 3],
    };

    let res = run_diffusion_experiment(&cfg)?;
    println!("clustering energies:");
    for (l, e) in &res.energies {
        println!("  L={l}: E_total={e:.2}");
    }
    println!("build costs (solver runs):");
    for (l, predicted, measured) in &res.costs {
        println!("  L={l}: {measured} (predicted {predicted})");
    }
    println!("per-anchor single-expansion errors:");
    for (l, idx, st) in &res.per_anchor {
        println!("  L={l} anchor {idx}: E={:.4e} V={:.4e}", st.mean, st.variance);
    }
    println!("dispatch vs averaging:");
    for (l, cvt, ave) in &res.compare {
        println!("  L={l}: CVT E={:.4e} | AVE E={:.4e}", cvt.mean, ave.mean);
    }
    println!("cluster-box node scope:");
    for (l, st) in &res.cluster_box {
        println!("  L={l}: E={:.4e}", st.mean);
    }
    let (solve, predict) = res.timing;
    println!("solver {solve:.4}s vs surrogate {predict:.6}s per sample");

    res.output.write_to(&cfg.output_dir)?;
    println!("tables written to {}", cfg.output_dir);
    Ok(())
}
