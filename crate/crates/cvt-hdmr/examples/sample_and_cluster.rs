//! Draw a seeded sample set, cluster it with Lloyd iteration, and inspect
//! the tessellation energies.
//!
//!     cargo run --example sample_and_cluster

use cvt_hdmr::cvt::{lloyd, LloydOptions};
use cvt_hdmr::ProductDensity;

fn main() -> cvt_hdmr::Result<()> {
    // 20000 points on the unit 6-cube, reproducible for a fixed seed
    let density = ProductDensity::unit_box(6);
    let xs = density.sample(20_000, 2024)?;
    println!("sampled {} points in {} dimensions", xs.len(), xs.dim());

    let bx = xs.bounding_box();
    println!("bounding box, first dimension: [{:.4}, {:.4}]", bx[0].0, bx[0].1);

    // the k-means objective decreases as clusters are added
    for l in 1..=4 {
        let part = lloyd(&xs, l, 7, LloydOptions::default())?;
        println!(
            "L={l}: E_total={:.1} iterations={} converged={}",
            part.total_energy, part.iterations, part.converged
        );
        for (c, (count, energy)) in part.counts.iter().zip(&part.energies).enumerate() {
            println!("   cluster {c}: {count} members, energy {energy:.1}");
        }
    }

    // partition and centroid tables can be exported as CSV
    let part = lloyd(&xs, 3, 7, LloydOptions::default())?;
    println!("\ncentroid table:\n{}", part.centroids_csv());
    Ok(())
}
