//! Build a multi-anchor CVT-HDMR model and compare nearest-centroid
//! dispatch against expansion averaging on fresh probes.
//!
//!     cargo run --example build_and_predict

use cvt_hdmr::testfns::QuadratureTestFn;
use cvt_hdmr::{BuildOptions, CvtHdmrModel, ModelOracle, ProductDensity};

fn main() -> cvt_hdmr::Result<()> {
    let dim = 4;
    let oracle = ModelOracle::from_model(QuadratureTestFn::new(dim));
    let density = ProductDensity::unit_box(dim);
    let xs = density.sample(4_000, 11)?;

    // three anchors, order-2 truncation, 7 interpolation nodes per direction
    let model = CvtHdmrModel::build(&oracle, &xs, &BuildOptions::new(3, 2, 7).seed(5))?;
    println!(
        "built {} expansions with {} oracle evaluations",
        model.cluster_count(),
        model.build_info().oracle_evals
    );

    let probes = density.sample(5, 999)?;
    for x in probes.points() {
        let truth = oracle.call(x.coords())?[0];
        let nearest = model.predict(x)?.values[0];
        let averaged = model.predict_average(x)?.values[0];
        println!(
            "x[0..2]=({:.3}, {:.3}): truth {truth:.5}  dispatch {nearest:.5} (cluster {})  average {averaged:.5}",
            x[0],
            x[1],
            model.dispatch_index(x)
        );
    }
    Ok(())
}
