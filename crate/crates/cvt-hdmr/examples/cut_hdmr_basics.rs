//! Anatomy of a single anchored cut-HDMR expansion: node selection, build
//! cost metering, component functions, and the anchor-vanishing property.
//!
//!     cargo run --example cut_hdmr_basics

use cvt_hdmr::hdmr::{build_expansion, predicted_cost, FnModel};
use cvt_hdmr::interp::select_nodes;
use cvt_hdmr::{ModelOracle, Point, SliceMode};

fn main() -> cvt_hdmr::Result<()> {
    // a smooth 3-dimensional model with interactions
    let oracle = ModelOracle::from_model(FnModel::scalar(3, |x: &[f64]| {
        (x[0] + 0.5 * x[1]).exp() + x[1] * x[2]
    }));
    let anchor = Point::new(vec![0.4, 0.5, 0.6])?;

    // nodes per dimension: endpoints, the anchor, then widest-gap midpoints
    let node_sets: Vec<_> = anchor
        .coords()
        .iter()
        .map(|&a| select_nodes(0.0, 1.0, a, 5))
        .collect::<cvt_hdmr::Result<_>>()?;
    println!("nodes along dimension 0: {:?}", node_sets[0].nodes());

    // order-2 truncation: 1 anchor + first-order lines + second-order planes
    let expansion = build_expansion(&oracle, &anchor, &node_sets, 2, SliceMode::Interpolated)?;
    println!(
        "oracle evaluations: {} (predicted {})",
        oracle.eval_count(),
        predicted_cost(&[5, 5, 5], 2, 1)
    );

    // the zeroth-order term is the response at the anchor
    println!("f0 = {:?}", expansion.zeroth_order());

    // component functions vanish when any coordinate sits on the anchor
    let pinned = expansion.eval_component(&[0, 1], &[anchor[0], 0.9])?;
    println!("component {{0,1}} with x0 pinned to the anchor: {:.2e}", pinned[0]);

    // away from the anchor they carry the interaction structure
    let active = expansion.eval_component(&[1, 2], &[0.9, 0.1])?;
    println!("component {{1,2}} at (0.9, 0.1): {:.5}", active[0]);

    // the truncated expansion approximates the model
    let x = Point::new(vec![0.25, 0.8, 0.3])?;
    let pred = expansion.evaluate(&x)?;
    let truth = oracle.call(x.coords())?;
    println!(
        "prediction {:.6} vs model {:.6} (extrapolated: {})",
        pred.values[0], truth[0], pred.extrapolated
    );
    Ok(())
}
