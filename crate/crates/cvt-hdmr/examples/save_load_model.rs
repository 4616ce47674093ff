//! Persist a model to JSON and verify the reload reproduces predictions
//! bit for bit.
//!
//!     cargo run --example save_load_model

use cvt_hdmr::hdmr::FnModel;
use cvt_hdmr::persist::{load_model, save_model};
use cvt_hdmr::{BuildOptions, CvtHdmrModel, ModelOracle, ProductDensity};

fn main() -> cvt_hdmr::Result<()> {
    let oracle = ModelOracle::from_model(FnModel::new(3, 2, |x: &[f64]| {
        vec![(x[0] * 2.0).sin() + x[1] * x[2], x[0] + x[1].exp()]
    }));
    let density = ProductDensity::unit_box(3);
    let xs = density.sample(1_000, 42)?;
    let model = CvtHdmrModel::build(&oracle, &xs, &BuildOptions::new(2, 2, 5).seed(3))?;

    std::fs::create_dir_all("out")?;
    save_model(&model, "out/model.json")?;
    let reloaded = load_model("out/model.json")?;

    let probes = density.sample(200, 777)?;
    let mut worst_bits = 0u64;
    for x in probes.points() {
        let a = model.predict(x)?.values;
        let b = reloaded.predict(x)?.values;
        for (va, vb) in a.iter().zip(&b) {
            worst_bits = worst_bits.max(va.to_bits().abs_diff(vb.to_bits()));
        }
    }
    println!("largest bit difference over 200 probes: {worst_bits}");
    assert_eq!(worst_bits, 0, "round trip must be exact");
    println!("round trip is bitwise exact; model stored at out/model.json");
    Ok(())
}
