//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them stream).
//!
//! The heavy experiment pipelines run once and are shared between the
//! criteria that inspect them; the determinism criterion repeats them and
//! compares report bytes.

use std::sync::OnceLock;

use cvt_hdmr::cvt::{self, LloydOptions};
use cvt_hdmr::diffusion::DiffusionProblem;
use cvt_hdmr::experiment::{
    run_diffusion_experiment, run_quadrature_experiment, Baselines, DiffusionResults,
    ExperimentConfig, ExperimentKind, QuadratureResults, Seeds,
};
use cvt_hdmr::hdmr::{build_expansion, predicted_cost, FnModel};
use cvt_hdmr::interp::select_nodes;
use cvt_hdmr::quad::{integrate_surrogate, IntegrationMethod};
use cvt_hdmr::rng::SplitMix64;
use cvt_hdmr::testfns::QuadratureTestFn;
use cvt_hdmr::{
    BuildOptions, CvtHdmrModel, ModelOracle, NodeScope, Point, ProductDensity, SliceMode,
};

fn pass(criterion: &str, detail: &str) {
    println!("[acceptance] {criterion}: PASS ({detail})");
}

fn quadrature_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::Quadrature,
        densities: vec![ProductDensity::unit_box(6)],
        sample_count: 20_000,
        cluster_counts: vec![1, 4],
        orders: vec![1, 2, 3, 4, 5],
        nodes_per_dim: 7,
        node_scope: NodeScope::GlobalBox,
        seeds: Seeds { sample: 2024, cluster: 7, test: 4205, anchor: 99 },
        output_dir: "out/acceptance-quadrature".into(),
        baselines: Baselines { random_anchor: false, mean_point: false, ave_hdmr: false },
        qmc_points: 1 << 20,
        reference_points: 1 << 22,
        test_samples: 0,
        grid_exponent: 6,
        cluster_box_counts: Vec::new(),
    }
}

fn diffusion_config() -> ExperimentConfig {
    ExperimentConfig {
        experiment: ExperimentKind::Diffusion,
        densities: vec![ProductDensity::StandardNormal { dim: 5 }],
        sample_count: 5_000,
        cluster_counts: vec![1, 2, 3, 4],
        orders: vec![2],
        nodes_per_dim: 7,
        node_scope: NodeScope::GlobalBox,
        seeds: Seeds { sample: 42, cluster: 7, test: 1234, anchor: 99 },
        output_dir: "out/acceptance-diffusion".into(),
        baselines: Baselines { random_anchor: false, mean_point: false, ave_hdmr: true },
        qmc_points: 1 << 10,
        reference_points: 1 << 10,
        test_samples: 5_000,
        grid_exponent: 6,
        cluster_box_counts: vec![2, 3],
    }
}

fn quadrature_results() -> &'static QuadratureResults {
    static CELL: OnceLock<QuadratureResults> = OnceLock::new();
    CELL.get_or_init(|| run_quadrature_experiment(&quadrature_config()).expect("quadrature run"))
}

fn diffusion_results() -> &'static DiffusionResults {
    static CELL: OnceLock<DiffusionResults> = OnceLock::new();
    CELL.get_or_init(|| run_diffusion_experiment(&diffusion_config()).expect("diffusion run"))
}

#[test]
fn criterion_01_cost_exactness() {
    let shared = ModelOracle::from_model(FnModel::scalar(5, |x: &[f64]| {
        x.iter().map(|v| v * v).sum()
    }));
    let xs = ProductDensity::unit_box(5).sample(3_000, 17).unwrap();
    let mut totals = Vec::new();
    for l in 1..=4usize {
        let oracle = ModelOracle::new(shared.model_fn());
        let model =
            CvtHdmrModel::build(&oracle, &xs, &BuildOptions::new(l, 2, 7).seed(1)).unwrap();
        assert_eq!(model.build_info().oracle_evals, oracle.eval_count());
        assert_eq!(
            oracle.eval_count(),
            391 * l as u64,
            "L={l} consumed {}",
            oracle.eval_count()
        );
        assert_eq!(predicted_cost(&[7; 5], 2, l as u64), 391 * l as u64);
        totals.push(oracle.eval_count());
    }
    assert_eq!(totals, vec![391, 782, 1173, 1564]);
    pass("criterion 1 (cost exactness)", "p=5 K=7 r=2 costs 391 per anchor; L=1..4 = {391,782,1173,1564}");
}

#[test]
fn criterion_02_uniform_cvt_energy() {
    let xs = ProductDensity::unit_box(6).sample(20_000, 2024).unwrap();
    let mut energies = Vec::new();
    for l in 1..=4 {
        let part = cvt::lloyd(&xs, l, 7, LloydOptions::default()).unwrap();
        assert!(part.converged, "L={l} did not converge");
        energies.push(part.total_energy);
    }
    assert!(
        energies[0] >= 9_900.0 && energies[0] <= 10_100.0,
        "E_total(L=1) = {}",
        energies[0]
    );
    for w in energies.windows(2) {
        assert!(w[1] < w[0], "energy not strictly decreasing: {energies:?}");
    }
    pass(
        "criterion 2 (uniform CVT energy)",
        &format!("E_total(L=1..4) = {energies:?}"),
    );
}

#[test]
fn criterion_03_quadrature_integral() {
    // full-order expansion with explicit slices integrates to 1 under the
    // uniform density (the expansion telescopes to the model itself)
    let p = 6;
    let oracle = ModelOracle::from_model(QuadratureTestFn::new(p));
    let density = ProductDensity::unit_box(p);
    let xs = density.sample(20_000, 2024).unwrap();
    let opts = BuildOptions::new(1, p, 7).seed(7).slice_mode(SliceMode::Explicit);
    let model = CvtHdmrModel::build(&oracle, &xs, &opts).unwrap();
    let integral =
        integrate_surrogate(&model, &density, IntegrationMethod::Qmc { points: 1 << 20 }).unwrap()
            [0];
    assert!(
        (integral - 1.0).abs() <= 5e-4,
        "integral {integral} strays from 1 by {}",
        (integral - 1.0).abs()
    );
    pass("criterion 3 (quadrature integral)", &format!("integral = {integral:.6}"));
}

#[test]
fn criterion_04_table2_spot_values() {
    let res = quadrature_results();
    let eps = |l: usize, r: usize| {
        res.epsilon("uniform", &format!("cvt-L{l}"), l, r)
            .unwrap_or_else(|| panic!("missing cell L={l} r={r}"))
    };
    let spot = eps(1, 1);
    assert!(
        (0.023..=0.028).contains(&spot),
        "eps(L=1, r=1) = {spot} outside [0.023, 0.028]"
    );
    for l in [1usize, 4] {
        let (e1, e2, e3) = (eps(l, 1), eps(l, 2), eps(l, 3));
        assert!(
            e1 > e2 && e2 > e3,
            "CVT L={l} block not monotone in r: {e1} {e2} {e3}"
        );
    }
    assert!(
        eps(4, 2) < eps(1, 2),
        "eps(L=4, r=2) = {} !< eps(L=1, r=2) = {}",
        eps(4, 2),
        eps(1, 2)
    );
    // higher orders sit at the reference resolution: reported, not gated
    println!(
        "[acceptance] criterion 4 note: r>=4 rows (reported only): L=1 -> {:.2e}/{:.2e}, L=4 -> {:.2e}/{:.2e}",
        eps(1, 4),
        eps(1, 5),
        eps(4, 4),
        eps(4, 5)
    );
    pass(
        "criterion 4 (integration-error spot values)",
        &format!("eps(L=1, r=1..3) = {:.4e}, {:.4e}, {:.4e}; eps(L=4, r=2) = {:.4e}", eps(1, 1), eps(1, 2), eps(1, 3), eps(4, 2)),
    );
}

#[test]
fn criterion_05_full_order_exactness() {
    let mut worst = 0.0_f64;
    for p in 2..=4usize {
        let oracle = ModelOracle::from_model(FnModel::scalar(p, move |x: &[f64]| {
            let s: f64 = x.iter().sum();
            (s / p as f64).exp() + x.iter().product::<f64>() + 0.5 * (3.0 * x[0]).sin()
        }));
        let anchor = Point::new(vec![0.45; p]).unwrap();
        let nodes: Vec<_> = (0..p)
            .map(|_| select_nodes(0.0, 1.0, 0.45, 4).unwrap())
            .collect();
        let exp = build_expansion(&oracle, &anchor, &nodes, p, SliceMode::Explicit).unwrap();
        let mut rng = SplitMix64::new(100 + p as u64);
        for _ in 0..100 {
            let x = Point::new((0..p).map(|_| rng.next_f64()).collect()).unwrap();
            let truth = oracle.call(x.coords()).unwrap()[0];
            let got = exp.evaluate(&x).unwrap().values[0];
            let rel = (got - truth).abs() / truth.abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    assert!(worst <= 1e-10, "worst relative deviation {worst}");
    pass("criterion 5 (full-order exactness)", &format!("max relative deviation {worst:.2e}"));
}

#[test]
fn criterion_06_anchor_vanishing() {
    let p = 5;
    let oracle = ModelOracle::from_model(FnModel::scalar(p, |x: &[f64]| {
        (1.0 + x[0] * x[1]).ln() + (x[2] - 0.3).powi(2) * x[3] + (2.0 * x[4]).cos()
    }));
    let anchor = Point::new(vec![0.52, 0.41, 0.66, 0.35, 0.58]).unwrap();
    let nodes: Vec<_> = anchor
        .coords()
        .iter()
        .map(|&a| select_nodes(0.0, 1.0, a, 5).unwrap())
        .collect();
    let exp = build_expansion(&oracle, &anchor, &nodes, 3, SliceMode::Interpolated).unwrap();
    let sets = exp.index_sets().to_vec();
    let mut rng = SplitMix64::new(606);
    let mut worst = 0.0_f64;
    for probe in 0..500 {
        let set = &sets[(rng.next_u64() % sets.len() as u64) as usize];
        let pin = (rng.next_u64() % set.len() as u64) as usize;
        let coords: Vec<f64> = set
            .iter()
            .enumerate()
            .map(|(j, &d)| if j == pin { anchor[d] } else { rng.next_f64() })
            .collect();
        let comp = exp.eval_component(set, &coords).unwrap();
        for v in comp {
            worst = worst.max(v.abs());
        }
        if probe == 0 {
            assert!(!set.is_empty());
        }
    }
    assert!(worst <= 1e-10, "largest pinned component {worst}");
    pass("criterion 6 (anchor vanishing)", &format!("500 probes, max |component| = {worst:.2e}"));
}

#[test]
fn criterion_07_lagrange_properties() {
    let mut rng = SplitMix64::new(7070);
    let mut worst_unity = 0.0_f64;
    let mut worst_poly = 0.0_f64;
    for k in 3..=12usize {
        let ns = select_nodes(0.0, 1.0, 0.37, k).unwrap();
        // partition of unity at 50 probes (including outside the hull)
        for _ in 0..50 {
            let x = -0.25 + 1.5 * rng.next_f64();
            let s: f64 = ns.basis(x).iter().sum();
            worst_unity = worst_unity.max((s - 1.0).abs());
        }
        // degree-(K-1) polynomial reproduction at 50 probes
        let coeffs: Vec<f64> = (0..k).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let poly = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let values: Vec<f64> = ns.nodes().iter().map(|&x| poly(x)).collect();
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for _ in 0..50 {
            let x = rng.next_f64();
            let interp: f64 = ns.basis(x).iter().zip(&values).map(|(a, b)| a * b).sum();
            worst_poly = worst_poly.max((interp - poly(x)).abs() / scale);
        }
    }
    assert!(worst_unity <= 1e-9, "partition of unity defect {worst_unity}");
    assert!(worst_poly <= 1e-9, "polynomial reproduction defect {worst_poly}");
    pass(
        "criterion 7 (Lagrange properties)",
        &format!("unity defect {worst_unity:.2e}, reproduction defect {worst_poly:.2e}"),
    );
}

#[test]
fn criterion_08_lloyd_monotone_and_assignment_oracle() {
    let mut checked = 0usize;
    for (n, l, seed) in [(200usize, 2usize, 1u64), (500, 5, 2), (1000, 8, 3)] {
        let xs = ProductDensity::unit_box(3).sample(n, seed).unwrap();
        let part = cvt::lloyd(&xs, l, seed, LloydOptions::default()).unwrap();
        for w in part.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "energy rose: {:?}", part.energy_history);
        }
        // exhaustive nearest-generator oracle
        for (i, x) in xs.points().iter().enumerate() {
            let mut best = 0;
            for c in 1..l {
                if x.squared_distance(&part.centroids[c])
                    < x.squared_distance(&part.centroids[best])
                {
                    best = c;
                }
            }
            assert_eq!(part.assignments[i], best, "N={n} L={l} sample {i}");
            checked += 1;
        }
    }
    pass(
        "criterion 8 (Lloyd monotonicity + assignment oracle)",
        &format!("{checked} assignments matched, energies non-increasing"),
    );
}

#[test]
fn criterion_09_diffusion_solver_order() {
    let pi = std::f64::consts::PI;
    let mut errors = Vec::new();
    for g in [4u32, 5, 6] {
        let n = (1usize << g) - 1;
        let problem = DiffusionProblem::new(n, 5)
            .unwrap()
            .with_source(move |x, y| 0.2 * pi * pi * (pi * x).sin() * (pi * y).sin());
        let sol = problem.solve(&[0.0; 5]).unwrap();
        let h = 1.0 / (n as f64 + 1.0);
        let side = n + 2;
        let mut err = 0.0_f64;
        for iy in 0..side {
            for ix in 0..side {
                let (x, y) = (ix as f64 * h, iy as f64 * h);
                let want = (pi * x).sin() * (pi * y).sin();
                err = err.max((sol.values[iy * side + ix] - want).abs());
            }
        }
        errors.push(err);
    }
    let order_a = (errors[0] / errors[1]).log2();
    let order_b = (errors[1] / errors[2]).log2();
    assert!(
        order_a >= 1.9 && order_b >= 1.9,
        "observed orders {order_a:.3}, {order_b:.3} (errors {errors:?})"
    );
    pass(
        "criterion 9 (solver convergence order)",
        &format!("orders {order_a:.3}, {order_b:.3} across h = 2^-4, 2^-5, 2^-6"),
    );
}

#[test]
fn criterion_10_spde_qualitative_reproduction() {
    let res = diffusion_results();
    let stat = |l: usize| {
        res.compare
            .iter()
            .find(|(ll, _, _)| *ll == l)
            .unwrap_or_else(|| panic!("missing L={l}"))
    };
    for l in [2usize, 3] {
        let (_, cvt_stats, ave_stats) = stat(l);
        assert!(
            cvt_stats.mean < ave_stats.mean,
            "L={l}: CVT E = {} !< Ave E = {}",
            cvt_stats.mean,
            ave_stats.mean
        );
    }
    let global3 = &stat(3).1;
    let cluster3 = &res
        .cluster_box
        .iter()
        .find(|(l, _)| *l == 3)
        .expect("cluster-box L=3")
        .1;
    assert!(
        cluster3.mean <= global3.mean,
        "cluster-box E = {} > global-box E = {}",
        cluster3.mean,
        global3.mean
    );
    let best = res
        .per_anchor
        .iter()
        .map(|(_, _, st)| st.mean)
        .fold(f64::INFINITY, f64::min);
    let worst = res
        .per_anchor
        .iter()
        .map(|(_, _, st)| st.mean)
        .fold(0.0_f64, f64::max);
    assert!(
        worst >= 2.0 * best,
        "single-anchor spread {worst:.3e}/{best:.3e} < 2x"
    );
    pass(
        "criterion 10 (SPDE qualitative reproduction)",
        &format!(
            "CVT<Ave at L=2 ({:.3e}<{:.3e}) and L=3 ({:.3e}<{:.3e}); cluster-box {:.3e} <= global {:.3e}; anchor spread {:.1}x",
            stat(2).1.mean,
            stat(2).2.mean,
            stat(3).1.mean,
            stat(3).2.mean,
            cluster3.mean,
            global3.mean,
            worst / best
        ),
    );
}

#[test]
fn criterion_11_determinism() {
    // repeat both experiment pipelines with identical seeds and compare the
    // emitted CSVs byte for byte (timing columns excluded)
    let quad_first = quadrature_results().output.deterministic_view();
    let quad_second = run_quadrature_experiment(&quadrature_config())
        .expect("second quadrature run")
        .output
        .deterministic_view();
    assert_eq!(quad_first, quad_second, "quadrature reports differ between runs");

    let diff_first = diffusion_results().output.deterministic_view();
    let diff_second = run_diffusion_experiment(&diffusion_config())
        .expect("second diffusion run")
        .output
        .deterministic_view();
    assert_eq!(diff_first, diff_second, "diffusion reports differ between runs");

    let n_files = quad_first.len() + diff_first.len();
    pass(
        "criterion 11 (determinism)",
        &format!("{n_files} report files byte-identical across repeated runs"),
    );
}
