//! Solve one realization of the stochastic diffusion problem and export the
//! coefficient and solution fields as CSV.
//!
//!     cargo run --example diffusion_solver

use std::sync::Arc;

use cvt_hdmr::diffusion::DiffusionProblem;

fn main() -> cvt_hdmr::Result<()> {
    // 31x31 interior nodes (h = 1/32), 5 random parameters
    let problem = Arc::new(DiffusionProblem::new(31, 5)?);
    println!("mesh size h = {}", problem.mesh_size());

    let xi = [0.8, -0.4, 1.1, 0.3, -0.9];
    let a = problem.assemble_diffusion(&xi)?;
    let (a_min, a_max) = a
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("diffusion field range: [{a_min:.4}, {a_max:.4}]");

    let solution = problem.solve(&xi)?;
    let u_max = solution.values.iter().cloned().fold(0.0_f64, f64::max);
    println!("solution max: {u_max:.5} over {} nodes", solution.values.len());

    std::fs::create_dir_all("out")?;
    std::fs::write("out/solution_field.csv", solution.to_csv())?;
    println!("wrote out/solution_field.csv");
    Ok(())
}
