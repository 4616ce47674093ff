//! Inspect the discrete Karhunen-Loeve basis of the Gaussian covariance
//! kernel that drives the diffusion coefficient.
//!
//!     cargo run --example karhunen_loeve

use cvt_hdmr::diffusion::{kl_decompose, DEFAULT_CORRELATION};

fn main() -> cvt_hdmr::Result<()> {
    let n = 31; // interior nodes per side
    let kl = kl_decompose(n, DEFAULT_CORRELATION, 5)?;

    println!("leading eigenvalues:");
    for (i, lam) in kl.lambdas.iter().enumerate() {
        println!("  lambda_{} = {lam:.6}", i + 1);
    }
    println!("captured fraction of the covariance trace: {:.4}", kl.captured_fraction);

    // modes are orthonormal under the h^2-weighted discrete inner product
    let h = 1.0 / (n as f64 + 1.0);
    let ip: f64 = h * h
        * kl.modes[0]
            .iter()
            .zip(&kl.modes[1])
            .map(|(a, b)| a * b)
            .sum::<f64>();
    let norm: f64 = h * h * kl.modes[0].iter().map(|v| v * v).sum::<f64>();
    println!("<mode1, mode1> = {norm:.12}, <mode1, mode2> = {ip:.2e}");
    Ok(())
}
