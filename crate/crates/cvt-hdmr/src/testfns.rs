//! Analytic benchmark models.

use crate::error::{Error, Result};
use crate::hdmr::ModelFn;

/// The p-dimensional quadrature benchmark `(1 + 1/p)^p * prod x_i^(1/p)`,
/// whose integral over the uniform unit cube is exactly 1.
pub fn quadrature_test(x: &[f64]) -> Result<f64> {
    let p = x.len();
    if p == 0 {
        return Err(Error::InvalidParameter("need at least one coordinate".into()));
    }
    if let Some(bad) = x.iter().find(|&&v| v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "quadrature test function needs nonnegative coordinates, got {bad}"
        )));
    }
    let inv_p = 1.0 / p as f64;
    let scale = (1.0 + inv_p).powi(p as i32);
    Ok(scale * x.iter().map(|&v| v.powf(inv_p)).product::<f64>())
}

/// [`quadrature_test`] as a model oracle.
pub struct QuadratureTestFn {
    dim: usize,
}

impl QuadratureTestFn {
    pub fn new(dim: usize) -> Self {
        QuadratureTestFn { dim }
    }
}

impl ModelFn for QuadratureTestFn {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![quadrature_test(x)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn value_at_ones() {
        // (7/6)^6 = 117649/46656
        let got = quadrature_test(&[1.0; 6]).unwrap();
        assert!((got - 117_649.0 / 46_656.0).abs() < 1e-12);
        assert!((got - 2.52163).abs() < 1e-5);
    }

    #[test]
    fn any_zero_coordinate_annihilates_the_product() {
        assert_eq!(quadrature_test(&[0.7, 0.0, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn negative_coordinates_are_a_domain_error() {
        assert!(quadrature_test(&[0.5, -0.1]).is_err());
    }

    #[test]
    fn monotone_nondecreasing_in_every_coordinate() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..200 {
            let x: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
            let base = quadrature_test(&x).unwrap();
            for d in 0..4 {
                let mut y = x.clone();
                y[d] = (y[d] + 0.1).min(1.0);
                assert!(quadrature_test(&y).unwrap() >= base);
            }
        }
    }
}
