//! Input domains, product densities, and seeded sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::special::{inv_reg_inc_beta, ln_beta, normal_pdf, normal_quantile};

/// A point in the p-dimensional input space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("point coordinates must be finite".into()));
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn squared_distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// A product probability density: independent coordinates, one marginal per
/// dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProductDensity {
    /// Uniform on an axis-aligned box, one `[a_i, b_i]` pair per dimension.
    UniformBox { bounds: Vec<(f64, f64)> },
    /// Beta(alpha, beta) on [0, 1] in every dimension.
    Beta { alpha: f64, beta: f64, dim: usize },
    /// N(0, 1) in every dimension.
    StandardNormal { dim: usize },
}

impl ProductDensity {
    /// Uniform density on the unit box [0, 1]^dim.
    pub fn unit_box(dim: usize) -> Self {
        ProductDensity::UniformBox {
            bounds: vec![(0.0, 1.0); dim],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProductDensity::UniformBox { bounds } => {
                if bounds.is_empty() {
                    return Err(Error::InvalidParameter("uniform box needs at least one dimension".into()));
                }
                for (i, (a, b)) in bounds.iter().enumerate() {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(Error::InvalidParameter(format!(
                            "uniform bounds must satisfy a < b, got [{a}, {b}] in dimension {i}"
                        )));
                    }
                }
            }
            ProductDensity::Beta { alpha, beta, dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("beta density needs dim >= 1".into()));
                }
                if !(alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && *beta > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta parameters must be positive, got alpha={alpha}, beta={beta}"
                    )));
                }
            }
            ProductDensity::StandardNormal { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("normal density needs dim >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ProductDensity::UniformBox { bounds } => bounds.len(),
            ProductDensity::Beta { dim, .. } => *dim,
            ProductDensity::StandardNormal { dim } => *dim,
        }
    }

    /// Marginal density of dimension `i` at `x`; zero outside the support.
    pub fn marginal_pdf(&self, i: usize, x: f64) -> f64 {
        match self {
            ProductDensity::UniformBox { bounds } => {
                let (a, b) = bounds[i];
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            ProductDensity::Beta { alpha, beta, .. } => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    ((alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_beta(*alpha, *beta))
                        .exp()
                }
            }
            ProductDensity::StandardNormal { .. } => normal_pdf(x),
        }
    }

    /// Joint density at `x` (product of marginals); zero outside the support
    /// rather than an error, so importance ratios stay well defined.
    pub fn pdf(&self, x: &Point) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let mut p = 1.0;
        for (i, &c) in x.coords().iter().enumerate() {
            p *= self.marginal_pdf(i, c);
            if p == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(p)
    }

    /// Marginal quantile of dimension `i` at `u` in (0, 1).
    ///
    /// Shared by sampling and quasi-Monte-Carlo point mapping.
    pub fn marginal_quantile(&self, i: usize, u: f64) -> f64 {
        match self {
            ProductDensity::UniformBox { bounds } => {
                let (a, b) = bounds[i];
                a + (b - a) * u
            }
            ProductDensity::Beta { alpha, beta, .. } => inv_reg_inc_beta(*alpha, *beta, u),
            ProductDensity::StandardNormal { .. } => normal_quantile(u),
        }
    }

    /// Draws `n` independent points; identical (density, n, seed) inputs
    /// reproduce identical points bit for bit.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        self.validate()?;
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        let p = self.dim();
        // One substream per dimension: draws in dimension i are independent
        // of how many values other dimensions consume.
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(p);
        for i in 0..p {
            let mut rng = SplitMix64::stream(seed, i as u64);
            columns.push((0..n).map(|_| self.marginal_quantile(i, rng.next_f64())).collect());
        }
        let points = (0..n)
            .map(|k| Point {
                coords: (0..p).map(|i| columns[i][k]).collect(),
            })
            .collect();
        Ok(SampleSet {
            points,
            seed,
            density: self.clone(),
        })
    }
}

/// A seeded draw of N points from a product density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<Point>,
    seed: u64,
    density: ProductDensity,
}

impl SampleSet {
    /// Wraps externally supplied points (e.g. read back from CSV).
    pub fn from_points(points: Vec<Point>, seed: u64, density: ProductDensity) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidParameter("all points must share one dimension".into()));
        }
        Ok(SampleSet { points, seed, density })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn density(&self) -> &ProductDensity {
        &self.density
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Per-dimension [min, max] over the set.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let p = self.dim();
        let mut bx = vec![(f64::INFINITY, f64::NEG_INFINITY); p];
        for pt in &self.points {
            for (i, &c) in pt.coords().iter().enumerate() {
                if c < bx[i].0 {
                    bx[i].0 = c;
                }
                if c > bx[i].1 {
                    bx[i].1 = c;
                }
            }
        }
        bx
    }

    /// CSV body: header `x1,...,xp`, one row per point, full precision.
    pub fn to_csv(&self) -> String {
        let p = self.dim();
        let header: Vec<String> = (1..=p).map(|i| format!("x{i}")).collect();
        let mut out = header.join(",");
        out.push('\n');
        for pt in &self.points {
            let row: Vec<String> = pt.coords().iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form written by [`SampleSet::to_csv`].
    pub fn parse_csv(text: &str, seed: u64, density: ProductDensity) -> Result<Self> {
        let mut points = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (ln == 0 && line.starts_with('x')) {
                continue;
            }
            let coords: Result<Vec<f64>> = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))
                })
                .collect();
            points.push(Point::new(coords?)?);
        }
        SampleSet::from_points(points, seed, density)
    }

    /// Sidecar metadata document (seed and density description).
    pub fn metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            seed: u64,
            count: usize,
            dim: usize,
            density: &'a ProductDensity,
        }
        serde_json::to_string_pretty(&Meta {
            seed: self.seed,
            count: self.len(),
            dim: self.dim(),
            density: &self.density,
        })
        .expect("metadata serializes")
    }
}
