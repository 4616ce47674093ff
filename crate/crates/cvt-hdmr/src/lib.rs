//! Clustering-based multiple-anchor cut-HDMR surrogate models.
//!
//! The library builds cheap surrogates for expensive input-output maps in
//! three steps:
//!
//! 1. cluster a set of input realizations by centroidal Voronoi tessellation
//!    (Lloyd iteration, [`cvt`]);
//! 2. anchor a truncated cut-HDMR expansion on each cluster centroid, with
//!    slice responses tabulated on tensor node grids and Lagrange
//!    interpolated ([`hdmr`], [`interp`]);
//! 3. answer new queries with the expansion of the nearest centroid
//!    ([`model`]).
//!
//! [`quad`] integrates surrogates against the input density and measures
//! approximation errors; [`testfns`] and [`diffusion`] provide an analytic
//! benchmark function and an elliptic stochastic-PDE solver to exercise the
//! pipeline; [`experiment`] drives the end-to-end benchmark sweeps behind
//! the `cvt-hdmr` CLI.
//!
//! Everything is deterministic: sampling, clustering, and quadrature are
//! seeded and bit-reproducible across runs and thread counts.
//!
//! The `examples/` directory has one runnable program per capability; start
//! with `cargo run --example build_and_predict`.

pub mod cvt;
pub mod diffusion;
mod error;
pub mod experiment;
pub mod hdmr;
pub mod interp;
pub mod model;
pub mod persist;
pub mod plot;
pub mod quad;
pub mod rng;
pub mod space;
pub mod special;
pub mod testfns;

pub use error::{Error, Result};
pub use hdmr::{CutHdmrExpansion, ModelFn, ModelOracle, Prediction, SliceMode};
pub use model::{BuildOptions, CvtHdmrModel, NodeScope};
pub use space::{Point, ProductDensity, SampleSet};
