//! Minimal geodesics and topological-entropy experiments on Riemannian
//! two-tori.
//!
//! The torus carries a conformal metric g = e^{2f}·g_E with a trigonometric
//! polynomial f, lifted to the universal cover ℝ². On top of that sit, in
//! order: geodesic integration ([`flow`]), distance machinery (lattice seeds,
//! curve shortening, fast-marching fields), certified minimal geodesics with
//! rotation numbers and accompanying lines ([`minimal`]), and the
//! separated/spanning-set entropy constructions with their packing and
//! volume-growth bounds ([`entropy`]).
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the aliases below fix the double-precision instantiation the experiment
//! harness uses.

pub mod entropy;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod minimal;
pub mod scalar;
pub mod shortening;
pub mod space;
pub mod vec2;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations used by the CLI and most tests.
pub type Point = vec2::Vec2<f64>;
pub type Metric = geometry::MetricField<f64>;
pub type GridF64 = geometry::Grid<f64>;
pub type SpaceF64 = space::Space<f64>;
pub type Phase = flow::PhasePoint<f64>;
pub type Path = flow::GeodesicPath<f64>;
pub type Record = minimal::MinimalRecord<f64>;
