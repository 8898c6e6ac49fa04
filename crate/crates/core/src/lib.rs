//! Discrete isothermic nets in the light cone of R^{4,1}, their polynomial
//! conserved quantities, and discrete constant mean curvature nets in
//! Euclidean, spherical and hyperbolic space forms.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases fix the scalar for the common case.

// Dense linear algebra reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

#![forbid(unsafe_code)]

pub mod cmc;
pub mod conserved;
pub mod error;
pub mod grid;
pub mod io;
pub mod isothermic;
pub mod linalg;
pub mod minkowski;
pub mod poly;
pub mod revolution;
pub mod scalar;
pub mod transforms;

pub use conserved::ConservedQuantity;
pub use error::{Error, Result};
pub use grid::{EdgeFunction, Face, GridDomain, Vertex, VertexField};
pub use isothermic::IsothermicNet;
pub use minkowski::{Isometry, MVector};
pub use poly::{MPoly, Poly};
pub use scalar::{Real, Tol};

pub type MVectorF64 = MVector<f64>;
pub type IsometryF64 = Isometry<f64>;
pub type PolyF64 = Poly<f64>;
pub type MPolyF64 = MPoly<f64>;
pub type TolF64 = Tol<f64>;
pub type IsothermicNetF64 = IsothermicNet<f64>;
pub type ConservedQuantityF64 = ConservedQuantity<f64>;
