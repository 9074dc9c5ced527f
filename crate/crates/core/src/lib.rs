//! Pseudoholomorphic surfaces in even-dimensional spheres built from holomorphic data.
//!
//! A list of holomorphic functions `beta_0, ..., beta_(n-1)` on a convex planar domain
//! determines an isotropic chain of holomorphic maps (`alpha`), a Hermitian
//! orthogonal frame `F_1, ..., F_(n+1)` in `C^(2n+1)`, and finally the surface
//! `g = Re(F_(n+1)) / |Re(F_(n+1))|` in `S^(2n)`.
//!
//! Modules:
//! - [`holo`]: expression trees, polynomials, domains, quadrature, antiderivatives.
//! - [`chain`]: the alpha chain, the F chain and the surface map.
//! - [`products`], [`fd`], [`linalg`]: numerical building blocks.
//! - [`verify`]: residual checks for every invariant of the construction.
//! - [`converse`]: recovering holomorphic data from a surface and rebuilding it.
//! - [`applications`]: Kaehler hypersurfaces and ruled minimal submanifolds.

pub mod applications;
pub mod chain;
pub mod converse;
pub mod error;
pub mod fd;
pub mod holo;
pub mod linalg;
pub mod products;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use products::ComplexVector;
