//! Optimal transport on the round sphere `S^{n-1}`.
//!
//! The crate covers the cost family `c(x, y) = f(d(x, y))` (quadratic
//! `d²/2` and the reflector-antenna logarithm), the cost-sectional (MTW)
//! curvature tensor evaluated by two independent routes, c-convex
//! potentials with their contact sets, exact and entropic discrete
//! transport solvers, and quantitative regularity diagnostics.
//!
//! Everything here is pure computation over `alloc`; file formats and the
//! command line front-end live in the `spherot` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cconvex;
pub mod cost;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod mtw;
pub mod ot;
pub mod par;
pub mod regularity;
pub mod sampling;
pub mod sphere;
pub mod tolerance;
pub(crate) mod trig;

pub use cost::{CostProfile, OriginalAntenna, PairCost, ProfileFn, TabulatedProfile};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use sphere::{SpherePoint, TangentFrame, TangentVector};
pub use tolerance::Tolerances;
