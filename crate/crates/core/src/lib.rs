//! Gaussian perimeter, Hausdorff-Gauss surface measure and integration by parts on
//! convex sets, in whitened coordinates of a finite-dimensional Gaussian space.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

pub mod convex_body;
pub mod error;
pub mod estimate;
pub mod gaussian_space;
pub mod graph;
pub mod ibp;
pub mod linalg;
pub mod par;
pub mod quadrature;
pub mod surface;

pub use convex_body::{BodySpec, ConvexBody, OuterBound};
pub use error::{Error, Result};
pub use estimate::{EstimateWithError, Method};
pub use gaussian_space::{Direction, GaussianModel, TestFunction};
pub use ibp::{verify_ibp, IbpConfig, VerificationReport, Verdict};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
