//! Numerical kernels for derivatives of Blaschke products in weighted
//! Bergman spaces with normal weights.

pub mod analytic;
pub mod blaschke;
pub mod diskgeom;
pub mod duality;
pub mod error;
pub mod estimates;
pub mod interpolation;
pub mod point;
pub mod poly;
pub mod quad;
pub mod report;
pub mod theorems;
pub mod weights;

pub use analytic::Analytic;
pub use blaschke::BlaschkeProduct;
pub use diskgeom::{SeparationReport, SequenceKind, ZeroSequence};
pub use error::{Error, Result};
pub use point::{pseudohyperbolic, DiskPoint};
pub use poly::Polynomial;
pub use report::{RatioReport, Verdict};
pub use quad::{DiskQuadrature, DiskRule, GradedDiskRule, QuadOptions};
pub use weights::{Indices, Weight, WeightFamily};
