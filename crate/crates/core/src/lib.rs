//! Monte-Carlo evidence for measure-expansiveness of dynamical systems.
//!
//! A system `f` on a compact metric space is expansive for a measure `mu`
//! when, for some `delta`, the set of points whose orbit stays within
//! `delta` of the orbit of `x` is `mu`-null for every `x`. The crate
//! estimates the measure of the finite-time versions of those sets and
//! turns the estimates into three-valued verdicts, entropy estimates and
//! a battery of consistency checks.
//!
//! Geometry, systems and measures are generic over the floating point type
//! ([`Scalar`], implemented for `f32` and `f64`); statistics are always
//! `f64`. The aliases below fix the scalar to `f64`.

pub mod battery;
pub mod entropy;
pub mod error;
pub mod expansiveness;
pub mod geometry;
pub mod measures;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod systems;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point64 = geometry::Point<f64>;
pub type Space64 = geometry::SpaceDescriptor<f64>;
pub type Ball64 = geometry::Ball<f64>;
pub type System64 = systems::SystemSpec<f64>;
pub type Measure64 = measures::MeasureSpec<f64>;
pub type Denjoy64 = systems::DenjoyConstruction<f64>;

pub type Point32 = geometry::Point<f32>;
pub type System32 = systems::SystemSpec<f32>;
pub type Measure32 = measures::MeasureSpec<f32>;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
