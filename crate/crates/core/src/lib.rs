//! Enclosure-method localization of surface quench sources from
//! second-sound wave data recorded on spherical detectors.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the scenario and pipeline layers use.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > y)` deliberately rejects NaN
#![allow(clippy::excessive_precision)] // quadrature tables keep their published digits

pub mod asymptotics;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod indicator;
pub mod inversion;
pub mod oracle;
pub mod pipeline;
pub mod potentials;
pub mod quadrature;
pub mod real;
pub mod scenario;

pub use error::{Error, Result};
pub use real::Real;

pub type Point = geometry::Point3<f64>;
pub type Vector = geometry::Vec3<f64>;
pub type Patch = geometry::ParamPatch<f64>;
pub type Ball = geometry::DetectorBall<f64>;
pub type Mesh = geometry::TriMesh<f64>;
pub type Potential = potentials::BallPotential<f64>;
pub type Density = forward::SourceDensity<f64>;
pub type Record = forward::MeasurementRecord<f64>;
pub type Curve = indicator::IndicatorCurve<f64>;
pub type Fit = inversion::DistanceFit<f64>;
pub type Laplace = asymptotics::LaplaceProblem<f64>;
