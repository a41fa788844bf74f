//! Geometry of the quench patch, the detector balls and the cavity mesh.

mod distance;
pub mod mesh;
mod patch;
mod vector;

pub use distance::{
    alpha_beta, classify_minimum, set_distance, visibility_partition, AlphaBeta, DecayExponent, MinClassification,
    MinimumKind, SetDistance, Visibility, ALPHA_BETA_MARGIN,
};
pub use mesh::TriMesh;
pub use patch::{ParamPatch, ParamRect, PatchGrid, PatchNode, PatchShape};
pub use vector::{Point3, UnitVec3, Vec3};

use crate::error::{Error, Result};
use crate::real::Real;

/// Detector modeled as the open ball `B(p, r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorBall<T> {
    center: Point3<T>,
    radius: T,
}

impl<T: Real> DetectorBall<T> {
    pub fn new(center: Point3<T>, radius: T) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid("detector center must be finite"));
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::invalid(format!("detector radius must be positive, got {radius}")));
        }
        Ok(DetectorBall { center, radius })
    }

    #[inline]
    pub fn center(&self) -> Point3<T> {
        self.center
    }

    #[inline]
    pub fn radius(&self) -> T {
        self.radius
    }

    /// Euclidean distance `d_e(x, B) = |x − p| − r` (negative inside).
    #[inline]
    pub fn distance_to(&self, x: Point3<T>) -> T {
        x.distance(self.center) - self.radius
    }

    pub fn with_radius(self, radius: T) -> Result<Self> {
        Self::new(self.center, radius)
    }
}
