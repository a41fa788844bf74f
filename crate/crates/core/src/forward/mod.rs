//! Synthetic second-sound data: a retarded single-layer field emitted from
//! the quench patch, sampled as `u` and `∂_ν u` on the detector sphere, and
//! directly prescribed boundary profiles on the patch.

mod boundary;
mod profile;
mod record;

pub use boundary::{boundary_profiles, BoundaryData, SampledBoundary};
pub use profile::{BoundaryProfile, SpatialProfile, TemporalProfile};
pub use record::{synth_measurement, MeasurementRecord, RecordMeta};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{DetectorBall, ParamPatch, Point3, UnitVec3, Vec3};
use crate::quadrature::GaussLegendre;
use crate::real::Real;

/// Default `n_θ` of the detector-sphere grid.
pub const DEFAULT_SPHERE_ORDER: usize = 24;
/// Default tensor resolution of the patch grid.
pub const DEFAULT_PATCH_GRID: (usize, usize) = (32, 32);

/// Uniform time grid `t_k = kΔt`, `k = 0..=steps`, ending at `T₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub dt: T,
    pub steps: usize,
}

impl<T: Real> TimeGrid<T> {
    /// Grid ending exactly at `t0` with step as close to `dt` as possible.
    pub fn new(dt: T, t0: T) -> Result<Self> {
        if !(dt > T::zero() && t0 > T::zero() && dt.is_finite() && t0.is_finite()) {
            return Err(Error::invalid(format!("time grid needs dt > 0 and T0 > 0, got dt={dt}, T0={t0}")));
        }
        let steps = (t0 / dt).round().to_usize().unwrap_or(0).max(1);
        Ok(TimeGrid {
            dt: t0 / T::from_count(steps),
            steps,
        })
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_count(k)
    }

    #[inline]
    pub fn t0(&self) -> T {
        self.time(self.steps)
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Quench emission `a(s,t) q(t)` on a patch, with the data floor `μ`.
#[derive(Clone, Debug)]
pub struct SourceDensity<T> {
    patch: ParamPatch<T>,
    spatial: SpatialProfile<T>,
    temporal: TemporalProfile<T>,
    floor: T,
}

impl<T: Real> SourceDensity<T> {
    /// Checks `a ≥ μ > 0` on a uniform sampling of the parameter rectangle.
    pub fn new(patch: ParamPatch<T>, spatial: SpatialProfile<T>, temporal: TemporalProfile<T>, floor: T) -> Result<Self> {
        if !(floor > T::zero()) {
            return Err(Error::invalid(format!("density floor must be positive, got {floor}")));
        }
        if matches!(temporal, TemporalProfile::Zero) {
            return Err(Error::invalid("a zero temporal profile needs SourceDensity::zero"));
        }
        for (s, t) in patch.uniform_samples(17, 17) {
            let a = spatial.value(s, t);
            if !(a >= floor) {
                return Err(Error::invalid(format!(
                    "spatial profile {a} at ({s}, {t}) is below the floor {floor}"
                )));
            }
        }
        Ok(SourceDensity {
            patch,
            spatial,
            temporal,
            floor,
        })
    }

    /// Density that emits nothing (the floor is waived).
    pub fn zero(patch: ParamPatch<T>) -> Self {
        SourceDensity {
            patch,
            spatial: SpatialProfile::Constant(T::zero()),
            temporal: TemporalProfile::Zero,
            floor: T::zero(),
        }
    }

    pub fn patch(&self) -> &ParamPatch<T> {
        &self.patch
    }

    pub fn spatial(&self) -> &SpatialProfile<T> {
        &self.spatial
    }

    pub fn temporal(&self) -> &TemporalProfile<T> {
        &self.temporal
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    /// Quadrature nodes `(y_j, w_j a_j / 4π)` on an `ns × nt` patch grid.
    pub fn discretize(&self, ns: usize, nt: usize) -> SourceField<T> {
        let grid = self.patch.grid(ns, nt);
        let four_pi = T::lit(4.0) * T::PI();
        let mut nodes: Vec<SourceNode<T>> = grid
            .nodes
            .iter()
            .map(|n| SourceNode {
                point: n.point,
                coef: n.weight * self.spatial.value(n.s, n.t) / four_pi,
            })
            .collect();
        if self.patch.is_point() {
            // a point source carries unit strength
            nodes[0].coef = self.spatial.value(T::zero(), T::zero()) / four_pi;
        }
        SourceField {
            nodes,
            spacing: grid.spacing,
            temporal: self.temporal,
        }
    }
}

/// One emitting node: position and `w a / 4π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceNode<T> {
    pub point: Point3<T>,
    pub coef: T,
}

/// Discretized single-layer source.
#[derive(Clone, Debug)]
pub struct SourceField<T> {
    pub nodes: Vec<SourceNode<T>>,
    /// Node spacing of the underlying patch grid (zero for point sources).
    pub spacing: T,
    pub temporal: TemporalProfile<T>,
}

/// `u`, `∇u` and `∂_t u` at one point and time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub u: T,
    pub grad: Vec3<T>,
    pub dt: T,
}

impl<T: Real> SourceField<T> {
    pub fn from_nodes(nodes: Vec<SourceNode<T>>, spacing: T, temporal: TemporalProfile<T>) -> Self {
        SourceField {
            nodes,
            spacing,
            temporal,
        }
    }

    /// Smallest distance from `x` to a source node.
    pub fn min_distance(&self, x: Point3<T>) -> T {
        self.nodes
            .iter()
            .map(|n| n.point.distance(x))
            .fold(T::infinity(), T::min)
    }

    fn check_evaluation_point(&self, x: Point3<T>) -> Result<()> {
        let d = self.min_distance(x);
        let limit = T::lit(3.0) * self.spacing;
        if !(d > limit) || d == T::zero() {
            return Err(Error::NearSingular {
                distance: d.to_f64_lossy(),
                spacing: self.spacing.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Retarded single-layer field `u(t,x) = Σ_j w_j a_j q(t − ρ_j)/(4πρ_j)` with
/// its gradient and time derivative.
pub fn single_layer_field<T: Real>(field: &SourceField<T>, x: Point3<T>, t: T) -> Result<FieldSample<T>> {
    field.check_evaluation_point(x)?;
    let mut u = T::zero();
    let mut grad = Vec3::zero();
    let mut dt = T::zero();
    for n in &field.nodes {
        let d = x - n.point;
        let rho = d.norm();
        let retarded = t - rho;
        if retarded <= T::zero() {
            continue;
        }
        let q = field.temporal.value(retarded);
        let qd = field.temporal.derivative(retarded);
        u = u + n.coef * q / rho;
        dt = dt + n.coef * qd / rho;
        let radial = -n.coef * (qd / rho + q / (rho * rho));
        grad += d * (radial / rho);
    }
    Ok(FieldSample { u, grad, dt })
}

/// Node on the detector sphere `∂B` with outward normal `(x − p)/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceNode<T> {
    pub point: Point3<T>,
    pub normal: Vec3<T>,
    pub weight: T,
}

/// Product rule on `∂B`: Gauss–Legendre in `cos θ` (`n_θ` nodes) times the
/// uniform rule in azimuth (`2n_θ` nodes), with the pole along `+z`.
pub fn sphere_grid<T: Real>(ball: &DetectorBall<T>, n_theta: usize) -> Result<Vec<SurfaceNode<T>>> {
    sphere_grid_oriented(ball, n_theta, 2 * n_theta, Vec3::new(T::zero(), T::zero(), T::one()))
}

/// Product rule on `∂B` whose pole points along `axis`. Gauss–Legendre
/// nodes in `cos θ` cluster at the poles, so aiming the pole at the source
/// resolves the peak of the Laplace-weighted integrand.
pub fn sphere_grid_oriented<T: Real>(
    ball: &DetectorBall<T>,
    n_theta: usize,
    n_phi: usize,
    axis: Vec3<T>,
) -> Result<Vec<SurfaceNode<T>>> {
    if n_theta == 0 || n_phi == 0 {
        return Err(Error::invalid("sphere grid order must be positive"));
    }
    let pole = UnitVec3::new_normalize(axis).ok_or_else(|| Error::invalid("sphere grid axis must be nonzero"))?;
    let (e1, e2) = pole.tangent_frame();
    let gl = GaussLegendre::<T>::new(n_theta);
    let r = ball.radius();
    let dphi = T::TAU() / T::from_count(n_phi);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in gl.mapped(-T::one(), T::one()) {
        let sin = (T::one() - c * c).max(T::zero()).sqrt();
        for j in 0..n_phi {
            let phi = dphi * (T::from_count(j) + T::lit(0.5));
            let normal = e1 * (sin * phi.cos()) + e2 * (sin * phi.sin()) + *pole * c;
            nodes.push(SurfaceNode {
                point: ball.center() + normal * r,
                normal,
                weight: w * dphi * r * r,
            });
        }
    }
    Ok(nodes)
}

/// Time rows of `u` and `∂_ν u`, one per node.
type Rows<T> = Vec<Vec<T>>;

/// Evaluates `u` and `∂_ν u` at `nodes` on the time grid, one row per node.
/// Nodes run in parallel; each row is summed in fixed source order.
pub(crate) fn sample_rows<T: Real>(
    field: &SourceField<T>,
    nodes: &[SurfaceNode<T>],
    times: TimeGrid<T>,
) -> Result<(Rows<T>, Rows<T>)> {
    for n in nodes {
        field.check_evaluation_point(n.point)?;
    }
    let rows: Vec<(Vec<T>, Vec<T>)> = nodes
        .par_iter()
        .map(|node| {
            let mut u = vec![T::zero(); times.len()];
            let mut dnu = vec![T::zero(); times.len()];
            let settle = field.temporal.settles_at();
            for src in &field.nodes {
                let d = node.point - src.point;
                let rho = d.norm();
                let cos = node.normal.dot(d) / rho;
                let first = (rho / times.dt).floor().to_usize().unwrap_or(usize::MAX).saturating_add(1);
                if first > times.steps {
                    continue;
                }
                let inv = T::one() / rho;
                for k in first..=times.steps {
                    let retarded = times.time(k) - rho;
                    if retarded <= T::zero() {
                        continue;
                    }
                    let (q, qd) = match settle {
                        Some(ts) if retarded >= ts => (field.temporal.value(retarded), T::zero()),
                        _ => (field.temporal.value(retarded), field.temporal.derivative(retarded)),
                    };
                    u[k] = u[k] + src.coef * q * inv;
                    dnu[k] = dnu[k] - src.coef * (qd * inv + q * inv * inv) * cos;
                }
            }
            (u, dnu)
        })
        .collect();
    Ok(rows.into_iter().unzip())
}
