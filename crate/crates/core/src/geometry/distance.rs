//! Patch–ball distances, minimum classification, visibility partition and
//! the `α`, `β` bounds on `ν(x)·(y − x)`.

use crate::error::{Error, Result};
use crate::geometry::patch::{ParamPatch, ParamRect};
use crate::geometry::vector::{Point3, Vec3};
use crate::geometry::DetectorBall;
use crate::quadrature::GaussLegendre;
use crate::real::Real;

/// Additive margin that turns the sampled bounds into strict inequalities.
pub const ALPHA_BETA_MARGIN: f64 = 1e-6;

const GRADIENT_ZERO: f64 = 1e-7;
const HESSIAN_RELATIVE: f64 = 1e-6;

/// Result of [`set_distance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetDistance<T> {
    /// `d_e(Γ, B) = min |φ(s,t) − p| − r`.
    pub distance: T,
    pub argmin: (T, T),
    pub point: Point3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinimumKind {
    InteriorNondegenerate,
    BoundaryNoncritical,
    Degenerate,
}

/// Power of `τ` in the lower bound `τ^δ e^{τd} ∫_Γ v dS > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayExponent {
    /// `δ = 3`, nondegenerate minimum.
    Three,
    /// `δ = 7/2`, minimum on the boundary with nonzero gradient.
    SevenHalves,
    Unknown,
}

impl DecayExponent {
    pub fn value(self) -> Option<f64> {
        match self {
            DecayExponent::Three => Some(3.0),
            DecayExponent::SevenHalves => Some(3.5),
            DecayExponent::Unknown => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinClassification<T> {
    pub location: (T, T),
    pub kind: MinimumKind,
    /// `min h = min |φ − p|`.
    pub h_min: T,
    pub delta: DecayExponent,
    pub gradient_norm: T,
    /// Smallest eigenvalue of the Hessian of `h` at the minimizer.
    pub hessian_min_eigenvalue: T,
}

/// `h`, `∇h` and the Hessian of `h(s,t) = |φ(s,t) − p|`.
struct Local<T> {
    h: T,
    grad: [T; 2],
    hess: [[T; 2]; 2],
}

fn local_model<T: Real>(patch: &ParamPatch<T>, p: Point3<T>, s: T, t: T, with_hessian: bool) -> Local<T> {
    let r = patch.point(s, t) - p;
    let h = r.norm();
    let (ps, pt) = patch.tangents(s, t);
    let grad = [r.dot(ps) / h, r.dot(pt) / h];
    let mut hess = [[T::zero(); 2]; 2];
    if with_hessian {
        let (pss, pst, ptt) = patch.second_derivatives(s, t);
        hess[0][0] = (ps.dot(ps) + r.dot(pss) - h * grad[0] * grad[0]) / h;
        hess[0][1] = (ps.dot(pt) + r.dot(pst) - h * grad[0] * grad[1]) / h;
        hess[1][1] = (pt.dot(pt) + r.dot(ptt) - h * grad[1] * grad[1]) / h;
        hess[1][0] = hess[0][1];
    }
    Local { h, grad, hess }
}

fn sym_eigenvalues<T: Real>(m: [[T; 2]; 2]) -> (T, T) {
    let half = T::lit(0.5);
    let mean = (m[0][0] + m[1][1]) * half;
    let diff = (m[0][0] - m[1][1]) * half;
    let rad = diff.hypot(m[0][1]);
    (mean - rad, mean + rad)
}

fn on_edges<T: Real>(dom: &ParamRect<T>, s: T, t: T) -> (bool, bool) {
    let tol = T::lit(1e-9) * dom.scale().max(T::min_positive_value());
    let on_s = (s - dom.s.0).abs() <= tol || (dom.s.1 - s).abs() <= tol;
    let on_t = (t - dom.t.0).abs() <= tol || (dom.t.1 - t).abs() <= tol;
    (on_s, on_t)
}

/// Projected damped Newton on `h` over the closed parameter rectangle.
fn refine_minimum<T: Real>(patch: &ParamPatch<T>, p: Point3<T>, start: (T, T)) -> (T, T, T) {
    let dom = patch.domain();
    let scale = dom.scale();
    let (mut s, mut t) = start;
    let mut cur = local_model(patch, p, s, t, true);
    for _ in 0..200 {
        let lo = [dom.s.0, dom.t.0];
        let hi = [dom.s.1, dom.t.1];
        let x = [s, t];
        let tol = T::lit(1e-12) * scale;
        // active bounds: at an edge with the gradient pushing outward
        let mut free = [true, true];
        for k in 0..2 {
            if (x[k] - lo[k] <= tol && cur.grad[k] > T::zero()) || (hi[k] - x[k] <= tol && cur.grad[k] < T::zero()) {
                free[k] = false;
            }
        }
        let mut step = [T::zero(); 2];
        match (free[0], free[1]) {
            (true, true) => {
                let (l0, _) = sym_eigenvalues(cur.hess);
                let det = cur.hess[0][0] * cur.hess[1][1] - cur.hess[0][1] * cur.hess[1][0];
                if l0 > T::zero() && det > T::zero() {
                    step[0] = -(cur.hess[1][1] * cur.grad[0] - cur.hess[0][1] * cur.grad[1]) / det;
                    step[1] = -(cur.hess[0][0] * cur.grad[1] - cur.hess[1][0] * cur.grad[0]) / det;
                } else {
                    step = [-cur.grad[0] * scale, -cur.grad[1] * scale];
                }
            }
            (true, false) | (false, true) => {
                let k = if free[0] { 0 } else { 1 };
                if cur.hess[k][k] > T::zero() {
                    step[k] = -cur.grad[k] / cur.hess[k][k];
                } else {
                    step[k] = -cur.grad[k] * scale;
                }
            }
            (false, false) => break,
        }
        let step_norm = step[0].hypot(step[1]);
        if !(step_norm > T::lit(1e-15) * scale) {
            break;
        }
        // backtracking with projection
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let (ns, nt) = dom.clamp(s + lambda * step[0], t + lambda * step[1]);
            let h_new = (patch.point(ns, nt) - p).norm();
            if h_new < cur.h {
                s = ns;
                t = nt;
                cur = local_model(patch, p, s, t, true);
                accepted = true;
                break;
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    (s, t, cur.h)
}

/// Euclidean distance between a patch and a detector ball.
///
/// A coarse uniform scan over `grid` samples of the closed parameter
/// rectangle seeds a projected Newton refinement of `h = |φ − p|`.
pub fn set_distance<T: Real>(patch: &ParamPatch<T>, ball: &DetectorBall<T>, grid: (usize, usize)) -> Result<SetDistance<T>> {
    if grid.0 == 0 || grid.1 == 0 {
        return Err(Error::invalid("distance scan grid must be nonempty"));
    }
    let p = ball.center();
    let samples = patch.uniform_samples(grid.0, grid.1);
    let (mut best, mut best_h) = (samples[0], T::infinity());
    for &(s, t) in &samples {
        let h = (patch.point(s, t) - p).norm();
        if h < best_h {
            best_h = h;
            best = (s, t);
        }
    }
    let (s, t, h) = if patch.is_point() || (grid.0 == 1 && grid.1 == 1) {
        (best.0, best.1, best_h)
    } else {
        let (s, t, h) = refine_minimum(patch, p, best);
        if h <= best_h {
            (s, t, h)
        } else {
            (best.0, best.1, best_h)
        }
    };
    let distance = h - ball.radius();
    if !(distance > T::zero()) {
        return Err(Error::BallIntersectsPatch {
            clearance: distance.to_f64_lossy(),
        });
    }
    Ok(SetDistance {
        distance,
        argmin: (s, t),
        point: patch.point(s, t),
    })
}

/// Classifies the minimizer of `h` returned by [`set_distance`].
pub fn classify_minimum<T: Real>(patch: &ParamPatch<T>, ball: &DetectorBall<T>, argmin: (T, T)) -> MinClassification<T> {
    let dom = patch.domain();
    let (s, t) = argmin;
    let local = local_model(patch, ball.center(), s, t, true);
    let gnorm = local.grad[0].hypot(local.grad[1]);
    let (lmin, _) = sym_eigenvalues(local.hess);
    let (ps, pt) = patch.tangents(s, t);
    let curvature_scale = (ps.dot(ps) + pt.dot(pt)) / (T::lit(2.0) * local.h);
    let nondegenerate = lmin > T::lit(HESSIAN_RELATIVE) * curvature_scale;
    let critical = gnorm < T::lit(GRADIENT_ZERO);
    let (on_s, on_t) = on_edges(&dom, s, t);

    let (kind, delta) = if patch.is_point() {
        (MinimumKind::Degenerate, DecayExponent::Unknown)
    } else if !on_s && !on_t {
        if critical && nondegenerate {
            (MinimumKind::InteriorNondegenerate, DecayExponent::Three)
        } else {
            (MinimumKind::Degenerate, DecayExponent::Unknown)
        }
    } else if on_s ^ on_t && !critical {
        // the derivative along the edge must vanish at a minimum on a smooth edge
        let along = if on_s { local.grad[1] } else { local.grad[0] };
        if along.abs() < T::lit(GRADIENT_ZERO).max(T::lit(1e-6) * gnorm) {
            (MinimumKind::BoundaryNoncritical, DecayExponent::SevenHalves)
        } else {
            (MinimumKind::Degenerate, DecayExponent::Unknown)
        }
    } else {
        (MinimumKind::Degenerate, DecayExponent::Unknown)
    };
    MinClassification {
        location: argmin,
        kind,
        h_min: local.h,
        delta,
        gradient_norm: gnorm,
        hessian_min_eigenvalue: lmin,
    }
}

/// Areas of the visibility partition of `Γ` with respect to `B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Visibility<T> {
    /// `m(Γ₀(ε))`.
    pub gamma0_eps_area: T,
    /// `m(Γ₀(0))`.
    pub gamma0_area: T,
    /// `m(Γ₁)`, `Γ₁ = Γ ∖ Γ₀(0)`.
    pub gamma1_area: T,
    /// `m(Γ₀(0)) / m(Γ)`.
    pub visible_fraction: T,
    /// `min_{x∈Γ₁} d_e(x,B) − d_e(Γ,B)` over the grid nodes; `None` when
    /// `Γ₁` has no nodes.
    pub gamma1_margin: Option<T>,
}

/// Per-cell visible and hidden areas, accumulated with 3×3 Gauss–Legendre
/// nodes; cells whose samples disagree in sign are split in four so the
/// discontinuous indicator is resolved along the visibility boundary.
struct VisibilityCells<'a, T: Real> {
    patch: &'a ParamPatch<T>,
    ball: &'a DetectorBall<T>,
    eps: T,
    rule: GaussLegendre<T>,
    eps_w: Vec<T>,
    vis_w: Vec<T>,
    hid_w: Vec<T>,
    hidden_min: Option<T>,
}

const VISIBILITY_MAX_DEPTH: usize = 6;

impl<T: Real> VisibilityCells<'_, T> {
    fn margin(&self, s: T, t: T) -> T {
        let x = self.patch.point(s, t);
        normal_near(self.patch, s, t).dot(self.ball.center() - x) - self.ball.radius()
    }

    fn cell(&mut self, s: (T, T), t: (T, T), depth: usize) {
        let nodes: Vec<(T, T, T)> = self
            .rule
            .mapped(s.0, s.1)
            .flat_map(|(x, wx)| self.rule.mapped(t.0, t.1).map(move |(y, wy)| (x, y, wx * wy)).collect::<Vec<_>>())
            .collect();
        if depth < VISIBILITY_MAX_DEPTH {
            let probes = nodes
                .iter()
                .map(|&(x, y, _)| (x, y))
                .chain([(s.0, t.0), (s.0, t.1), (s.1, t.0), (s.1, t.1)]);
            let mut seen = [false; 3];
            for (x, y) in probes {
                let m = self.margin(x, y);
                seen[0] |= m > self.eps;
                seen[1] |= m > T::zero() && m <= self.eps;
                seen[2] |= m <= T::zero();
            }
            if seen.iter().filter(|&&b| b).count() > 1 {
                let half = T::lit(0.5);
                let (sm, tm) = ((s.0 + s.1) * half, (t.0 + t.1) * half);
                for (ss, tt) in [((s.0, sm), (t.0, tm)), ((s.0, sm), (tm, t.1)), ((sm, s.1), (t.0, tm)), ((sm, s.1), (tm, t.1))] {
                    self.cell(ss, tt, depth + 1);
                }
                return;
            }
        }
        for (x, y, w) in nodes {
            let w = w * self.patch.jacobian(x, y);
            let m = self.margin(x, y);
            if m > self.eps {
                self.eps_w.push(w);
            }
            if m > T::zero() {
                self.vis_w.push(w);
            } else {
                self.hid_w.push(w);
                let d = self.ball.distance_to(self.patch.point(x, y));
                self.hidden_min = Some(self.hidden_min.map_or(d, |h| h.min(d)));
            }
        }
    }
}

/// Partition by the sign of `min_{y∈B} ν(x)·(y − x) = ν(x)·(p − x) − r`.
///
/// `grid` sets the number of base cells; cells cut by the visibility
/// boundary are refined adaptively.
pub fn visibility_partition<T: Real>(
    patch: &ParamPatch<T>,
    ball: &DetectorBall<T>,
    eps: T,
    grid: (usize, usize),
) -> Result<Visibility<T>> {
    if !(eps >= T::zero()) {
        return Err(Error::invalid(format!("visibility threshold must be nonnegative, got {eps}")));
    }
    let mut cells = VisibilityCells {
        patch,
        ball,
        eps,
        rule: GaussLegendre::new(3),
        eps_w: Vec::new(),
        vis_w: Vec::new(),
        hid_w: Vec::new(),
        hidden_min: None,
    };
    if patch.is_point() {
        let m = cells.margin(T::zero(), T::zero());
        if m <= T::zero() {
            cells.hidden_min = Some(ball.distance_to(patch.point(T::zero(), T::zero())));
        }
    } else {
        let dom = patch.domain();
        let (ns, nt) = (grid.0.max(1), grid.1.max(1));
        for i in 0..ns {
            for j in 0..nt {
                let s0 = dom.s.0 + dom.width() * T::from_count(i) / T::from_count(ns);
                let s1 = dom.s.0 + dom.width() * T::from_count(i + 1) / T::from_count(ns);
                let t0 = dom.t.0 + dom.height() * T::from_count(j) / T::from_count(nt);
                let t1 = dom.t.0 + dom.height() * T::from_count(j + 1) / T::from_count(nt);
                cells.cell((s0, s1), (t0, t1), 0);
            }
        }
    }
    let sum = crate::real::pairwise_sum::<T>;
    let gamma0_area = sum(&cells.vis_w);
    let gamma1_area = sum(&cells.hid_w);
    let total = gamma0_area + gamma1_area;
    let gamma1_margin = match cells.hidden_min {
        Some(h) => {
            let d = set_distance(patch, ball, (grid.0.max(2), grid.1.max(2)))?.distance;
            Some(h - d)
        }
        None => None,
    };
    Ok(Visibility {
        gamma0_eps_area: sum(&cells.eps_w),
        gamma0_area,
        gamma1_area,
        visible_fraction: if total > T::zero() { gamma0_area / total } else { T::zero() },
        gamma1_margin,
    })
}

/// Bounds with `−α < ν(x)·(y − x) < β` for all `x ∈ Γ`, `y ∈ B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaBeta<T> {
    pub alpha: T,
    pub beta: T,
    /// `min_x ν(x)·(p − x) − r`.
    pub min_projection: T,
    /// `max_x ν(x)·(p − x) + r`.
    pub max_projection: T,
}

impl<T: Real> AlphaBeta<T> {
    /// `α ∨ β`.
    pub fn max(&self) -> T {
        self.alpha.max(self.beta)
    }
}

/// Unit normal at `(s, t)`, or just inside the domain where the
/// parametrization degenerates (a pole of a spherical cap).
fn normal_near<T: Real>(patch: &ParamPatch<T>, s: T, t: T) -> Vec3<T> {
    if let Some(n) = patch.normal(s, t) {
        return n.into_inner();
    }
    let dom = patch.domain();
    let half = T::lit(0.5);
    let (cs, ct) = ((dom.s.0 + dom.s.1) * half, (dom.t.0 + dom.t.1) * half);
    let mut lambda = T::lit(1e-9);
    while lambda < T::one() {
        if let Some(n) = patch.normal(s + (cs - s) * lambda, t + (ct - t) * lambda) {
            return n.into_inner();
        }
        lambda = lambda * T::lit(10.0);
    }
    Vec3::zero()
}

/// Compass search for an extremum of `f` on the closed rectangle.
fn polish_extremum<T: Real>(f: impl Fn(T, T) -> T, dom: &ParamRect<T>, start: (T, T), sign: T) -> T {
    let (mut s, mut t) = start;
    let mut best = sign * f(s, t);
    let mut step = dom.scale() / T::lit(16.0);
    let floor = T::lit(1e-13) * dom.scale();
    while step > floor {
        let mut moved = false;
        for (ds, dt) in [(step, T::zero()), (-step, T::zero()), (T::zero(), step), (T::zero(), -step)] {
            let (ns, nt) = dom.clamp(s + ds, t + dt);
            let v = sign * f(ns, nt);
            if v > best {
                best = v;
                s = ns;
                t = nt;
                moved = true;
            }
        }
        if !moved {
            step = step * T::lit(0.5);
        }
    }
    sign * best
}

pub fn alpha_beta<T: Real>(patch: &ParamPatch<T>, ball: &DetectorBall<T>, grid: (usize, usize)) -> AlphaBeta<T> {
    let p = ball.center();
    let r = ball.radius();
    let dom = patch.domain();
    let proj = |s: T, t: T| -> T {
        let n = normal_near(patch, s, t);
        n.dot(p - patch.point(s, t))
    };
    let samples = patch.uniform_samples(grid.0.max(1), grid.1.max(1));
    let (mut lo, mut hi) = ((T::infinity(), samples[0]), (T::neg_infinity(), samples[0]));
    for &(s, t) in &samples {
        let v = proj(s, t);
        if v < lo.0 {
            lo = (v, (s, t));
        }
        if v > hi.0 {
            hi = (v, (s, t));
        }
    }
    let (min_c, max_c) = if patch.is_point() {
        (lo.0, hi.0)
    } else {
        (
            polish_extremum(proj, &dom, lo.1, -T::one()).min(lo.0),
            polish_extremum(proj, &dom, hi.1, T::one()).max(hi.0),
        )
    };
    let margin = T::lit(ALPHA_BETA_MARGIN);
    let min_projection = min_c - r;
    let max_projection = max_c + r;
    AlphaBeta {
        alpha: (-min_projection).max(T::zero()) + margin,
        beta: max_projection.max(T::zero()) + margin,
        min_projection,
        max_projection,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z() -> Vec3<f64> {
        Vec3::new(0.0, 0.0, 1.0)
    }

    fn unit_disk() -> ParamPatch<f64> {
        ParamPatch::disk(Vec3::zero(), z(), 1.0).unwrap()
    }

    fn ball(c: [f64; 3], r: f64) -> DetectorBall<f64> {
        DetectorBall::new(Vec3::from_f64(c), r).unwrap()
    }

    /// Brute-force minimum over a dense polar sampling of the unit disk.
    fn brute_force_disk(p: Vec3<f64>, r: f64, n: usize) -> (f64, Vec3<f64>) {
        let mut best = (f64::INFINITY, Vec3::zero());
        for i in 0..=n {
            let rho = i as f64 / n as f64;
            for j in 0..n {
                let th = std::f64::consts::TAU * j as f64 / n as f64;
                let x = Vec3::new(rho * th.cos(), rho * th.sin(), 0.0);
                let d = x.distance(p) - r;
                if d < best.0 {
                    best = (d, x);
                }
            }
        }
        best
    }

    #[test]
    fn disk_directly_below_ball() {
        let d = set_distance(&unit_disk(), &ball([0.0, 0.0, 3.0], 1.0), (9, 9)).unwrap();
        assert!((d.distance - 2.0).abs() < 1e-12);
        assert!(d.point.norm() < 1e-8);
        // the polar parametrization gives the same distance
        let dp = ParamPatch::disk_polar(Vec3::zero(), z(), 1.0).unwrap();
        let d = set_distance(&dp, &ball([0.0, 0.0, 3.0], 1.0), (9, 9)).unwrap();
        assert!((d.distance - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disk_with_offset_ball() {
        let b = ball([2.0, 0.0, 3.0], 1.0);
        let d = set_distance(&unit_disk(), &b, (16, 16)).unwrap();
        // brute force over 10^6 samples
        let (bf, at) = brute_force_disk(b.center(), 1.0, 1000);
        assert!((at - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-9);
        let expected = 10f64.sqrt() - 1.0;
        assert!((bf - expected).abs() < 1e-10);
        assert!((d.distance - expected).abs() < 1e-8, "{}", d.distance);
        assert!((d.point - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn single_point_patch() {
        let p = ParamPatch::point_patch(Vec3::zero(), z()).unwrap();
        let d = set_distance(&p, &ball([0.0, 0.0, 5.0], 0.5), (1, 1)).unwrap();
        assert_eq!(d.distance, 4.5);
    }

    #[test]
    fn intersecting_ball_is_rejected() {
        let r = set_distance(&unit_disk(), &ball([0.0, 0.0, 0.5], 1.0), (8, 8));
        assert!(matches!(r, Err(Error::BallIntersectsPatch { .. })));
    }

    #[test]
    fn classify_disk_interior() {
        let b = ball([0.0, 0.0, 3.0], 1.0);
        let d = set_distance(&unit_disk(), &b, (9, 9)).unwrap();
        let c = classify_minimum(&unit_disk(), &b, d.argmin);
        assert_eq!(c.kind, MinimumKind::InteriorNondegenerate);
        assert_eq!(c.delta.value(), Some(3.0));
        assert!(c.h_min > b.radius());
    }

    #[test]
    fn classify_half_disk_edge() {
        let seg = ParamPatch::disk_segment(Vec3::zero(), z(), 1.0, 0.5).unwrap();
        let b = ball([0.0, 0.0, 3.0], 1.0);
        let d = set_distance(&seg, &b, (12, 12)).unwrap();
        assert!((d.point - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-8);
        // brute force: the minimizer sits on the chord x = 0.5 and the
        // in-plane gradient of h there is (0.5/h, 0), nonzero
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=400 {
            for j in 0..=400 {
                let x = 0.5 + 0.5 * i as f64 / 400.0;
                let y = -1.0 + 2.0 * j as f64 / 400.0;
                if x * x + y * y <= 1.0 {
                    let h = (x * x + y * y + 9.0).sqrt();
                    if h < best.0 {
                        best = (h, x, y);
                    }
                }
            }
        }
        assert_eq!((best.1, best.2), (0.5, 0.0));
        let c = classify_minimum(&seg, &b, d.argmin);
        assert_eq!(c.kind, MinimumKind::BoundaryNoncritical);
        assert_eq!(c.delta.value(), Some(3.5));
    }

    #[test]
    fn concentric_cap_is_degenerate() {
        let cap = ParamPatch::sphere_patch(Vec3::zero(), 3.0, z(), (0.1, 0.6), (0.0, 2.0)).unwrap();
        let b = ball([0.0, 0.0, 0.0], 1.0);
        let d = set_distance(&cap, &b, (8, 8)).unwrap();
        assert!((d.distance - 2.0).abs() < 1e-12);
        let c = classify_minimum(&cap, &b, d.argmin);
        assert_eq!(c.kind, MinimumKind::Degenerate);
        assert_eq!(c.delta, DecayExponent::Unknown);
    }

    #[test]
    fn visibility_of_disk() {
        let v = visibility_partition(&unit_disk(), &ball([0.0, 0.0, 3.0], 1.0), 0.0, (16, 16)).unwrap();
        assert!((v.gamma0_area - std::f64::consts::PI).abs() < 1e-6);
        assert_eq!(v.gamma1_area, 0.0);
        assert_eq!(v.gamma1_margin, None);
        let v = visibility_partition(&unit_disk(), &ball([3.0, 0.0, 0.0], 1.0), 0.0, (16, 16)).unwrap();
        assert_eq!(v.gamma0_area, 0.0);
        assert!((v.visible_fraction).abs() < 1e-15);
        assert!(v.gamma1_margin.unwrap() >= 0.0);
    }

    #[test]
    fn visibility_of_curved_patch_matches_dense_sampling() {
        let cap = ParamPatch::sphere_patch(Vec3::zero(), 1.0, z(), (0.0, 1.2), (0.0, std::f64::consts::TAU)).unwrap();
        let b = ball([2.5, 0.0, 0.5], 0.3);
        let coarse = visibility_partition(&cap, &b, 0.0, (24, 24)).unwrap();
        assert!(coarse.visible_fraction > 0.05 && coarse.visible_fraction < 0.95, "{coarse:?}");
        // oracle: midpoint sampling at 4x the resolution in each direction
        let n = 96;
        let (hs, ht) = (1.2 / n as f64, std::f64::consts::TAU / n as f64);
        let mut vis = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (s, t) = ((i as f64 + 0.5) * hs, (j as f64 + 0.5) * ht);
                let x = cap.point(s, t);
                let nu = *cap.normal(s, t).unwrap();
                if nu.dot(b.center() - x) - b.radius() > 0.0 {
                    vis += cap.jacobian(s, t) * hs * ht;
                }
            }
        }
        let total = coarse.gamma0_area + coarse.gamma1_area;
        assert!((coarse.gamma0_area - vis).abs() < 0.01 * total, "{} vs {vis}", coarse.gamma0_area);
    }

    #[test]
    fn alpha_beta_for_flat_disk() {
        let ab = alpha_beta(&unit_disk(), &ball([0.0, 0.0, 3.0], 1.0), (9, 9));
        assert!((ab.alpha - ALPHA_BETA_MARGIN).abs() < 1e-15);
        assert!((ab.beta - 4.0 - ALPHA_BETA_MARGIN).abs() < 1e-12);
        let side = alpha_beta(&unit_disk(), &ball([3.0, 0.0, 0.0], 1.0), (9, 9));
        assert!(side.alpha >= 1.0);
    }

    #[test]
    fn alpha_beta_brute_force_on_curved_patch() {
        let cap = ParamPatch::sphere_patch(Vec3::zero(), 1.0, Vec3::new(0.2, 0.1, 1.0), (0.0, 0.9), (0.0, 6.0)).unwrap();
        let b = ball([0.8, 0.4, 2.5], 0.3);
        let ab = alpha_beta(&cap, &b, (16, 16));
        // 10^5 x-samples against the exact extremes over y ∈ B
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..400 {
            for j in 0..250 {
                let s = 0.9 * i as f64 / 399.0;
                let t = 6.0 * j as f64 / 249.0;
                let x = cap.point(s, t);
                let n = *cap.normal(s.max(1e-9), t).unwrap();
                let c = n.dot(b.center() - x);
                lo = lo.min(c - b.radius());
                hi = hi.max(c + b.radius());
            }
        }
        assert!(-ab.alpha < lo && hi < ab.beta);
        assert!((ab.min_projection - lo).abs() < 1e-4 && (ab.max_projection - hi).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn visibility_monotone_in_eps(eps in 0.0..2.0f64, cx in -2.0..2.0f64, cz in 1.5..4.0f64) {
            let b = ball([cx, 0.3, cz], 0.5);
            let v0 = visibility_partition(&unit_disk(), &b, 0.0, (10, 10)).unwrap();
            let v1 = visibility_partition(&unit_disk(), &b, eps, (10, 10)).unwrap();
            prop_assert!(v1.gamma0_eps_area <= v0.gamma0_area + 1e-15);
        }

        #[test]
        fn alpha_beta_bounds_random_pairs(cx in -2.0..2.0f64, cy in -2.0..2.0f64, cz in 1.6..4.0f64, r in 0.1..0.5f64, seed in 0u64..1000) {
            let cap = ParamPatch::sphere_patch(Vec3::zero(), 1.0, Vec3::new(0.0, 0.0, 1.0), (0.0, 0.8), (0.0, 6.2)).unwrap();
            let b = ball([cx, cy, cz], r);
            let ab = alpha_beta(&cap, &b, (12, 12));
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mut next = || { state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (state >> 11) as f64 / (1u64 << 53) as f64 };
            for _ in 0..2000 {
                let (s, t) = (0.8 * next(), 6.2 * next());
                let x = cap.point(s, t);
                let n = *cap.normal(s.max(1e-9), t).unwrap();
                // random point inside the ball
                let y = loop {
                    let q = Vec3::new(2.0 * next() - 1.0, 2.0 * next() - 1.0, 2.0 * next() - 1.0);
                    if q.norm() < 1.0 { break b.center() + q * r; }
                };
                let c = n.dot(y - x);
                prop_assert!(-ab.alpha < c && c < ab.beta);
            }
        }

        #[test]
        fn paraboloid_like_minimum_is_nondegenerate(c in 0.5..10.0f64) {
            // h(s,t) = sqrt(s^2 + t^2 + c^2) for a flat rectangle below the center
            let patch = ParamPatch::rect(Vec3::zero(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), 1.0, 1.0).unwrap();
            let b = ball([0.0, 0.0, c], 0.25);
            let d = set_distance(&patch, &b, (7, 7)).unwrap();
            let k = classify_minimum(&patch, &b, d.argmin);
            prop_assert_eq!(k.kind, MinimumKind::InteriorNondegenerate);
        }

        #[test]
        fn set_distance_matches_brute_force(cx in -2.5..2.5f64, cy in -2.5..2.5f64, cz in 1.2..4.0f64) {
            let b = ball([cx, cy, cz], 0.5);
            let d = set_distance(&unit_disk(), &b, (12, 12)).unwrap();
            // closed form for a disk in the z = 0 plane
            let rho = cx.hypot(cy);
            let lateral = (rho - 1.0).max(0.0);
            let exact = lateral.hypot(cz) - 0.5;
            prop_assert!((d.distance - exact).abs() < 1e-8, "{} vs {}", d.distance, exact);
        }
    }
}
