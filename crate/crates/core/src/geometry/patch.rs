//! Parametrized quench patches `Γ = φ(R)` over a parameter rectangle.

use crate::error::{Error, Result};
use crate::geometry::vector::{Point3, UnitVec3, Vec3};
use crate::quadrature::GaussLegendre;
use crate::real::Real;

/// Parameter rectangle `[s_a, s_b] × [t_a, t_b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRect<T> {
    pub s: (T, T),
    pub t: (T, T),
}

impl<T: Real> ParamRect<T> {
    pub fn new(s: (T, T), t: (T, T)) -> Self {
        ParamRect { s, t }
    }

    pub fn clamp(&self, s: T, t: T) -> (T, T) {
        (s.max(self.s.0).min(self.s.1), t.max(self.t.0).min(self.t.1))
    }

    pub fn width(&self) -> T {
        self.s.1 - self.s.0
    }

    pub fn height(&self) -> T {
        self.t.1 - self.t.0
    }

    /// Larger side of the rectangle; the reference length for step sizes.
    pub fn scale(&self) -> T {
        self.width().max(self.height())
    }

    pub fn contains(&self, s: T, t: T) -> bool {
        s >= self.s.0 && s <= self.s.1 && t >= self.t.0 && t <= self.t.1
    }
}

/// Analytic patch families.
#[derive(Clone, Debug, PartialEq)]
pub enum PatchShape<T> {
    /// A single point with a prescribed normal. Zero area.
    Point { at: Point3<T>, normal: UnitVec3<T> },
    /// Flat disk, square-to-disk map on `[-1, 1]²`
    /// (`x = s√(1 − t²/2)`, `y = t√(1 − s²/2)`), smooth in the interior.
    Disk {
        center: Point3<T>,
        normal: UnitVec3<T>,
        radius: T,
    },
    /// Flat disk in polar coordinates `(ρ, θ) ∈ [0, R] × [0, 2π]`.
    DiskPolar {
        center: Point3<T>,
        normal: UnitVec3<T>,
        radius: T,
    },
    /// The part `x ≥ cut` of a flat disk, in the disk's tangent frame.
    /// `t ∈ [-1, 1]` sweeps the arc angle, `s ∈ [0, 1]` runs from the chord
    /// to the arc.
    DiskSegment {
        center: Point3<T>,
        normal: UnitVec3<T>,
        radius: T,
        cut: T,
    },
    /// Planar rectangle `c + s·u + t·v`, `|s| ≤ half_u`, `|t| ≤ half_v`.
    Rect {
        center: Point3<T>,
        u_axis: UnitVec3<T>,
        v_axis: UnitVec3<T>,
        half_u: T,
        half_v: T,
    },
    /// Patch of a sphere in polar/azimuth coordinates about `pole`.
    /// The natural normal points away from the sphere center.
    SpherePatch {
        center: Point3<T>,
        radius: T,
        pole: UnitVec3<T>,
        polar: (T, T),
        azimuth: (T, T),
    },
    /// Catmull–Rom interpolated grid of points over `[0, 1]²`;
    /// `points[i][j]` sits at `(i/(ns−1), j/(nt−1))`.
    Tabulated { points: Vec<Vec<Point3<T>>> },
}

/// Oriented parametrized surface patch.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPatch<T> {
    shape: PatchShape<T>,
    flip_normal: bool,
}

/// One node of a tensor Gauss–Legendre grid on a patch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchNode<T> {
    pub s: T,
    pub t: T,
    pub point: Point3<T>,
    pub normal: Vec3<T>,
    /// Surface-area quadrature weight `w_s w_t |φ_s × φ_t|`.
    pub weight: T,
}

/// Quadrature grid on a patch.
#[derive(Clone, Debug)]
pub struct PatchGrid<T> {
    pub nodes: Vec<PatchNode<T>>,
    pub resolution: (usize, usize),
    /// Largest distance between grid-adjacent nodes.
    pub spacing: T,
}

impl<T: Real> PatchGrid<T> {
    pub fn area(&self) -> T {
        let w: Vec<T> = self.nodes.iter().map(|n| n.weight).collect();
        crate::real::pairwise_sum(&w)
    }
}

fn unit<T: Real>(v: Vec3<T>, what: &str) -> Result<UnitVec3<T>> {
    UnitVec3::new_normalize(v).ok_or_else(|| Error::invalid(format!("{what} must be a nonzero finite vector")))
}

fn positive<T: Real>(x: T, what: &str) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(format!("{what} must be positive, got {x}")))
    }
}

impl<T: Real> ParamPatch<T> {
    pub fn new(shape: PatchShape<T>, flip_normal: bool) -> Result<Self> {
        match &shape {
            PatchShape::Point { at, .. } => {
                if !at.is_finite() {
                    return Err(Error::invalid("point patch location must be finite"));
                }
            }
            PatchShape::Disk { radius, .. } | PatchShape::DiskPolar { radius, .. } => {
                positive(*radius, "disk radius")?;
            }
            PatchShape::DiskSegment { radius, cut, .. } => {
                positive(*radius, "disk radius")?;
                if !(cut.abs() < *radius) {
                    return Err(Error::invalid(format!("segment cut {cut} must lie strictly inside the radius {radius}")));
                }
            }
            PatchShape::Rect {
                u_axis,
                v_axis,
                half_u,
                half_v,
                ..
            } => {
                positive(*half_u, "rectangle half width")?;
                positive(*half_v, "rectangle half height")?;
                if u_axis.dot(**v_axis).abs() > T::lit(1e-9) {
                    return Err(Error::invalid("rectangle axes must be orthogonal"));
                }
            }
            PatchShape::SpherePatch {
                radius, polar, azimuth, ..
            } => {
                positive(*radius, "sphere radius")?;
                if !(polar.0 >= T::zero() && polar.0 < polar.1 && polar.1 <= T::PI()) {
                    return Err(Error::invalid("polar range must satisfy 0 <= a < b <= pi"));
                }
                if !(azimuth.0 < azimuth.1 && azimuth.1 - azimuth.0 <= T::TAU()) {
                    return Err(Error::invalid("azimuth range must satisfy a < b <= a + 2 pi"));
                }
            }
            PatchShape::Tabulated { points } => {
                let nt = points.first().map_or(0, |r| r.len());
                if points.len() < 2 || nt < 2 || points.iter().any(|r| r.len() != nt) {
                    return Err(Error::invalid("tabulated patch needs a rectangular grid of at least 2x2 points"));
                }
                if points.iter().flatten().any(|p| !p.is_finite()) {
                    return Err(Error::invalid("tabulated patch has non-finite coordinates"));
                }
            }
        }
        let patch = ParamPatch { shape, flip_normal };
        patch.check_immersion()?;
        Ok(patch)
    }

    pub fn point_patch(at: Point3<T>, normal: Vec3<T>) -> Result<Self> {
        Self::new(
            PatchShape::Point {
                at,
                normal: unit(normal, "point patch normal")?,
            },
            false,
        )
    }

    pub fn disk(center: Point3<T>, normal: Vec3<T>, radius: T) -> Result<Self> {
        Self::new(
            PatchShape::Disk {
                center,
                normal: unit(normal, "disk normal")?,
                radius,
            },
            false,
        )
    }

    pub fn disk_polar(center: Point3<T>, normal: Vec3<T>, radius: T) -> Result<Self> {
        Self::new(
            PatchShape::DiskPolar {
                center,
                normal: unit(normal, "disk normal")?,
                radius,
            },
            false,
        )
    }

    pub fn disk_segment(center: Point3<T>, normal: Vec3<T>, radius: T, cut: T) -> Result<Self> {
        Self::new(
            PatchShape::DiskSegment {
                center,
                normal: unit(normal, "disk normal")?,
                radius,
                cut,
            },
            false,
        )
    }

    pub fn rect(center: Point3<T>, u_axis: Vec3<T>, v_axis: Vec3<T>, half_u: T, half_v: T) -> Result<Self> {
        Self::new(
            PatchShape::Rect {
                center,
                u_axis: unit(u_axis, "rectangle u axis")?,
                v_axis: unit(v_axis, "rectangle v axis")?,
                half_u,
                half_v,
            },
            false,
        )
    }

    pub fn sphere_patch(center: Point3<T>, radius: T, pole: Vec3<T>, polar: (T, T), azimuth: (T, T)) -> Result<Self> {
        Self::new(
            PatchShape::SpherePatch {
                center,
                radius,
                pole: unit(pole, "sphere pole")?,
                polar,
                azimuth,
            },
            false,
        )
    }

    pub fn tabulated(points: Vec<Vec<Point3<T>>>) -> Result<Self> {
        Self::new(PatchShape::Tabulated { points }, false)
    }

    /// Same surface with the opposite normal.
    pub fn flipped(mut self) -> Self {
        self.flip_normal = !self.flip_normal;
        self
    }

    pub fn shape(&self) -> &PatchShape<T> {
        &self.shape
    }

    pub fn is_flipped(&self) -> bool {
        self.flip_normal
    }

    pub fn is_point(&self) -> bool {
        matches!(self.shape, PatchShape::Point { .. })
    }

    pub fn domain(&self) -> ParamRect<T> {
        let one = T::one();
        match &self.shape {
            PatchShape::Point { .. } => ParamRect::new((T::zero(), T::zero()), (T::zero(), T::zero())),
            PatchShape::Disk { .. } => ParamRect::new((-one, one), (-one, one)),
            PatchShape::DiskPolar { radius, .. } => ParamRect::new((T::zero(), *radius), (T::zero(), T::TAU())),
            PatchShape::DiskSegment { .. } => ParamRect::new((T::zero(), one), (-one, one)),
            PatchShape::Rect { half_u, half_v, .. } => ParamRect::new((-*half_u, *half_u), (-*half_v, *half_v)),
            PatchShape::SpherePatch { polar, azimuth, .. } => ParamRect::new(*polar, *azimuth),
            PatchShape::Tabulated { .. } => ParamRect::new((T::zero(), one), (T::zero(), one)),
        }
    }

    /// `φ(s, t)`.
    pub fn point(&self, s: T, t: T) -> Point3<T> {
        let half = T::lit(0.5);
        match &self.shape {
            PatchShape::Point { at, .. } => *at,
            PatchShape::Disk { center, normal, radius } => {
                let (e1, e2) = normal.tangent_frame();
                let x = s * (T::one() - half * t * t).sqrt();
                let y = t * (T::one() - half * s * s).sqrt();
                *center + (e1 * x + e2 * y) * *radius
            }
            PatchShape::DiskPolar { center, normal, .. } => {
                let (e1, e2) = normal.tangent_frame();
                *center + (e1 * t.cos() + e2 * t.sin()) * s
            }
            PatchShape::DiskSegment {
                center,
                normal,
                radius,
                cut,
            } => {
                let (e1, e2) = normal.tangent_frame();
                let alpha = segment_half_angle(*radius, *cut);
                let arc_x = *radius * (alpha * t).cos();
                let x = *cut + s * (arc_x - *cut);
                let y = *radius * (alpha * t).sin();
                *center + e1 * x + e2 * y
            }
            PatchShape::Rect {
                center, u_axis, v_axis, ..
            } => *center + **u_axis * s + **v_axis * t,
            PatchShape::SpherePatch {
                center, radius, pole, ..
            } => {
                let (e1, e2) = pole.tangent_frame();
                let (st, ct) = s.sin_cos();
                let (sp, cp) = t.sin_cos();
                *center + (e1 * (st * cp) + e2 * (st * sp) + **pole * ct) * *radius
            }
            PatchShape::Tabulated { points } => catmull_rom_eval(points, s, t).0,
        }
    }

    /// `(φ_s, φ_t)`.
    pub fn tangents(&self, s: T, t: T) -> (Vec3<T>, Vec3<T>) {
        let half = T::lit(0.5);
        let one = T::one();
        match &self.shape {
            PatchShape::Point { .. } => (Vec3::zero(), Vec3::zero()),
            PatchShape::Disk { normal, radius, .. } => {
                let (e1, e2) = normal.tangent_frame();
                let a = (one - half * t * t).sqrt();
                let b = (one - half * s * s).sqrt();
                let xs = a;
                let xt = -half * s * t / a;
                let ys = -half * s * t / b;
                let yt = b;
                ((e1 * xs + e2 * ys) * *radius, (e1 * xt + e2 * yt) * *radius)
            }
            PatchShape::DiskPolar { normal, .. } => {
                let (e1, e2) = normal.tangent_frame();
                let (sn, cs) = t.sin_cos();
                (e1 * cs + e2 * sn, (e1 * -sn + e2 * cs) * s)
            }
            PatchShape::DiskSegment {
                normal, radius, cut, ..
            } => {
                let (e1, e2) = normal.tangent_frame();
                let alpha = segment_half_angle(*radius, *cut);
                let (sa, ca) = (alpha * t).sin_cos();
                let arc_x = *radius * ca;
                let phi_s = e1 * (arc_x - *cut);
                let phi_t = e1 * (-s * *radius * alpha * sa) + e2 * (*radius * alpha * ca);
                (phi_s, phi_t)
            }
            PatchShape::Rect { u_axis, v_axis, .. } => (**u_axis, **v_axis),
            PatchShape::SpherePatch { radius, pole, .. } => {
                let (e1, e2) = pole.tangent_frame();
                let (st, ct) = s.sin_cos();
                let (sp, cp) = t.sin_cos();
                let phi_s = (e1 * (ct * cp) + e2 * (ct * sp) - **pole * st) * *radius;
                let phi_t = (e1 * (-st * sp) + e2 * (st * cp)) * *radius;
                (phi_s, phi_t)
            }
            PatchShape::Tabulated { points } => {
                let (_, ds, dt) = catmull_rom_eval(points, s, t);
                (ds, dt)
            }
        }
    }

    /// `(φ_ss, φ_st, φ_tt)` by finite differences of the analytic tangents,
    /// step `1e-5 ×` the parameter scale, one-sided at the rectangle edges.
    pub fn second_derivatives(&self, s: T, t: T) -> (Vec3<T>, Vec3<T>, Vec3<T>) {
        if self.is_point() {
            return (Vec3::zero(), Vec3::zero(), Vec3::zero());
        }
        let dom = self.domain();
        let h = T::lit(1e-5) * dom.scale();
        let d_s = fd_vec(|x| self.tangents(x, t), s, dom.s, h);
        let d_t = fd_vec(|y| self.tangents(s, y), t, dom.t, h);
        let phi_ss = d_s.0;
        let phi_tt = d_t.1;
        let phi_st = (d_s.1 + d_t.0) * T::lit(0.5);
        (phi_ss, phi_st, phi_tt)
    }

    /// Area element `|φ_s × φ_t|`.
    pub fn jacobian(&self, s: T, t: T) -> T {
        let (a, b) = self.tangents(s, t);
        a.cross(b).norm()
    }

    /// Oriented unit normal; `None` where the map is not an immersion.
    pub fn normal(&self, s: T, t: T) -> Option<UnitVec3<T>> {
        let n = match &self.shape {
            PatchShape::Point { normal, .. } => Some(*normal),
            _ => {
                let (a, b) = self.tangents(s, t);
                UnitVec3::new_normalize(a.cross(b))
            }
        };
        n.map(|n| if self.flip_normal { n.flipped() } else { n })
    }

    fn check_immersion(&self) -> Result<()> {
        if self.is_point() {
            return Ok(());
        }
        let dom = self.domain();
        let gl = GaussLegendre::<T>::new(8);
        for (s, _) in gl.mapped(dom.s.0, dom.s.1) {
            for (t, _) in gl.mapped(dom.t.0, dom.t.1) {
                let j = self.jacobian(s, t);
                if !(j > T::zero() && j.is_finite()) {
                    return Err(Error::invalid(format!("patch is not an immersion at (s, t) = ({s}, {t})")));
                }
            }
        }
        Ok(())
    }

    /// Spot check of injectivity: distinct interior samples must map to
    /// distinct points.
    pub fn check_injective(&self, samples: usize) -> Result<()> {
        if self.is_point() {
            return Ok(());
        }
        let dom = self.domain();
        let n = samples.max(2);
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let a = (T::from_count(i) + T::lit(0.5)) / T::from_count(n);
                let b = (T::from_count(j) + T::lit(0.5)) / T::from_count(n);
                let s = dom.s.0 + a * dom.width();
                let t = dom.t.0 + b * dom.height();
                pts.push((s, t, self.point(s, t)));
            }
        }
        let size = pts
            .iter()
            .map(|p| p.2.distance(pts[0].2))
            .fold(T::zero(), |a, b| a.max(b));
        let tol = T::lit(1e-9) * size.max(T::lit(1e-300));
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if pts[i].2.distance(pts[j].2) <= tol {
                    return Err(Error::invalid(format!(
                        "patch map is not injective: ({}, {}) and ({}, {}) coincide",
                        pts[i].0, pts[i].1, pts[j].0, pts[j].1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Tensor Gauss–Legendre grid with `ns × nt` nodes. A point patch
    /// yields one zero-weight node.
    pub fn grid(&self, ns: usize, nt: usize) -> PatchGrid<T> {
        if let PatchShape::Point { at, normal } = &self.shape {
            let n = if self.flip_normal { normal.flipped() } else { *normal };
            return PatchGrid {
                nodes: vec![PatchNode {
                    s: T::zero(),
                    t: T::zero(),
                    point: *at,
                    normal: n.into_inner(),
                    weight: T::zero(),
                }],
                resolution: (1, 1),
                spacing: T::zero(),
            };
        }
        let dom = self.domain();
        let gs = GaussLegendre::<T>::new(ns.max(1));
        let gt = GaussLegendre::<T>::new(nt.max(1));
        let mut nodes = Vec::with_capacity(ns * nt);
        for (s, ws) in gs.mapped(dom.s.0, dom.s.1) {
            for (t, wt) in gt.mapped(dom.t.0, dom.t.1) {
                let (a, b) = self.tangents(s, t);
                let c = a.cross(b);
                let j = c.norm();
                let mut n = c / j;
                if self.flip_normal {
                    n = -n;
                }
                nodes.push(PatchNode {
                    s,
                    t,
                    point: self.point(s, t),
                    normal: n,
                    weight: ws * wt * j,
                });
            }
        }
        let mut spacing = T::zero();
        let (ns, nt) = (ns.max(1), nt.max(1));
        for i in 0..ns {
            for j in 0..nt {
                let p = nodes[i * nt + j].point;
                if i + 1 < ns {
                    spacing = spacing.max(p.distance(nodes[(i + 1) * nt + j].point));
                }
                if j + 1 < nt {
                    spacing = spacing.max(p.distance(nodes[i * nt + j + 1].point));
                }
            }
        }
        PatchGrid {
            nodes,
            resolution: (ns, nt),
            spacing,
        }
    }

    /// Uniform `ns × nt` parameter samples including the rectangle edges.
    /// A `1 × 1` request samples the rectangle midpoint.
    pub fn uniform_samples(&self, ns: usize, nt: usize) -> Vec<(T, T)> {
        let dom = self.domain();
        let axis = |n: usize, lo: T, hi: T| -> Vec<T> {
            if n <= 1 {
                vec![(lo + hi) * T::lit(0.5)]
            } else {
                (0..n)
                    .map(|k| lo + (hi - lo) * T::from_count(k) / T::from_count(n - 1))
                    .collect()
            }
        };
        let ss = axis(ns, dom.s.0, dom.s.1);
        let ts = axis(nt, dom.t.0, dom.t.1);
        ss.iter().flat_map(|&s| ts.iter().map(move |&t| (s, t))).collect()
    }
}

fn segment_half_angle<T: Real>(radius: T, cut: T) -> T {
    (cut / radius).acos()
}

/// Derivative of a vector pair along one parameter, central where the
/// stencil fits in `[lo, hi]`, second-order one-sided otherwise.
fn fd_vec<T: Real>(f: impl Fn(T) -> (Vec3<T>, Vec3<T>), x: T, (lo, hi): (T, T), h: T) -> (Vec3<T>, Vec3<T>) {
    let two = T::lit(2.0);
    if x - h >= lo && x + h <= hi {
        let (a1, b1) = f(x + h);
        let (a0, b0) = f(x - h);
        ((a1 - a0) / (two * h), (b1 - b0) / (two * h))
    } else {
        let dir = if x - h < lo { T::one() } else { -T::one() };
        let (a0, b0) = f(x);
        let (a1, b1) = f(x + dir * h);
        let (a2, b2) = f(x + dir * two * h);
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        let d = dir * two * h;
        ((a1 * four - a0 * three - a2) / d, (b1 * four - b0 * three - b2) / d)
    }
}

fn catmull_rom_weights<T: Real>(x: T) -> ([T; 4], [T; 4]) {
    let h = T::lit(0.5);
    let (x2, x3) = (x * x, x * x * x);
    let c = |v: f64| T::lit(v);
    let w = [
        h * (-x3 + c(2.0) * x2 - x),
        h * (c(3.0) * x3 - c(5.0) * x2 + c(2.0)),
        h * (c(-3.0) * x3 + c(4.0) * x2 + x),
        h * (x3 - x2),
    ];
    let d = [
        h * (c(-3.0) * x2 + c(4.0) * x - T::one()),
        h * (c(9.0) * x2 - c(10.0) * x),
        h * (c(-9.0) * x2 + c(8.0) * x + T::one()),
        h * (c(3.0) * x2 - c(2.0) * x),
    ];
    (w, d)
}

/// Ghost-extended access: linear extrapolation one node past each edge.
fn ghost<T: Real>(points: &[Vec<Point3<T>>], i: isize, j: isize) -> Point3<T> {
    let ns = points.len() as isize;
    let nt = points[0].len() as isize;
    let fix = |k: isize, n: isize| -> (isize, isize, bool) {
        if k < 0 {
            (0, 1, true)
        } else if k >= n {
            (n - 1, n - 2, true)
        } else {
            (k, k, false)
        }
    };
    let (i0, i1, gi) = fix(i, ns);
    let (j0, j1, gj) = fix(j, nt);
    let at = |a: isize, b: isize| points[a as usize][b as usize];
    let two = T::lit(2.0);
    match (gi, gj) {
        (false, false) => at(i0, j0),
        (true, false) => at(i0, j0) * two - at(i1, j0),
        (false, true) => at(i0, j0) * two - at(i0, j1),
        (true, true) => at(i0, j0) * two - at(i1, j1),
    }
}

fn catmull_rom_eval<T: Real>(points: &[Vec<Point3<T>>], s: T, t: T) -> (Point3<T>, Vec3<T>, Vec3<T>) {
    let ns = points.len();
    let nt = points[0].len();
    let locate = |x: T, n: usize| -> (isize, T) {
        let u = x.max(T::zero()).min(T::one()) * T::from_count(n - 1);
        let k = u.floor().to_usize().unwrap_or(0).min(n - 2);
        (k as isize, u - T::from_count(k))
    };
    let (ki, xi) = locate(s, ns);
    let (kj, xj) = locate(t, nt);
    let (wi, di) = catmull_rom_weights(xi);
    let (wj, dj) = catmull_rom_weights(xj);
    let mut p = Vec3::zero();
    let mut ps = Vec3::zero();
    let mut pt = Vec3::zero();
    for a in 0..4 {
        for b in 0..4 {
            let q = ghost(points, ki + a as isize - 1, kj + b as isize - 1);
            p += q * (wi[a] * wj[b]);
            ps += q * (di[a] * wj[b]);
            pt += q * (wi[a] * dj[b]);
        }
    }
    (p, ps * T::from_count(ns - 1), pt * T::from_count(nt - 1))
}
