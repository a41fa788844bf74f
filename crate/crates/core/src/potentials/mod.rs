//! Screened-Poisson (Yukawa) volume potential of the uniform detector ball,
//! `Δv − τ²v + χ_B = 0`, in closed form outside the ball.

pub mod oracle;

use crate::error::{Error, Result};
use crate::geometry::{DetectorBall, ParamPatch, Point3, Vec3};
use crate::real::Real;

/// `e^{−x}(x cosh x − sinh x)`, free of cancellation for small `x`.
pub fn shape_factor<T: Real>(x: T) -> T {
    let one = T::one();
    if x >= one {
        let two = T::lit(2.0);
        ((x - one) + (x + one) * (-two * x).exp()) / two
    } else {
        // Σ_{k≥1} 2k x^{2k+1} / (2k+1)!, converges fast on [0, 1)
        let x2 = x * x;
        let mut term = x * x2 / T::lit(6.0);
        let mut acc = T::zero();
        let mut k = 1usize;
        loop {
            let add = term * T::from_count(2 * k);
            acc = acc + add;
            if add <= acc * T::epsilon() * T::lit(0.25) || k > 30 {
                break;
            }
            term = term * x2 / T::from_count((2 * k + 2) * (2 * k + 3));
            k += 1;
        }
        acc * (-x).exp()
    }
}

/// Potential of the ball `B` with decay parameter `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallPotential<T> {
    ball: DetectorBall<T>,
    tau: T,
}

impl<T: Real> BallPotential<T> {
    pub fn new(ball: DetectorBall<T>, tau: T) -> Result<Self> {
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        Ok(BallPotential { ball, tau })
    }

    #[inline]
    pub fn ball(&self) -> &DetectorBall<T> {
        &self.ball
    }

    #[inline]
    pub fn tau(&self) -> T {
        self.tau
    }

    fn check_exterior(&self, rho: T, strict: bool) -> Result<()> {
        let r = self.ball.radius();
        let inside = if strict { rho <= r } else { rho < r };
        if inside || !rho.is_finite() {
            return Err(Error::InsideBall {
                rho: rho.to_f64_lossy(),
                radius: r.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `log v(ρ) = −τ(ρ − r) + log g(τr) − 3 log τ − log ρ` for `ρ ≥ r`.
    pub fn log_v_radial(&self, rho: T) -> Result<T> {
        self.check_exterior(rho, false)?;
        let (tau, r) = (self.tau, self.ball.radius());
        Ok(-tau * (rho - r) + shape_factor(tau * r).ln() - T::lit(3.0) * tau.ln() - rho.ln())
    }

    pub fn v_radial(&self, rho: T) -> Result<T> {
        Ok(self.log_v_radial(rho)?.exp())
    }

    /// `v′(ρ) = −(τρ + 1) v(ρ)/ρ`, defined for `ρ ≥ r` (one-sided at the
    /// sphere, where the interior and exterior branches agree to first order).
    pub fn dv_drho(&self, rho: T) -> Result<T> {
        let v = self.v_radial(rho)?;
        Ok(-(self.tau * rho + T::one()) * v / rho)
    }

    /// `v(x)` for `|x − p| ≥ r`.
    pub fn v_exterior(&self, x: Point3<T>) -> Result<T> {
        self.v_radial(x.distance(self.ball.center()))
    }

    pub fn log_v_exterior(&self, x: Point3<T>) -> Result<T> {
        self.log_v_radial(x.distance(self.ball.center()))
    }

    /// `∇v(x) = v′(ρ)(x − p)/ρ` for `|x − p| > r`.
    pub fn grad_v_exterior(&self, x: Point3<T>) -> Result<Vec3<T>> {
        let d = x - self.ball.center();
        let rho = d.norm();
        self.check_exterior(rho, true)?;
        Ok(d * (self.dv_drho(rho)? / rho))
    }
}

/// Minimum over the Γ quadrature nodes of `τ² e^{τ d_e(x,B)} v(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointwiseBand<T> {
    pub min_value: T,
    pub location: (T, T),
    pub point: Point3<T>,
}

pub fn pointwise_band<T: Real>(
    patch: &ParamPatch<T>,
    ball: &DetectorBall<T>,
    tau: T,
    grid: (usize, usize),
) -> Result<PointwiseBand<T>> {
    let bp = BallPotential::new(*ball, tau)?;
    let g = patch.grid(grid.0, grid.1);
    let mut best: Option<PointwiseBand<T>> = None;
    for n in &g.nodes {
        let rho = n.point.distance(ball.center());
        let log_q = T::lit(2.0) * tau.ln() + tau * (rho - ball.radius()) + bp.log_v_radial(rho)?;
        let q = log_q.exp();
        if best.is_none_or(|b| q < b.min_value) {
            best = Some(PointwiseBand {
                min_value: q,
                location: (n.s, n.t),
                point: n.point,
            });
        }
    }
    best.ok_or_else(|| Error::invalid("patch grid has no nodes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_ball() -> DetectorBall<f64> {
        DetectorBall::new(Vec3::zero(), 1.0).unwrap()
    }

    #[test]
    fn closed_form_value_at_rho_two() {
        let bp = BallPotential::new(unit_ball(), 1.0).unwrap();
        let v = bp.v_exterior(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((v - (-3f64).exp() / 2.0).abs() < 1e-15);
        assert!((v - 0.0248935).abs() < 1e-7);
    }

    #[test]
    fn shape_factor_branches_agree() {
        for x in [1e-4f64, 1e-2, 0.3, 0.99, 1.0, 1.01, 3.0, 30.0] {
            let direct = (-x).exp() * (x * x.cosh() - x.sinh());
            let rel = (shape_factor(x) - direct).abs() / direct;
            // the direct form loses about 1/x² digits to cancellation
            assert!(rel < 1e-15 / (x * x).min(1.0) * 10.0, "x={x} rel={rel}");
        }
        // continuity across the switch
        let below = shape_factor(1.0f64 - 1e-15);
        assert!((below - shape_factor(1.0)).abs() < 1e-14);
    }

    #[test]
    fn newtonian_limit() {
        let bp = BallPotential::new(unit_ball(), 1e-6).unwrap();
        let v = bp.v_radial(2.0).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-5, "{v}");
    }

    #[test]
    fn rejects_interior_points() {
        let bp = BallPotential::new(unit_ball(), 2.0).unwrap();
        assert!(matches!(bp.v_radial(0.5), Err(Error::InsideBall { .. })));
        assert!(bp.v_radial(1.0).is_ok());
        assert!(bp.dv_drho(1.0).is_ok());
        assert!(bp.grad_v_exterior(Vec3::new(1.0, 0.0, 0.0)).is_err());
        assert!(BallPotential::new(unit_ball(), 0.0).is_err());
    }

    #[test]
    fn gradient_value_and_finite_differences() {
        let bp = BallPotential::new(unit_ball(), 1.0).unwrap();
        let g = bp.grad_v_exterior(Vec3::new(2.0, 0.0, 0.0)).unwrap();
        assert!((g.x + 3.0 * (-3f64).exp() / 4.0).abs() < 1e-15);
        assert!(g.y == 0.0 && g.z == 0.0);
        let h = 1e-6;
        let fd = (bp.v_radial(2.0 + h).unwrap() - bp.v_radial(2.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - g.x).abs() < 1e-9);
    }

    #[test]
    fn single_precision_evaluation() {
        let ball = DetectorBall::<f32>::new(Vec3::zero(), 1.0).unwrap();
        let bp = BallPotential::new(ball, 1.0f32).unwrap();
        let v = bp.v_radial(2.0).unwrap();
        assert!((v - 0.024893534).abs() < 1e-7);
    }

    #[test]
    fn pointwise_band_converges_to_far_point_limit() {
        let disk = ParamPatch::disk(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0), 1.0).unwrap();
        let ball = DetectorBall::new(Vec3::new(0.0, 0.0, 3.0), 1.0).unwrap();
        let mut prev = f64::NAN;
        for tau in [5.0f64, 10.0, 20.0, 40.0, 400.0] {
            let c = pointwise_band(&disk, &ball, tau, (16, 16)).unwrap();
            let rho_max = c.point.distance(ball.center());
            let limit = ball.radius() / (2.0 * rho_max);
            // exact value on the grid is g(τr)/(τρ)
            assert!((c.min_value - shape_factor(tau) / (tau * rho_max)).abs() < 1e-14);
            assert!(c.min_value > 0.0 && c.min_value < limit);
            if tau == 400.0 {
                assert!((c.min_value - limit).abs() / limit < 3e-3);
            }
            // the lower bound from the proof sits below the limit
            let de = rho_max - ball.radius();
            assert!(de * ball.radius() / (4.0 * rho_max * rho_max) < limit);
            assert!(!(c.min_value < prev));
            prev = c.min_value;
        }
        // vanishing ball
        let tiny = DetectorBall::new(Vec3::new(0.0, 0.0, 3.0), 1e-4).unwrap();
        assert!(pointwise_band(&disk, &tiny, 5.0, (8, 8)).unwrap().min_value < 1e-4);
    }

    proptest! {
        #[test]
        fn pde_residual_vanishes(rho in 1.2..6.0f64, tau in 0.2..5.0f64, dir in 0.0..6.2f64) {
            let bp = BallPotential::new(unit_ball(), tau).unwrap();
            let x = Vec3::new(rho * dir.cos(), rho * dir.sin() * 0.6, rho * dir.sin() * 0.8);
            let h = 1e-3;
            let v0 = bp.v_exterior(x).unwrap();
            let mut lap = 0.0;
            for e in [Vec3::new(h, 0.0, 0.0), Vec3::new(0.0, h, 0.0), Vec3::new(0.0, 0.0, h)] {
                lap += bp.v_exterior(x + e).unwrap() + bp.v_exterior(x - e).unwrap() - 2.0 * v0;
            }
            lap /= h * h;
            let scale = tau * tau * v0;
            prop_assert!((lap - scale).abs() <= 1e-4 * scale.max(1e-300) * (1.0 + tau * tau), "{} vs {}", lap, scale);
        }

        #[test]
        fn gradient_points_inward_and_is_radial(rho in 1.01..10.0f64, a in 0.0..6.2f64, b in 0.0..3.1f64, tau in 0.1..20.0f64) {
            let bp = BallPotential::new(unit_ball(), tau).unwrap();
            let x = Vec3::new(rho * b.sin() * a.cos(), rho * b.sin() * a.sin(), rho * b.cos());
            let g = bp.grad_v_exterior(x).unwrap();
            prop_assert!(g.dot(x) < 0.0);
            prop_assert!(g.cross(x).norm() <= 1e-12 * g.norm() * rho);
            let y = Vec3::new(rho, 0.0, 0.0);
            let gy = bp.grad_v_exterior(y).unwrap();
            prop_assert!((g.norm() - gy.norm()).abs() <= 1e-12 * gy.norm());
        }

        #[test]
        fn potential_decreases_with_distance(rho in 1.0..50.0f64, step in 0.01..5.0f64, tau in 0.05..10.0f64) {
            let bp = BallPotential::new(unit_ball(), tau).unwrap();
            prop_assert!(bp.v_radial(rho + step).unwrap() < bp.v_radial(rho).unwrap());
        }
    }
}
