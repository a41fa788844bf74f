//! Brute-force quadrature of the defining volume integral
//! `v(x) = (1/4π) ∫_B e^{−τ|x−y|}/|x−y| dy`, the interior branch of `v`,
//! and an `L²(ℝ³)` norm estimate. Used by tests and the `oracle` command.

use super::{shape_factor, BallPotential};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::quadrature::{adaptive_gk, Estimate, Tolerance};
use crate::real::Real;

/// `e^{τ(ρ−r)} v(x)` by nested adaptive Gauss–Kronrod quadrature in
/// spherical shells about `p`, with the polar axis through `x`.
///
/// After the azimuthal integral, `v = ½ ∫₀^r s² ∫₋₁¹ e^{−τD}/D dc ds` with
/// `D² = ρ² + s² − 2ρsc`. The factor `e^{τ(ρ−r)}` keeps large-`τ` values
/// representable.
pub fn v_quadrature_scaled<T: Real>(bp: &BallPotential<T>, x: Point3<T>, tol: T) -> Result<Estimate<T>> {
    let r = bp.ball().radius();
    let tau = bp.tau();
    let rho = x.distance(bp.ball().center());
    if !(rho >= r) {
        return Err(Error::InsideBall {
            rho: rho.to_f64_lossy(),
            radius: r.to_f64_lossy(),
        });
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("oracle tolerance must be positive"));
    }
    let shift = rho - r;
    let inner_tol = Tolerance::relative(tol * T::lit(0.05)).with_max_intervals(4000);
    let outer = |s: T| -> T {
        if s <= T::zero() {
            return T::zero();
        }
        let f = |c: T| {
            let d = (rho * rho + s * s - T::lit(2.0) * rho * s * c).max(T::zero()).sqrt();
            (-tau * (d - shift)).exp() / d
        };
        match adaptive_gk(f, -T::one(), T::one(), inner_tol) {
            Ok(e) => s * s * e.value,
            Err(Error::NoConvergence { estimate, .. }) => s * s * T::lit(estimate),
            Err(_) => T::nan(),
        }
    };
    let est = adaptive_gk(outer, T::zero(), r, Tolerance::relative(tol * T::lit(0.5)).with_max_intervals(4000))?;
    let half = T::lit(0.5);
    Ok(Estimate {
        value: est.value * half,
        error: est.error * half,
        evaluations: est.evaluations,
    })
}

/// `e^{τ(ρ−r)} v(x)` by triple nested adaptive quadrature over
/// `y = p + s (sin θ cos φ, sin θ sin φ, cos θ)` in `(s, cos θ, φ)`, with the
/// polar axis fixed along `z` rather than through `x`, so no symmetry of the
/// integrand is used.
pub fn v_quadrature_3d_scaled<T: Real>(bp: &BallPotential<T>, x: Point3<T>, tol: T) -> Result<Estimate<T>> {
    let r = bp.ball().radius();
    let tau = bp.tau();
    let p = bp.ball().center();
    let rel = x - p;
    let rho = rel.norm();
    if !(rho >= r) {
        return Err(Error::InsideBall {
            rho: rho.to_f64_lossy(),
            radius: r.to_f64_lossy(),
        });
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("oracle tolerance must be positive"));
    }
    let shift = rho - r;
    let two_pi = T::lit(2.0) * T::PI();
    let level = |t: T| Tolerance::relative(t).with_max_intervals(4000);
    let settle = |e: Result<Estimate<T>>| match e {
        Ok(e) => e.value,
        Err(Error::NoConvergence { estimate, .. }) => T::lit(estimate),
        Err(_) => T::nan(),
    };
    let shell = |s: T| -> T {
        if s <= T::zero() {
            return T::zero();
        }
        let ring = |c: T| -> T {
            let sin = (T::one() - c * c).max(T::zero()).sqrt();
            let f = |phi: T| {
                let y = Point3::new(s * sin * phi.cos(), s * sin * phi.sin(), s * c);
                let d = (rel - y).norm();
                (-tau * (d - shift)).exp() / d
            };
            settle(adaptive_gk(f, T::zero(), two_pi, level(tol * T::lit(0.01))))
        };
        s * s * settle(adaptive_gk(ring, -T::one(), T::one(), level(tol * T::lit(0.05))))
    };
    let est = adaptive_gk(shell, T::zero(), r, level(tol * T::lit(0.5)))?;
    let k = T::one() / (T::lit(2.0) * two_pi);
    Ok(Estimate {
        value: est.value * k,
        error: est.error * k,
        evaluations: est.evaluations,
    })
}

/// `v(x)` by quadrature, to relative tolerance `tol`.
pub fn v_quadrature_oracle<T: Real>(bp: &BallPotential<T>, x: Point3<T>, tol: T) -> Result<Estimate<T>> {
    let scaled = v_quadrature_scaled(bp, x, tol)?;
    let rho = x.distance(bp.ball().center());
    let k = (-bp.tau() * (rho - bp.ball().radius())).exp();
    Ok(Estimate {
        value: scaled.value * k,
        error: scaled.error * k,
        evaluations: scaled.evaluations,
    })
}

/// Interior branch `v(ρ) = 1/τ² − (1 + τr) e^{−τr} sinh(τρ)/(τ³ρ)`, `ρ ≤ r`.
pub fn v_interior<T: Real>(bp: &BallPotential<T>, rho: T) -> T {
    let tau = bp.tau();
    let r = bp.ball().radius();
    let one = T::one();
    let tau3 = tau * tau * tau;
    let x = tau * rho;
    // e^{−τr} sinh(τρ)/ρ, written to avoid overflow and the 0/0 at ρ = 0
    let damped = if x < T::lit(1e-4) {
        tau * (-tau * r).exp() * (one + x * x / T::lit(6.0))
    } else {
        ((tau * (rho - r)).exp() - (-tau * (rho + r)).exp()) / (T::lit(2.0) * rho)
    };
    one / (tau * tau) - (one + tau * r) * damped / tau3
}

/// `v` at radius `ρ` from the center, either branch.
pub fn v_any<T: Real>(bp: &BallPotential<T>, rho: T) -> T {
    if rho < bp.ball().radius() {
        v_interior(bp, rho)
    } else {
        bp.v_radial(rho).unwrap_or(T::nan())
    }
}

/// `‖v‖_{L²(ℝ³)}` by radial quadrature, `4π ∫₀^∞ v(ρ)² ρ² dρ`.
pub fn l2_norm<T: Real>(bp: &BallPotential<T>, tol: T) -> Result<Estimate<T>> {
    let r = bp.ball().radius();
    let tau = bp.tau();
    let tolerance = Tolerance::relative(tol).with_max_intervals(4000);
    let inner = adaptive_gk(
        |rho: T| {
            let v = v_interior(bp, rho);
            v * v * rho * rho
        },
        T::zero(),
        r,
        tolerance,
    )?;
    // the exterior tail decays like e^{−2τ(ρ−r)}; 40 e-folds is far below tol
    let reach = r + T::lit(20.0) / tau + T::lit(20.0) * r;
    let outer = adaptive_gk(
        |rho: T| {
            let v = bp.v_radial(rho).unwrap_or(T::zero());
            v * v * rho * rho
        },
        r,
        reach,
        tolerance,
    )?;
    let four_pi = T::lit(4.0) * T::PI();
    let sq = four_pi * (inner.value + outer.value);
    let value = sq.sqrt();
    Ok(Estimate {
        value,
        error: four_pi * (inner.error + outer.error) / (T::lit(2.0) * value),
        evaluations: inner.evaluations + outer.evaluations,
    })
}

/// `v(r)` from the interior branch minus the exterior closed form; zero
/// up to rounding when both branches are right.
pub fn branch_mismatch<T: Real>(bp: &BallPotential<T>) -> T {
    let r = bp.ball().radius();
    let outer = shape_factor(bp.tau() * r) / (bp.tau().powi(3) * r);
    v_interior(bp, r) - outer
}
