//! Indicator functional `I_∂B(τ)` from detector data (an integral over
//! `∂B`) and its dominant term from patch data (an integral over `Γ`),
//! evaluated over a ladder of `τ` values in log-magnitude form.

mod curve;
mod laplace;

pub use curve::{indicator_curve, CurveMeta, GammaSource, IndicatorCurve, IndicatorSource, LadderSpec, Side};
pub use laplace::{interval_weights, time_laplace, time_laplace_shifted};

use crate::error::{Error, Result};
use crate::forward::{MeasurementRecord, SampledBoundary};
use crate::geometry::DetectorBall;
use crate::potentials::BallPotential;
use crate::real::{pairwise_sum, Real};

/// Signed value stored as `sign · exp(log_abs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog<T> {
    /// −1, 0 or +1.
    pub sign: i8,
    /// `log|I|`; `−∞` when the value is zero.
    pub log_abs: T,
}

impl<T: Real> SignedLog<T> {
    pub fn zero() -> Self {
        SignedLog {
            sign: 0,
            log_abs: T::neg_infinity(),
        }
    }

    /// `sign · e^{log_scale} · mantissa`.
    pub fn from_scaled(mantissa: T, log_scale: T) -> Self {
        if mantissa == T::zero() || !mantissa.is_finite() {
            return Self::zero();
        }
        SignedLog {
            sign: if mantissa > T::zero() { 1 } else { -1 },
            log_abs: log_scale + mantissa.abs().ln(),
        }
    }

    /// The value, `0` if it underflows.
    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            s => T::lit(f64::from(s)) * self.log_abs.exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `|self − other| / |self|` computed in log form.
    pub fn relative_difference(&self, other: &Self) -> T {
        if self.is_zero() {
            return if other.is_zero() { T::zero() } else { T::infinity() };
        }
        if other.is_zero() {
            return T::one();
        }
        let ratio = (other.log_abs - self.log_abs).exp();
        let s = T::lit(f64::from(self.sign * other.sign));
        (T::one() - s * ratio).abs()
    }
}

/// Index of the first sample at which any node has nonzero `u` or `∂_ν u`.
fn first_signal(m: &MeasurementRecord<impl Real>) -> Option<usize> {
    m.u.iter()
        .chain(&m.dnu)
        .filter_map(|row| row.iter().position(|x| !x.is_zero()))
        .min()
}

/// `I_∂B(τ) = Σ_nodes w [W_τ ∂_ν v − v (∂_ν u)_τ]` with `ν` outward from `B`.
///
/// On `∂B`, `v` and `∂_ν v = v′(r)` are constants; the Laplace transforms are
/// rescaled by the first arrival time so that the result keeps full relative
/// precision in log form far below the `f64` underflow threshold.
pub fn indicator_measurement<T: Real>(m: &MeasurementRecord<T>, tau: T) -> Result<SignedLog<T>> {
    let bp = BallPotential::new(m.ball, tau)?;
    let Some(first) = first_signal(m) else {
        return Ok(SignedLog::zero());
    };
    let start = first.saturating_sub(1);
    let r = m.ball.radius();
    let h = m.times.dt;
    // ∂_ν v / v on the sphere
    let dv_over_v = -(tau * r + T::one()) / r;
    let terms: Vec<T> = m
        .nodes
        .iter()
        .zip(m.u.iter().zip(&m.dnu))
        .map(|(node, (u, dnu))| {
            let w_tau = time_laplace_shifted(u, h, tau, start);
            let dnu_tau = time_laplace_shifted(dnu, h, tau, start);
            node.weight * (w_tau * dv_over_v - dnu_tau)
        })
        .collect();
    let mantissa = pairwise_sum(&terms);
    let log_scale = -tau * m.times.time(start) + bp.log_v_radial(r)?;
    Ok(SignedLog::from_scaled(mantissa, log_scale))
}

/// Dominant patch-side term `∫_Γ (f_τ ∂_ν v − v g_τ) dS`, `ν` the outward
/// normal of the cavity on `Γ`.
pub fn indicator_gamma<T: Real>(sb: &SampledBoundary<T>, ball: &DetectorBall<T>, tau: T) -> Result<SignedLog<T>> {
    let bp = BallPotential::new(*ball, tau)?;
    let h = sb.times.dt;
    let mut logs = Vec::with_capacity(sb.grid.nodes.len());
    for n in &sb.grid.nodes {
        let rho = n.point.distance(ball.center());
        if !(rho > ball.radius()) {
            return Err(Error::BallIntersectsPatch {
                clearance: (rho - ball.radius()).to_f64_lossy(),
            });
        }
        logs.push(bp.log_v_radial(rho)?);
    }
    let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
    if top == T::neg_infinity() {
        return Ok(SignedLog::zero());
    }
    let terms: Vec<T> = sb
        .grid
        .nodes
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let d = n.point - ball.center();
            let rho = d.norm();
            // ∂_ν v / v = v′(ρ)/v · (x − p)·ν/ρ
            let dv_over_v = -(tau * rho + T::one()) / rho * d.dot(n.normal) / rho;
            let f_tau = time_laplace(&sb.f[j], h, tau);
            let g_tau = time_laplace(&sb.g[j], h, tau);
            n.weight * (logs[j] - top).exp() * (f_tau * dv_over_v - g_tau)
        })
        .collect();
    Ok(SignedLog::from_scaled(pairwise_sum(&terms), top))
}
