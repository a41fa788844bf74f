use std::fmt;
use std::sync::Arc;

use crate::real::Real;

/// Emission history `q(t)`, zero for `t ≤ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TemporalProfile<T> {
    /// `amplitude · s(t / rise)` with the C² quintic `s(x) = 6x⁵ − 15x⁴ + 10x³`
    /// on `[0, 1]`, `s = 1` afterwards.
    Smoothstep { amplitude: T, rise: T },
    /// `slope · t` for `t > 0`.
    Linear { slope: T },
    Zero,
}

impl<T: Real> TemporalProfile<T> {
    #[inline]
    pub fn value(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match *self {
            TemporalProfile::Smoothstep { amplitude, rise } => {
                if t >= rise {
                    amplitude
                } else {
                    let x = t / rise;
                    amplitude * x * x * x * (x * (x * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
                }
            }
            TemporalProfile::Linear { slope } => slope * t,
            TemporalProfile::Zero => T::zero(),
        }
    }

    /// `q̇(t)`, continuous.
    #[inline]
    pub fn derivative(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match *self {
            TemporalProfile::Smoothstep { amplitude, rise } => {
                if t >= rise {
                    T::zero()
                } else {
                    let x = t / rise;
                    let one = T::one();
                    amplitude * T::lit(30.0) * x * x * (one - x) * (one - x) / rise
                }
            }
            TemporalProfile::Linear { slope } => slope,
            TemporalProfile::Zero => T::zero(),
        }
    }

    /// Time after which `q` is constant, if any.
    pub fn settles_at(&self) -> Option<T> {
        match *self {
            TemporalProfile::Smoothstep { rise, .. } => Some(rise),
            TemporalProfile::Zero => Some(T::zero()),
            TemporalProfile::Linear { .. } => None,
        }
    }
}

/// Spatial density `a(s, t)` on the patch parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialProfile<T> {
    Constant(T),
    /// `base + peak · exp(−|(s,t) − center|² / width²)`.
    Bump { base: T, peak: T, center: (T, T), width: T },
}

impl<T: Real> SpatialProfile<T> {
    pub fn value(&self, s: T, t: T) -> T {
        match *self {
            SpatialProfile::Constant(c) => c,
            SpatialProfile::Bump {
                base,
                peak,
                center,
                width,
            } => {
                let d2 = (s - center.0).powi(2) + (t - center.1).powi(2);
                base + peak * (-d2 / (width * width)).exp()
            }
        }
    }
}

/// Boundary profile `f(t, s, t')` or `g(t, s, t')` on the patch.
#[derive(Clone)]
pub enum BoundaryProfile<T> {
    Constant(T),
    /// `offset + slope · t`.
    Ramp { offset: T, slope: T },
    Custom(Arc<dyn Fn(T, T, T) -> T + Send + Sync>),
}

impl<T: Real> BoundaryProfile<T> {
    pub fn value(&self, time: T, s: T, t: T) -> T {
        match self {
            BoundaryProfile::Constant(c) => *c,
            BoundaryProfile::Ramp { offset, slope } => *offset + *slope * time,
            BoundaryProfile::Custom(f) => f(time, s, t),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for BoundaryProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryProfile::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            BoundaryProfile::Ramp { offset, slope } => f
                .debug_struct("Ramp")
                .field("offset", offset)
                .field("slope", slope)
                .finish(),
            BoundaryProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_is_c2_at_both_ends() {
        let q = TemporalProfile::Smoothstep { amplitude: 2.0f64, rise: 0.5 };
        assert_eq!(q.value(0.0), 0.0);
        assert_eq!(q.value(-1.0), 0.0);
        assert_eq!(q.value(0.5), 2.0);
        assert!((q.value(0.25) - 1.0).abs() < 1e-15);
        let h = 1e-6;
        for t in [1e-3, 0.1, 0.3, 0.499] {
            let fd = (q.value(t + h) - q.value(t - h)) / (2.0 * h);
            assert!((fd - q.derivative(t)).abs() < 1e-6);
        }
        assert!(q.derivative(1e-9).abs() < 1e-12);
        assert!(q.derivative(0.5 - 1e-9).abs() < 1e-12);
    }

    #[test]
    fn bump_never_drops_below_base() {
        let a = SpatialProfile::Bump {
            base: 1.0,
            peak: 0.5,
            center: (0.0, 0.0),
            width: 0.3,
        };
        assert_eq!(a.value(0.0, 0.0), 1.5);
        assert!(a.value(5.0, 5.0) >= 1.0);
    }
}
