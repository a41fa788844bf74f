//! Distance extraction from the decay rate of the indicator, the presence
//! test, the quench-size lower bound and trilateration on the cavity mesh.

mod lstsq;
mod trilateration;

pub use lstsq::{lstsq, LeastSquares};
pub use trilateration::{triangulate, DetectorDistance, Triangulation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::IndicatorCurve;
use crate::real::Real;

/// Regression model for `log|I(τ)|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `log|I| = −dτ + c`.
    PureSlope,
    /// `log|I| = −dτ − γ log τ + c`.
    SlopeLog,
}

impl std::str::FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-slope" => Ok(FitModel::PureSlope),
            "slope-log" => Ok(FitModel::SlopeLog),
            other => Err(Error::invalid(format!("unknown fit model {other:?} (pure-slope or slope-log)"))),
        }
    }
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitModel::PureSlope => "pure-slope",
            FitModel::SlopeLog => "slope-log",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceFit<T> {
    pub d_hat: T,
    /// Prefactor exponent `γ̂`; zero for the pure-slope model.
    pub gamma: T,
    pub intercept: T,
    pub residual_rms: T,
    pub window: (T, T),
    pub model: FitModel,
    pub points: usize,
    /// The raw slope gave a negative distance and `d̂` was clipped to 0.
    pub clipped: bool,
    /// Common sign of the fitted values.
    pub sign: i8,
}

/// Minimum ladder size for [`extract_distance`].
pub const MIN_FIT_POINTS: usize = 4;

fn fit_logs<T: Real>(taus: &[T], logs: &[T], model: FitModel) -> Result<(T, T, T, Vec<T>)> {
    let n = taus.len();
    let nf = T::from_count(n);
    // centered columns keep the near-collinear τ and log τ well conditioned
    let mt = taus.iter().copied().sum::<T>() / nf;
    let ml = taus.iter().map(|t| t.ln()).sum::<T>() / nf;
    let cols = match model {
        FitModel::PureSlope => 2,
        FitModel::SlopeLog => 3,
    };
    let mut a = Vec::with_capacity(n * cols);
    for &t in taus {
        a.push(T::one());
        a.push(-(t - mt));
        if cols == 3 {
            a.push(-(t.ln() - ml));
        }
    }
    let sol = lstsq(&a, logs, cols)?;
    let d = sol.x[1];
    let gamma = if cols == 3 { sol.x[2] } else { T::zero() };
    let intercept = sol.x[0] + d * mt + gamma * ml;
    Ok((d, gamma, intercept, sol.residuals))
}

/// Least-squares fit of `log|I_k|` over the whole curve.
pub fn extract_distance<T: Real>(curve: &IndicatorCurve<T>, model: FitModel) -> Result<DistanceFit<T>> {
    let n = curve.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: n,
        });
    }
    if let Some(k) = curve.values.iter().position(|v| v.is_zero()) {
        return Err(Error::invalid(format!(
            "indicator vanishes at tau = {}; no signal to fit",
            curve.taus[k]
        )));
    }
    let sign = curve.values[0].sign;
    if curve.values.iter().any(|v| v.sign != sign) {
        return Err(Error::InconsistentSigns);
    }
    let logs: Vec<T> = curve.values.iter().map(|v| v.log_abs).collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("indicator magnitudes are not representable in log form"));
    }
    let (d, gamma, intercept, residuals) = fit_logs(&curve.taus, &logs, model)?;
    let rms = (residuals.iter().map(|r| *r * *r).sum::<T>() / T::from_count(n)).sqrt();
    let clipped = d < T::zero();
    Ok(DistanceFit {
        d_hat: d.max(T::zero()),
        gamma,
        intercept,
        residual_rms: rms,
        window: (curve.taus[0], curve.taus[n - 1]),
        model,
        points: n,
        clipped,
        sign,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Present,
    Absent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PresenceVerdict<T> {
    pub verdict: Verdict,
    /// Decay-rate evidence `d̂`; `None` when the curve carries no signal.
    pub d_hat: Option<T>,
    pub t0: T,
    pub margin: T,
    /// Slope of `log|I_k| + τ_k T₀` against `τ_k`, i.e. `T₀ − d̂`.
    pub trend: Option<T>,
}

/// Presence margin as a fraction of `T₀`.
pub const PRESENCE_MARGIN: f64 = 0.05;
/// Points below this fraction of the largest magnitude are treated as noise.
pub const RELATIVE_NOISE_FLOOR: f64 = 1e-12;

/// Decides whether a quench lies within reach: `e^{τT₀}I` grows when
/// `d < T₀` and decays otherwise; with no signal at all the quench is absent.
///
/// `noise_floor` is an absolute magnitude below which values count as zero.
pub fn presence_test<T: Real>(curve: &IndicatorCurve<T>, t0: T, noise_floor: T) -> PresenceVerdict<T> {
    let margin = T::lit(PRESENCE_MARGIN) * t0;
    let mut out = PresenceVerdict {
        verdict: Verdict::Absent,
        d_hat: None,
        t0,
        margin,
        trend: None,
    };
    let log_floor = if noise_floor > T::zero() { noise_floor.ln() } else { T::neg_infinity() };
    let top = curve
        .values
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| v.log_abs)
        .fold(T::neg_infinity(), T::max);
    if !(top > log_floor) {
        return out;
    }
    let cut = log_floor.max(top + T::lit(RELATIVE_NOISE_FLOOR).ln());
    let keep: Vec<usize> = (0..curve.len())
        .filter(|&k| !curve.values[k].is_zero() && curve.values[k].log_abs > cut)
        .collect();
    out.verdict = Verdict::Inconclusive;
    let sign = curve.values[keep[0]].sign;
    if keep.len() < 2 || keep.iter().any(|&k| curve.values[k].sign != sign) {
        return out;
    }
    let taus: Vec<T> = keep.iter().map(|&k| curve.taus[k]).collect();
    let logs: Vec<T> = keep.iter().map(|&k| curve.values[k].log_abs).collect();
    let model = if keep.len() >= MIN_FIT_POINTS { FitModel::SlopeLog } else { FitModel::PureSlope };
    let Ok((d, _, _, _)) = fit_logs(&taus, &logs, model) else {
        return out;
    };
    out.d_hat = Some(d);
    out.trend = Some(t0 - d);
    out.verdict = if d < t0 - margin {
        Verdict::Present
    } else if d > t0 + margin {
        Verdict::Absent
    } else {
        Verdict::Inconclusive
    };
    out
}

/// A-priori model bounds entering the size estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeParams<T> {
    /// Norm cap `M` on the boundary data.
    pub m_cap: T,
    /// `α ∨ β`.
    pub alpha_beta: T,
    /// Upper bound on the distance from the far end of the patch to `B`.
    pub d_far: T,
    /// Detector radius.
    pub radius: T,
    /// Also report the radius bound of a disk-shaped quench.
    pub disk: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeBound<T> {
    pub params: SizeParams<T>,
    pub d_hat: T,
    pub c0: T,
    /// `max_k τ_k^{1/2} e^{τ_k d̂} |I_k|`, approximating the lim sup.
    pub sup_rescaled: T,
    /// Lower bound on `m(Γ)^{1/2}`.
    pub sqrt_area_bound: T,
    /// Lower bound on `m(Γ)`.
    pub area_bound: T,
    /// Lower bound on the radius of a disk-shaped quench.
    pub disk_radius_bound: Option<T>,
}

/// `m(Γ)^{1/2} ≥ max_k [τ_k^{1/2} e^{τ_k d̂}|I_k|] / c₀` with
/// `c₀ = (M/√2)(α ∨ β)(D_far + 2r)/d̂`.
pub fn size_lower_bound<T: Real>(curve: &IndicatorCurve<T>, fit: &DistanceFit<T>, params: SizeParams<T>) -> Result<SizeBound<T>> {
    for (name, x) in [
        ("M", params.m_cap),
        ("alpha v beta", params.alpha_beta),
        ("D_far", params.d_far),
        ("r", params.radius),
    ] {
        if !(x > T::zero() && x.is_finite()) {
            return Err(Error::invalid(format!("size bound parameter {name} must be positive, got {x}")));
        }
    }
    if !(fit.d_hat > T::zero()) {
        return Err(Error::invalid("size bound needs a positive fitted distance"));
    }
    let d = fit.d_hat;
    let c0 = params.m_cap / T::SQRT_2() * params.alpha_beta * (params.d_far + T::lit(2.0) * params.radius) / d;
    let half = T::lit(0.5);
    let log_sup = curve
        .taus
        .iter()
        .zip(&curve.values)
        .filter(|(_, v)| !v.is_zero())
        .map(|(&tau, v)| half * tau.ln() + tau * d + v.log_abs)
        .fold(T::neg_infinity(), T::max);
    let sup = log_sup.exp();
    let sqrt_area = (log_sup - c0.ln()).exp();
    Ok(SizeBound {
        params,
        d_hat: d,
        c0,
        sup_rescaled: sup,
        sqrt_area_bound: sqrt_area,
        area_bound: sqrt_area * sqrt_area,
        disk_radius_bound: params.disk.then(|| sqrt_area / T::PI().sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indicator::{CurveMeta, Side, SignedLog};
    use proptest::prelude::*;

    fn meta() -> CurveMeta {
        CurveMeta {
            side: Side::Measurement,
            t0: 4.0,
            dt: 0.01,
            sphere_grid: None,
            patch_grid: None,
        }
    }

    fn model_curve(d: f64, gamma: f64, c: f64, taus: &[f64]) -> IndicatorCurve<f64> {
        let values = taus
            .iter()
            .map(|&t| SignedLog {
                sign: 1,
                log_abs: -d * t - gamma * t.ln() + c,
            })
            .collect();
        IndicatorCurve::from_values(taus.to_vec(), values, meta()).unwrap()
    }

    fn ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_model_curve() {
        let c = model_curve(2.0, 4.0, 0.0, &ladder(10.0, 30.0, 5));
        let f = extract_distance(&c, FitModel::SlopeLog).unwrap();
        assert!((f.d_hat - 2.0).abs() < 1e-10);
        assert!((f.gamma - 4.0).abs() < 1e-8);
        assert!(f.residual_rms < 1e-10);
    }

    #[test]
    fn pure_slope_bias_shrinks_to_the_right() {
        let left = extract_distance(&model_curve(2.0, 3.0, 0.0, &ladder(10.0, 20.0, 6)), FitModel::PureSlope).unwrap();
        let right = extract_distance(&model_curve(2.0, 3.0, 0.0, &ladder(40.0, 50.0, 6)), FitModel::PureSlope).unwrap();
        assert!(left.d_hat > right.d_hat && right.d_hat > 2.0);
        // bias ≈ γ/τ̄
        assert!((left.d_hat - 2.0 - 3.0 / 15.0).abs() < 0.01);
    }

    #[test]
    fn fit_rejects_short_or_mixed_curves() {
        let c = model_curve(1.0, 0.0, 0.0, &ladder(1.0, 3.0, 3));
        assert!(matches!(extract_distance(&c, FitModel::SlopeLog), Err(Error::TooFewPoints { .. })));
        let mut c = model_curve(1.0, 0.0, 0.0, &ladder(1.0, 3.0, 5));
        c.values[2].sign = -1;
        assert!(matches!(extract_distance(&c, FitModel::SlopeLog), Err(Error::InconsistentSigns)));
    }

    #[test]
    fn negative_slope_is_clipped() {
        let c = model_curve(-0.5, 0.0, 0.0, &ladder(1.0, 3.0, 5));
        let f = extract_distance(&c, FitModel::PureSlope).unwrap();
        assert_eq!(f.d_hat, 0.0);
        assert!(f.clipped);
    }

    #[test]
    fn presence_cases() {
        let zero = IndicatorCurve::from_values(ladder(5.0, 20.0, 8), vec![SignedLog::zero(); 8], meta()).unwrap();
        assert_eq!(presence_test(&zero, 4.0, 0.0).verdict, Verdict::Absent);
        let c = model_curve(2.0, 3.0, 0.0, &ladder(5.0, 20.0, 8));
        let p = presence_test(&c, 4.0, 0.0);
        assert_eq!(p.verdict, Verdict::Present);
        assert!((p.d_hat.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(presence_test(&c, 1.5, 0.0).verdict, Verdict::Absent);
        assert_eq!(presence_test(&c, 2.02, 0.0).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn size_bound_cases() {
        let c = model_curve(2.0, 3.0, 0.0, &ladder(10.0, 20.0, 6));
        let f = extract_distance(&c, FitModel::SlopeLog).unwrap();
        let p = SizeParams {
            m_cap: 10.0,
            alpha_beta: 4.0,
            d_far: 3.0,
            radius: 1.0,
            disk: true,
        };
        let b = size_lower_bound(&c, &f, p).unwrap();
        let b2 = size_lower_bound(&c, &f, SizeParams { m_cap: 20.0, ..p }).unwrap();
        assert!((b2.sqrt_area_bound * 2.0 - b.sqrt_area_bound).abs() < 1e-12 * b.sqrt_area_bound);
        assert!((b.disk_radius_bound.unwrap() - b.sqrt_area_bound / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        let zero = IndicatorCurve::from_values(ladder(10.0, 20.0, 6), vec![SignedLog::zero(); 6], meta()).unwrap();
        assert_eq!(size_lower_bound(&zero, &f, p).unwrap().area_bound, 0.0);
        assert!(size_lower_bound(&c, &f, SizeParams { m_cap: 0.0, ..p }).is_err());
    }

    proptest! {
        #[test]
        fn fit_recovers_own_model(d in 0.1..5.0f64, gamma in -2.0..6.0f64, c in -50.0..50.0f64, lo in 1.0..20.0f64, span in 5.0..40.0f64) {
            let curve = model_curve(d, gamma, c, &ladder(lo, lo + span, 8));
            let f = extract_distance(&curve, FitModel::SlopeLog).unwrap();
            prop_assert!((f.d_hat - d).abs() < 1e-10, "d {} vs {}", f.d_hat, d);
            prop_assert!(f.residual_rms < 1e-10);
        }

        #[test]
        fn fit_is_scale_invariant(k in -300.0..300.0f64, d in 0.5..4.0f64) {
            let a = model_curve(d, 3.0, 0.0, &ladder(10.0, 40.0, 8));
            let b = model_curve(d, 3.0, k, &ladder(10.0, 40.0, 8));
            let fa = extract_distance(&a, FitModel::SlopeLog).unwrap();
            let fb = extract_distance(&b, FitModel::SlopeLog).unwrap();
            prop_assert!((fa.d_hat - fb.d_hat).abs() < 1e-10);
            prop_assert!((fa.gamma - fb.gamma).abs() < 1e-8);
            prop_assert!((fb.intercept - fa.intercept - k).abs() < 1e-6);
        }

        #[test]
        fn presence_monotone_in_t0(d in 0.5..4.0f64, t0 in 0.1..10.0f64, extra in 0.0..5.0f64) {
            let c = model_curve(d, 2.0, 0.0, &ladder(5.0, 30.0, 8));
            let before = presence_test(&c, t0, 0.0).verdict;
            let after = presence_test(&c, t0 + extra, 0.0).verdict;
            prop_assert!(!(before == Verdict::Present && after == Verdict::Absent));
        }
    }
}
