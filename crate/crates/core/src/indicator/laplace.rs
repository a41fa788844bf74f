//! Product integration of `∫₀^{T₀} e^{−τs} u(s) ds` for piecewise-linear
//! `u` on a uniform grid.

use crate::real::{pairwise_sum, Real};

/// Per-interval weights `(A, B)` with
/// `∫₀^h e^{−τσ}(u₀(1 − σ/h) + u₁σ/h) dσ = A u₀ + B u₁`.
pub fn interval_weights<T: Real>(tau: T, h: T) -> (T, T) {
    let z = tau * h;
    if z < T::lit(0.25) {
        // series in z: (1 − e^{−z})/z = Σ (−z)^n/(n+1)!,
        // (1 − e^{−z}(1 + z))/z² = Σ (−z)^n/(n!(n+2))
        let mut total = T::zero();
        let mut b = T::zero();
        let mut fact = T::one();
        let mut pow = T::one();
        for n in 0..24usize {
            if n > 0 {
                fact = fact * T::from_count(n);
                pow = pow * (-z);
            }
            total = total + pow / (fact * T::from_count(n + 1));
            b = b + pow / (fact * T::from_count(n + 2));
        }
        (h * (total - b), h * b)
    } else {
        let e = (-z).exp();
        let total = (T::one() - e) / tau;
        let b = (T::one() - e * (T::one() + z)) / (tau * z);
        (total - b, b)
    }
}

/// `∫₀^{T₀} e^{−τs} u(s) ds` for samples `u_k = u(k h)`, exact when `u` is
/// piecewise linear between samples.
pub fn time_laplace<T: Real>(series: &[T], h: T, tau: T) -> T {
    time_laplace_shifted(series, h, tau, 0)
}

/// `e^{τ t_j} ∫_{t_j}^{T₀} e^{−τs} u(s) ds` with `j = start`: the transform
/// rescaled by the first retained sample time so that late arrivals stay
/// representable at large `τ`.
pub fn time_laplace_shifted<T: Real>(series: &[T], h: T, tau: T, start: usize) -> T {
    if series.len() < 2 || start + 1 >= series.len() {
        return T::zero();
    }
    let (a, b) = interval_weights(tau, h);
    let terms: Vec<T> = (start..series.len() - 1)
        .map(|k| {
            let decay = (-tau * h * T::from_count(k - start)).exp();
            decay * (a * series[k] + b * series[k + 1])
        })
        .collect();
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_series_is_exact() {
        let u = vec![1.0; 101];
        for tau in [0.01, 1.0, 37.0, 1e3] {
            let v = time_laplace(&u, 0.04, tau);
            let exact = (1.0 - (-tau * 4.0f64).exp()) / tau;
            assert!((v - exact).abs() <= 1e-14 * exact, "tau={tau}");
        }
    }

    #[test]
    fn linear_series_reference_value() {
        let n = 10;
        let u: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let v = time_laplace(&u, 0.1, 1.0);
        assert!((v - (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-15);
        assert!((v - 0.264241).abs() < 1e-6);
    }

    #[test]
    fn floor_profile_transform_equals_bound() {
        let mu = 0.8;
        let u = vec![mu; 401];
        let tau = 12.5;
        let v = time_laplace(&u, 0.01, tau);
        let bound = mu * (1.0 - (-tau * 4.0f64).exp()) / tau;
        assert!((v - bound).abs() < 1e-15);
    }

    #[test]
    fn weights_continuous_across_series_switch() {
        let (a0, b0) = interval_weights(0.25 - 1e-15, 1.0f64);
        let (a1, b1) = interval_weights(0.25, 1.0f64);
        assert!((a0 - a1).abs() < 1e-14 && (b0 - b1).abs() < 1e-14);
    }

    #[test]
    fn shift_rescales_exactly() {
        let u: Vec<f64> = (0..50).map(|k| if k < 20 { 0.0 } else { (k - 20) as f64 * 0.3 + 1.0 }).collect();
        let h = 0.05;
        let tau = 9.0;
        let full = time_laplace(&u, h, tau);
        let shifted = time_laplace_shifted(&u, h, tau, 19);
        let back = shifted * (-tau * 19.0 * h).exp();
        assert!((full - back).abs() < 1e-14 * full.abs());
    }

    proptest! {
        #[test]
        fn exact_on_linear_for_any_step(a in -5.0..5.0f64, b in -5.0..5.0f64, tau in 1e-3..200.0f64, h in 1e-3..1.0f64, n in 1usize..200) {
            let u: Vec<f64> = (0..=n).map(|k| a + b * k as f64 * h).collect();
            let t0 = n as f64 * h;
            let e = (-tau * t0).exp();
            // ∫₀^{T₀} e^{−τs}(a + bs) ds
            let exact = a * (1.0 - e) / tau + b * (1.0 - e * (1.0 + tau * t0)) / (tau * tau);
            let v = time_laplace(&u, h, tau);
            let scale = (a.abs() + b.abs() * t0) / tau;
            prop_assert!((v - exact).abs() <= 1e-12 * scale.max(1e-300), "{} vs {}", v, exact);
        }
    }
}
