//! Quadrature rules: Gauss–Legendre node sets and a globally adaptive
//! Gauss–Kronrod (G7/K15) integrator.

use crate::error::{Error, Result};
use crate::real::Real;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Builds the `n`-point rule by Newton iteration on `P_n`, in `f64`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        let terms: Vec<T> = self.mapped(a, b).map(|(x, w)| w * f(x)).collect();
        crate::real::pairwise_sum(&terms)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod abscissae on [0, 1); index 7 is the center. Odd indices carry the
// embedded 7-point Gauss rule.
pub(crate) const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
pub(crate) const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
pub(crate) const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod points on `[-1, 1]` with Kronrod weight and embedded
/// Gauss weight (zero for Kronrod-only points).
pub(crate) fn kronrod15() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        out[k] = (-XGK[k], WGK[k], wg);
        out[14 - k] = (XGK[k], WGK[k], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

/// Integral estimate with an error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Tolerances and limits for the adaptive integrators.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    pub max_intervals: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn relative(rel: T) -> Self {
        Tolerance {
            rel,
            abs: T::zero(),
            max_intervals: 2000,
        }
    }

    pub fn with_abs(mut self, abs: T) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut k = T::zero();
    let mut g = T::zero();
    for (x, wk, wg) in kronrod15() {
        let fx = f(mid + half * T::lit(x));
        k = k + T::lit(wk) * fx;
        g = g + T::lit(wg) * fx;
    }
    (k * half, ((k - g) * half).abs())
}

/// Globally adaptive G7/K15 quadrature of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the
/// summed error falls below `max(abs, rel * |value|)`. Hitting the interval
/// cap returns [`Error::NoConvergence`] carrying the achieved estimate.
pub fn adaptive_gk<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: Tolerance<T>) -> Result<Estimate<T>> {
    let (v0, e0) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let values: Vec<T> = intervals.iter().map(|iv| iv.2).collect();
        let errors: Vec<T> = intervals.iter().map(|iv| iv.3).collect();
        let value = crate::real::pairwise_sum(&values);
        let error = crate::real::pairwise_sum(&errors);
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || error == T::zero() {
            return Ok(Estimate {
                value,
                error,
                evaluations,
            });
        }
        if intervals.len() >= tol.max_intervals {
            return Err(Error::NoConvergence {
                what: "adaptive Gauss-Kronrod",
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                cells: intervals.len(),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = (lo + hi) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            // interval collapsed to machine resolution
            return Err(Error::NoConvergence {
                what: "adaptive Gauss-Kronrod",
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                cells: intervals.len() + 1,
            });
        }
        let (vl, el) = gk15(&f, lo, mid);
        let (vr, er) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
        // fixed order keeps the pairwise reduction reproducible
        intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    }
}
