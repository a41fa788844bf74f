//! Laplace-method oracle: adaptive evaluation of
//! `J(τ) = ∬_R e^{−τh(s,t)} k(s,t) ds dt` and estimation of its algebraic
//! decay rate once the exponential factor `e^{−τ h_min}` is removed.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{classify_minimum, set_distance, DetectorBall, MinClassification, MinimumKind, ParamPatch, ParamRect};
use crate::inversion::lstsq;
use crate::potentials::BallPotential;
use crate::quadrature::{kronrod15, Estimate, Tolerance};
use crate::real::{pairwise_sum, Real};

pub type Field2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Initial cells per axis.
pub const INITIAL_CELLS: usize = 8;
/// Cells where `τ(h − h_min) > FOCUS_EXPONENT` at every node are split only
/// when nothing closer to the minimizer is left to refine.
pub const FOCUS_EXPONENT: f64 = 30.0;
/// Default cap on the number of cells.
pub const MAX_CELLS: usize = 20_000;

#[derive(Clone)]
pub struct LaplaceProblem<T> {
    pub rect: ParamRect<T>,
    pub h: Field2<T>,
    pub k: Field2<T>,
    pub h_min: T,
}

impl<T> fmt::Debug for LaplaceProblem<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceProblem")
            .field("rect", &self.rect)
            .field("h_min", &self.h_min)
            .finish_non_exhaustive()
    }
}

impl<T: Real> LaplaceProblem<T> {
    pub fn new(rect: ParamRect<T>, h: Field2<T>, k: Field2<T>, h_min: T) -> Result<Self> {
        if !(rect.width() > T::zero() && rect.height() > T::zero()) {
            return Err(Error::invalid("Laplace rectangle must have positive extent"));
        }
        if !h_min.is_finite() {
            return Err(Error::invalid("h_min must be finite"));
        }
        Ok(LaplaceProblem { rect, h, k, h_min })
    }

    /// `h = |φ − p|`, `k = |φ_s × φ_t|`, with `h_min` and the minimizer
    /// classification taken from the geometry module.
    pub fn from_patch(patch: &ParamPatch<T>, ball: &DetectorBall<T>, grid: (usize, usize)) -> Result<(Self, MinClassification<T>)> {
        let sd = set_distance(patch, ball, grid)?;
        let class = classify_minimum(patch, ball, sd.argmin);
        let (ph, pk) = (patch.clone(), patch.clone());
        let p = ball.center();
        let h: Field2<T> = Arc::new(move |s, t| (ph.point(s, t) - p).norm());
        let k: Field2<T> = Arc::new(move |s, t| pk.jacobian(s, t));
        let prob = LaplaceProblem::new(patch.domain(), h, k, sd.distance + ball.radius())?;
        Ok((prob, class))
    }
}

/// Expected slope of `log(J e^{τ h_min})` against `log τ`.
pub fn expected_rate(kind: MinimumKind) -> Option<f64> {
    match kind {
        MinimumKind::InteriorNondegenerate => Some(-1.0),
        MinimumKind::BoundaryNoncritical => Some(-1.5),
        MinimumKind::Degenerate => None,
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell<T> {
    s: (T, T),
    t: (T, T),
    value: T,
    error: T,
    far: bool,
}

fn tensor_gk<T: Real>(f: &(impl Fn(T, T) -> (T, T) + Sync), s: (T, T), t: (T, T), focus: T) -> Cell<T> {
    let rule = kronrod15();
    let half = T::lit(0.5);
    let (hs, ms) = ((s.1 - s.0) * half, (s.0 + s.1) * half);
    let (ht, mt) = ((t.1 - t.0) * half, (t.0 + t.1) * half);
    let mut k = T::zero();
    let mut g = T::zero();
    let mut expo = T::infinity();
    for &(xs, wks, wgs) in &rule {
        let ss = ms + hs * T::lit(xs);
        let mut kr = T::zero();
        let mut gr = T::zero();
        for &(xt, wkt, wgt) in &rule {
            let (v, e) = f(ss, mt + ht * T::lit(xt));
            expo = expo.min(e);
            kr = kr + T::lit(wkt) * v;
            gr = gr + T::lit(wgt) * v;
        }
        k = k + T::lit(wks) * kr;
        g = g + T::lit(wgs) * gr;
    }
    let area = hs * ht;
    Cell {
        s,
        t,
        value: k * area,
        error: ((k - g) * area).abs(),
        far: expo > focus,
    }
}

/// Adaptive tensor-product G7/K15 cubature of `f` over `rect`, where `f`
/// returns `(value, exponent)`; the exponent decides whether a cell lies in
/// the focus region.
pub fn adaptive_cubature<T: Real>(
    f: impl Fn(T, T) -> (T, T) + Sync,
    rect: ParamRect<T>,
    tol: Tolerance<T>,
    focus: T,
) -> Result<Estimate<T>> {
    let n0 = INITIAL_CELLS;
    let ds = rect.width() / T::from_count(n0);
    let dt = rect.height() / T::from_count(n0);
    let seeds: Vec<((T, T), (T, T))> = (0..n0 * n0)
        .map(|c| {
            let (i, j) = (c / n0, c % n0);
            let s0 = rect.s.0 + ds * T::from_count(i);
            let t0 = rect.t.0 + dt * T::from_count(j);
            let s1 = if i + 1 == n0 { rect.s.1 } else { s0 + ds };
            let t1 = if j + 1 == n0 { rect.t.1 } else { t0 + dt };
            ((s0, s1), (t0, t1))
        })
        .collect();
    let mut cells: Vec<Cell<T>> = seeds.par_iter().map(|&(s, t)| tensor_gk(&f, s, t, focus)).collect();
    let per_cell = 225;
    let mut evaluations = cells.len() * per_cell;
    loop {
        let value = pairwise_sum(&cells.iter().map(|c| c.value).collect::<Vec<_>>());
        let error = pairwise_sum(&cells.iter().map(|c| c.error).collect::<Vec<_>>());
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || error == T::zero() {
            return Ok(Estimate { value, error, evaluations });
        }
        if cells.len() >= tol.max_intervals {
            return Err(Error::NoConvergence {
                what: "Laplace cubature",
                estimate: value.to_f64_lossy(),
                error: error.to_f64_lossy(),
                cells: cells.len(),
            });
        }
        let share = target / T::from_count(cells.len());
        let mut split: Vec<usize> = (0..cells.len()).filter(|&i| !cells[i].far && cells[i].error > share).collect();
        if split.is_empty() {
            split = (0..cells.len()).filter(|&i| cells[i].error > share).collect();
        }
        if split.is_empty() {
            let worst = (0..cells.len())
                .max_by(|&a, &b| cells[a].error.partial_cmp(&cells[b].error).unwrap_or(std::cmp::Ordering::Equal))
                .expect("nonempty cells");
            split.push(worst);
        }
        let room = (tol.max_intervals - cells.len()) / 3 + 1;
        split.truncate(room);
        let children: Vec<((T, T), (T, T))> = split
            .iter()
            .flat_map(|&i| {
                let c = cells[i];
                let sm = (c.s.0 + c.s.1) * T::lit(0.5);
                let tm = (c.t.0 + c.t.1) * T::lit(0.5);
                [
                    ((c.s.0, sm), (c.t.0, tm)),
                    ((c.s.0, sm), (tm, c.t.1)),
                    ((sm, c.s.1), (c.t.0, tm)),
                    ((sm, c.s.1), (tm, c.t.1)),
                ]
            })
            .collect();
        let fresh: Vec<Cell<T>> = children.par_iter().map(|&(s, t)| tensor_gk(&f, s, t, focus)).collect();
        evaluations += fresh.len() * per_cell;
        let mut drop = vec![false; cells.len()];
        for &i in &split {
            drop[i] = true;
        }
        let mut next: Vec<Cell<T>> = cells.iter().zip(&drop).filter(|(_, d)| !**d).map(|(c, _)| *c).collect();
        next.extend(fresh);
        cells = next;
    }
}

/// `J(τ) e^{τ h_min}`, which stays O(τ^{−1}) instead of underflowing.
pub fn laplace_integral_scaled<T: Real>(prob: &LaplaceProblem<T>, tau: T, tol: T) -> Result<Estimate<T>> {
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let (h, k, h_min) = (&prob.h, &prob.k, prob.h_min);
    let f = move |s: T, t: T| {
        let e = tau * (h(s, t) - h_min);
        ((-e).exp() * k(s, t), e)
    };
    adaptive_cubature(
        f,
        prob.rect,
        Tolerance::relative(tol).with_max_intervals(MAX_CELLS),
        T::lit(FOCUS_EXPONENT),
    )
}

/// `J(τ)` with relative tolerance `tol`.
pub fn laplace_integral<T: Real>(prob: &LaplaceProblem<T>, tau: T, tol: T) -> Result<Estimate<T>> {
    let e = laplace_integral_scaled(prob, tau, tol)?;
    let f = (-tau * prob.h_min).exp();
    Ok(Estimate {
        value: e.value * f,
        error: e.error * f,
        evaluations: e.evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate<T> {
    /// Slope of `log(J e^{τ h_min})` against `log τ`.
    pub exponent: T,
    pub intercept: T,
    pub residual_rms: T,
}

/// Least-squares exponent from `(τ_k, log(J_k e^{τ_k h_min}))`.
pub fn rate_from_logs<T: Real>(taus: &[T], logs: &[T]) -> Result<RateEstimate<T>> {
    if taus.len() != logs.len() {
        return Err(Error::invalid("rate estimate needs matching tau and value lists"));
    }
    if taus.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: taus.len() });
    }
    if !taus.iter().chain(logs).all(|x| x.is_finite()) || taus.iter().any(|&t| !(t > T::zero())) {
        return Err(Error::invalid("rate estimate needs positive tau and finite values"));
    }
    let n = T::from_count(taus.len());
    let mean = taus.iter().map(|t| t.ln()).sum::<T>() / n;
    let a: Vec<T> = taus.iter().flat_map(|t| [T::one(), t.ln() - mean]).collect();
    let sol = lstsq(&a, logs, 2)?;
    let rms = (sol.residuals.iter().map(|r| *r * *r).sum::<T>() / n).sqrt();
    Ok(RateEstimate {
        exponent: sol.x[1],
        intercept: sol.x[0] - sol.x[1] * mean,
        residual_rms: rms,
    })
}

/// Exponent of `J(τ) e^{τ h_min}` from raw `(τ_k, J_k)` pairs.
pub fn rate_estimate<T: Real>(values: &[(T, T)], h_min: T) -> Result<RateEstimate<T>> {
    if let Some(&(tau, j)) = values.iter().find(|(_, j)| !(*j > T::zero())) {
        return Err(Error::invalid(format!("J({tau}) = {j} is not positive")));
    }
    let taus: Vec<T> = values.iter().map(|v| v.0).collect();
    let logs: Vec<T> = values.iter().map(|&(t, j)| j.ln() + t * h_min).collect();
    rate_from_logs(&taus, &logs)
}

/// `τ^δ e^{τ d} ∬_Γ v dS` with `d = d_e(Γ, B)`, the quantity bounded below
/// by Laplace's method.
pub fn rescaled_surface_potential<T: Real>(
    patch: &ParamPatch<T>,
    ball: &DetectorBall<T>,
    tau: T,
    delta: T,
    tol: T,
) -> Result<Estimate<T>> {
    let sd = set_distance(patch, ball, (33, 33))?;
    let bp = BallPotential::new(*ball, tau)?;
    let p = ball.center();
    let r = ball.radius();
    let d = sd.distance;
    let shift = delta * tau.ln();
    let failed = std::sync::atomic::AtomicBool::new(false);
    let f = |s: T, t: T| {
        let x = patch.point(s, t);
        let rho = (x - p).norm();
        let e = tau * (rho - r - d);
        match bp.log_v_radial(rho) {
            Ok(lv) => ((lv + tau * d + shift).exp() * patch.jacobian(s, t), e),
            Err(_) => {
                failed.store(true, std::sync::atomic::Ordering::Relaxed);
                (T::zero(), e)
            }
        }
    };
    let est = adaptive_cubature(
        f,
        patch.domain(),
        Tolerance::relative(tol).with_max_intervals(MAX_CELLS),
        T::lit(FOCUS_EXPONENT),
    )?;
    if failed.into_inner() {
        return Err(Error::BallIntersectsPatch { clearance: d.to_f64_lossy() });
    }
    Ok(est)
}
