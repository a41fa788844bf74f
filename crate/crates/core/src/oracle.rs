//! Brute-force oracle suites behind the `oracle` command: closed-form
//! potentials against quadrature, and Laplace-method decay rates.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{laplace_integral, rate_estimate, rescaled_surface_potential, LaplaceProblem};
use crate::error::{Error, Result};
use crate::geometry::{DetectorBall, ParamPatch, ParamRect, Point3, Vec3};
use crate::potentials::oracle::v_quadrature_scaled;
use crate::potentials::{pointwise_band, BallPotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Potentials,
    Asymptotics,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potentials" => Ok(Suite::Potentials),
            "asymptotics" => Ok(Suite::Asymptotics),
            "all" => Ok(Suite::All),
            other => Err(Error::invalid(format!("unknown oracle {other:?} (potentials, asymptotics or all)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub suite: &'static str,
    pub check: String,
    pub achieved: f64,
    pub target: String,
    pub pass: bool,
}

fn row(suite: &'static str, check: impl Into<String>, achieved: f64, target: impl Into<String>, pass: bool) -> OracleRow {
    OracleRow {
        suite,
        check: check.into(),
        achieved,
        target: target.into(),
        pass,
    }
}

/// Evaluation points on a spiral over the sphere, radii in `[1.05r, 4r]`.
fn spiral_points(center: Point3<f64>, r: f64, n: usize) -> Vec<Point3<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let rho = r * (1.05 + 2.95 * ((k * 7) % n) as f64 / n as f64);
            center + Vec3::new(s * phi.cos(), s * phi.sin(), z) * rho
        })
        .collect()
}

pub fn potentials_suite() -> Result<Vec<OracleRow>> {
    const S: &str = "potentials";
    let ball = DetectorBall::new(Point3::new(0.3, -0.2, 0.5), 1.0)?;
    let mut rows = Vec::new();
    for tau in [0.5, 2.0, 10.0, 40.0] {
        let bp = BallPotential::new(ball, tau)?;
        let errs: Vec<Result<f64>> = spiral_points(ball.center(), 1.0, 24)
            .par_iter()
            .map(|&x| {
                let rho = x.distance(ball.center());
                let exact = (bp.log_v_radial(rho)? + tau * (rho - 1.0)).exp();
                let q = v_quadrature_scaled(&bp, x, 1e-10)?;
                Ok((q.value - exact).abs() / exact)
            })
            .collect();
        let worst = errs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
        rows.push(row(S, format!("closed form vs quadrature, tau = {tau}, 24 points"), worst, "rel < 1e-6", worst < 1e-6));
    }
    let bp = BallPotential::new(DetectorBall::new(Point3::zero(), 1.0)?, 1e-6f64)?;
    let newton: f64 = bp.v_radial(2.0)?;
    let e = (newton - 1.0 / 6.0).abs() * 6.0;
    rows.push(row(S, "small-tau limit r^3/(3 rho) at rho = 2", e, "rel < 1e-5", e < 1e-5));
    let disk = ParamPatch::disk(Point3::zero(), Vec3::new(0.0, 0.0, 1.0), 1.0)?;
    let det = DetectorBall::new(Point3::new(0.0, 0.0, 3.0), 1.0)?;
    let band: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|&t| pointwise_band(&disk, &det, t, (32, 32)).map(|c| c.min_value))
        .collect::<Result<_>>()?;
    let (lo, hi) = band.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = hi / lo - 1.0;
    rows.push(row(
        S,
        "min tau^2 e^{tau d_e} v over disk, tau in [20,80]",
        spread,
        "positive, spread < 0.2",
        lo > 0.0 && spread < 0.2,
    ));
    Ok(rows)
}

fn ladder_rate(prob: &LaplaceProblem<f64>) -> Result<f64> {
    let vals: Vec<(f64, f64)> = [20.0, 40.0, 80.0, 160.0]
        .iter()
        .map(|&t| laplace_integral(prob, t, 1e-10).map(|e| (t, e.value)))
        .collect::<Result<_>>()?;
    Ok(rate_estimate(&vals, prob.h_min)?.exponent)
}

fn band(patch: &ParamPatch<f64>, ball: &DetectorBall<f64>, delta: f64) -> Result<(f64, f64)> {
    let v: Vec<f64> = [20.0, 40.0, 60.0, 80.0]
        .iter()
        .map(|&t| rescaled_surface_potential(patch, ball, t, delta, 1e-8).map(|e| e.value))
        .collect::<Result<_>>()?;
    Ok(v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x))))
}

pub fn asymptotics_suite() -> Result<Vec<OracleRow>> {
    const S: &str = "asymptotics";
    let mut rows = Vec::new();
    let interior = LaplaceProblem::new(
        ParamRect::new((-1.0, 1.0), (-1.0, 1.0)),
        Arc::new(|s: f64, t: f64| s * s + t * t),
        Arc::new(|_, _| 1.0),
        0.0,
    )?;
    let a = ladder_rate(&interior)?;
    rows.push(row(S, "interior nondegenerate rate", a, "-1.00 +- 0.02", (a + 1.0).abs() <= 0.02));
    let boundary = LaplaceProblem::new(
        ParamRect::new((0.0, 1.0), (-1.0, 1.0)),
        Arc::new(|s: f64, t: f64| s + t * t),
        Arc::new(|_, _| 1.0),
        0.0,
    )?;
    let b = ladder_rate(&boundary)?;
    rows.push(row(S, "boundary noncritical rate", b, "-1.50 +- 0.03", (b + 1.5).abs() <= 0.03));
    let flat = LaplaceProblem::new(ParamRect::new((0.0, 1.0), (0.0, 1.0)), Arc::new(|_, _| 0.0), Arc::new(|_, _| 1.0), 0.0)?;
    let c = ladder_rate(&flat)?;
    rows.push(row(S, "constant h rate", c, "0 +- 1e-10", c.abs() <= 1e-10));
    let j = laplace_integral(&interior, 100.0, 1e-10)?.value * 100.0;
    let e = (j - std::f64::consts::PI).abs();
    rows.push(row(S, "tau J(tau) at tau = 100 vs pi", e, "< 1e-3", e < 1e-3));
    let ball = DetectorBall::new(Point3::new(0.0, 0.0, 3.0), 1.0)?;
    let disk = ParamPatch::disk(Point3::zero(), Vec3::new(0.0, 0.0, 1.0), 1.0)?;
    let (lo, hi) = band(&disk, &ball, 3.0)?;
    rows.push(row(S, "disk tau^3 e^{tau d} int v, tau in [20,80]", hi / lo, "positive, ratio < 2", lo > 0.0 && hi / lo < 2.0));
    let half = ParamPatch::disk_segment(Point3::zero(), Vec3::new(0.0, 0.0, 1.0), 1.0, 0.5)?;
    let (lo, hi) = band(&half, &ball, 3.5)?;
    rows.push(row(
        S,
        "half-disk tau^3.5 e^{tau d} int v, tau in [20,80]",
        hi / lo,
        "positive, ratio < 2",
        lo > 0.0 && hi / lo < 2.0,
    ));
    Ok(rows)
}

pub fn run_oracle(which: Suite) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    if matches!(which, Suite::Potentials | Suite::All) {
        rows.extend(potentials_suite()?);
    }
    if matches!(which, Suite::Asymptotics | Suite::All) {
        rows.extend(asymptotics_suite()?);
    }
    Ok(rows)
}

pub fn format_table(rows: &[OracleRow]) -> String {
    let w = rows.iter().map(|r| r.check.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:<12} {:<w$} {:>12} {:<22} {}\n", "suite", "check", "achieved", "target", "result");
    for r in rows {
        s.push_str(&format!(
            "{:<12} {:<w$} {:>12.4e} {:<22} {}\n",
            r.suite,
            r.check,
            r.achieved,
            r.target,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass() {
        let rows = run_oracle(Suite::All).unwrap();
        let table = format_table(&rows);
        assert!(rows.iter().all(|r| r.pass), "{table}");
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!("nope".parse::<Suite>().is_err());
    }
}
