use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{indicator_gamma, indicator_measurement, SignedLog};
use crate::error::{Error, Result};
use crate::forward::{boundary_profiles, BoundaryData, MeasurementRecord, TimeGrid};
use crate::geometry::DetectorBall;
use crate::real::Real;

/// Largest admissible `τ_max · d`, keeping `e^{τd} I` representable.
pub const MAX_TAU_DISTANCE: f64 = 600.0;
/// Relative error above which a ladder point is flagged.
pub const FLAG_RELATIVE_ERROR: f64 = 0.1;

/// τ ladder.
#[derive(Clone, Debug, PartialEq)]
pub enum LadderSpec<T> {
    /// `count` equally spaced values from `tau_min` to `tau_max`.
    Linear { tau_min: T, tau_max: T, count: usize },
    Explicit(Vec<T>),
}

impl<T: Real> LadderSpec<T> {
    /// `τ ∈ [10/d, 40/d]`, 8 points.
    pub fn default_for(d_guess: T) -> Self {
        LadderSpec::Linear {
            tau_min: T::lit(10.0) / d_guess,
            tau_max: T::lit(40.0) / d_guess,
            count: 8,
        }
    }

    /// Ladder values; rejects empty, non-positive or non-increasing ladders.
    pub fn taus(&self) -> Result<Vec<T>> {
        let taus = match self {
            LadderSpec::Linear { tau_min, tau_max, count } => match *count {
                0 => Vec::new(),
                1 => vec![*tau_min],
                n => (0..n)
                    .map(|k| *tau_min + (*tau_max - *tau_min) * T::from_count(k) / T::from_count(n - 1))
                    .collect(),
            },
            LadderSpec::Explicit(v) => v.clone(),
        };
        if taus.is_empty() {
            return Err(Error::invalid("tau ladder is empty"));
        }
        if !taus.iter().all(|&t| t > T::zero() && t.is_finite()) {
            return Err(Error::invalid("tau ladder values must be positive and finite"));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("tau ladder must be strictly increasing"));
        }
        Ok(taus)
    }

    /// Checks `τ_max · d ≤ 600`.
    pub fn validate(&self, d_guess: T) -> Result<Vec<T>> {
        let taus = self.taus()?;
        let top = *taus.last().expect("nonempty ladder");
        if top * d_guess > T::lit(MAX_TAU_DISTANCE) {
            return Err(Error::invalid(format!(
                "tau_max * d = {} exceeds {MAX_TAU_DISTANCE}",
                top * d_guess
            )));
        }
        Ok(taus)
    }
}

/// Patch-side data for the dominant-term indicator.
#[derive(Clone, Debug)]
pub struct GammaSource<T> {
    pub data: BoundaryData<T>,
    pub ball: DetectorBall<T>,
    pub grid: (usize, usize),
    pub times: TimeGrid<T>,
}

pub enum IndicatorSource<'a, T> {
    Measurement(&'a MeasurementRecord<T>),
    Gamma(&'a GammaSource<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Measurement,
    Gamma,
}

/// Quadrature resolutions behind a curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub side: Side,
    pub t0: f64,
    pub dt: f64,
    /// `(n_θ, n_φ)` of the detector grid, measurement side.
    pub sphere_grid: Option<(usize, usize)>,
    /// Patch grid, gamma side.
    pub patch_grid: Option<(usize, usize)>,
}

/// Indicator values over a τ ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorCurve<T> {
    pub taus: Vec<T>,
    pub values: Vec<SignedLog<T>>,
    /// Estimated relative quadrature error per point.
    pub rel_error: Vec<T>,
    pub flagged: Vec<bool>,
    pub meta: CurveMeta,
}

impl<T: Real> IndicatorCurve<T> {
    /// Curve from exact values with zero error estimates.
    pub fn from_values(taus: Vec<T>, values: Vec<SignedLog<T>>, meta: CurveMeta) -> Result<Self> {
        if taus.len() != values.len() {
            return Err(Error::invalid("ladder and values differ in length"));
        }
        LadderSpec::Explicit(taus.clone()).taus()?;
        let n = taus.len();
        Ok(IndicatorCurve {
            taus,
            values,
            rel_error: vec![T::zero(); n],
            flagged: vec![false; n],
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn t0(&self) -> T {
        T::lit(self.meta.t0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(SignedLog::is_zero)
    }

    /// Sub-curve with `τ ∈ [lo, hi]`.
    pub fn window(&self, lo: T, hi: T) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.taus[k] >= lo && self.taus[k] <= hi).collect();
        IndicatorCurve {
            taus: keep.iter().map(|&k| self.taus[k]).collect(),
            values: keep.iter().map(|&k| self.values[k]).collect(),
            rel_error: keep.iter().map(|&k| self.rel_error[k]).collect(),
            flagged: keep.iter().map(|&k| self.flagged[k]).collect(),
            meta: self.meta.clone(),
        }
    }
}

fn evaluate<T: Real>(source: &IndicatorSource<'_, T>, tau: T, coarse: Option<&CoarseSource<T>>) -> Result<(SignedLog<T>, T)> {
    let value = match source {
        IndicatorSource::Measurement(m) => indicator_measurement(m, tau)?,
        IndicatorSource::Gamma(g) => gamma_value(g, g.grid, tau)?,
    };
    let err = match coarse {
        Some(CoarseSource::Measurement(m)) => value.relative_difference(&indicator_measurement(m, tau)?),
        Some(CoarseSource::Gamma(g, res)) => value.relative_difference(&gamma_value(g, *res, tau)?),
        None => T::zero(),
    };
    Ok((value, err))
}

fn gamma_value<T: Real>(g: &GammaSource<T>, res: (usize, usize), tau: T) -> Result<SignedLog<T>> {
    let grid = g.data.patch.grid(res.0, res.1);
    let sb = boundary_profiles(&g.data, &grid, g.times)?;
    indicator_gamma(&sb, &g.ball, tau)
}

enum CoarseSource<T> {
    Measurement(MeasurementRecord<T>),
    Gamma(GammaSource<T>, (usize, usize)),
}

/// Evaluates the selected indicator on every ladder point, in parallel with
/// ordered collection. The error estimate compares against a coarser
/// quadrature: half the azimuths on `∂B`, or half the patch resolution.
pub fn indicator_curve<T: Real>(source: &IndicatorSource<'_, T>, ladder: &LadderSpec<T>) -> Result<IndicatorCurve<T>> {
    let taus = ladder.taus()?;
    let (meta, coarse) = match source {
        IndicatorSource::Measurement(m) => (
            CurveMeta {
                side: Side::Measurement,
                t0: m.t0().to_f64_lossy(),
                dt: m.times.dt.to_f64_lossy(),
                sphere_grid: Some((m.n_theta, m.n_phi)),
                patch_grid: None,
            },
            m.half_azimuth().map(CoarseSource::Measurement),
        ),
        IndicatorSource::Gamma(g) => (
            CurveMeta {
                side: Side::Gamma,
                t0: g.times.t0().to_f64_lossy(),
                dt: g.times.dt.to_f64_lossy(),
                sphere_grid: None,
                patch_grid: Some(g.grid),
            },
            Some(CoarseSource::Gamma((*g).clone(), ((g.grid.0 / 2).max(1), (g.grid.1 / 2).max(1)))),
        ),
    };
    let results: Vec<Result<(SignedLog<T>, T)>> = taus.par_iter().map(|&tau| evaluate(source, tau, coarse.as_ref())).collect();
    let mut values = Vec::with_capacity(taus.len());
    let mut rel_error = Vec::with_capacity(taus.len());
    for r in results {
        let (v, e) = r?;
        values.push(v);
        rel_error.push(e);
    }
    let flagged = rel_error.iter().map(|&e| !(e <= T::lit(FLAG_RELATIVE_ERROR))).collect();
    Ok(IndicatorCurve {
        taus,
        values,
        rel_error,
        flagged,
        meta,
    })
}

/// Values below this log-magnitude are left out of the `value` column.
const REPRESENTABLE_LOG: f64 = -700.0;

impl IndicatorCurve<f64> {
    /// Writes the CSV table (`tau,sign,log_abs,value,flag`) and a JSON
    /// sidecar with the metadata next to it (`.json` extension).
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record(["tau", "sign", "log_abs", "value", "flag"])?;
        for k in 0..self.len() {
            let v = &self.values[k];
            let value = if v.log_abs >= REPRESENTABLE_LOG || v.is_zero() {
                v.value().to_string()
            } else {
                String::new()
            };
            w.write_record([
                self.taus[k].to_string(),
                v.sign.to_string(),
                v.log_abs.to_string(),
                value,
                u8::from(self.flagged[k]).to_string(),
            ])?;
        }
        w.flush()?;
        let side = serde_json::json!({
            "meta": self.meta,
            "rel_error": self.rel_error,
        });
        let mut f = BufWriter::new(File::create(csv_path.with_extension("json"))?);
        serde_json::to_writer_pretty(&mut f, &side)?;
        writeln!(f)?;
        f.flush()?;
        Ok(())
    }

    pub fn read(csv_path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Side {
            meta: CurveMeta,
            rel_error: Vec<f64>,
        }
        let side: Side = serde_json::from_reader(File::open(csv_path.with_extension("json"))?)?;
        let mut rdr = csv::Reader::from_path(csv_path)?;
        let mut taus = Vec::new();
        let mut values = Vec::new();
        let mut flagged = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let bad = |msg: &str| Error::Parse {
                path: csv_path.to_path_buf(),
                line,
                msg: msg.to_string(),
            };
            let field = |k: usize| rec.get(k).ok_or_else(|| bad("missing column"));
            let tau: f64 = field(0)?.parse().map_err(|_| bad("bad tau"))?;
            let sign: i8 = field(1)?.parse().map_err(|_| bad("bad sign"))?;
            if !(-1..=1).contains(&sign) {
                return Err(bad("sign must be -1, 0 or 1"));
            }
            let log_abs: f64 = field(2)?.parse().map_err(|_| bad("bad log_abs"))?;
            let flag = field(4)? == "1";
            taus.push(tau);
            values.push(SignedLog { sign, log_abs });
            flagged.push(flag);
        }
        let mut curve = IndicatorCurve::from_values(taus, values, side.meta)?;
        if side.rel_error.len() == curve.len() {
            curve.rel_error = side.rel_error;
        }
        curve.flagged = flagged;
        Ok(curve)
    }
}
