//! Stage orchestration: simulate, indicator, invert, triangulate. Every
//! stage writes its artifacts so later stages can be rerun on their own.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{boundary_profiles, synth_measurement, MeasurementRecord, TimeGrid};
use crate::geometry::{alpha_beta, classify_minimum, set_distance, MinimumKind};
use crate::indicator::{indicator_curve, GammaSource, IndicatorCurve, IndicatorSource, LadderSpec};
use crate::inversion::{
    extract_distance, presence_test, size_lower_bound, triangulate, DetectorDistance, DistanceFit, FitModel, SizeParams, Verdict,
};
use crate::real::pairwise_sum;
use crate::scenario::LoadedScenario;

pub const REPORT_FORMAT: &str = "quenchloc-report-v1";
pub const REPORT_FILE: &str = "report.json";

/// Command-line overrides of scenario settings.
#[derive(Clone, Debug, Default)]
pub struct StageOptions {
    pub ladder: Option<LadderSpec<f64>>,
    pub model: Option<FitModel>,
}

pub fn record_stem(i: usize) -> String {
    format!("det{i}")
}

pub fn curve_path(out: &Path, i: usize) -> PathBuf {
    out.join(format!("det{i}_indicator.csv"))
}

pub fn gamma_curve_path(out: &Path, i: usize) -> PathBuf {
    out.join(format!("det{i}_gamma.csv"))
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

/// Synthesizes and writes one measurement record per detector.
pub fn run_simulate(sc: &LoadedScenario, out: &Path) -> Result<Vec<MeasurementRecord<f64>>> {
    ensure_dir(out)?;
    let density = sc.density().map_err(|e| e.in_stage("simulate"))?;
    let grid = sc.patch_grid();
    let field = density.discretize(grid.0, grid.1);
    let n_theta = sc.spec.resolution.sphere_order;
    let records: Vec<Result<MeasurementRecord<f64>>> = sc
        .detectors
        .par_iter()
        .map(|g| synth_measurement(&field, &g.ball, sc.dt, g.t0, n_theta))
        .collect();
    let mut out_records = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        let rec = r.map_err(|e| e.in_stage("simulate"))?;
        rec.write(out, &record_stem(i), i, sc.detectors[i].t0_auto)
            .map_err(|e| e.in_stage("simulate"))?;
        out_records.push(rec);
    }
    Ok(out_records)
}

/// Reads back the records written by [`run_simulate`].
pub fn read_records(sc: &LoadedScenario, out: &Path) -> Result<Vec<MeasurementRecord<f64>>> {
    (0..sc.detectors.len())
        .map(|i| {
            MeasurementRecord::read(&out.join(format!("{}.json", record_stem(i))))
                .map(|(r, _)| r)
                .map_err(|e| e.in_stage("indicator"))
        })
        .collect()
}

/// Distance scale for the default ladder: the first arrival when the record
/// carries signal, else the scenario geometry.
fn distance_guess(sc: &LoadedScenario, i: usize, rec: &MeasurementRecord<f64>) -> f64 {
    match rec.first_arrival() {
        Some((_, t)) if t > 0.0 => t,
        _ => sc.detectors[i].distance,
    }
}

fn ladder_for(sc: &LoadedScenario, opts: &StageOptions, d_guess: f64) -> Result<LadderSpec<f64>> {
    let ladder = match &opts.ladder {
        Some(l) => l.clone(),
        None => sc.ladder(d_guess)?,
    };
    ladder.validate(d_guess)?;
    Ok(ladder)
}

/// Per-detector curves: measurement side, plus the patch side when the
/// scenario supplies Cauchy data.
#[derive(Clone, Debug)]
pub struct DetectorCurves {
    pub measurement: IndicatorCurve<f64>,
    pub gamma: Option<IndicatorCurve<f64>>,
}

pub fn run_indicator(
    sc: &LoadedScenario,
    records: &[MeasurementRecord<f64>],
    opts: &StageOptions,
    out: &Path,
) -> Result<Vec<DetectorCurves>> {
    ensure_dir(out)?;
    if records.len() != sc.detectors.len() {
        return Err(Error::invalid(format!(
            "{} records for {} detectors",
            records.len(),
            sc.detectors.len()
        ))
        .in_stage("indicator"));
    }
    let boundary = sc.boundary();
    let computed: Vec<Result<DetectorCurves>> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let ladder = ladder_for(sc, opts, distance_guess(sc, i, rec))?;
            let measurement = indicator_curve(&IndicatorSource::Measurement(rec), &ladder)?;
            let gamma = match &boundary {
                None => None,
                Some(data) => {
                    let src = GammaSource {
                        data: data.clone(),
                        ball: sc.detectors[i].ball,
                        grid: sc.patch_grid(),
                        times: TimeGrid::new(sc.dt, sc.detectors[i].t0)?,
                    };
                    Some(indicator_curve(&IndicatorSource::Gamma(&src), &ladder)?)
                }
            };
            Ok(DetectorCurves { measurement, gamma })
        })
        .collect();
    let mut curves = Vec::with_capacity(computed.len());
    for (i, c) in computed.into_iter().enumerate() {
        let c = c.map_err(|e| e.in_stage("indicator"))?;
        c.measurement.write(&curve_path(out, i)).map_err(|e| e.in_stage("indicator"))?;
        if let Some(g) = &c.gamma {
            g.write(&gamma_curve_path(out, i)).map_err(|e| e.in_stage("indicator"))?;
        }
        curves.push(c);
    }
    Ok(curves)
}

pub fn read_curves(sc: &LoadedScenario, out: &Path) -> Result<Vec<DetectorCurves>> {
    (0..sc.detectors.len())
        .map(|i| {
            let measurement = IndicatorCurve::read(&curve_path(out, i))?;
            let gp = gamma_curve_path(out, i);
            let gamma = if sc.spec.boundary.is_some() && gp.exists() {
                Some(IndicatorCurve::read(&gp)?)
            } else {
                None
            };
            Ok(DetectorCurves { measurement, gamma })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("invert"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Metres.
    pub d_hat: f64,
    /// `d̂ / c₂` in seconds.
    pub arrival_time: f64,
    pub gamma: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: [f64; 2],
    pub model: FitModel,
    pub points: usize,
    pub clipped: bool,
    pub sign: i8,
}

impl FitReport {
    fn new(f: &DistanceFit<f64>, c2: f64) -> Self {
        FitReport {
            d_hat: f.d_hat,
            arrival_time: f.d_hat / c2,
            gamma: f.gamma,
            intercept: f.intercept,
            residual_rms: f.residual_rms,
            window: [f.window.0, f.window.1],
            model: f.model,
            points: f.points,
            clipped: f.clipped,
            sign: f.sign,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresenceReport {
    pub verdict: Verdict,
    pub d_hat: Option<f64>,
    /// Normalized observation time (metres of travel).
    pub t0: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub m_cap: f64,
    pub alpha_beta: f64,
    pub d_far: f64,
    pub radius: f64,
    pub c0: f64,
    pub sup_rescaled: f64,
    /// Square metres.
    pub area_bound: f64,
    pub sqrt_area_bound: f64,
    pub disk_radius_bound: Option<f64>,
    /// Which parameters were derived from the scenario geometry.
    pub derived: Vec<String>,
}

/// Diagnostics from the scenario geometry, for comparison only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub distance: f64,
    pub argmin: [f64; 3],
    pub minimum: String,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub index: usize,
    pub center: [f64; 3],
    pub radius: f64,
    /// Seconds.
    pub t0: f64,
    pub t0_auto: bool,
    pub ladder: Vec<f64>,
    pub flagged_points: usize,
    pub fit: Option<FitReport>,
    pub gamma_fit: Option<FitReport>,
    pub presence: PresenceReport,
    pub size: Option<SizeReport>,
    pub geometry: GeometryReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulationReport {
    pub point: [f64; 3],
    pub vertex: usize,
    pub triangle: Option<usize>,
    pub rms: f64,
    pub residuals: Vec<f64>,
    pub ambiguous_with: Option<usize>,
    pub inconsistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub format: String,
    pub toolkit_version: String,
    pub scenario: String,
    pub scenario_hash: String,
    /// Second-sound speed (m/s) used to convert times.
    pub c2: f64,
    pub model: FitModel,
    pub detectors: Vec<DetectorReport>,
    pub triangulation: Option<TriangulationReport>,
    pub notices: Vec<String>,
}

fn minimum_name(k: MinimumKind) -> &'static str {
    match k {
        MinimumKind::InteriorNondegenerate => "interior-nondegenerate",
        MinimumKind::BoundaryNoncritical => "boundary-noncritical",
        MinimumKind::Degenerate => "degenerate",
    }
}

/// Discrete `L²((0,T₀)×Γ)` norm of the source density `a(x) q(t)`.
fn density_norm(sc: &LoadedScenario, t0: f64) -> Result<f64> {
    let density = sc.density()?;
    let grid = sc.patch.grid(sc.patch_grid().0, sc.patch_grid().1);
    let spatial: Vec<f64> = grid
        .nodes
        .iter()
        .map(|n| {
            let a = density.spatial().value(n.s, n.t);
            n.weight * a * a
        })
        .collect();
    let times = TimeGrid::new(sc.dt, t0)?;
    let temporal: Vec<f64> = (0..=times.steps)
        .map(|k| {
            let q = density.temporal().value(times.time(k));
            let w = if k == 0 || k == times.steps { 0.5 } else { 1.0 };
            w * times.dt * q * q
        })
        .collect();
    Ok((pairwise_sum(&spatial) * pairwise_sum(&temporal)).sqrt())
}

fn size_report(sc: &LoadedScenario, i: usize, curve: &IndicatorCurve<f64>, fit: &DistanceFit<f64>) -> Result<SizeReport> {
    let spec = sc.spec.size.clone().unwrap_or_default();
    let g = &sc.detectors[i];
    let mut derived = Vec::new();
    let m_cap = match spec.m_cap {
        Some(m) => m,
        None => {
            derived.push("m_cap".to_string());
            density_norm(sc, g.t0)?
        }
    };
    let ab = match spec.alpha_beta {
        Some(v) => v,
        None => {
            derived.push("alpha_beta".to_string());
            alpha_beta(&sc.patch, &g.ball, (33, 33)).max()
        }
    };
    let d_far = match spec.d_far {
        Some(v) => v,
        None => {
            derived.push("d_far".to_string());
            sc.patch
                .uniform_samples(65, 65)
                .into_iter()
                .map(|(s, t)| g.ball.distance_to(sc.patch.point(s, t)))
                .fold(0.0, f64::max)
        }
    };
    let params = SizeParams {
        m_cap,
        alpha_beta: ab,
        d_far,
        radius: g.ball.radius(),
        disk: spec.disk,
    };
    let b = size_lower_bound(curve, fit, params)?;
    Ok(SizeReport {
        m_cap,
        alpha_beta: ab,
        d_far,
        radius: params.radius,
        c0: b.c0,
        sup_rescaled: b.sup_rescaled,
        area_bound: b.area_bound,
        sqrt_area_bound: b.sqrt_area_bound,
        disk_radius_bound: b.disk_radius_bound,
        derived,
    })
}

fn invert_one(sc: &LoadedScenario, i: usize, curves: &DetectorCurves, model: FitModel, notices: &mut Vec<String>) -> Result<DetectorReport> {
    let g = &sc.detectors[i];
    let c2 = sc.c2();
    let curve = &curves.measurement;
    let fit = if curve.is_zero() {
        notices.push(format!("detector {i}: indicator vanishes on the whole ladder; no distance extracted"));
        None
    } else {
        Some(extract_distance(curve, model)?)
    };
    let gamma_fit = match &curves.gamma {
        Some(gc) if !gc.is_zero() => Some(extract_distance(gc, model)?),
        _ => None,
    };
    let presence = presence_test(curve, g.t0, 0.0);
    let size = match &fit {
        Some(_) if sc.patch.is_point() => {
            notices.push(format!("detector {i}: size bound skipped for a point quench"));
            None
        }
        Some(f) if f.d_hat > 0.0 => Some(size_report(sc, i, curve, f)?),
        _ => None,
    };
    let sd = set_distance(&sc.patch, &g.ball, (33, 33))?;
    let class = classify_minimum(&sc.patch, &g.ball, sd.argmin);
    let flagged = curve.flagged.iter().filter(|&&f| f).count();
    if flagged > 0 {
        notices.push(format!("detector {i}: {flagged} ladder points exceed the 10% quadrature error estimate"));
    }
    if let Some(f) = &fit {
        if f.clipped {
            notices.push(format!("detector {i}: fitted slope was negative; distance clipped to 0"));
        }
    }
    Ok(DetectorReport {
        index: i,
        center: g.ball.center().to_f64(),
        radius: g.ball.radius(),
        t0: g.t0 / c2,
        t0_auto: g.t0_auto,
        ladder: curve.taus.clone(),
        flagged_points: flagged,
        fit: fit.as_ref().map(|f| FitReport::new(f, c2)),
        gamma_fit: gamma_fit.as_ref().map(|f| FitReport::new(f, c2)),
        presence: PresenceReport {
            verdict: presence.verdict,
            d_hat: presence.d_hat,
            t0: presence.t0,
            margin: presence.margin,
        },
        size,
        geometry: GeometryReport {
            distance: sd.distance,
            argmin: sd.point.to_f64(),
            minimum: minimum_name(class.kind).to_string(),
            delta: class.delta.value(),
        },
    })
}

/// Distance fits, presence verdicts and size bounds for every detector.
pub fn run_invert(sc: &LoadedScenario, curves: &[DetectorCurves], opts: &StageOptions) -> Result<LocalizationReport> {
    let model = opts.model.unwrap_or(sc.spec.fit_model);
    let mut notices = Vec::new();
    let mut detectors = Vec::with_capacity(curves.len());
    for (i, c) in curves.iter().enumerate() {
        detectors.push(invert_one(sc, i, c, model, &mut notices).map_err(|e| e.in_stage("invert"))?);
    }
    Ok(LocalizationReport {
        format: REPORT_FORMAT.into(),
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        scenario: sc.spec.name.clone(),
        scenario_hash: sc.hash.clone(),
        c2: sc.c2(),
        model,
        detectors,
        triangulation: None,
        notices,
    })
}

/// Adds the mesh-constrained location when at least three detectors have
/// distances and the scenario names a mesh; otherwise records why not.
pub fn run_triangulate(sc: &LoadedScenario, mut report: LocalizationReport) -> Result<LocalizationReport> {
    report.triangulation = None;
    let dets: Vec<DetectorDistance<f64>> = report
        .detectors
        .iter()
        .filter_map(|d| {
            d.fit.as_ref().map(|f| DetectorDistance {
                center: crate::geometry::Vec3::from_f64(d.center),
                radius: d.radius,
                distance: f.d_hat,
            })
        })
        .collect();
    let Some(mesh) = &sc.mesh else {
        report.notices.push("triangulation skipped: scenario has no cavity mesh".into());
        return Ok(report);
    };
    if dets.len() < 3 {
        report
            .notices
            .push(format!("triangulation skipped: {} detectors with distances, 3 needed", dets.len()));
        return Ok(report);
    }
    let t = triangulate(mesh, &dets).map_err(|e| e.in_stage("triangulate"))?;
    if t.inconsistent {
        report
            .notices
            .push("triangulation residual exceeds 10% of the mean distance; distances look inconsistent".into());
    }
    if let Some(k) = t.ambiguous {
        report
            .notices
            .push(format!("triangulation ambiguous: vertex {k} fits as well as vertex {}", t.vertex));
    }
    report.triangulation = Some(TriangulationReport {
        point: t.point.to_f64(),
        vertex: t.vertex,
        triangle: t.triangle,
        rms: t.rms,
        residuals: t.residuals,
        ambiguous_with: t.ambiguous,
        inconsistent: t.inconsistent,
    });
    Ok(report)
}

/// Writes `tau,log_abs,fit` for plotting the fit over the data.
pub fn write_fit_overlay(curve: &IndicatorCurve<f64>, fit: &FitReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tau", "log_abs", "fit"])?;
    for (tau, v) in curve.taus.iter().zip(&curve.values) {
        let model = -fit.d_hat * tau - fit.gamma * tau.ln() + fit.intercept;
        let data = if v.is_zero() { String::new() } else { v.log_abs.to_string() };
        w.write_record([tau.to_string(), data, model.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

impl LocalizationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        ensure_dir(out)?;
        let path = out.join(REPORT_FILE);
        let mut f = BufWriter::new(File::create(&path)?);
        f.write_all(self.to_json()?.as_bytes())?;
        f.flush()?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let r: LocalizationReport = serde_json::from_reader(File::open(path)?)?;
        if r.format != REPORT_FORMAT {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: format!("unsupported report format {:?}", r.format),
            });
        }
        Ok(r)
    }

    /// Plain-text table for stdout.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "scenario {} ({}), c2 = {} m/s, model {}\n",
            if self.scenario.is_empty() { "-" } else { &self.scenario },
            &self.scenario_hash[..self.scenario_hash.len().min(12)],
            self.c2,
            self.model
        ));
        s.push_str(&format!(
            "{:>3} {:>10} {:>10} {:>8} {:>12} {:>12} {:>10}\n",
            "det", "d_hat[m]", "true[m]", "gamma", "verdict", "area>=[m2]", "rms"
        ));
        for d in &self.detectors {
            let (dh, g, rms) = match &d.fit {
                Some(f) => (format!("{:.5}", f.d_hat), format!("{:.3}", f.gamma), format!("{:.2e}", f.residual_rms)),
                None => ("-".into(), "-".into(), "-".into()),
            };
            let area = d.size.as_ref().map_or("-".into(), |b| format!("{:.3e}", b.area_bound));
            s.push_str(&format!(
                "{:>3} {:>10} {:>10.5} {:>8} {:>12} {:>12} {:>10}\n",
                d.index,
                dh,
                d.geometry.distance,
                g,
                format!("{:?}", d.presence.verdict).to_lowercase(),
                area,
                rms
            ));
        }
        if let Some(t) = &self.triangulation {
            s.push_str(&format!(
                "location ({:.5}, {:.5}, {:.5}), rms {:.3e}{}\n",
                t.point[0],
                t.point[1],
                t.point[2],
                t.rms,
                if t.ambiguous_with.is_some() { " [ambiguous]" } else { "" }
            ));
        }
        for n in &self.notices {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

/// All stages in sequence; writes every artifact and the report.
pub fn run_pipeline(sc: &LoadedScenario, out: &Path, opts: &StageOptions) -> Result<LocalizationReport> {
    let records = run_simulate(sc, out)?;
    let curves = run_indicator(sc, &records, opts, out)?;
    let report = run_invert(sc, &curves, opts)?;
    let report = run_triangulate(sc, report)?;
    for (i, (c, d)) in curves.iter().zip(&report.detectors).enumerate() {
        if let Some(f) = &d.fit {
            write_fit_overlay(&c.measurement, f, &out.join(format!("det{i}_fit.csv")))?;
        }
    }
    report.write(out)?;
    Ok(report)
}

/// Boundary data sampled for the scenario, exposed for diagnostics.
pub fn sampled_boundary(sc: &LoadedScenario, i: usize) -> Result<Option<crate::forward::SampledBoundary<f64>>> {
    let Some(data) = sc.boundary() else { return Ok(None) };
    let grid = sc.patch.grid(sc.patch_grid().0, sc.patch_grid().1);
    Ok(Some(boundary_profiles(&data, &grid, TimeGrid::new(sc.dt, sc.detectors[i].t0)?)?))
}
