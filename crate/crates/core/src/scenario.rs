//! Scenario files: JSON, schema version 1. Geometry in metres, times in
//! seconds; `units.c2` (m/s) converts times to the unit-speed model on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forward::{BoundaryData, BoundaryProfile, SourceDensity, SpatialProfile, TemporalProfile, DEFAULT_PATCH_GRID, DEFAULT_SPHERE_ORDER};
use crate::geometry::{set_distance, DetectorBall, ParamPatch, Point3, TriMesh, Vec3};
use crate::indicator::LadderSpec;
use crate::inversion::FitModel;

pub const SCHEMA_VERSION: u32 = 1;
/// Default rise time as a fraction of the smallest detector distance.
pub const DEFAULT_RISE_FRACTION: f64 = 0.02;
/// Default time step as a fraction of the rise time.
pub const DEFAULT_DT_FRACTION: f64 = 0.25;
/// Automatic observation time as a multiple of the detector distance.
pub const AUTO_T0_FACTOR: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchSpec {
    Point { at: [f64; 3], normal: [f64; 3] },
    Disk { center: [f64; 3], normal: [f64; 3], radius: f64 },
    DiskPolar { center: [f64; 3], normal: [f64; 3], radius: f64 },
    DiskSegment { center: [f64; 3], normal: [f64; 3], radius: f64, cut: f64 },
    Rect { center: [f64; 3], u_axis: [f64; 3], v_axis: [f64; 3], half_u: f64, half_v: f64 },
    SpherePatch { center: [f64; 3], radius: f64, pole: [f64; 3], polar: [f64; 2], azimuth: [f64; 2] },
    Tabulated { points: Vec<Vec<[f64; 3]>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpatialSpec {
    Constant { value: f64 },
    Bump { base: f64, peak: f64, center: [f64; 2], width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalKind {
    Smoothstep,
    Linear,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Floor `μ` of the density.
    pub mu: f64,
    #[serde(default = "default_spatial")]
    pub spatial: SpatialSpec,
    #[serde(default = "default_temporal")]
    pub temporal: TemporalKind,
    /// Smoothstep amplitude or linear slope; defaults to 1.
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Seconds; defaults to 2% of the smallest detector distance.
    #[serde(default)]
    pub t_rise: Option<f64>,
}

fn default_spatial() -> SpatialSpec {
    SpatialSpec::Constant { value: 1.0 }
}

fn default_temporal() -> TemporalKind {
    TemporalKind::Smoothstep
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { value: f64 },
    /// `offset + slope · t`, `t` in seconds.
    Ramp { offset: f64, slope: f64 },
}

/// Cauchy data on the patch for the patch-side indicator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub f: ProfileSpec,
    pub g: ProfileSpec,
    pub mu: f64,
    pub m_cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    /// Seconds; defaults to a quarter of the rise time.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Seconds; defaults to twice each detector's distance.
    #[serde(default)]
    pub t0: Option<f64>,
}

/// `τ` values in inverse metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LadderInput {
    Linear { tau_min: f64, tau_max: f64, count: usize },
    Explicit { taus: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionSpec {
    #[serde(default = "default_sphere_order")]
    pub sphere_order: usize,
    #[serde(default = "default_patch_grid")]
    pub patch_grid: [usize; 2],
}

fn default_sphere_order() -> usize {
    DEFAULT_SPHERE_ORDER
}

fn default_patch_grid() -> [usize; 2] {
    [DEFAULT_PATCH_GRID.0, DEFAULT_PATCH_GRID.1]
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        ResolutionSpec {
            sphere_order: DEFAULT_SPHERE_ORDER,
            patch_grid: default_patch_grid(),
        }
    }
}

/// A-priori bounds for the size estimate. Missing `alpha_beta` and `d_far`
/// are computed from the scenario geometry; a missing `m_cap` uses the
/// discrete L² norm of the source density over `(0, T₀) × Γ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeSpec {
    #[serde(default)]
    pub m_cap: Option<f64>,
    #[serde(default)]
    pub alpha_beta: Option<f64>,
    #[serde(default)]
    pub d_far: Option<f64>,
    #[serde(default)]
    pub disk: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    /// Second-sound speed in m/s.
    pub c2: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { c2: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub patch: PatchSpec,
    #[serde(default)]
    pub flip_normal: bool,
    pub source: SourceSpec,
    #[serde(default)]
    pub boundary: Option<BoundarySpec>,
    pub detectors: Vec<DetectorSpec>,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub ladder: Option<LadderInput>,
    #[serde(default = "default_model")]
    pub fit_model: FitModel,
    #[serde(default)]
    pub resolution: ResolutionSpec,
    #[serde(default)]
    pub size: Option<SizeSpec>,
    #[serde(default)]
    pub units: Units,
    /// Cavity mesh (`.off` or `.obj`), relative to the scenario file.
    #[serde(default)]
    pub mesh: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_model() -> FitModel {
    FitModel::SlopeLog
}

fn at(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        msg: msg.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(at(path, format!("must be positive and finite, got {x}")))
    }
}

fn finite3(path: &str, v: [f64; 3]) -> Result<Point3<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(Vec3::from_f64(v))
    } else {
        Err(at(path, "coordinates must be finite"))
    }
}

fn scoped<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Invalid(msg) => at(path, msg),
        other => at(path, other.to_string()),
    })
}

/// Per-detector geometry derived at load.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorGeometry {
    pub ball: DetectorBall<f64>,
    /// `d_e(Γ, B)` in metres.
    pub distance: f64,
    pub argmin: Point3<f64>,
    /// Normalized observation time.
    pub t0: f64,
    pub t0_auto: bool,
}

/// Validated scenario with everything the stages need, in normalized units.
#[derive(Clone, Debug)]
pub struct LoadedScenario {
    pub spec: Scenario,
    /// Hex SHA-256 of the scenario file bytes.
    pub hash: String,
    pub base_dir: PathBuf,
    pub patch: ParamPatch<f64>,
    pub detectors: Vec<DetectorGeometry>,
    /// Normalized rise time.
    pub t_rise: f64,
    /// Normalized time step.
    pub dt: f64,
    pub mesh: Option<TriMesh<f64>>,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &Path) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn build_patch(&self) -> Result<ParamPatch<f64>> {
        let p = "$.patch";
        let patch = match &self.patch {
            PatchSpec::Point { at: x, normal } => ParamPatch::point_patch(finite3(&format!("{p}.at"), *x)?, Vec3::from_f64(*normal)),
            PatchSpec::Disk { center, normal, radius } => {
                positive(&format!("{p}.radius"), *radius)?;
                ParamPatch::disk(finite3(&format!("{p}.center"), *center)?, Vec3::from_f64(*normal), *radius)
            }
            PatchSpec::DiskPolar { center, normal, radius } => {
                positive(&format!("{p}.radius"), *radius)?;
                ParamPatch::disk_polar(finite3(&format!("{p}.center"), *center)?, Vec3::from_f64(*normal), *radius)
            }
            PatchSpec::DiskSegment { center, normal, radius, cut } => {
                positive(&format!("{p}.radius"), *radius)?;
                ParamPatch::disk_segment(finite3(&format!("{p}.center"), *center)?, Vec3::from_f64(*normal), *radius, *cut)
            }
            PatchSpec::Rect {
                center,
                u_axis,
                v_axis,
                half_u,
                half_v,
            } => {
                positive(&format!("{p}.half_u"), *half_u)?;
                positive(&format!("{p}.half_v"), *half_v)?;
                ParamPatch::rect(
                    finite3(&format!("{p}.center"), *center)?,
                    Vec3::from_f64(*u_axis),
                    Vec3::from_f64(*v_axis),
                    *half_u,
                    *half_v,
                )
            }
            PatchSpec::SpherePatch {
                center,
                radius,
                pole,
                polar,
                azimuth,
            } => {
                positive(&format!("{p}.radius"), *radius)?;
                ParamPatch::sphere_patch(
                    finite3(&format!("{p}.center"), *center)?,
                    *radius,
                    Vec3::from_f64(*pole),
                    (polar[0], polar[1]),
                    (azimuth[0], azimuth[1]),
                )
            }
            PatchSpec::Tabulated { points } => {
                let mut rows = Vec::with_capacity(points.len());
                for (i, row) in points.iter().enumerate() {
                    let mut out = Vec::with_capacity(row.len());
                    for (j, q) in row.iter().enumerate() {
                        out.push(finite3(&format!("{p}.points[{i}][{j}]"), *q)?);
                    }
                    rows.push(out);
                }
                ParamPatch::tabulated(rows)
            }
        };
        let patch = scoped(p, patch)?;
        scoped(p, patch.check_injective(16))?;
        Ok(if self.flip_normal { patch.flipped() } else { patch })
    }

    fn ladder_spec(&self) -> Result<Option<LadderSpec<f64>>> {
        let Some(l) = &self.ladder else { return Ok(None) };
        let spec = match l {
            LadderInput::Linear { tau_min, tau_max, count } => LadderSpec::Linear {
                tau_min: *tau_min,
                tau_max: *tau_max,
                count: *count,
            },
            LadderInput::Explicit { taus } => LadderSpec::Explicit(taus.clone()),
        };
        scoped("$.ladder", spec.taus())?;
        Ok(Some(spec))
    }

    /// Validates every field and derives the normalized quantities.
    pub fn validate(self, hash: String, base_dir: PathBuf) -> Result<LoadedScenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(at(
                "$.schema_version",
                format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        positive("$.units.c2", self.units.c2)?;
        let c2 = self.units.c2;
        let patch = self.build_patch()?;
        if self.detectors.is_empty() {
            return Err(at("$.detectors", "at least one detector is required"));
        }
        let res = &self.resolution;
        if res.sphere_order < 2 {
            return Err(at("$.resolution.sphere_order", "must be at least 2"));
        }
        if res.patch_grid.contains(&0) {
            return Err(at("$.resolution.patch_grid", "must be positive"));
        }
        positive("$.source.mu", self.source.mu)?;
        if self.source.temporal != TemporalKind::Zero {
            positive("$.source.amplitude", self.source.amplitude)?;
        }
        match self.source.spatial {
            SpatialSpec::Constant { value } => {
                if value < self.source.mu {
                    return Err(at("$.source.spatial.value", format!("density {value} is below the floor mu = {}", self.source.mu)));
                }
            }
            SpatialSpec::Bump { base, width, .. } => {
                positive("$.source.spatial.width", width)?;
                if base < self.source.mu {
                    return Err(at("$.source.spatial.base", format!("base {base} is below the floor mu = {}", self.source.mu)));
                }
            }
        }
        let mut geoms = Vec::with_capacity(self.detectors.len());
        for (i, d) in self.detectors.iter().enumerate() {
            let path = format!("$.detectors[{i}]");
            let center = finite3(&format!("{path}.center"), d.center)?;
            positive(&format!("{path}.radius"), d.radius)?;
            let ball = scoped(&path, DetectorBall::new(center, d.radius))?;
            let sd = set_distance(&patch, &ball, (33, 33)).map_err(|e| at(&path, e.to_string()))?;
            geoms.push(DetectorGeometry {
                ball,
                distance: sd.distance,
                argmin: sd.point,
                t0: 0.0,
                t0_auto: false,
            });
        }
        let d_min = geoms.iter().map(|g| g.distance).fold(f64::INFINITY, f64::min);
        let t_rise = match self.source.t_rise {
            Some(t) => {
                positive("$.source.t_rise", t)?;
                t * c2
            }
            None => DEFAULT_RISE_FRACTION * d_min,
        };
        let dt = match self.time.dt {
            Some(dt) => {
                positive("$.time.dt", dt)?;
                dt * c2
            }
            None => DEFAULT_DT_FRACTION * t_rise,
        };
        for g in &mut geoms {
            match self.time.t0 {
                Some(t0) => {
                    positive("$.time.t0", t0)?;
                    g.t0 = t0 * c2;
                }
                None => {
                    g.t0 = AUTO_T0_FACTOR * g.distance;
                    g.t0_auto = true;
                }
            }
            if dt > g.t0 {
                return Err(at("$.time.dt", format!("time step {dt} exceeds the observation time {}", g.t0)));
            }
        }
        if let Some(ladder) = self.ladder_spec()? {
            for (i, g) in geoms.iter().enumerate() {
                ladder
                    .validate(g.distance)
                    .map_err(|e| at("$.ladder", format!("detector {i}: {e}")))?;
            }
        }
        if let Some(b) = &self.boundary {
            positive("$.boundary.mu", b.mu)?;
            positive("$.boundary.m_cap", b.m_cap)?;
        }
        if let Some(s) = &self.size {
            for (name, v) in [("m_cap", s.m_cap), ("alpha_beta", s.alpha_beta), ("d_far", s.d_far)] {
                if let Some(v) = v {
                    positive(&format!("$.size.{name}"), v)?;
                }
            }
        }
        let mesh = match &self.mesh {
            None => None,
            Some(p) => {
                let full = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
                let mesh = TriMesh::load(&full).map_err(|e| at("$.mesh", e.to_string()))?;
                for (i, g) in geoms.iter().enumerate() {
                    let c = g.ball.center();
                    if mesh.contains(c) {
                        return Err(at(format!("$.detectors[{i}].center"), "detector lies inside the cavity mesh"));
                    }
                    let clearance = (0..mesh.triangles().len())
                        .map(|k| mesh.closest_point_on_triangle(k, c).0.distance(c))
                        .fold(f64::INFINITY, f64::min);
                    if clearance <= g.ball.radius() {
                        return Err(at(format!("$.detectors[{i}]"), "detector ball intersects the cavity mesh"));
                    }
                }
                Some(mesh)
            }
        };
        Ok(LoadedScenario {
            spec: self,
            hash,
            base_dir,
            patch,
            detectors: geoms,
            t_rise,
            dt,
            mesh,
        })
    }
}

impl LoadedScenario {
    pub fn load(path: &Path) -> Result<LoadedScenario> {
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "scenario is not UTF-8".into(),
        })?;
        let spec = Scenario::from_json(&text, path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        spec.validate(hash_bytes(&bytes), base)
    }

    /// Scenario built in memory; hashed over its canonical JSON.
    pub fn from_spec(spec: Scenario, base_dir: &Path) -> Result<LoadedScenario> {
        let hash = hash_bytes(spec.to_json()?.as_bytes());
        spec.validate(hash, base_dir.to_path_buf())
    }

    pub fn c2(&self) -> f64 {
        self.spec.units.c2
    }

    pub fn density(&self) -> Result<SourceDensity<f64>> {
        let s = &self.spec.source;
        let temporal = match s.temporal {
            TemporalKind::Smoothstep => TemporalProfile::Smoothstep {
                amplitude: s.amplitude,
                rise: self.t_rise,
            },
            // slope per normalized time unit
            TemporalKind::Linear => TemporalProfile::Linear { slope: s.amplitude / self.c2() },
            TemporalKind::Zero => return Ok(SourceDensity::zero(self.patch.clone())),
        };
        let spatial = match s.spatial {
            SpatialSpec::Constant { value } => SpatialProfile::Constant(value),
            SpatialSpec::Bump { base, peak, center, width } => SpatialProfile::Bump {
                base,
                peak,
                center: (center[0], center[1]),
                width,
            },
        };
        scoped("$.source", SourceDensity::new(self.patch.clone(), spatial, temporal, s.mu))
    }

    pub fn boundary(&self) -> Option<BoundaryData<f64>> {
        let b = self.spec.boundary.as_ref()?;
        let c2 = self.c2();
        let conv = |p: &ProfileSpec| match *p {
            ProfileSpec::Constant { value } => BoundaryProfile::Constant(value),
            ProfileSpec::Ramp { offset, slope } => BoundaryProfile::Ramp { offset, slope: slope / c2 },
        };
        Some(BoundaryData {
            patch: self.patch.clone(),
            f: conv(&b.f),
            g: conv(&b.g),
            mu: b.mu,
            m_cap: b.m_cap,
        })
    }

    /// Ladder from the scenario, or the default for `d_guess`.
    pub fn ladder(&self, d_guess: f64) -> Result<LadderSpec<f64>> {
        Ok(self.spec.ladder_spec()?.unwrap_or_else(|| LadderSpec::default_for(d_guess)))
    }

    pub fn patch_grid(&self) -> (usize, usize) {
        let g = self.spec.resolution.patch_grid;
        (g[0], g[1])
    }
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT_DISK: &str = r#"{
        "schema_version": 1,
        "name": "flat-disk",
        "patch": {"kind": "disk", "center": [0, 0, 0], "normal": [0, 0, 1], "radius": 1.0},
        "source": {"mu": 0.5},
        "detectors": [{"center": [0, 0, 3], "radius": 1.0}],
        "time": {"t0": 4.0}
    }"#;

    fn load(text: &str) -> Result<LoadedScenario> {
        let spec = Scenario::from_json(text, Path::new("test.json"))?;
        spec.validate(hash_bytes(text.as_bytes()), PathBuf::from("."))
    }

    #[test]
    fn flat_disk_defaults() {
        let s = load(FLAT_DISK).unwrap();
        assert!((s.detectors[0].distance - 2.0).abs() < 1e-12);
        assert!((s.t_rise - 0.04).abs() < 1e-12);
        assert!((s.dt - 0.01).abs() < 1e-12);
        assert_eq!(s.detectors[0].t0, 4.0);
        assert_eq!(s.spec.fit_model, FitModel::SlopeLog);
        assert_eq!(s.hash.len(), 64);
    }

    #[test]
    fn auto_t0_is_twice_the_distance() {
        let s = load(&FLAT_DISK.replace(r#""time": {"t0": 4.0}"#, r#""units": {"c2": 20.0}"#)).unwrap();
        assert!(s.detectors[0].t0_auto);
        assert!((s.detectors[0].t0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn c2_scales_times() {
        let s = load(&FLAT_DISK.replace(r#""t0": 4.0"#, r#""t0": 0.2, "dt": 0.0005"#).replace(
            r#""detectors""#,
            r#""units": {"c2": 20.0}, "detectors""#,
        ))
        .unwrap();
        assert!((s.detectors[0].t0 - 4.0).abs() < 1e-12);
        assert!((s.dt - 0.01).abs() < 1e-12);
    }

    #[test]
    fn errors_cite_json_paths() {
        let bad = FLAT_DISK.replace(r#""radius": 1.0}]"#, r#""radius": -1.0}]"#);
        match load(&bad) {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "$.detectors[0].radius"),
            other => panic!("{other:?}"),
        }
        let inter = FLAT_DISK.replace("[0, 0, 3]", "[0, 0, 0.5]");
        match load(&inter) {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "$.detectors[0]"),
            other => panic!("{other:?}"),
        }
        let ver = FLAT_DISK.replace(r#""schema_version": 1"#, r#""schema_version": 7"#);
        assert!(matches!(load(&ver), Err(Error::Scenario { .. })));
    }

    #[test]
    fn syntax_errors_cite_lines() {
        let bad = FLAT_DISK.replace(r#""mu": 0.5"#, r#""mu": 0.5,, "#);
        match load(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let unknown = FLAT_DISK.replace(r#""mu": 0.5"#, r#""mu": 0.5, "colour": 1"#);
        assert!(matches!(load(&unknown), Err(Error::Parse { .. })));
    }

    #[test]
    fn ladder_cap_is_enforced() {
        let bad = FLAT_DISK.replace(
            r#""time""#,
            r#""ladder": {"tau_min": 100, "tau_max": 400, "count": 4}, "time""#,
        );
        match load(&bad) {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "$.ladder"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detector_inside_mesh_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = TriMesh::uv_sphere(Point3::new(0.0, 0.0, 0.0), 10.0, 8, 16).unwrap();
        std::fs::write(dir.path().join("cav.off"), mesh.to_off()).unwrap();
        let text = FLAT_DISK.replace(r#""time""#, r#""mesh": "cav.off", "time""#);
        let spec = Scenario::from_json(&text, Path::new("s.json")).unwrap();
        match spec.validate(String::new(), dir.path().to_path_buf()) {
            Err(Error::Scenario { path, .. }) => assert_eq!(path, "$.detectors[0].center"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_json() {
        let s = Scenario::from_json(FLAT_DISK, Path::new("x")).unwrap();
        let again = Scenario::from_json(&s.to_json().unwrap(), Path::new("x")).unwrap();
        assert_eq!(s, again);
    }
}
