use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{sample_rows, sphere_grid_oriented, SourceField, SurfaceNode, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{DetectorBall, Vec3};
use crate::real::Real;

/// `u` and `∂_ν u` (ν outward from `B`) at the quadrature nodes of `∂B`
/// on a uniform time grid over `[0, T₀]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord<T> {
    pub ball: DetectorBall<T>,
    pub nodes: Vec<SurfaceNode<T>>,
    pub n_theta: usize,
    pub n_phi: usize,
    pub times: TimeGrid<T>,
    /// `u[node][k]`.
    pub u: Vec<Vec<T>>,
    /// `∂_ν u[node][k]`.
    pub dnu: Vec<Vec<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> MeasurementRecord<T> {
    pub fn t0(&self) -> T {
        self.times.t0()
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.dnu).all(|row| row.iter().all(|&x| x == T::zero()))
    }

    /// Earliest sample time with a nonzero value at any node.
    pub fn first_arrival(&self) -> Option<(usize, T)> {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in self.u.iter().enumerate() {
            if let Some(k) = row.iter().position(|&x| x != T::zero()) {
                if best.is_none_or(|(_, b)| k < b) {
                    best = Some((i, k));
                }
            }
        }
        best.map(|(i, k)| (i, self.times.time(k)))
    }

    /// Record restricted to every other azimuth, for error estimates.
    pub fn half_azimuth(&self) -> Option<Self> {
        if !self.n_phi.is_multiple_of(2) || self.n_phi < 2 {
            return None;
        }
        let mut out = self.clone();
        out.nodes.clear();
        out.u.clear();
        out.dnu.clear();
        for (i, node) in self.nodes.iter().enumerate() {
            if (i % self.n_phi).is_multiple_of(2) {
                out.nodes.push(SurfaceNode {
                    weight: node.weight * T::lit(2.0),
                    ..*node
                });
                out.u.push(self.u[i].clone());
                out.dnu.push(self.dnu[i].clone());
            }
        }
        out.n_phi = self.n_phi / 2;
        Some(out)
    }
}

/// Samples the single-layer field on `∂B` with the default azimuth count
/// `2n_θ`.
pub fn synth_measurement<T: Real>(
    field: &SourceField<T>,
    ball: &DetectorBall<T>,
    dt: T,
    t0: T,
    n_theta: usize,
) -> Result<MeasurementRecord<T>> {
    let times = TimeGrid::new(dt, t0)?;
    let nearest = field
        .nodes
        .iter()
        .min_by(|a, b| {
            let (da, db) = (ball.distance_to(a.point), ball.distance_to(b.point));
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::invalid("source has no nodes"))?;
    let gap = ball.distance_to(nearest.point);
    let nodes = sphere_grid_oriented(ball, n_theta, 2 * n_theta, nearest.point - ball.center())?;
    if !(gap > T::zero()) {
        return Err(Error::BallIntersectsPatch {
            clearance: gap.to_f64_lossy(),
        });
    }
    let mut warnings = Vec::new();
    if t0 < gap {
        let msg = format!("observation time T0 = {t0} is shorter than the patch distance {gap}; no signal reaches the detector");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let (u, dnu) = sample_rows(field, &nodes, times)?;
    Ok(MeasurementRecord {
        ball: *ball,
        nodes,
        n_theta,
        n_phi: 2 * n_theta,
        times,
        u,
        dnu,
        warnings,
    })
}

/// JSON sidecar describing a stored record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub format: String,
    pub detector: usize,
    pub center: [f64; 3],
    pub radius: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub dt: f64,
    pub steps: usize,
    pub t0: f64,
    pub t0_auto: bool,
    pub u_file: String,
    pub dnu_file: String,
    pub warnings: Vec<String>,
}

const RECORD_FORMAT: &str = "quenchloc-measurement-v1";

impl MeasurementRecord<f64> {
    /// Writes `<stem>_u.csv`, `<stem>_dnu.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str, detector: usize, t0_auto: bool) -> Result<PathBuf> {
        let u_file = format!("{stem}_u.csv");
        let dnu_file = format!("{stem}_dnu.csv");
        self.write_table(&dir.join(&u_file), &self.u)?;
        self.write_table(&dir.join(&dnu_file), &self.dnu)?;
        let meta = RecordMeta {
            format: RECORD_FORMAT.into(),
            detector,
            center: self.ball.center().to_f64(),
            radius: self.ball.radius(),
            n_theta: self.n_theta,
            n_phi: self.n_phi,
            dt: self.times.dt,
            steps: self.times.steps,
            t0: self.t0(),
            t0_auto,
            u_file,
            dnu_file,
            warnings: self.warnings.clone(),
        };
        let path = dir.join(format!("{stem}.json"));
        let mut f = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut f, &meta)?;
        writeln!(f)?;
        f.flush()?;
        Ok(path)
    }

    fn write_table(&self, path: &Path, rows: &[Vec<f64>]) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["node".to_string(), "x".into(), "y".into(), "z".into(), "weight".into()];
        header.extend((0..=self.times.steps).map(|k| format!("t_{k}")));
        w.write_record(&header)?;
        for (i, (node, row)) in self.nodes.iter().zip(rows).enumerate() {
            let mut rec = vec![
                i.to_string(),
                node.point.x.to_string(),
                node.point.y.to_string(),
                node.point.z.to_string(),
                node.weight.to_string(),
            ];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a record from its JSON sidecar and the two CSV tables.
    pub fn read(sidecar: &Path) -> Result<(Self, RecordMeta)> {
        let meta: RecordMeta = serde_json::from_reader(File::open(sidecar)?)?;
        if meta.format != RECORD_FORMAT {
            return Err(Error::Parse {
                path: sidecar.to_path_buf(),
                line: 1,
                msg: format!("unsupported format {:?}", meta.format),
            });
        }
        let dir = sidecar.parent().unwrap_or(Path::new("."));
        let ball = DetectorBall::new(Vec3::from_f64(meta.center), meta.radius)?;
        let (nodes, u) = read_table(&dir.join(&meta.u_file), meta.steps, &ball)?;
        let (nodes2, dnu) = read_table(&dir.join(&meta.dnu_file), meta.steps, &ball)?;
        if nodes != nodes2 {
            return Err(Error::invalid("u and dnu tables list different nodes"));
        }
        if nodes.len() != meta.n_theta * meta.n_phi {
            return Err(Error::invalid(format!(
                "expected {} nodes, found {}",
                meta.n_theta * meta.n_phi,
                nodes.len()
            )));
        }
        let rec = MeasurementRecord {
            ball,
            nodes,
            n_theta: meta.n_theta,
            n_phi: meta.n_phi,
            times: TimeGrid {
                dt: meta.dt,
                steps: meta.steps,
            },
            u,
            dnu,
            warnings: meta.warnings.clone(),
        };
        Ok((rec, meta))
    }
}

type Table = (Vec<SurfaceNode<f64>>, Vec<Vec<f64>>);

fn read_table(path: &Path, steps: usize, ball: &DetectorBall<f64>) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(path)?;
    let width = rdr.headers()?.len();
    if width != steps + 6 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("expected {} columns, found {width}", steps + 6),
        });
    }
    let mut nodes = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let nums: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|x| {
                x.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("bad number {x:?}"),
                })
            })
            .collect::<Result<_>>()?;
        let point = Vec3::new(nums[0], nums[1], nums[2]);
        let normal = (point - ball.center()) / ball.radius();
        nodes.push(SurfaceNode {
            point,
            normal,
            weight: nums[3],
        });
        rows.push(nums[4..].to_vec());
    }
    Ok((nodes, rows))
}
