use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point3, TriMesh};
use crate::real::Real;

/// One detector with its fitted distance to the quench.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorDistance<T> {
    pub center: Point3<T>,
    pub radius: T,
    pub distance: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation<T> {
    /// Minimizer on the mesh surface.
    pub point: Point3<T>,
    /// Best vertex of the scan.
    pub vertex: usize,
    /// Triangle containing `point` when refinement moved off the vertex.
    pub triangle: Option<usize>,
    /// `sqrt(Σ_i e_i² / n)`.
    pub rms: T,
    /// `e_i = |x − p_i| − r_i − d̂_i`.
    pub residuals: Vec<T>,
    /// Another well-separated vertex attains a nearly equal objective.
    pub ambiguous: Option<usize>,
    /// `rms` exceeds 10% of the mean fitted distance.
    pub inconsistent: bool,
}

pub const MIN_DETECTORS: usize = 3;
/// Inconsistency threshold relative to the mean distance.
pub const INCONSISTENT_FRACTION: f64 = 0.1;

fn objective<T: Real>(dets: &[DetectorDistance<T>], x: Point3<T>) -> T {
    dets.iter()
        .map(|d| {
            let e = x.distance(d.center) - d.radius - d.distance;
            e * e
        })
        .sum()
}

/// Compass search over barycentric coordinates of one triangle, starting at
/// corner `start`. Returns the best point and its objective.
fn refine_triangle<T: Real>(dets: &[DetectorDistance<T>], corners: [Point3<T>; 3], start: usize, f0: T) -> (Point3<T>, T) {
    let at = |w: [T; 3]| corners[0] * w[0] + corners[1] * w[1] + corners[2] * w[2];
    let mut w = [T::zero(); 3];
    w[start] = T::one();
    let mut best = f0;
    let mut step = T::lit(0.25);
    let dirs: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];
    while step > T::lit(1e-10) {
        let mut moved = false;
        for &(from, to) in &dirs {
            let s = step.min(w[from]);
            if s <= T::zero() {
                continue;
            }
            let mut trial = w;
            trial[from] = trial[from] - s;
            trial[to] = trial[to] + s;
            let f = objective(dets, at(trial));
            if f < best {
                best = f;
                w = trial;
                moved = true;
            }
        }
        if !moved {
            step = step * T::lit(0.5);
        }
    }
    (at(w), best)
}

/// Least-squares trilateration constrained to the mesh surface: vertex
/// scan, then local refinement over the triangles incident to the winner.
pub fn triangulate<T: Real>(mesh: &TriMesh<T>, detectors: &[DetectorDistance<T>]) -> Result<Triangulation<T>> {
    if detectors.len() < MIN_DETECTORS {
        return Err(Error::TooFewPoints {
            needed: MIN_DETECTORS,
            got: detectors.len(),
        });
    }
    for d in detectors {
        if !(d.radius > T::zero() && d.distance >= T::zero() && d.center.is_finite() && d.distance.is_finite()) {
            return Err(Error::invalid("detector entries need finite center, positive radius, non-negative distance"));
        }
    }
    let verts = mesh.vertices();
    if verts.is_empty() {
        return Err(Error::invalid("triangulation mesh has no vertices"));
    }
    let scores: Vec<T> = verts.par_iter().map(|&v| objective(detectors, v)).collect();
    let mut vertex = 0;
    for (k, &f) in scores.iter().enumerate() {
        if f < scores[vertex] {
            vertex = k;
        }
    }
    let f_vertex = scores[vertex];

    let incident = mesh.vertex_triangles();
    let mut point = verts[vertex];
    let mut best = f_vertex;
    let mut triangle = None;
    for &t in &incident[vertex] {
        let tri = mesh.triangles()[t];
        let corner = tri.iter().position(|&i| i == vertex).expect("incident triangle holds its vertex");
        let (x, f) = refine_triangle(detectors, tri.map(|i| verts[i]), corner, f_vertex);
        if f < best {
            best = f;
            point = x;
            triangle = Some(t);
        }
    }

    let n = T::from_count(detectors.len());
    let mean_d = detectors.iter().map(|d| d.distance).sum::<T>() / n;
    let scale = (mean_d * mean_d).max(T::min_positive_value());
    // a distant discrete local minimum with a nearly equal objective
    let neighbors = mesh.vertex_neighbors();
    let separation = T::lit(2.0) * mesh.mean_edge_length();
    let tol = T::lit(1e-6) * scale * n;
    let ambiguous = (0..verts.len()).find(|&k| {
        k != vertex
            && scores[k] - f_vertex <= tol
            && verts[k].distance(verts[vertex]) > separation
            && neighbors[k].iter().all(|&j| scores[j] >= scores[k])
    });
    let residuals: Vec<T> = detectors
        .iter()
        .map(|d| point.distance(d.center) - d.radius - d.distance)
        .collect();
    let rms = (best / n).sqrt();
    let inconsistent = rms > T::lit(INCONSISTENT_FRACTION) * mean_d;
    if inconsistent {
        log::warn!("triangulation residual {rms} exceeds 10% of the mean distance {mean_d}; distances look inconsistent");
    }
    if let Some(k) = ambiguous {
        log::warn!("triangulation is ambiguous: vertices {vertex} and {k} fit equally well");
    }
    Ok(Triangulation {
        point,
        vertex,
        triangle,
        rms,
        residuals,
        ambiguous,
        inconsistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere() -> TriMesh<f64> {
        TriMesh::uv_sphere(Point3::zero(), 1.0, 49, 100).unwrap()
    }

    fn dets(target: Point3<f64>, centers: &[[f64; 3]], r: f64, scale: f64) -> Vec<DetectorDistance<f64>> {
        centers
            .iter()
            .map(|c| {
                let center = Point3::from_f64(*c);
                DetectorDistance {
                    center,
                    radius: r,
                    distance: (target.distance(center) - r) * scale,
                }
            })
            .collect()
    }

    const CENTERS: [[f64; 3]; 3] = [[2.0, 0.3, 0.1], [-0.2, 2.1, 0.4], [0.3, -0.4, 2.2]];

    #[test]
    fn exact_distances_recover_vertex() {
        let m = sphere();
        let k = 1234;
        let t = m.vertices()[k];
        let r = triangulate(&m, &dets(t, &CENTERS, 0.1, 1.0)).unwrap();
        assert_eq!(r.vertex, k);
        assert_eq!(r.point, t);
        assert!(r.rms < 1e-12);
        assert!(r.ambiguous.is_none() && !r.inconsistent);
    }

    #[test]
    fn perturbed_distances_stay_close() {
        let m = sphere();
        let h = m.mean_edge_length();
        let t = m.vertices()[2500];
        let r = triangulate(&m, &dets(t, &CENTERS, 0.1, 1.01)).unwrap();
        assert!(r.point.distance(t) < 2.0 * h, "{} vs {}", r.point.distance(t), h);
    }

    #[test]
    fn coplanar_symmetric_case_is_ambiguous() {
        let m = sphere();
        // centers in z = 0; target mirrored across that plane is equally good
        let t = m.vertices()[1000];
        assert!(t.z.abs() > 0.3);
        let centers = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [-1.5, -1.5, 0.0]];
        let r = triangulate(&m, &dets(t, &centers, 0.1, 1.0)).unwrap();
        let other = r.ambiguous.expect("mirror image detected");
        assert!(r.vertex < other);
        assert!((m.vertices()[other].z + m.vertices()[r.vertex].z).abs() < 1e-9);
    }

    #[test]
    fn needs_three_detectors() {
        let m = sphere();
        let d = dets(m.vertices()[0], &CENTERS[..2], 0.1, 1.0);
        assert!(matches!(triangulate(&m, &d), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn inconsistent_distances_are_flagged() {
        let m = sphere();
        let mut d = dets(m.vertices()[1500], &CENTERS, 0.1, 1.0);
        d[0].distance = 0.05;
        d[1].distance = 4.0;
        assert!(triangulate(&m, &d).unwrap().inconsistent);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn consistent_vertex_gives_zero_residual(k in 0usize..4902) {
            let m = sphere();
            let t = m.vertices()[k];
            let r = triangulate(&m, &dets(t, &CENTERS, 0.1, 1.0)).unwrap();
            prop_assert!(r.rms < 1e-12);
            prop_assert!(r.point.distance(t) < 1e-12 || r.ambiguous.is_some() || m.vertices()[r.vertex] == t);
        }
    }
}
