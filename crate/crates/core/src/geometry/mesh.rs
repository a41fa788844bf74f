//! Triangle meshes for the cavity boundary: OFF/OBJ IO, a UV-sphere
//! generator, adjacency queries, inside tests and segment occlusion.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::vector::Point3;
use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<Point3<T>>,
    triangles: Vec<[usize; 3]>,
}

impl<T: Real> TriMesh<T> {
    /// Checks index ranges and that every triangle has positive area.
    pub fn new(vertices: Vec<Point3<T>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("mesh has no vertices"));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("mesh vertex {i} is not finite")));
        }
        for (k, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(Error::invalid(format!(
                    "triangle {k} references vertex {bad}, mesh has {}",
                    vertices.len()
                )));
            }
            let [a, b, c] = tri.map(|i| vertices[i]);
            if !((b - a).cross(c - a).norm() > T::zero()) {
                return Err(Error::invalid(format!("triangle {k} is degenerate (zero area)")));
            }
        }
        Ok(TriMesh { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Point3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Latitude–longitude sphere with `n_lat` rings between the poles and
    /// `n_lon` vertices per ring: `n_lat·n_lon + 2` vertices in total.
    pub fn uv_sphere(center: Point3<T>, radius: T, n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat < 1 || n_lon < 3 {
            return Err(Error::invalid("uv sphere needs at least 1 ring and 3 segments"));
        }
        let mut vertices = Vec::with_capacity(n_lat * n_lon + 2);
        vertices.push(center + Point3::new(T::zero(), T::zero(), radius));
        for i in 0..n_lat {
            let theta = T::PI() * T::from_count(i + 1) / T::from_count(n_lat + 1);
            for j in 0..n_lon {
                let phi = T::TAU() * T::from_count(j) / T::from_count(n_lon);
                vertices.push(
                    center
                        + Point3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * radius,
                );
            }
        }
        vertices.push(center - Point3::new(T::zero(), T::zero(), radius));
        let south = vertices.len() - 1;
        let ring = |i: usize, j: usize| 1 + i * n_lon + (j % n_lon);
        let mut triangles = Vec::with_capacity(2 * n_lat * n_lon);
        for j in 0..n_lon {
            triangles.push([0, ring(0, j), ring(0, j + 1)]);
        }
        for i in 0..n_lat - 1 {
            for j in 0..n_lon {
                triangles.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                triangles.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        for j in 0..n_lon {
            triangles.push([south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)]);
        }
        TriMesh::new(vertices, triangles)
    }

    /// Triangles incident to each vertex, in ascending triangle order.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (k, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if out[i].last() != Some(&k) {
                    out[i].push(k);
                }
            }
        }
        out
    }

    /// Sorted, deduplicated vertex neighbors.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for tri in &self.triangles {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        out[tri[a]].push(tri[b]);
                    }
                }
            }
        }
        for n in &mut out {
            n.sort_unstable();
            n.dedup();
        }
        out
    }

    pub fn mean_edge_length(&self) -> T {
        let mut lengths = Vec::with_capacity(3 * self.triangles.len());
        for tri in &self.triangles {
            for k in 0..3 {
                lengths.push(self.vertices[tri[k]].distance(self.vertices[tri[(k + 1) % 3]]));
            }
        }
        if lengths.is_empty() {
            return T::zero();
        }
        crate::real::pairwise_sum(&lengths) / T::from_count(lengths.len())
    }

    /// Segment–triangle intersection (Möller–Trumbore) for `t ∈ (0, 1)`.
    fn segment_hits(&self, a: Point3<T>, b: Point3<T>, open_start: bool) -> Vec<T> {
        let dir = b - a;
        let eps = T::lit(1e-12);
        let mut hits = Vec::new();
        for tri in &self.triangles {
            let [v0, v1, v2] = tri.map(|i| self.vertices[i]);
            let e1 = v1 - v0;
            let e2 = v2 - v0;
            let pv = dir.cross(e2);
            let det = e1.dot(pv);
            if det.abs() < eps * e1.norm() * e2.norm() * dir.norm() {
                continue;
            }
            let inv = T::one() / det;
            let tv = a - v0;
            let u = tv.dot(pv) * inv;
            if u < T::zero() || u > T::one() {
                continue;
            }
            let qv = tv.cross(e1);
            let v = dir.dot(qv) * inv;
            if v < T::zero() || u + v > T::one() {
                continue;
            }
            let t = e2.dot(qv) * inv;
            let lo = if open_start { T::lit(1e-9) } else { T::zero() };
            if t > lo && t < T::one() - T::lit(1e-9) {
                hits.push(t);
            }
        }
        hits
    }

    /// `true` when the open segment from `a` to `b` crosses no triangle.
    /// The start point may lie on the mesh.
    pub fn line_of_sight(&self, a: Point3<T>, b: Point3<T>) -> bool {
        self.segment_hits(a, b, true).is_empty()
    }

    /// Ray-parity inside test for a closed mesh; the ray direction is fixed
    /// and slightly skewed to avoid edges of axis-aligned meshes.
    pub fn contains(&self, x: Point3<T>) -> bool {
        let mut lo = x;
        let mut hi = x;
        for v in &self.vertices {
            lo = Point3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Point3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        let reach = (hi - lo).norm() * T::lit(2.0) + T::one();
        let dir = Point3::new(T::lit(0.5773), T::lit(0.5812), T::lit(0.5735));
        let far = x + dir * (reach / dir.norm());
        let mut hits = self.segment_hits(x, far, false);
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        hits.dedup_by(|a, b| (*a - *b).abs() < T::lit(1e-12));
        hits.len() % 2 == 1
    }

    /// Closest point on triangle `k` to `x`, with its barycentric weights.
    pub fn closest_point_on_triangle(&self, k: usize, x: Point3<T>) -> (Point3<T>, [T; 3]) {
        let [a, b, c] = self.triangles[k].map(|i| self.vertices[i]);
        closest_point_triangle(x, a, b, c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Self::parse_off(&text, path),
            Some("obj") => Self::parse_obj(&text, path),
            _ => Err(Error::invalid(format!(
                "unknown mesh format for {} (expected .off or .obj)",
                path.display()
            ))),
        }
    }

    pub fn parse_off(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        if !header.starts_with("OFF") {
            return Err(err(ln, "expected OFF header".into()));
        }
        let rest = header[3..].trim();
        let (counts_ln, counts_line) = if rest.is_empty() {
            lines.next().ok_or_else(|| err(ln, "missing counts line".into()))?
        } else {
            (ln, rest)
        };
        let counts: Vec<usize> = counts_line
            .split_whitespace()
            .map(|w| w.parse().map_err(|_| err(counts_ln, format!("bad count {w:?}"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(err(counts_ln, "expected vertex and face counts".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (l, line) = lines.next().ok_or_else(|| err(counts_ln, "unexpected end of vertex list".into()))?;
            let xyz = parse_floats::<T>(line.split_whitespace().take(3)).map_err(|m| err(l, m))?;
            if xyz.len() != 3 {
                return Err(err(l, "vertex needs three coordinates".into()));
            }
            vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (l, line) = lines.next().ok_or_else(|| err(counts_ln, "unexpected end of face list".into()))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|w| w.parse().map_err(|_| err(l, format!("bad index {w:?}"))))
                .collect::<Result<_>>()?;
            if idx.is_empty() || idx[0] != 3 || idx.len() < 4 {
                return Err(err(l, "only triangular faces are supported".into()));
            }
            triangles.push([idx[1], idx[2], idx[3]]);
        }
        Self::new(vertices, triangles).map_err(|e| err(counts_ln, e.to_string()))
    }

    pub fn parse_obj(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            let mut words = line.split_whitespace();
            match words.next() {
                Some("v") => {
                    let xyz = parse_floats::<T>(words.take(3)).map_err(|m| err(ln, m))?;
                    if xyz.len() != 3 {
                        return Err(err(ln, "vertex needs three coordinates".into()));
                    }
                    vertices.push(Point3::new(xyz[0], xyz[1], xyz[2]));
                }
                Some("f") => {
                    let idx: Vec<usize> = words
                        .map(|w| {
                            let head = w.split('/').next().unwrap_or("");
                            let k: i64 = head.parse().map_err(|_| err(ln, format!("bad face index {w:?}")))?;
                            let n = vertices.len() as i64;
                            let abs = if k < 0 { n + k } else { k - 1 };
                            if abs < 0 || abs >= n {
                                return Err(err(ln, format!("face index {k} out of range")));
                            }
                            Ok(abs as usize)
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() != 3 {
                        return Err(err(ln, "only triangular faces are supported".into()));
                    }
                    triangles.push([idx[0], idx[1], idx[2]]);
                }
                _ => {}
            }
        }
        let last = text.lines().count().max(1);
        Self::new(vertices, triangles).map_err(|e| err(last, e.to_string()))
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

fn parse_floats<'a, T: Real>(words: impl Iterator<Item = &'a str>) -> std::result::Result<Vec<T>, String> {
    words
        .map(|w| {
            w.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(T::lit)
                .ok_or_else(|| format!("bad coordinate {w:?}"))
        })
        .collect()
}

/// Closest point of triangle `abc` to `p` (Ericson's region test).
pub(crate) fn closest_point_triangle<T: Real>(
    p: Point3<T>,
    a: Point3<T>,
    b: Point3<T>,
    c: Point3<T>,
) -> (Point3<T>, [T; 3]) {
    let (zero, one) = (T::zero(), T::one());
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= zero && d2 <= zero {
        return (a, [one, zero, zero]);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= zero && d4 <= d3 {
        return (b, [zero, one, zero]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= zero && d1 >= zero && d3 <= zero {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [one - v, v, zero]);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= zero && d5 <= d6 {
        return (c, [zero, zero, one]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= zero && d2 >= zero && d6 <= zero {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [one - w, zero, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= zero && (d4 - d3) >= zero && (d5 - d6) >= zero {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [zero, one - w, w]);
    }
    let denom = one / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [one - v - w, v, w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tetra() -> TriMesh<f64> {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        TriMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]).unwrap()
    }

    #[test]
    fn rejects_bad_indices_and_degenerate_triangles() {
        let v = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(2.0, 0.0, 0.0)];
        assert!(TriMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::new(v, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn uv_sphere_counts() {
        let m = TriMesh::<f64>::uv_sphere(Point3::zero(), 1.0, 49, 100).unwrap();
        assert_eq!(m.vertices().len(), 4902);
        assert_eq!(m.triangles().len(), 2 * 49 * 100);
        assert!(m.vertices().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sphere_inside_test() {
        let m = TriMesh::uv_sphere(Point3::zero(), 1.0, 12, 24).unwrap();
        assert!(m.contains(Point3::new(0.1, -0.2, 0.3)));
        assert!(!m.contains(Point3::new(1.5, 0.0, 0.0)));
        assert!(tetra().contains(Point3::new(0.1, 0.1, 0.1)));
        assert!(!tetra().contains(Point3::new(0.5, 0.5, 0.5)));
    }

    #[test]
    fn line_of_sight_through_sphere() {
        let m = TriMesh::uv_sphere(Point3::zero(), 1.0, 12, 24).unwrap();
        assert!(!m.line_of_sight(Point3::new(-2.0, 0.01, 0.0), Point3::new(2.0, 0.01, 0.0)));
        assert!(m.line_of_sight(Point3::new(-2.0, 0.0, 3.0), Point3::new(2.0, 0.0, 3.0)));
        // start on the surface, end outside, facing away
        let start = m.vertices()[30];
        assert!(m.line_of_sight(start, start * 3.0));
    }

    #[test]
    fn off_and_obj_round_trip() {
        let m = tetra();
        let p = Path::new("mem.off");
        assert_eq!(TriMesh::<f64>::parse_off(&m.to_off(), p).unwrap(), m);
        assert_eq!(TriMesh::<f64>::parse_obj(&m.to_obj(), Path::new("mem.obj")).unwrap(), m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n";
        match TriMesh::<f64>::parse_off(text, Path::new("bad.off")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n";
        match TriMesh::<f64>::parse_obj(text, Path::new("bad.obj")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn neighbors_and_incidence() {
        let m = tetra();
        assert_eq!(m.vertex_neighbors()[0], vec![1, 2, 3]);
        assert_eq!(m.vertex_triangles()[3], vec![1, 2, 3]);
        let e = m.mean_edge_length();
        assert!((e - (3.0 + 3.0 * 2f64.sqrt()) / 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn closest_point_is_no_farther_than_vertices(px in -2.0..2.0f64, py in -2.0..2.0f64, pz in -2.0..2.0f64) {
            let a = Point3::new(0.0, 0.0, 0.0);
            let b = Point3::new(1.0, 0.2, 0.0);
            let c = Point3::new(0.3, 1.0, 0.4);
            let p = Point3::new(px, py, pz);
            let (q, w) = closest_point_triangle(p, a, b, c);
            prop_assert!(w.iter().all(|&x| x >= -1e-12));
            prop_assert!(((a * w[0] + b * w[1] + c * w[2]) - q).norm() < 1e-12);
            // brute force over barycentric samples
            let dq = p.distance(q);
            for i in 0..=20 {
                for j in 0..=(20 - i) {
                    let (u, v) = (i as f64 / 20.0, j as f64 / 20.0);
                    let x = a * (1.0 - u - v) + b * u + c * v;
                    prop_assert!(dq <= p.distance(x) + 1e-12);
                }
            }
        }
    }
}
