//! Triangulated surfaces of revolution and mesh-based curvature diagnostics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::ProfileCurve;
use crate::error::{Error, Result};
use crate::format::fmt17;

/// Ring-structured triangle mesh of the rotated generating curve.
///
/// Vertex 0 is the apex `ρ = 0`; ring `i ≥ 1` holds `n_theta` vertices at sample
/// `i` of the curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevolutionMesh {
    #[serde(serialize_with = "crate::format::rows")]
    pub vertices: Vec<[f64; 3]>,
    /// `(ρ, θ)` of each vertex.
    #[serde(serialize_with = "crate::format::rows")]
    pub params: Vec<[f64; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub n_rho: usize,
    pub n_theta: usize,
    #[serde(skip)]
    pub curve: ProfileCurve,
}

pub fn build_mesh(c: &ProfileCurve, n_theta: usize) -> Result<RevolutionMesh> {
    if n_theta < 8 {
        return Err(Error::Configuration(format!("n_theta = {n_theta} must be at least 8")));
    }
    if c.samples.len() < 3 {
        return Err(Error::Configuration(format!(
            "curve has {} samples, need at least 3",
            c.samples.len()
        )));
    }
    if c.samples[0].rho != 0.0 {
        return Err(Error::Configuration("curve must start at the apex ρ = 0".into()));
    }
    let thetas: Vec<(f64, f64, f64)> = (0..n_theta)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n_theta as f64;
            (t, t.cos(), t.sin())
        })
        .collect();

    let apex = &c.samples[0];
    let mut vertices = vec![[0.0, 0.0, apex.z]];
    let mut params = vec![[0.0, 0.0]];
    for s in &c.samples[1..] {
        for &(t, co, si) in &thetas {
            vertices.push([s.r * co, s.r * si, s.z]);
            params.push([s.rho, t]);
        }
    }
    let ring = |i: usize, j: usize| 1 + (i - 1) * n_theta + (j % n_theta);
    let mut faces = Vec::with_capacity(n_theta * (2 * c.samples.len() - 3));
    for j in 0..n_theta {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..c.samples.len() - 1 {
        for j in 0..n_theta {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (cc, d) = (ring(i + 1, j), ring(i + 1, j + 1));
            faces.push([a, cc, d]);
            faces.push([a, d, b]);
        }
    }
    Ok(RevolutionMesh {
        vertices,
        params,
        faces,
        n_rho: c.samples.len(),
        n_theta,
        curve: c.clone(),
    })
}

impl RevolutionMesh {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                edges.insert((u.min(v), u.max(v)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Whether vertex `v` lies on the outer boundary ring.
    pub fn is_boundary(&self, v: usize) -> bool {
        v > 0 && (v - 1) / self.n_theta == self.n_rho - 2
    }

    pub fn face_normal(&self, f: usize) -> [f64; 3] {
        let [i, j, k] = self.faces[f];
        let (p, q, r) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        cross(sub(q, p), sub(r, p))
    }

    /// Wavefront OBJ: header comment, `v` lines at 17 significant digits, 1-based `f` lines.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let a = self.curve.profile.a();
        writeln!(out, "# pogorelov a={} rho_max={}", a, self.curve.rho_max).unwrap();
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", fmt17(v[0]), fmt17(v[1]), fmt17(v[2])).unwrap();
        }
        for f in &self.faces {
            writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
        }
        out
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn angle(u: [f64; 3], v: [f64; 3]) -> f64 {
    norm(cross(u, v)).atan2(dot(u, v))
}

/// Angle defect over barycentric area at interior vertices; `None` on the boundary.
pub fn discrete_gauss_curvature(m: &RevolutionMesh) -> Vec<Option<f64>> {
    let n = m.vertices.len();
    let mut angle_sum = vec![0.0; n];
    let mut area = vec![0.0; n];
    for f in &m.faces {
        let p = f.map(|i| m.vertices[i]);
        let a = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        for k in 0..3 {
            let (o, u, v) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            angle_sum[f[k]] += angle(sub(u, o), sub(v, o));
            area[f[k]] += a / 3.0;
        }
    }
    (0..n)
        .map(|v| (!m.is_boundary(v)).then(|| (std::f64::consts::TAU - angle_sum[v]) / area[v]))
        .collect()
}

/// `|Δx|/2` from the cotangent Laplacian with barycentric areas; `None` on the boundary.
pub fn discrete_mean_curvature(m: &RevolutionMesh) -> Vec<Option<f64>> {
    let n = m.vertices.len();
    let mut weights: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut area = vec![0.0; n];
    for f in &m.faces {
        let p = f.map(|i| m.vertices[i]);
        let a = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        for k in 0..3 {
            let (o, u, v) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let (eu, ev) = (sub(u, o), sub(v, o));
            let cot = dot(eu, ev) / norm(cross(eu, ev));
            let (i, j) = (f[(k + 1) % 3], f[(k + 2) % 3]);
            *weights.entry((i.min(j), i.max(j))).or_default() += cot;
            area[f[k]] += a / 3.0;
        }
    }
    let mut lap = vec![[0.0; 3]; n];
    for (&(i, j), &w) in &weights {
        let d = sub(m.vertices[j], m.vertices[i]);
        for c in 0..3 {
            lap[i][c] += w * d[c];
            lap[j][c] -= w * d[c];
        }
    }
    (0..n)
        .map(|v| (!m.is_boundary(v)).then(|| norm(lap[v]) / (4.0 * area[v])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::gauss_curvature;
    use crate::embedding::{integrate_profile, integrate_profile_with, mean_curvature_scan, SampleSpec};
    use crate::profile::{make_pogorelov_profile, RadialProfile};

    fn full_mesh(n_theta: usize) -> RevolutionMesh {
        let p = make_pogorelov_profile(1.0).unwrap();
        let c = integrate_profile(&p, 0.74, 1e-12).unwrap();
        build_mesh(&c, n_theta).unwrap()
    }

    #[test]
    fn flat_disc_mesh() {
        let p = RadialProfile::flat(1.0).unwrap();
        let spec = SampleSpec {
            n_flat: 0,
            n_window: 2,
            ratio: 1.2,
        };
        let c = integrate_profile_with(&p, 0.5, 1e-12, &spec).unwrap();
        assert_eq!(c.samples.len(), 3);
        let m = build_mesh(&c, 8).unwrap();
        assert!(m.vertices.iter().all(|v| v[2] == 0.0));
        assert_eq!(m.euler_characteristic(), 1);
        assert!((0..m.faces.len()).all(|f| m.face_normal(f)[2] > 0.0));
    }

    #[test]
    fn disc_topology_and_orientation() {
        let m = full_mesh(64);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.vertices.len(), 1 + (m.n_rho - 1) * 64);
        assert!((0..m.faces.len()).all(|f| m.face_normal(f)[2] > 0.0));
    }

    #[test]
    fn vertices_sit_on_profile_radius() {
        let m = full_mesh(64);
        for (v, prm) in m.vertices.iter().zip(&m.params) {
            let f = m.curve.profile.eval_raw(prm[0], 0);
            let r2 = v[0] * v[0] + v[1] * v[1];
            assert!((r2 - f * f).abs() <= 1e-12 * (f * f).max(f64::MIN_POSITIVE));
        }
        // ring radii reuse the sampled r bit for bit
        for (i, s) in m.curve.samples.iter().enumerate().skip(1) {
            assert_eq!(m.vertices[1 + (i - 1) * 64][0], s.r);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        let p = make_pogorelov_profile(1.0).unwrap();
        let c = integrate_profile(&p, 0.74, 1e-10).unwrap();
        assert!(matches!(build_mesh(&c, 7), Err(Error::Configuration(_))));
        let mut short = c.clone();
        short.samples.truncate(2);
        assert!(matches!(build_mesh(&short, 8), Err(Error::Configuration(_))));
    }

    #[test]
    fn obj_format() {
        let m = full_mesh(8);
        let obj = m.to_obj();
        assert!(obj.starts_with("# pogorelov a=1 rho_max=0.74\n"));
        assert!(!obj.contains('\r'));
        let v_lines = obj.lines().filter(|l| l.starts_with("v ")).count();
        let f_lines: Vec<_> = obj.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(v_lines, m.vertices.len());
        assert_eq!(f_lines.len(), m.faces.len());
        assert_eq!(f_lines[0], "f 1 2 3");
    }

    #[test]
    fn angle_defect_tracks_gauss_curvature() {
        let p = make_pogorelov_profile(1.0).unwrap();
        let spec = SampleSpec {
            n_flat: 64,
            n_window: 192,
            ratio: 1.2,
        };
        let c = integrate_profile_with(&p, 0.74, 1e-12, &spec).unwrap();
        let m = build_mesh(&c, 256).unwrap();
        let k = discrete_gauss_curvature(&m);
        let band: Vec<(f64, f64)> = (0..m.vertices.len())
            .filter(|&v| m.params[v][0] > 0.55 && m.params[v][0] < 0.65)
            .map(|v| (k[v].unwrap(), gauss_curvature(&p, m.params[v][0]).unwrap()))
            .collect();
        assert!(!band.is_empty());
        let scale = band.iter().fold(0.0f64, |s, b| s.max(b.1.abs()));
        let worst = band.iter().fold(0.0f64, |s, b| s.max((b.0 - b.1).abs()));
        assert!(worst <= 0.1 * scale, "worst {worst} scale {scale}");
        // flat part: no defect
        let flat_worst = (1..m.vertices.len())
            .filter(|&v| m.params[v][0] < 0.45)
            .fold(0.0f64, |s, v| s.max(k[v].unwrap().abs()));
        // rounding only; areas shrink toward the apex
        assert!(flat_worst < 1e-8, "{flat_worst}");
    }

    #[test]
    fn sphere_mesh_mean_curvature() {
        let s = RadialProfile::sphere(3.0).unwrap();
        let c = integrate_profile(&s, 1.5, 1e-12).unwrap();
        let m = build_mesh(&c, 128).unwrap();
        let report = mean_curvature_scan(&m);
        assert_eq!(report.sign, 1);
        for row in &report.rows {
            assert!((row.mean - 1.0).abs() < 1e-9, "{row:?}");
        }
        let h = discrete_mean_curvature(&m);
        let interior: Vec<f64> = (1..m.vertices.len()).filter_map(|v| h[v]).collect();
        let worst = interior.iter().fold(0.0f64, |s, x| s.max((x - 1.0).abs()));
        assert!(worst < 0.05, "{worst}");
    }
}
