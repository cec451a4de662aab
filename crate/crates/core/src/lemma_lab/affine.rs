//! Chords of a parameter disc on which a map into 3-space is affine.

use serde::Serialize;

use crate::format::num;

/// A map from the closed disc of radius `radius` about the origin into 3-space.
pub struct DiscMap<'a> {
    pub radius: f64,
    pub map: Box<dyn Fn([f64; 2]) -> [f64; 3] + Sync + 'a>,
}

impl<'a> DiscMap<'a> {
    pub fn new(radius: f64, map: impl Fn([f64; 2]) -> [f64; 3] + Sync + 'a) -> Self {
        Self {
            radius,
            map: Box::new(map),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chord {
    /// Indices of the endpoints among the boundary samples.
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "num")]
    pub length: f64,
    /// Largest distance of the image from the affine interpolant of its endpoint images.
    #[serde(serialize_with = "num")]
    pub deviation: f64,
}

/// Chords between `n_boundary` equally spaced boundary points whose image deviates from
/// affine by less than `tol·length` at `n_interior` interior samples, sorted by length.
pub fn affine_segment_detect(m: &DiscMap<'_>, n_boundary: usize, n_interior: usize, tol: f64) -> Vec<Chord> {
    let boundary: Vec<[f64; 2]> = (0..n_boundary)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n_boundary as f64;
            [m.radius * th.cos(), m.radius * th.sin()]
        })
        .collect();
    let images: Vec<[f64; 3]> = boundary.iter().map(|p| (m.map)(*p)).collect();
    let mut chords = Vec::new();
    for i in 0..n_boundary {
        for j in i + 1..n_boundary {
            let (p, q) = (boundary[i], boundary[j]);
            let length = (q[0] - p[0]).hypot(q[1] - p[1]);
            let mut deviation = 0.0f64;
            for k in 1..=n_interior {
                let t = k as f64 / (n_interior + 1) as f64;
                let x = (m.map)([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                let d: f64 = (0..3)
                    .map(|c| x[c] - ((1.0 - t) * images[i][c] + t * images[j][c]))
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                deviation = deviation.max(d);
            }
            if deviation < tol * length {
                chords.push(Chord {
                    i,
                    j,
                    length,
                    deviation,
                });
            }
        }
    }
    chords.sort_by(|a, b| a.length.total_cmp(&b.length).then((a.i, a.j).cmp(&(b.i, b.j))));
    chords
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::make_pogorelov_profile;

    #[test]
    fn flat_part_of_the_embedding() {
        let p = make_pogorelov_profile(1.0).unwrap();
        // on ρ ≤ a/2 the surface is the plane z = 0 with r = f(ρ)
        let m = DiscMap::new(0.45, |[u, v]| {
            let rho = u.hypot(v);
            if rho == 0.0 {
                return [0.0; 3];
            }
            let r = p.eval(rho, 0).unwrap();
            [r * u / rho, r * v / rho, 0.0]
        });
        let n = 32;
        let chords = affine_segment_detect(&m, n, 16, 1e-9);
        assert_eq!(chords.len(), n * (n - 1) / 2);
        assert!(chords.windows(2).all(|w| w[0].length <= w[1].length));
    }

    fn sphere_cap() -> DiscMap<'static> {
        DiscMap::new(0.5, |[u, v]| [u, v, (1.0 - u * u - v * v).sqrt()])
    }

    fn cylinder() -> DiscMap<'static> {
        DiscMap::new(0.5, |[u, v]| [u.sin(), v, u.cos()])
    }

    #[test]
    fn sphere_cap_has_none() {
        let chords = affine_segment_detect(&sphere_cap(), 48, 16, 1e-6);
        assert!(chords.is_empty());
    }

    #[test]
    fn cylinder_keeps_axis_parallel_chords() {
        let n = 48;
        let chords = affine_segment_detect(&cylinder(), n, 16, 1e-6);
        let mut pairs: Vec<(usize, usize)> = chords.iter().map(|c| (c.i, c.j)).collect();
        pairs.sort();
        let expected: Vec<(usize, usize)> = (1..n / 2).map(|k| (k, n - k)).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn rigid_motion_invariance() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let moved = DiscMap::new(0.5, move |uv| {
            let x = [uv[0].sin(), uv[1], uv[0].cos()];
            [c * x[0] - s * x[1] + 2.0, s * x[0] + c * x[1] - 1.0, x[2] + 0.5]
        });
        let a = affine_segment_detect(&cylinder(), 40, 16, 1e-6);
        let b = affine_segment_detect(&moved, 40, 16, 1e-6);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.i, x.j), (y.i, y.j));
            assert!((x.deviation - y.deviation).abs() <= 1e-12);
        }
    }
}
