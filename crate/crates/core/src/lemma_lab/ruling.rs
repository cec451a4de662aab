//! Principal curvature along the rulings of developable surfaces `X(t, s) = γ(t) + s·d(t)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;
use crate::numeric::fit_line;

type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn axpy(a: V3, s: f64, b: V3) -> V3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RuledFamily {
    /// Apex at the origin, half-angle `alpha`; `s` is distance from the apex.
    Cone {
        #[serde(serialize_with = "crate::format::num")]
        alpha: f64,
    },
    Cylinder {
        #[serde(serialize_with = "crate::format::num")]
        radius: f64,
    },
    /// Tangent lines of the helix `(r cos, r sin, h·)` in arclength.
    HelixTangent {
        #[serde(serialize_with = "crate::format::num")]
        radius: f64,
        #[serde(serialize_with = "crate::format::num")]
        pitch: f64,
    },
}

impl RuledFamily {
    /// `[γ, γ′, γ″, d, d′, d″]` at `t`.
    fn frame(&self, t: f64) -> [V3; 6] {
        match *self {
            RuledFamily::Cone { alpha } => {
                let (sa, ca) = alpha.sin_cos();
                let (st, ct) = t.sin_cos();
                let z = [0.0; 3];
                [
                    z,
                    z,
                    z,
                    [sa * ct, sa * st, ca],
                    [-sa * st, sa * ct, 0.0],
                    [-sa * ct, -sa * st, 0.0],
                ]
            }
            RuledFamily::Cylinder { radius: r } => {
                let (st, ct) = t.sin_cos();
                let z = [0.0; 3];
                [
                    [r * ct, r * st, 0.0],
                    [-r * st, r * ct, 0.0],
                    [-r * ct, -r * st, 0.0],
                    [0.0, 0.0, 1.0],
                    z,
                    z,
                ]
            }
            RuledFamily::HelixTangent { radius: r, pitch: h } => {
                let c = r.hypot(h);
                let (st, ct) = (t / c).sin_cos();
                let g1 = [-r / c * st, r / c * ct, h / c];
                let g2 = [-r / (c * c) * ct, -r / (c * c) * st, 0.0];
                let g3 = [r / (c * c * c) * st, -r / (c * c * c) * ct, 0.0];
                [[r * ct, r * st, h * t / c], g1, g2, g1, g2, g3]
            }
        }
    }

    fn point(&self, t: f64, s: f64) -> V3 {
        let f = self.frame(t);
        axpy(f[0], s, f[3])
    }

    /// `|k|` along the ruling from the classical closed forms.
    pub fn reference_curvature(&self, s: f64) -> f64 {
        match *self {
            RuledFamily::Cone { alpha } => 1.0 / (alpha.tan() * s),
            RuledFamily::Cylinder { radius } => 1.0 / radius,
            // τ/(κ s) with κ = r/c², τ = h/c²
            RuledFamily::HelixTangent { radius, pitch } => pitch / (radius * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    Analytic,
    /// Central differences of `X` with step equal to the sample spacing.
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuledSample {
    pub family: RuledFamily,
    #[serde(serialize_with = "num")]
    pub t0: f64,
    /// `(s, k(s))` along the ruling through `γ(t0)`.
    #[serde(serialize_with = "crate::format::pairs")]
    pub samples: Vec<(f64, f64)>,
    #[serde(serialize_with = "num")]
    pub max_abs_gauss: f64,
}

/// `(K, 2H)` from first and second fundamental forms.
fn curvatures(xt: V3, xs: V3, xtt: V3, xts: V3, xss: V3) -> (f64, f64) {
    let nrm = cross(xt, xs);
    let len = dot(nrm, nrm).sqrt();
    let n = nrm.map(|v| v / len);
    let (e, f, g) = (dot(xt, xt), dot(xt, xs), dot(xs, xs));
    let (l, m, nn) = (dot(xtt, n), dot(xts, n), dot(xss, n));
    let det = e * g - f * f;
    ((l * nn - m * m) / det, (e * nn - 2.0 * f * m + g * l) / det)
}

/// Samples the nonzero principal curvature at `n` equally spaced `s ∈ [s0, s1]`.
pub fn sample_ruling(
    family: RuledFamily,
    t0: f64,
    s0: f64,
    s1: f64,
    n: usize,
    mode: CurvatureMode,
) -> Result<RuledSample> {
    if n < 3 || !(s1 > s0) {
        return Err(Error::Configuration(format!(
            "need n ≥ 3 and s1 > s0 (n={n}, [{s0}, {s1}])"
        )));
    }
    if !matches!(family, RuledFamily::Cylinder { .. }) && s0 <= 0.0 {
        return Err(Error::Domain(format!(
            "segment [{s0}, {s1}] reaches the singular edge s = 0"
        )));
    }
    let spacing = (s1 - s0) / (n - 1) as f64;
    let mut max_abs_gauss = 0.0f64;
    let samples = (0..n)
        .map(|i| {
            let s = s0 + spacing * i as f64;
            let (k_gauss, k) = match mode {
                CurvatureMode::Analytic => {
                    let [_, g1, g2, d, d1, d2] = family.frame(t0);
                    curvatures(axpy(g1, s, d1), d, axpy(g2, s, d2), d1, [0.0; 3])
                }
                CurvatureMode::FiniteDifference => {
                    let h = spacing;
                    let x = |dt: f64, ds: f64| family.point(t0 + dt, s + ds);
                    let c = x(0.0, 0.0);
                    let diff1 = |p: V3, q: V3| [0, 1, 2].map(|i| (p[i] - q[i]) / (2.0 * h));
                    let diff2 = |p: V3, q: V3| [0, 1, 2].map(|i| (p[i] - 2.0 * c[i] + q[i]) / (h * h));
                    let xt = diff1(x(h, 0.0), x(-h, 0.0));
                    let xs = diff1(x(0.0, h), x(0.0, -h));
                    let xtt = diff2(x(h, 0.0), x(-h, 0.0));
                    let xss = diff2(x(0.0, h), x(0.0, -h));
                    let (pp, pm, mp, mm) = (x(h, h), x(h, -h), x(-h, h), x(-h, -h));
                    let xts = [0, 1, 2].map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h));
                    curvatures(xt, xs, xtt, xts, xss)
                }
            };
            max_abs_gauss = max_abs_gauss.max(k_gauss.abs());
            (s, k)
        })
        .collect();
    Ok(RuledSample {
        family,
        t0,
        samples,
        max_abs_gauss,
    })
}

/// `k = A/(s + B)` fitted through `1/k = s/A + B/A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RulingFit {
    /// Infinite when `1/k` is constant.
    #[serde(rename = "A", serialize_with = "num")]
    pub a: f64,
    #[serde(rename = "B", serialize_with = "num")]
    pub b: f64,
    #[serde(serialize_with = "num")]
    pub slope: f64,
    #[serde(serialize_with = "num")]
    pub intercept: f64,
    #[serde(serialize_with = "num")]
    pub max_residual: f64,
}

pub fn ruling_curvature_fit(sample: &RuledSample) -> Result<RulingFit> {
    let ks: Vec<f64> = sample.samples.iter().map(|p| p.1).collect();
    if ks.iter().any(|k| *k == 0.0 || !k.is_finite()) {
        return Err(Error::RejectedInput(
            "principal curvature vanishes on the segment".into(),
        ));
    }
    if ks.iter().any(|k| k.signum() != ks[0].signum()) {
        return Err(Error::RejectedInput(
            "principal curvature changes sign on the segment".into(),
        ));
    }
    let s: Vec<f64> = sample.samples.iter().map(|p| p.0).collect();
    let inv: Vec<f64> = ks.iter().map(|k| 1.0 / k).collect();
    let line = fit_line(&s, &inv).ok_or_else(|| Error::Configuration("degenerate sample abscissae".into()))?;
    let a = 1.0 / line.slope;
    Ok(RulingFit {
        a,
        b: line.intercept * a,
        slope: line.slope,
        intercept: line.intercept,
        max_residual: line.max_residual,
    })
}
