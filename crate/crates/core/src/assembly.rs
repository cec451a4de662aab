//! The accumulating metric `h`: flat background with radial bumps in disjoint discs
//! `D_n` of radius `1/(2(n+1)²)` centred at `(1/n, 0)`.
//!
//! Inside a disc, with `y` the offset from the centre, `ρ = |y|` and `n̂ = y/ρ`,
//! the radial metric `dρ² + f²dθ²` reads in Cartesian components
//!
//! ```text
//! h = δ + φ(ρ)·(δ − n̂n̂ᵀ),    φ = f²/ρ² − 1 = 2q + q²,  q = (f − ρ)/ρ
//! ```
//!
//! `φ` is built from the excess `f − ρ` so bumps of size `a⁶` survive in `f64`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{csv_table, num};
use crate::profile::{make_pogorelov_profile, RadialProfile, Side};

pub type Mat2 = [[f64; 2]; 2];
/// `d1[k][i][j] = ∂_k h_ij`
pub type Jet1 = [[[f64; 2]; 2]; 2];
/// `d2[k][l][i][j] = ∂_k ∂_l h_ij`
pub type Jet2 = [[[[f64; 2]; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disc {
    pub n: usize,
    #[serde(rename = "cx", serialize_with = "num")]
    pub cx: f64,
    #[serde(rename = "cy", serialize_with = "num")]
    pub cy: f64,
    #[serde(rename = "r", serialize_with = "num")]
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscLayout {
    pub entries: Vec<Disc>,
    pub n_max: usize,
    /// Entries follow the `(1/n, 0)` pattern, enabling O(1) lookup.
    #[serde(skip)]
    accumulating: bool,
}

/// Pairwise disjointness and origin exclusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayoutCheck {
    pub pairs_checked: u64,
    pub overlaps: u64,
    pub contains_origin: u64,
}

/// Exhaustive pair checks are run up to this many discs; beyond it only
/// neighbours are compared (all centres lie on the x-axis in decreasing order).
pub const ALL_PAIRS_LIMIT: usize = 5000;

pub fn disc_radius(n: usize) -> f64 {
    1.0 / (2.0 * ((n + 1) as f64).powi(2))
}

/// Builds discs `1..=n_max` and verifies them.
pub fn build_layout(n_max: usize) -> Result<DiscLayout> {
    if n_max < 1 {
        return Err(Error::ParameterDomain("n_max must be at least 1".into()));
    }
    let entries = (1..=n_max)
        .map(|n| Disc {
            n,
            cx: 1.0 / n as f64,
            cy: 0.0,
            radius: disc_radius(n),
        })
        .collect();
    let layout = DiscLayout {
        entries,
        n_max,
        accumulating: true,
    };
    let check = layout.check();
    if check.overlaps > 0 || check.contains_origin > 0 {
        return Err(Error::InternalConsistency(format!("layout violations: {check:?}")));
    }
    Ok(layout)
}

impl DiscLayout {
    /// A layout with one disc, for isolated tests.
    pub fn single(cx: f64, cy: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::ParameterDomain(format!("radius {radius} must be positive")));
        }
        Ok(Self {
            entries: vec![Disc { n: 1, cx, cy, radius }],
            n_max: 1,
            accumulating: false,
        })
    }

    pub fn check(&self) -> LayoutCheck {
        let discs = &self.entries;
        let overlap = |a: &Disc, b: &Disc| {
            let d = (a.cx - b.cx).hypot(a.cy - b.cy);
            d <= a.radius + b.radius
        };
        let mut pairs = 0u64;
        let mut overlaps = 0u64;
        if discs.len() <= ALL_PAIRS_LIMIT || !self.accumulating {
            for i in 0..discs.len() {
                for j in i + 1..discs.len() {
                    pairs += 1;
                    overlaps += overlap(&discs[i], &discs[j]) as u64;
                }
            }
        } else {
            for w in discs.windows(2) {
                pairs += 1;
                overlaps += overlap(&w[0], &w[1]) as u64;
            }
        }
        let contains_origin = discs.iter().filter(|d| d.cx.hypot(d.cy) <= d.radius).count() as u64;
        LayoutCheck {
            pairs_checked: pairs,
            overlaps,
            contains_origin,
        }
    }

    /// Index into `entries` of the disc containing `(x, y)` (closed disc), if any.
    pub fn locate(&self, x: f64, y: f64) -> Option<usize> {
        let inside = |d: &Disc| (x - d.cx).hypot(y - d.cy) <= d.radius;
        if self.accumulating {
            if !(x > 0.0) {
                return None;
            }
            let guess = (1.0 / x).round();
            if !guess.is_finite() {
                return None;
            }
            let guess = guess as i64;
            (guess - 2..=guess + 2)
                .filter(|&n| n >= 1 && n as usize <= self.n_max)
                .map(|n| n as usize - 1)
                .find(|&i| inside(&self.entries[i]))
        } else {
            self.entries.iter().position(inside)
        }
    }

    pub fn to_json(&self) -> String {
        crate::format::to_json(&self.entries)
    }
}

/// Radial factor `φ = f²/ρ² − 1` and its first three derivatives.
pub fn radial_factor(p: &RadialProfile, rho: f64, side: Side) -> [f64; 4] {
    let g: [f64; 4] = [0, 1, 2, 3].map(|k| p.excess_raw(rho, k, side));
    let r1 = 1.0 / rho;
    let q0 = g[0] * r1;
    let q1 = (g[1] - q0) * r1;
    let q2 = (g[2] - 2.0 * q1) * r1;
    let q3 = (g[3] - 3.0 * q2) * r1;
    [
        q0 * (2.0 + q0),
        2.0 * q1 * (1.0 + q0),
        2.0 * q2 * (1.0 + q0) + 2.0 * q1 * q1,
        2.0 * q3 * (1.0 + q0) + 6.0 * q1 * q2,
    ]
}

/// Value and derivatives of `h − δ` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricJet {
    pub dev: Mat2,
    pub d1: Jet1,
    pub d2: Jet2,
}

impl MetricJet {
    pub fn max_abs_dev(&self) -> f64 {
        self.dev.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn max_abs_d1(&self) -> f64 {
        self.d1.iter().flatten().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn max_abs_d2(&self) -> f64 {
        self.d2
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn d2_distance(&self, other: &MetricJet) -> f64 {
        let mut m = 0.0f64;
        for k in 0..2 {
            for l in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        m = m.max((self.d2[k][l][i][j] - other.d2[k][l][i][j]).abs());
                    }
                }
            }
        }
        m
    }
}

/// `h` on the plane: identity outside the discs and on each inner half.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    pub layout: DiscLayout,
    profiles: Vec<RadialProfile>,
}

fn delta(i: usize, j: usize) -> f64 {
    (i == j) as u8 as f64
}

impl MetricField {
    pub fn new(layout: DiscLayout) -> Result<Self> {
        let profiles = layout
            .entries
            .iter()
            .map(|d| make_pogorelov_profile(d.radius))
            .collect::<Result<_>>()?;
        Ok(Self { layout, profiles })
    }

    pub fn profile(&self, index: usize) -> &RadialProfile {
        &self.profiles[index]
    }

    /// Jet of `h − δ` relative to disc `index`, with `order` ∈ {0, 1, 2}.
    pub fn local_jet(&self, index: usize, x: f64, y: f64, order: u8) -> MetricJet {
        let d = &self.layout.entries[index];
        self.jet_in_disc(index, x - d.cx, y - d.cy, order, Side::Right)
    }

    /// `side` picks the branch used exactly at `ρ = a/2`.
    pub fn jet_in_disc(&self, index: usize, ox: f64, oy: f64, order: u8, side: Side) -> MetricJet {
        let p = &self.profiles[index];
        let a = p.a();
        let rho = ox.hypot(oy);
        let mut jet = MetricJet::default();
        if !(rho > 0.5 * a && rho < a) {
            return jet;
        }
        let phi = radial_factor(p, rho, side);
        let nv = [ox / rho, oy / rho];
        let proj = |i: usize, j: usize| delta(i, j) - nv[i] * nv[j];
        for i in 0..2 {
            for j in 0..2 {
                jet.dev[i][j] = phi[0] * proj(i, j);
            }
        }
        if order == 0 {
            return jet;
        }
        let r1 = 1.0 / rho;
        let dproj = |k: usize, i: usize, j: usize| {
            (-(delta(i, k) * nv[j] + nv[i] * delta(j, k)) + 2.0 * nv[i] * nv[j] * nv[k]) * r1
        };
        let dphi = |k: usize| phi[1] * nv[k];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    jet.d1[k][i][j] = dphi(k) * proj(i, j) + phi[0] * dproj(k, i, j);
                }
            }
        }
        if order == 1 {
            return jet;
        }
        let r2 = r1 * r1;
        for k in 0..2 {
            for l in 0..2 {
                let ddphi = phi[2] * nv[k] * nv[l] + phi[1] * (delta(k, l) - nv[k] * nv[l]) * r1;
                for i in 0..2 {
                    for j in 0..2 {
                        let ddproj = (-(delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
                            + 2.0
                                * (delta(i, k) * nv[j] * nv[l]
                                    + delta(j, k) * nv[i] * nv[l]
                                    + delta(i, l) * nv[j] * nv[k]
                                    + delta(j, l) * nv[i] * nv[k]
                                    + delta(k, l) * nv[i] * nv[j])
                            - 8.0 * nv[i] * nv[j] * nv[k] * nv[l])
                            * r2;
                        jet.d2[k][l][i][j] =
                            ddphi * proj(i, j) + dphi(k) * dproj(l, i, j) + dphi(l) * dproj(k, i, j) + phi[0] * ddproj;
                    }
                }
            }
        }
        jet
    }

    /// `h − δ` at `(x, y)`.
    pub fn eval_deviation(&self, x: f64, y: f64) -> Mat2 {
        match self.layout.locate(x, y) {
            Some(i) => self.local_jet(i, x, y, 0).dev,
            None => [[0.0; 2]; 2],
        }
    }

    /// Partials of `h` up to `order` (1 or 2) at `(x, y)`.
    pub fn metric_derivatives(&self, x: f64, y: f64, order: u8) -> Result<MetricJet> {
        if !(order == 1 || order == 2) {
            return Err(Error::ParameterDomain(format!(
                "derivative order {order} not in {{1, 2}}"
            )));
        }
        Ok(match self.layout.locate(x, y) {
            Some(i) => self.local_jet(i, x, y, order),
            None => MetricJet::default(),
        })
    }
}

/// `h(x, y)`: `(f²/ρ²)δ + (1 − f²/ρ²)n̂n̂ᵀ` inside a bump annulus, identity elsewhere.
pub fn eval_metric(field: &MetricField, x: f64, y: f64) -> Mat2 {
    let d = field.eval_deviation(x, y);
    [[1.0 + d[0][0], d[0][1]], [d[1][0], 1.0 + d[1][1]]]
}

pub fn metric_derivatives(field: &MetricField, x: f64, y: f64, order: u8) -> Result<MetricJet> {
    field.metric_derivatives(x, y, order)
}

/// Default working window `[x0, x1] × [y0, y1]`.
pub const DEFAULT_DOMAIN: [f64; 4] = [-0.1, 1.2, -0.2, 0.2];

/// CSV `x,y,h11,h12,h22` on an `nx × ny` grid of `domain`.
pub fn grid_dump(field: &MetricField, domain: [f64; 4], nx: usize, ny: usize) -> String {
    let [x0, x1, y0, y1] = domain;
    let coord = |lo: f64, hi: f64, i: usize, n: usize| {
        if n > 1 {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        } else {
            lo
        }
    };
    let rows = (0..ny).flat_map(|j| {
        (0..nx).map(move |i| {
            let (x, y) = (coord(x0, x1, i, nx), coord(y0, y1, j, ny));
            let h = eval_metric(field, x, y);
            vec![x, y, h[0][0], h[0][1], h[1][1]]
        })
    });
    csv_table(&["x", "y", "h11", "h12", "h22"], rows)
}

/// One-sided mismatch of `h`, `Dh`, `D²h` across the outer circle `ρ = a` of one disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GluingReport {
    pub n: usize,
    /// One-sided finite differences along the normal, orders 0, 1, 2.
    #[serde(serialize_with = "crate::format::nums")]
    pub fd_mismatch: [f64; 3],
    /// Analytic jets just inside versus just outside, orders 0, 1, 2.
    #[serde(serialize_with = "crate::format::nums")]
    pub jet_mismatch: [f64; 3],
}

impl GluingReport {
    pub fn max(&self) -> f64 {
        self.fd_mismatch
            .iter()
            .chain(&self.jet_mismatch)
            .fold(0.0, |m, v| m.max(*v))
    }
}

pub fn gluing_mismatch(field: &MetricField, index: usize, n_angles: usize) -> GluingReport {
    let d = field.layout.entries[index];
    let a = d.radius;
    let s = 1e-4 * a;
    let mut fd = [0.0f64; 3];
    let mut jet = [0.0f64; 3];
    for j in 0..n_angles {
        let theta = std::f64::consts::TAU * (j as f64 + 0.25) / n_angles as f64;
        let nv = [theta.cos(), theta.sin()];
        let dev_at = |t: f64| {
            let r = a + t;
            field.eval_deviation(d.cx + r * nv[0], d.cy + r * nv[1])
        };
        for (i, k) in [(0, 0), (0, 1), (1, 1)] {
            let line = |dir: f64| -> [f64; 3] {
                let v: Vec<f64> = (0..4).map(|m| dev_at(dir * m as f64 * s)[i][k]).collect();
                [
                    2.0 * v[1] - v[2],
                    dir * (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * s),
                    (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (s * s),
                ]
            };
            let (inner, outer) = (line(-1.0), line(1.0));
            for o in 0..3 {
                fd[o] = fd[o].max((inner[o] - outer[o]).abs());
            }
        }
        let eta = 1e-9 * a;
        let inside = field.jet_in_disc(index, (a - eta) * nv[0], (a - eta) * nv[1], 2, Side::Right);
        let outside = field.jet_in_disc(index, (a + eta) * nv[0], (a + eta) * nv[1], 2, Side::Right);
        jet[0] = jet[0].max((inside.max_abs_dev() - outside.max_abs_dev()).abs());
        jet[1] = jet[1].max(inside.max_abs_d1().max(outside.max_abs_d1()));
        jet[2] = jet[2].max(inside.d2_distance(&outside));
    }
    GluingReport {
        n: d.n,
        fd_mismatch: fd,
        jet_mismatch: jet,
    }
}
