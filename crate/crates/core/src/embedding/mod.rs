//! Rotationally symmetric isometric embedding of `dρ² + f(ρ)²dθ²`.
//!
//! The generating curve is `ρ ↦ (r, z) = (f(ρ), z(ρ))` with
//! `z(ρ) = ∫₀^ρ √(1 − f′(t)²) dt`, an arc-length parametrization. For the
//! two-branch profile the integrand vanishes identically on the flat branch, the
//! curve is C¹ across `ρ = a/2`, and `z″` jumps there.

mod mesh;

pub use mesh::{build_mesh, discrete_gauss_curvature, discrete_mean_curvature, RevolutionMesh};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{csv_table, num};
use crate::numeric::{integrate_adaptive, richardson};
use crate::profile::{ProfileKind, RadialProfile, Side};

/// Placement of curve samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    /// Uniform samples on the flat part `[0, a/2]`.
    pub n_flat: usize,
    /// Nominal number of uniform cells across the embedded window.
    pub n_window: usize,
    /// Growth ratio of the geometric clusters at both window ends.
    #[serde(serialize_with = "crate::format::num")]
    pub ratio: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            n_flat: 32,
            n_window: 96,
            ratio: 1.2,
        }
    }
}

/// One sample of the generating curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    #[serde(serialize_with = "num")]
    pub rho: f64,
    #[serde(serialize_with = "num")]
    pub r: f64,
    #[serde(serialize_with = "num")]
    pub z: f64,
    #[serde(serialize_with = "num")]
    pub dz: f64,
    #[serde(serialize_with = "num")]
    pub d2z_left: f64,
    #[serde(serialize_with = "num")]
    pub d2z_right: f64,
    #[serde(serialize_with = "num")]
    pub dr: f64,
    #[serde(serialize_with = "num")]
    pub d2r: f64,
}

/// Sampled generating curve of the embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub profile: RadialProfile,
    #[serde(serialize_with = "num")]
    pub rho_max: f64,
    #[serde(serialize_with = "num")]
    pub tol: f64,
    /// Summed quadrature error estimate for `z(ρ_max)`.
    #[serde(serialize_with = "num")]
    pub error_estimate: f64,
    pub samples: Vec<CurveSample>,
}

/// `1 − f′²`, evaluated as `−s(2 + s)` with `s = f′ − 1`.
fn radicand(p: &RadialProfile, rho: f64) -> f64 {
    let s = p.slope_excess(rho);
    -s * (2.0 + s)
}

/// `z′(ρ) = √(1 − f′(ρ)²)`, clamped at zero for rounding-level negatives.
pub fn slope_dz(p: &RadialProfile, rho: f64) -> f64 {
    radicand(p, rho).max(0.0).sqrt()
}

fn second_derivative(p: &RadialProfile, rho: f64, dz: f64, side: Side) -> f64 {
    let d1 = p.eval_raw(rho, 1);
    let d2 = p.excess_raw(rho, 2, side);
    if dz > 0.0 {
        return -d1 * d2 / dz + 0.0;
    }
    if d2 != 0.0 {
        return f64::INFINITY;
    }
    // double root of 1 − f′²: z″² = −(f″² + f′f‴)
    let d3 = p.excess_raw(rho, 3, side);
    (-(d2 * d2 + d1 * d3)).max(0.0).sqrt()
}

fn clustered(lo: f64, hi: f64, n_uniform: usize, ratio: f64) -> Vec<f64> {
    let span = hi - lo;
    let h_u = span / n_uniform as f64;
    let h_min = h_u / 64.0;
    let mut steps = Vec::new();
    let mut h = h_min;
    while h < h_u {
        steps.push(h);
        h *= ratio;
    }
    let cluster: f64 = steps.iter().sum();
    let mut pts = vec![lo];
    if 2.0 * cluster >= span {
        for i in 1..n_uniform {
            pts.push(lo + span * i as f64 / n_uniform as f64);
        }
        pts.push(hi);
        return pts;
    }
    let mut x = lo;
    for s in &steps {
        x += s;
        pts.push(x);
    }
    let mid_lo = x;
    let mid_hi = hi - cluster;
    let n_mid = ((mid_hi - mid_lo) / h_u).ceil().max(1.0) as usize;
    for i in 1..n_mid {
        pts.push(mid_lo + (mid_hi - mid_lo) * i as f64 / n_mid as f64);
    }
    let mut right = vec![hi];
    let mut x = hi;
    for s in &steps {
        x -= s;
        right.push(x);
    }
    right.reverse();
    pts.extend(right);
    pts
}

/// Integrates the generating curve up to `rho_max` with absolute quadrature error `tol`.
pub fn integrate_profile(p: &RadialProfile, rho_max: f64, tol: f64) -> Result<ProfileCurve> {
    integrate_profile_with(p, rho_max, tol, &SampleSpec::default())
}

/// Default upper limit `3a/4 − 10⁻³a` for the two-branch profile.
pub fn default_rho_max(a: f64) -> f64 {
    0.75 * a - 1e-3 * a
}

pub fn integrate_profile_with(p: &RadialProfile, rho_max: f64, tol: f64, spec: &SampleSpec) -> Result<ProfileCurve> {
    if !(tol > 0.0) {
        return Err(Error::ParameterDomain(format!("tol = {tol} must be positive")));
    }
    if spec.n_window < 2 || spec.ratio <= 1.0 {
        return Err(Error::Configuration(
            "sample spec needs n_window ≥ 2 and ratio > 1".into(),
        ));
    }
    let a = p.a();
    if p.kind() == ProfileKind::Pogorelov {
        if rho_max >= 0.75 * a {
            return Err(Error::Domain(format!(
                "ρ_max = {rho_max} must stay below 3a/4 = {}: f′ < 1 only on the window (a/2, 3a/4)",
                0.75 * a
            )));
        }
        if rho_max <= 0.5 * a {
            return Err(Error::Domain(format!(
                "ρ_max = {rho_max} must exceed a/2 = {}",
                0.5 * a
            )));
        }
    } else {
        p.check_domain(rho_max)?;
        if rho_max <= 0.0 {
            return Err(Error::Domain("ρ_max must be positive".into()));
        }
    }

    let start = p.branch_point().unwrap_or(0.0);
    let mut rhos: Vec<f64> = Vec::new();
    if start > 0.0 {
        let n = spec.n_flat.max(1);
        rhos.extend((0..n).map(|i| start * i as f64 / n as f64));
    }
    rhos.extend(clustered(start, rho_max, spec.n_window, spec.ratio));

    for &rho in &rhos {
        let rad = radicand(p, rho);
        if rad < -1e-14 {
            let msg = format!("1 − f′² = {rad:e} < 0 at ρ = {rho}");
            return Err(if p.kind() == ProfileKind::Pogorelov {
                Error::InternalConsistency(msg)
            } else {
                Error::Domain(format!("{msg}: outside the embeddable window"))
            });
        }
    }

    let total = rho_max - start;
    let sub_start = p.radicand_root().map(|root| (0.5 * (start + root), root));
    let mut z = 0.0;
    let mut err = 0.0;
    let mut zs = vec![0.0; rhos.len()];
    for j in 0..rhos.len() - 1 {
        let (lo, hi) = (rhos[j], rhos[j + 1]);
        if hi > start {
            let local_tol = tol * (hi - lo) / total;
            let q = match sub_start {
                // near the square-root zero of the radicand integrate in u = √(root − ρ)
                Some((from, root)) if lo >= from => {
                    let (u_lo, u_hi) = ((root - hi).sqrt(), (root - lo).sqrt());
                    integrate_adaptive(|u| slope_dz(p, root - u * u) * 2.0 * u, u_lo, u_hi, local_tol, 400)
                }
                _ => integrate_adaptive(|t| slope_dz(p, t), lo, hi, local_tol, 400),
            };
            z += q.value;
            err += q.error;
        }
        zs[j + 1] = z;
    }

    let samples = rhos
        .iter()
        .zip(&zs)
        .map(|(&rho, &z)| {
            let dz = slope_dz(p, rho);
            CurveSample {
                rho,
                r: p.eval_raw(rho, 0),
                z,
                dz,
                d2z_left: second_derivative(p, rho, dz, Side::Left),
                d2z_right: second_derivative(p, rho, dz, Side::Right),
                dr: p.eval_raw(rho, 1),
                d2r: p.eval_raw(rho, 2),
            }
        })
        .collect();
    Ok(ProfileCurve {
        profile: *p,
        rho_max,
        tol,
        error_estimate: err,
        samples,
    })
}

impl ProfileCurve {
    /// `z′` at an arbitrary radius, straight from the integrand.
    pub fn dz_at(&self, rho: f64) -> f64 {
        slope_dz(&self.profile, rho)
    }

    pub fn z_at_max(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.z)
    }

    /// CSV with header `rho,r,z,dz,d2z_left,d2z_right`.
    pub fn to_csv(&self) -> String {
        csv_table(
            &["rho", "r", "z", "dz", "d2z_left", "d2z_right"],
            self.samples
                .iter()
                .map(|s| vec![s.rho, s.r, s.z, s.dz, s.d2z_left, s.d2z_right]),
        )
    }
}

/// One-sided limits of `z″` at the branch point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpReport {
    #[serde(serialize_with = "num")]
    pub rho: f64,
    #[serde(serialize_with = "num")]
    pub left_limit: f64,
    #[serde(serialize_with = "num")]
    pub right_limit: f64,
    /// Richardson diagonal, coarse to fine.
    #[serde(serialize_with = "crate::format::nums")]
    pub ladder: Vec<f64>,
    /// Whether the last two extrapolants agree to 10⁻³ relative.
    pub converged: bool,
}

/// Left limit from the flat branch, right limit by extrapolating
/// `−f″f′/√(1 − f′²)` as `ρ → a/2⁺`.
pub fn jump_analysis(c: &ProfileCurve) -> Result<JumpReport> {
    let p = &c.profile;
    let Some(b) = p.branch_point() else {
        return Err(Error::Configuration("profile has no branch point".into()));
    };
    let has_left = c.samples.iter().any(|s| s.rho < b);
    let has_right = c.samples.iter().any(|s| s.rho > b);
    if !(has_left && has_right) {
        return Err(Error::Configuration("curve needs samples on both sides of a/2".into()));
    }
    let left_limit = c
        .samples
        .iter()
        .rfind(|s| s.rho <= b)
        .map(|s| if s.rho == b { s.d2z_left } else { s.d2z_right })
        .unwrap();

    let big = (c.rho_max - b) / 8.0;
    let right = |rho: f64| {
        let dz = slope_dz(p, rho);
        -p.eval_raw(rho, 2) * p.eval_raw(rho, 1) / dz
    };
    let est: Vec<f64> = (0..6).map(|j| right(b + big / 2f64.powi(j))).collect();
    let ladder = richardson(&est, 1);
    let n = ladder.len();
    let right_limit = ladder[n - 1];
    let converged = (ladder[n - 1] - ladder[n - 2]).abs() <= 1e-3 * right_limit.abs();
    Ok(JumpReport {
        rho: b,
        left_limit,
        right_limit,
        ladder,
        converged,
    })
}

/// Where and how densely to sample the first fundamental form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualGrid {
    #[serde(serialize_with = "crate::format::num")]
    pub rho_lo: f64,
    #[serde(serialize_with = "crate::format::num")]
    pub rho_hi: f64,
    pub n_rho: usize,
    pub n_theta: usize,
    /// Multiplier applied to `z′`; anything but 1 is a negative control.
    #[serde(serialize_with = "crate::format::num")]
    pub dz_scale: f64,
}

impl ResidualGrid {
    pub fn new(rho_lo: f64, rho_hi: f64, n_rho: usize, n_theta: usize) -> Self {
        Self {
            rho_lo,
            rho_hi,
            n_rho,
            n_theta,
            dz_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    #[serde(serialize_with = "num")]
    pub max_e: f64,
    #[serde(serialize_with = "num")]
    pub max_f: f64,
    #[serde(serialize_with = "num")]
    pub max_g: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.max_e.max(self.max_f).max(self.max_g)
    }
}

/// Max `|E − 1|`, `|F|`, `|G − f²|` of `(ρ, θ) ↦ (f cos θ, f sin θ, z)` over a grid.
pub fn induced_metric_residual(p: &RadialProfile, c: &ProfileCurve, grid: &ResidualGrid) -> Result<ResidualReport> {
    if grid.rho_lo < 0.0 || grid.rho_hi > c.rho_max || grid.rho_lo > grid.rho_hi || grid.n_rho < 1 || grid.n_theta < 1 {
        return Err(Error::Configuration(format!(
            "grid [{}, {}] must lie within [0, ρ_max = {}]",
            grid.rho_lo, grid.rho_hi, c.rho_max
        )));
    }
    let mut report = ResidualReport {
        max_e: 0.0,
        max_f: 0.0,
        max_g: 0.0,
    };
    for i in 0..grid.n_rho {
        let rho = if grid.n_rho == 1 {
            grid.rho_lo
        } else {
            grid.rho_lo + (grid.rho_hi - grid.rho_lo) * i as f64 / (grid.n_rho - 1) as f64
        };
        let f = p.eval_raw(rho, 0);
        let df = p.eval_raw(rho, 1);
        let dz = grid.dz_scale * c.dz_at(rho);
        for j in 0..grid.n_theta {
            let theta = std::f64::consts::TAU * j as f64 / grid.n_theta as f64;
            let (s, co) = theta.sin_cos();
            let x_rho = [df * co, df * s, dz];
            let x_theta = [-f * s, f * co, 0.0];
            let e = dot(&x_rho, &x_rho);
            let ff = dot(&x_rho, &x_theta);
            let g = dot(&x_theta, &x_theta);
            report.max_e = report.max_e.max((e - 1.0).abs());
            report.max_f = report.max_f.max(ff.abs());
            report.max_g = report.max_g.max((g - f * f).abs());
        }
    }
    Ok(report)
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Principal and mean curvatures of one ring of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureRow {
    #[serde(serialize_with = "num")]
    pub rho: f64,
    /// Curvature of the generating curve, `f′z″ − z′f″`.
    #[serde(serialize_with = "num")]
    pub k_meridian: f64,
    /// `z′/f`.
    #[serde(serialize_with = "num")]
    pub k_circle: f64,
    #[serde(serialize_with = "num")]
    pub mean: f64,
    /// Evaluated from one-sided `z″` at a branch point.
    pub one_sided: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanCurvatureReport {
    pub rows: Vec<CurvatureRow>,
    /// Sign of `H` over rows where it is nonzero (+1, −1, or 0 when mixed or all zero).
    pub sign: i8,
    /// Radii bracketing every sign change of `H`, as `(ρ_before, ρ_after)`.
    #[serde(serialize_with = "crate::format::pairs")]
    pub sign_changes: Vec<(f64, f64)>,
    /// Branch-point radii where one-sided values were used.
    #[serde(serialize_with = "crate::format::nums")]
    pub flagged: Vec<f64>,
}

impl MeanCurvatureReport {
    /// Sign of `H` restricted to `[lo, hi]`, with the same conventions as [`sign`](Self::sign).
    pub fn sign_on(&self, lo: f64, hi: f64) -> i8 {
        let rows: Vec<&CurvatureRow> = self.rows.iter().filter(|r| r.rho >= lo && r.rho <= hi).collect();
        let scale = rows.iter().fold(0.0f64, |acc, r| acc.max(r.mean.abs()));
        let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let mut signs = rows
            .iter()
            .filter(|r| r.mean.abs() > floor)
            .map(|r| r.mean.signum() as i8);
        match signs.next() {
            Some(first) if signs.all(|s| s == first) => first,
            _ => 0,
        }
    }
}

/// Analytic principal curvatures per mesh ring with the normal
/// `N = (−z′cos θ, −z′sin θ, f′)` (upward on the flat part).
pub fn mean_curvature_scan(m: &RevolutionMesh) -> MeanCurvatureReport {
    let mut rows = Vec::new();
    let mut flagged = Vec::new();
    for s in &m.curve.samples {
        let one_sided = s.d2z_left != s.d2z_right;
        let sides: &[Side] = if one_sided {
            flagged.push(s.rho);
            &[Side::Left, Side::Right]
        } else {
            &[Side::Right]
        };
        for &side in sides {
            let (d2z, d2r) = match side {
                Side::Left => (s.d2z_left, m.curve.profile.excess_raw(s.rho, 2, Side::Left)),
                Side::Right => (s.d2z_right, s.d2r),
            };
            let k_meridian = s.dr * d2z - s.dz * d2r + 0.0;
            // at the apex z′/f → z″/f′
            let k_circle = if s.r > 0.0 { s.dz / s.r } else { d2z / s.dr };
            rows.push(CurvatureRow {
                rho: s.rho,
                k_meridian,
                k_circle,
                mean: 0.5 * (k_meridian + k_circle),
                one_sided,
            });
        }
    }
    let scale = rows.iter().fold(0.0f64, |acc, r| acc.max(r.mean.abs()));
    let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let signed: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean.abs() > floor)
        .map(|r| (r.rho, r.mean.signum()))
        .collect();
    let mut sign_changes = Vec::new();
    for w in signed.windows(2) {
        if w[0].1 != w[1].1 {
            sign_changes.push((w[0].0, w[1].0));
        }
    }
    let sign = match signed.first() {
        Some(&(_, s)) if sign_changes.is_empty() => s as i8,
        _ => 0,
    };
    MeanCurvatureReport {
        rows,
        sign,
        sign_changes,
        flagged,
    }
}
