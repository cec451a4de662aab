//! Random convex sheets `z(x, y) = ∫₀^y ∫₀^t w(x, u) du dt` over `[−c, c] × [0, b]`,
//! with `w = w0 + Σ A_j cos(p_j x + φ_j) cos(q_j u + ψ_j)`, so `z = z_x = z_y = 0` on `y = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{num, Num};
use crate::numeric::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    #[serde(serialize_with = "num")]
    pub amp: f64,
    #[serde(serialize_with = "num")]
    pub p: f64,
    #[serde(serialize_with = "num")]
    pub phase_x: f64,
    #[serde(serialize_with = "num")]
    pub q: f64,
    #[serde(serialize_with = "num")]
    pub phase_y: f64,
}

/// `∫₀^y ∫₀^t cos(q u + ψ) du dt` and its first two `y`-derivatives.
fn double_integral(q: f64, psi: f64, y: f64) -> [f64; 3] {
    let second = (q * y + psi).cos();
    if q == 0.0 {
        return [0.5 * y * y * psi.cos(), y * psi.cos(), second];
    }
    let first = ((q * y + psi).sin() - psi.sin()) / q;
    let value = (psi.cos() - (q * y + psi).cos()) / (q * q) - y * psi.sin() / q;
    [value, first, second]
}

/// Value, gradient and Hessian `[z, z_x, z_y, z_xx, z_xy, z_yy]`.
pub type Jet = [f64; 6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexCase {
    #[serde(serialize_with = "num")]
    pub c: f64,
    #[serde(serialize_with = "num")]
    pub b: f64,
    #[serde(serialize_with = "num")]
    pub w0: f64,
    pub terms: Vec<Term>,
    /// Lower bound of `z_yy` over the rectangle.
    #[serde(serialize_with = "num")]
    pub m: f64,
    /// Upper bound of `z_yy` over the rectangle.
    #[serde(rename = "M", serialize_with = "num")]
    pub big_m: f64,
}

/// Samples per side for the hypothesis checks.
pub const HYPOTHESIS_GRID: usize = 64;
const BOUND_GRID: usize = 128;
const TOL_BOUNDARY: f64 = 1e-10;
const TOL_PSD: f64 = -1e-10;

impl ConvexCase {
    /// Builds the case and measures `m`, `M` by grid scan plus local refinement.
    pub fn new(c: f64, b: f64, w0: f64, terms: Vec<Term>) -> Result<Self> {
        if !(c > 0.0 && b > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rectangle c={c} b={b} must be positive"
            )));
        }
        let mut case = Self {
            c,
            b,
            w0,
            terms,
            m: 0.0,
            big_m: 0.0,
        };
        case.m = -case.refined_extremum(|v| -v);
        case.big_m = case.refined_extremum(|v| v);
        Ok(case)
    }

    /// `z = q·y²/2`.
    pub fn paraboloid(c: f64, b: f64, q: f64) -> Result<Self> {
        Self::new(c, b, q, Vec::new())
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet {
        let mut j = [0.5 * self.w0 * y * y, 0.0, self.w0 * y, 0.0, 0.0, self.w0];
        for t in &self.terms {
            let [i0, i1, i2] = double_integral(t.q, t.phase_y, y);
            let (s, co) = (t.p * x + t.phase_x).sin_cos();
            let a = t.amp;
            j[0] += a * co * i0;
            j[1] -= a * t.p * s * i0;
            j[2] += a * co * i1;
            j[3] -= a * t.p * t.p * co * i0;
            j[4] -= a * t.p * s * i1;
            j[5] += a * co * i2;
        }
        j
    }

    /// `z_yy = w(x, y)`.
    pub fn w(&self, x: f64, y: f64) -> f64 {
        self.w0
            + self
                .terms
                .iter()
                .map(|t| t.amp * (t.p * x + t.phase_x).cos() * (t.q * y + t.phase_y).cos())
                .sum::<f64>()
    }

    fn grid_point(&self, i: usize, j: usize, n: usize) -> (f64, f64) {
        let s = (n - 1) as f64;
        (-self.c + 2.0 * self.c * i as f64 / s, self.b * j as f64 / s)
    }

    /// Maximum of `sign(z_yy)` over the rectangle.
    fn refined_extremum(&self, sign: impl Fn(f64) -> f64) -> f64 {
        let n = BOUND_GRID;
        let g = |x: f64, y: f64| sign(self.w(x, y));
        let (mut best, mut bx, mut by) = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = self.grid_point(i, j, n);
                let v = g(x, y);
                if v > best {
                    (best, bx, by) = (v, x, y);
                }
            }
        }
        let (hx, hy) = (2.0 * self.c / (n - 1) as f64, self.b / (n - 1) as f64);
        for _ in 0..4 {
            let (x, vx) = golden_max(
                |x| g(x, by),
                (bx - hx).max(-self.c),
                (bx + hx).min(self.c),
                1e-12 * self.c,
            );
            if vx > best {
                (best, bx) = (vx, x);
            }
            let (y, vy) = golden_max(|y| g(bx, y), (by - hy).max(0.0), (by + hy).min(self.b), 1e-12 * self.b);
            if vy > best {
                (best, by) = (vy, y);
            }
        }
        best
    }

    /// The first violated hypothesis on the sample grid, if any.
    pub fn violated_hypothesis(&self) -> Option<String> {
        let n = HYPOTHESIS_GRID;
        for i in 0..n {
            let (x, _) = self.grid_point(i, 0, n);
            let j = self.jet(x, 0.0);
            if j[1].abs() > TOL_BOUNDARY || j[2].abs() > TOL_BOUNDARY {
                return Some(format!("boundary condition z_x = z_y = 0 on y = 0 fails at x = {x}"));
            }
        }
        for i in 0..n {
            for k in 0..n {
                let (x, y) = self.grid_point(i, k, n);
                let j = self.jet(x, y);
                if min_eigenvalue(j[3], j[4], j[5]) < TOL_PSD {
                    return Some(format!("convexity (PSD Hessian) fails at ({x}, {y})"));
                }
                if j[5] < self.m || j[5] > self.big_m {
                    return Some(format!("bounds m ≤ z_yy ≤ M fail at ({x}, {y})"));
                }
            }
        }
        None
    }
}

fn min_eigenvalue(a: f64, b: f64, d: f64) -> f64 {
    0.5 * (a + d - (a - d).hypot(2.0 * b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexCheck {
    /// `min_x z_xx(x, b)`.
    #[serde(serialize_with = "num")]
    pub lhs: f64,
    /// `(M − m)·b²/c²`.
    #[serde(serialize_with = "num")]
    pub rhs: f64,
    #[serde(serialize_with = "num")]
    pub x_at_min: f64,
    pub pass: bool,
}

pub const PASS_SLACK: f64 = 1e-9;

/// Checks `z_xx(x, b) ≤ (M − m)b²/c²` for some `x ∈ [−c, c]`.
pub fn convex_bound_check(case: &ConvexCase) -> Result<ConvexCheck> {
    if let Some(why) = case.violated_hypothesis() {
        return Err(Error::RejectedInput(why));
    }
    let (c, b) = (case.c, case.b);
    let n = 1025;
    let zxx = |x: f64| case.jet(x, b)[3];
    let (mut x_min, mut lhs) = (-c, zxx(-c));
    for i in 1..n {
        let x = -c + 2.0 * c * i as f64 / (n - 1) as f64;
        let v = zxx(x);
        if v < lhs {
            (x_min, lhs) = (x, v);
        }
    }
    let h = 2.0 * c / (n - 1) as f64;
    let (x, neg) = golden_max(|x| -zxx(x), (x_min - h).max(-c), (x_min + h).min(c), 1e-12 * c);
    if -neg < lhs {
        (x_min, lhs) = (x, -neg);
    }
    let rhs = (case.big_m - case.m) * b * b / (c * c);
    Ok(ConvexCheck {
        lhs,
        rhs,
        x_at_min: x_min,
        pass: lhs <= rhs + PASS_SLACK,
    })
}

/// Default aspect of the box: `b = 3c²/a`.
pub fn default_height(a: f64, c: f64) -> f64 {
    3.0 * c * c / a
}

fn candidate(rng: &mut ChaCha8Rng, c: f64, b: f64) -> Result<ConvexCase> {
    let w0 = rng.gen_range(1.0..2.0);
    let count = rng.gen_range(1..=3usize);
    let terms = (0..count)
        .map(|_| {
            let x_dependent = rng.gen_bool(0.8);
            Term {
                amp: rng.gen_range(0.0..w0 / (2.0 * count as f64)),
                p: if x_dependent { rng.gen_range(0.0..1.5) / c } else { 0.0 },
                // near π the x-dependence bends the sheet upward
                phase_x: std::f64::consts::PI + rng.gen_range(-0.5..0.5),
                q: rng.gen_range(0.0..2.0) / b,
                phase_y: rng.gen_range(-0.3..0.3),
            }
        })
        .collect();
    ConvexCase::new(c, b, w0, terms)
}

/// `count` admissible cases, deterministic in `seed`.
pub fn generate_convex_cases(seed: u64, count: usize, c: f64, b: f64) -> Result<Vec<ConvexCase>> {
    if count < 1 {
        return Err(Error::ParameterDomain("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 100 * count;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        if attempts == max_attempts {
            return Err(Error::GeneratorExhausted(format!(
                "{} of {attempts} candidates accepted for c={c}, b={b}; try a flatter box or fewer cases",
                out.len()
            )));
        }
        attempts += 1;
        let case = candidate(&mut rng, c, b)?;
        if case.violated_hypothesis().is_none() {
            out.push(case);
        }
    }
    Ok(out)
}

/// Post-mortem record of a failing case: parameters, verdict and the sampled field.
#[derive(Debug, Clone, Serialize)]
pub struct FailureArchive<'a> {
    pub seed: u64,
    pub index: usize,
    pub case: &'a ConvexCase,
    pub check: ConvexCheck,
    pub grid: usize,
    /// Row-major samples `[x, y, z, z_xx, z_xy, z_yy]`.
    pub samples: Vec<[Num; 6]>,
}

pub fn failure_archive<'a>(seed: u64, index: usize, case: &'a ConvexCase, check: ConvexCheck) -> FailureArchive<'a> {
    let n = HYPOTHESIS_GRID;
    let samples = (0..n)
        .flat_map(|k| (0..n).map(move |i| (i, k)))
        .map(|(i, k)| {
            let (x, y) = case.grid_point(i, k, n);
            let j = case.jet(x, y);
            [x, y, j[0], j[3], j[4], j[5]].map(Num)
        })
        .collect();
    FailureArchive {
        seed,
        index,
        case,
        check,
        grid: n,
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    #[serde(serialize_with = "num")]
    pub c: f64,
    #[serde(serialize_with = "num")]
    pub b: f64,
    pub seeds: Vec<u64>,
    pub cases: usize,
    pub passed: usize,
    /// Smallest `rhs − lhs` observed.
    #[serde(serialize_with = "num")]
    pub min_margin: f64,
    /// JSON archives of failing cases.
    #[serde(skip)]
    pub failures: Vec<String>,
}

/// Generates and checks `count` cases per seed; seeds run in parallel, results in seed order.
pub fn run_suite(seeds: &[u64], count: usize, c: f64, b: f64) -> Result<SuiteReport> {
    let per_seed: Vec<Vec<(ConvexCheck, Option<String>)>> = seeds
        .par_iter()
        .map(|&seed| {
            generate_convex_cases(seed, count, c, b)?
                .iter()
                .enumerate()
                .map(|(i, case)| {
                    let check = convex_bound_check(case)?;
                    let archive = (!check.pass).then(|| crate::format::to_json(&failure_archive(seed, i, case, check)));
                    Ok((check, archive))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let all: Vec<_> = per_seed.into_iter().flatten().collect();
    Ok(SuiteReport {
        c,
        b,
        seeds: seeds.to_vec(),
        cases: all.len(),
        passed: all.iter().filter(|(ch, _)| ch.pass).count(),
        min_margin: all.iter().map(|(ch, _)| ch.rhs - ch.lhs).fold(f64::INFINITY, f64::min),
        failures: all.into_iter().filter_map(|(_, a)| a).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_integral_matches_quadrature() {
        for (q, psi) in [(0.0, 0.2), (1.3, -0.4), (7.0, 0.1)] {
            let y = 0.8;
            let n = 4000;
            let h = y / n as f64;
            // Σ over t of (y − t)·cos(qt + ψ), midpoint rule
            let oracle: f64 = (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (y - t) * (q * t + psi).cos() * h
                })
                .sum();
            assert!((double_integral(q, psi, y)[0] - oracle).abs() < 1e-7);
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let case = generate_convex_cases(3, 1, 1.0, 0.3).unwrap().remove(0);
        let (x, y, h) = (0.3, 0.2, 1e-5);
        let j = case.jet(x, y);
        let fd = |dx: f64, dy: f64, k: usize| case.jet(x + dx, y + dy)[k];
        assert!(((fd(h, 0.0, 0) - fd(-h, 0.0, 0)) / (2.0 * h) - j[1]).abs() < 1e-8);
        assert!(((fd(0.0, h, 0) - fd(0.0, -h, 0)) / (2.0 * h) - j[2]).abs() < 1e-8);
        assert!(((fd(h, 0.0, 1) - fd(-h, 0.0, 1)) / (2.0 * h) - j[3]).abs() < 1e-8);
        assert!(((fd(0.0, h, 1) - fd(0.0, -h, 1)) / (2.0 * h) - j[4]).abs() < 1e-8);
        assert!(((fd(0.0, h, 2) - fd(0.0, -h, 2)) / (2.0 * h) - j[5]).abs() < 1e-8);
    }

    #[test]
    fn paraboloid_sheet() {
        let case = ConvexCase::paraboloid(1.0, 0.3, 2.5).unwrap();
        assert_eq!((case.m, case.big_m), (2.5, 2.5));
        let r = convex_bound_check(&case).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn nonconvex_candidate_is_rejected() {
        // z = y²(2 + sin x)/2
        let t = Term {
            amp: 1.0,
            p: 1.0,
            phase_x: -std::f64::consts::FRAC_PI_2,
            q: 0.0,
            phase_y: 0.0,
        };
        let case = ConvexCase::new(1.0, 0.1, 2.0, vec![t]).unwrap();
        let z = case.jet(0.4, 0.1)[0];
        assert!((z - 0.01 * (2.0 + 0.4f64.sin()) / 2.0).abs() < 1e-15);
        assert!((case.m - (2.0 - 1f64.sin())).abs() < 1e-12);
        assert!((case.big_m - (2.0 + 1f64.sin())).abs() < 1e-12);
        match convex_bound_check(&case) {
            Err(Error::RejectedInput(why)) => assert!(why.contains("convexity")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_convex_cases(1, 1, 1.0, 0.3).unwrap();
        let b = generate_convex_cases(1, 1, 1.0, 0.3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_convex_cases(2, 1, 1.0, 0.3).unwrap());
        assert!(generate_convex_cases(1, 0, 1.0, 0.3).is_err());
    }

    #[test]
    fn seed_seven_accepts() {
        let cases = generate_convex_cases(7, 100, 1.0, 0.3).unwrap();
        assert_eq!(cases.len(), 100);
        assert!(cases.iter().any(|c| c.terms.iter().any(|t| t.p > 0.0)));
    }

    #[test]
    fn suite_passes_and_archives_nothing() {
        let c = 0.3;
        for b in [default_height(1.0, c), c] {
            let r = run_suite(&[1, 2], 50, c, b).unwrap();
            assert_eq!(r.passed, r.cases, "{:?}", r.failures.first());
            assert!(r.failures.is_empty());
        }
    }

    #[test]
    fn archive_serializes_the_field() {
        let case = ConvexCase::paraboloid(1.0, 0.3, 1.0).unwrap();
        let check = convex_bound_check(&case).unwrap();
        let json = crate::format::to_json(&failure_archive(0, 0, &case, check));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(
            v["samples"].as_array().unwrap().len(),
            HYPOTHESIS_GRID * HYPOTHESIS_GRID
        );
        assert_eq!(v["case"]["M"].as_f64(), Some(1.0));
    }
}
