//! Sampled norms of the bumps `h_n − δ` and their decay in `n`.
//!
//! Matrix norms are max-absolute-entry in Cartesian components. Sup norms are taken
//! over a polar grid covering the support annulus `a/2 ≤ ρ ≤ a` of each disc.

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{MetricField, MetricJet};
use crate::error::{Error, Result};
use crate::format::{csv_table, num};
use crate::numeric::fit_line;
use crate::profile::Side;

pub const NORM_NAMES: [&str; 4] = ["sup_dev", "sup_D1", "sup_D2", "lip_D2"];

/// Reference decay orders of the four norms, as exponents of `n + 1`.
pub const CLAIMED_EXPONENTS: [f64; 4] = [-20.0, -6.0, -4.0, -2.0];

/// Relative change under grid doubling above which a row is flagged.
pub const REFINEMENT_FLAG: f64 = 0.2;

pub const MIN_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormRow {
    pub n: usize,
    #[serde(serialize_with = "num")]
    pub a: f64,
    #[serde(serialize_with = "num")]
    pub sup_dev: f64,
    #[serde(rename = "sup_D1", serialize_with = "num")]
    pub sup_d1: f64,
    #[serde(rename = "sup_D2", serialize_with = "num")]
    pub sup_d2: f64,
    #[serde(rename = "lip_D2", serialize_with = "num")]
    pub lip_d2: f64,
    /// `ρ/a` at the midpoint of the pair realising the Lipschitz quotient.
    #[serde(serialize_with = "num")]
    pub lip_argmax: f64,
    /// Largest relative change of any norm when the grid is doubled.
    #[serde(serialize_with = "num")]
    pub refinement_change: f64,
    pub flagged: bool,
}

impl NormRow {
    pub fn norms(&self) -> [f64; 4] {
        [self.sup_dev, self.sup_d1, self.sup_d2, self.lip_d2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub rows: Vec<NormRow>,
    /// All four norms are nonincreasing for `n ≥ n0`.
    pub n0: usize,
}

impl NormReport {
    pub fn to_csv(&self) -> String {
        csv_table(
            &["n", "a", "sup_dev", "sup_D1", "sup_D2", "lip_D2"],
            self.rows
                .iter()
                .map(|r| vec![r.n as f64, r.a, r.sup_dev, r.sup_d1, r.sup_d2, r.lip_d2]),
        )
    }
}

struct GridNorms {
    norms: [f64; 4],
    argmax: f64,
}

fn scan(field: &MetricField, index: usize, grid_n: usize) -> GridNorms {
    let a = field.layout.entries[index].radius;
    let n_ang = 4 * grid_n;
    let point = |i: usize, j: usize| {
        let rho = a * (0.5 + 0.5 * i as f64 / grid_n as f64);
        let th = std::f64::consts::TAU * j as f64 / n_ang as f64;
        (rho * th.cos(), rho * th.sin())
    };
    // row i holds ring ρ_i; ρ = a/2 is taken from the outer branch, ρ = a gives zero.
    let jets: Vec<Vec<MetricJet>> = (0..=grid_n)
        .map(|i| {
            (0..n_ang)
                .map(|j| {
                    let (x, y) = point(i, j);
                    field.jet_in_disc(index, x, y, 2, Side::Right)
                })
                .collect()
        })
        .collect();
    let mut norms = [0.0f64; 4];
    let mut argmax = f64::NAN;
    for i in 0..=grid_n {
        for j in 0..n_ang {
            let jet = &jets[i][j];
            norms[0] = norms[0].max(jet.max_abs_dev());
            norms[1] = norms[1].max(jet.max_abs_d1());
            norms[2] = norms[2].max(jet.max_abs_d2());
            let (x, y) = point(i, j);
            let mut pair = |i2: usize, j2: usize| {
                let (x2, y2) = point(i2, j2);
                let q = jet.d2_distance(&jets[i2][j2]) / (x2 - x).hypot(y2 - y);
                if q > norms[3] {
                    norms[3] = q;
                    argmax = 0.5 * (x + x2).hypot(y + y2) / a;
                }
            };
            if i < grid_n {
                pair(i + 1, j);
            }
            pair(i, (j + 1) % n_ang);
        }
    }
    GridNorms { norms, argmax }
}

/// Norms of bump `n` (1-based) on a `grid_n × 4·grid_n` polar grid, refined once.
pub fn estimate_norms(field: &MetricField, n: usize, grid_n: usize) -> Result<NormRow> {
    let index = field
        .layout
        .entries
        .iter()
        .position(|d| d.n == n)
        .ok_or_else(|| Error::ParameterDomain(format!("disc {n} not in layout")))?;
    if grid_n < MIN_GRID {
        return Err(Error::ParameterDomain(format!("grid_n {grid_n} below {MIN_GRID}")));
    }
    let coarse = scan(field, index, grid_n);
    let fine = scan(field, index, 2 * grid_n);
    let mut change = 0.0f64;
    let mut norms = [0.0; 4];
    for k in 0..4 {
        let (c, f) = (coarse.norms[k], fine.norms[k]);
        norms[k] = c.max(f);
        if norms[k] > 0.0 {
            change = change.max((f - c).abs() / norms[k]);
        }
    }
    let argmax = if fine.norms[3] >= coarse.norms[3] {
        fine.argmax
    } else {
        coarse.argmax
    };
    Ok(NormRow {
        n,
        a: field.layout.entries[index].radius,
        sup_dev: norms[0],
        sup_d1: norms[1],
        sup_d2: norms[2],
        lip_d2: norms[3],
        lip_argmax: argmax,
        refinement_change: change,
        flagged: change > REFINEMENT_FLAG,
    })
}

/// Smallest `n0` such that every norm is nonincreasing over rows with `n ≥ n0`.
pub fn monotone_from(rows: &[NormRow]) -> usize {
    let mut start = rows.len().saturating_sub(1);
    while start > 0 {
        let (prev, cur) = (rows[start - 1].norms(), rows[start].norms());
        if (0..4).any(|k| cur[k] > prev[k]) {
            break;
        }
        start -= 1;
    }
    rows.get(start).map_or(1, |r| r.n)
}

/// Rows for every disc of the layout, computed in parallel and ordered by `n`.
pub fn estimate_report(field: &MetricField, grid_n: usize) -> Result<NormReport> {
    let rows = field
        .layout
        .entries
        .par_iter()
        .map(|d| estimate_norms(field, d.n, grid_n))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport {
        n0: monotone_from(&rows),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub norm: &'static str,
    /// `−∞` when the norm vanishes on the whole range.
    #[serde(serialize_with = "num")]
    pub slope: f64,
    /// Half-width of the 95% confidence interval.
    #[serde(serialize_with = "num")]
    pub ci: f64,
    #[serde(serialize_with = "num")]
    pub residual: f64,
    #[serde(serialize_with = "num")]
    pub claimed: f64,
    /// The claimed exponent lies outside `slope ± ci`.
    pub disagrees: bool,
}

pub const FIT_RANGE: (usize, usize) = (5, 40);

/// Log-log slope of each norm against `n + 1` for `n ∈ [lo, hi]`.
pub fn decay_fit(rows: &[NormRow], lo: usize, hi: usize) -> Result<[ExponentFit; 4]> {
    let sel: Vec<&NormRow> = rows.iter().filter(|r| r.n >= lo && r.n <= hi).collect();
    if sel.len() < 5 {
        return Err(Error::Configuration(format!(
            "{} rows in [{lo}, {hi}], need 5",
            sel.len()
        )));
    }
    let x: Vec<f64> = sel.iter().map(|r| ((r.n + 1) as f64).ln()).collect();
    let fit = |k: usize| {
        let vals: Vec<f64> = sel.iter().map(|r| r.norms()[k]).collect();
        let claimed = CLAIMED_EXPONENTS[k];
        if vals.iter().all(|v| *v == 0.0) {
            return ExponentFit {
                norm: NORM_NAMES[k],
                slope: f64::NEG_INFINITY,
                ci: 0.0,
                residual: 0.0,
                claimed,
                disagrees: true,
            };
        }
        let pts: Vec<(f64, f64)> = x
            .iter()
            .zip(&vals)
            .filter(|(_, v)| **v > 0.0)
            .map(|(a, v)| (*a, v.ln()))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        match fit_line(&xs, &ys) {
            Some(l) => {
                let ci = 1.96 * l.slope_std_err;
                ExponentFit {
                    norm: NORM_NAMES[k],
                    slope: l.slope,
                    ci,
                    residual: l.max_residual,
                    claimed,
                    disagrees: (l.slope - claimed).abs() > ci,
                }
            }
            None => ExponentFit {
                norm: NORM_NAMES[k],
                slope: f64::NAN,
                ci: f64::NAN,
                residual: f64::NAN,
                claimed,
                disagrees: true,
            },
        }
    };
    Ok([fit(0), fit(1), fit(2), fit(3)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub m: usize,
    #[serde(serialize_with = "crate::format::nums")]
    pub tails: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyTable {
    pub rows: Vec<TailRow>,
    /// Tails strictly decrease while positive and never increase.
    pub monotone: [bool; 4],
    /// First `m` with tail below `1e−9`, if reached.
    pub below_threshold: [Option<usize>; 4],
}

pub const TAIL_THRESHOLD: f64 = 1e-9;

/// Tail sums `Σ_{m<n≤n_max}` of each norm for `m = 1..=n_max`.
pub fn cauchy_check(rows: &[NormRow], n_max: usize) -> CauchyTable {
    let mut by_n = vec![[0.0f64; 4]; n_max + 1];
    for r in rows.iter().filter(|r| r.n >= 1 && r.n <= n_max) {
        by_n[r.n] = r.norms();
    }
    let mut tails = vec![[0.0f64; 4]; n_max + 1];
    for m in (1..n_max).rev() {
        for k in 0..4 {
            tails[m][k] = tails[m + 1][k] + by_n[m + 1][k];
        }
    }
    let rows: Vec<TailRow> = (1..=n_max).map(|m| TailRow { m, tails: tails[m] }).collect();
    let mut monotone = [true; 4];
    let mut below = [None; 4];
    for k in 0..4 {
        for w in rows.windows(2) {
            let (p, c) = (w[0].tails[k], w[1].tails[k]);
            if c > p || (c == p && p > 0.0) {
                monotone[k] = false;
            }
        }
        below[k] = rows.iter().find(|r| r.tails[k] < TAIL_THRESHOLD).map(|r| r.m);
    }
    CauchyTable {
        rows,
        monotone,
        below_threshold: below,
    }
}

/// JSON summary: rows, fitted exponents next to the claimed ones, and tail behaviour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularitySummary {
    pub n_max: usize,
    pub grid_n: usize,
    pub n0: usize,
    pub fit_range: (usize, usize),
    pub exponents: Option<[ExponentFit; 4]>,
    pub tails_monotone: [bool; 4],
    pub tail_below_1e9_from: [Option<usize>; 4],
    pub flagged_rows: Vec<usize>,
    pub rows: Vec<NormRow>,
}

pub fn summarize(report: &NormReport, grid_n: usize) -> RegularitySummary {
    let n_max = report.rows.iter().map(|r| r.n).max().unwrap_or(0);
    let cauchy = cauchy_check(&report.rows, n_max);
    RegularitySummary {
        n_max,
        grid_n,
        n0: report.n0,
        fit_range: FIT_RANGE,
        exponents: decay_fit(&report.rows, FIT_RANGE.0, FIT_RANGE.1).ok(),
        tails_monotone: cauchy.monotone,
        tail_below_1e9_from: cauchy.below_threshold,
        flagged_rows: report.rows.iter().filter(|r| r.flagged).map(|r| r.n).collect(),
        rows: report.rows.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_layout, radial_factor, DiscLayout};
    use crate::numeric::golden_max;
    use crate::profile::make_pogorelov_profile;

    fn synthetic(n_max: usize, c: f64, p: f64) -> Vec<NormRow> {
        (1..=n_max)
            .map(|n| {
                let v = c * ((n + 1) as f64).powf(p);
                NormRow {
                    n,
                    a: 0.0,
                    sup_dev: v,
                    sup_d1: v,
                    sup_d2: v,
                    lip_d2: v,
                    lip_argmax: 0.0,
                    refinement_change: 0.0,
                    flagged: false,
                }
            })
            .collect()
    }

    #[test]
    fn synthetic_power_law_slope() {
        let rows = synthetic(40, 3.0, -4.0);
        for f in decay_fit(&rows, 5, 40).unwrap() {
            assert!((f.slope + 4.0).abs() < 1e-6);
            assert!(f.ci < 1e-6);
        }
        assert!(decay_fit(&rows, 5, 8).is_err());
    }

    #[test]
    fn zero_norms_give_sentinel() {
        let rows = synthetic(10, 0.0, -4.0);
        let fits = decay_fit(&rows, 1, 10).unwrap();
        assert!(fits.iter().all(|f| f.slope == f64::NEG_INFINITY));
    }

    #[test]
    fn synthetic_tails_follow_integral_comparison() {
        let n_max = 4000;
        let rows = synthetic(n_max, 1.0, -4.0);
        let t = cauchy_check(&rows, n_max);
        assert!(t.monotone.iter().all(|m| *m));
        for m in [50usize, 100, 200] {
            let approx = ((m + 1) as f64 + 0.5).powi(-3) / 3.0;
            let tail = t.rows[m - 1].tails[0];
            assert!((tail / approx - 1.0).abs() < 0.01, "m={m} {tail} {approx}");
        }
    }

    #[test]
    fn single_disc_tail_is_zero() {
        let f = MetricField::new(DiscLayout::single(0.0, 0.0, 0.125).unwrap()).unwrap();
        let row = estimate_norms(&f, 1, 64).unwrap();
        let t = cauchy_check(&[row], 1);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].tails, [0.0; 4]);
    }

    #[test]
    fn sup_dev_matches_radial_maximum() {
        let f = MetricField::new(build_layout(1).unwrap()).unwrap();
        let row = estimate_norms(&f, 1, 64).unwrap();
        let p = make_pogorelov_profile(0.125).unwrap();
        let (_, oracle) = golden_max(
            |r| radial_factor(&p, r, Side::Right)[0].abs(),
            0.5 * 0.125,
            0.125,
            1e-12,
        );
        assert!((row.sup_dev / oracle - 1.0).abs() < 1e-3, "{} {oracle}", row.sup_dev);
        assert!(row.sup_dev <= oracle * (1.0 + 1e-12));
        assert!(!row.flagged);
    }

    #[test]
    fn errors_and_zero_field() {
        let f = MetricField::new(build_layout(3).unwrap()).unwrap();
        assert!(estimate_norms(&f, 4, 64).is_err());
        assert!(estimate_norms(&f, 1, 32).is_err());
    }

    #[test]
    fn sup_norms_stable_under_refinement() {
        let f = MetricField::new(build_layout(3).unwrap()).unwrap();
        for n in 1..=3 {
            let coarse = estimate_norms(&f, n, 64).unwrap();
            let fine = estimate_norms(&f, n, 128).unwrap();
            for k in 0..3 {
                let (c, g) = (coarse.norms()[k], fine.norms()[k]);
                assert!((c - g).abs() < 0.05 * g);
            }
        }
    }

    #[test]
    fn pogorelov_layout_decay() {
        let f = MetricField::new(build_layout(40).unwrap()).unwrap();
        let report = estimate_report(&f, 64).unwrap();
        assert!(report.rows.iter().all(|r| r.norms().iter().all(|v| *v >= 0.0)));
        assert!(report.rows.iter().all(|r| !r.flagged));
        let fits = decay_fit(&report.rows, 5, 40).unwrap();
        assert!(fits[2].slope <= -3.0);
        assert!(fits[3].slope <= -1.0);
        let t = cauchy_check(&report.rows, 40);
        assert!(t.monotone.iter().all(|m| *m));
        for (k, expect) in [-12.0, -10.0, -8.0, -6.0].iter().enumerate() {
            assert!(
                (fits[k].slope - expect).abs() < 0.5,
                "{}: {}",
                NORM_NAMES[k],
                fits[k].slope
            );
        }
    }
}
