//! Small numerical building blocks: bisection, Richardson tables, least squares,
//! golden-section search and a Gauss-Kronrod adaptive integrator.

/// Bisects `[lo, hi]` for the switch point of a predicate with `pred(lo) != pred(hi)`.
///
/// Stops once the bracket is narrower than `abs_tol` and returns the midpoint.
pub fn bisect_predicate<F>(mut lo: f64, mut hi: f64, abs_tol: f64, pred: F) -> f64
where
    F: Fn(f64) -> bool,
{
    let p_lo = pred(lo);
    debug_assert_ne!(p_lo, pred(hi));
    for _ in 0..200 {
        if (hi - lo).abs() <= abs_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Richardson extrapolation of estimates taken at steps `h, h/2, h/4, ...`
/// assuming an error expansion in integer powers `h^p0, h^(p0+1), ...`.
///
/// Returns the full tableau diagonal; the last entry is the best estimate.
pub fn richardson(estimates: &[f64], p0: u32) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = vec![estimates.to_vec()];
    for level in 1..estimates.len() {
        let prev = &table[level - 1];
        let factor = 2f64.powi((p0 + level as u32 - 1) as i32);
        let next: Vec<f64> = prev
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        table.push(next);
    }
    table.iter().map(|row| *row.last().unwrap()).collect()
}

/// Ordinary least squares for `y ≈ Σ c_j φ_j(x)` with a handful of basis columns.
///
/// Solved through the normal equations with partial pivoting; the caller keeps the
/// design well conditioned (few columns, scaled abscissae).
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = columns.len();
    let mut ata = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            ata[i][j] = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
        }
        ata[i][m] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    solve_augmented(ata)
}

fn solve_augmented(mut aug: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = aug.len();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[pivot][col] == 0.0 {
            return None;
        }
        aug.swap(col, pivot);
        for row in 0..m {
            if row != col {
                let factor = aug[row][col] / aug[col][col];
                for k in col..=m {
                    aug[row][k] -= factor * aug[col][k];
                }
            }
        }
    }
    Some((0..m).map(|i| aug[i][m] / aug[i][i]).collect())
}

/// Straight-line fit `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero for an exact fit or fewer than three points).
    pub slope_std_err: f64,
    pub max_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (slope * a + intercept)).collect();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let slope_std_err = if n > 2 {
        let ss: f64 = residuals.iter().map(|r| r * r).sum();
        (ss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_std_err,
        max_residual,
    })
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

// 15-point Kronrod abscissae / weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let diff = ((kronrod - gauss) * half).abs();
    // QUADPACK-style scaling of the raw difference.
    let err = if diff > 0.0 {
        diff.min((200.0 * diff).powf(1.5))
    } else {
        0.0
    };
    (kronrod * half, err.max(50.0 * f64::EPSILON * (kronrod * half).abs()))
}

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss-Kronrod (7/15) quadrature to an absolute tolerance.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// drops below `abs_tol` or `max_panels` is reached.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, max_panels: usize) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= abs_tol || panels.len() >= max_panels {
            break;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3))
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    // Sum in abscissa order so the result does not depend on refinement history.
    panels.sort_by(|p, q| p.0.total_cmp(&q.0));
    Quadrature {
        value: panels.iter().map(|p| p.2).sum(),
        error: panels.iter().map(|p| p.3).sum(),
        evaluations,
    }
}
