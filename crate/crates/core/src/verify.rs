//! The acceptance checks as one reproducible report.
//!
//! Every value is printed with 17 significant digits and no timing or host
//! information enters the output, so two runs produce identical bytes.

use serde::Serialize;

use crate::assembly::{build_layout, gluing_mismatch, MetricField};
use crate::curvature::{closed_form_k, expansion_fit, gauss_curvature, lower_bound_window, taylor_coefficients};
use crate::embedding::{default_rho_max, induced_metric_residual, integrate_profile, jump_analysis, ResidualGrid};
use crate::error::Result;
use crate::format::{fmt17, num};
use crate::lemma_lab::convex::{default_height, run_suite};
use crate::lemma_lab::ruling::{sample_ruling, CurvatureMode};
use crate::lemma_lab::{ruling_curvature_fit, sagitta, RuledFamily};
use crate::profile::{embeddable_window, make_pogorelov_profile};
use crate::regularity::{cauchy_check, decay_fit, estimate_report, FIT_RANGE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Full,
    /// Reduced grids and case counts; same tolerances.
    Quick,
}

impl Resolution {
    fn pick<T>(self, full: T, quick: T) -> T {
        match self {
            Resolution::Full => full,
            Resolution::Quick => quick,
        }
    }
}

/// A measured quantity and the limit it was held to (`null` when only recorded).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    pub label: String,
    #[serde(serialize_with = "num")]
    pub value: f64,
    #[serde(serialize_with = "num")]
    pub limit: f64,
}

fn measure(label: impl Into<String>, value: f64, limit: f64) -> Measure {
    Measure {
        label: label.into(),
        value,
        limit,
    }
}

fn record(label: impl Into<String>, value: f64) -> Measure {
    measure(label, value, f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measures: Vec<Measure>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub resolution: Resolution,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub total: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "verify ({})\n",
            match self.resolution {
                Resolution::Full => "full",
                Resolution::Quick => "quick",
            }
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:02} {} {}\n",
                c.id,
                if c.pass { "PASS" } else { "FAIL" },
                c.name
            ));
            for m in &c.measures {
                if m.limit.is_nan() {
                    out.push_str(&format!("     {} = {}\n", m.label, fmt17(m.value)));
                } else {
                    out.push_str(&format!(
                        "     {} = {} (limit {})\n",
                        m.label,
                        fmt17(m.value),
                        fmt17(m.limit)
                    ));
                }
            }
            if !c.note.is_empty() {
                out.push_str(&format!("     note: {}\n", c.note));
            }
        }
        out.push_str(&format!("summary: {}/{} passed\n", self.passed, self.total));
        out
    }

    pub fn to_json(&self) -> String {
        crate::format::to_json(self)
    }
}

type Outcome = Result<(bool, Vec<Measure>, String)>;

fn check(id: u8, name: &'static str, body: impl FnOnce() -> Outcome) -> CheckResult {
    match body() {
        Ok((pass, measures, note)) => CheckResult {
            id,
            name,
            pass,
            measures,
            note,
        },
        Err(e) => CheckResult {
            id,
            name,
            pass: false,
            measures: Vec::new(),
            note: format!("error: {e}"),
        },
    }
}

pub fn check_isometry(res: Resolution) -> CheckResult {
    check(1, "isometry of the embedding", || {
        let p = make_pogorelov_profile(1.0)?;
        let c = integrate_profile(&p, 0.74, 1e-13)?;
        let (n_rho, n_theta) = res.pick((200, 64), (50, 16));
        let r = induced_metric_residual(&p, &c, &ResidualGrid::new(0.0, 0.74, n_rho, n_theta))?;
        let m = r.max();
        Ok((
            m <= 1e-8,
            vec![measure("max(|E-1|,|F|,|G-f^2|)", m, 1e-8)],
            format!("grid {n_rho}x{n_theta}, rho in [0, 0.74], a = 1"),
        ))
    })
}

pub fn check_jump() -> CheckResult {
    check(2, "z'' jump at the branch point", || {
        let mut pass = true;
        let mut ms = Vec::new();
        for a in [1.0, 0.5, 0.125] {
            let p = make_pogorelov_profile(a)?;
            let c = integrate_profile(&p, default_rho_max(a), 1e-12)?;
            let j = jump_analysis(&c)?;
            let expect = 0.75f64.sqrt() * a * a;
            let rel = (j.right_limit - expect).abs() / expect;
            pass &= rel <= 1e-3 && j.left_limit == 0.0;
            ms.push(measure(format!("a={a} rel err right limit"), rel, 1e-3));
            ms.push(measure(format!("a={a} left limit"), j.left_limit, 0.0));
        }
        Ok((pass, ms, "right limit compared with (sqrt(3)/2)a^2".into()))
    })
}

pub fn check_window() -> CheckResult {
    check(3, "embeddable window endpoints", || {
        let mut pass = true;
        let mut ms = Vec::new();
        for a in [1.0, 0.1] {
            let p = make_pogorelov_profile(a)?;
            let w = embeddable_window(&p, 1000)?;
            let err = match w.as_slice() {
                [iv] => (iv.lo - 0.5 * a).abs().max((iv.hi - 0.75 * a).abs()),
                _ => f64::INFINITY,
            };
            pass &= err <= 1e-10 * a;
            ms.push(measure(format!("a={a} endpoint error"), err, 1e-10 * a));
        }
        Ok((pass, ms, String::new()))
    })
}

pub fn check_curvature_identity(res: Resolution) -> CheckResult {
    check(4, "closed-form curvature identity", || {
        let n = res.pick(1000, 200);
        let mut pass = true;
        let mut ms = Vec::new();
        for a in [1.0, 0.5, 0.1] {
            let p = make_pogorelov_profile(a)?;
            let mut worst = 0.0f64;
            for i in 0..n {
                let r = a * (0.5 + 0.5 * (i as f64 + 0.5) / n as f64);
                let k = gauss_curvature(&p, r)?;
                let kc = closed_form_k(a, r)?;
                worst = worst.max((k - kc).abs() / k.abs());
            }
            let mut flat_max = 0.0f64;
            for i in 0..=100 {
                flat_max = flat_max.max(gauss_curvature(&p, 0.5 * a * i as f64 / 100.0)?.abs());
            }
            pass &= worst <= 1e-9 && flat_max == 0.0;
            ms.push(measure(format!("a={a} max rel discrepancy"), worst, 1e-9));
            ms.push(measure(format!("a={a} max |K| on rho <= a/2"), flat_max, 0.0));
        }
        Ok((pass, ms, format!("{n} points per radius")))
    })
}

pub fn check_expansion() -> CheckResult {
    check(5, "expansion coefficients at the branch point", || {
        let a = 1.0;
        let p = make_pogorelov_profile(a)?;
        let fit = expansion_fit(&p, 1e-3 * a)?;
        let [c1, c2, _, _] = taylor_coefficients(a);
        let e1 = (fit.c1 - c1).abs() / c1.abs();
        let e2 = (fit.c2 - c2).abs() / c2.abs();
        let ms = vec![
            record("fitted c1", fit.c1),
            measure("c1 rel err vs (3/2)a^3", e1, 0.01),
            record("fitted c2", fit.c2),
            measure("c2 rel err vs series oracle", e2, 0.02),
            record("reference c2 = -21a^2", -21.0 * a * a),
        ];
        Ok((e1 <= 0.01 && e2 <= 0.02, ms, "eps_fit = 1e-3 a".into()))
    })
}

pub fn check_lower_bound() -> CheckResult {
    check(6, "curvature lower bound window", || {
        let eps = lower_bound_window(&make_pogorelov_profile(1.0)?, 0.75)?;
        Ok((
            eps >= 1e-3,
            vec![measure("eps_max (a=1, coeff 3/4), >=", eps, 1e-3)],
            String::new(),
        ))
    })
}

pub fn check_layout(res: Resolution) -> CheckResult {
    check(7, "disc layout", || {
        let n = res.pick(1000, 200);
        let c = build_layout(n)?.check();
        let ms = vec![
            record("pairs checked", c.pairs_checked as f64),
            measure("overlaps", c.overlaps as f64, 0.0),
            measure("discs containing the origin", c.contains_origin as f64, 0.0),
        ];
        Ok((c.overlaps == 0 && c.contains_origin == 0, ms, format!("n_max = {n}")))
    })
}

pub fn check_gluing() -> CheckResult {
    check(8, "C2 gluing across disc boundaries", || {
        let field = MetricField::new(build_layout(20)?)?;
        let mut pass = true;
        let mut ms = Vec::new();
        for n in [1, 5, 20] {
            let r = gluing_mismatch(&field, n - 1, 32);
            pass &= r.max() <= 1e-6;
            ms.push(measure(format!("n={n} max mismatch"), r.max(), 1e-6));
        }
        Ok((pass, ms, String::new()))
    })
}

pub fn check_decay() -> CheckResult {
    check(9, "norm decay and Cauchy tails", || {
        let n_max = FIT_RANGE.1;
        let report = estimate_report(&MetricField::new(build_layout(n_max)?)?, 64)?;
        let fits = decay_fit(&report.rows, FIT_RANGE.0, FIT_RANGE.1)?;
        let tails = cauchy_check(&report.rows, n_max);
        let mut ms = Vec::new();
        for (k, f) in fits.iter().enumerate() {
            let limit = if k >= 2 { -1.0 } else { f64::NAN };
            ms.push(measure(format!("{} slope", f.norm), f.slope, limit));
            ms.push(record(format!("{} slope ci95", f.norm), f.ci));
            ms.push(record(format!("{} claimed", f.norm), f.claimed));
        }
        let pass = fits[2].slope <= -1.0 && fits[3].slope <= -1.0 && tails.monotone.iter().all(|m| *m);
        let disagree: Vec<&str> = fits.iter().filter(|f| f.disagrees).map(|f| f.norm).collect();
        let note = format!(
            "n in [{}, {}]; tails monotone {:?}; measured differs from claimed for {:?}",
            FIT_RANGE.0, FIT_RANGE.1, tails.monotone, disagree
        );
        Ok((pass, ms, note))
    })
}

pub fn check_convex(res: Resolution) -> CheckResult {
    check(10, "convex second-derivative bound", || {
        let (n_seeds, count) = res.pick((10u64, 100), (3, 20));
        let seeds: Vec<u64> = (1..=n_seeds).collect();
        let (a, c) = (1.0, 0.3);
        let mut pass = true;
        let mut ms = Vec::new();
        let mut note = String::new();
        for (label, b) in [("b=3c^2/a", default_height(a, c)), ("b=c", c)] {
            let r = run_suite(&seeds, count, c, b)?;
            let rate = r.passed as f64 / r.cases as f64;
            pass &= r.passed == r.cases;
            ms.push(measure(format!("{label} pass rate"), rate, 1.0));
            ms.push(record(format!("{label} min margin"), r.min_margin));
            if let Some(first) = r.failures.first() {
                note.push_str(&format!("first failing case ({label}): {}", first.replace('\n', " ")));
            }
        }
        Ok((
            pass,
            ms,
            format!("{n_seeds} seeds x {count} cases, c = {c}. {note}")
                .trim_end()
                .to_string(),
        ))
    })
}

pub fn check_ruling() -> CheckResult {
    check(11, "curvature law along rulings", || {
        let mut pass = true;
        let mut ms = Vec::new();
        for (label, fam) in [
            ("cone", RuledFamily::Cone { alpha: 0.4 }),
            ("cylinder", RuledFamily::Cylinder { radius: 1.5 }),
            (
                "helix tangent developable",
                RuledFamily::HelixTangent {
                    radius: 1.0,
                    pitch: 0.3,
                },
            ),
        ] {
            let s = sample_ruling(fam, 0.7, 0.5, 2.5, 1000, CurvatureMode::Analytic)?;
            let fit = ruling_curvature_fit(&s)?;
            pass &= fit.max_residual <= 1e-6 && s.max_abs_gauss < 1e-8;
            ms.push(measure(
                format!("{label} max residual of 1/k fit"),
                fit.max_residual,
                1e-6,
            ));
            ms.push(measure(format!("{label} max |K|"), s.max_abs_gauss, 1e-8));
        }
        Ok((pass, ms, "1000 samples on s in [0.5, 2.5]".into()))
    })
}

pub fn check_sagitta() -> CheckResult {
    check(12, "sagitta value and bound", || {
        let s = sagitta(1.0, 0.1)?;
        let digits = fmt17(s.value);
        let mut pass = digits == "1.0102051443364381e-2";
        let mut worst = 0.0f64;
        for i in 1..=100 {
            let c = 0.3 * i as f64 / 100.0;
            let v = sagitta(1.0, c)?;
            pass &= v.upper_ok;
            worst = worst.max(v.value / (2.0 * c * c));
        }
        let ms = vec![
            record("sagitta(1, 0.1)", s.value),
            measure("max sagitta/(2c^2/a), c/a <= 0.3", worst, 1.0),
        ];
        Ok((pass, ms, format!("sagitta(1, 0.1) printed as {digits}")))
    })
}

fn substantive(res: Resolution) -> Vec<CheckResult> {
    vec![
        check_isometry(res),
        check_jump(),
        check_window(),
        check_curvature_identity(res),
        check_expansion(),
        check_lower_bound(),
        check_layout(res),
        check_gluing(),
        check_decay(),
        check_convex(res),
        check_ruling(),
        check_sagitta(),
    ]
}

/// Runs all checks; the last one recomputes the others and compares rendered bytes.
pub fn run_verify(res: Resolution) -> VerifyReport {
    let mut checks = substantive(res);
    let render = |c: &[CheckResult]| crate::format::to_json(&c);
    let first = render(&checks);
    let second = render(&substantive(res));
    let same = first == second;
    checks.push(CheckResult {
        id: 13,
        name: "determinism",
        pass: same,
        measures: vec![measure(
            "differing bytes",
            first.bytes().zip(second.bytes()).filter(|(x, y)| x != y).count() as f64
                + first.len().abs_diff(second.len()) as f64,
            0.0,
        )],
        note: "checks 1-12 recomputed and rendered twice".into(),
    });
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        resolution: res,
        total: checks.len(),
        passed,
        checks,
    }
}
