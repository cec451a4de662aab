//! Gauss curvature of `dρ² + f(ρ)² dθ²`.
//!
//! Three routes are kept side by side: `−f″/f` from the exact derivatives, the
//! rational closed form in `(a, r)` for the two-branch profile, and a central
//! finite-difference oracle on the excess `f − ρ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;
use crate::numeric::{bisect_predicate, least_squares};
use crate::profile::{ProfileKind, RadialProfile, Side};

/// `K = −f″(ρ)/f(ρ)`, with the limit `−f‴(0)/f′(0)` at the origin.
pub fn gauss_curvature(p: &RadialProfile, rho: f64) -> Result<f64> {
    p.check_domain(rho)?;
    Ok(gauss_curvature_raw(p, rho))
}

pub(crate) fn gauss_curvature_raw(p: &RadialProfile, rho: f64) -> f64 {
    let k = if rho == 0.0 {
        -p.eval_raw(0.0, 3) / p.eval_raw(0.0, 1)
    } else {
        -p.eval_raw(rho, 2) / p.eval_raw(rho, 0)
    };
    k + 0.0
}

/// The rational closed form
/// `K = −6a(a−2r)(a−r)(11a²−30ar+20r²) / (a(a−2r)³(a−r)³ + 8r)`
/// valid on the bump annulus `a/2 ≤ r ≤ a`.
pub fn closed_form_k(a: f64, r: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::ParameterDomain(format!("a = {a} must be positive")));
    }
    if !(0.5 * a..=a).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [a/2, a] = [{}, {a}]", 0.5 * a)));
    }
    let num = -6.0 * a * (a - 2.0 * r) * (a - r) * (11.0 * a * a - 30.0 * a * r + 20.0 * r * r);
    let den = a * (a - 2.0 * r).powi(3) * (a - r).powi(3) + 8.0 * r;
    if den.abs() < 1e-14 {
        return Err(Error::Singular(format!("denominator {den:e} at a = {a}, r = {r}")));
    }
    Ok(num / den + 0.0)
}

/// Finite-difference step for the curvature oracle.
pub fn oracle_step(a: f64) -> f64 {
    (1e-5 * a).max(f64::EPSILON.cbrt() * a)
}

/// Curvature from a second-order central difference of `f − ρ`.
///
/// The stencil never straddles the branch point: within one step of it the
/// stencil is shifted onto the side that contains `ρ`.
pub fn finite_difference_k(p: &RadialProfile, rho: f64) -> Result<f64> {
    p.check_domain(rho)?;
    let h = oracle_step(p.a());
    let g = |x: f64| p.excess_raw(x, 0, Side::Right);
    let mut center = rho;
    if let Some(b) = p.branch_point() {
        if rho > b && rho - h < b {
            center = b + h;
        } else if rho <= b && rho + h > b {
            center = b - h;
        }
    }
    if center - h < 0.0 {
        center = h;
    }
    // second differences are exact for the quadratic part, so a shifted stencil
    // estimates f″(ρ) up to O(|ρ − center|·f‴)
    let d2 = (g(center + h) - 2.0 * g(center) + g(center - h)) / (h * h);
    let f = p.eval_raw(rho, 0);
    if f == 0.0 {
        return Ok(-p.eval_raw(0.0, 3) / p.eval_raw(0.0, 1));
    }
    Ok(-d2 / f + 0.0)
}

/// One row of the curvature comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    #[serde(serialize_with = "num")]
    pub rho: f64,
    #[serde(serialize_with = "num")]
    pub k_formula: f64,
    #[serde(serialize_with = "num")]
    pub k_closed: f64,
    #[serde(serialize_with = "num")]
    pub k_fd: f64,
    /// `|K_formula − K_closed|`
    #[serde(serialize_with = "num")]
    pub abs_err: f64,
}

/// Samples all three routes on `n` interior points of the bump annulus `(a/2, a)`.
pub fn curvature_table(p: &RadialProfile, n: usize) -> Result<Vec<CurvatureSample>> {
    if p.kind() != ProfileKind::Pogorelov {
        return Err(Error::Configuration(
            "the closed form only exists for the two-branch profile".into(),
        ));
    }
    let a = p.a();
    (1..=n)
        .map(|i| {
            let rho = 0.5 * a + 0.5 * a * i as f64 / (n + 1) as f64;
            let k_formula = gauss_curvature(p, rho)?;
            let k_closed = closed_form_k(a, rho)?;
            let k_fd = finite_difference_k(p, rho)?;
            Ok(CurvatureSample {
                rho,
                k_formula,
                k_closed,
                k_fd,
                abs_err: (k_formula - k_closed).abs(),
            })
        })
        .collect()
}

pub fn curvature_csv(rows: &[CurvatureSample]) -> String {
    crate::format::csv_table(
        &["rho", "K_formula", "K_closed", "K_fd", "abs_err"],
        rows.iter()
            .map(|r| vec![r.rho, r.k_formula, r.k_closed, r.k_fd, r.abs_err]),
    )
}

/// Least-squares coefficients of `K ≈ c1·u + c2·u²`, `u = ρ − a/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionFit {
    #[serde(serialize_with = "num")]
    pub c1: f64,
    #[serde(serialize_with = "num")]
    pub c2: f64,
    pub points: usize,
}

/// Exact Taylor coefficients of `K(a/2 + u)`: `(3/2)a³, −21a², 102a, −264`.
pub fn taylor_coefficients(a: f64) -> [f64; 4] {
    [1.5 * a.powi(3), -21.0 * a * a, 102.0 * a, -264.0]
}

pub fn expansion_fit(p: &RadialProfile, eps_fit: f64) -> Result<ExpansionFit> {
    expansion_fit_with(p, eps_fit, 64)
}

pub fn expansion_fit_with(p: &RadialProfile, eps_fit: f64, n_points: usize) -> Result<ExpansionFit> {
    let a = p.a();
    let Some(b) = p.branch_point() else {
        return Err(Error::Configuration(
            "expansion is about the branch point; profile has none".into(),
        ));
    };
    if !(eps_fit > 0.0 && eps_fit <= (a - b) / 4.0) {
        return Err(Error::ParameterDomain(format!(
            "ε_fit = {eps_fit} must lie in (0, {}]",
            (a - b) / 4.0
        )));
    }
    let mut us = Vec::with_capacity(n_points);
    let mut ks = Vec::with_capacity(n_points);
    for i in 1..=n_points {
        let u = eps_fit * i as f64 / n_points as f64;
        let k = gauss_curvature_raw(p, b + u);
        if u > 0.0 && k.is_finite() {
            // scaled abscissa keeps the normal equations well conditioned
            us.push(u / eps_fit);
            ks.push(k);
        }
    }
    if us.len() < 8 {
        return Err(Error::Configuration(format!(
            "only {} usable fit points (need 8)",
            us.len()
        )));
    }
    let sq: Vec<f64> = us.iter().map(|s| s * s).collect();
    let c = least_squares(&[us.clone(), sq], &ks)
        .ok_or_else(|| Error::InternalConsistency("singular normal equations in expansion fit".into()))?;
    Ok(ExpansionFit {
        c1: c[0] / eps_fit,
        c2: c[1] / (eps_fit * eps_fit),
        points: us.len(),
    })
}

/// Largest `ε` with `K(ρ) > coeff·(ρ − a/2)` on all of `(a/2, a/2 + ε)`.
///
/// Grid scan over the bump annulus, then bisection to `1e-6·a`. A bound that fails
/// immediately yields `0`.
pub fn lower_bound_window(p: &RadialProfile, coeff: f64) -> Result<f64> {
    if !(coeff > 0.0) {
        return Err(Error::ParameterDomain(format!("coeff = {coeff} must be positive")));
    }
    let a = p.a();
    let Some(b) = p.branch_point() else {
        return Err(Error::Configuration(
            "lower bound is about the branch point; profile has none".into(),
        ));
    };
    let resolution = 1e-6 * a;
    let holds = |rho: f64| gauss_curvature_raw(p, rho) > coeff * (rho - b);
    let n = 4096;
    let span = a - b;
    let mut last_good = b;
    for i in 1..n {
        let rho = b + span * i as f64 / n as f64;
        if !holds(rho) {
            if last_good == b {
                // bound may fail right away; the predicate is false arbitrarily close to b then
                let probe = b + resolution;
                if !holds(probe) {
                    return Ok(0.0);
                }
                last_good = probe;
            }
            let edge = bisect_predicate(last_good, rho, resolution, holds);
            let eps = edge - b;
            return Ok(if eps <= resolution { 0.0 } else { eps });
        }
        last_good = rho;
    }
    Ok(span)
}

/// Roots of `11a² − 30ar + 20r²`, where `K` changes sign on the bump annulus.
pub fn curvature_sign_changes(a: f64) -> [f64; 2] {
    let d = 20f64.sqrt();
    [a * (30.0 - d) / 40.0, a * (30.0 + d) / 40.0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::make_pogorelov_profile;
    use approx::assert_relative_eq;

    #[test]
    fn flat_branch_has_zero_curvature() {
        let p = make_pogorelov_profile(1.0).unwrap();
        assert_eq!(gauss_curvature(&p, 0.3).unwrap(), 0.0);
        assert_eq!(gauss_curvature(&p, 0.0).unwrap(), 0.0);
        assert_eq!(gauss_curvature(&p, 0.5).unwrap(), 0.0);
        assert!(gauss_curvature(&p, 1.0).is_err());
    }

    #[test]
    fn model_geometries() {
        let s = RadialProfile::sphere(3.0).unwrap();
        assert_relative_eq!(gauss_curvature(&s, 0.7).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(gauss_curvature(&s, 0.0).unwrap(), 1.0);
        let h = RadialProfile::hyperbolic(3.0).unwrap();
        assert_relative_eq!(gauss_curvature(&h, 1.3).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn value_at_point_six() {
        let p = make_pogorelov_profile(1.0).unwrap();
        // 40-digit reference: 0.02000213356091316407...
        let k = gauss_curvature(&p, 0.6).unwrap();
        assert_relative_eq!(k, 0.020002133560913164, max_relative = 1e-14);
        let fd = finite_difference_k(&p, 0.6).unwrap();
        assert_relative_eq!(fd, k, max_relative = 1e-6);
        assert_relative_eq!(closed_form_k(1.0, 0.6).unwrap(), k, max_relative = 1e-9);
    }

    #[test]
    fn closed_form_endpoints_and_domain() {
        assert_eq!(closed_form_k(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(closed_form_k(1.0, 1.0).unwrap(), 0.0);
        assert!(matches!(closed_form_k(1.0, 0.4), Err(Error::Domain(_))));
        assert!(closed_form_k(-1.0, 0.4).is_err());
    }

    #[test]
    fn denominator_positive_on_annulus() {
        for a in [1.0, 0.5, 0.1] {
            for i in 1..10_000 {
                let r = a / 2.0 + a / 2.0 * i as f64 / 10_000.0;
                let den = a * (a - 2.0 * r).powi(3) * (a - r).powi(3) + 8.0 * r;
                assert!(den > 0.0);
            }
        }
    }

    #[test]
    fn sign_changes_match_quadratic_factor() {
        let a = 1.0;
        let p = make_pogorelov_profile(a).unwrap();
        let [r0, r1] = curvature_sign_changes(a);
        assert!(r0 > 0.5 && r0 < 1.0 && r1 > 1.0 - 0.2);
        assert!(gauss_curvature(&p, r0 - 1e-6).unwrap() > 0.0);
        assert!(gauss_curvature(&p, r0 + 1e-6).unwrap() < 0.0);
        assert!(gauss_curvature(&p, r1 - 1e-6).unwrap() < 0.0);
        assert!(gauss_curvature(&p, r1 + 1e-6).unwrap() > 0.0);
    }

    #[test]
    fn expansion_coefficients() {
        let p = make_pogorelov_profile(1.0).unwrap();
        let fit = expansion_fit(&p, 1e-3).unwrap();
        assert!((fit.c1 - 1.5).abs() < 0.015);
        assert!((fit.c2 + 21.0).abs() < 0.42, "{}", fit.c2);
        let p = make_pogorelov_profile(0.5).unwrap();
        let fit = expansion_fit(&p, 1e-4).unwrap();
        assert!((fit.c1 - 0.1875).abs() < 0.001875);
        assert!(expansion_fit(&p, 1.0).is_err());
        assert!(matches!(expansion_fit_with(&p, 1e-4, 7), Err(Error::Configuration(_))));
    }

    #[test]
    fn lower_bound_windows() {
        let p = make_pogorelov_profile(1.0).unwrap();
        let eps = lower_bound_window(&p, 0.75).unwrap();
        assert!(eps >= 1e-3, "{eps}");
        // K(1/2 + u) = 0.75u first at u = 0.04421028518599..., 30-digit root find
        assert!((eps - 0.044210285185992245).abs() < 2e-6, "{eps}");
        assert_eq!(lower_bound_window(&p, 1.5).unwrap(), 0.0);
        let eps = lower_bound_window(&p, 1e-6).unwrap();
        let zero = curvature_sign_changes(1.0)[0];
        assert!(eps < zero - 0.5 && eps > zero - 0.5 - 1e-3, "{eps}");
        assert!((eps - 0.138196338225660949).abs() < 2e-6);
    }

    #[test]
    fn squared_coefficient_variant() {
        for a in [0.5, 0.1] {
            let p = make_pogorelov_profile(a).unwrap();
            assert!(lower_bound_window(&p, 0.75 * a.powi(3)).unwrap() > 1e-3 * a);
            assert_eq!(lower_bound_window(&p, 0.75 * a * a).unwrap(), 0.0);
        }
    }
}
