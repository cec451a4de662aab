//! Radial profiles `f` of metrics `dρ² + f(ρ)² dθ²` in geodesic polar coordinates.
//!
//! The central member is the two-branch profile
//!
//! ```text
//! f(ρ) = ρ                              for ρ ≤ a/2
//! f(ρ) = ρ + a (ρ − a)³ (ρ − a/2)³      for a/2 < ρ < a
//! ```
//!
//! Everything downstream works with the *excess* `g = f − ρ` whenever it can, because
//! `f − ρ` is of size `a⁷` and would be lost to cancellation if recovered from `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{bisect_predicate, richardson};

/// Largest accepted radius for the two-branch profile.
///
/// `f(as)/(as) = 1 + a⁶(s−1)³(s−½)³/s` and the sextic factor bottoms out near
/// `−3.3·10⁻⁴`, so `f` loses positivity once `a⁶ ≳ 3000` (`a ≈ 3.8`).
pub const MAX_RADIUS: f64 = 3.5;

/// Which one-sided branch to use at a branch point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `f(ρ) = ρ` on `[0, a/2]`, sextic bump on `(a/2, a)`.
    Pogorelov,
    /// `f(ρ) = ρ`, the Euclidean plane.
    Flat,
    /// `f(ρ) = sin ρ`, the unit sphere.
    Sphere,
    /// `f(ρ) = sinh ρ`, the hyperbolic plane.
    Hyperbolic,
}

/// A radial profile on the half-open interval `[0, a)`.
///
/// Derivatives through order three come from hand-derived closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialProfile {
    kind: ProfileKind,
    #[serde(serialize_with = "crate::format::num")]
    a: f64,
}

/// Builds the two-branch profile with disc radius `a`.
pub fn make_pogorelov_profile(a: f64) -> Result<RadialProfile> {
    RadialProfile::new(ProfileKind::Pogorelov, a)
}

impl RadialProfile {
    pub fn new(kind: ProfileKind, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "radius a must be positive and finite, got {a}"
            )));
        }
        if kind == ProfileKind::Pogorelov && a > MAX_RADIUS {
            return Err(Error::ParameterDomain(format!(
                "radius a = {a} exceeds {MAX_RADIUS}; f would turn negative inside (0, a)"
            )));
        }
        if kind == ProfileKind::Sphere && a > std::f64::consts::PI {
            return Err(Error::ParameterDomain(format!(
                "sphere profile sin(ρ) is positive only below π, got a = {a}"
            )));
        }
        Ok(Self { kind, a })
    }

    pub fn flat(a: f64) -> Result<Self> {
        Self::new(ProfileKind::Flat, a)
    }

    pub fn sphere(a: f64) -> Result<Self> {
        Self::new(ProfileKind::Sphere, a)
    }

    pub fn hyperbolic(a: f64) -> Result<Self> {
        Self::new(ProfileKind::Hyperbolic, a)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    /// Right end of the domain `[0, a)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Radius where the profile switches branches, if it has one.
    pub fn branch_point(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Pogorelov => Some(0.5 * self.a),
            _ => None,
        }
    }

    /// Interior radius where `f′` returns to 1 and the embedding radicand `1 − f′²`
    /// vanishes to first order.
    pub fn radicand_root(&self) -> Option<f64> {
        match self.kind {
            ProfileKind::Pogorelov => Some(0.75 * self.a),
            _ => None,
        }
    }

    pub fn check_domain(&self, rho: f64) -> Result<()> {
        if rho.is_finite() && (0.0..self.a).contains(&rho) {
            Ok(())
        } else {
            Err(Error::Domain(format!("ρ = {rho} outside [0, {})", self.a)))
        }
    }

    /// k-th derivative of `f` at `ρ`, `k ∈ {0, 1, 2, 3}`.
    ///
    /// At the branch point the right-branch value is returned; for `k ≤ 2` both
    /// branches agree there.
    pub fn eval(&self, rho: f64, k: u8) -> Result<f64> {
        self.check_domain(rho)?;
        check_order(k)?;
        Ok(self.eval_raw(rho, k))
    }

    /// Same as [`eval`](Self::eval) without the domain check; the closed forms are
    /// simply extended past the ends of `[0, a)`.
    pub fn eval_raw(&self, rho: f64, k: u8) -> f64 {
        linear_part(rho, k) + self.excess_raw(rho, k, Side::Right)
    }

    /// One-sided k-th derivative of `f`.
    pub fn eval_side(&self, rho: f64, k: u8, side: Side) -> Result<f64> {
        self.check_domain(rho)?;
        check_order(k)?;
        Ok(linear_part(rho, k) + self.excess_raw(rho, k, side))
    }

    /// k-th derivative of the excess `f(ρ) − ρ`, evaluated without cancellation.
    pub fn excess(&self, rho: f64, k: u8) -> Result<f64> {
        self.check_domain(rho)?;
        check_order(k)?;
        Ok(self.excess_raw(rho, k, Side::Right))
    }

    /// Unchecked excess derivative; `side` only matters exactly at the branch point.
    pub fn excess_raw(&self, rho: f64, k: u8, side: Side) -> f64 {
        match self.kind {
            ProfileKind::Flat => 0.0,
            ProfileKind::Pogorelov => {
                let half = 0.5 * self.a;
                if rho < half || (rho == half && side == Side::Left) {
                    0.0
                } else {
                    sextic_bump(self.a, rho, k)
                }
            }
            ProfileKind::Sphere => match k {
                0 => rho.sin() - rho,
                1 => -2.0 * (0.5 * rho).sin().powi(2),
                2 => -rho.sin(),
                _ => -rho.cos(),
            },
            ProfileKind::Hyperbolic => match k {
                0 => rho.sinh() - rho,
                1 => 2.0 * (0.5 * rho).sinh().powi(2),
                2 => rho.sinh(),
                _ => rho.cosh(),
            },
        }
    }

    /// `f′(ρ) − 1`, accurate even where `f′` is within rounding of 1.
    pub fn slope_excess(&self, rho: f64) -> f64 {
        self.excess_raw(rho, 1, Side::Right)
    }
}

fn check_order(k: u8) -> Result<()> {
    if k > 3 {
        return Err(Error::ParameterDomain(format!("derivative order {k} not in 0..=3")));
    }
    Ok(())
}

fn linear_part(rho: f64, k: u8) -> f64 {
    match k {
        0 => rho,
        1 => 1.0,
        _ => 0.0,
    }
}

/// Derivatives of `a·p³q³` with `p = ρ − a`, `q = ρ − a/2`.
fn sextic_bump(a: f64, rho: f64, k: u8) -> f64 {
    let p = rho - a;
    let q = rho - 0.5 * a;
    match k {
        0 => a * (p * q).powi(3),
        1 => 3.0 * a * (p * q).powi(2) * (p + q),
        2 => 6.0 * a * p * q * (p * p + 3.0 * p * q + q * q),
        _ => 6.0 * a * (p.powi(3) + 9.0 * p * p * q + 9.0 * p * q * q + q.powi(3)),
    }
}

/// One-sided limits of one derivative order at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderLimits {
    pub order: u8,
    #[serde(serialize_with = "crate::format::num")]
    pub left_fd: f64,
    #[serde(serialize_with = "crate::format::num")]
    pub right_fd: f64,
    #[serde(serialize_with = "crate::format::num")]
    pub left_exact: f64,
    #[serde(serialize_with = "crate::format::num")]
    pub right_exact: f64,
    /// `|right_fd − left_fd|`
    #[serde(serialize_with = "crate::format::num")]
    pub jump_fd: f64,
    /// `|right_exact − left_exact|`
    #[serde(serialize_with = "crate::format::num")]
    pub jump_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    #[serde(serialize_with = "crate::format::num")]
    pub rho0: f64,
    pub orders: Vec<OrderLimits>,
}

const BINOMIAL: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0],
    [1.0, 3.0, 3.0, 1.0],
];

/// One-sided limits of `f, f′, f″, f‴` at `rho0`.
///
/// Each limit is a forward (right) or backward (left) difference of order k of
/// `f − ρ` on the step ladder `H, H/2, …` down to `h_min`, Richardson-extrapolated
/// in powers of h.
pub fn smoothness_report(p: &RadialProfile, rho0: f64, h_min: f64) -> Result<SmoothnessReport> {
    p.check_domain(rho0)?;
    let room = rho0.min(p.a() - rho0);
    if rho0 <= 0.0 {
        return Err(Error::Domain("ρ0 must be interior to [0, a)".into()));
    }
    if !(h_min > 0.0 && h_min < room) {
        return Err(Error::ParameterDomain(format!(
            "h_min = {h_min} must be positive and below the distance {room} to the domain ends"
        )));
    }
    // keep every stencil on a single polynomial branch
    let reach = match p.branch_point() {
        Some(b) if b != rho0 => room.min((b - rho0).abs()),
        _ => room,
    };
    let big = reach / 4.0;

    let one_sided = |k: u8, dir: f64| -> f64 {
        // 7 − k levels make the extrapolation exact on sextic branches
        let levels = 7 - k as usize;
        let mut steps = vec![big];
        while steps.len() < levels && steps.last().unwrap() / 2.0 >= h_min {
            steps.push(steps.last().unwrap() / 2.0);
        }
        let est: Vec<f64> = steps
            .iter()
            .map(|&h| {
                let g = |x: f64| p.excess_raw(x, 0, Side::Right);
                if k == 0 {
                    return g(rho0 + dir * h);
                }
                let ku = k as usize;
                let mut acc = 0.0;
                for i in 0..=ku {
                    let sign = if (ku - i).is_multiple_of(2) { 1.0 } else { -1.0 };
                    acc += sign * BINOMIAL[ku][i] * g(rho0 + dir * i as f64 * h);
                }
                // backward differences pick up (−1)^k
                acc * dir.powi(k as i32) / h.powi(k as i32)
            })
            .collect();
        // differences of the linear part ρ are exact, so only the excess is differenced
        linear_part(rho0, k) + *richardson(&est, 1).last().unwrap()
    };

    let orders = (0..=3u8)
        .map(|k| {
            let left_fd = one_sided(k, -1.0);
            let right_fd = one_sided(k, 1.0);
            let left_exact = p.eval_side(rho0, k, Side::Left).unwrap();
            let right_exact = p.eval_side(rho0, k, Side::Right).unwrap();
            OrderLimits {
                order: k,
                left_fd,
                right_fd,
                left_exact,
                right_exact,
                jump_fd: (right_fd - left_fd).abs(),
                jump_exact: (right_exact - left_exact).abs(),
            }
        })
        .collect();
    Ok(SmoothnessReport { rho0, orders })
}

/// An open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "crate::format::num")]
    pub lo: f64,
    #[serde(serialize_with = "crate::format::num")]
    pub hi: f64,
}

/// Maximal sub-intervals of `(0, a)` where `f′ < 1`.
///
/// Runs of the predicate are located on a uniform grid of `grid_n` points and the
/// switch points bisected to `1e-12·a`.
pub fn embeddable_window(p: &RadialProfile, grid_n: usize) -> Result<Vec<Interval>> {
    if grid_n < 100 {
        return Err(Error::ParameterDomain(format!(
            "grid_n = {grid_n} must be at least 100"
        )));
    }
    let a = p.a();
    let tol = 1e-12 * a;
    let inside = |rho: f64| p.slope_excess(rho) < 0.0;
    let grid: Vec<f64> = (0..grid_n).map(|i| a * i as f64 / grid_n as f64).collect();

    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for w in 0..grid_n {
        let rho = grid[w];
        let here = inside(rho);
        match (start, here) {
            (None, true) => {
                let lo = if w == 0 {
                    0.0
                } else {
                    bisect_predicate(grid[w - 1], rho, tol, inside)
                };
                start = Some(lo);
            }
            (Some(lo), false) => {
                let hi = bisect_predicate(grid[w - 1], rho, tol, inside);
                out.push(Interval { lo, hi });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        out.push(Interval { lo, hi: a });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn pogorelov_examples() {
        let p = make_pogorelov_profile(1.0).unwrap();
        assert_eq!(p.eval(0.25, 0).unwrap(), 0.25);
        assert_eq!(p.eval(0.5, 1).unwrap(), 1.0);
        // 0.75 − 0.25⁶, frozen from a 40-digit evaluation
        assert_eq!(p.eval(0.75, 0).unwrap(), 0.749755859375);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_pogorelov_profile(0.0), Err(Error::ParameterDomain(_))));
        assert!(matches!(make_pogorelov_profile(-1.0), Err(Error::ParameterDomain(_))));
        assert!(RadialProfile::sphere(4.0).is_err());
        let p = make_pogorelov_profile(1.0).unwrap();
        assert!(matches!(p.eval(1.0, 0), Err(Error::Domain(_))));
        assert!(matches!(p.eval(-0.1, 0), Err(Error::Domain(_))));
        assert!(p.eval(0.3, 4).is_err());
    }

    #[test]
    fn normalization_at_origin() {
        for p in [
            make_pogorelov_profile(0.3).unwrap(),
            RadialProfile::sphere(1.0).unwrap(),
            RadialProfile::hyperbolic(1.0).unwrap(),
            RadialProfile::flat(1.0).unwrap(),
        ] {
            assert_eq!(p.eval(0.0, 0).unwrap(), 0.0);
            assert_eq!(p.eval(0.0, 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn branch_continuity_and_third_order_jump() {
        for a in [1.0, 0.5, 0.125] {
            let p = make_pogorelov_profile(a).unwrap();
            let half = a / 2.0;
            for k in 0..3 {
                assert_eq!(
                    p.eval_side(half, k, Side::Left).unwrap(),
                    p.eval_side(half, k, Side::Right).unwrap()
                );
            }
            assert_eq!(p.eval_side(half, 3, Side::Left).unwrap(), 0.0);
            assert_relative_eq!(
                p.eval_side(half, 3, Side::Right).unwrap(),
                -0.75 * a.powi(4),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn smoothness_at_branch_point() {
        let p = make_pogorelov_profile(1.0).unwrap();
        let r = smoothness_report(&p, 0.5, 1e-3).unwrap();
        for o in &r.orders[..3] {
            assert!(o.jump_fd < 1e-10, "order {} jump {}", o.order, o.jump_fd);
        }
        assert!((r.orders[3].jump_fd - 0.75).abs() < 1e-8, "{}", r.orders[3].jump_fd);
        assert_eq!(r.orders[3].jump_exact, 0.75);

        let r = smoothness_report(&p, 0.3, 1e-3).unwrap();
        assert!(r.orders.iter().all(|o| o.jump_fd < 1e-10));

        let p = make_pogorelov_profile(0.5).unwrap();
        let r = smoothness_report(&p, 0.25, 1e-4).unwrap();
        assert!((r.orders[3].jump_fd - 0.046875).abs() < 1e-8);
    }

    #[test]
    fn smoothness_rejects_bad_points() {
        let p = make_pogorelov_profile(1.0).unwrap();
        assert!(matches!(smoothness_report(&p, 1.5, 1e-3), Err(Error::Domain(_))));
        assert!(smoothness_report(&p, 0.99, 0.1).is_err());
    }

    #[test]
    fn window_endpoints() {
        for a in [1.0, 0.2, 0.1] {
            let p = make_pogorelov_profile(a).unwrap();
            let w = embeddable_window(&p, 1000).unwrap();
            assert_eq!(w.len(), 1);
            assert!((w[0].lo - a / 2.0).abs() <= 1e-11 * a);
            assert!((w[0].hi - 0.75 * a).abs() <= 1e-11 * a);
        }
        let flat = RadialProfile::flat(1.0).unwrap();
        assert!(embeddable_window(&flat, 200).unwrap().is_empty());
        let sphere = RadialProfile::sphere(3.0).unwrap();
        let w = embeddable_window(&sphere, 200).unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].lo < 1e-11 && w[0].hi == 3.0);
        assert!(embeddable_window(&sphere, 99).is_err());
    }

    #[test]
    fn factored_slope_identity() {
        for a in [1.0, 0.5, 0.1] {
            let p = make_pogorelov_profile(a).unwrap();
            for i in 1..1000 {
                let rho = a / 2.0 + a / 2.0 * i as f64 / 1000.0;
                let factored = 3.0 * a * (rho - a).powi(2) * (rho - a / 2.0).powi(2) * (2.0 * rho - 1.5 * a);
                let direct = p.slope_excess(rho);
                // relative to the size of the factors; the product itself crosses zero at 3a/4
                let size = 3.0 * a * (rho - a).powi(2) * (rho - a / 2.0).powi(2) * (rho.abs() + a);
                assert!((factored - direct).abs() <= 1e-12 * size);
            }
        }
    }

    #[test]
    fn slope_sign_pattern() {
        let a = 0.8;
        let p = make_pogorelov_profile(a).unwrap();
        assert_eq!(p.slope_excess(a / 2.0), 0.0);
        assert!(p.slope_excess(0.75 * a).abs() < 1e-15);
        for i in 1..500 {
            let rho = a / 2.0 + a / 4.0 * i as f64 / 500.0;
            assert!(p.slope_excess(rho) < 0.0);
            let rho = 0.75 * a + a / 4.0 * i as f64 / 500.0;
            assert!(p.slope_excess(rho) > 0.0);
        }
    }

    // Oracle: fourth-order central differences of f − ρ from the value branch only.
    fn fd_excess(p: &RadialProfile, rho: f64, k: u8, h: f64) -> f64 {
        let g = |i: f64| p.excess_raw(rho + i * h, 0, Side::Right);
        match k {
            1 => (-g(2.0) + 8.0 * g(1.0) - 8.0 * g(-1.0) + g(-2.0)) / (12.0 * h),
            2 => (-g(2.0) + 16.0 * g(1.0) - 30.0 * g(0.0) + 16.0 * g(-1.0) - g(-2.0)) / (12.0 * h * h),
            _ => {
                (-g(3.0) + 8.0 * g(2.0) - 13.0 * g(1.0) + 13.0 * g(-1.0) - 8.0 * g(-2.0) + g(-3.0)) / (8.0 * h.powi(3))
            }
        }
    }

    proptest! {
        #[test]
        fn finite_differences_match_closed_forms(kexp in 0i32..=10, t in 0.02f64..0.98, k in 1u8..=3) {
            let a = 2f64.powi(-kexp);
            let p = make_pogorelov_profile(a).unwrap();
            let h = 1e-3 * a;
            let rho = a * t;
            prop_assume!((rho - a / 2.0).abs() > 3.0 * h);
            let exact = p.excess_raw(rho, k, Side::Right);
            let fd = fd_excess(&p, rho, k, h);
            // scale of the k-th derivative of the bump is a^(7-k)
            let scale = a.powi(7 - k as i32);
            prop_assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1e-3 * scale),
                "a={a} rho={rho} k={k} exact={exact} fd={fd}");
        }

        #[test]
        fn profile_positive_inside(a in 1e-3f64..MAX_RADIUS, t in 1e-6f64..0.999_999) {
            let p = make_pogorelov_profile(a).unwrap();
            prop_assert!(p.eval(a * t, 0).unwrap() > 0.0);
        }
    }
}
