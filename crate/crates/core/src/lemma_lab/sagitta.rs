//! Depth of a circular arc of diameter `a` over a chord of half-length `c`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::num;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sagitta {
    #[serde(serialize_with = "num")]
    pub value: f64,
    /// `c²/a ≤ value`.
    pub lower_ok: bool,
    /// `value ≤ 2c²/a`.
    pub upper_ok: bool,
}

/// `a/2 − √(a²/4 − c²)`, evaluated as `c²/(a/2 + √(a²/4 − c²))` to avoid cancellation.
pub fn sagitta(a: f64, c: f64) -> Result<Sagitta> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::ParameterDomain(format!("diameter a = {a} must be positive")));
    }
    if !(c >= 0.0 && c < 0.5 * a) {
        return Err(Error::Domain(format!(
            "half-chord c = {c} outside [0, a/2) for a = {a}"
        )));
    }
    let half = 0.5 * a;
    let s0 = c * c / (half + ((half - c) * (half + c)).sqrt());
    // one Newton step on s² − a·s + c² = 0 with the residual summed from exact products
    let value = if s0 > 0.0 {
        s0 - exact_residual(s0, a, c) / (2.0 * s0 - a)
    } else {
        s0
    };
    let base = c * c / a;
    Ok(Sagitta {
        value,
        lower_ok: base <= value,
        upper_ok: value <= 2.0 * base,
    })
}

/// `s² − a·s + c²` from error-free products, accurate to a few ulps of the result.
fn exact_residual(s: f64, a: f64, c: f64) -> f64 {
    let terms = [(s, s), (-a, s), (c, c)];
    let mut hi = 0.0;
    let mut lo = 0.0;
    for (x, y) in terms {
        let p = x * y;
        lo += x.mul_add(y, -p);
        // two-sum
        let t = hi + p;
        let bp = t - hi;
        lo += (hi - (t - bp)) + (p - bp);
        hi = t;
    }
    hi + lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(sagitta(1.0, 0.0).unwrap().value, 0.0);
        let s = sagitta(1.0, 0.1).unwrap();
        // 0.5 − √0.24 = 0.0101020514433643803605…, nearest double below
        assert_eq!(crate::format::fmt17(s.value), "1.0102051443364381e-2");
        assert!(s.upper_ok && s.lower_ok && s.value <= 0.02);
        assert!(sagitta(1.0, 0.5).is_err());
        assert!(sagitta(1.0, -0.1).is_err());
        assert!(sagitta(0.0, 0.1).is_err());
    }

    #[test]
    fn bounds_on_sweep() {
        for i in 1..=100 {
            let c = 0.3 * i as f64 / 100.0;
            let s = sagitta(1.0, c).unwrap();
            assert!(s.lower_ok && s.upper_ok, "c={c}");
        }
        // 2/(1 + √(1 − 4t²)) ≤ 2 on the whole domain
        let s = sagitta(1.0, 0.4999).unwrap();
        assert!(s.upper_ok && s.lower_ok);
    }

    #[test]
    fn small_chord_ratio() {
        // s/(c²/a) = 2/(1 + √(1 − 4t²)) = 1 + t² + 2t⁴ + O(t⁶), t = c/a
        for t in [1e-1, 1e-2, 1e-3] {
            let ratio = sagitta(1.0, t).unwrap().value / (t * t);
            assert!((ratio - 1.0 - t * t).abs() <= 2.5 * t.powi(4), "t={t} ratio={ratio}");
            assert!((ratio - 1.0).abs() <= 1.03 * t * t);
        }
    }

    proptest::proptest! {
        #[test]
        fn solves_the_chord_relation(a in 1e-3f64..10.0, t in 1e-6f64..0.499) {
            let c = t * a;
            let s = sagitta(a, c).unwrap().value;
            // s(a − s) = c², residual within a few ulps of c²
            proptest::prop_assert!(exact_residual(s, a, c).abs() <= 4.0 * f64::EPSILON * c * c);
        }
    }
}
