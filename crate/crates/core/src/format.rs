//! Fixed-width numeric serialization shared by every text output.
//!
//! All reals are written with 17 significant digits so that files round-trip
//! bit-exactly and repeated runs produce identical bytes.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` with 17 significant digits in scientific notation; non-finite values as `nan`/`inf`/`-inf`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        // normalize negative zero
        format!("{:.16e}", x + 0.0)
    }
}

/// A real that serializes into JSON as a 17-significant-digit number (`null` if not finite).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num(x)
    }
}

/// Serializes an `f64` field through [`Num`]; use with `#[serde(serialize_with = "num")]`.
pub fn num<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Num(*x).serialize(s)
}

/// Serializes a slice of `f64` through [`Num`].
pub fn nums<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| Num(x)))
}

/// Serializes `(f64, f64)` pairs through [`Num`].
pub fn pairs<S: Serializer>(xs: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&(a, b)| (Num(a), Num(b))))
}

/// Serializes fixed-width rows of `f64` through [`Num`].
pub fn rows<S: Serializer, const N: usize>(xs: &[[f64; N]], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|r| r.iter().map(|&x| Num(x)).collect::<Vec<_>>()))
}

/// Renders a header and rows of reals as CSV with `\n` line endings.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize infallibly");
    s.push('\n');
    s
}
