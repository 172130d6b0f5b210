//! Output rounding: every float written by the crate goes through
//! [`round_sig`] so that emitted files are stable across platforms.

use serde::Serializer;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let text = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let rounded: f64 = text.parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

/// Plain-text rendering used by the CSV writers.
pub fn format_sig(x: f64) -> String {
    format!("{}", round_sig(x))
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn serialize_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&round_sig(*v)),
        None => s.serialize_none(),
    }
}

pub fn serialize_map<S: Serializer>(
    map: &std::collections::BTreeMap<String, f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut out = s.serialize_map(Some(map.len()))?;
    for (k, v) in map {
        out.serialize_entry(k, &round_sig(*v))?;
    }
    out.end()
}

pub fn serialize_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut out = s.serialize_seq(Some(xs.len()))?;
    for v in xs {
        out.serialize_element(&round_sig(*v))?;
    }
    out.end()
}
