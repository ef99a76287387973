//! Plain-text number formatting shared by every CSV writer.

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_float(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse {s:?} as a number")))
}

/// Joins already formatted fields into one CSV line (no quoting needed:
/// every field is numeric or a bare identifier).
pub fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (k, f) in fields.into_iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(f.as_ref());
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::INFINITY] {
            assert_eq!(parse_float(&fmt_float(x), "x").unwrap(), x);
        }
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert!(parse_float("abc", "x").is_err());
        assert_eq!(csv_line(["a", "b"]), "a,b\n");
    }
}
