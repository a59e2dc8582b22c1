//! Shared formatting helpers for the text export formats.

/// Formats a degree value with at most 7 decimal places (about 1 cm on the
/// ground), trailing zeros trimmed. Keeps text outputs diff-stable.
pub(crate) fn fmt_degrees(v: f64) -> String {
    fmt_trimmed(v, 7)
}

/// Formats meters with exactly 3 decimal places.
pub(crate) fn fmt_meters(v: f64) -> String {
    format!("{:.3}", v)
}

/// Fixed-decimal formatting with trailing zeros (and a bare trailing dot)
/// removed. `-0` collapses to `0`.
pub(crate) fn fmt_trimmed(v: f64, decimals: usize) -> String {
    let mut s = format!("{:.*}", decimals, v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// RFC 4180 field quoting: fields containing comma, quote, CR or LF are
/// wrapped in double quotes with inner quotes doubled.
pub(crate) fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_trimmed() {
        assert_eq!(fmt_degrees(-90.0490), "-90.049");
        assert_eq!(fmt_degrees(35.0), "35");
        assert_eq!(fmt_degrees(0.12345678), "0.1234568");
        assert_eq!(fmt_degrees(-0.0), "0");
    }

    #[test]
    fn meters_fixed() {
        assert_eq!(fmt_meters(12.0), "12.000");
        assert_eq!(fmt_meters(0.12345), "0.123");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("motorway"), "motorway");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
